//! Cocycles on the Jacobi group and their relation to vector-valued cocycles through
//! the theta expansion p = Σ_μ g_μ θ_μ.

use crate::error::{Error, Result};
use crate::growth::{self, GrowthCertificate, GrowthGrid};
use crate::group::{GroupElement, MultiplierSystem};
use crate::jacobi::{slash_jacobi_eval, JacobiForm, JacobiGroupElement, LatticeElement};
use crate::periods::{CVec, PAction, PElement};
use crate::rational::{self, frac, phase, qi, Q};
use crate::series::{FourierSeries, JacobiSeries};
use crate::theta::{decompose, recompose, theta_eval, VVForm};
use crate::weil::{build_generators, CMat, JParity, Representation};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Weight, index and multiplier of the Jacobi slash |_{w, m, χ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiAction {
    pub weight: f64,
    pub m: i64,
    pub chi: MultiplierSystem,
}

pub type JacobiFn = Arc<dyn Fn(Complex64, Complex64) -> Result<Complex64> + Send + Sync>;
pub type JacobiCocycleFn =
    Arc<dyn Fn(&JacobiGroupElement, Complex64, Complex64) -> Result<Complex64> + Send + Sync>;
pub type VvCocycleFn = Arc<dyn Fn(&GroupElement, Complex64) -> Result<CVec> + Send + Sync>;

impl JacobiAction {
    pub fn slash_at(&self, f: &JacobiFn, e: &JacobiGroupElement, tau: Complex64, z: Complex64) -> Result<Complex64> {
        let g = |t: Complex64, w: Complex64| f(t, w);
        slash_jacobi_eval(&g, e, self.weight, self.m as f64, &self.chi, tau, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CocycleKind {
    ThetaLifted,
    Explicit,
}

#[derive(Clone)]
pub struct JacobiCocycle {
    pub kind: CocycleKind,
    pub description: String,
    value: JacobiCocycleFn,
}

impl JacobiCocycle {
    pub fn new(kind: CocycleKind, description: impl Into<String>, value: JacobiCocycleFn) -> Self {
        Self { kind, description: description.into(), value }
    }

    pub fn eval(&self, e: &JacobiGroupElement, tau: Complex64, z: Complex64) -> Result<Complex64> {
        (self.value)(e, tau, z)
    }

    pub fn element(&self, e: &JacobiGroupElement) -> JacobiFn {
        let (f, e) = (self.value.clone(), *e);
        Arc::new(move |t, z| f(&e, t, z))
    }
}

/// Σ_μ v_μ θ_μ(τ, z).
pub fn theta_pair(m: i64, v: &CVec, tau: Complex64, z: Complex64) -> Complex64 {
    v.iter().enumerate().map(|(mu, c)| c * theta_eval(m, mu as i64, tau, z)).sum()
}

pub fn lift_pelement(p: &PElement, m: i64) -> JacobiFn {
    let p = p.clone();
    Arc::new(move |t, z| Ok(theta_pair(m, &p.eval(t)?, t, z)))
}

/// p_{(γ,X)} = Σ_μ g_{γ,μ} θ_μ; the lattice part X does not enter.
pub fn lift_cocycle(vv: VvCocycleFn, dim: usize, m: i64) -> Result<JacobiCocycle> {
    if dim != (2 * m) as usize {
        return Err(Error::Invalid(format!("{dim} components cannot be lifted at index {m}")));
    }
    let f: JacobiCocycleFn = Arc::new(move |e, t, z| Ok(theta_pair(m, &vv(&e.gamma, t)?, t, z)));
    Ok(JacobiCocycle::new(CocycleKind::ThetaLifted, "theta lift", f))
}

/// Σ_μ (P^{-1} g_γ)_μ θ_μ. When conj(ρ) = ε^{2j} P ρ P^{-1}, this carries a cocycle in
/// the conjugate representation to a Jacobi cocycle whose multiplier is shifted by ε^{2j}.
pub fn lift_cocycle_intertwined(vv: VvCocycleFn, p: &CMat, m: i64) -> Result<JacobiCocycle> {
    let pinv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Invalid("intertwiner is singular".into()))?;
    let dim = pinv.nrows();
    let rotated: VvCocycleFn = Arc::new(move |g, t| Ok(&pinv * vv(g, t)?));
    let mut c = lift_cocycle(rotated, dim, m)?;
    c.description = "intertwined theta lift".into();
    Ok(c)
}

/// p_e = (p|e) - p.
pub fn jacobi_coboundary(p: JacobiFn, action: JacobiAction) -> JacobiCocycle {
    let f: JacobiCocycleFn = Arc::new(move |e, t, z| Ok(action.slash_at(&p, e, t, z)? - p(t, z)?));
    JacobiCocycle::new(CocycleKind::Explicit, "coboundary", f)
}

/// max over pairs and samples of
/// |p_{e1 e2} - (p_{e1}|e2) - p_{e2}| / max(1, |p_{e1 e2}|).
pub fn jacobi_cocycle_check(
    c: &JacobiCocycle,
    action: &JacobiAction,
    pairs: &[(JacobiGroupElement, JacobiGroupElement)],
    samples: &[(Complex64, Complex64)],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (e1, e2) in pairs {
        let e12 = e1.compose(e2);
        let p1 = c.element(e1);
        for &(tau, z) in samples {
            let lhs = c.eval(&e12, tau, z)?;
            let rhs = action.slash_at(&p1, e2, tau, z)? + c.eval(e2, tau, z)?;
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// Coefficient-level lift Σ f_μ θ_μ.
pub fn lift_series(components: &[FourierSeries], m: i64) -> Result<JacobiSeries> {
    recompose(&VVForm {
        m,
        components: components.to_vec(),
        weight: 0.0,
        multiplier: MultiplierSystem::trivial(0.0),
        rep: Representation::trivial(components.len()),
    })
}

/// Coefficient-level projection onto theta components.
pub fn project_series(s: &JacobiSeries) -> Result<Vec<FourierSeries>> {
    let m = s.m()?;
    let spec = build_generators(m, JParity::Odd)?;
    let form = JacobiForm::new(s.clone(), 0.5, MultiplierSystem::trivial(0.5))?;
    Ok(decompose(&form, &spec)?.components)
}

/// max over γ-samples of |lift((p|γ) - p) - ((lift p)|(γ,X) - lift p)|.
pub fn coboundary_lift_residual(
    p: &PElement,
    vv: &PAction,
    jac: &JacobiAction,
    elements: &[JacobiGroupElement],
    samples: &[(Complex64, Complex64)],
) -> Result<f64> {
    let lifted = lift_pelement(p, jac.m);
    let mut worst: f64 = 0.0;
    for e in elements {
        let cob = vv.coboundary(p, &e.gamma);
        for &(tau, z) in samples {
            let a = theta_pair(jac.m, &cob.eval(tau)?, tau, z);
            let b = jac.slash_at(&lifted, e, tau, z)? - lifted(tau, z)?;
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// Grid-fitted (K, ρ, σ) for |p(τ, z)| e^{-2πmy²/v}, maximized over z samples with
/// |y| ≤ v and x ∈ {0, 0.3} at every τ of the grid.
pub fn growth_certify_pe(p: &JacobiFn, m: i64, grid: &GrowthGrid) -> Result<GrowthCertificate> {
    growth::certify(
        |tau| {
            let v = tau.im;
            let mut best: f64 = 0.0;
            for x in [0.0, 0.3] {
                for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                    let y = t * v;
                    let val = p(tau, Complex64::new(x, y))?.norm();
                    best = best.max(val * (-2.0 * std::f64::consts::PI * m as f64 * y * y / v).exp());
                }
            }
            Ok(best)
        },
        grid,
    )
}

/// c·e(θ) q^α ζ^ρ with exact θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub phase: Q,
    pub alpha: Q,
    pub rho: Q,
}

impl Monomial {
    /// Elliptic slash by X = (λ, μ) at integral index m:
    /// q^α ζ^ρ ↦ e(mλμ + ρμ) q^{α + λρ + mλ²} ζ^{ρ + 2mλ}.
    pub fn slash_lattice(&self, m: i64, x: LatticeElement) -> Result<Self> {
        let (l, mu) = (qi(x.lambda), qi(x.mu));
        let ph = rational::add(rational::mul(qi(m), rational::mul(l, mu)?)?, rational::mul(self.rho, mu)?)?;
        let alpha = rational::add(
            rational::add(self.alpha, rational::mul(l, self.rho)?)?,
            rational::mul(qi(m), rational::mul(l, l)?)?,
        )?;
        let rho = rational::add(self.rho, qi(2 * m * x.lambda))?;
        Ok(Self { phase: frac(rational::add(self.phase, ph)?), alpha, rho })
    }

    pub fn same_function(&self, o: &Self) -> bool {
        self.alpha == o.alpha && self.rho == o.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstructionVerdict {
    NonCoboundary,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub n: Q,
    pub r: Q,
    pub m: i64,
    /// θ with obstruction phase e(θ), 0 ≤ θ < 1.
    pub phase: Q,
    pub phase_value: Complex64,
    pub verdict: ObstructionVerdict,
    /// Phase by which p_{(e1,0)(0,e1)} computed along the two orders disagree; nonzero
    /// means the family itself violates the cocycle law on the lattice commutator.
    pub relation_defect: Q,
    pub steps: Vec<String>,
}

/// Symbolic replay of the argument: from p|(0,e1) = p and q^n ζ^r = p|(e1,0) - p,
/// slashing by (0,e1) gives e(r) q^n ζ^r = q^n ζ^r.
pub fn lattice_obstruction(n: Q, r: Q, m: i64) -> Result<ObstructionReport> {
    if n <= qi(0) {
        return Err(Error::Invalid(format!("n must be positive, got {n}")));
    }
    let f1 = LatticeElement::new(0, 1);
    let mono = Monomial { phase: qi(0), alpha: n, rho: r };
    let mut steps = vec![
        "p_(0,(0,1)) = 0 gives p|(0,1) = p".to_string(),
        format!("p_(0,(1,0)) = q^{n} z^{r} = p|(1,0) - p"),
    ];
    let slashed = mono.slash_lattice(m, f1)?;
    steps.push(format!(
        "(q^{n} z^{r})|(0,1) = e({}) q^{} z^{}",
        slashed.phase, slashed.alpha, slashed.rho
    ));
    steps.push("(p|(1,0) - p)|(0,1) = p|(0,1)|(1,0) - p|(0,1) = p|(1,0) - p".into());
    debug_assert!(slashed.same_function(&mono));
    let phase_q = frac(slashed.phase - mono.phase);
    let verdict = if *phase_q.numer() == 0 {
        steps.push("e(r) = 1: no contradiction".into());
        ObstructionVerdict::Inconclusive
    } else {
        steps.push(format!("e({phase_q}) != 1: no witness p exists"));
        ObstructionVerdict::NonCoboundary
    };
    // (1,0)(0,1) = (0,1)(1,0) = (1,1); with p_(0,1) = 0 the cocycle law gives
    // p_(1,1) = p_(1,0)|(0,1) one way and p_(1,0) the other
    let relation_defect = frac(mono.slash_lattice(m, f1)?.phase - mono.phase);
    Ok(ObstructionReport {
        n,
        r,
        m,
        phase: phase_q,
        phase_value: phase(phase_q),
        verdict,
        relation_defect,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::build_testform;
    use crate::periods::{EichlerIntegral, PeriodCocycle, PeriodMethod};
    use crate::rational::q;
    use crate::weil::chi_double_prime;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn samples() -> Vec<(Complex64, Complex64)> {
        vec![(cz(0.1, 1.1), cz(0.2, 0.1)), (cz(-0.3, 0.8), cz(-0.1, 0.05)), (cz(0.4, 1.5), cz(0.35, -0.2))]
    }

    fn jac_action() -> JacobiAction {
        JacobiAction { weight: -1.5, m: 1, chi: MultiplierSystem::eta_power(13, -1.5) }
    }

    fn matched_vv_action() -> PAction {
        let spec = build_generators(1, JParity::Odd).unwrap();
        let mut chi = chi_double_prime(&MultiplierSystem::eta_power(13, -1.5), JParity::Odd, &spec.chi_prime);
        chi.weight = -2.0;
        PAction { weight: -2.0, chi, rho: spec.rho }
    }

    fn poly_p() -> PElement {
        PElement::new(2, "poly", |t| {
            Ok(CVec::from_vec(vec![t * t + cz(0.5, -1.0), t * cz(0.0, 2.0) - 3.0]))
        })
    }

    pub(crate) fn random_pairs(rng: &mut ChaCha8Rng, n: usize) -> Vec<(JacobiGroupElement, JacobiGroupElement)> {
        let mut out = Vec::new();
        while out.len() < n {
            let (a, b) = (GroupElement::random(rng, 4), GroupElement::random(rng, 4));
            if a.c.abs() > 8 || b.c.abs() > 8 || (a * b).c.abs() > 8 {
                continue;
            }
            let x1 = LatticeElement::new(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            let x2 = LatticeElement::new(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            out.push((JacobiGroupElement::new(a, x1), JacobiGroupElement::new(b, x2)));
        }
        out
    }

    #[test]
    fn lift_intertwines_coboundaries() {
        let es: Vec<JacobiGroupElement> = [("0,-1,1,0", (0, 0)), ("1,1,0,1", (1, -1)), ("2,1,1,1", (2, 3))]
            .iter()
            .map(|(g, (l, m))| JacobiGroupElement::new(g.parse().unwrap(), LatticeElement::new(*l, *m)))
            .collect();
        let r = coboundary_lift_residual(&poly_p(), &matched_vv_action(), &jac_action(), &es, &samples()).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn lifted_vv_coboundary_is_jacobi_cocycle() {
        let act = matched_vv_action();
        let p = poly_p();
        let vv: VvCocycleFn = Arc::new(move |g, t| Ok(act.slash_at(&p, g, t)? - p.eval(t)?));
        let c = lift_cocycle(vv, 2, 1).unwrap();
        let pairs = random_pairs(&mut ChaCha8Rng::seed_from_u64(3), 10);
        let r = jacobi_cocycle_check(&c, &jac_action(), &pairs, &samples()).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    fn testform_periods(t: i64) -> VvCocycleFn {
        let phi = build_testform(qi(t)).unwrap();
        let g = decompose(&phi, &build_generators(1, JParity::Odd).unwrap()).unwrap();
        let pc = Arc::new(PeriodCocycle::new(Arc::new(EichlerIntegral::new(g).unwrap()), PeriodMethod::Termwise));
        Arc::new(move |g, t| pc.value(g, t))
    }

    #[test]
    fn intertwined_lift_of_periods() {
        let spec = build_generators(1, JParity::Odd).unwrap();
        let (j, p) = crate::weil::conjugate_intertwiner(&spec.rho).unwrap();
        let c = lift_cocycle_intertwined(testform_periods(40), &p, 1).unwrap();
        // conj χ'' · ε^{2j} · χ' = ε^{12 + 2j + 1}
        let act = JacobiAction { weight: -1.5, m: 1, chi: MultiplierSystem::eta_power(13 + 2 * j, -1.5) };
        let pairs = random_pairs(&mut ChaCha8Rng::seed_from_u64(3), 10);
        let r = jacobi_cocycle_check(&c, &act, &pairs, &samples()).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn projection_inverts_lift() {
        let mut f0 = FourierSeries::new(qi(0), 1, qi(6)).unwrap();
        f0.insert(1, cz(1.0, 2.0)).unwrap();
        f0.insert(3, cz(-0.5, 0.0)).unwrap();
        let mut f1 = FourierSeries::new(q(3, 4), 1, q(23, 4)).unwrap();
        f1.insert(0, cz(2.0, 0.0)).unwrap();
        f1.insert(4, cz(0.0, 1.0)).unwrap();
        let lifted = lift_series(&[f0.clone(), f1.clone()], 1).unwrap();
        let back = project_series(&lifted).unwrap();
        for (a, b) in [f0, f1].iter().zip(&back) {
            for (e, c) in a.terms() {
                assert_eq!(b.coeff_at(e), c);
            }
        }
    }

    #[test]
    fn zero_lifts_to_zero() {
        let vv: VvCocycleFn = Arc::new(|_, _| Ok(CVec::zeros(2)));
        let c = lift_cocycle(vv, 2, 1).unwrap();
        let e = JacobiGroupElement::new(GroupElement::S, LatticeElement::new(1, 1));
        assert_eq!(c.eval(&e, cz(0.0, 1.0), cz(0.1, 0.0)).unwrap(), cz(0.0, 0.0));
        let vv3: VvCocycleFn = Arc::new(|_, _| Ok(CVec::zeros(3)));
        assert!(lift_cocycle(vv3, 3, 1).is_err());
    }

    #[test]
    fn obstruction_phases() {
        let r = lattice_obstruction(qi(1), q(1, 2), 1).unwrap();
        assert_eq!(r.verdict, ObstructionVerdict::NonCoboundary);
        assert_eq!(r.phase, q(1, 2));
        assert!((r.phase_value + 1.0).norm() < 1e-15);
        assert_eq!(r.relation_defect, q(1, 2));
        let i = lattice_obstruction(qi(1), qi(1), 1).unwrap();
        assert_eq!(i.verdict, ObstructionVerdict::Inconclusive);
        assert_eq!(i.phase, qi(0));
        assert_eq!(i.relation_defect, qi(0));
        let a = lattice_obstruction(qi(2), q(1, 3), 1).unwrap();
        let b = lattice_obstruction(qi(2), q(1, 5), 1).unwrap();
        assert_eq!((a.phase, b.phase), (q(1, 3), q(1, 5)));
        assert!(lattice_obstruction(qi(0), q(1, 2), 1).is_err());
    }

    #[test]
    fn growth_of_theta_and_monomials() {
        let grid = GrowthGrid::default();
        let th: JacobiFn = Arc::new(|t, z| Ok(theta_eval(1, 1, t, z)));
        let c = growth_certify_pe(&th, 1, &grid).unwrap();
        assert!(c.sigma <= 1.0, "{c:?}");
        let zero: JacobiFn = Arc::new(|_, _| Ok(cz(0.0, 0.0)));
        assert_eq!(growth_certify_pe(&zero, 1, &grid).unwrap().rho, 0.0);
        let mono: JacobiFn = Arc::new(|t, z| {
            Ok((Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (t + z * 0.5)).exp())
        });
        let c = growth_certify_pe(&mono, 1, &grid).unwrap();
        for tau in grid.points() {
            assert!(mono(tau, cz(0.0, 0.0)).unwrap().norm() < c.bound(tau));
        }
    }
}
