//! Coset sums over Γ_∞\Γ: the Eisenstein series ψ(τ; r), vector-valued generalized
//! Poincaré series built from a cocycle, F = -Φ/ψ, and Knopp–Mason Poincaré series.

use crate::error::{Error, Result};
use crate::group::{complete_row, cpow, Gen, GroupElement, MultiplierSystem};
use crate::periods::{CVec, PAction, PElement};
use crate::rational::{frac, to_f64, Q};
use crate::weil::Representation;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Height used to normalize coset representatives.
pub const NORMALIZE_HEIGHT: f64 = 2.0;

/// One representative per lower row (c, d), |c|, |d| ≤ bound, both signs, with
/// -1/2 ≤ Re γ(2i) < 1/2; sorted by (|c|, |d|, c, d).
#[derive(Debug, Clone, PartialEq)]
pub struct CosetSet {
    pub bound: i64,
    pub elements: Vec<GroupElement>,
}

pub fn normalize(g: GroupElement) -> GroupElement {
    let x = g.act(Complex64::new(0.0, NORMALIZE_HEIGHT)).re;
    let l = -(x + 0.5).floor() as i64;
    GroupElement::t_pow(l) * g
}

pub fn cosets(bound: i64) -> Result<CosetSet> {
    if bound < 1 {
        return Err(Error::Invalid(format!("coset bound must be positive, got {bound}")));
    }
    let mut rows = Vec::new();
    for c in -bound..=bound {
        for d in -bound..=bound {
            if c.gcd(&d) == 1 {
                rows.push((c, d));
            }
        }
    }
    rows.sort_by_key(|&(c, d)| (c.abs(), d.abs(), c, d));
    let elements = rows
        .into_iter()
        .map(|(c, d)| {
            let (a, b) = complete_row(c, d);
            normalize(GroupElement { a, b, c, d })
        })
        .collect();
    Ok(CosetSet { bound, elements })
}

/// (κ_min, κ_max) with κ_min(c² + d²) ≤ |cτ + d|² ≤ κ_max(c² + d²): the eigenvalues of
/// [[|τ|², u], [u, 1]].
pub fn row_bounds(tau: Complex64) -> (f64, f64) {
    let (a, b, d) = (tau.norm_sqr(), tau.re, 1.0);
    let tr = a + d;
    let disc = ((a - d).powi(2) + 4.0 * b * b).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

/// Σ over rows with max(|c|, |d|) > B of |cτ+d|^{-r}, bounded through the lower
/// row constant: 8 κ_min^{-r/2} B^{2-r} / (r - 2).
pub fn coset_tail(tau: Complex64, r: f64, bound: i64) -> f64 {
    let (kmin, _) = row_bounds(tau);
    8.0 * kmin.powf(-r / 2.0) * (bound as f64).powf(2.0 - r) / (r - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub value: Complex64,
    pub tail: f64,
    /// Σ |cτ+d|^{-r}, the scale against which a near-zero is judged.
    pub majorant: f64,
}

/// ψ(τ; r) = Σ_{(c,d)=1} (cτ+d)^{-r}, both signs.
pub fn eisenstein_psi(tau: Complex64, r: i64, set: &CosetSet) -> Result<PsiValue> {
    if r <= 2 || r % 2 != 0 {
        return Err(Error::Refused(format!("ψ needs an even r > 2, got {r}")));
    }
    if tau.im <= 0.0 {
        return Err(Error::OutOfRegion(format!("tau = {tau}")));
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut majorant = 0.0;
    for g in &set.elements {
        let j = g.j_factor(tau);
        value += j.powi(-r as i32);
        majorant += j.norm().powi(-r as i32);
    }
    Ok(PsiValue { value, tail: coset_tail(tau, r as f64, set.bound), majorant })
}

/// max over samples of |ψ(Mτ) - (cτ+d)^r ψ(τ)| / |ψ(Mτ)|.
pub fn psi_transform_residual(g: &GroupElement, r: i64, taus: &[Complex64], set: &CosetSet) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &tau in taus {
        let lhs = eisenstein_psi(g.act(tau), r, set)?.value;
        let rhs = g.j_factor(tau).powi(r as i32) * eisenstein_psi(tau, r, set)?.value;
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1e-300));
    }
    Ok(worst)
}

/// A cocycle given on the generators: g_S explicit, g_T = 0, extended through words.
#[derive(Clone, Debug)]
pub struct CocycleInput {
    pub g_s: PElement,
    pub action: PAction,
}

impl CocycleInput {
    pub fn new(g_s: PElement, action: PAction) -> Self {
        Self { g_s, action }
    }

    pub fn dim(&self) -> usize {
        self.g_s.dim
    }

    /// g_V(τ) = Σ_i (g_{G_i} | G_{i+1}⋯G_n)(τ) for the word V = G_1⋯G_n.
    pub fn value(&self, v: &GroupElement, tau: Complex64) -> Result<CVec> {
        let mut gens = Vec::new();
        for g in v.word() {
            match g {
                Gen::S(e) => gens.extend(std::iter::repeat(GroupElement::S).take(e.rem_euclid(4) as usize)),
                Gen::T(n) => gens.push(GroupElement::t_pow(n)),
            }
        }
        let mut acc = CVec::zeros(self.dim());
        let mut suffix = GroupElement::I;
        for g in gens.iter().rev() {
            if *g == GroupElement::S {
                acc += self.action.slash_vec(self.g_s.eval(suffix.act(tau))?, &suffix, tau);
            }
            suffix = *g * suffix;
        }
        Ok(acc)
    }

    /// e of the convergence condition, from the certificate on g_S.
    pub fn growth_exponent(&self) -> Result<f64> {
        let cert = self.g_s.growth.ok_or_else(|| {
            Error::Refused("cocycle has no growth certificate; certify g_S first".into())
        })?;
        Ok((cert.rho / 2.0).max(cert.sigma - self.action.weight / 2.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareValue {
    pub value: Vec<Complex64>,
    pub tail: f64,
}

fn check_r(input: &CocycleInput, r: i64) -> Result<()> {
    if r % 2 != 0 || r <= 2 {
        return Err(Error::Refused(format!("r must be an even integer > 2, got {r}")));
    }
    let e = input.growth_exponent()?;
    if (r as f64) <= 2.0 * e + 4.0 {
        return Err(Error::Refused(format!(
            "r = {r} is below the convergence threshold 2e + 4 = {}",
            2.0 * e + 4.0
        )));
    }
    Ok(())
}

/// Φ(τ; r) = Σ_{V ∈ cosets} g_V(τ) (cτ+d)^{-r}.
pub fn generalized_poincare(input: &CocycleInput, r: i64, tau: Complex64, set: &CosetSet) -> Result<PoincareValue> {
    check_r(input, r)?;
    let mut acc = CVec::zeros(input.dim());
    for v in &set.elements {
        let j = v.j_factor(tau).powi(-r as i32);
        acc += input.value(v, tau)? * j;
    }
    let e = input.growth_exponent()?;
    let cert = input.g_s.growth.expect("checked");
    let tail = cert.k * (tau.norm() + 1.0).powf(2.0 * e) * coset_tail(tau, r as f64 - 2.0 * e, set.bound);
    Ok(PoincareValue { value: acc.iter().copied().collect(), tail })
}

/// Points where |ψ| is small against its majorant are flagged instead of trusted.
pub const PSI_ZERO_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FValue {
    pub value: Vec<Complex64>,
    pub psi: Complex64,
    pub near_psi_zero: bool,
}

/// F = -Φ(τ; r)/ψ(τ; r); the cocycle's g_T vanishes, so the shift g₀ is zero.
pub struct ConstructedF {
    pub input: CocycleInput,
    pub r: i64,
    pub set: CosetSet,
}

impl ConstructedF {
    pub fn new(input: CocycleInput, r: i64, bound: i64) -> Result<Self> {
        check_r(&input, r)?;
        Ok(Self { input, r, set: cosets(bound)? })
    }

    pub fn eval(&self, tau: Complex64) -> Result<FValue> {
        let psi = eisenstein_psi(tau, self.r, &self.set)?;
        let phi = generalized_poincare(&self.input, self.r, tau, &self.set)?;
        let value = phi.value.iter().map(|x| -x / psi.value).collect();
        Ok(FValue { value, psi: psi.value, near_psi_zero: psi.value.norm() < PSI_ZERO_RATIO * psi.majorant })
    }

    /// F as an element with the cocycle's action; errors at flagged points.
    pub fn as_pelement(self: &std::sync::Arc<Self>) -> PElement {
        let me = self.clone();
        PElement::new(self.input.dim(), format!("F(r = {})", self.r), move |t| {
            let v = me.eval(t)?;
            if v.near_psi_zero {
                return Err(Error::OutOfRegion(format!("tau = {t} is near a zero of psi")));
            }
            Ok(CVec::from_vec(v.value))
        })
    }

    /// max over samples of |(F|γ) - F - g_γ|, skipping flagged points; returns the
    /// residual and the number of skipped samples.
    pub fn cocycle_recovery_residual(&self, g: &GroupElement, taus: &[Complex64]) -> Result<(f64, usize)> {
        let mut worst: f64 = 0.0;
        let mut skipped = 0;
        for &tau in taus {
            let (a, b) = (self.eval(g.act(tau))?, self.eval(tau)?);
            if a.near_psi_zero || b.near_psi_zero {
                skipped += 1;
                continue;
            }
            let lhs = self.input.action.slash_vec(CVec::from_vec(a.value), g, tau) - CVec::from_vec(b.value);
            worst = worst.max((lhs - self.input.value(g, tau)?).norm());
        }
        Ok((worst, skipped))
    }
}

/// Knopp–Mason Poincaré series
/// P(τ) = ½ Σ_{M ∈ Γ_∞\Γ} e((m + κ_j) Mτ) χ(M)^{-1} (cτ+d)^{-r} ρ(M)^{-1} e_j.
#[derive(Debug, Clone, PartialEq)]
pub struct KmPoincare {
    pub rep: Representation,
    pub chi: MultiplierSystem,
    pub m_idx: i64,
    pub j: usize,
    /// κ_j with χ(T)ρ(T)_{jj} = e(κ_j).
    pub kappa: Q,
}

impl KmPoincare {
    pub fn new(rep: Representation, chi: MultiplierSystem, m_idx: i64, j: usize) -> Result<Self> {
        if chi.weight <= 2.0 {
            return Err(Error::Refused(format!("weight r = {} must exceed 2", chi.weight)));
        }
        if j >= rep.dim {
            return Err(Error::Invalid(format!("component {j} out of range")));
        }
        let kappa = frac(chi.kappa() + rep.t_phases[j]);
        if to_f64(kappa) + m_idx as f64 <= 0.0 {
            return Err(Error::Invalid("m + κ_j must be positive".into()));
        }
        Ok(Self { rep, chi, m_idx, j, kappa })
    }

    pub fn eval(&self, tau: Complex64, set: &CosetSet) -> Result<PoincareValue> {
        let r = self.chi.weight;
        let expo = self.m_idx as f64 + to_f64(self.kappa);
        let mut acc = CVec::zeros(self.rep.dim);
        for g in &set.elements {
            let mt = g.act(tau);
            let w = (Complex64::new(0.0, 2.0 * PI * expo) * mt).exp() * self.chi.eval(g).conj()
                * cpow(g.j_factor(tau), -r);
            let col = self.rep.element(g).adjoint().column(self.j).into_owned();
            acc += col * w;
        }
        acc *= Complex64::new(0.5, 0.0);
        Ok(PoincareValue { value: acc.iter().copied().collect(), tail: 0.5 * coset_tail(tau, r, set.bound) })
    }

    /// max over γ, τ of |(P|γ) - P| / max(1, |P|).
    pub fn transform_residual(&self, gammas: &[GroupElement], taus: &[Complex64], set: &CosetSet) -> Result<f64> {
        let act = PAction { weight: self.chi.weight, chi: self.chi, rho: self.rep.clone() };
        let mut worst: f64 = 0.0;
        for g in gammas {
            for &tau in taus {
                let p = CVec::from_vec(self.eval(tau, set)?.value);
                let pg = CVec::from_vec(self.eval(g.act(tau), set)?.value);
                let lhs = act.slash_vec(pg, g, tau);
                worst = worst.max((lhs - &p).norm() / p.norm().max(1.0));
            }
        }
        Ok(worst)
    }
}

/// Synthetic scalar coboundary of weight -2: g_γ = (p|γ) - p with p = 1, so
/// g_γ(τ) = (cτ+d)² - 1.
pub fn synthetic_coboundary() -> Result<(CocycleInput, PElement)> {
    let action = PAction {
        weight: -2.0,
        chi: MultiplierSystem::trivial(-2.0),
        rho: Representation::trivial(1),
    };
    let p = PElement::new(1, "1", |_| Ok(CVec::from_element(1, Complex64::new(1.0, 0.0))));
    let mut g_s = action.coboundary(&p, &GroupElement::S);
    g_s.description = "tau^2 - 1".into();
    g_s.certify_growth(&crate::growth::GrowthGrid::default())?;
    Ok((CocycleInput::new(g_s, action), p))
}
