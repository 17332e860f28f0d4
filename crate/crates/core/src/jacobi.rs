//! Jacobi forms of index m: slash operators, the shipped test form and cuspidality.

use crate::error::{Error, Result};
use crate::group::{cpow, GroupElement, MultiplierSystem};
use crate::rational::{self, phase, q, qi, to_f64, Q};
use crate::series::{eta_series, JacobiSeries, SeriesDoc};
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeElement {
    pub lambda: i64,
    pub mu: i64,
}

impl LatticeElement {
    pub const ZERO: Self = Self { lambda: 0, mu: 0 };

    pub fn new(lambda: i64, mu: i64) -> Self {
        Self { lambda, mu }
    }

    /// Row vector (λ, μ)·γ.
    pub fn times(&self, g: &GroupElement) -> Self {
        Self {
            lambda: self.lambda * g.a + self.mu * g.c,
            mu: self.lambda * g.b + self.mu * g.d,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { lambda: self.lambda + o.lambda, mu: self.mu + o.mu }
    }
}

/// Element (γ, X) of the Jacobi group SL(2,Z) ⋉ Z².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JacobiGroupElement {
    pub gamma: GroupElement,
    pub x: LatticeElement,
}

impl JacobiGroupElement {
    pub fn new(gamma: GroupElement, x: LatticeElement) -> Self {
        Self { gamma, x }
    }

    /// (γ1, X1)(γ2, X2) = (γ1γ2, X1γ2 + X2).
    pub fn compose(&self, o: &Self) -> Self {
        Self { gamma: self.gamma * o.gamma, x: self.x.times(&o.gamma).add(&o.x) }
    }
}

/// Anything that can be evaluated on H x C.
pub trait JacobiEvaluable {
    fn eval_at(&self, tau: Complex64, z: Complex64) -> Result<Complex64>;
}

impl<F> JacobiEvaluable for F
where
    F: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    fn eval_at(&self, tau: Complex64, z: Complex64) -> Result<Complex64> {
        self(tau, z)
    }
}

impl JacobiEvaluable for JacobiSeries {
    fn eval_at(&self, tau: Complex64, z: Complex64) -> Result<Complex64> {
        Ok(self.eval(tau, z)?.value)
    }
}

/// Pointwise elliptic slash: e(m(λ²τ + 2λz + λμ)) Φ(τ, z + λτ + μ).
pub fn slash_elliptic_eval<F: JacobiEvaluable + ?Sized>(
    f: &F,
    m: f64,
    x: LatticeElement,
    tau: Complex64,
    z: Complex64,
) -> Result<Complex64> {
    let (l, mu) = (x.lambda as f64, x.mu as f64);
    let arg = (tau * (l * l) + z * (2.0 * l) + l * mu) * m;
    let pref = (Complex64::new(0.0, 2.0 * PI) * arg).exp();
    Ok(pref * f.eval_at(tau, z + tau * l + mu)?)
}

/// Pointwise modular slash of weight k and index m:
/// (cτ+d)^{-k} conj(χ(γ)) e(-cmz²/(cτ+d)) Φ(γτ, z/(cτ+d)).
pub fn slash_modular_eval<F: JacobiEvaluable + ?Sized>(
    f: &F,
    g: &GroupElement,
    k: f64,
    m: f64,
    chi: &MultiplierSystem,
    tau: Complex64,
    z: Complex64,
) -> Result<Complex64> {
    let j = g.j_factor(tau);
    let pref = cpow(j, -k)
        * chi.eval(g).conj()
        * (Complex64::new(0.0, -2.0 * PI) * (z * z * (g.c as f64 * m) / j)).exp();
    Ok(pref * f.eval_at(g.act(tau), z / j)?)
}

/// Slash by a Jacobi group element: (Φ|γ)|X.
pub fn slash_jacobi_eval<F: JacobiEvaluable + ?Sized>(
    f: &F,
    e: &JacobiGroupElement,
    k: f64,
    m: f64,
    chi: &MultiplierSystem,
    tau: Complex64,
    z: Complex64,
) -> Result<Complex64> {
    let inner = |t: Complex64, w: Complex64| slash_modular_eval(f, &e.gamma, k, m, chi, t, w);
    slash_elliptic_eval(&inner, m, e.x, tau, z)
}

fn discriminant(index: Q, alpha: Q, rho: Q) -> Q {
    qi(4) * index * alpha - rho * rho
}

/// Coefficient-level elliptic slash. The image truncation T' is the largest value
/// with T' + |λ| sqrt(4mT' - D_min) + mλ² <= T, so every retained image term is exact.
pub fn slash_elliptic_series(s: &JacobiSeries, x: LatticeElement) -> Result<JacobiSeries> {
    let m = s.index();
    let (l, mu) = (qi(x.lambda), qi(x.mu));
    if x.lambda == 0 && x.mu == 0 {
        return Ok(s.clone());
    }
    let t = s.truncation();
    let dmin = s
        .terms()
        .filter(|(_, _, c)| !c.is_zero())
        .map(|(a, r, _)| discriminant(m, a, r))
        .min()
        .unwrap_or(qi(0))
        .min(qi(0));
    let new_t = if x.lambda == 0 {
        t
    } else {
        let (mf, lf, tf, df) = (to_f64(m), x.lambda.abs() as f64, to_f64(t), to_f64(dmin));
        let need = |tp: f64| tp + lf * (4.0 * mf * tp - df).max(0.0).sqrt() + mf * lf * lf;
        let (mut lo, mut hi) = (-mf * lf * lf - 1.0 - lf * lf, tf);
        if need(hi) <= tf {
            lo = hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if need(mid) <= tf {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // round down onto a coarse rational grid
        let den = 1_000_000i64;
        q((lo * den as f64).floor() as i64, den)
    };
    let shift_q = rational::mul(m, l * l)?;
    let mut staged: Vec<(Q, Q, Complex64)> = Vec::new();
    for (a, r, c) in s.terms() {
        let na = rational::add(rational::add(a, rational::mul(l, r)?)?, shift_q)?;
        if na > new_t {
            continue;
        }
        let nr = rational::add(r, rational::mul(qi(2) * m, l)?)?;
        let ph = phase(rational::add(rational::mul(m, l * mu)?, rational::mul(r, mu)?)?);
        staged.push((na, nr, c * ph));
    }
    // smallest q-lattice containing every image exponent
    let a0 = staged.first().map(|t| t.0).unwrap_or(qi(0));
    let mut lam = s.q_lambda();
    for &(a, _, _) in &staged {
        lam = rational::lcm(lam, *(a - a0).denom())?;
    }
    let kappa = rational::frac(rational::mul(a0, qi(lam))?);
    let mut out = JacobiSeries::new(m, kappa, lam, s.zeta_den(), new_t)?;
    for (a, r, c) in staged {
        out.insert_at(a, r, c)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiForm {
    pub series: JacobiSeries,
    pub weight: f64,
    pub m: i64,
    pub multiplier: MultiplierSystem,
    pub cuspidal: bool,
}

impl JacobiEvaluable for JacobiForm {
    fn eval_at(&self, tau: Complex64, z: Complex64) -> Result<Complex64> {
        self.series.eval_at(tau, z)
    }
}

impl JacobiForm {
    pub fn new(series: JacobiSeries, weight: f64, multiplier: MultiplierSystem) -> Result<Self> {
        let m = series.m()?;
        let cuspidal = check_cuspidal(&series).cuspidal;
        Ok(Self { series, weight, m, multiplier, cuspidal })
    }

    pub fn slash_modular(&self, g: &GroupElement, tau: Complex64, z: Complex64) -> Result<Complex64> {
        slash_modular_eval(&self.series, g, self.weight, self.m as f64, &self.multiplier, tau, z)
    }

    /// max |Φ|γ - Φ| / max(1, |Φ|) over the samples.
    pub fn modular_residual(&self, g: &GroupElement, points: &[(Complex64, Complex64)]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &(tau, z) in points {
            let a = self.slash_modular(g, tau, z)?;
            let b = self.series.eval_at(tau, z)?;
            worst = worst.max((a - b).norm() / b.norm().max(1.0));
        }
        Ok(worst)
    }

    /// {weight, m, multiplier_eta_power, series}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "m": self.m,
            "multiplier_eta_power": self.multiplier.eta_power,
            "series": self.series.to_doc(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let weight = v["weight"].as_f64().ok_or_else(|| Error::Parse("missing weight".into()))?;
        let p = v["multiplier_eta_power"]
            .as_i64()
            .ok_or_else(|| Error::Parse("missing multiplier_eta_power".into()))?;
        let doc: SeriesDoc = serde_json::from_value(v["series"].clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let form = Self::new(JacobiSeries::from_doc(&doc)?, weight, MultiplierSystem::eta_power(p, weight))?;
        if let Some(m) = v["m"].as_i64() {
            if m != form.m {
                return Err(Error::Parse(format!("declared index {m} != series index {}", form.m)));
            }
        }
        Ok(form)
    }
}

/// A(τ,z) = Σ (-1)^n q^{(2n+1)²/8} ζ^{n+1/2}, index 1/2.
pub fn odd_theta_half(truncation: Q) -> Result<JacobiSeries> {
    let mut s = JacobiSeries::new(q(1, 2), q(1, 8), 1, 2, truncation)?;
    let mut n = 0i64;
    loop {
        let e = q((2 * n + 1) * (2 * n + 1), 8);
        if e > truncation {
            break;
        }
        for (nn, sign) in [(n, 1.0), (-n - 1, 1.0)] {
            let r = 2 * nn + 1;
            let sg = if nn.rem_euclid(2) == 0 { sign } else { -sign };
            s.insert_at(e, q(r, 2), Complex64::new(sg, 0.0))?;
        }
        n += 1;
    }
    Ok(s)
}

pub const TEST_WEIGHT: f64 = 4.5;
pub const TEST_ETA_POWER: i64 = 13;

/// Φ_test = η⁷ A²: weight 9/2, index 1, multiplier ε^13, exact up to `truncation`.
pub fn build_testform(truncation: Q) -> Result<JacobiForm> {
    let eta7 = eta_series(7, truncation)?;
    let a = odd_theta_half(truncation)?;
    let a2 = a.mul(&a)?;
    let phi = a2.mul_fourier(&eta7)?.truncate(truncation);
    JacobiForm::new(phi, TEST_WEIGHT, MultiplierSystem::eta_power(TEST_ETA_POWER, TEST_WEIGHT))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspidalWitness {
    pub cuspidal: bool,
    /// Minimal 4α - ρ²/m over the support, as (numerator, denominator).
    pub min_discriminant: Option<(i64, i64)>,
    pub at: Option<(i64, i64)>,
}

pub fn check_cuspidal(s: &JacobiSeries) -> CuspidalWitness {
    let m = s.index();
    let mut best: Option<(Q, (i64, i64))> = None;
    for (&key, &c) in s.coeffs() {
        if c.norm() < 1e-10 {
            continue;
        }
        let a = s.q_exponent(key.0);
        let r = s.z_exponent(key.1);
        let d = if m.is_zero() { qi(4) * a } else { qi(4) * a - r * r / m };
        if best.map_or(true, |(b, _)| d < b) {
            best = Some((d, key));
        }
    }
    match best {
        None => CuspidalWitness { cuspidal: true, min_discriminant: None, at: None },
        Some((d, key)) => CuspidalWitness {
            cuspidal: d > qi(0),
            min_discriminant: Some((*d.numer(), *d.denom())),
            at: Some(key),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn form_json_round_trip() {
        let f = build_testform(qi(12)).unwrap();
        let text = serde_json::to_string(&f.to_json()).unwrap();
        let back = JacobiForm::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn testform_leading_terms() {
        let f = build_testform(qi(8)).unwrap();
        let s = &f.series;
        assert_eq!(s.valuation(), q(13, 24));
        assert_eq!(s.coeff_at(q(13, 24), qi(1)), cz(1.0, 0.0));
        assert_eq!(s.coeff_at(q(13, 24), qi(0)), cz(-2.0, 0.0));
        assert_eq!(s.coeff_at(q(13, 24), qi(-1)), cz(1.0, 0.0));
        assert_eq!(f.multiplier.kappa(), q(13, 24));
        let w = check_cuspidal(s);
        assert!(w.cuspidal);
        assert_eq!(w.min_discriminant, Some((7, 6)));
    }

    #[test]
    fn product_of_factor_evaluations() {
        let t = qi(30);
        let f = build_testform(t).unwrap();
        let eta7 = eta_series(7, t).unwrap();
        let a = odd_theta_half(t).unwrap();
        for (tau, z) in [(cz(0.0, 1.0), cz(0.1, 0.0)), (cz(0.3, 0.8), cz(0.2, 0.05))] {
            let lhs = f.series.eval(tau, z).unwrap().value;
            let av = a.eval(tau, z).unwrap().value;
            let rhs = eta7.eval(tau).unwrap().value * av * av;
            assert!((lhs - rhs).norm() < 1e-12, "{lhs} {rhs}");
        }
        let zero = f.series.eval(cz(0.0, 1.0), cz(0.0, 0.0)).unwrap().value;
        assert!(zero.norm() < 1e-14);
    }

    #[test]
    fn s_invariance() {
        let f = build_testform(qi(40)).unwrap();
        let r = f.modular_residual(&GroupElement::S, &[(cz(0.0, 2.0), cz(0.1, 0.0))]).unwrap();
        assert!(r < 1e-8, "{r}");
        let pts = [
            (cz(0.1, 1.1), cz(0.1, 0.02)),
            (cz(-0.3, 0.9), cz(0.25, -0.03)),
            (cz(0.45, 1.3), cz(-0.2, 0.1)),
        ];
        let tst: GroupElement = "T S T".parse().unwrap();
        let stis: GroupElement = "S T^-1 S".parse().unwrap();
        for g in [GroupElement::T, GroupElement::S, GroupElement::T * GroupElement::S, stis, tst] {
            assert!(f.modular_residual(&g, &pts).unwrap() < 1e-8, "{g}");
        }
    }

    #[test]
    fn elliptic_monomial_phase() {
        let mut s = JacobiSeries::new(qi(1), qi(0), 1, 2, qi(5)).unwrap();
        s.insert_at(qi(2), q(1, 2), cz(1.0, 0.0)).unwrap();
        let out = slash_elliptic_series(&s, LatticeElement::new(0, 1)).unwrap();
        assert_eq!(out.coeff_at(qi(2), q(1, 2)), cz(-1.0, 0.0));
        let id = slash_elliptic_series(&s, LatticeElement::ZERO).unwrap();
        assert_eq!(id, s);
    }

    #[test]
    fn elliptic_series_matches_pointwise() {
        let f = build_testform(qi(30)).unwrap();
        for x in [LatticeElement::new(1, 0), LatticeElement::new(-1, 2), LatticeElement::new(2, -1)] {
            let img = slash_elliptic_series(&f.series, x).unwrap();
            for (tau, z) in [(cz(0.1, 1.2), cz(0.05, 0.02)), (cz(-0.2, 0.9), cz(0.3, -0.01))] {
                let a = img.eval(tau, z).unwrap().value;
                let b = slash_elliptic_eval(&f.series, 1.0, x, tau, z).unwrap();
                let c = f.series.eval(tau, z).unwrap().value;
                assert!((a - b).norm() < 1e-10, "{x:?}: {a} {b}");
                assert!((a - c).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn group_action_compatibility() {
        let f = |t: Complex64, w: Complex64| -> Result<Complex64> {
            Ok((t * cz(0.0, 1.3) + w * w * 0.7 + w).exp() * (t + cz(0.2, 2.0)).powf(-1.5))
        };
        let chi = MultiplierSystem::eta_power(13, 4.5);
        let e1 = JacobiGroupElement::new("S T^2".parse().unwrap(), LatticeElement::new(1, -1));
        let e2 = JacobiGroupElement::new("T S T^-1".parse().unwrap(), LatticeElement::new(0, 2));
        let e12 = e1.compose(&e2);
        let (tau, z) = (cz(0.1, 1.4), cz(0.2, 0.1));
        let step = |t: Complex64, w: Complex64| slash_jacobi_eval(&f, &e1, 4.5, 1.0, &chi, t, w);
        let lhs = slash_jacobi_eval(&step, &e2, 4.5, 1.0, &chi, tau, z).unwrap();
        let rhs = slash_jacobi_eval(&f, &e12, 4.5, 1.0, &chi, tau, z).unwrap();
        assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0), "{lhs} {rhs}");
    }

    #[test]
    fn zero_form_is_cuspidal() {
        let w = check_cuspidal(&JacobiSeries::zero(1, qi(5)));
        assert!(w.cuspidal && w.min_discriminant.is_none());
    }
}
