//! Theta series θ_μ(τ,z) = Σ_{r ≡ μ (2m)} q^{r²/4m} ζ^r and the theta decomposition
//! Φ = Σ_μ f_μ θ_μ of an index-m Jacobi form.

use crate::error::{Error, Result};
use crate::group::{cpow, GroupElement, MultiplierSystem};
use crate::jacobi::JacobiForm;
use crate::rational::{self, phase, q, qi, Q};
use crate::series::{FourierSeries, JacobiSeries, SeriesDoc};
use crate::weil::{chi_double_prime, JParity, Representation, RepresentationSpec};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSeries {
    pub m: i64,
    /// μ = 2ma in 0..2m.
    pub mu: i64,
    pub series: JacobiSeries,
}

/// Representative of μ mod 2m with the smallest |r|.
pub fn smallest_rep(mu: i64, m: i64) -> i64 {
    let r = mu.rem_euclid(2 * m);
    if r > m {
        r - 2 * m
    } else {
        r
    }
}

pub fn theta_series(m: i64, mu: i64, truncation: Q) -> Result<ThetaSeries> {
    if m < 1 {
        return Err(Error::Invalid(format!("index must be positive, got {m}")));
    }
    let mu = mu.rem_euclid(2 * m);
    let kappa = rational::frac(q(mu * mu, 4 * m));
    let mut s = JacobiSeries::new(qi(m), kappa, 1, 1, truncation)?;
    let r0 = smallest_rep(mu, m);
    if q(r0 * r0, 4 * m) <= truncation {
        let reach = (2.0 * ((m as f64) * rational::to_f64(truncation)).max(0.0).sqrt()) as i64 + 2 * m + 2;
        let mut r = r0 - ((reach / (2 * m)) + 1) * 2 * m;
        while r <= reach + 2 * m {
            let e = q(r * r, 4 * m);
            if e <= truncation {
                s.insert_at(e, qi(r), Complex64::new(1.0, 0.0))?;
            }
            r += 2 * m;
        }
    }
    Ok(ThetaSeries { m, mu, series: s })
}

pub fn theta_basis(m: i64, truncation: Q) -> Result<Vec<ThetaSeries>> {
    (0..2 * m).map(|mu| theta_series(m, mu, truncation)).collect()
}

/// θ_μ(τ,z) by direct lattice summation until terms drop below 1e-18 relative.
pub fn theta_eval(m: i64, mu: i64, tau: Complex64, z: Complex64) -> Complex64 {
    let two_m = 2 * m;
    let r0 = smallest_rep(mu, m);
    let term = |r: i64| {
        let rf = r as f64;
        (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (tau * (rf * rf / (4 * m) as f64) + z * rf)).exp()
    };
    let mut s = term(r0);
    for dir in [1i64, -1] {
        let mut r = r0 + dir * two_m;
        loop {
            let t = term(r);
            s += t;
            // the exponent decreases monotonically once |r| exceeds the stationary point
            let rf = r as f64;
            let past = rf * dir as f64 > -(z.im / tau.im) * (two_m * dir) as f64;
            if past && t.norm() < 1e-18 * s.norm().max(1e-300) {
                break;
            }
            r += dir * two_m;
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaLawResidual {
    pub m: i64,
    pub s_law: f64,
    pub t_law: f64,
}

/// Residuals of θ_a(-1/τ, z/τ) = (2m)^{-1/2}(τ/i)^{1/2}e(mz²/τ) Σ_b e(-2m ab)θ_b(τ,z)
/// and θ_a(τ+1, z) = e(ma²)θ_a(τ,z), relative to max(1, |θ|).
pub fn theta_transform_check(
    m: i64,
    samples: &[(Complex64, Complex64)],
    truncation: Q,
) -> Result<ThetaLawResidual> {
    let basis = theta_basis(m, truncation)?;
    let n = 2 * m;
    let mut s_law: f64 = 0.0;
    let mut t_law: f64 = 0.0;
    for &(tau, z) in samples {
        let vals: Vec<Complex64> = basis
            .iter()
            .map(|t| t.series.eval(tau, z).map(|e| e.value))
            .collect::<Result<_>>()?;
        let pref = cpow(tau / Complex64::i(), 0.5) / (n as f64).sqrt()
            * (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (z * z * m as f64) / tau).exp();
        for (a, th) in basis.iter().enumerate() {
            let lhs = th.series.eval(-1.0 / tau, z / tau)?.value;
            let mut rhs = Complex64::new(0.0, 0.0);
            for (b, v) in vals.iter().enumerate() {
                rhs += phase(q(-((a * b) as i64), n)) * v;
            }
            rhs *= pref;
            s_law = s_law.max((lhs - rhs).norm() / lhs.norm().max(1.0));
            let lt = th.series.eval(tau + 1.0, z)?.value;
            let rt = phase(q((a * a) as i64, 4 * m)) * vals[a];
            t_law = t_law.max((lt - rt).norm() / lt.norm().max(1.0));
        }
    }
    Ok(ThetaLawResidual { m, s_law, t_law })
}

/// Vector-valued modular form (f_μ)_μ with weight, multiplier χ'' and representation ρ''.
#[derive(Debug, Clone, PartialEq)]
pub struct VVForm {
    pub m: i64,
    pub components: Vec<FourierSeries>,
    pub weight: f64,
    pub multiplier: MultiplierSystem,
    pub rep: Representation,
}

impl VVForm {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, tau: Complex64) -> Result<DVector<Complex64>> {
        let v: Vec<Complex64> = self
            .components
            .iter()
            .map(|f| f.eval(tau).map(|e| e.value))
            .collect::<Result<_>>()?;
        Ok(DVector::from_vec(v))
    }

    pub fn tail(&self, v: f64) -> f64 {
        self.components.iter().map(|f| f.tail_estimate(v)).fold(0.0, f64::max)
    }

    /// χ(γ)^{-1}(cτ+d)^{-k}ρ(γ)^{-1} f(γτ).
    pub fn slash(&self, g: &GroupElement, tau: Complex64) -> Result<DVector<Complex64>> {
        let f = self.eval(g.act(tau))?;
        let r = self.rep.element(g).adjoint();
        let s = self.multiplier.eval(g).conj() * cpow(g.j_factor(tau), -self.weight);
        Ok((r * f) * s)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.components = out.components.iter().map(|f| f.scale(c)).collect();
        out
    }

    /// True when every component has strictly positive exponents.
    pub fn is_cuspidal(&self) -> bool {
        self.components
            .iter()
            .all(|f| f.terms().all(|(e, c)| c.norm() < 1e-10 || e > qi(0)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let comps: Vec<_> = self
            .components
            .iter()
            .enumerate()
            .map(|(mu, f)| {
                let a = q(mu as i64, 2 * self.m);
                serde_json::json!({"a": [a.numer(), a.denom()], "series": f.to_doc()})
            })
            .collect();
        serde_json::json!({
            "weight": self.weight,
            "m": self.m,
            "multiplier_eta_power": self.multiplier.eta_power,
            "components": comps,
        })
    }

    pub fn components_from_json(v: &serde_json::Value) -> Result<Vec<FourierSeries>> {
        let arr = v["components"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing components".into()))?;
        arr.iter()
            .map(|c| {
                let doc: SeriesDoc = serde_json::from_value(c["series"].clone())
                    .map_err(|e| Error::Parse(e.to_string()))?;
                FourierSeries::from_doc(&doc)
            })
            .collect()
    }
}

/// Theta decomposition: f_μ(τ) = Σ_N C_μ(N) q^{N/4m}, C_μ(N) = c((N + r²)/4m, r).
pub fn decompose(phi: &JacobiForm, spec: &RepresentationSpec) -> Result<VVForm> {
    let m = phi.m;
    if spec.m != m {
        return Err(Error::Invalid(format!("representation index {} != form index {m}", spec.m)));
    }
    let s = &phi.series;
    if s.zeta_den() != 1 && s.coeffs().keys().any(|&(_, r)| r % s.zeta_den() != 0) {
        return Err(Error::Invalid("zeta exponents must be integral for a theta decomposition".into()));
    }
    let n2 = 2 * m;
    let t = s.truncation();
    // per class μ: N -> (|r| of reference, coefficient)
    let mut classes: Vec<BTreeMap<Q, Complex64>> = vec![BTreeMap::new(); n2 as usize];
    for (a, rho, _) in s.terms() {
        let r = rho.to_integer();
        let mu = r.rem_euclid(n2);
        let r0 = smallest_rep(mu, m);
        let n = rational::sub(rational::mul(qi(4 * m), a)?, qi(r * r))?;
        classes[mu as usize]
            .entry(n)
            .or_insert_with(|| s.coeff_at((n + qi(r0 * r0)) / qi(4 * m), qi(r0)));
    }
    for (&(nk, rk), &c) in s.coeffs() {
        let a = s.q_exponent(nk);
        let r = s.z_exponent(rk).to_integer();
        let mu = r.rem_euclid(n2);
        let n = qi(4 * m) * a - qi(r * r);
        let want = classes[mu as usize][&n];
        if (c - want).norm() > 1e-9 * c.norm().max(1.0) {
            return Err(Error::Inconsistent {
                n: nk,
                r,
                detail: format!("c = {c} but the class representative has {want}"),
            });
        }
    }
    let kappa = s.q_kappa();
    let lam = s.q_lambda();
    let mut comps = Vec::with_capacity(n2 as usize);
    for mu in 0..n2 {
        let r0 = smallest_rep(mu, m);
        let shift = q(r0 * r0, 4 * m);
        let off = rational::sub(kappa, rational::mul(qi(lam), shift)?)?;
        let ct = rational::sub(t, shift)?;
        let mut f = FourierSeries::new(rational::frac(off), lam, ct)?;
        for (&n, &c) in &classes[mu as usize] {
            let e = n / qi(4 * m);
            if e <= ct {
                let key = f.key_of(e).ok_or_else(|| {
                    Error::Invalid(format!("exponent {e} off the component lattice"))
                })?;
                f.insert(key, c)?;
            }
        }
        comps.push(f);
    }
    let weight = phi.weight - 0.5;
    let mut multiplier = chi_double_prime(&phi.multiplier, JParity::Odd, &spec.chi_prime);
    multiplier.weight = weight;
    Ok(VVForm { m, components: comps, weight, multiplier, rep: spec.rho.clone() })
}

/// Σ_μ f_μ θ_μ, truncated at min_μ (T_μ + r0_μ²/4m).
pub fn recompose(f: &VVForm) -> Result<JacobiSeries> {
    let m = f.m;
    if f.components.len() != (2 * m) as usize {
        return Err(Error::Invalid(format!(
            "expected {} components, got {}",
            2 * m,
            f.components.len()
        )));
    }
    let mut out_t: Option<Q> = None;
    for (mu, c) in f.components.iter().enumerate() {
        let r0 = smallest_rep(mu as i64, m);
        let t = rational::add(c.truncation(), q(r0 * r0, 4 * m))?;
        out_t = Some(out_t.map_or(t, |x: Q| x.min(t)));
    }
    let out_t = out_t.unwrap_or(qi(0));
    let mut staged: Vec<(Q, i64, Complex64)> = Vec::new();
    let mut lam = 1i64;
    for (mu, comp) in f.components.iter().enumerate() {
        lam = rational::lcm(lam, comp.lambda())?;
        let th = theta_series(m, mu as i64, out_t - comp.valuation().min(out_t))?;
        for (b, c) in comp.terms() {
            for (e, rho, _) in th.series.terms() {
                let a = rational::add(b, e)?;
                if a <= out_t {
                    staged.push((a, rho.to_integer(), c));
                }
            }
        }
    }
    let a0 = staged.first().map(|x| x.0).unwrap_or(qi(0));
    for &(a, _, _) in &staged {
        lam = rational::lcm(lam, *(a - a0).denom())?;
    }
    let kappa = rational::frac(rational::mul(a0, qi(lam))?);
    let mut out = JacobiSeries::new(qi(m), kappa, lam, 1, out_t)?;
    for (a, r, c) in staged {
        out.insert_at(a, qi(r), c)?;
    }
    Ok(out)
}

/// max over samples of |F|γ - F| / max(1, |F|).
pub fn vv_transform_check(f: &VVForm, g: &GroupElement, taus: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &tau in taus {
        let a = f.slash(g, tau)?;
        let b = f.eval(tau)?;
        worst = worst.max((a - &b).norm() / b.norm().max(1.0));
    }
    Ok(worst)
}

/// Coefficient-level comparison of two Jacobi series up to the smaller truncation.
pub fn series_max_diff(a: &JacobiSeries, b: &JacobiSeries) -> f64 {
    let t = a.truncation().min(b.truncation());
    let mut worst: f64 = 0.0;
    for (x, r, c) in a.terms().filter(|t0| t0.0 <= t) {
        worst = worst.max((c - b.coeff_at(x, r)).norm());
    }
    for (x, r, c) in b.terms().filter(|t0| t0.0 <= t) {
        worst = worst.max((c - a.coeff_at(x, r)).norm());
    }
    worst
}
