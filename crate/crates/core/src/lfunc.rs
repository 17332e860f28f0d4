//! Partial L-functions L(Φ, μ, γ, s) = Σ_N C_μ(N) e(-dN/(4mc)) (N/4m)^{-s} and the
//! cocycle representative built from their critical values.
//!
//! With β = N/4m the exponent of q in the component f_μ, the integral
//! ∫_{-d/c}^{-d/c+i∞} f_μ(w)(w + d/c)^n dw equals i^{n+1} n! (2π)^{-(n+1)} L(n+1),
//! which is how the critical values are computed by default.

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::jacobi::{JacobiForm, LatticeElement};
use crate::periods::{CVec, EichlerIntegral, PeriodCocycle, PeriodMethod, QUAD_REL_TOL};
use crate::special::{factorial, ln_gamma};
use crate::theta::{decompose, theta_eval};
use crate::weil::RepresentationSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LMethod {
    Dirichlet,
    Integral,
}

impl std::fmt::Display for LMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LMethod::Dirichlet => "dirichlet",
            LMethod::Integral => "integral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LValue {
    pub mu: usize,
    pub s: Complex64,
    pub value: Complex64,
    pub method: LMethod,
    pub error_estimate: f64,
}

/// |C_μ(N)| ≤ A β^θ fitted on the available coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBound {
    pub a: f64,
    pub theta: f64,
}

type CacheKey = (usize, GroupElement, u64, u64, LMethod);

pub struct PartialL {
    pub integral: Arc<EichlerIntegral>,
    pub m: i64,
    cache: Mutex<HashMap<CacheKey, LValue>>,
}

impl PartialL {
    pub fn new(integral: Arc<EichlerIntegral>) -> Self {
        let m = integral.g.m;
        Self { integral, m, cache: Mutex::new(HashMap::new()) }
    }

    pub fn from_form(phi: &JacobiForm, spec: &RepresentationSpec) -> Result<Self> {
        let g = decompose(phi, spec)?;
        Ok(Self::new(Arc::new(EichlerIntegral::new(g)?)))
    }

    pub fn dim(&self) -> usize {
        self.integral.dim()
    }

    fn check(&self, mu: usize, g: &GroupElement) -> Result<()> {
        if mu >= self.dim() {
            return Err(Error::Invalid(format!("class {mu} out of range 0..{}", self.dim())));
        }
        if g.c == 0 {
            return Err(Error::Invalid("partial L-functions need c != 0".into()));
        }
        Ok(())
    }

    /// Least-squares slope of log|C| against log β, padded by 1/4, with A taken as the
    /// smallest constant that covers every known coefficient.
    pub fn coefficient_bound(&self, mu: usize) -> CoefficientBound {
        let pts: Vec<(f64, f64)> = self
            .integral
            .component_terms(mu)
            .iter()
            .filter(|(_, c)| c.norm() > 1e-12)
            .map(|&(b, c)| (b.ln(), c.norm().ln()))
            .collect();
        if pts.is_empty() {
            return CoefficientBound { a: 0.0, theta: 0.0 };
        }
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / n, acc.1 + p.1 / n));
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let theta = slope.max(0.0) + 0.25;
        let a = pts.iter().map(|p| (p.1 - theta * p.0).exp()).fold(0.0, f64::max);
        CoefficientBound { a, theta }
    }

    /// Truncated twisted Dirichlet sum; refused when the fitted tail exceeds `tol`.
    pub fn dirichlet(&self, mu: usize, g: &GroupElement, s: Complex64, tol: f64) -> Result<LValue> {
        self.check(mu, g)?;
        let comp = &self.integral.g.components[mu];
        let x0 = -(g.d as f64) / g.c as f64;
        let mut value = Complex64::new(0.0, 0.0);
        for &(b, c) in self.integral.component_terms(mu) {
            value += c * Complex64::from_polar(1.0, 2.0 * PI * b * x0) * (-s * b.ln()).exp();
        }
        let bound = self.coefficient_bound(mu);
        let tail = if bound.a == 0.0 {
            0.0
        } else {
            let t = crate::rational::to_f64(comp.truncation());
            let ex = bound.theta - s.re + 1.0;
            if ex >= 0.0 || t <= 0.0 {
                f64::INFINITY
            } else {
                comp.lambda() as f64 * bound.a * t.powf(ex) / (-ex)
            }
        };
        if !(tail <= tol) {
            return Err(Error::Refused(format!(
                "Dirichlet tail {tail:e} exceeds tolerance {tol:e} at s = {s}"
            )));
        }
        Ok(LValue { mu, s, value, method: LMethod::Dirichlet, error_estimate: tail })
    }

    /// L(s) for real s > 0 from the moment of order s - 1.
    pub fn integral(&self, mu: usize, g: &GroupElement, s: f64) -> Result<LValue> {
        self.check(mu, g)?;
        if s <= 0.0 {
            return Err(Error::Invalid(format!("integral method needs s > 0, got {s}")));
        }
        let key = (mu, *g, s.to_bits(), 0u64, LMethod::Integral);
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let e = s - 1.0;
        let moment = if e.fract() == 0.0 {
            self.integral.moment(g, e as u32, PeriodMethod::Termwise)?
        } else {
            self.integral.mellin_moment(g, e)?
        };
        // (2π)^s / (i^s Γ(s))
        let conv = Complex64::from_polar((s * (2.0 * PI).ln() - ln_gamma(s)).exp(), -PI * s / 2.0);
        let value = moment[mu] * conv;
        let y = 1.0 / g.c.abs() as f64;
        let err = (QUAD_REL_TOL * moment[mu].norm() + self.integral.g.tail(y)) * conv.norm();
        let lv = LValue { mu, s: Complex64::new(s, 0.0), value, method: LMethod::Integral, error_estimate: err };
        Ok(*self.cache.lock().expect("cache lock").entry(key).or_insert(lv))
    }

    pub fn value(&self, mu: usize, g: &GroupElement, s: Complex64, method: LMethod, tol: f64) -> Result<LValue> {
        match method {
            LMethod::Dirichlet => self.dirichlet(mu, g, s, tol),
            LMethod::Integral => {
                if s.im != 0.0 {
                    return Err(Error::Unsupported("integral method takes real s only".into()));
                }
                self.integral(mu, g, s.re)
            }
        }
    }

    fn integer_k(&self) -> Result<u32> {
        let k = self.integral.k;
        if k.fract() != 0.0 || k < 1.0 {
            return Err(Error::Unsupported(format!(
                "the explicit representative needs an integer k > 0, got k = {k}"
            )));
        }
        Ok(k as u32)
    }

    /// L(n+1) for every class and n = 0..k by the integral method.
    pub fn critical_values(&self, g: &GroupElement) -> Result<Vec<LValue>> {
        let k = self.integer_k()?;
        let mut out = Vec::new();
        for mu in 0..self.dim() {
            for n in 0..=k {
                out.push(self.integral(mu, g, (n + 1) as f64)?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumOrder {
    /// Outer sum over n = 0..k, as derived.
    Proof,
    /// Summation variable running over the factorial slot from 0 to n = k; with
    /// 1/(negative)! = 0 only the constant term survives.
    Statement,
}

/// r_{μ,γ}(τ) = Σ_n coeffs[μ][n] (τ + d/c)^{k-n}.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleRepresentative {
    pub gamma: GroupElement,
    pub x: LatticeElement,
    pub k: u32,
    pub m: i64,
    pub order: SumOrder,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl CocycleRepresentative {
    pub fn components(&self, tau: Complex64) -> CVec {
        let shift = tau + self.gamma.d as f64 / self.gamma.c as f64;
        CVec::from_iterator(
            self.coeffs.len(),
            self.coeffs.iter().map(|cs| {
                cs.iter()
                    .enumerate()
                    .map(|(n, c)| c * shift.powu(self.k - n as u32))
                    .sum::<Complex64>()
            }),
        )
    }

    /// Σ_μ r_μ(τ) θ_μ(τ, z).
    pub fn eval(&self, tau: Complex64, z: Complex64) -> Complex64 {
        self.components(tau)
            .iter()
            .enumerate()
            .map(|(mu, r)| r * theta_eval(self.m, mu as i64, tau, z))
            .sum()
    }
}

/// Coefficient k!(-1)^{k+n} conj(L(n+1)) / ((k-n)!(2πi)^{n+1}).
fn rep_coefficient(k: u32, n: u32, l: Complex64) -> Complex64 {
    let sign = if (k + n) % 2 == 0 { 1.0 } else { -1.0 };
    let denom = factorial(k - n) * Complex64::new(0.0, 2.0 * PI).powu(n + 1);
    l.conj() * (factorial(k) * sign) / denom
}

pub fn cocycle_representative(
    pl: &PartialL,
    g: &GroupElement,
    x: LatticeElement,
    order: SumOrder,
) -> Result<CocycleRepresentative> {
    let k = pl.integer_k()?;
    if g.c == 0 {
        return Err(Error::Invalid("the representative formula needs c != 0".into()));
    }
    let mut coeffs = Vec::with_capacity(pl.dim());
    for mu in 0..pl.dim() {
        let mut cs = vec![Complex64::new(0.0, 0.0); k as usize + 1];
        match order {
            SumOrder::Proof => {
                for n in 0..=k {
                    cs[n as usize] = rep_coefficient(k, n, pl.integral(mu, g, (n + 1) as f64)?.value);
                }
            }
            SumOrder::Statement => {
                cs[k as usize] = rep_coefficient(k, k, pl.integral(mu, g, (k + 1) as f64)?.value);
            }
        }
        coeffs.push(cs);
    }
    Ok(CocycleRepresentative { gamma: *g, x, k, m: pl.m, order, coeffs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeRow {
    pub gamma: String,
    /// max |r_μ(τ) - g_{γ,μ}(τ)| over samples.
    pub component_residual: f64,
    /// max |Σ r_μ θ_μ - Σ g_{γ,μ} θ_μ| over (τ, z) samples.
    pub jacobi_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeReport {
    pub rows: Vec<RepresentativeRow>,
    pub max_residual: f64,
}

/// Compare the L-value representative with the theta lift of the period cocycle.
/// γ fixing i∞ gives zero on both sides.
pub fn verify_representative(
    pl: &PartialL,
    gammas: &[GroupElement],
    samples: &[(Complex64, Complex64)],
) -> Result<RepresentativeReport> {
    let pc = PeriodCocycle::new(pl.integral.clone(), PeriodMethod::Quadrature);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for g in gammas {
        let mut comp: f64 = 0.0;
        let mut jac: f64 = 0.0;
        for &(tau, z) in samples {
            let period = pc.value(g, tau)?;
            let r = if g.c == 0 {
                CVec::zeros(pl.dim())
            } else {
                cocycle_representative(pl, g, LatticeElement::ZERO, SumOrder::Proof)?.components(tau)
            };
            comp = comp.max((&r - &period).norm());
            let th: Vec<Complex64> =
                (0..pl.dim()).map(|mu| theta_eval(pl.m, mu as i64, tau, z)).collect();
            let lift = |v: &CVec| v.iter().zip(&th).map(|(a, b)| a * b).sum::<Complex64>();
            jac = jac.max((lift(&r) - lift(&period)).norm());
        }
        worst = worst.max(comp).max(jac);
        rows.push(RepresentativeRow { gamma: g.to_string(), component_residual: comp, jacobi_residual: jac });
    }
    Ok(RepresentativeReport { rows, max_residual: worst })
}

/// Quadrature oracle conj(∫_{-d/c}^{i∞} h(w)(w - τ̄)^k dw) for the representative.
pub fn direct_period(pl: &PartialL, g: &GroupElement, tau: Complex64) -> Result<CVec> {
    pl.integral.period_pointwise(g, tau)
}
