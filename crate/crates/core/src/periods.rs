//! Eichler integrals of vector-valued cusp forms and their period cocycles.
//!
//! For g of weight k+2 with multiplier χ'' and representation ρ'', the integral
//! G(τ) = conj(∫_{i∞}^τ g(w)(w - τ̄)^k dw) satisfies
//! (G|_{-k, conj χ'', conj ρ''} γ) - G = conj(∫_{γ^{-1}(i∞)}^{i∞} g(w)(w - τ̄)^k dw).

use crate::error::{Error, Result};
use crate::growth::{self, GrowthCertificate, GrowthGrid};
use crate::group::{cpow, GroupElement, MultiplierSystem};
use crate::quad::integrate_vec_to_infinity;
use crate::rational::{to_f64, Q};
use crate::series::DEFAULT_IM_FLOOR;
use crate::special::{factorial, incomplete_gamma_upper, incomplete_gamma_upper_scaled};
use crate::theta::VVForm;
use crate::weil::Representation;
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

pub type CVec = DVector<Complex64>;
pub type VecFn = Arc<dyn Fn(Complex64) -> Result<CVec> + Send + Sync>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Element of the module of vector-valued functions with polynomial-type growth.
#[derive(Clone)]
pub struct PElement {
    pub dim: usize,
    f: VecFn,
    pub description: String,
    pub growth: Option<GrowthCertificate>,
}

impl std::fmt::Debug for PElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PElement")
            .field("dim", &self.dim)
            .field("description", &self.description)
            .field("growth", &self.growth)
            .finish()
    }
}

impl PElement {
    pub fn new<F>(dim: usize, description: impl Into<String>, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<CVec> + Send + Sync + 'static,
    {
        Self { dim, f: Arc::new(f), description: description.into(), growth: None }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, "0", move |_| Ok(CVec::zeros(dim)))
    }

    pub fn eval(&self, tau: Complex64) -> Result<CVec> {
        if tau.im <= 0.0 {
            return Err(Error::OutOfRegion(format!("tau = {tau} is not in the upper half-plane")));
        }
        (self.f)(tau)
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = (self.f.clone(), o.f.clone());
        Self::new(self.dim, format!("({}) + ({})", self.description, o.description), move |t| {
            Ok(a(t)? + b(t)?)
        })
    }

    pub fn sub(&self, o: &Self) -> Self {
        let (a, b) = (self.f.clone(), o.f.clone());
        Self::new(self.dim, format!("({}) - ({})", self.description, o.description), move |t| {
            Ok(a(t)? - b(t)?)
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let a = self.f.clone();
        Self::new(self.dim, format!("{c} * ({})", self.description), move |t| Ok(a(t)? * c))
    }

    /// Fit a growth certificate for max_j |f_j| on the grid and attach it.
    pub fn certify_growth(&mut self, grid: &GrowthGrid) -> Result<GrowthCertificate> {
        let f = self.f.clone();
        let cert = growth::certify(
            |t| Ok(f(t)?.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            grid,
        )?;
        self.growth = Some(cert);
        Ok(cert)
    }

    /// Cauchy–Riemann defect |∂_v f - i ∂_u f| / max(1, |∂_u f|) by central differences.
    pub fn holomorphy_residual(&self, tau: Complex64, h: f64) -> Result<f64> {
        let du = (self.eval(tau + h)? - self.eval(tau - h)?) / Complex64::new(2.0 * h, 0.0);
        let dv = (self.eval(tau + I * h)? - self.eval(tau - I * h)?) / Complex64::new(2.0 * h, 0.0);
        Ok((&dv - du.clone() * I).norm() / du.norm().max(1.0))
    }
}

/// Slash action f|γ = χ(γ)^{-1}(cτ+d)^{-w}ρ(γ)^{-1}f(γτ).
#[derive(Debug, Clone, PartialEq)]
pub struct PAction {
    pub weight: f64,
    pub chi: MultiplierSystem,
    pub rho: Representation,
}

impl PAction {
    pub fn slash_vec(&self, value_at_gtau: CVec, g: &GroupElement, tau: Complex64) -> CVec {
        let r = self.rho.element(g).adjoint();
        let s = self.chi.eval(g).conj() * cpow(g.j_factor(tau), -self.weight);
        (r * value_at_gtau) * s
    }

    pub fn slash_at(&self, p: &PElement, g: &GroupElement, tau: Complex64) -> Result<CVec> {
        Ok(self.slash_vec(p.eval(g.act(tau))?, g, tau))
    }

    pub fn slash(&self, p: &PElement, g: &GroupElement) -> PElement {
        let (act, f, g) = (self.clone(), p.f.clone(), *g);
        PElement::new(p.dim, format!("({})|{g}", p.description), move |t| {
            Ok(act.slash_vec(f(g.act(t))?, &g, t))
        })
    }

    /// (p|γ) - p.
    pub fn coboundary(&self, p: &PElement, g: &GroupElement) -> PElement {
        self.slash(p, g).sub(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodMethod {
    /// Adaptive quadrature along the split path.
    Quadrature,
    /// Incomplete-gamma closed forms, term by term.
    Termwise,
}

pub const QUAD_ABS_TOL: f64 = 1e-14;
pub const QUAD_REL_TOL: f64 = 1e-13;

/// G(τ) for a cuspidal vector-valued form g of weight k + 2.
#[derive(Debug, Clone)]
pub struct EichlerIntegral {
    pub g: VVForm,
    pub k: f64,
    /// Weight -k, conj χ'', conj ρ''.
    pub action: PAction,
    terms: Vec<Vec<(f64, Complex64)>>,
}

fn binom(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl EichlerIntegral {
    pub fn new(g: VVForm) -> Result<Self> {
        if !g.is_cuspidal() {
            let bad = g
                .components
                .iter()
                .flat_map(|f| f.terms())
                .filter(|(e, c)| c.norm() >= 1e-10 && *e <= Q::from_integer(0))
                .map(|(e, _)| e)
                .min();
            return Err(Error::NotCuspidal(format!(
                "component exponent {} <= 0; the Eichler integral diverges",
                bad.map(|e| e.to_string()).unwrap_or_default()
            )));
        }
        let k = g.weight - 2.0;
        let action = PAction {
            weight: -k,
            chi: MultiplierSystem::eta_power(-g.multiplier.eta_power, -k),
            rho: g.rep.conj(),
        };
        let terms = g
            .components
            .iter()
            .map(|f| f.terms().map(|(e, c)| (to_f64(e), c)).collect())
            .collect();
        Ok(Self { g, k, action, terms })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    fn check_tau(&self, tau: Complex64) -> Result<()> {
        if tau.im < DEFAULT_IM_FLOOR {
            return Err(Error::OutOfRegion(format!(
                "Im tau = {} is below the floor {DEFAULT_IM_FLOOR}",
                tau.im
            )));
        }
        Ok(())
    }

    /// Term-wise G(τ): each a e(ατ) contributes
    /// -i^{k+1} a e(ατ) e^{4παv}(2πα)^{-(k+1)}Γ(k+1, 4παv), then conjugated.
    pub fn eval(&self, tau: Complex64) -> Result<CVec> {
        self.check_tau(tau)?;
        let k = self.k;
        let pref = -cpow(I, k + 1.0);
        let v = tau.im;
        let mut out = CVec::zeros(self.dim());
        for (mu, terms) in self.terms.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for &(alpha, c) in terms {
                let x = 4.0 * PI * alpha * v;
                let gs = incomplete_gamma_upper_scaled(k + 1.0, x)?;
                let osc = Complex64::from_polar((-2.0 * PI * alpha * v).exp(), 2.0 * PI * alpha * tau.re);
                s += c * osc * gs * (2.0 * PI * alpha).powf(-(k + 1.0));
            }
            out[mu] = (pref * s).conj();
        }
        Ok(out)
    }

    /// G(τ) by quadrature along the vertical ray from τ to i∞.
    pub fn eval_quadrature(&self, tau: Complex64) -> Result<CVec> {
        self.check_tau(tau)?;
        let k = self.k;
        let tb = tau.conj();
        let f = |t: f64| -> Vec<Complex64> {
            let w = Complex64::new(tau.re, t);
            let gv = self.g.eval(w).expect("eval above the floor");
            let fac = cpow(w - tb, k) * I;
            gv.iter().map(|z| z * fac).collect()
        };
        let (v, _) = integrate_vec_to_infinity(f, tau.im, self.dim(), QUAD_ABS_TOL, QUAD_REL_TOL)?;
        Ok(CVec::from_iterator(self.dim(), v.into_iter().map(|z| (-z).conj())))
    }

    pub fn as_pelement(self: &Arc<Self>) -> PElement {
        let me = self.clone();
        PElement::new(self.dim(), "Eichler integral", move |t| me.eval(t))
    }

    /// (G|γ)(τ) - G(τ) through the slash.
    pub fn period_slash(&self, g: &GroupElement, tau: Complex64) -> Result<CVec> {
        let lhs = self.action.slash_vec(self.eval(g.act(tau))?, g, tau);
        Ok(lhs - self.eval(tau)?)
    }

    fn split(&self, g: &GroupElement) -> Result<(f64, f64)> {
        if g.c == 0 {
            return Err(Error::Invalid("split path needs c != 0".into()));
        }
        let y0 = 1.0 / g.c.abs() as f64;
        if y0 < DEFAULT_IM_FLOOR {
            return Err(Error::OutOfRegion(format!(
                "|c| = {} puts the split height below the evaluation floor",
                g.c.abs()
            )));
        }
        let s1 = 1.0 / ((g.c * g.c) as f64 * y0);
        Ok((y0, s1))
    }

    /// χ''(γ^{-1})ρ''(γ^{-1}).
    fn pullback(&self, g: &GroupElement) -> nalgebra::DMatrix<Complex64> {
        let gi = g.inverse();
        self.g.rep.element(&gi) * self.g.multiplier.eval(&gi)
    }

    /// Upper piece of ∫_{x0}^{x0+i∞} g(w)(w - x0)^j dw from height y0, by quadrature.
    fn upper_moment_quad(&self, x0: f64, y0: f64, j: u32) -> Result<CVec> {
        let f = |t: f64| -> Vec<Complex64> {
            let gv = self.g.eval(Complex64::new(x0, t)).expect("eval above the floor");
            let fac = I.powu(j + 1) * t.powi(j as i32);
            gv.iter().map(|z| z * fac).collect()
        };
        let (v, _) = integrate_vec_to_infinity(f, y0, self.dim(), QUAD_ABS_TOL, QUAD_REL_TOL)?;
        Ok(CVec::from_vec(v))
    }

    fn lower_moment_quad(&self, g: &GroupElement, s1: f64, j: u32) -> Result<CVec> {
        let a = self.pullback(g);
        let (ac, c) = (g.a as f64 / g.c as f64, g.c as f64);
        let k = self.k;
        let f = |s: f64| -> Vec<Complex64> {
            let gv = self.g.eval(Complex64::new(ac, s)).expect("eval above the floor");
            let jf = Complex64::new(0.0, -c * s);
            let fac = cpow(jf, k - j as f64) * c.powi(-(j as i32)) * (-I);
            (&a * gv * fac).iter().copied().collect()
        };
        let (v, _) = integrate_vec_to_infinity(f, s1, self.dim(), QUAD_ABS_TOL, QUAD_REL_TOL)?;
        Ok(CVec::from_vec(v))
    }

    fn upper_moment_termwise(&self, x0: f64, y0: f64, j: u32) -> Result<CVec> {
        let mut out = CVec::zeros(self.dim());
        let ij = I.powu(j + 1);
        for (mu, terms) in self.terms.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for &(b, c) in terms {
                let x = 2.0 * PI * b;
                let gam = incomplete_gamma_upper(j as f64 + 1.0, x * y0)?;
                s += c * Complex64::from_polar(1.0, x * x0) * gam * x.powi(-(j as i32 + 1));
            }
            out[mu] = s * ij;
        }
        Ok(out)
    }

    fn lower_moment_termwise(&self, g: &GroupElement, s1: f64, j: u32) -> Result<CVec> {
        let e = self.k - j as f64 + 1.0;
        if e <= 0.0 {
            return Err(Error::Unsupported(format!(
                "closed form needs k - j + 1 > 0, got {e}"
            )));
        }
        let ac = g.a as f64 / g.c as f64;
        let c = g.c as f64;
        let mut v = CVec::zeros(self.dim());
        for (nu, terms) in self.terms.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for &(b, cf) in terms {
                let x = 2.0 * PI * b;
                let gam = incomplete_gamma_upper(e, x * s1)?;
                s += cf * Complex64::from_polar(1.0, x * ac) * gam * x.powf(-e);
            }
            v[nu] = s;
        }
        let fac = -I * c.powi(-(j as i32)) * cpow(Complex64::new(0.0, -c), self.k - j as f64);
        Ok(self.pullback(g) * v * fac)
    }

    /// N_j = ∫_{x0}^{x0+i∞} g(w)(w - x0)^j dw with x0 = γ^{-1}(i∞) = -d/c, split at
    /// height 1/|c|; the lower half is carried to the ray a/c + it by γ.
    pub fn moment(&self, g: &GroupElement, j: u32, method: PeriodMethod) -> Result<CVec> {
        let (y0, s1) = self.split(g)?;
        let x0 = -(g.d as f64) / g.c as f64;
        match method {
            PeriodMethod::Quadrature => {
                Ok(self.upper_moment_quad(x0, y0, j)? + self.lower_moment_quad(g, s1, j)?)
            }
            PeriodMethod::Termwise => {
                let up = self.upper_moment_termwise(x0, y0, j)?;
                let low = match self.lower_moment_termwise(g, s1, j) {
                    Ok(v) => v,
                    Err(Error::Unsupported(_)) => self.lower_moment_quad(g, s1, j)?,
                    Err(e) => return Err(e),
                };
                Ok(up + low)
            }
        }
    }

    /// ∫_{x0}^{x0+i∞} g(w)(w - x0)^e dw for real e > -1, split and mapped as in `moment`.
    pub fn mellin_moment(&self, g: &GroupElement, e: f64) -> Result<CVec> {
        if e <= -1.0 {
            return Err(Error::Invalid(format!("exponent {e} gives a divergent moment")));
        }
        let (y0, s1) = self.split(g)?;
        let x0 = -(g.d as f64) / g.c as f64;
        let upper = |t: f64| -> Vec<Complex64> {
            let gv = self.g.eval(Complex64::new(x0, t)).expect("eval above the floor");
            let fac = cpow(Complex64::new(0.0, t), e) * I;
            gv.iter().map(|z| z * fac).collect()
        };
        let a = self.pullback(g);
        let (ac, c, k) = (g.a as f64 / g.c as f64, g.c as f64, self.k);
        let lower = |s: f64| -> Vec<Complex64> {
            let gv = self.g.eval(Complex64::new(ac, s)).expect("eval above the floor");
            let jf = Complex64::new(0.0, -c * s);
            // w - x0 = 1/(c J) on the mapped ray
            let fac = cpow(jf, k) * cpow(jf * c, -e) * (-I);
            (&a * gv * fac).iter().copied().collect()
        };
        let n = self.dim();
        let (u, _) = integrate_vec_to_infinity(upper, y0, n, QUAD_ABS_TOL, QUAD_REL_TOL)?;
        let (l, _) = integrate_vec_to_infinity(lower, s1, n, QUAD_ABS_TOL, QUAD_REL_TOL)?;
        Ok(CVec::from_vec(u) + CVec::from_vec(l))
    }

    /// (exponent, coefficient) pairs of component μ.
    pub fn component_terms(&self, mu: usize) -> &[(f64, Complex64)] {
        &self.terms[mu]
    }

    fn integer_k(&self) -> Result<u32> {
        if self.k.fract() != 0.0 || self.k < 0.0 {
            return Err(Error::Unsupported(format!(
                "period polynomials need integer k >= 0, got {}",
                self.k
            )));
        }
        Ok(self.k as u32)
    }

    pub fn period_polynomial(&self, g: &GroupElement, method: PeriodMethod) -> Result<PeriodPolynomial> {
        let k = self.integer_k()?;
        let moments = (0..=k).map(|j| self.moment(g, j, method)).collect::<Result<_>>()?;
        Ok(PeriodPolynomial { gamma: *g, x0: -(g.d as f64) / g.c as f64, k, moments })
    }

    /// conj(∫_{x0}^{i∞} g(w)(w - τ̄)^k dw) at one point; valid for real k.
    pub fn period_pointwise(&self, g: &GroupElement, tau: Complex64) -> Result<CVec> {
        if g.c == 0 {
            return Ok(CVec::zeros(self.dim()));
        }
        let (y0, s1) = self.split(g)?;
        let x0 = -(g.d as f64) / g.c as f64;
        let k = self.k;
        let tb = tau.conj();
        let upper = |t: f64| -> Vec<Complex64> {
            let w = Complex64::new(x0, t);
            let gv = self.g.eval(w).expect("eval above the floor");
            let fac = cpow(w - tb, k) * I;
            gv.iter().map(|z| z * fac).collect()
        };
        let a = self.pullback(g);
        let gi = g.inverse();
        let ac = g.a as f64 / g.c as f64;
        let c = g.c as f64;
        let lower = |s: f64| -> Vec<Complex64> {
            let w1 = Complex64::new(ac, s);
            let gv = self.g.eval(w1).expect("eval above the floor");
            let jf = Complex64::new(0.0, -c * s);
            let fac = cpow(jf, k) * cpow(gi.act(w1) - tb, k) * (-I);
            (&a * gv * fac).iter().copied().collect()
        };
        let n = self.dim();
        let (u, _) = integrate_vec_to_infinity(upper, y0, n, QUAD_ABS_TOL, QUAD_REL_TOL)?;
        let (l, _) = integrate_vec_to_infinity(lower, s1, n, QUAD_ABS_TOL, QUAD_REL_TOL)?;
        Ok(CVec::from_iterator(n, u.iter().zip(&l).map(|(p, q)| (p + q).conj())))
    }
}

/// g_γ(τ) = Σ_j C(k,j) conj(N_j)(x0 - τ)^{k-j} for integer k.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPolynomial {
    pub gamma: GroupElement,
    pub x0: f64,
    pub k: u32,
    pub moments: Vec<CVec>,
}

impl PeriodPolynomial {
    pub fn eval(&self, tau: Complex64) -> CVec {
        let n = self.moments[0].len();
        let mut out = CVec::zeros(n);
        let base = Complex64::new(self.x0, 0.0) - tau;
        for (j, m) in self.moments.iter().enumerate() {
            let j = j as u32;
            let f = base.powu(self.k - j) * binom(self.k, j);
            out += m.map(|z| z.conj()) * f;
        }
        out
    }
}

/// Period cocycle γ -> g_γ with a write-once cache of period polynomials.
pub struct PeriodCocycle {
    pub integral: Arc<EichlerIntegral>,
    pub method: PeriodMethod,
    cache: Mutex<HashMap<GroupElement, Arc<PeriodPolynomial>>>,
}

impl PeriodCocycle {
    pub fn new(integral: Arc<EichlerIntegral>, method: PeriodMethod) -> Self {
        Self { integral, method, cache: Mutex::new(HashMap::new()) }
    }

    pub fn dim(&self) -> usize {
        self.integral.dim()
    }

    pub fn action(&self) -> &PAction {
        &self.integral.action
    }

    pub fn polynomial(&self, g: &GroupElement) -> Result<Arc<PeriodPolynomial>> {
        if let Some(p) = self.cache.lock().expect("cache lock").get(g) {
            return Ok(p.clone());
        }
        let p = Arc::new(self.integral.period_polynomial(g, self.method)?);
        Ok(self.cache.lock().expect("cache lock").entry(*g).or_insert(p).clone())
    }

    /// g_γ(τ); exactly zero when γ fixes i∞.
    pub fn value(&self, g: &GroupElement, tau: Complex64) -> Result<CVec> {
        if g.fixes_infinity() {
            return Ok(CVec::zeros(self.dim()));
        }
        if self.integral.k.fract() != 0.0 {
            return self.integral.period_pointwise(g, tau);
        }
        Ok(self.polynomial(g)?.eval(tau))
    }

    pub fn element(self: &Arc<Self>, g: &GroupElement) -> PElement {
        let (me, g) = (self.clone(), *g);
        PElement::new(self.dim(), format!("g_{{{g}}}"), move |t| me.value(&g, t))
    }
}

/// max over pairs and points of |g_{γ1γ2} - (g_{γ1}|γ2) - g_{γ2}| / max(1, |g_{γ1γ2}|).
pub fn cocycle_residual<F>(
    value: F,
    action: &PAction,
    pairs: &[(GroupElement, GroupElement)],
    taus: &[Complex64],
) -> Result<f64>
where
    F: Fn(&GroupElement, Complex64) -> Result<CVec>,
{
    let mut worst: f64 = 0.0;
    for (g1, g2) in pairs {
        let g12 = *g1 * *g2;
        for &tau in taus {
            let lhs = value(&g12, tau)?;
            let rhs = action.slash_vec(value(g1, g2.act(tau))?, g2, tau) + value(g2, tau)?;
            worst = worst.max((&lhs - rhs).norm() / lhs.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// max over γ and τ of |g_γ - ((p|γ) - p)|.
pub fn coboundary_residual<F>(
    value: F,
    p: &PElement,
    action: &PAction,
    gammas: &[GroupElement],
    taus: &[Complex64],
) -> Result<f64>
where
    F: Fn(&GroupElement, Complex64) -> Result<CVec>,
{
    let mut worst: f64 = 0.0;
    for g in gammas {
        for &tau in taus {
            let cob = action.slash_at(p, g, tau)? - p.eval(tau)?;
            worst = worst.max((value(g, tau)? - cob).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::build_testform;
    use crate::rational::qi;
    use crate::series::FourierSeries;
    use crate::theta::decompose;
    use crate::weil::{build_generators, JParity};

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_integral(t: i64) -> Arc<EichlerIntegral> {
        let phi = build_testform(qi(t)).unwrap();
        let spec = build_generators(1, JParity::Odd).unwrap();
        Arc::new(EichlerIntegral::new(decompose(&phi, &spec).unwrap()).unwrap())
    }

    #[test]
    fn single_term_against_quadrature() {
        let mut f = FourierSeries::new(qi(0), 1, qi(3)).unwrap();
        f.insert(1, cz(1.0, 0.0)).unwrap();
        let g = VVForm {
            m: 1,
            components: vec![f],
            weight: 2.0,
            multiplier: MultiplierSystem::trivial(2.0),
            rep: Representation::trivial(1),
        };
        let ei = EichlerIntegral::new(g).unwrap();
        for tau in [cz(0.0, 1.0), cz(0.3, 0.4), cz(-1.2, 2.0)] {
            let a = ei.eval(tau).unwrap();
            let b = ei.eval_quadrature(tau).unwrap();
            assert!((&a - &b).norm() < 1e-10, "{a} {b}");
            // k = 0: G = conj(e(τ)/(2πi))
            let want = (Complex64::new(0.0, 2.0 * PI) * tau).exp() / Complex64::new(0.0, 2.0 * PI);
            assert!((a[0] - want.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn non_cuspidal_is_refused() {
        let g = VVForm {
            m: 1,
            components: vec![FourierSeries::one(qi(3))],
            weight: 2.0,
            multiplier: MultiplierSystem::trivial(2.0),
            rep: Representation::trivial(1),
        };
        assert!(matches!(EichlerIntegral::new(g), Err(Error::NotCuspidal(_))));
    }

    #[test]
    fn testform_integral_matches_quadrature() {
        let ei = test_integral(60);
        for tau in [cz(0.0, 1.0), cz(0.37, 0.5), cz(-0.8, 0.3)] {
            let a = ei.eval(tau).unwrap();
            let b = ei.eval_quadrature(tau).unwrap();
            assert!((&a - &b).norm() < 1e-9, "{tau}: {}", (&a - &b).norm());
        }
    }

    #[test]
    fn period_paths_agree() {
        let ei = test_integral(60);
        let s = GroupElement::S;
        let pq = ei.period_polynomial(&s, PeriodMethod::Quadrature).unwrap();
        let pt = ei.period_polynomial(&s, PeriodMethod::Termwise).unwrap();
        for tau in [cz(0.1, 1.2), cz(-0.3, 0.9), cz(0.5, 1.6)] {
            let a = ei.period_slash(&s, tau).unwrap();
            let b = pq.eval(tau);
            let c = pt.eval(tau);
            let d = ei.period_pointwise(&s, tau).unwrap();
            assert!((&a - &b).norm() < 1e-7, "slash vs quad {}", (&a - &b).norm());
            assert!((&b - &c).norm() < 1e-10, "quad vs termwise {}", (&b - &c).norm());
            assert!((&b - &d).norm() < 1e-10);
        }
    }

    #[test]
    fn cocycle_identity_and_parabolic() {
        let ei = test_integral(60);
        let pc = Arc::new(PeriodCocycle::new(ei.clone(), PeriodMethod::Quadrature));
        let g1: GroupElement = "2,1,1,1".parse().unwrap();
        let g2: GroupElement = "1,0,-2,1".parse().unwrap();
        let taus = [cz(0.2, 1.1), cz(-0.4, 0.7)];
        let r = cocycle_residual(|g, t| pc.value(g, t), pc.action(), &[(g1, g2), (GroupElement::S, g1)], &taus).unwrap();
        assert!(r < 1e-8, "{r}");
        let z = pc.value(&GroupElement::t_pow(5), cz(0.3, 0.4)).unwrap();
        assert!(z.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
        assert!((ei.period_slash(&GroupElement::t_pow(3), cz(0.3, 0.8)).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn nontrivial_against_zero_witness() {
        let ei = test_integral(40);
        let pc = PeriodCocycle::new(ei.clone(), PeriodMethod::Quadrature);
        let r = coboundary_residual(
            |g, t| pc.value(g, t),
            &PElement::zero(2),
            &ei.action,
            &[GroupElement::S],
            &[cz(0.0, 1.0)],
        )
        .unwrap();
        assert!(r > 1e-3, "{r}");
    }
}
