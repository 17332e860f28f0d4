//! Truncated q- and (q, zeta)-expansions with exact rational exponents.
//!
//! A [`FourierSeries`] stores coefficients on the lattice (n + kappa)/lambda.
//! Every exponent up to and including `truncation` is known exactly; nothing is
//! claimed above it.

use crate::error::{Error, Result};
use crate::rational::{self, frac, phase, q, qi, to_f64, Q};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const DEFAULT_IM_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    kappa: Q,
    lambda: i64,
    coeffs: BTreeMap<i64, Complex64>,
    truncation: Q,
}

/// Value of a truncated evaluation together with an estimate of the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: Complex64,
    pub tail: f64,
}

fn lattice_merge(k1: Q, l1: i64, k2: Q, l2: i64) -> Result<(Q, i64, i64, i64, i64)> {
    // returns (kappa, lambda, t1, t2, base) with (n1+k1)/l1 + (n2+k2)/l2 = (n1 t1 + n2 t2 + base + kappa)/lambda
    let lambda = rational::lcm(l1, l2)?;
    let (t1, t2) = (lambda / l1, lambda / l2);
    let s = rational::add(rational::mul(k1, qi(t1))?, rational::mul(k2, qi(t2))?)?;
    let base = s.floor().to_integer();
    Ok((s - s.floor(), lambda, t1, t2, base))
}

impl FourierSeries {
    pub fn new(kappa: Q, lambda: i64, truncation: Q) -> Result<Self> {
        if lambda <= 0 {
            return Err(Error::Invalid(format!("lambda must be positive, got {lambda}")));
        }
        if kappa.is_negative() || kappa >= qi(1) {
            return Err(Error::Invalid(format!("kappa must lie in [0,1), got {kappa}")));
        }
        Ok(Self { kappa, lambda, coeffs: BTreeMap::new(), truncation })
    }

    pub fn zero(truncation: Q) -> Self {
        Self { kappa: qi(0), lambda: 1, coeffs: BTreeMap::new(), truncation }
    }

    pub fn one(truncation: Q) -> Self {
        let mut s = Self::zero(truncation);
        if truncation >= qi(0) {
            s.coeffs.insert(0, Complex64::new(1.0, 0.0));
        }
        s
    }

    /// c q^alpha, on the coarsest lattice containing alpha.
    pub fn monomial(alpha: Q, c: Complex64, truncation: Q) -> Result<Self> {
        let lambda = *alpha.denom();
        let num = *alpha.numer();
        let kappa = qi(0);
        let mut s = Self::new(kappa, lambda, truncation)?;
        if alpha <= truncation && c != Complex64::zero() {
            s.coeffs.insert(num, c);
        }
        Ok(s)
    }

    pub fn kappa(&self) -> Q {
        self.kappa
    }
    pub fn lambda(&self) -> i64 {
        self.lambda
    }
    pub fn truncation(&self) -> Q {
        self.truncation
    }
    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    pub fn exponent(&self, n: i64) -> Q {
        (qi(n) + self.kappa) / qi(self.lambda)
    }

    /// Key n with exponent alpha, if alpha sits on this lattice.
    pub fn key_of(&self, alpha: Q) -> Option<i64> {
        let x = alpha * qi(self.lambda) - self.kappa;
        x.is_integer().then(|| x.to_integer())
    }

    pub fn insert(&mut self, n: i64, c: Complex64) -> Result<()> {
        let e = self.exponent(n);
        if e > self.truncation {
            return Err(Error::Invalid(format!(
                "exponent {e} exceeds truncation {}",
                self.truncation
            )));
        }
        *self.coeffs.entry(n).or_default() += c;
        Ok(())
    }

    pub fn coeff_at(&self, alpha: Q) -> Complex64 {
        self.key_of(alpha)
            .and_then(|n| self.coeffs.get(&n).copied())
            .unwrap_or_default()
    }

    /// (exponent, coefficient) pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Q, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (self.exponent(n), c))
    }

    /// Leading exponent of the retained nonzero terms, or the truncation order for zero.
    pub fn valuation(&self) -> Q {
        self.terms()
            .find(|(_, c)| !c.is_zero())
            .map(|(e, _)| e)
            .unwrap_or(self.truncation)
    }

    /// Same series written on the finer lattice with denominator `lambda_new`.
    pub fn relattice(&self, lambda_new: i64) -> Result<Self> {
        if lambda_new % self.lambda != 0 {
            return Err(Error::Invalid(format!(
                "lattice {lambda_new} does not refine {}",
                self.lambda
            )));
        }
        let t = lambda_new / self.lambda;
        let s = rational::mul(self.kappa, qi(t))?;
        let base = s.floor().to_integer();
        let mut out = Self::new(frac(s), lambda_new, self.truncation)?;
        for (&n, &c) in &self.coeffs {
            out.coeffs.insert(rational::iadd(rational::imul(n, t)?, base)?, c);
        }
        Ok(out)
    }

    /// Retruncate to min(current, t).
    pub fn truncate(&self, t: Q) -> Self {
        let mut out = self.clone();
        out.truncation = t.min(self.truncation);
        let tr = out.truncation;
        let (k, l) = (self.kappa, self.lambda);
        out.coeffs.retain(|&n, _| (qi(n) + k) / qi(l) <= tr);
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v *= c;
        }
        out
    }

    /// Drop coefficients with modulus below `floor`; the truncation order is kept.
    pub fn drop_below(&self, floor: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() >= floor);
        out
    }

    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        let l = rational::lcm(self.lambda, other.lambda)?;
        let (a, b) = (self.relattice(l)?, other.relattice(l)?);
        if a.kappa != b.kappa {
            if a.is_zero() {
                let mut z = b.clone();
                z.coeffs.clear();
                z.truncation = a.truncation;
                return Ok((z, b));
            }
            if b.is_zero() {
                let mut z = a.clone();
                z.coeffs.clear();
                z.truncation = b.truncation;
                return Ok((a, z));
            }
            return Err(Error::Invalid(format!(
                "incompatible exponent lattices: kappa {} vs {} over {l}",
                a.kappa, b.kappa
            )));
        }
        Ok((a, b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.common(other)?;
        a.truncation = a.truncation.min(b.truncation);
        for (n, c) in b.coeffs {
            *a.coeffs.entry(n).or_default() += c;
        }
        Ok(a.truncate(a.truncation))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Cauchy product. The result is known up to min(Ta + val(b), Tb + val(a)).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (kappa, lambda, t1, t2, base) =
            lattice_merge(self.kappa, self.lambda, other.kappa, other.lambda)?;
        let trunc = rational::add(self.truncation, other.valuation())?
            .min(rational::add(other.truncation, self.valuation())?);
        let mut out = Self::new(kappa, lambda, trunc)?;
        for (&n1, &c1) in &self.coeffs {
            let a = rational::imul(n1, t1)?;
            for (&n2, &c2) in &other.coeffs {
                let n = rational::iadd(rational::iadd(a, rational::imul(n2, t2)?)?, base)?;
                if (qi(n) + kappa) / qi(lambda) > trunc {
                    continue;
                }
                *out.coeffs.entry(n).or_default() += c1 * c2;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, h: u32) -> Result<Self> {
        if h == 0 {
            return Ok(Self::one(self.truncation));
        }
        let mut acc = self.clone();
        for _ in 1..h {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, tau: Complex64) -> Result<Evaluated> {
        self.eval_with_floor(tau, DEFAULT_IM_FLOOR)
    }

    pub fn eval_with_floor(&self, tau: Complex64, floor: f64) -> Result<Evaluated> {
        if tau.im < floor {
            return Err(Error::OutOfRegion(format!(
                "Im tau = {} is below the floor {floor}",
                tau.im
            )));
        }
        let mut value = Complex64::zero();
        for (e, c) in self.terms() {
            value += c * (Complex64::new(0.0, 2.0 * PI * to_f64(e)) * tau).exp();
        }
        Ok(Evaluated { value, tail: self.tail_estimate(tau.im) })
    }

    /// max|c| over the top unit band times the geometric sum of the next terms.
    pub fn tail_estimate(&self, v: f64) -> f64 {
        let t = self.truncation;
        let band = self
            .terms()
            .filter(|(e, _)| *e > t - qi(1))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        let x = (-2.0 * PI * v / self.lambda as f64).exp();
        band * (-2.0 * PI * v * to_f64(t)).exp() * x / (1.0 - x)
    }
}

/// Truncated two-variable expansion sum c(n, r) q^{(n+kappa)/lambda} zeta^{r/zeta_den}.
///
/// The index is carried as a rational so that half-index factors such as the odd
/// theta function can be multiplied; Jacobi forms proper have integral index.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiSeries {
    index: Q,
    q_kappa: Q,
    q_lambda: i64,
    zeta_den: i64,
    coeffs: BTreeMap<(i64, i64), Complex64>,
    truncation: Q,
}

impl JacobiSeries {
    pub fn new(index: Q, q_kappa: Q, q_lambda: i64, zeta_den: i64, truncation: Q) -> Result<Self> {
        if q_lambda <= 0 || zeta_den <= 0 {
            return Err(Error::Invalid("lattice denominators must be positive".into()));
        }
        if q_kappa.is_negative() || q_kappa >= qi(1) {
            return Err(Error::Invalid(format!("kappa must lie in [0,1), got {q_kappa}")));
        }
        if index.is_negative() {
            return Err(Error::Invalid(format!("negative index {index}")));
        }
        Ok(Self { index, q_kappa, q_lambda, zeta_den, coeffs: BTreeMap::new(), truncation })
    }

    pub fn zero(m: i64, truncation: Q) -> Self {
        Self {
            index: qi(m),
            q_kappa: qi(0),
            q_lambda: 1,
            zeta_den: 1,
            coeffs: BTreeMap::new(),
            truncation,
        }
    }

    pub fn index(&self) -> Q {
        self.index
    }
    /// Integral index; errors for half-index factors.
    pub fn m(&self) -> Result<i64> {
        if self.index.is_integer() && self.index > qi(0) {
            Ok(self.index.to_integer())
        } else {
            Err(Error::Invalid(format!("index {} is not a positive integer", self.index)))
        }
    }
    pub fn q_kappa(&self) -> Q {
        self.q_kappa
    }
    pub fn q_lambda(&self) -> i64 {
        self.q_lambda
    }
    pub fn zeta_den(&self) -> i64 {
        self.zeta_den
    }
    pub fn truncation(&self) -> Q {
        self.truncation
    }
    pub fn coeffs(&self) -> &BTreeMap<(i64, i64), Complex64> {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    pub fn q_exponent(&self, n: i64) -> Q {
        (qi(n) + self.q_kappa) / qi(self.q_lambda)
    }
    pub fn z_exponent(&self, r: i64) -> Q {
        q(r, self.zeta_den)
    }

    pub fn insert(&mut self, n: i64, r: i64, c: Complex64) -> Result<()> {
        let e = self.q_exponent(n);
        if e > self.truncation {
            return Err(Error::Invalid(format!(
                "exponent {e} exceeds truncation {}",
                self.truncation
            )));
        }
        *self.coeffs.entry((n, r)).or_default() += c;
        Ok(())
    }

    /// Insert c q^alpha zeta^rho with alpha and rho on this series' lattices.
    pub fn insert_at(&mut self, alpha: Q, rho: Q, c: Complex64) -> Result<()> {
        let (n, r) = self.key_of(alpha, rho).ok_or_else(|| {
            Error::Invalid(format!("exponent ({alpha}, {rho}) is off the lattice"))
        })?;
        self.insert(n, r, c)
    }

    pub fn key_of(&self, alpha: Q, rho: Q) -> Option<(i64, i64)> {
        let x = alpha * qi(self.q_lambda) - self.q_kappa;
        let y = rho * qi(self.zeta_den);
        (x.is_integer() && y.is_integer()).then(|| (x.to_integer(), y.to_integer()))
    }

    pub fn coeff_at(&self, alpha: Q, rho: Q) -> Complex64 {
        self.key_of(alpha, rho)
            .and_then(|k| self.coeffs.get(&k).copied())
            .unwrap_or_default()
    }

    /// (q-exponent, zeta-exponent, coefficient) triples.
    pub fn terms(&self) -> impl Iterator<Item = (Q, Q, Complex64)> + '_ {
        self.coeffs
            .iter()
            .map(|(&(n, r), &c)| (self.q_exponent(n), self.z_exponent(r), c))
    }

    pub fn valuation(&self) -> Q {
        self.terms()
            .filter(|(_, _, c)| !c.is_zero())
            .map(|(e, _, _)| e)
            .min()
            .unwrap_or(self.truncation)
    }

    pub fn truncate(&self, t: Q) -> Self {
        let mut out = self.clone();
        out.truncation = t.min(self.truncation);
        let tr = out.truncation;
        let (k, l) = (self.q_kappa, self.q_lambda);
        out.coeffs.retain(|&(n, _), _| (qi(n) + k) / qi(l) <= tr);
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn drop_below(&self, floor: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() >= floor);
        out
    }

    /// Reduce zeta_den when every stored r allows it.
    fn normalize(mut self) -> Self {
        let g = self.coeffs.keys().fold(self.zeta_den, |g, &(_, r)| g.gcd(&r));
        if g > 1 {
            self.zeta_den /= g;
            self.coeffs = std::mem::take(&mut self.coeffs)
                .into_iter()
                .map(|((n, r), c)| ((n, r / g), c))
                .collect();
        }
        self
    }

    /// Rewrite on finer lattices (q denominator `lq`, zeta denominator `lz`).
    pub fn relattice(&self, lq: i64, lz: i64) -> Result<Self> {
        if lq % self.q_lambda != 0 || lz % self.zeta_den != 0 {
            return Err(Error::Invalid("target lattice does not refine the source".into()));
        }
        let t = lq / self.q_lambda;
        let u = lz / self.zeta_den;
        let s = rational::mul(self.q_kappa, qi(t))?;
        let base = s.floor().to_integer();
        let mut out = Self::new(self.index, frac(s), lq, lz, self.truncation)?;
        for (&(n, r), &c) in &self.coeffs {
            let key = (rational::iadd(rational::imul(n, t)?, base)?, rational::imul(r, u)?);
            out.coeffs.insert(key, c);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.index != other.index {
            return Err(Error::Invalid(format!(
                "index mismatch {} vs {}",
                self.index, other.index
            )));
        }
        let lq = rational::lcm(self.q_lambda, other.q_lambda)?;
        let lz = rational::lcm(self.zeta_den, other.zeta_den)?;
        let mut a = self.relattice(lq, lz)?;
        let mut b = other.relattice(lq, lz)?;
        if a.q_kappa != b.q_kappa {
            if a.is_zero() {
                a.q_kappa = b.q_kappa;
                a.coeffs.clear();
            } else if b.is_zero() {
                b.q_kappa = a.q_kappa;
                b.coeffs.clear();
            } else {
                return Err(Error::Invalid(format!(
                    "incompatible q-lattices: kappa {} vs {}",
                    a.q_kappa, b.q_kappa
                )));
            }
        }
        a.truncation = a.truncation.min(b.truncation);
        for (k, c) in b.coeffs {
            *a.coeffs.entry(k).or_default() += c;
        }
        let t = a.truncation;
        Ok(a.truncate(t).normalize())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (kappa, lambda, t1, t2, base) =
            lattice_merge(self.q_kappa, self.q_lambda, other.q_kappa, other.q_lambda)?;
        let lz = rational::lcm(self.zeta_den, other.zeta_den)?;
        let (u1, u2) = (lz / self.zeta_den, lz / other.zeta_den);
        let trunc = rational::add(self.truncation, other.valuation())?
            .min(rational::add(other.truncation, self.valuation())?);
        let index = rational::add(self.index, other.index)?;
        let mut out = Self::new(index, kappa, lambda, lz, trunc)?;
        for (&(n1, r1), &c1) in &self.coeffs {
            let a = rational::imul(n1, t1)?;
            let ra = rational::imul(r1, u1)?;
            for (&(n2, r2), &c2) in &other.coeffs {
                let n = rational::iadd(rational::iadd(a, rational::imul(n2, t2)?)?, base)?;
                if (qi(n) + kappa) / qi(lambda) > trunc {
                    continue;
                }
                let r = rational::iadd(ra, rational::imul(r2, u2)?)?;
                *out.coeffs.entry((n, r)).or_default() += c1 * c2;
            }
        }
        Ok(out.normalize())
    }

    /// Product with a one-variable series; the index is unchanged.
    pub fn mul_fourier(&self, f: &FourierSeries) -> Result<Self> {
        let mut lifted = Self::new(qi(0), f.kappa(), f.lambda(), 1, f.truncation())?;
        for (&n, &c) in f.coeffs() {
            lifted.coeffs.insert((n, 0), c);
        }
        self.mul(&lifted)
    }

    /// Coefficient of zeta^0 etc.: the q-series multiplying zeta^{rho}.
    pub fn zeta_slice(&self, rho: Q) -> Result<FourierSeries> {
        let mut out = FourierSeries::new(self.q_kappa, self.q_lambda, self.truncation)?;
        for (&(n, r), &c) in &self.coeffs {
            if self.z_exponent(r) == rho {
                out.insert(n, c)?;
            }
        }
        Ok(out)
    }

    /// Half-width of the certified strip |Im z| <= v sqrt(T/m)/2.
    pub fn certified_im_z(&self, v: f64) -> f64 {
        let m = to_f64(self.index);
        if m == 0.0 {
            return f64::INFINITY;
        }
        v * (to_f64(self.truncation).max(0.0) / m).sqrt() / 2.0
    }

    pub fn eval(&self, tau: Complex64, z: Complex64) -> Result<Evaluated> {
        self.eval_with_floor(tau, z, DEFAULT_IM_FLOOR)
    }

    pub fn eval_with_floor(&self, tau: Complex64, z: Complex64, floor: f64) -> Result<Evaluated> {
        if tau.im < floor {
            return Err(Error::OutOfRegion(format!(
                "Im tau = {} is below the floor {floor}",
                tau.im
            )));
        }
        let bound = self.certified_im_z(tau.im);
        if z.im.abs() > bound {
            return Err(Error::OutOfRegion(format!(
                "|Im z| = {} exceeds the certified bound {bound}",
                z.im.abs()
            )));
        }
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let mut value = Complex64::zero();
        for (a, rho, c) in self.terms() {
            value += c * (two_pi_i * (tau * to_f64(a) + z * to_f64(rho))).exp();
        }
        Ok(Evaluated { value, tail: self.tail_estimate(tau.im, z.im) })
    }

    /// Tail from q-exponents above the truncation, assuming theta-type support
    /// |rho| <= 2 sqrt(m alpha) and coefficients bounded by the top band.
    pub fn tail_estimate(&self, v: f64, y: f64) -> f64 {
        let t = self.truncation;
        let band = self
            .terms()
            .filter(|(e, _, _)| *e > t - qi(1))
            .map(|(_, _, c)| c.norm())
            .fold(0.0, f64::max);
        if band == 0.0 {
            return 0.0;
        }
        let m = to_f64(self.index).max(1e-12);
        let step = 1.0 / self.q_lambda as f64;
        let mut total = 0.0;
        let mut alpha = to_f64(t) + step;
        for _ in 0..10_000 {
            let width = 2.0 * (m * alpha).sqrt() * self.zeta_den as f64 + 1.0;
            let term = width * (-2.0 * PI * (v * alpha - 2.0 * (m * alpha).sqrt() * y.abs())).exp();
            total += term;
            if term < 1e-18 * total.max(1e-300) {
                break;
            }
            alpha += step;
        }
        band * total
    }
}

/// q-expansion of eta^h = q^{h/24} prod (1 - q^n)^h, exact up to `truncation`.
pub fn eta_series(h: u32, truncation: Q) -> Result<FourierSeries> {
    let lead = q(h as i64, 24);
    if truncation < lead {
        return Err(Error::Invalid(format!(
            "truncation {truncation} is below the leading exponent {lead}"
        )));
    }
    let n_max = (truncation - lead).floor().to_integer() as usize;
    let mut poly = vec![0i128; n_max + 1];
    poly[0] = 1;
    for n in 1..=n_max {
        for _ in 0..h {
            for j in (n..=n_max).rev() {
                poly[j] -= poly[j - n];
            }
        }
    }
    let shift = lead.floor().to_integer();
    let mut s = FourierSeries::new(frac(lead), 1, truncation)?;
    for (j, &c) in poly.iter().enumerate() {
        if c != 0 {
            s.insert(j as i64 + shift, Complex64::new(c as f64, 0.0))?;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeriesDoc {
    pub kind: String,
    pub kappa: (i64, i64),
    pub lambda: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zeta_den: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<(i64, i64)>,
    pub truncation: (i64, i64),
    pub coeffs: Vec<serde_json::Value>,
}

fn pair(x: Q) -> (i64, i64) {
    (*x.numer(), *x.denom())
}

fn unpair(p: (i64, i64)) -> Result<Q> {
    if p.1 == 0 {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(q(p.0, p.1))
}

fn num_at(v: &serde_json::Value, i: usize) -> Result<&serde_json::Value> {
    v.get(i).ok_or_else(|| Error::Parse(format!("coefficient entry too short: {v}")))
}

fn as_i64(v: &serde_json::Value) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::Parse(format!("expected integer, got {v}")))
}

fn as_f64(v: &serde_json::Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Parse(format!("expected number, got {v}")))
}

impl FourierSeries {
    pub fn to_doc(&self) -> SeriesDoc {
        SeriesDoc {
            kind: "fourier".into(),
            kappa: pair(self.kappa),
            lambda: self.lambda,
            zeta_den: None,
            index: None,
            truncation: pair(self.truncation),
            coeffs: self
                .coeffs
                .iter()
                .map(|(n, c)| serde_json::json!([n, c.re, c.im]))
                .collect(),
        }
    }

    pub fn from_doc(doc: &SeriesDoc) -> Result<Self> {
        if doc.kind != "fourier" {
            return Err(Error::Parse(format!("expected fourier series, got {}", doc.kind)));
        }
        let mut s = Self::new(unpair(doc.kappa)?, doc.lambda, unpair(doc.truncation)?)?;
        for e in &doc.coeffs {
            let n = as_i64(num_at(e, 0)?)?;
            let c = Complex64::new(as_f64(num_at(e, 1)?)?, as_f64(num_at(e, 2)?)?);
            s.insert(n, c)?;
        }
        Ok(s)
    }
}

impl JacobiSeries {
    pub fn to_doc(&self) -> SeriesDoc {
        SeriesDoc {
            kind: "jacobi".into(),
            kappa: pair(self.q_kappa),
            lambda: self.q_lambda,
            zeta_den: Some(self.zeta_den),
            index: Some(pair(self.index)),
            truncation: pair(self.truncation),
            coeffs: self
                .coeffs
                .iter()
                .map(|((n, r), c)| serde_json::json!([n, r, c.re, c.im]))
                .collect(),
        }
    }

    pub fn from_doc(doc: &SeriesDoc) -> Result<Self> {
        if doc.kind != "jacobi" {
            return Err(Error::Parse(format!("expected jacobi series, got {}", doc.kind)));
        }
        let index = unpair(doc.index.ok_or_else(|| Error::Parse("missing index".into()))?)?;
        let zd = doc.zeta_den.ok_or_else(|| Error::Parse("missing zeta_den".into()))?;
        let mut s = Self::new(index, unpair(doc.kappa)?, doc.lambda, zd, unpair(doc.truncation)?)?;
        for e in &doc.coeffs {
            let n = as_i64(num_at(e, 0)?)?;
            let r = as_i64(num_at(e, 1)?)?;
            let c = Complex64::new(as_f64(num_at(e, 2)?)?, as_f64(num_at(e, 3)?)?);
            s.insert(n, r, c)?;
        }
        Ok(s)
    }
}

/// e(x) helper re-exported for callers working with series exponents.
pub fn e(x: Q) -> Complex64 {
    phase(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Euler's pentagonal theorem: eta = sum (-1)^n q^{(6n+1)^2/24}.
    fn pentagonal_eta(tau: Complex64) -> Complex64 {
        let mut s = Complex64::zero();
        for n in -60i64..=60 {
            let e = ((6 * n + 1) * (6 * n + 1)) as f64 / 24.0;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * (Complex64::new(0.0, 2.0 * PI * e) * tau).exp();
        }
        s
    }

    #[test]
    fn one_plus_q_times_one_minus_q() {
        let mut a = FourierSeries::new(qi(0), 1, qi(5)).unwrap();
        a.insert(0, c(1.0)).unwrap();
        a.insert(1, c(1.0)).unwrap();
        let mut b = a.clone();
        b.coeffs.insert(1, c(-1.0));
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coeff_at(qi(0)), c(1.0));
        assert_eq!(p.coeff_at(qi(1)), c(0.0));
        assert_eq!(p.coeff_at(qi(2)), c(-1.0));
        assert_eq!(p.truncation(), qi(5));
    }

    #[test]
    fn zero_series_product() {
        let a = eta_series(1, qi(3)).unwrap();
        let z = FourierSeries::zero(qi(3));
        assert!(a.mul(&z).unwrap().is_zero());
    }

    #[test]
    fn eta_coefficients() {
        let e1 = eta_series(1, qi(6)).unwrap();
        assert_eq!(e1.kappa(), q(1, 24));
        let want = [1.0, -1.0, -1.0, 0.0, 0.0, 1.0];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(e1.coeff_at(q(1, 24) + qi(n as i64)), c(*w));
        }
        let delta = eta_series(24, qi(4)).unwrap();
        assert_eq!(delta.coeff_at(qi(2)), c(-24.0));
        let e7 = eta_series(7, qi(3)).unwrap();
        assert_eq!(e7.valuation(), q(7, 24));
        assert_eq!(e7.coeff_at(q(7, 24)), c(1.0));
    }

    #[test]
    fn eta_squared_from_product() {
        let e1 = eta_series(1, qi(4)).unwrap();
        let sq = e1.mul(&e1).unwrap();
        assert_eq!(sq.coeff_at(q(1, 12) + qi(1)), c(-2.0));
        let direct = eta_series(2, qi(4)).unwrap();
        for (e, v) in direct.terms() {
            if e <= sq.truncation() {
                assert_eq!(sq.coeff_at(e), v);
            }
        }
    }

    #[test]
    fn eta_values() {
        let e1 = eta_series(1, qi(30)).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let v = e1.eval(i).unwrap();
        assert!((v.value - pentagonal_eta(i)).norm() < 1e-14);
        assert!((v.value.re - 0.768225).abs() < 5e-7);
        let w = e1.eval(i + 1.0).unwrap().value;
        let rot = Complex64::from_polar(1.0, PI / 12.0);
        assert!((w - rot * v.value).norm() < 1e-13);
    }

    #[test]
    fn eval_refuses_low_im() {
        let e1 = eta_series(1, qi(3)).unwrap();
        assert!(matches!(
            e1.eval(Complex64::new(0.0, 0.01)),
            Err(Error::OutOfRegion(_))
        ));
        assert_eq!(FourierSeries::one(qi(2)).eval(Complex64::i()).unwrap().value, c(1.0));
    }

    #[test]
    fn json_round_trip() {
        let e7 = eta_series(7, qi(5)).unwrap().scale(Complex64::new(0.1, -0.3));
        let doc = e7.to_doc();
        let text = serde_json::to_string(&doc).unwrap();
        let back: SeriesDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(FourierSeries::from_doc(&back).unwrap(), e7);
    }

    #[test]
    fn jacobi_zero_eval() {
        let z = JacobiSeries::zero(1, qi(5));
        let v = z.eval(Complex64::i(), Complex64::new(0.1, 0.0)).unwrap();
        assert_eq!(v.value, Complex64::zero());
    }
}
