//! SL(2, Z): words in S and T, the Möbius action, cusps, Dedekind sums and
//! multiplier systems built from the Dedekind eta multiplier.

use crate::error::{Error, Result};
use crate::rational::{self, phase, q, qi, Q};
use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Mul, Neg};

/// (cτ+d)^k with the principal logarithm.
pub fn cpow(w: Complex64, k: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (w.ln() * k).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gen {
    S(i64),
    T(i64),
}

pub type Word = Vec<Gen>;

impl GroupElement {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(Error::Invalid(format!("det({a},{b},{c},{d}) = {det}, expected 1")));
        }
        Ok(Self { a, b, c, d })
    }

    pub const I: Self = Self { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Self = Self { a: 0, b: -1, c: 1, d: 0 };
    pub const T: Self = Self { a: 1, b: 1, c: 0, d: 1 };
    pub const Z: Self = Self { a: -1, b: 0, c: 0, d: -1 };

    pub fn t_pow(n: i64) -> Self {
        Self { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn s_pow(e: i64) -> Self {
        match e.rem_euclid(4) {
            0 => Self::I,
            1 => Self::S,
            2 => Self::Z,
            _ => -Self::S,
        }
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        let f = |x: i64, y: i64, z: i64, w: i64| -> Result<i64> {
            rational::iadd(rational::imul(x, y)?, rational::imul(z, w)?)
        };
        Ok(Self {
            a: f(self.a, o.a, self.b, o.c)?,
            b: f(self.a, o.b, self.b, o.d)?,
            c: f(self.c, o.a, self.d, o.c)?,
            d: f(self.c, o.b, self.d, o.d)?,
        })
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::I
    }

    /// True for ±T^n, i.e. elements fixing the cusp at infinity.
    pub fn fixes_infinity(&self) -> bool {
        self.c == 0
    }

    /// a² + b² + c² + d².
    pub fn mu_norm(&self) -> i128 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|&x| (x as i128) * (x as i128))
            .sum()
    }

    pub fn j_factor(&self, tau: Complex64) -> Complex64 {
        tau * self.c as f64 + self.d as f64
    }

    pub fn act(&self, tau: Complex64) -> Complex64 {
        (tau * self.a as f64 + self.b as f64) / self.j_factor(tau)
    }

    pub fn act_cusp(&self, x: Cusp) -> Cusp {
        match x {
            Cusp::Infinity => Cusp::from_pair(self.a, self.c),
            Cusp::Rational(p, qq) => Cusp::from_pair(
                self.a * p + self.b * qq,
                self.c * p + self.d * qq,
            ),
        }
    }

    /// Word in S and T whose product is exactly this element.
    pub fn word(&self) -> Word {
        let mut out: Word = Vec::new();
        let mut g = *self;
        while g.c != 0 {
            let n = g.a.div_euclid(g.c);
            push(&mut out, Gen::T(n));
            push(&mut out, Gen::S(1));
            // g <- S^{-1} T^{-n} g
            let (a1, b1) = (g.a - n * g.c, g.b - n * g.d);
            g = Self { a: g.c, b: g.d, c: -a1, d: -b1 };
        }
        if g.a == 1 {
            push(&mut out, Gen::T(g.b));
        } else {
            push(&mut out, Gen::S(2));
            push(&mut out, Gen::T(-g.b));
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Self {
        loop {
            let c = rng.gen_range(-bound..=bound);
            let d = rng.gen_range(-bound..=bound);
            if c.gcd(&d) != 1 {
                continue;
            }
            let (a, b) = complete_row(c, d);
            let l = rng.gen_range(-bound..=bound);
            let g = Self { a, b, c, d };
            return Self::t_pow(l) * g;
        }
    }
}

/// (a, b) with ad - bc = 1 for coprime (c, d).
pub fn complete_row(c: i64, d: i64) -> (i64, i64) {
    let e = d.extended_gcd(&c);
    // e.x d + e.y c = gcd = ±1
    let s = e.gcd;
    (e.x * s, -e.y * s)
}

fn push(w: &mut Word, g: Gen) {
    match (w.last_mut(), g) {
        (_, Gen::T(0)) => {}
        (_, Gen::S(e)) if e.rem_euclid(4) == 0 => {}
        (Some(Gen::T(x)), Gen::T(y)) => {
            *x += y;
            if *x == 0 {
                w.pop();
            }
        }
        (Some(Gen::S(x)), Gen::S(y)) => {
            *x = (*x + y).rem_euclid(4);
            if *x == 0 {
                w.pop();
            }
        }
        (_, Gen::S(e)) => w.push(Gen::S(e.rem_euclid(4))),
        _ => w.push(g),
    }
}

pub fn word_product(w: &[Gen]) -> Result<GroupElement> {
    let mut g = GroupElement::I;
    for &x in w {
        let h = match x {
            Gen::S(e) => GroupElement::s_pow(e),
            Gen::T(n) => GroupElement::t_pow(n),
        };
        g = g.checked_mul(&h)?;
    }
    Ok(g)
}

pub fn format_word(w: &[Gen]) -> String {
    if w.is_empty() {
        return "I".into();
    }
    w.iter()
        .map(|g| match *g {
            Gen::S(1) => "S".to_string(),
            Gen::T(1) => "T".to_string(),
            Gen::S(e) => format!("S^{e}"),
            Gen::T(n) => format!("T^{n}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_word(s: &str) -> Result<Word> {
    let mut w = Vec::new();
    for tok in s.split_whitespace() {
        if tok == "I" {
            continue;
        }
        let (head, exp) = match tok.split_once('^') {
            Some((h, e)) => (
                h,
                e.parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad exponent in {tok}")))?,
            ),
            None => (tok, 1),
        };
        match head {
            "S" => w.push(Gen::S(exp)),
            "T" => w.push(Gen::T(exp)),
            _ => return Err(Error::Parse(format!("unknown generator {tok}"))),
        }
    }
    Ok(w)
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, o: Self) -> Self {
        self.checked_mul(&o).expect("group element overflow")
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;
    fn neg(self) -> Self {
        Self { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl std::str::FromStr for GroupElement {
    type Err = Error;
    /// Accepts "a,b,c,d" or a word such as "S T^3 S T^-2".
    fn from_str(s: &str) -> Result<Self> {
        if s.contains(',') {
            let v: Vec<i64> = s
                .split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad matrix {s}")))?;
            if v.len() != 4 {
                return Err(Error::Parse(format!("expected four entries in {s}")));
            }
            Self::new(v[0], v[1], v[2], v[3])
        } else {
            word_product(&parse_word(s)?)
        }
    }
}

/// Element of the metaplectic cover: γ with a choice of sqrt(cτ+d).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaplecticElement {
    pub gamma: GroupElement,
    /// +1 for the principal root, -1 for its negative.
    pub branch: i8,
}

impl MetaplecticElement {
    pub fn principal(gamma: GroupElement) -> Self {
        Self { gamma, branch: 1 }
    }

    pub fn sqrt_factor(&self, tau: Complex64) -> Complex64 {
        cpow(self.gamma.j_factor(tau), 0.5) * self.branch as f64
    }

    /// (γ1, φ1)(γ2, φ2) = (γ1γ2, φ1(γ2τ)φ2(τ)), branch fixed by comparison at τ = i.
    pub fn compose(&self, o: &Self) -> Self {
        let g = self.gamma * o.gamma;
        let tau = Complex64::new(0.0, 1.0);
        let lhs = self.sqrt_factor(o.gamma.act(tau)) * o.sqrt_factor(tau);
        let p = cpow(g.j_factor(tau), 0.5);
        let branch = if (lhs - p).norm() < (lhs + p).norm() { 1 } else { -1 };
        Self { gamma: g, branch }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cusp {
    Infinity,
    /// p/q with q > 0 and gcd(p, q) = 1.
    Rational(i64, i64),
}

impl Cusp {
    pub fn from_pair(p: i64, qq: i64) -> Self {
        if qq == 0 {
            return Cusp::Infinity;
        }
        let g = p.gcd(&qq);
        let s = qq.signum();
        Cusp::Rational(s * p / g, s * qq / g)
    }
}

/// Direct Dedekind sum, quadratic in c; used as an oracle.
pub fn dedekind_sum_direct(d: i64, c: i64) -> Result<Q> {
    if c <= 0 || d.gcd(&c) != 1 {
        return Err(Error::Invalid(format!("s({d},{c}) needs c > 0 and gcd 1")));
    }
    let saw = |x: Q| -> Q {
        if x.is_integer() {
            qi(0)
        } else {
            x - x.floor() - q(1, 2)
        }
    };
    let mut s = qi(0);
    for k in 1..c {
        s += saw(q(k, c)) * saw(q(k * d, c));
    }
    Ok(s)
}

/// s(d, c) by reciprocity, exact.
pub fn dedekind_sum(d: i64, c: i64) -> Result<Q> {
    if c <= 0 || d.gcd(&c) != 1 {
        return Err(Error::Invalid(format!("s({d},{c}) needs c > 0 and gcd 1")));
    }
    let mut sign = qi(1);
    let mut acc = qi(0);
    let (mut d, mut c) = (d.rem_euclid(c), c);
    // s(d,c) + s(c,d) = -1/4 + (d/c + c/d + 1/(cd))/12
    while c > 1 && d > 0 {
        let cd = rational::imul(c, d)?;
        let t = rational::add(
            rational::add(q(d, c), q(c, d))?,
            q(1, cd),
        )?;
        acc = rational::add(acc, rational::mul(sign, q(-1, 4) + t / qi(12))?)?;
        sign = -sign;
        let nd = c.rem_euclid(d);
        c = d;
        d = nd;
    }
    Ok(acc)
}

/// ε(γ) written as e(x) with x exact.
pub fn eta_multiplier_phase(g: &GroupElement) -> Result<Q> {
    if g.c > 0 {
        let s = dedekind_sum(g.d, g.c)?;
        let x = rational::sub(
            rational::add(q(g.a, 1), q(g.d, 1))? / qi(rational::imul(24, g.c)?),
            s / qi(2),
        )?;
        return Ok(rational::frac(x - q(1, 8)));
    }
    if g.c == 0 {
        return Ok(if g.d == 1 {
            rational::frac(q(g.b, 24))
        } else {
            rational::frac(q(-1, 4) - q(g.b, 24))
        });
    }
    Ok(rational::frac(eta_multiplier_phase(&-*g)? + q(1, 4)))
}

pub fn eta_multiplier(g: &GroupElement) -> Complex64 {
    phase(eta_multiplier_phase(g).expect("eta multiplier overflow"))
}

/// χ = ε^p attached to a weight; every multiplier used here is a power of ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSystem {
    pub eta_power: i64,
    pub weight: f64,
}

impl MultiplierSystem {
    pub fn eta_power(p: i64, weight: f64) -> Self {
        Self { eta_power: p.rem_euclid(24), weight }
    }

    pub fn trivial(weight: f64) -> Self {
        Self::eta_power(0, weight)
    }

    pub fn phase_of(&self, g: &GroupElement) -> Result<Q> {
        Ok(rational::frac(rational::mul(eta_multiplier_phase(g)?, qi(self.eta_power))?))
    }

    pub fn eval(&self, g: &GroupElement) -> Complex64 {
        if self.eta_power == 0 {
            return Complex64::new(1.0, 0.0);
        }
        phase(self.phase_of(g).expect("multiplier overflow"))
    }

    pub fn conj(&self) -> Self {
        Self::eta_power(-self.eta_power, -self.weight)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::eta_power(self.eta_power + o.eta_power, self.weight + o.weight)
    }

    /// κ with χ(T) = e(κ), 0 <= κ < 1.
    pub fn kappa(&self) -> Q {
        self.phase_of(&GroupElement::T).expect("multiplier overflow")
    }
}

/// Normalized residual of χ(γ1γ2) J(γ1γ2,τ)^k = χ(γ1)χ(γ2) J(γ1,γ2τ)^k J(γ2,τ)^k.
pub fn multiplier_consistency_check(
    chi: &MultiplierSystem,
    pairs: &[(GroupElement, GroupElement)],
    taus: &[Complex64],
) -> f64 {
    let k = chi.weight;
    let mut worst: f64 = 0.0;
    for (g1, g2) in pairs {
        let g3 = *g1 * *g2;
        for &tau in taus {
            let lhs = chi.eval(&g3) * cpow(g3.j_factor(tau), k);
            let rhs = chi.eval(g1)
                * chi.eval(g2)
                * cpow(g1.j_factor(g2.act(tau)), k)
                * cpow(g2.j_factor(tau), k);
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1e-300));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::eta_series;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn el(a: i64, b: i64, c: i64, d: i64) -> GroupElement {
        GroupElement::new(a, b, c, d).unwrap()
    }

    #[test]
    fn words() {
        assert_eq!(GroupElement::T.word(), vec![Gen::T(1)]);
        assert_eq!(GroupElement::Z.word(), vec![Gen::S(2)]);
        let g = el(1, 0, 1, 1);
        assert_eq!(word_product(&g.word()).unwrap(), g);
        let alt = parse_word("S^-1 T^-1 S").unwrap();
        assert_eq!(word_product(&alt).unwrap(), g);
        assert_eq!(format_word(&g.word()), "T S T");
        assert_eq!("S T^3 S T^-2".parse::<GroupElement>().unwrap(), word_product(&parse_word("S T^3 S T^-2").unwrap()).unwrap());
        assert_eq!("2,1,1,1".parse::<GroupElement>().unwrap(), el(2, 1, 1, 1));
        assert!("2,1,1,2".parse::<GroupElement>().is_err());
    }

    #[test]
    fn large_word_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let g = GroupElement::random(&mut rng, 1_000_000);
            assert_eq!(word_product(&g.word()).unwrap(), g);
        }
    }

    #[test]
    fn dedekind_sums() {
        assert_eq!(dedekind_sum(1, 2).unwrap(), qi(0));
        // s(1, c) = (c-1)(c-2)/(12c)
        assert_eq!(dedekind_sum(1, 3).unwrap(), q(1, 18));
        assert_eq!(dedekind_sum(0, 1).unwrap(), qi(0));
        assert!(dedekind_sum(2, 4).is_err());
        for c in 1..40 {
            for d in -50..50 {
                if d.gcd(&c) == 1 {
                    assert_eq!(dedekind_sum(d, c).unwrap(), dedekind_sum_direct(d, c).unwrap());
                }
            }
        }
    }

    #[test]
    fn eta_multiplier_values() {
        let t = eta_multiplier(&GroupElement::T);
        assert!((t - Complex64::from_polar(1.0, PI / 12.0)).norm() < 1e-15);
        let s = eta_multiplier(&GroupElement::S);
        assert!((s - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
        assert_eq!(eta_multiplier(&GroupElement::Z), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn eta_multiplier_matches_eta() {
        let eta = eta_series(1, qi(40)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tau = Complex64::new(0.13, 0.9);
        let mut n = 0;
        while n < 40 {
            let g = GroupElement::random(&mut rng, 4);
            let w = g.act(tau);
            if w.im < 0.3 {
                continue;
            }
            n += 1;
            let lhs = eta.eval(w).unwrap().value;
            let rhs = eta_multiplier(&g) * cpow(g.j_factor(tau), 0.5) * eta.eval(tau).unwrap().value;
            assert!((lhs - rhs).norm() < 1e-10, "{g}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<_> = (0..50)
            .map(|_| (GroupElement::random(&mut rng, 6), GroupElement::random(&mut rng, 6)))
            .collect();
        let taus = [Complex64::new(0.2, 1.1), Complex64::new(-0.4, 0.6)];
        assert!(multiplier_consistency_check(&MultiplierSystem::trivial(4.0), &pairs, &taus) < 1e-13);
        assert!(multiplier_consistency_check(&MultiplierSystem::eta_power(13, 6.5), &pairs, &taus) < 1e-12);
        let d = MultiplierSystem::eta_power(24, 12.0);
        assert_eq!(d.eval(&GroupElement::T), Complex64::new(1.0, 0.0));
        assert!(multiplier_consistency_check(&d, &pairs, &taus) < 1e-12);
    }

    #[test]
    fn norms_and_action() {
        assert_eq!(GroupElement::I.mu_norm(), 2);
        assert_eq!(el(1, 5, 0, 1).mu_norm(), 27);
        let i = Complex64::i();
        assert!((GroupElement::S.act(i) - i).norm() < 1e-15);
        assert_eq!(GroupElement::S.act_cusp(Cusp::Infinity), Cusp::Rational(0, 1));
        assert_eq!(el(2, 1, 1, 1).inverse().act_cusp(Cusp::Infinity), Cusp::Rational(-1, 1));
    }

    #[test]
    fn metaplectic_product() {
        let a = MetaplecticElement::principal(GroupElement::S);
        let b = a.compose(&a);
        let tau = Complex64::new(0.3, 1.2);
        let lhs = a.sqrt_factor(GroupElement::S.act(tau)) * a.sqrt_factor(tau);
        assert!((b.sqrt_factor(tau) - lhs).norm() < 1e-12);
    }
}
