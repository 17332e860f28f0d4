//! The Weil-type representation on C^{2m}, basis e_mu with mu = 2ma in 0..2m.

use crate::error::{Error, Result};
use crate::group::{eta_multiplier_phase, Gen, GroupElement, MultiplierSystem};
use crate::rational::{self, phase, q, qi, Q};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JParity {
    Even,
    Odd,
}

/// Unitary representation given on generators. T acts diagonally with exact
/// rational phases, so T^n is evaluated without accumulated rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub dim: usize,
    pub t_phases: Vec<Q>,
    pub gen_s: CMat,
}

impl Representation {
    pub fn trivial(dim: usize) -> Self {
        Self { dim, t_phases: vec![qi(0); dim], gen_s: CMat::identity(dim, dim) }
    }

    pub fn gen_t(&self) -> CMat {
        self.t_pow(1)
    }

    pub fn t_pow(&self, n: i64) -> CMat {
        let d: Vec<Complex64> = self
            .t_phases
            .iter()
            .map(|&p| phase(rational::mul(p, qi(n)).expect("phase overflow")))
            .collect();
        CMat::from_diagonal(&nalgebra::DVector::from_vec(d))
    }

    pub fn s_pow(&self, e: i64) -> CMat {
        let mut m = CMat::identity(self.dim, self.dim);
        for _ in 0..e.rem_euclid(4) {
            m = &m * &self.gen_s;
        }
        m
    }

    pub fn eval_word(&self, w: &[Gen]) -> CMat {
        let mut m = CMat::identity(self.dim, self.dim);
        for g in w {
            m = match *g {
                Gen::S(e) => &m * self.s_pow(e),
                Gen::T(n) => &m * self.t_pow(n),
            };
        }
        m
    }

    /// Matrix of γ through its S,T-word.
    pub fn element(&self, g: &GroupElement) -> CMat {
        if self.is_trivial() {
            return CMat::identity(self.dim, self.dim);
        }
        self.eval_word(&g.word())
    }

    pub fn is_trivial(&self) -> bool {
        self.t_phases.iter().all(|p| *p.numer() == 0) && self.gen_s == CMat::identity(self.dim, self.dim)
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            t_phases: self.t_phases.iter().map(|&p| rational::frac(-p)).collect(),
            gen_s: self.gen_s.map(|z| z.conj()),
        }
    }

    /// Multiply every generator by the scalar multiplier χ (a rep when χ is a character).
    pub fn twist(&self, chi: &MultiplierSystem) -> Self {
        let ts = chi.kappa();
        let ss = phase(chi.phase_of(&GroupElement::S).expect("phase"));
        Self {
            dim: self.dim,
            t_phases: self.t_phases.iter().map(|&p| rational::frac(p + ts)).collect(),
            gen_s: self.gen_s.map(|z| z * ss),
        }
    }

    /// Residuals of S^4 = I and (ST)^3 = S^2.
    pub fn sl2z_relation_residuals(&self) -> (f64, f64) {
        let id = CMat::identity(self.dim, self.dim);
        let s2 = &self.gen_s * &self.gen_s;
        let st = &self.gen_s * self.gen_t();
        let st3 = &st * &st * &st;
        ((&s2 * &s2 - id).norm(), (st3 - s2).norm())
    }
}

/// Bare ρ̃ together with the twisted ρ' = χ'ρ̃ that is a genuine SL(2,Z) representation.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSpec {
    pub m: i64,
    pub parity: JParity,
    pub dim: usize,
    /// ρ̃(T̃) as exact phases, e(-μ²/4m).
    pub bare_t_phases: Vec<Q>,
    pub bare_s: CMat,
    /// χ' = ε^p with p odd.
    pub chi_prime: MultiplierSystem,
    pub rho: Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub m: i64,
    pub s2_minus_z: f64,
    pub st3_minus_z: f64,
    pub z2_plus_id: f64,
    pub z4_minus_id: f64,
    pub bare_s_unitary: f64,
    pub twisted_s4: f64,
    pub twisted_st3: f64,
}

impl RelationReport {
    pub fn max(&self) -> f64 {
        [
            self.s2_minus_z,
            self.st3_minus_z,
            self.z2_plus_id,
            self.z4_minus_id,
            self.bare_s_unitary,
            self.twisted_s4,
            self.twisted_st3,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub const RELATION_TOL: f64 = 1e-12;

pub fn build_generators(m: i64, parity: JParity) -> Result<RepresentationSpec> {
    build_generators_with(m, parity, 1)
}

/// `p` selects χ' = ε^p; any odd p gives the same χ''ρ''.
pub fn build_generators_with(m: i64, parity: JParity, p: i64) -> Result<RepresentationSpec> {
    if m < 1 {
        return Err(Error::Invalid(format!("index must be positive, got {m}")));
    }
    if parity == JParity::Even {
        return Err(Error::Unsupported(
            "even lattice rank needs index matrices of size j >= 2".into(),
        ));
    }
    if p.rem_euclid(2) != 1 {
        return Err(Error::Invalid(format!("chi' = eps^p needs p odd, got {p}")));
    }
    let n = 2 * m;
    let dim = n as usize;
    let bare_t_phases: Vec<Q> = (0..n).map(|mu| rational::frac(q(-mu * mu, 4 * m))).collect();
    let scale = phase(q(1, 8)) / (n as f64).sqrt();
    let bare_s = CMat::from_fn(dim, dim, |i, j| {
        scale * phase(q((i as i64) * (j as i64), n))
    });
    let chi_prime = MultiplierSystem::eta_power(p, 0.5);
    let tp = chi_prime.kappa();
    let sp = phase(chi_prime.phase_of(&GroupElement::S)?);
    let rho = Representation {
        dim,
        t_phases: bare_t_phases.iter().map(|&x| rational::frac(x + tp)).collect(),
        gen_s: bare_s.map(|z| z * sp),
    };
    let spec = RepresentationSpec { m, parity, dim, bare_t_phases, bare_s, chi_prime, rho };
    let (r4, r3) = spec.rho.sl2z_relation_residuals();
    if r4 > RELATION_TOL || r3 > RELATION_TOL {
        return Err(Error::RelationFailure(format!(
            "rho' violates SL(2,Z) relations: |S^4 - I| = {r4:e}, |(ST)^3 - S^2| = {r3:e}"
        )));
    }
    Ok(spec)
}

impl RepresentationSpec {
    pub fn bare_t(&self) -> CMat {
        let d: Vec<Complex64> = self.bare_t_phases.iter().map(|&p| phase(p)).collect();
        CMat::from_diagonal(&nalgebra::DVector::from_vec(d))
    }

    /// ρ̃(Z): e_a -> i e_{-a}.
    pub fn bare_z(&self) -> CMat {
        let n = self.dim;
        CMat::from_fn(n, n, |i, j| {
            if (i + j) % n == 0 {
                Complex64::i()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// ρ''(γ) = ρ'(γ).
    pub fn element(&self, g: &GroupElement) -> CMat {
        self.rho.element(g)
    }

    pub fn relation_check(&self) -> RelationReport {
        let id = CMat::identity(self.dim, self.dim);
        let s = &self.bare_s;
        let t = self.bare_t();
        let z = self.bare_z();
        let st = s * &t;
        let (r4, r3) = self.rho.sl2z_relation_residuals();
        RelationReport {
            m: self.m,
            s2_minus_z: (s * s - &z).norm(),
            st3_minus_z: (&st * &st * &st - &z).norm(),
            z2_plus_id: (&z * &z + &id).norm(),
            z4_minus_id: (&z * &z * &z * &z - &id).norm(),
            bare_s_unitary: (s * s.adjoint() - &id).norm(),
            twisted_s4: r4,
            twisted_st3: r3,
        }
    }
}

/// χ'' = χ for even j and χ·conj(χ') for odd j.
pub fn chi_double_prime(
    chi: &MultiplierSystem,
    parity: JParity,
    chi_prime: &MultiplierSystem,
) -> MultiplierSystem {
    match parity {
        JParity::Even => *chi,
        JParity::Odd => chi.mul(&chi_prime.conj()),
    }
}

/// Search for a character ε^{2j} and invertible P with conj(ρ(X)) P = ε^{2j}(X) P ρ(X) on
/// both generators, i.e. conj(ρ) ≅ ε^{2j} ⊗ ρ. Returns the first j in 0..12 that works.
pub fn conjugate_intertwiner(rep: &Representation) -> Option<(i64, CMat)> {
    let n = rep.dim;
    let id = CMat::identity(n, n);
    let gens = [(GroupElement::S, rep.gen_s.clone()), (GroupElement::T, rep.gen_t())];
    for j in 0..12 {
        let chi = MultiplierSystem::eta_power(2 * j, 0.0);
        let mut big = CMat::zeros(2 * n * n, n * n);
        for (i, (g, m)) in gens.iter().enumerate() {
            let block = id.kronecker(&m.map(|z| z.conj())) - m.transpose().kronecker(&id) * chi.eval(g);
            big.view_mut((i * n * n, 0), (n * n, n * n)).copy_from(&block);
        }
        let svd = big.svd(false, true);
        let vt = svd.v_t.expect("requested");
        // generic combination of the null vectors
        let mut v = vec![Complex64::new(0.0, 0.0); n * n];
        let mut w = Complex64::new(1.0, 0.0);
        for (k, sv) in svd.singular_values.iter().enumerate() {
            if *sv <= 1e-9 {
                for (x, z) in v.iter_mut().zip(vt.row(k).iter()) {
                    *x += w * z.conj();
                }
                w *= Complex64::new(0.6, 0.45);
            }
        }
        if w == Complex64::new(1.0, 0.0) {
            continue;
        }
        let p = CMat::from_column_slice(n, n, &v);
        let sv = p.clone().svd(false, false).singular_values;
        if sv.iter().cloned().fold(f64::INFINITY, f64::min) > 1e-8 {
            return Some((j, p));
        }
    }
    None
}

pub fn unitarity_residual(m: &CMat) -> f64 {
    (m * m.adjoint() - CMat::identity(m.nrows(), m.ncols())).norm()
}

/// Rows of [re, im] pairs.
pub fn matrix_json(m: &CMat) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde_json::json!(rows)
}

/// Exact phase of ε(γ)^p, exposed for callers assembling χ''ρ'' by hand.
pub fn eta_power_phase(g: &GroupElement, p: i64) -> Result<Q> {
    Ok(rational::frac(rational::mul(eta_multiplier_phase(g)?, qi(p))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_word;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn generators_index_one() {
        let spec = build_generators(1, JParity::Odd).unwrap();
        let t = spec.bare_t();
        assert_eq!(t[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(t[(1, 1)], Complex64::new(0.0, -1.0));
        let h = phase(q(1, 8)) / 2f64.sqrt();
        let want = CMat::from_row_slice(2, 2, &[h, h, h, -h]);
        assert!(close(&spec.bare_s, &want, 1e-15));
    }

    #[test]
    fn relations() {
        for m in 1..=5 {
            let r = build_generators(m, JParity::Odd).unwrap().relation_check();
            assert!(r.max() < 1e-12, "m={m}: {r:?}");
            assert_eq!(r.z4_minus_id, 0.0);
        }
    }

    #[test]
    fn even_parity_is_an_extension_point() {
        assert!(matches!(build_generators(1, JParity::Even), Err(Error::Unsupported(_))));
    }

    #[test]
    fn identity_and_two_words() {
        let spec = build_generators(2, JParity::Odd).unwrap();
        assert!(close(&spec.element(&GroupElement::I), &CMat::identity(4, 4), 0.0));
        let a = spec.rho.eval_word(&parse_word("T S T").unwrap());
        let b = spec.rho.eval_word(&parse_word("S^-1 T^-1 S").unwrap());
        assert!(close(&a, &b, 1e-12), "{a} {b} {:?}", spec.rho.t_pow(-1));
    }

    #[test]
    fn z_acts_through_chi_prime() {
        let spec = build_generators(3, JParity::Odd).unwrap();
        let z = spec.element(&GroupElement::Z);
        let scale = spec.chi_prime.eval(&GroupElement::Z);
        assert!(close(&z, &(spec.bare_z() * scale), 1e-12));
    }

    #[test]
    fn homomorphism_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..=3 {
            let spec = build_generators(m, JParity::Odd).unwrap();
            for _ in 0..40 {
                let g1 = GroupElement::random(&mut rng, 30);
                let g2 = GroupElement::random(&mut rng, 30);
                let lhs = spec.element(&g1) * spec.element(&g2);
                assert!(close(&lhs, &spec.element(&(g1 * g2)), 1e-10));
                assert!(unitarity_residual(&spec.element(&g1)) < 1e-12);
            }
        }
    }

    #[test]
    fn chi_double_prime_values() {
        let chi = MultiplierSystem::eta_power(13, 4.5);
        let spec = build_generators(1, JParity::Odd).unwrap();
        let cpp = chi_double_prime(&chi, JParity::Odd, &spec.chi_prime);
        assert_eq!(cpp.eta_power, 12);
        assert_eq!(cpp.eval(&GroupElement::T), Complex64::new(-1.0, 0.0));
        assert_eq!(chi_double_prime(&chi, JParity::Even, &spec.chi_prime), chi);
    }

    #[test]
    fn product_independent_of_chi_prime() {
        let chi = MultiplierSystem::eta_power(13, 4.5);
        let s1 = build_generators_with(1, JParity::Odd, 1).unwrap();
        let s3 = build_generators_with(1, JParity::Odd, 3).unwrap();
        let c1 = chi_double_prime(&chi, JParity::Odd, &s1.chi_prime);
        let c3 = chi_double_prime(&chi, JParity::Odd, &s3.chi_prime);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let g = GroupElement::random(&mut rng, 12);
            let a = s1.element(&g) * c1.eval(&g);
            let b = s3.element(&g) * c3.eval(&g);
            assert!(close(&a, &b, 1e-12));
        }
    }
}

#[cfg(test)]
mod intertwiner_tests {
    use super::*;

    #[test]
    fn conjugate_intertwiners_by_index() {
        for m in 1..=5 {
            let spec = build_generators(m, JParity::Odd).unwrap();
            let found = conjugate_intertwiner(&spec.rho);
            assert_eq!(found.is_some(), m == 1 || m == 5, "m = {m}");
            if let Some((j, p)) = found {
                let chi = MultiplierSystem::eta_power(2 * j, 0.0);
                let pi = p.clone().try_inverse().unwrap();
                for g in ["0,-1,1,0", "1,1,0,1", "2,1,1,1", "3,-2,-1,1"] {
                    let g: GroupElement = g.parse().unwrap();
                    let lhs = spec.rho.element(&g).map(|z| z.conj());
                    let rhs = &p * spec.rho.element(&g) * &pi * chi.eval(&g);
                    assert!((lhs - rhs).norm() < 1e-10);
                }
            }
        }
    }
}
