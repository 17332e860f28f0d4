//! Property tests for the algebraic and analytic invariants.

use crate::group::{
    cpow, dedekind_sum, dedekind_sum_direct, format_word, parse_word, word_product, GroupElement, MultiplierSystem,
};
use crate::jacobi::{slash_elliptic_eval, LatticeElement};
use crate::periods::{PAction, PElement};
use crate::poincare::row_bounds;
use crate::rational::{q, qi};
use crate::series::FourierSeries;
use crate::theta::theta_eval;
use crate::weil::{build_generators, JParity};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn element(seed: u64, bound: i64) -> GroupElement {
    GroupElement::random(&mut ChaCha8Rng::seed_from_u64(seed), bound)
}

fn upper() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, 0.4f64..2.0).prop_map(|(x, y)| Complex64::new(x, y))
}

fn series(coeffs: &[i32]) -> FourierSeries {
    let mut s = FourierSeries::new(qi(0), 1, qi(12)).unwrap();
    for (n, c) in coeffs.iter().enumerate() {
        s.insert(n as i64, Complex64::new(*c as f64, 0.0)).unwrap();
    }
    s
}

fn dense(s: &FourierSeries) -> Vec<Complex64> {
    (0..12).map(|n| s.coeff_at(qi(n))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_reproduces_matrix(seed in any::<u64>()) {
        let g = element(seed, 30);
        let w = g.word();
        prop_assert_eq!(word_product(&w).unwrap(), g);
        prop_assert_eq!(parse_word(&format_word(&w)).unwrap(), w);
    }

    #[test]
    fn product_is_associative(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (a, b, c) = (element(s1, 10), element(s2, 10), element(s3, 10));
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert!((a * a.inverse()).is_identity());
    }

    #[test]
    fn dedekind_reciprocity_paths_agree(c in 1i64..200, d in -300i64..300) {
        prop_assume!(num_integer::Integer::gcd(&c, &d) == 1);
        prop_assert_eq!(dedekind_sum(d, c).unwrap(), dedekind_sum_direct(d, c).unwrap());
    }

    #[test]
    fn eta_multiplier_is_consistent(s1 in any::<u64>(), s2 in any::<u64>(), tau in upper()) {
        let (a, b) = (element(s1, 12), element(s2, 12));
        let eps = MultiplierSystem::eta_power(1, 0.5);
        let lhs = eps.eval(&(a * b)) * cpow((a * b).j_factor(tau), 0.5);
        let rhs = eps.eval(&a) * eps.eval(&b) * cpow(a.j_factor(b.act(tau)), 0.5) * cpow(b.j_factor(tau), 0.5);
        prop_assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn weil_representation_is_a_homomorphism(m in 1i64..=5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let spec = build_generators(m, JParity::Odd).unwrap();
        let (a, b) = (element(s1, 8), element(s2, 8));
        let d = spec.element(&(a * b)) - spec.element(&a) * spec.element(&b);
        prop_assert!(d.norm() < 1e-10, "residual {}", d.norm());
    }

    #[test]
    fn slash_is_a_right_action(s1 in any::<u64>(), s2 in any::<u64>(), tau in upper()) {
        let spec = build_generators(1, JParity::Odd).unwrap();
        let act = PAction { weight: -1.5, chi: MultiplierSystem::eta_power(13, -1.5), rho: spec.rho };
        let p = PElement::new(2, "test", |t: Complex64| Ok(DVector::from_vec(vec![t, t * t + 1.0])));
        let (a, b) = (element(s1, 5), element(s2, 5));
        let lhs = act.slash_at(&act.slash(&p, &a), &b, tau).unwrap();
        let rhs = act.slash_at(&p, &(a * b), tau).unwrap();
        prop_assert!((&lhs - &rhs).norm() < 1e-8 * (1.0 + rhs.norm()), "{}", (lhs - rhs).norm());
    }

    #[test]
    fn row_constants_bound_every_row(tau in upper(), c in -50i64..50, d in -50i64..50) {
        prop_assume!(c != 0 || d != 0);
        let (kmin, kmax) = row_bounds(tau);
        let n = (c * c + d * d) as f64;
        let v = (tau * c as f64 + d as f64).norm_sqr();
        prop_assert!(kmin * n <= v * (1.0 + 1e-12) && v <= kmax * n * (1.0 + 1e-12));
    }

    #[test]
    fn series_product_matches_pointwise(a in prop::collection::vec(-5i32..5, 1..8), b in prop::collection::vec(-5i32..5, 1..8)) {
        let (sa, sb) = (series(&a), series(&b));
        let ab = sa.mul(&sb).unwrap();
        let ba = sb.mul(&sa).unwrap();
        prop_assert_eq!(dense(&ab), dense(&ba));
        let tau = Complex64::new(0.2, 1.5);
        let want = sa.eval(tau).unwrap().value * sb.eval(tau).unwrap().value;
        prop_assert!((ab.eval(tau).unwrap().value - want).norm() < 1e-9);
        let back = sa.add(&sb).unwrap().sub(&sb).unwrap();
        prop_assert_eq!(dense(&back), dense(&sa));
    }

    #[test]
    fn theta_is_elliptically_invariant(m in 1i64..=3, mu in 0i64..6, l in -2i64..=2, n in -2i64..=2, tau in upper(), x in -0.5f64..0.5) {
        let z = Complex64::new(x, 0.1);
        let f = |t: Complex64, w: Complex64| Ok(theta_eval(m, mu, t, w));
        let lhs = slash_elliptic_eval(&f, m as f64, LatticeElement::new(l, n), tau, z).unwrap();
        let rhs = theta_eval(m, mu, tau, z);
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }
}

#[test]
fn exponent_lookup_uses_the_lattice() {
    let s = FourierSeries::monomial(q(7, 24), Complex64::new(2.0, 0.0), qi(3)).unwrap();
    assert_eq!(s.coeff_at(q(7, 24)), Complex64::new(2.0, 0.0));
    assert_eq!(s.coeff_at(q(1, 3)), Complex64::new(0.0, 0.0));
}
