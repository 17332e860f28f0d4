//! Adaptive Gauss–Kronrod (7, 15) quadrature for complex integrands.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn axpy(acc: &mut [Complex64], w: f64, x: &[Complex64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b * w;
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn gk15<F: Fn(f64) -> Vec<Complex64>>(f: &F, a: f64, b: f64, dim: usize) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = vec![Complex64::new(0.0, 0.0); dim];
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    axpy(&mut k, WGK[7], &fc);
    axpy(&mut g, WG[3], &fc);
    for j in 0..7 {
        let x = h * XGK[j];
        let s: Vec<Complex64> = f(c - x).iter().zip(f(c + x)).map(|(p, q)| p + q).collect();
        axpy(&mut k, WGK[j], &s);
        if j % 2 == 1 {
            axpy(&mut g, WG[j / 2], &s);
        }
    }
    let diff: Vec<Complex64> = k.iter().zip(&g).map(|(p, q)| (p - q) * h).collect();
    let value = k.iter().map(|z| z * h).collect();
    Piece { a, b, value, err: norm(&diff) }
}

pub const MAX_PIECES: usize = 4000;

/// ∫_a^b f for vector-valued f, refined until the summed error estimate is
/// within max(abs_tol, rel_tol |I|).
pub fn integrate_vec<F: Fn(f64) -> Vec<Complex64>>(
    f: F,
    a: f64,
    b: f64,
    dim: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(Vec<Complex64>, f64)> {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b, dim);
    let mut total = first.value.clone();
    let mut err = first.err;
    heap.push(first);
    while err > abs_tol.max(rel_tol * norm(&total)) {
        if heap.len() >= MAX_PIECES {
            return Err(Error::Refused(format!(
                "quadrature did not converge: error {err:e} after {MAX_PIECES} pieces"
            )));
        }
        let p = heap.pop().expect("nonempty");
        let m = 0.5 * (p.a + p.b);
        let l = gk15(&f, p.a, m, dim);
        let r = gk15(&f, m, p.b, dim);
        axpy(&mut total, 1.0, &l.value);
        axpy(&mut total, 1.0, &r.value);
        axpy(&mut total, -1.0, &p.value);
        err += l.err + r.err - p.err;
        heap.push(l);
        heap.push(r);
    }
    // resum in interval order so the result does not depend on refinement history
    let mut pieces: Vec<Piece> = heap.into_vec();
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    for p in &pieces {
        axpy(&mut total, 1.0, &p.value);
    }
    let err = pieces.iter().map(|p| p.err).sum();
    Ok((total, err))
}

/// ∫_y^∞ f through t = y + s/(1-s).
pub fn integrate_vec_to_infinity<F: Fn(f64) -> Vec<Complex64>>(
    f: F,
    y: f64,
    dim: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(Vec<Complex64>, f64)> {
    let g = |s: f64| {
        if s >= 1.0 {
            return vec![Complex64::new(0.0, 0.0); dim];
        }
        let u = 1.0 - s;
        let v: Vec<Complex64> = f(y + s / u).into_iter().map(|z| z / (u * u)).collect();
        if v.iter().all(|z| z.is_finite()) {
            v
        } else {
            vec![Complex64::new(0.0, 0.0); dim]
        }
    };
    integrate_vec(g, 0.0, 1.0, dim, abs_tol, rel_tol)
}

pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(Complex64, f64)> {
    let (v, e) = integrate_vec(|x| vec![f(x)], a, b, 1, abs_tol, rel_tol)?;
    Ok((v[0], e))
}

pub fn integrate_to_infinity<F: Fn(f64) -> Complex64>(
    f: F,
    y: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(Complex64, f64)> {
    let (v, e) = integrate_vec_to_infinity(|x| vec![f(x)], y, 1, abs_tol, rel_tol)?;
    Ok((v[0], e))
}
