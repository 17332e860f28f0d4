//! Grid-fitted growth certificates |f(τ)| < K(|τ|^ρ + v^{-σ}).
//!
//! These are fits on a finite grid, not proofs.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub k: f64,
    pub rho: f64,
    pub sigma: f64,
    pub points: usize,
}

impl GrowthCertificate {
    pub fn bound(&self, tau: Complex64) -> f64 {
        self.k * (tau.norm().powf(self.rho) + tau.im.powf(-self.sigma))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthGrid {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

impl Default for GrowthGrid {
    /// v log-spaced in [0.05, 10], u uniform in [-5, 5].
    fn default() -> Self {
        let nv = 14;
        let (lo, hi) = (0.05f64.ln(), 10f64.ln());
        let v = (0..nv).map(|i| (lo + (hi - lo) * i as f64 / (nv - 1) as f64).exp()).collect();
        let u = (0..11).map(|i| -5.0 + i as f64).collect();
        Self { v, u }
    }
}

impl GrowthGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.v.len() * self.u.len());
        for &v in &self.v {
            for &u in &self.u {
                out.push(Complex64::new(u, v));
            }
        }
        out
    }
}

pub const EXPONENT_CAP: f64 = 60.0;

fn quarter_up(x: f64) -> f64 {
    ((x.max(0.0)) * 4.0).ceil() / 4.0
}

/// Fit (K, ρ, σ) to sampled magnitudes. σ comes from the small-v envelope and ρ
/// from the large-|τ| envelope; K then makes the bound hold on every sample.
pub fn fit(samples: &[(Complex64, f64)]) -> Result<GrowthCertificate> {
    if samples.iter().any(|(_, m)| !m.is_finite()) {
        return Err(Error::Refused("non-finite sample in growth fit".into()));
    }
    let reference = samples
        .iter()
        .filter(|(t, _)| t.im >= 1.0 && t.norm() <= 2.0)
        .map(|s| s.1)
        .fold(0.0, f64::max)
        .max(1e-300);
    // σ compares each column u against its own sample at the lowest height v >= 1
    let column_ref = |u: f64| {
        samples
            .iter()
            .filter(|(t, _)| t.re == u && t.im >= 1.0)
            .min_by(|a, b| a.0.im.total_cmp(&b.0.im))
            .map(|s| (s.0.im, s.1.max(1e-300)))
            .unwrap_or((1.0, reference))
    };
    let mut sigma: f64 = 0.0;
    let mut rho: f64 = 0.0;
    for &(t, m) in samples {
        if t.im < 1.0 {
            let (vr, r) = column_ref(t.re);
            if m > r {
                sigma = sigma.max((m / r).ln() / (vr / t.im).ln());
            }
        } else if t.norm() > 2.0 && m > reference {
            rho = rho.max((m / reference).ln() / t.norm().ln());
        }
    }
    let (rho, sigma) = (quarter_up(rho), quarter_up(sigma));
    if rho > EXPONENT_CAP || sigma > EXPONENT_CAP {
        return Err(Error::Refused(format!(
            "growth exponents exceed cap: rho = {rho}, sigma = {sigma}"
        )));
    }
    let mut k: f64 = 0.0;
    for &(t, m) in samples {
        k = k.max(m / (t.norm().powf(rho) + t.im.powf(-sigma)));
    }
    // strict inequality on the grid
    let k = if k == 0.0 { f64::MIN_POSITIVE } else { k * (1.0 + 1e-9) };
    Ok(GrowthCertificate { k, rho, sigma, points: samples.len() })
}

pub fn certify<F: Fn(Complex64) -> Result<f64>>(f: F, grid: &GrowthGrid) -> Result<GrowthCertificate> {
    let samples: Vec<(Complex64, f64)> = grid
        .points()
        .into_iter()
        .map(|t| f(t).map(|m| (t, m)))
        .collect::<Result<_>>()?;
    fit(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_growth() {
        let c = certify(|t| Ok((t * t + 1.0).norm()), &GrowthGrid::default()).unwrap();
        assert!(c.rho >= 1.5 && c.rho <= 2.5, "{c:?}");
        for t in GrowthGrid::default().points() {
            assert!((t * t + 1.0).norm() < c.bound(t));
        }
    }

    #[test]
    fn inverse_power() {
        let c = certify(|t| Ok(t.im.powf(-1.5)), &GrowthGrid::default()).unwrap();
        assert!(c.sigma >= 1.5 && c.sigma <= 1.75, "{c:?}");
    }

    #[test]
    fn zero_function() {
        let c = certify(|_| Ok(0.0), &GrowthGrid::default()).unwrap();
        assert_eq!(c.rho, 0.0);
        assert_eq!(c.sigma, 0.0);
    }
}
