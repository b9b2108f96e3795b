//! Quadratic Gauss sums `S_N(x, θ) = Σ_{k=1}^N e^{πixk²} e^{2πikθ}` and the
//! singular values of a 2 × n matrix read off from `Σ z_k²`.
//!
//! The column phasors `z_k(t)` of a quadratic-phase time slice satisfy
//! `Σ z_k(t)² = S_d(1/d, 2t)`, so a uniform bound on the Gauss sum bounds
//! the gap between the two singular values of every scaled time slice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Term count above which the accumulation is compensated.
pub const COMPENSATED_THRESHOLD: usize = 1 << 16;

/// Neumaier-compensated sum of complex terms.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, v: Complex64) {
        self.sum.re = two_sum(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = two_sum(self.sum.im, v.im, &mut self.comp.im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn two_sum(a: f64, b: f64, comp: &mut f64) -> f64 {
    let s = a + b;
    if a.abs() >= b.abs() {
        *comp += (a - s) + b;
    } else {
        *comp += (b - s) + a;
    }
    s
}

fn accumulate(n: usize, turns: impl Fn(usize) -> f64) -> Complex64 {
    let term = |k: usize| Complex64::from_polar(1.0, TAU * turns(k));
    if n >= COMPENSATED_THRESHOLD {
        let mut acc = CompensatedSum::default();
        for k in 1..=n {
            acc.add(term(k));
        }
        acc.value()
    } else {
        (1..=n).map(term).sum()
    }
}

/// Direct summation of `S_n(x, θ)` in ascending `k`.
pub fn gauss_sum(n: usize, x: f64, theta: f64) -> Complex64 {
    accumulate(n, |k| {
        let kf = k as f64;
        (0.5 * x * kf * kf).rem_euclid(1.0) + (kf * theta).rem_euclid(1.0)
    })
}

/// `S_d(1/d, θ)` with the quadratic phase reduced exactly in integer
/// arithmetic (`k² mod 2d`).
pub fn gauss_sum_reciprocal(d: usize, theta: f64) -> Complex64 {
    let two_d = 2 * d as u128;
    accumulate(d, |k| {
        let k2 = (k as u128 * k as u128) % two_d;
        k2 as f64 / two_d as f64 + (k as f64 * theta).rem_euclid(1.0)
    })
}

/// `4√d + 3/2 + 1/d`, the uniform bound on `|S_d(1/d, θ)|`.
pub fn gauss_bound(d: usize) -> f64 {
    let d = d as f64;
    4.0 * d.sqrt() + 1.5 + 1.0 / d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussSumReport {
    pub n: usize,
    pub x: f64,
    pub theta_grid: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub bound: f64,
    pub max_magnitude: f64,
    pub max_ratio: f64,
}

/// Sweeps `θ` over `theta_samples` equally spaced points of `[-1/2, 1/2]`
/// (endpoints included) and checks `|S_d(1/d, θ)|` against the bound.
pub fn verify_bound(d: usize, theta_samples: usize) -> Result<GaussSumReport> {
    if d == 0 || theta_samples < 2 {
        return Err(Error::InvalidArgument(
            "verify_bound needs d >= 1 and at least 2 theta samples".into(),
        ));
    }
    let step = 1.0 / (theta_samples - 1) as f64;
    let theta_grid: Vec<f64> = (0..theta_samples).map(|i| -0.5 + i as f64 * step).collect();
    let magnitudes: Vec<f64> = theta_grid
        .iter()
        .map(|&th| gauss_sum_reciprocal(d, th).norm())
        .collect();
    let bound = gauss_bound(d);
    let max_magnitude = magnitudes.iter().copied().fold(0.0, f64::max);
    let report = GaussSumReport {
        n: d,
        x: 1.0 / d as f64,
        theta_grid,
        magnitudes,
        bound,
        max_magnitude,
        max_ratio: max_magnitude / bound,
    };
    if report.max_ratio > 1.0 {
        return Err(Error::BoundViolated {
            d,
            max_magnitude,
            bound,
        });
    }
    Ok(report)
}

/// Singular values `(√(1 + |ω|²/2), √(1 - |ω|²/2))` of the `2 × n` matrix
/// with rows `Re z` and `Im z`, where `ω² = Σ z_k²`. Requires
/// `Σ |z_k|² = 2`.
pub fn perturb_singular_values(z: &[Complex64]) -> Result<(f64, f64)> {
    let norm_sq: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    if (norm_sq - 2.0).abs() > 1e-9 {
        return Err(Error::NormPrecondition(norm_sq));
    }
    let omega_sq: Complex64 = z.iter().map(|v| v * v).sum();
    let s_max = (1.0 + 0.5 * omega_sq.norm()).sqrt();
    // s_min = √(1 − |Σz²|/2) cancels catastrophically near rank one; take it
    // from the Gram determinant instead, summed over 2×2 minors.
    let mut det = 0.0;
    for (j, a) in z.iter().enumerate() {
        for b in &z[j + 1..] {
            let minor = a.re * b.im - a.im * b.re;
            det += minor * minor;
        }
    }
    Ok((s_max, det.sqrt() / s_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_term() {
        let (x, th) = (0.3, 0.17);
        let s = gauss_sum(1, x, th);
        let e = Complex64::from_polar(1.0, std::f64::consts::PI * x + TAU * th);
        assert_abs_diff_eq!((s - e).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_terms_cancel() {
        assert_abs_diff_eq!(gauss_sum(2, 1.0, 0.0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn reciprocal_form_agrees_with_general_form() {
        for d in [1usize, 7, 64, 300] {
            for th in [-0.5, -0.123, 0.0, 0.31, 0.5] {
                let a = gauss_sum(d, 1.0 / d as f64, th);
                let b = gauss_sum_reciprocal(d, th);
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn compensated_path_matches_plain_sum() {
        let d = COMPENSATED_THRESHOLD + 3;
        let fast = gauss_sum_reciprocal(d, 0.21);
        let plain: Complex64 = (1..=d)
            .map(|k| {
                let k2 = (k as u128 * k as u128) % (2 * d as u128);
                Complex64::from_polar(1.0, TAU * (k2 as f64 / (2 * d) as f64 + (k as f64 * 0.21).rem_euclid(1.0)))
            })
            .sum();
        assert!((fast - plain).norm() < 1e-8);
    }

    #[test]
    fn bound_for_d1() {
        let r = verify_bound(1, 16).unwrap();
        assert!(r.magnitudes.iter().all(|m| (m - 1.0).abs() < 1e-14));
        assert_abs_diff_eq!(r.bound, 6.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.max_ratio, 1.0 / 6.5, epsilon = 1e-14);
        assert_eq!(r.theta_grid.first(), Some(&-0.5));
        assert_eq!(r.theta_grid.last(), Some(&0.5));
    }

    #[test]
    fn verify_bound_rejects_bad_arguments() {
        assert!(verify_bound(0, 10).is_err());
        assert!(verify_bound(4, 1).is_err());
    }

    #[test]
    fn perturbation_examples() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let (a, b) = perturb_singular_values(&[one, i]).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-15);
        let (a, b) = perturb_singular_values(&[one, one]).unwrap();
        assert_abs_diff_eq!(a, 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);
        assert!(matches!(
            perturb_singular_values(&[one]),
            Err(Error::NormPrecondition(_))
        ));
    }
}
