//! The smoothest isotropic isometry from data points to closed plane curves.
//!
//! Harmonic `k` is assigned to the `k`-th left singular direction of the
//! data, so the map is
//!
//! ```text
//! Φ(t) = [ R(ψ₁)(c₁(t), s₁(t))ᵀ  …  R(ψ_d)(c_d(t), s_d(t))ᵀ ] · Uᵀ
//! ```
//!
//! with `c_k = √2 cos 2πkt`, `s_k = √2 sin 2πkt` and `R(ψ)` the planar
//! rotation by `ψ`. Quadratic phases `ψ_k = 2π k²/(4d)` keep every scaled
//! time slice `Φ(t)/√d` close to a projection once `d` is large.
//!
//! Quadratic variation uses the Fourier-domain normalization
//! `QV(f) = Σ_m m² ‖f̂(m)‖²`, i.e. `(1/4π²) ∫ ‖f′‖²`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::{DMatrix, DVector, Matrix2xX};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::PlaneCurve;
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::spectral::SvdFactors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhasePolicy {
    Quadratic,
    None,
}

/// Smallest uniform grid on which the products of two harmonics up to `d`
/// integrate exactly.
pub fn min_samples(d: usize) -> usize {
    4 * d + 2
}

pub fn default_samples(d: usize) -> usize {
    min_samples(d).max(1024)
}

fn check_samples(d: usize, samples: usize) -> Result<()> {
    let required = min_samples(d);
    if samples < required {
        return Err(Error::InsufficientSamples {
            samples,
            required,
            d,
        });
    }
    Ok(())
}

/// `ε(d) = 4/√d + 3/(2d) + 1/d²`. The singular value interval
/// `[√(1-ε), √(1+ε)]` only says something when `ε < 1`, i.e. `d >= 25`.
pub fn slice_epsilon(d: usize) -> f64 {
    let d = d as f64;
    4.0 / d.sqrt() + 3.0 / (2.0 * d) + 1.0 / (d * d)
}

pub fn quadratic_phases(d: usize) -> Vec<f64> {
    (1..=d)
        .map(|k| TAU * (k * k) as f64 / (4 * d) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AndrewsMap {
    dim: usize,
    u_transpose: DMatrix<f64>,
    phases: Vec<f64>,
    frequencies: Vec<usize>,
    phase_policy: PhasePolicy,
}

pub fn build_map(factors: &SvdFactors, phase_policy: PhasePolicy) -> AndrewsMap {
    AndrewsMap::new(factors.u.transpose(), phase_policy)
}

impl AndrewsMap {
    pub fn new(u_transpose: DMatrix<f64>, phase_policy: PhasePolicy) -> Self {
        let dim = u_transpose.nrows();
        assert_eq!(dim, u_transpose.ncols(), "u_transpose must be square");
        let phases = match phase_policy {
            PhasePolicy::Quadratic => quadratic_phases(dim),
            PhasePolicy::None => vec![0.0; dim],
        };
        Self {
            dim,
            u_transpose,
            phases,
            frequencies: (1..=dim).collect(),
            phase_policy,
        }
    }

    /// Map for data already expressed in its singular basis (`U = I`).
    pub fn identity(dim: usize, phase_policy: PhasePolicy) -> Self {
        Self::new(DMatrix::identity(dim, dim), phase_policy)
    }

    /// Reassigns harmonics to directions. Any set of distinct positive
    /// frequencies keeps the map an isotropic isometry; only `1..=d` in
    /// order is smoothest.
    pub fn with_frequencies(mut self, frequencies: Vec<usize>) -> Result<Self> {
        if frequencies.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: frequencies.len(),
            });
        }
        let mut sorted = frequencies.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != frequencies.len() || sorted[0] == 0 {
            return Err(Error::InvalidArgument(
                "frequencies must be distinct and positive".into(),
            ));
        }
        self.frequencies = frequencies;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u_transpose(&self) -> &DMatrix<f64> {
        &self.u_transpose
    }

    /// Rotation angles in radians, unreduced.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn frequencies(&self) -> &[usize] {
        &self.frequencies
    }

    pub fn phase_policy(&self) -> PhasePolicy {
        self.phase_policy
    }

    fn angle(&self, col: usize, t: f64) -> f64 {
        let turns = (self.frequencies[col] as f64 * t).rem_euclid(1.0);
        TAU * turns + self.phases[col].rem_euclid(TAU)
    }

    /// The `2 × d` matrix `C(t)` before the change of basis.
    pub fn harmonic_slice(&self, t: f64) -> Matrix2xX<f64> {
        let mut c = Matrix2xX::zeros(self.dim);
        for k in 0..self.dim {
            let (s, co) = self.angle(k, t).sin_cos();
            c[(0, k)] = SQRT_2 * co;
            c[(1, k)] = SQRT_2 * s;
        }
        c
    }

    /// `Φ(t) = C(t) Uᵀ`.
    pub fn evaluate_time_slice(&self, t: f64) -> Matrix2xX<f64> {
        self.harmonic_slice(t) * &self.u_transpose
    }

    /// Columns of `C(t)` as complex numbers `(c + i s)/√2`; unit modulus.
    pub fn column_phasors(&self, t: f64) -> Vec<Complex64> {
        (0..self.dim)
            .map(|k| Complex64::from_polar(1.0, self.angle(k, t)))
            .collect()
    }

    /// The plane curve `Φ[x]` as an analytically evaluable function.
    pub fn curve(&self, x: &DVector<f64>) -> Result<AndrewsCurve<'_>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(AndrewsCurve {
            map: self,
            coeffs: &self.u_transpose * x,
            source_norm: x.norm(),
        })
    }
}

/// `Φ[x]` for one data point, stored as its singular-basis coordinates
/// `Uᵀx`.
#[derive(Debug, Clone)]
pub struct AndrewsCurve<'a> {
    map: &'a AndrewsMap,
    coeffs: DVector<f64>,
    source_norm: f64,
}

impl AndrewsCurve<'_> {
    /// `QV(Φ[x]) = Σ_m m² ‖Φ[x]^(m)‖²`, computed from the single harmonic
    /// carried by each column.
    pub fn quadratic_variation(&self) -> f64 {
        // per frequency: coefficients of (c_f, s_f) in each output coordinate
        let mut by_freq: BTreeMap<usize, [f64; 4]> = BTreeMap::new();
        for k in 0..self.map.dim {
            let y = self.coeffs[k];
            let (s, c) = self.map.phases[k].sin_cos();
            let acc = by_freq.entry(self.map.frequencies[k]).or_insert([0.0; 4]);
            // R(ψ) = [[c, -s], [s, c]] applied to (c_f, s_f)
            acc[0] += y * c;
            acc[1] -= y * s;
            acc[2] += y * s;
            acc[3] += y * c;
        }
        by_freq
            .into_iter()
            .map(|(f, a)| (f * f) as f64 * a.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }
}

impl PlaneCurve for AndrewsCurve<'_> {
    fn value(&self, t: f64) -> [f64; 2] {
        let mut p = [0.0; 2];
        for k in 0..self.map.dim {
            let (s, c) = self.map.angle(k, t).sin_cos();
            let w = SQRT_2 * self.coeffs[k];
            p[0] += w * c;
            p[1] += w * s;
        }
        p
    }

    fn derivative(&self, t: f64) -> [f64; 2] {
        let mut p = [0.0; 2];
        for k in 0..self.map.dim {
            let (s, c) = self.map.angle(k, t).sin_cos();
            let w = SQRT_2 * TAU * self.map.frequencies[k] as f64 * self.coeffs[k];
            p[0] -= w * s;
            p[1] += w * c;
        }
        p
    }

    fn source_norm(&self) -> Option<f64> {
        Some(self.source_norm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurveSamples {
    /// `t_i = i / M`, `i = 0..M`.
    pub grid: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    /// Literal `d/dt` of the curve (includes the `2πk` factors).
    pub derivative_points: Vec<[f64; 2]>,
    pub source_norm: f64,
}

impl PlaneCurveSamples {
    /// Grid mean of the curve; zero for every curve of the map.
    pub fn mean(&self) -> [f64; 2] {
        let m = self.points.len() as f64;
        let s = self
            .points
            .iter()
            .fold([0.0; 2], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / m, s[1] / m]
    }

    /// Uniform-grid quadrature of `‖Φ[x]‖²` over `[0, 1]`.
    pub fn l2_norm_squared(&self) -> f64 {
        let m = self.points.len() as f64;
        self.points.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / m
    }

    /// Uniform-grid quadrature of `‖uᵀΦ[x]‖²` for a direction `u` in the plane.
    pub fn projected_l2_norm_squared(&self, u: [f64; 2]) -> f64 {
        let m = self.points.len() as f64;
        self.points
            .iter()
            .map(|p| {
                let v = u[0] * p[0] + u[1] * p[1];
                v * v
            })
            .sum::<f64>()
            / m
    }
}

pub fn uniform_grid(samples: usize) -> Vec<f64> {
    (0..samples).map(|i| i as f64 / samples as f64).collect()
}

/// Samples `Φ[x]` and its derivative on the uniform grid of `samples`
/// points. Requires `samples >= 4d + 2`.
pub fn evaluate_curve(map: &AndrewsMap, x: &DVector<f64>, samples: usize) -> Result<PlaneCurveSamples> {
    check_samples(map.dim, samples)?;
    let curve = map.curve(x)?;
    let grid = uniform_grid(samples);
    let points = grid.iter().map(|&t| curve.value(t)).collect();
    let derivative_points = grid.iter().map(|&t| curve.derivative(t)).collect();
    Ok(PlaneCurveSamples {
        grid,
        points,
        derivative_points,
        source_norm: curve.source_norm,
    })
}

/// The minimum mean quadratic variation over all isotropic isometries, in
/// its Abel-summed form.
pub fn mqv_closed_form(sigma: &[f64]) -> Result<f64> {
    if sigma.iter().any(|&s| s.is_nan() || s < 0.0)
        || sigma.windows(2).any(|w| w[1] > w[0])
    {
        return Err(Error::NotNonIncreasing);
    }
    let d = sigma.len();
    if d == 0 {
        return Ok(0.0);
    }
    let sq_sum = |s: usize| (s * (s + 1) * (2 * s + 1) / 6) as f64;
    let mut total = 0.0;
    for s in 1..d {
        let gap = sigma[s - 1] * sigma[s - 1] - sigma[s] * sigma[s];
        total += 2.0 * gap * sq_sum(s);
    }
    total += 2.0 * sigma[d - 1] * sigma[d - 1] * sq_sum(d);
    Ok(total)
}

/// Total quadratic variation `Σ_n QV(Φ[x_n])` of the dataset's curves. Its
/// minimum over feasible maps is [`mqv_closed_form`] of the singular values.
pub fn mqv_of_map(map: &AndrewsMap, ds: &Dataset) -> Result<f64> {
    if ds.d() != map.dim {
        return Err(Error::DimensionMismatch {
            expected: map.dim,
            found: ds.d(),
        });
    }
    let mut total = 0.0;
    for n in 0..ds.n() {
        total += map.curve(&ds.point(n))?.quadratic_variation();
    }
    Ok(total)
}

/// Largest deviation of the map's coordinate functions from an orthonormal,
/// zero-mean collection, measured by uniform-grid quadrature.
pub fn gram_deviation(map: &AndrewsMap, samples: usize) -> Result<f64> {
    gram_deviation_with(map.dim, samples, |t| map.evaluate_time_slice(t))
}

/// [`gram_deviation`] for any `2 × d` matrix-valued function.
pub fn gram_deviation_with<F>(dim: usize, samples: usize, slice: F) -> Result<f64>
where
    F: Fn(f64) -> Matrix2xX<f64>,
{
    check_samples(dim, samples)?;
    let rows = 2 * dim;
    let mut values = DMatrix::zeros(rows, samples);
    for (i, t) in uniform_grid(samples).into_iter().enumerate() {
        let s = slice(t);
        for k in 0..dim {
            values[(k, i)] = s[(0, k)];
            values[(dim + k, i)] = s[(1, k)];
        }
    }
    let m = samples as f64;
    let gram = &values * values.transpose() / m;
    let orth = (gram - DMatrix::<f64>::identity(rows, rows)).amax();
    let mean = values.column_sum().amax() / m;
    Ok(orth.max(mean))
}

/// Singular values `(s_max, s_min)` of `Φ(t)/√d` from the closed-form
/// eigenvalues of the 2×2 Gram matrix.
pub fn time_slice_singular_values(map: &AndrewsMap, t: f64) -> (f64, f64) {
    slice_singular_values(&map.evaluate_time_slice(t), map.dim as f64)
}

fn slice_singular_values(slice: &Matrix2xX<f64>, scale: f64) -> (f64, f64) {
    let r0 = slice.row(0);
    let r1 = slice.row(1);
    let a = r0.dot(&r0) / scale;
    let c = r1.dot(&r1) / scale;
    let b = r0.dot(&r1) / scale;
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    ((mid + rad).sqrt(), (mid - rad).max(0.0).sqrt())
}

/// Sweeps `samples` uniform times and returns the extreme scaled singular
/// values `(min s_min, max s_max)`.
pub fn time_slice_extremes(map: &AndrewsMap, samples: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for t in uniform_grid(samples) {
        let (s_max, s_min) = time_slice_singular_values(map, t);
        lo = lo.min(s_min);
        hi = hi.max(s_max);
    }
    (lo, hi)
}

/// `(1/4π²)` converts `∫‖f′‖²` to the Fourier-domain quadratic variation.
pub const QV_DERIVATIVE_SCALE: f64 = 1.0 / (4.0 * PI * PI);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quadratic_phases_d4() {
        let m = AndrewsMap::identity(4, PhasePolicy::Quadratic);
        let expected = [PI / 8.0, PI / 2.0, 9.0 * PI / 8.0, 2.0 * PI];
        for (p, e) in m.phases().iter().zip(expected) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn no_phases_are_zero() {
        let m = AndrewsMap::identity(5, PhasePolicy::None);
        assert!(m.phases().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn d1_quadratic_is_quarter_turn() {
        let m = AndrewsMap::identity(1, PhasePolicy::Quadratic);
        assert_abs_diff_eq!(m.phases()[0], FRAC_PI_2, epsilon = 1e-15);
        for t in [0.0, 0.1, 0.37, 0.8] {
            let s = m.evaluate_time_slice(t);
            assert_abs_diff_eq!(s[(0, 0)], -SQRT_2 * (TAU * t).sin(), epsilon = 1e-14);
            assert_abs_diff_eq!(s[(1, 0)], SQRT_2 * (TAU * t).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn slice_at_zero_without_phases() {
        let s = AndrewsMap::identity(3, PhasePolicy::None).evaluate_time_slice(0.0);
        for k in 0..3 {
            assert_eq!(s[(0, k)], SQRT_2);
            assert_eq!(s[(1, k)], 0.0);
        }
    }

    #[test]
    fn slice_at_quarter_d2() {
        let s = AndrewsMap::identity(2, PhasePolicy::None).evaluate_time_slice(0.25);
        assert_abs_diff_eq!(s[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(1, 0)], SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(0, 1)], -SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(1, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn first_basis_vector_selects_first_harmonic() {
        let m = AndrewsMap::identity(3, PhasePolicy::None);
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let c = evaluate_curve(&m, &x, 16).unwrap();
        for (t, p) in c.grid.iter().zip(&c.points) {
            assert_abs_diff_eq!(p[0], SQRT_2 * (TAU * t).cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(p[1], SQRT_2 * (TAU * t).sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_point_is_zero_curve() {
        let m = AndrewsMap::identity(3, PhasePolicy::Quadratic);
        let c = evaluate_curve(&m, &DVector::zeros(3), 14).unwrap();
        assert!(c.points.iter().all(|p| p == &[0.0, 0.0]));
    }

    #[test]
    fn sample_rule_enforced() {
        let m = AndrewsMap::identity(4, PhasePolicy::Quadratic);
        let err = evaluate_curve(&m, &DVector::zeros(4), 10).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { required: 18, .. }));
        assert!(err.to_string().contains("4d+2"));
        let err = evaluate_curve(&m, &DVector::zeros(3), 18).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = AndrewsMap::identity(3, PhasePolicy::Quadratic);
        let x = DVector::from_vec(vec![0.3, -1.2, 0.7]);
        let c = m.curve(&x).unwrap();
        let h = 1e-6;
        for t in [0.05, 0.4, 0.77] {
            let a = c.value(t + h);
            let b = c.value(t - h);
            let d = c.derivative(t);
            for j in 0..2 {
                assert_abs_diff_eq!((a[j] - b[j]) / (2.0 * h), d[j], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn mqv_closed_form_examples() {
        assert_eq!(mqv_closed_form(&[1.0]).unwrap(), 2.0);
        assert_abs_diff_eq!(mqv_closed_form(&[3.0, 2.0, 1.0]).unwrap(), 68.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mqv_closed_form(&[1.0, 1.0]).unwrap(), 10.0, epsilon = 1e-12);
        assert!(matches!(mqv_closed_form(&[1.0, 2.0]), Err(Error::NotNonIncreasing)));
        assert!(matches!(mqv_closed_form(&[-1.0]), Err(Error::NotNonIncreasing)));
    }

    #[test]
    fn single_harmonic_qv() {
        for k in 1..=4 {
            let m = AndrewsMap::identity(4, PhasePolicy::Quadratic);
            let mut x = DVector::zeros(4);
            x[k - 1] = 1.0;
            let qv = m.curve(&x).unwrap().quadratic_variation();
            assert_abs_diff_eq!(qv, 2.0 * (k * k) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn qv_matches_rescaled_derivative_quadrature() {
        let m = AndrewsMap::identity(3, PhasePolicy::Quadratic);
        let x = DVector::from_vec(vec![0.4, 1.1, -0.8]);
        let c = evaluate_curve(&m, &x, 64).unwrap();
        let raw: f64 = c
            .derivative_points
            .iter()
            .map(|p| p[0] * p[0] + p[1] * p[1])
            .sum::<f64>()
            / 64.0;
        let qv = m.curve(&x).unwrap().quadratic_variation();
        assert_abs_diff_eq!(raw * QV_DERIVATIVE_SCALE, qv, epsilon = 1e-12 * qv);
    }

    #[test]
    fn zero_dataset_has_zero_mqv() {
        let ds = Dataset::from_matrix(DMatrix::zeros(2, 5)).unwrap();
        let m = AndrewsMap::identity(2, PhasePolicy::Quadratic);
        assert_eq!(mqv_of_map(&m, &ds).unwrap(), 0.0);
    }

    #[test]
    fn gram_exact_for_d1() {
        let m = AndrewsMap::identity(1, PhasePolicy::None);
        assert!(gram_deviation(&m, 6).unwrap() < 1e-15);
        assert!(gram_deviation(&m, 5).is_err());
    }

    #[test]
    fn corrupted_map_fails_gram() {
        let m = AndrewsMap::identity(4, PhasePolicy::Quadratic);
        // rotate only the first row of each column
        let corrupted = |t: f64| {
            let base = AndrewsMap::identity(4, PhasePolicy::None).evaluate_time_slice(t);
            let good = m.evaluate_time_slice(t);
            let mut s = base.clone();
            s.set_row(0, &good.row(0));
            s
        };
        assert!(gram_deviation_with(4, 18, corrupted).unwrap() > 1e-3);
    }

    #[test]
    fn degenerate_baseline_at_zero() {
        let m = AndrewsMap::identity(4, PhasePolicy::None);
        let (s_max, s_min) = time_slice_singular_values(&m, 0.0);
        assert_abs_diff_eq!(s_max, SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(s_min, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn epsilon_values() {
        assert_abs_diff_eq!(slice_epsilon(4), 2.4375, epsilon = 1e-15);
        assert_abs_diff_eq!(slice_epsilon(25), 0.8616, epsilon = 1e-12);
        assert_abs_diff_eq!(slice_epsilon(64), 0.5237, epsilon = 1e-4);
        assert!(slice_epsilon(1 << 40) < 1e-5);
    }

    #[test]
    fn frequency_reassignment_is_validated() {
        let m = AndrewsMap::identity(3, PhasePolicy::None);
        assert!(m.clone().with_frequencies(vec![1, 1, 2]).is_err());
        assert!(m.clone().with_frequencies(vec![0, 1, 2]).is_err());
        assert!(m.clone().with_frequencies(vec![1, 2]).is_err());
        assert!(m.with_frequencies(vec![2, 1, 3]).is_ok());
    }
}
