//! Bishop-frame filaments.
//!
//! A plane curve `φ = (φ₁, φ₂)` drives the rotating frame `F = (T; N₁; N₂)`
//! (rows) through `F′ = A(t) F`, `F(0) = I`, with
//!
//! ```text
//!        ⎡  0   φ₁  φ₂ ⎤
//! A(t) = ⎢ -φ₁  0   0  ⎥
//!        ⎣ -φ₂  0   0  ⎦
//! ```
//!
//! so `T′ = φ₁N₁ + φ₂N₂` and the normals do not spin about `T`. The frame is
//! advanced with a three-stage Crouch–Grossman method whose stages are exact
//! Rodrigues exponentials, so every frame is a rotation up to roundoff. The
//! filament is the left-endpoint cumulative sum of the unit tangents.

use nalgebra::{Matrix3, Vector3};

use crate::curve::PlaneCurve;
use crate::error::{Error, Result};

pub fn skew_from_phi(phi1: f64, phi2: f64) -> Matrix3<f64> {
    Matrix3::new(0.0, phi1, phi2, -phi1, 0.0, 0.0, -phi2, 0.0, 0.0)
}

const SERIES_THRESHOLD: f64 = 1e-6;

/// `exp(a)` for skew-symmetric `a` via Rodrigues' formula.
pub fn rodrigues_exp(a: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let asym = (a + a.transpose()).amax();
    if asym >= 1e-12 {
        return Err(Error::NotSkew(asym));
    }
    Ok(rodrigues_unchecked(a))
}

fn rodrigues_unchecked(a: &Matrix3<f64>) -> Matrix3<f64> {
    let rho2 = a[(0, 1)] * a[(0, 1)] + a[(0, 2)] * a[(0, 2)] + a[(1, 2)] * a[(1, 2)];
    let rho = rho2.sqrt();
    let (first, second) = if rho < SERIES_THRESHOLD {
        (
            1.0 - rho2 / 6.0 + rho2 * rho2 / 120.0,
            0.5 - rho2 / 24.0 + rho2 * rho2 / 720.0,
        )
    } else {
        (rho.sin() / rho, (1.0 - rho.cos()) / rho2)
    };
    Matrix3::identity() + a * first + a * a * second
}

/// Butcher data of a Crouch–Grossman method.
#[derive(Debug, Clone, Copy)]
pub struct CrouchGrossmanTableau {
    pub c: [f64; 3],
    pub a21: f64,
    pub a31: f64,
    pub a32: f64,
    pub b: [f64; 3],
}

/// The third-order, three-stage method of Crouch and Grossman.
pub const CG3: CrouchGrossmanTableau = CrouchGrossmanTableau {
    c: [0.0, 3.0 / 4.0, 17.0 / 24.0],
    a21: 3.0 / 4.0,
    a31: 119.0 / 216.0,
    a32: 17.0 / 108.0,
    b: [13.0 / 51.0, -2.0 / 3.0, 24.0 / 17.0],
};

/// One step of `Y′ = K(t, Y) Y` on SO(3), `K` skew-symmetric.
pub fn crouch_grossman_step<K>(
    tableau: &CrouchGrossmanTableau,
    generator: &K,
    t: f64,
    h: f64,
    y: &Matrix3<f64>,
) -> Matrix3<f64>
where
    K: Fn(f64, &Matrix3<f64>) -> Matrix3<f64>,
{
    let k1 = generator(t + tableau.c[0] * h, y);
    let e31 = rodrigues_unchecked(&(k1 * (h * tableau.a31)));
    let y2 = rodrigues_unchecked(&(k1 * (h * tableau.a21))) * y;
    let k2 = generator(t + tableau.c[1] * h, &y2);
    let y3 = rodrigues_unchecked(&(k2 * (h * tableau.a32))) * e31 * y;
    let k3 = generator(t + tableau.c[2] * h, &y3);
    rodrigues_unchecked(&(k3 * (h * tableau.b[2])))
        * rodrigues_unchecked(&(k2 * (h * tableau.b[1])))
        * rodrigues_unchecked(&(k1 * (h * tableau.b[0])))
        * y
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrajectory {
    /// `M + 1` frames at `t_i = i/M`; rows are `T`, `N₁`, `N₂`.
    pub frames: Vec<Matrix3<f64>>,
    pub step_size: f64,
}

impl FrameTrajectory {
    pub fn steps(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn tangent(&self, i: usize) -> Vector3<f64> {
        self.frames[i].row(0).transpose()
    }

    /// `max_i ‖F_i F_iᵀ − I‖_max`.
    pub fn max_orthogonality_error(&self) -> f64 {
        self.frames
            .iter()
            .map(|f| (f * f.transpose() - Matrix3::identity()).amax())
            .fold(0.0, f64::max)
    }

    pub fn max_determinant_error(&self) -> f64 {
        self.frames
            .iter()
            .map(|f| (f.determinant() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates the Bishop system for `steps` uniform steps on `[0, 1]`,
/// evaluating `φ` exactly at every stage time.
pub fn integrate_frame<C: PlaneCurve + ?Sized>(curve: &C, steps: usize) -> FrameTrajectory {
    assert!(steps >= 1, "at least one integration step is required");
    let h = 1.0 / steps as f64;
    let generator = |t: f64, _: &Matrix3<f64>| {
        let [p1, p2] = curve.value(t);
        skew_from_phi(p1, p2)
    };
    let mut frames = Vec::with_capacity(steps + 1);
    frames.push(Matrix3::identity());
    for i in 0..steps {
        let t = i as f64 * h;
        let next = crouch_grossman_step(&CG3, &generator, t, h, &frames[i]);
        frames.push(next);
    }
    FrameTrajectory {
        frames,
        step_size: h,
    }
}

/// `τ = (φ₂′φ₁ − φ₂φ₁′)/(φ₁² + φ₂²)`, undefined where `κ < kappa_floor`.
pub fn torsion(phi: [f64; 2], dphi: [f64; 2], kappa_floor: f64) -> Option<f64> {
    let k2 = phi[0] * phi[0] + phi[1] * phi[1];
    if k2 == 0.0 || k2 < kappa_floor * kappa_floor {
        return None;
    }
    Some((dphi[1] * phi[0] - phi[1] * dphi[0]) / k2)
}

/// Largest relative residual of `φ₁′² + φ₂′² = κ′² + τ²κ²` over the samples
/// with `κ >= kappa_floor`, where `κ′ = (φ·φ′)/κ`.
pub fn check_identity(phi: &[[f64; 2]], dphi: &[[f64; 2]], kappa_floor: f64) -> f64 {
    let mut worst = 0.0_f64;
    for (p, dp) in phi.iter().zip(dphi) {
        let Some(tau) = torsion(*p, *dp, kappa_floor) else {
            continue;
        };
        let kappa = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let dkappa = (p[0] * dp[0] + p[1] * dp[1]) / kappa;
        let lhs = dp[0] * dp[0] + dp[1] * dp[1];
        let rhs = dkappa * dkappa + tau * tau * kappa * kappa;
        let scale = lhs.max(rhs);
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}

/// Relative torsion floor: `κ_floor = DEFAULT_KAPPA_FLOOR · max κ`.
pub const DEFAULT_KAPPA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Filament {
    /// `M + 1` positions, starting at the origin.
    pub points: Vec<Vector3<f64>>,
    pub frames: FrameTrajectory,
    /// `κ(t_i)` for `i = 0..M`.
    pub curvature: Vec<f64>,
    /// `τ(t_i)`, `None` where `κ` is below [`Filament::kappa_floor`].
    pub torsion: Vec<Option<f64>>,
    pub kappa_floor: f64,
    /// Residual of the curvature–torsion identity over the grid.
    pub identity_residual: f64,
    pub source_norm: Option<f64>,
}

impl Filament {
    pub fn steps(&self) -> usize {
        self.curvature.len()
    }

    /// `Σ h ‖T(t_i)‖`; one for unit tangents.
    pub fn length(&self) -> f64 {
        let h = self.frames.step_size;
        (0..self.steps()).map(|i| h * self.frames.tangent(i).norm()).sum()
    }

    /// Uniform-grid quadrature of `∫ κ²`.
    pub fn total_square_curvature(&self) -> f64 {
        self.curvature.iter().map(|k| k * k).sum::<f64>() / self.steps() as f64
    }

    pub fn endpoint(&self) -> Vector3<f64> {
        *self.points.last().expect("filament has points")
    }
}

pub fn build_filament<C: PlaneCurve + ?Sized>(curve: &C, steps: usize) -> Filament {
    let frames = integrate_frame(curve, steps);
    let h = frames.step_size;

    let mut points = Vec::with_capacity(steps + 1);
    let mut pos = Vector3::zeros();
    points.push(pos);
    for i in 0..steps {
        pos += frames.tangent(i) * h;
        points.push(pos);
    }

    let phi: Vec<[f64; 2]> = (0..steps).map(|i| curve.value(i as f64 * h)).collect();
    let dphi: Vec<[f64; 2]> = (0..steps).map(|i| curve.derivative(i as f64 * h)).collect();
    let curvature: Vec<f64> = phi.iter().map(|p| p[0].hypot(p[1])).collect();
    let kappa_floor = DEFAULT_KAPPA_FLOOR * curvature.iter().copied().fold(0.0, f64::max);
    let torsion = phi
        .iter()
        .zip(&dphi)
        .map(|(p, dp)| torsion(*p, *dp, kappa_floor))
        .collect();
    let identity_residual = check_identity(&phi, &dphi, kappa_floor);

    Filament {
        points,
        frames,
        curvature,
        torsion,
        kappa_floor,
        identity_residual,
        source_norm: curve.source_norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{ConstantCurve, HelixCurve};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn skew_structure() {
        assert_eq!(skew_from_phi(0.0, 0.0), Matrix3::zeros());
        let a = skew_from_phi(3.0, 4.0);
        assert_eq!(a.transpose(), -a);
        let sv = a.singular_values();
        assert_abs_diff_eq!(sv.max(), 5.0, epsilon = 1e-14);
        let g = skew_from_phi(1.0, 0.0);
        assert_eq!(g[(0, 1)], 1.0);
        assert_eq!(g[(1, 0)], -1.0);
        assert_eq!(g.column(2).amax(), 0.0);
    }

    #[test]
    fn rodrigues_of_zero_is_identity() {
        assert_eq!(rodrigues_exp(&Matrix3::zeros()).unwrap(), Matrix3::identity());
    }

    #[test]
    fn rodrigues_rejects_non_skew() {
        let mut a = skew_from_phi(1.0, 2.0);
        a[(1, 1)] = 0.1;
        assert!(matches!(rodrigues_exp(&a), Err(Error::NotSkew(_))));
    }

    #[test]
    fn quarter_turn_fourth_power() {
        let r = rodrigues_exp(&skew_from_phi(FRAC_PI_2, 0.0)).unwrap();
        let r4 = r * r * r * r;
        assert!((r4 - Matrix3::identity()).amax() < 1e-12);
        // rows rotate: T -> N1 direction
        assert_abs_diff_eq!(r[(0, 1)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rodrigues_agrees_with_matrix_exponential() {
        for (p, q, r) in [(0.3, -1.2, 0.0), (2.0, 0.5, 1.5), (1e-7, 2e-7, -3e-8)] {
            let mut a = skew_from_phi(p, q);
            a[(1, 2)] = r;
            a[(2, 1)] = -r;
            let ours = rodrigues_exp(&a).unwrap();
            assert!((ours - a.exp()).amax() < 1e-14);
            assert!((ours * rodrigues_exp(&(-a)).unwrap() - Matrix3::identity()).amax() < 1e-12);
            assert!((ours * ours.transpose() - Matrix3::identity()).amax() < 1e-13);
            assert_abs_diff_eq!(ours.determinant(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn tableau_consistency() {
        let t = CG3;
        assert_abs_diff_eq!(t.b.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.a31 + t.a32, t.c[2], epsilon = 1e-15);
        assert_abs_diff_eq!(t.a21, t.c[1], epsilon = 1e-15);
    }

    #[test]
    fn zero_curve_gives_identity_frames_and_segment() {
        let f = build_filament(&ConstantCurve([0.0, 0.0]), 8);
        assert!(f.frames.frames.iter().all(|m| *m == Matrix3::identity()));
        for (i, p) in f.points.iter().enumerate() {
            assert_abs_diff_eq!(p.x, i as f64 / 8.0, epsilon = 1e-15);
            assert_eq!((p.y, p.z), (0.0, 0.0));
        }
        assert!(f.torsion.iter().all(Option::is_none));
        assert_eq!(f.identity_residual, 0.0);
    }

    #[test]
    fn constant_curvature_traces_circle() {
        let steps = 64;
        let f = build_filament(&ConstantCurve([TAU, 0.0]), steps);
        for (i, frame) in f.frames.frames.iter().enumerate() {
            let t = i as f64 / steps as f64;
            let tangent = frame.row(0);
            assert_abs_diff_eq!(tangent[0], (TAU * t).cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(tangent[1], (TAU * t).sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(tangent[2], 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(f.length(), 1.0, epsilon = 1e-12);
        assert!(f.endpoint().norm() < 1.0 / steps as f64);
        // the polyline stays on the analytic circle up to O(h)
        for (i, p) in f.points.iter().enumerate() {
            let t = i as f64 / steps as f64;
            let exact = Vector3::new((TAU * t).sin(), 1.0 - (TAU * t).cos(), 0.0) / TAU;
            assert!((p - exact).norm() < 4.0 / steps as f64);
        }
    }

    #[test]
    fn second_normal_circle() {
        let f = integrate_frame(&ConstantCurve([0.0, TAU]), 32);
        for (i, frame) in f.frames.iter().enumerate() {
            let t = i as f64 / 32.0;
            assert_abs_diff_eq!(frame[(0, 0)], (TAU * t).cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(frame[(0, 1)], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(frame[(0, 2)], (TAU * t).sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn torsion_examples() {
        assert_eq!(torsion([1.0, 0.0], [0.0, 1.0], 1e-3), Some(1.0));
        assert_eq!(torsion([1.0, 2.0], [3.0, 6.0], 1e-3), Some(0.0));
        assert_eq!(torsion([0.0, 0.0], [1.0, 1.0], 0.0), None);
        assert_eq!(torsion([1e-4, 0.0], [1.0, 1.0], 1e-3), None);
    }

    #[test]
    fn identity_on_single_harmonic() {
        let m = 32;
        let r2 = 2.0_f64.sqrt();
        let phi: Vec<[f64; 2]> = (0..m)
            .map(|i| {
                let t = i as f64 / m as f64;
                [r2 * (TAU * t).cos(), r2 * (TAU * t).sin()]
            })
            .collect();
        let dphi: Vec<[f64; 2]> = phi.iter().map(|p| [-TAU * p[1], TAU * p[0]]).collect();
        let lhs = dphi[3][0].powi(2) + dphi[3][1].powi(2);
        assert_abs_diff_eq!(lhs, 2.0 * TAU * TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(torsion(phi[3], dphi[3], 0.0).unwrap(), TAU, epsilon = 1e-12);
        assert!(check_identity(&phi, &dphi, 1e-3) < 1e-14);
        assert_eq!(check_identity(&[[1.0, 2.0]], &[[0.0, 0.0]], 1e-3), 0.0);
    }

    #[test]
    fn helix_frame_matches_analytic_solution() {
        let helix = HelixCurve {
            curvature: 5.0,
            twist: 7.0,
        };
        let steps = 512;
        let traj = integrate_frame(&helix, steps);
        let err = helix_frame_error(&helix, &traj);
        assert!(err < 1e-6, "error {err}");
    }

    /// Closed-form frame for the helix data: `F(t) = R(t) exp(t (A₀ − W))`.
    fn helix_exact(helix: &HelixCurve, t: f64) -> Matrix3<f64> {
        let (s, c) = (helix.twist * t).sin_cos();
        let r = Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
        let w = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -helix.twist, 0.0, helix.twist, 0.0);
        let a0 = skew_from_phi(helix.curvature, 0.0);
        r * ((a0 - w) * t).exp()
    }

    fn helix_frame_error(helix: &HelixCurve, traj: &FrameTrajectory) -> f64 {
        traj.frames
            .iter()
            .enumerate()
            .map(|(i, f)| (f - helix_exact(helix, i as f64 * traj.step_size)).amax())
            .fold(0.0, f64::max)
    }

    #[test]
    fn helix_third_order_convergence() {
        let helix = HelixCurve {
            curvature: 2.0 * TAU,
            twist: 3.0 * TAU,
        };
        let errs: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&m| helix_frame_error(&helix, &integrate_frame(&helix, m)))
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 2.7, "errors {errs:?}");
        }
    }

    #[test]
    fn negated_curve_reflects_tangent() {
        let helix = HelixCurve {
            curvature: 4.0,
            twist: 9.0,
        };
        struct Neg(HelixCurve);
        impl PlaneCurve for Neg {
            fn value(&self, t: f64) -> [f64; 2] {
                let [a, b] = self.0.value(t);
                [-a, -b]
            }
            fn derivative(&self, t: f64) -> [f64; 2] {
                let [a, b] = self.0.derivative(t);
                [-a, -b]
            }
        }
        let a = integrate_frame(&helix, 100);
        let b = integrate_frame(&Neg(helix), 100);
        let d = Vector3::new(1.0, -1.0, -1.0);
        for i in 0..=100 {
            let ta = a.tangent(i).component_mul(&d);
            assert!((ta - b.tangent(i)).amax() < 1e-9);
        }
    }
}
