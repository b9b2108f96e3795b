//! Property suites that certify the mathematical invariants of the library
//! on seeded random inputs. Used by the `validate` subcommand and the
//! acceptance tests; output is a deterministic function of the options.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::andrews::{
    build_map, evaluate_curve, gram_deviation, min_samples, mqv_closed_form, mqv_of_map,
    slice_epsilon, time_slice_singular_values, uniform_grid, AndrewsMap, PhasePolicy,
};
use crate::bishop::{build_filament, check_identity, integrate_frame, FrameTrajectory};
use crate::curve::{ConstantCurve, HelixCurve, PlaneCurve};
use crate::gauss::{gauss_sum, gauss_sum_reciprocal, perturb_singular_values, verify_bound};
use crate::ingest::Dataset;
use crate::spectral::svd;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const SLICE_DIMS: [usize; 3] = [25, 64, 128];
pub const GAUSS_DIMS: [usize; 4] = [1, 16, 256, 4096];
pub const GAUSS_THETA_SAMPLES: usize = 4096;
pub const SLICE_TIME_SAMPLES: usize = 10_000;
pub const CONVERGENCE_STEPS: [usize; 4] = [64, 128, 256, 512];
/// Error ratio per step doubling that an order ≥ 2.7 method must show.
pub const MIN_DOUBLING_RATIO: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Andrews,
    Bishop,
    Gauss,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub suite: Suite,
    /// Overrides the dimensions used by the time-slice and Gauss sum checks.
    pub d_list: Option<Vec<usize>>,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            d_list: None,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub outcomes: Vec<Outcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    pub fn find(&self, name: &str) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    fn push(&mut self, suite: &'static str, name: impl Into<String>, passed: bool, detail: String) {
        self.outcomes.push(Outcome {
            suite,
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn table(&self) -> String {
        let width = self
            .outcomes
            .iter()
            .map(|o| o.suite.len() + o.name.len() + 1)
            .max()
            .unwrap_or(0);
        let mut s = String::new();
        for o in &self.outcomes {
            let status = if o.passed { "PASS" } else { "FAIL" };
            let id = format!("{}/{}", o.suite, o.name);
            let _ = writeln!(s, "{status}  {id:<width$}  {}", o.detail);
        }
        let failed = self.failures().count();
        let _ = writeln!(
            s,
            "{} checks, {} passed, {} failed",
            self.outcomes.len(),
            self.outcomes.len() - failed,
            failed
        );
        s
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let qr = random_matrix(rng, d, d).qr();
    let (q, r) = qr.unpack();
    let signs = DVector::from_fn(d, |i, _| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 });
    q * DMatrix::from_diagonal(&signs)
}

pub fn random_unit2<R: Rng>(rng: &mut R) -> [f64; 2] {
    let a = rng.random::<f64>() * TAU;
    [a.cos(), a.sin()]
}

/// Complex tuple of length `n` rescaled to `Σ |z|² = 2`.
pub fn random_tuple<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let z: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    z.into_iter().map(|v| v * (SQRT_2 / norm)).collect()
}

fn random_map<R: Rng>(rng: &mut R, d: usize, phases: PhasePolicy) -> AndrewsMap {
    AndrewsMap::new(random_orthogonal(rng, d), phases)
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn run(options: &ValidateOptions) -> ValidationReport {
    let mut report = ValidationReport::default();
    if options.suite.includes(Suite::Andrews) {
        andrews_suite(options, &mut report);
    }
    if options.suite.includes(Suite::Gauss) {
        gauss_suite(options, &mut report);
    }
    if options.suite.includes(Suite::Bishop) {
        bishop_suite(options, &mut report);
    }
    report
}

/// Total QV of the map with harmonics `k` and `k+1` exchanged.
pub fn swapped_frequency_mqv(map: &AndrewsMap, ds: &Dataset, k: usize) -> crate::Result<f64> {
    let mut freqs: Vec<usize> = (1..=map.dim()).collect();
    freqs.swap(k - 1, k);
    let swapped = map.clone().with_frequencies(freqs)?;
    mqv_of_map(&swapped, ds)
}

pub struct OptimalityStats {
    pub worst_relative_error: f64,
    pub smallest_swap_margin: f64,
    pub datasets: usize,
}

/// Random datasets with `d ∈ 2..=16`, `N ∈ d..=100`: MQV of the built map
/// against the closed form, and the relative excess of the frequency-swap
/// competitor.
pub fn optimality_trials(seed: u64, trials: usize) -> OptimalityStats {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for _ in 0..trials {
        let d = rng.random_range(2..=16);
        let n = rng.random_range(d..=100);
        let ds = Dataset::from_matrix(random_matrix(&mut rng, d, n)).expect("finite data");
        let f = svd(&ds).expect("d <= N");
        let map = build_map(&f, PhasePolicy::Quadratic);
        let closed = mqv_closed_form(f.sigma.as_slice()).expect("sorted");
        let mqv = mqv_of_map(&map, &ds).expect("dims match");
        worst = worst.max(relative(mqv, closed));
        // swap the first pair of harmonics whose singular values differ
        let k = (1..d)
            .max_by(|&a, &b| {
                let ga = f.sigma[a - 1] - f.sigma[a];
                let gb = f.sigma[b - 1] - f.sigma[b];
                ga.total_cmp(&gb)
            })
            .expect("d >= 2");
        let swapped = swapped_frequency_mqv(&map, &ds, k).expect("valid swap");
        margin = margin.min((swapped - closed) / closed);
    }
    OptimalityStats {
        worst_relative_error: worst,
        smallest_swap_margin: margin,
        datasets: trials,
    }
}

/// Extreme scaled singular values over `samples` uniform times.
pub fn slice_extremes(map: &AndrewsMap, samples: usize) -> (f64, f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut trace_err: f64 = 0.0;
    for t in uniform_grid(samples) {
        let (a, b) = time_slice_singular_values(map, t);
        lo = lo.min(b);
        hi = hi.max(a);
        trace_err = trace_err.max((a * a + b * b - 2.0).abs());
    }
    (lo, hi, trace_err)
}

fn andrews_suite(options: &ValidateOptions, report: &mut ValidationReport) {
    const S: &str = "andrews";
    let mut rng = rng(options.seed);

    let stats = optimality_trials(rng.random(), 50);
    report.push(
        S,
        "mqv_optimality",
        stats.worst_relative_error <= 1e-9,
        format!(
            "{} datasets, max relative error {:.3e} (tol 1e-9)",
            stats.datasets, stats.worst_relative_error
        ),
    );
    report.push(
        S,
        "frequency_swap_is_worse",
        stats.smallest_swap_margin > 1e-9,
        format!("min relative excess {:.3e}", stats.smallest_swap_margin),
    );

    let mut worst_gram: f64 = 0.0;
    for d in 1..=64 {
        let map = random_map(&mut rng, d, PhasePolicy::Quadratic);
        worst_gram = worst_gram.max(gram_deviation(&map, min_samples(d)).expect("M = 4d+2"));
    }
    report.push(
        S,
        "gram_orthonormality",
        worst_gram < 1e-9,
        format!("d = 1..64, M = 4d+2, max deviation {worst_gram:.3e} (tol 1e-9)"),
    );

    let mut worst_iso: f64 = 0.0;
    let mut worst_dist: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=16);
        let map = random_map(&mut rng, d, PhasePolicy::Quadratic);
        let x = random_vector(&mut rng, d);
        let y = random_vector(&mut rng, d);
        let u = random_unit2(&mut rng);
        let m = min_samples(d);
        let cx = evaluate_curve(&map, &x, m).expect("M = 4d+2");
        let cy = evaluate_curve(&map, &y, m).expect("M = 4d+2");
        worst_iso = worst_iso.max(relative(cx.projected_l2_norm_squared(u), x.norm_squared()));
        let dist: f64 = cx
            .points
            .iter()
            .zip(&cy.points)
            .map(|(p, q)| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2))
            .sum::<f64>()
            / m as f64;
        worst_dist = worst_dist.max(relative(dist, 2.0 * (&x - &y).norm_squared()));
        let mean = cx.mean();
        worst_mean = worst_mean.max(mean[0].hypot(mean[1]) / x.norm());
    }
    report.push(
        S,
        "isotropic_isometry",
        worst_iso <= 1e-9,
        format!("100 random (x, u), max relative error {worst_iso:.3e} (tol 1e-9)"),
    );
    report.push(
        S,
        "distance_isometry",
        worst_dist <= 1e-9,
        format!("100 random pairs, max relative error {worst_dist:.3e} (tol 1e-9)"),
    );
    report.push(
        S,
        "zero_mean",
        worst_mean <= 1e-9,
        format!("max |mean| / |x| = {worst_mean:.3e} (tol 1e-9)"),
    );

    let mut worst_phase: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(2..=12);
        let n = rng.random_range(d..=60);
        let ds = Dataset::from_matrix(random_matrix(&mut rng, d, n)).expect("finite");
        let f = svd(&ds).expect("d <= N");
        let q = build_map(&f, PhasePolicy::Quadratic);
        let z = build_map(&f, PhasePolicy::None);
        let dq = relative(mqv_of_map(&q, &ds).unwrap(), mqv_of_map(&z, &ds).unwrap());
        let dg = (gram_deviation(&q, min_samples(d)).unwrap()
            - gram_deviation(&z, min_samples(d)).unwrap())
        .abs();
        worst_phase = worst_phase.max(dq).max(dg);
    }
    report.push(
        S,
        "phase_invariance",
        worst_phase <= 1e-12,
        format!("quadratic vs none, max difference {worst_phase:.3e} (tol 1e-12)"),
    );

    let dims = options.d_list.clone().unwrap_or_else(|| SLICE_DIMS.to_vec());
    for &d in &dims {
        let eps = slice_epsilon(d);
        let map = random_map(&mut rng, d, PhasePolicy::Quadratic);
        let (lo, hi, trace) = slice_extremes(&map, SLICE_TIME_SAMPLES);
        report.push(
            S,
            format!("slice_trace_d{d}"),
            trace <= 1e-12,
            format!("max |s_max² + s_min² − 2| = {trace:.3e} (tol 1e-12)"),
        );
        if eps >= 1.0 {
            report.push(
                S,
                format!("slice_interval_d{d}"),
                true,
                format!("skipped: ε({d}) = {eps:.4} ≥ 1, interval is vacuous"),
            );
            continue;
        }
        let (a, b) = ((1.0 - eps).sqrt(), (1.0 + eps).sqrt());
        report.push(
            S,
            format!("slice_interval_d{d}"),
            lo >= a && hi <= b,
            format!("singular values in [{lo:.4}, {hi:.4}] ⊂ [{a:.4}, {b:.4}], ε = {eps:.4}"),
        );
    }

    for d in [4usize, 8, 16] {
        let map = AndrewsMap::identity(d, PhasePolicy::None);
        let (lo, _, _) = slice_extremes(&map, SLICE_TIME_SAMPLES);
        report.push(
            S,
            format!("baseline_degenerate_d{d}"),
            lo < 0.05,
            format!("phases none: min s_min = {lo:.3e} (< 0.05)"),
        );
    }
    let map = AndrewsMap::identity(64, PhasePolicy::Quadratic);
    let (lo, _, _) = slice_extremes(&map, SLICE_TIME_SAMPLES);
    let floor = (1.0 - slice_epsilon(64)).sqrt();
    report.push(
        S,
        "quadratic_nondegenerate_d64",
        lo > floor,
        format!("quadratic phases: min s_min = {lo:.4} (> {floor:.4})"),
    );
}

fn gauss_suite(options: &ValidateOptions, report: &mut ValidationReport) {
    const S: &str = "gauss";
    let mut rng = rng(options.seed.wrapping_add(1));

    let dims = options.d_list.clone().unwrap_or_else(|| GAUSS_DIMS.to_vec());
    for &d in &dims {
        match verify_bound(d, GAUSS_THETA_SAMPLES) {
            Ok(r) => {
                report.push(
                    S,
                    format!("bound_d{d}"),
                    true,
                    format!(
                        "max |S| = {:.4}, bound {:.4}, max_ratio {:.4}",
                        r.max_magnitude, r.bound, r.max_ratio
                    ),
                );
                let root = (d as f64).sqrt();
                report.push(
                    S,
                    format!("max_at_least_sqrt_d{d}"),
                    r.max_magnitude >= root,
                    format!("max |S| = {:.4} ≥ √d = {root:.4}", r.max_magnitude),
                );
            }
            Err(e) => report.push(S, format!("bound_d{d}"), false, e.to_string()),
        }
    }

    // |1 + S_N(1/N, θ)| is even in θ
    let mut worst_reflect: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=300);
        let th = rng.random::<f64>() - 0.5;
        let a = (Complex64::new(1.0, 0.0) + gauss_sum(n, 1.0 / n as f64, th)).norm();
        let b = (Complex64::new(1.0, 0.0) + gauss_sum(n, 1.0 / n as f64, -th)).norm();
        worst_reflect = worst_reflect.max((a - b).abs());
    }
    report.push(
        S,
        "reflection_symmetry",
        worst_reflect <= 1e-11,
        format!("max ||1+S(θ)| − |1+S(−θ)|| = {worst_reflect:.3e} (tol 1e-11)"),
    );

    let worst = perturbation_trials(rng.random(), 1000);
    report.push(
        S,
        "perturbation_formula",
        worst <= 1e-10,
        format!("1000 tuples vs direct SVD, max error {worst:.3e} (tol 1e-10)"),
    );

    let (slice_err, sum_err) = reduction_trials(rng.random(), 200);
    report.push(
        S,
        "time_slice_reduction",
        slice_err <= 1e-10,
        format!("slice singular values vs perturbation formula, max error {slice_err:.3e} (tol 1e-10)"),
    );
    report.push(
        S,
        "phasor_square_sum",
        sum_err <= 1e-10,
        format!("Σ z_k(t)² vs S_d(1/d, 2t), max error {sum_err:.3e} (tol 1e-10)"),
    );
}

/// Max difference between the perturbation formula and a direct SVD of the
/// `2 × n` real/imaginary matrix over random tuples.
pub fn perturbation_trials(seed: u64, trials: usize) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.random_range(1..=24);
        let z = random_tuple(&mut rng, n);
        let (a, b) = perturb_singular_values(&z).expect("normalized");
        let m = DMatrix::from_fn(2, n.max(2), |r, c| match (r, z.get(c)) {
            (0, Some(v)) => v.re,
            (1, Some(v)) => v.im,
            _ => 0.0,
        });
        let sv = m.singular_values();
        let (hi, lo) = (sv.max(), sv.min());
        worst = worst.max((a - hi).abs()).max((b - lo).abs());
    }
    worst
}

/// Checks, on random quadratic-phase maps and times, that the time-slice
/// singular values come from the perturbation formula and that the squared
/// phasors sum to the Gauss sum at `θ = 2t`.
pub fn reduction_trials(seed: u64, trials: usize) -> (f64, f64) {
    let mut rng = rng(seed);
    let mut slice_err: f64 = 0.0;
    let mut sum_err: f64 = 0.0;
    for _ in 0..trials {
        let d = rng.random_range(1..=80);
        let t = rng.random::<f64>();
        let map = random_map(&mut rng, d, PhasePolicy::Quadratic);
        let z = map.column_phasors(t);
        let scale = (2.0 / d as f64).sqrt();
        let scaled: Vec<Complex64> = z.iter().map(|v| v * scale).collect();
        let (a, b) = perturb_singular_values(&scaled).expect("normalized");
        let (sa, sb) = time_slice_singular_values(&map, t);
        slice_err = slice_err.max((a - sa).abs()).max((b - sb).abs());
        let sq: Complex64 = z.iter().map(|v| v * v).sum();
        sum_err = sum_err.max((sq - gauss_sum_reciprocal(d, 2.0 * t)).norm());
    }
    (slice_err, sum_err)
}

/// Max tangent error of the integrated frame against an exact tangent.
pub fn tangent_error(traj: &FrameTrajectory, exact: impl Fn(f64) -> [f64; 3]) -> f64 {
    traj.frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let e = exact(i as f64 * traj.step_size);
            (0..3).map(|j| (f[(0, j)] - e[j]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

pub struct ConvergenceStudy {
    pub steps: Vec<usize>,
    pub errors: Vec<f64>,
    pub max_orthogonality_error: f64,
}

impl ConvergenceStudy {
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }

    pub fn orders(&self) -> Vec<f64> {
        self.ratios().iter().map(|r| r.log2()).collect()
    }

    pub fn passes(&self) -> bool {
        self.ratios().iter().all(|&r| r >= MIN_DOUBLING_RATIO)
    }
}

/// Constant `φ = (2π, 0)`: the tangent is `(cos 2πt, sin 2πt, 0)`.
pub fn circle_convergence() -> ConvergenceStudy {
    let curve = ConstantCurve([TAU, 0.0]);
    convergence(&curve, |t| [(TAU * t).cos(), (TAU * t).sin(), 0.0])
}

/// `φ = κ(cos ωt, sin ωt)` with `κ = 4π`, `ω = 6π`, compared with the
/// closed-form frame `R(t) exp(t(A₀ − W))`.
pub fn helix_convergence() -> ConvergenceStudy {
    let helix = HelixCurve {
        curvature: 2.0 * TAU,
        twist: 3.0 * TAU,
    };
    convergence(&helix, |t| helix_tangent(&helix, t))
}

fn helix_tangent(helix: &HelixCurve, t: f64) -> [f64; 3] {
    use nalgebra::Matrix3;
    let a0w = Matrix3::new(
        0.0,
        helix.curvature,
        0.0,
        -helix.curvature,
        0.0,
        helix.twist,
        0.0,
        -helix.twist,
        0.0,
    );
    // the first row of R(t) is e₁, so T(t) is the first row of exp(t(A₀ − W))
    let e = (a0w * t).exp();
    [e[(0, 0)], e[(0, 1)], e[(0, 2)]]
}

fn convergence<C: PlaneCurve>(curve: &C, exact: impl Fn(f64) -> [f64; 3]) -> ConvergenceStudy {
    let mut errors = Vec::new();
    let mut orth: f64 = 0.0;
    for &m in &CONVERGENCE_STEPS {
        let traj = integrate_frame(curve, m);
        orth = orth.max(traj.max_orthogonality_error());
        errors.push(tangent_error(&traj, &exact));
    }
    ConvergenceStudy {
        steps: CONVERGENCE_STEPS.to_vec(),
        errors,
        max_orthogonality_error: orth,
    }
}

fn fmt_list(v: &[f64], prec: usize) -> String {
    v.iter()
        .map(|x| format!("{x:.prec$e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn bishop_suite(options: &ValidateOptions, report: &mut ValidationReport) {
    const S: &str = "bishop";
    let mut rng = rng(options.seed.wrapping_add(2));

    let circle = circle_convergence();
    report.push(
        S,
        "circle_order",
        circle.passes(),
        format!(
            "M = 64..512 tangent errors [{}], ratios [{}] (need ≥ {MIN_DOUBLING_RATIO})",
            fmt_list(&circle.errors, 2),
            fmt_list(&circle.ratios(), 2)
        ),
    );
    report.push(
        S,
        "circle_exact",
        circle.errors.iter().all(|&e| e < 1e-12),
        format!("max tangent error {:.3e} (tol 1e-12)", circle.errors.iter().copied().fold(0.0, f64::max)),
    );
    let helix = helix_convergence();
    let orders = helix.orders();
    report.push(
        S,
        "helix_order",
        helix.passes(),
        format!(
            "tangent errors [{}], observed orders [{}] (need ≥ 2.7)",
            fmt_list(&helix.errors, 2),
            orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(", ")
        ),
    );

    let mut orth = circle.max_orthogonality_error.max(helix.max_orthogonality_error);
    let mut det: f64 = 0.0;
    let mut length: f64 = 0.0;
    let mut unit: f64 = 0.0;
    let mut kappa: f64 = 0.0;
    let mut curv: f64 = 0.0;
    let mut ident: f64 = 0.0;
    let mut equiv: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=16);
        let map = random_map(&mut rng, d, PhasePolicy::Quadratic);
        let x = random_vector(&mut rng, d);
        let steps = 256;
        let curve = map.curve(&x).expect("dims match");
        let f = build_filament(&curve, steps);
        orth = orth.max(f.frames.max_orthogonality_error());
        det = det.max(f.frames.max_determinant_error());
        length = length.max((f.length() - 1.0).abs());
        for i in 0..=steps {
            unit = unit.max((f.frames.tangent(i).norm() - 1.0).abs());
        }
        for (i, k) in f.curvature.iter().enumerate() {
            let [a, b] = curve.value(i as f64 / steps as f64);
            kappa = kappa.max((k - (a * a + b * b).sqrt()).abs());
        }
        curv = curv.max(relative(f.total_square_curvature(), 2.0 * x.norm_squared()));
        let floor = 1e-3;
        let grid = uniform_grid(steps);
        let phi: Vec<[f64; 2]> = grid.iter().map(|&t| curve.value(t)).collect();
        let dphi: Vec<[f64; 2]> = grid.iter().map(|&t| curve.derivative(t)).collect();
        ident = ident.max(check_identity(&phi, &dphi, floor));

        let neg = build_filament(&map.curve(&(-&x)).expect("dims match"), steps);
        for i in 0..=steps {
            let a = f.frames.tangent(i);
            let b = neg.frames.tangent(i);
            equiv = equiv
                .max((a[0] - b[0]).abs())
                .max((a[1] + b[1]).abs())
                .max((a[2] + b[2]).abs());
        }
    }
    report.push(
        S,
        "frame_orthogonality",
        orth < 1e-10 && det < 1e-10,
        format!("max |FFᵀ − I| = {orth:.3e}, max |det F − 1| = {det:.3e} (tol 1e-10)"),
    );
    report.push(
        S,
        "unit_length",
        length <= 1e-12 && unit <= 1e-12,
        format!("max |length − 1| = {length:.3e}, max ||T| − 1| = {unit:.3e} (tol 1e-12)"),
    );
    report.push(
        S,
        "curvature_definition",
        kappa <= 1e-12,
        format!("max |κ − |φ|| = {kappa:.3e} (tol 1e-12)"),
    );
    report.push(
        S,
        "total_square_curvature",
        curv <= 1e-6,
        format!("100 random points, max relative error vs 2|x|² {curv:.3e} (tol 1e-6)"),
    );
    report.push(
        S,
        "curvature_torsion_identity",
        ident < 1e-6,
        format!("max relative residual {ident:.3e} (tol 1e-6)"),
    );
    report.push(
        S,
        "negation_equivariance",
        equiv <= 1e-9,
        format!("max |T_neg − diag(1,−1,−1) T| = {equiv:.3e} (tol 1e-9)"),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_reports_counts() {
        let mut r = ValidationReport::default();
        r.push("s", "a", true, "ok".into());
        r.push("s", "b", false, "bad".into());
        let t = r.table();
        assert!(t.contains("PASS  s/a"));
        assert!(t.contains("FAIL  s/b"));
        assert!(t.ends_with("2 checks, 1 passed, 1 failed\n"));
        assert!(!r.all_passed());
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let q = random_orthogonal(&mut rng(3), 7);
        assert!((q.transpose() * &q - DMatrix::identity(7, 7)).amax() < 1e-12);
    }

    #[test]
    fn random_tuple_is_normalized() {
        let z = random_tuple(&mut rng(5), 9);
        let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn helix_converges_at_third_order() {
        let h = helix_convergence();
        assert!(h.orders().iter().all(|&p| p > 2.7), "{:?}", h.errors);
    }

    #[test]
    fn suites_are_deterministic() {
        let o = ValidateOptions {
            suite: Suite::Gauss,
            d_list: Some(vec![16]),
            seed: 9,
        };
        assert_eq!(run(&o).table(), run(&o).table());
    }
}
