//! End-to-end runs: standardize, decompose, build the map, then produce
//! plane curves or filaments together with a self-checking report.

use rayon::prelude::*;

use crate::andrews::{
    build_map, evaluate_curve, gram_deviation, min_samples, mqv_closed_form, mqv_of_map,
    slice_epsilon, time_slice_extremes, AndrewsMap, PhasePolicy, PlaneCurveSamples,
};
use crate::bishop::{build_filament, Filament};
use crate::error::Result;
use crate::export::{
    Check, DatasetSummary, FilamentDiagnostics, FilamentSummary, GaussSummary, MapSummary,
    Metrics, RunConfig, RunReport, ToolInfo, REPORT_SCHEMA_VERSION,
};
use crate::gauss::verify_bound;
use crate::ingest::{standardize_with_convention, ConstantRowPolicy, Dataset, StandardizePolicy, StdConvention};
use crate::spectral::{svd, SvdFactors};

pub mod tolerance {
    pub const MQV_RELATIVE: f64 = 1e-9;
    pub const GRAM: f64 = 1e-9;
    pub const LENGTH: f64 = 1e-12;
    pub const SQUARE_CURVATURE_RELATIVE: f64 = 1e-6;
    pub const IDENTITY_RESIDUAL: f64 = 1e-6;
    pub const FRAME_ORTHOGONALITY: f64 = 1e-10;
}

pub const GAUSS_THETA_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct PrepareOptions {
    pub standardize: StandardizePolicy,
    pub convention: StdConvention,
    pub constant_rows: ConstantRowPolicy,
    pub phases: PhasePolicy,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self {
            standardize: StandardizePolicy::Zscore,
            convention: StdConvention::Population,
            constant_rows: ConstantRowPolicy::Zero,
            phases: PhasePolicy::Quadratic,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    pub factors: SvdFactors,
    pub map: AndrewsMap,
}

pub fn prepare(raw: &Dataset, options: &PrepareOptions) -> Result<Prepared> {
    let dataset = standardize_with_convention(
        raw,
        options.standardize,
        options.constant_rows,
        options.convention,
    )?;
    let factors = svd(&dataset)?;
    let map = build_map(&factors, options.phases);
    Ok(Prepared {
        dataset,
        factors,
        map,
    })
}

/// One sampled plane curve per data point, in data order.
pub fn andrews_curves(prepared: &Prepared, samples: usize) -> Result<Vec<PlaneCurveSamples>> {
    (0..prepared.dataset.n())
        .into_par_iter()
        .map(|n| evaluate_curve(&prepared.map, &prepared.dataset.point(n), samples))
        .collect()
}

/// One filament per data point, in data order.
pub fn filaments(prepared: &Prepared, steps: usize) -> Result<Vec<Filament>> {
    (0..prepared.dataset.n())
        .into_par_iter()
        .map(|n| {
            let curve = prepared.map.curve(&prepared.dataset.point(n))?;
            Ok(build_filament(&curve, steps))
        })
        .collect()
}

fn relative_error(value: f64, expected: f64) -> f64 {
    let diff = (value - expected).abs();
    if expected == 0.0 {
        diff
    } else {
        diff / expected.abs()
    }
}

pub fn build_report(
    config: RunConfig,
    generated_at: String,
    prepared: &Prepared,
    slice_samples: usize,
    filaments: Option<&[Filament]>,
) -> Result<RunReport> {
    let d = prepared.dataset.d();
    let map = &prepared.map;
    let sigma = prepared.factors.sigma.as_slice();
    let epsilon = slice_epsilon(d);
    let mut checks = Vec::new();

    let mqv = mqv_of_map(map, &prepared.dataset)?;
    let closed = mqv_closed_form(sigma)?;
    let mqv_relative_error = relative_error(mqv, closed);
    checks.push(Check::at_most("mqv_optimality", mqv_relative_error, tolerance::MQV_RELATIVE));

    let gram_samples = min_samples(d);
    let gram = gram_deviation(map, gram_samples)?;
    checks.push(Check::at_most("gram_deviation", gram, tolerance::GRAM));

    let (slice_min, slice_max) = time_slice_extremes(map, slice_samples);
    if map.phase_policy() == PhasePolicy::Quadratic && epsilon < 1.0 {
        let lo = (1.0 - epsilon).sqrt();
        let hi = (1.0 + epsilon).sqrt();
        checks.push(Check::at_most(
            "slice_interval",
            (lo - slice_min).max(slice_max - hi).max(0.0),
            0.0,
        ));
    }

    let g = verify_bound(d, GAUSS_THETA_SAMPLES)?;
    checks.push(Check::at_most("gauss_bound_ratio", g.max_ratio, 1.0));

    let filament_summary = filaments.map(|fils| {
        let labels = prepared.dataset.labels.as_deref();
        let per_filament: Vec<FilamentDiagnostics> = fils
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let norm = f.source_norm.unwrap_or(0.0);
                FilamentDiagnostics {
                    index: i,
                    label: labels.map(|l| l[i].clone()),
                    length: f.length(),
                    total_square_curvature: f.total_square_curvature(),
                    expected_square_curvature: 2.0 * norm * norm,
                    identity_residual: f.identity_residual,
                    max_orthogonality_error: f.frames.max_orthogonality_error(),
                }
            })
            .collect();
        let max_of = |g: &dyn Fn(&FilamentDiagnostics) -> f64| {
            per_filament.iter().map(g).fold(0.0, f64::max)
        };
        FilamentSummary {
            count: fils.len(),
            steps: fils.first().map_or(0, Filament::steps),
            max_length_error: max_of(&|f| (f.length - 1.0).abs()),
            max_curvature_relative_error: max_of(&|f| {
                relative_error(f.total_square_curvature, f.expected_square_curvature)
            }),
            max_identity_residual: max_of(&|f| f.identity_residual),
            per_filament,
        }
    });
    if let Some(s) = &filament_summary {
        checks.push(Check::at_most("filament_length", s.max_length_error, tolerance::LENGTH));
        checks.push(Check::at_most(
            "total_square_curvature",
            s.max_curvature_relative_error,
            tolerance::SQUARE_CURVATURE_RELATIVE,
        ));
        checks.push(Check::at_most(
            "curvature_torsion_identity",
            s.max_identity_residual,
            tolerance::IDENTITY_RESIDUAL,
        ));
        let orth = s
            .per_filament
            .iter()
            .map(|f| f.max_orthogonality_error)
            .fold(0.0, f64::max);
        checks.push(Check::at_most("frame_orthogonality", orth, tolerance::FRAME_ORTHOGONALITY));
    }

    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: ToolInfo::default(),
        generated_at,
        config,
        dataset: DatasetSummary::of(&prepared.dataset),
        map: MapSummary {
            phase_policy: map.phase_policy(),
            epsilon,
            epsilon_informative: epsilon < 1.0,
            singular_values: sigma.to_vec(),
            tie_partition: prepared.factors.tie_partition.clone(),
        },
        metrics: Metrics {
            mqv,
            mqv_closed_form: closed,
            mqv_relative_error,
            gram_samples,
            gram_deviation: gram,
            slice_samples,
            slice_singular_min: slice_min,
            slice_singular_max: slice_max,
            gauss: GaussSummary {
                d,
                theta_samples: GAUSS_THETA_SAMPLES,
                max_magnitude: g.max_magnitude,
                bound: g.bound,
                max_ratio: g.max_ratio,
            },
        },
        filaments: filament_summary,
        checks,
    })
}
