use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::output::write_report_files;
use super::ExperimentConfig;
use crate::diagnostics::{delta_scan, ConstantCaseRecord, ScalingRecord, ScalingReport};
use crate::ensemble::{
    assemble_with_rank, build_perturbation, sample_matrix_stream, AssembledPair, PerturbationKind,
};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::measures::{angular_disk_distance, radial_disk_distance, EmpiricalMeasure2D};
use crate::spectral;
use crate::Complex64;

/// ChaCha stream for one `(n, replicate)` cell; distinct cells never share entries.
pub fn replicate_stream(n: usize, replicate: usize) -> u64 {
    ((n as u64) << 32) | replicate as u64
}

/// Samples `X` for `(n, replicate)` under the config's master seed and assembles it with `m`.
pub fn replicate_pair(
    config: &ExperimentConfig,
    n: usize,
    replicate: usize,
    m: &ComplexMatrix,
) -> Result<AssembledPair> {
    let x = sample_matrix_stream(
        config.distribution,
        n,
        config.master_seed,
        replicate_stream(n, replicate),
    )?;
    crate::ensemble::assemble(&x, m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskRow {
    pub n: usize,
    pub replicate: usize,
    pub radial_ks: Option<f64>,
    pub angular_ks: Option<f64>,
    /// Set when the perturbation has rank ≥ 1; that eigenvalue is left out of the distances.
    pub top_eigen_modulus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantCaseRow {
    pub replicate: usize,
    pub record: ConstantCaseRecord,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ConsistencySummary {
    pub grid_points: usize,
    pub flagged_points: usize,
    pub rank_violations: usize,
    pub ibp_violations: usize,
    pub cross_check_failures: usize,
}

impl ConsistencySummary {
    pub fn failures(&self) -> usize {
        self.rank_violations + self.ibp_violations + self.cross_check_failures
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub consistency: ConsistencySummary,
    pub scaling: ScalingReport,
    pub disk: Vec<DiskRow>,
    pub constant_case: Vec<ConstantCaseRow>,
    pub delta: Vec<ScalingRecord>,
    /// Kept out of `report.json` so reports stay byte-reproducible.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

struct ReplicateOutcome {
    deltas: Vec<ScalingRecord>,
    disk: DiskRow,
    constant: Option<ConstantCaseRow>,
}

fn run_replicate(
    config: &ExperimentConfig,
    n: usize,
    replicate: usize,
    m: &ComplexMatrix,
    rank: usize,
) -> Result<ReplicateOutcome> {
    let x = sample_matrix_stream(
        config.distribution,
        n,
        config.master_seed,
        replicate_stream(n, replicate),
    )?;
    let pair = assemble_with_rank(&x.entries, m, rank)?;
    let deltas = delta_scan(&pair, &config.z_grid)?
        .into_iter()
        .map(|diagnostics| ScalingRecord {
            n,
            replicate,
            diagnostics,
        })
        .collect();

    let eig = spectral::eigenvalues(&pair.b_matrix)?;
    let disk = disk_row(n, replicate, &eig, rank)?;

    let constant = match config.perturbation.kind {
        PerturbationKind::AllOnes { .. } if n >= 2 => Some(ConstantCaseRow {
            replicate,
            record: ConstantCaseRecord {
                n,
                lambda1: eig[0],
                lambda2: eig[1],
                s1_central: spectral::singular_values(&pair.a_matrix)?[0],
            },
        }),
        _ => None,
    };

    Ok(ReplicateOutcome {
        deltas,
        disk,
        constant,
    })
}

/// Disk distances of a spectrum sorted by decreasing modulus; with `rank ≥ 1` the leading
/// eigenvalue is reported on its own and left out of the distances.
pub fn disk_row(
    n: usize,
    replicate: usize,
    eigenvalues: &[Complex64],
    rank: usize,
) -> Result<DiskRow> {
    let (bulk, top) = match eigenvalues.split_first() {
        Some((first, rest)) if rank >= 1 => (rest, Some(first.norm())),
        _ => (eigenvalues, None),
    };
    let (radial_ks, angular_ks) = match EmpiricalMeasure2D::new(bulk.to_vec()) {
        Ok(esd) => (
            Some(radial_disk_distance(&esd)?),
            angular_disk_distance(&esd).ok(),
        ),
        Err(_) => (None, None),
    };
    Ok(DiskRow {
        n,
        replicate,
        radial_ks,
        angular_ks,
        top_eigen_modulus: top,
    })
}

fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".circlaw-write-probe");
    std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Runs every `(dim, replicate)` cell on the global rayon pool and writes the report files.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    run_experiment_with_workers(config, None)
}

/// Like [`run_experiment`] on a dedicated pool of `workers` threads.
pub fn run_experiment_with_workers(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<RunReport> {
    config.validate()?;
    ensure_writable(&config.output_dir)?;
    match workers {
        None => run_in_pool(config),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidValue(format!("thread pool: {e}")))?
            .install(|| run_in_pool(config)),
    }
}

fn run_in_pool(config: &ExperimentConfig) -> Result<RunReport> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |stage: &str, timings: &mut Vec<StageTiming>| {
        timings.push(StageTiming {
            stage: stage.into(),
            seconds: clock.elapsed().as_secs_f64(),
        });
        clock = Instant::now();
    };

    let perturbations: Vec<(ComplexMatrix, usize)> = config
        .dims
        .par_iter()
        .map(|&n| {
            let m = build_perturbation(&config.perturbation, n)?;
            let rank = spectral::numerical_rank(&m)?;
            Ok((m, rank))
        })
        .collect::<Result<_>>()?;
    lap("perturbations", &mut timings);

    let cells: Vec<(usize, usize)> = (0..config.dims.len())
        .flat_map(|d| (0..config.replicates).map(move |r| (d, r)))
        .collect();
    let outcomes: Vec<ReplicateOutcome> = cells
        .par_iter()
        .map(|&(d, r)| {
            let (m, rank) = &perturbations[d];
            run_replicate(config, config.dims[d], r, m, *rank)
        })
        .collect::<Result<_>>()?;
    lap("replicates", &mut timings);

    let mut delta = Vec::new();
    let mut disk = Vec::with_capacity(outcomes.len());
    let mut constant_case = Vec::new();
    for o in outcomes {
        delta.extend(o.deltas);
        disk.push(o.disk);
        constant_case.extend(o.constant);
    }
    let mut consistency = ConsistencySummary {
        grid_points: delta.len(),
        ..Default::default()
    };
    for rec in &delta {
        let d = &rec.diagnostics;
        consistency.flagged_points += d.singular_flag as usize;
        consistency.rank_violations += !d.rank_ok as usize;
        consistency.ibp_violations += !d.ibp_ok as usize;
        consistency.cross_check_failures += !d.cross_check_ok as usize;
    }
    let scaling = ScalingReport::aggregate(&config.dims, &delta, config.reference_exponent_b0);
    lap("aggregate", &mut timings);

    let mut report = RunReport {
        config: config.clone(),
        consistency,
        scaling,
        disk,
        constant_case,
        delta,
        timings,
    };
    write_report_files(&report, &config.output_dir)?;
    let write_start = Instant::now();
    report.timings.push(StageTiming {
        stage: "write".into(),
        seconds: write_start.elapsed().as_secs_f64(),
    });
    let timings_path = config.output_dir.join("timings.json");
    let timings_json = serde_json::to_string_pretty(&report.timings).expect("timings serialize");
    std::fs::write(&timings_path, timings_json).map_err(|e| Error::io(&timings_path, e))?;
    Ok(report)
}
