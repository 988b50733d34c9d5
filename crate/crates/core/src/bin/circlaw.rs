use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use circlaw::diagnostics::{constant_case, delta_scan, ScalingRecord, ZGrid};
use circlaw::ensemble::{
    assemble, build_perturbation, sample_matrix, write_matrix_csv, EntryDistribution,
    PerturbationSpec,
};
use circlaw::harness::{
    disk_row, max_dimension, parse_config, run_experiment_with_workers, write_delta_csv,
    write_disk_csv, ExperimentConfig, MAX_N_ENV,
};
use circlaw::lemmas::verify_lemmas;
use circlaw::{spectral, Error, Result};

#[derive(Parser)]
#[command(
    name = "circlaw",
    version,
    about = "Non-central circular law simulations and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample X_n and write it as a j,k,re,im CSV.
    Sample(Common),
    /// Eigenvalues, singular values and log|det| of B_n = (X_n + M_n)/√n.
    Spectrum(Common),
    /// Δ_{n,z} and its bounds over a z-grid.
    DeltaScan(Common),
    /// Radial and angular distances of the spectrum of B_n to the uniform disk law.
    CircularLaw(Common),
    /// Outlier, bulk edge and central operator norm for the all-ones perturbation.
    ConstantCase(Common),
    /// Randomized checks of the exact inequalities.
    VerifyLemmas {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment config and write report.json, delta.csv, disk.csv, scaling.csv.
    Run {
        #[command(flatten)]
        common: Common,
        /// Size of the worker pool (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config supplying defaults for the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dimension (defaults to the largest configured dim, else 100).
    #[arg(long)]
    n: Option<usize>,
    /// Entry law, e.g. complex-gaussian, rademacher, centered-bernoulli(0.3).
    #[arg(long)]
    dist: Option<EntryDistribution>,
    /// Perturbation: zero, all-ones or all-ones:<scale> (default all-ones).
    #[arg(long)]
    perturbation: Option<PerturbationArg>,
    /// Output directory for machine-readable files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Step of the default z-grid on [-2.5, 2.5]² (delta-scan only).
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Clone)]
struct PerturbationArg(PerturbationSpec);

impl FromStr for PerturbationArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let spec = match s.split_once(':') {
            None if s == "zero" => PerturbationSpec::zero(),
            None if s == "all-ones" => PerturbationSpec::all_ones(1.0),
            Some(("all-ones", scale)) => {
                let scale: f64 = scale
                    .parse()
                    .map_err(|_| format!("bad all-ones scale {scale:?}"))?;
                PerturbationSpec::all_ones(scale)
            }
            _ => {
                return Err(format!(
                    "unknown perturbation {s:?} (zero, all-ones, all-ones:<scale>)"
                ))
            }
        };
        Ok(PerturbationArg(spec))
    }
}

struct Settings {
    n: usize,
    seed: u64,
    dist: EntryDistribution,
    perturbation: PerturbationSpec,
    grid: ZGrid,
    out: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Validation(vec![format!("cannot read config {}: {e}", path.display())])
    })?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            what: path.display().to_string(),
            message,
        },
        other => other,
    })
}

impl Common {
    fn resolve(&self) -> Result<Settings> {
        let config = self.config.as_deref().map(load_config).transpose()?;
        let n = self
            .n
            .or_else(|| config.as_ref().and_then(|c| c.dims.last().copied()))
            .unwrap_or(100);
        let cap = max_dimension()?;
        let mut errs = Vec::new();
        if n == 0 {
            errs.push("--n must be positive".to_string());
        }
        if n > cap {
            errs.push(format!(
                "n = {n} exceeds the cap {cap} (set {MAX_N_ENV} to raise it)"
            ));
        }
        let perturbation = match (&self.perturbation, &config) {
            (Some(p), _) => p.0.clone(),
            (None, Some(c)) => c.perturbation.clone(),
            (None, None) => PerturbationSpec::all_ones(1.0),
        };
        errs.extend(perturbation.validation_errors());
        let grid = match (self.step, &config) {
            (Some(step), _) => ZGrid {
                step,
                ..ZGrid::default()
            },
            (None, Some(c)) => c.z_grid.clone(),
            (None, None) => ZGrid::default(),
        };
        errs.extend(grid.validation_errors());
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Settings {
            n,
            seed: self
                .seed
                .or(config.as_ref().map(|c| c.master_seed))
                .unwrap_or(0),
            dist: self
                .dist
                .or(config.as_ref().map(|c| c.distribution))
                .unwrap_or(EntryDistribution::ComplexGaussian),
            perturbation,
            grid,
            out: self.out.clone().or(config.map(|c| c.output_dir)),
        })
    }
}

fn out_file(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_err(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn cmd_sample(s: &Settings) -> Result<u8> {
    let x = sample_matrix(s.dist, s.n, s.seed)?;
    let entries: Vec<circlaw::Complex64> = x.entries.entries().collect();
    let count = entries.len() as f64;
    let mean = entries.iter().sum::<circlaw::Complex64>() / count;
    let second = entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / count;
    println!("sample: n = {}, dist = {}, seed = {}", s.n, s.dist, s.seed);
    println!("  entry mean          {:.6} {:+.6}i", mean.re, mean.im);
    println!("  mean |x|^2          {second:.6}");
    if let Some(dir) = &s.out {
        let (path, mut w) = out_file(dir, "sample.csv")?;
        write_matrix_csv(&x.entries, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_err(&path, e))?;
        println!("  wrote {}", path.display());
    }
    Ok(0)
}

fn cmd_spectrum(s: &Settings) -> Result<u8> {
    let x = sample_matrix(s.dist, s.n, s.seed)?;
    let m = build_perturbation(&s.perturbation, s.n)?;
    let pair = assemble(&x, &m)?;
    let summary = spectral::summarize(&pair.b_matrix)?;
    println!(
        "spectrum of B_n: n = {}, dist = {}, perturbation = {}, seed = {}",
        s.n,
        s.dist,
        s.perturbation.kind_name(),
        s.seed
    );
    println!("  spectral radius     {:.6}", summary.spectral_radius);
    println!("  operator norm       {:.6}", summary.operator_norm);
    println!(
        "  smallest s.v.       {:.6e}",
        summary.singular_values.last().copied().unwrap_or(0.0)
    );
    println!("  ||B||_HS^2          {:.6}", summary.hs_norm_sq);
    match summary.log_abs_det {
        Some(v) => println!("  log|det B|          {v:.6}"),
        None => println!("  log|det B|          -inf (numerically singular)"),
    }
    if let Some(dir) = &s.out {
        let (path, mut w) = out_file(dir, "eigenvalues.csv")?;
        let mut body = String::from("re,im\n");
        for z in &summary.eigenvalues {
            body.push_str(&format!("{},{}\n", z.re, z.im));
        }
        w.write_all(body.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| io_err(&path, e))?;
        let (path, mut w) = out_file(dir, "singular_values.csv")?;
        let mut body = String::from("s\n");
        for v in &summary.singular_values {
            body.push_str(&format!("{v}\n"));
        }
        w.write_all(body.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| io_err(&path, e))?;
        println!(
            "  wrote eigenvalues.csv, singular_values.csv to {}",
            dir.display()
        );
    }
    Ok(0)
}

fn cmd_delta_scan(s: &Settings) -> Result<u8> {
    let x = sample_matrix(s.dist, s.n, s.seed)?;
    let m = build_perturbation(&s.perturbation, s.n)?;
    let pair = assemble(&x, &m)?;
    let rows = delta_scan(&pair, &s.grid)?;
    let flagged = rows.iter().filter(|d| d.singular_flag).count();
    let rank_bad = rows.iter().filter(|d| !d.rank_ok).count();
    let ibp_bad = rows.iter().filter(|d| !d.ibp_ok).count();
    let cross_bad = rows.iter().filter(|d| !d.cross_check_ok).count();
    let max_abs = rows
        .iter()
        .filter_map(|d| d.delta)
        .map(f64::abs)
        .fold(0.0, f64::max);
    let max_ks = rows.iter().map(|d| d.ks).fold(0.0, f64::max);
    println!(
        "delta-scan: n = {}, dist = {}, perturbation = {}, seed = {}, {} grid points",
        s.n,
        s.dist,
        s.perturbation.kind_name(),
        s.seed,
        rows.len()
    );
    println!("  max |delta|         {max_abs:.6e}");
    println!("  max ks              {max_ks:.6}");
    println!("  singular points     {flagged}");
    println!("  rank violations     {rank_bad}");
    println!("  ibp violations      {ibp_bad}");
    println!("  cross-check fails   {cross_bad}");
    if let Some(dir) = &s.out {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let records: Vec<ScalingRecord> = rows
            .into_iter()
            .map(|diagnostics| ScalingRecord {
                n: s.n,
                replicate: 0,
                diagnostics,
            })
            .collect();
        write_delta_csv(&dir.join("delta.csv"), &records)?;
        println!("  wrote {}", dir.join("delta.csv").display());
    }
    Ok(if rank_bad + ibp_bad + cross_bad > 0 {
        2
    } else {
        0
    })
}

fn cmd_circular_law(s: &Settings) -> Result<u8> {
    let x = sample_matrix(s.dist, s.n, s.seed)?;
    let m = build_perturbation(&s.perturbation, s.n)?;
    let pair = assemble(&x, &m)?;
    let eig = spectral::eigenvalues(&pair.b_matrix)?;
    let row = disk_row(s.n, 0, &eig, pair.perturbation_rank)?;
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
    println!(
        "circular-law: n = {}, dist = {}, perturbation = {} (rank {}), seed = {}",
        s.n,
        s.dist,
        s.perturbation.kind_name(),
        pair.perturbation_rank,
        s.seed
    );
    println!("  radial distance     {}", show(row.radial_ks));
    println!("  angular distance    {}", show(row.angular_ks));
    if let Some(top) = row.top_eigen_modulus {
        println!("  top |lambda|        {top:.6} (excluded)");
    }
    if let Some(dir) = &s.out {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        write_disk_csv(&dir.join("disk.csv"), &[row])?;
        println!("  wrote {}", dir.join("disk.csv").display());
    }
    Ok(0)
}

fn cmd_constant_case(s: &Settings) -> Result<u8> {
    let rec = constant_case(s.n, s.dist, s.seed)?;
    println!(
        "constant-case: n = {}, dist = {}, seed = {}",
        s.n, s.dist, s.seed
    );
    println!(
        "  lambda1             {:.6} {:+.6}i",
        rec.lambda1.re, rec.lambda1.im
    );
    println!(
        "  lambda2             {:.6} {:+.6}i",
        rec.lambda2.re, rec.lambda2.im
    );
    println!("  |lambda1 - sqrt(n)| {:.6}", rec.outlier_offset());
    println!("  |lambda2|           {:.6}", rec.lambda2.norm());
    println!("  s1_central          {:.6}", rec.s1_central);
    if let Some(dir) = &s.out {
        let (path, mut w) = out_file(dir, "constant_case.json")?;
        let json = serde_json::to_string_pretty(&rec).expect("record serializes");
        w.write_all(json.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| io_err(&path, e))?;
    }
    Ok(0)
}

fn cmd_verify_lemmas(trials: usize, seed: u64) -> Result<u8> {
    if trials == 0 {
        return Err(Error::Validation(vec!["--trials must be positive".into()]));
    }
    let r = verify_lemmas(trials, seed)?;
    println!("verify-lemmas: {} trials, seed = {seed}", r.trials);
    println!(
        "  weyl                {} violations (min relative slack {:.3e})",
        r.weyl_violations, r.weyl_min_relative_slack
    );
    println!(
        "  ibp identity        {} violations (max relative error {:.3e})",
        r.ibp_identity_violations, r.ibp_max_relative_error
    );
    println!(
        "  ibp bound           {} violations",
        r.ibp_bound_violations
    );
    println!(
        "  rank inequality     {} violations (max excess {:.3e})",
        r.rank_violations, r.rank_max_excess
    );
    println!(
        "  kolmogorov oracle   {} mismatches",
        r.ks_oracle_mismatches
    );
    println!("  total               {} violations", r.violations());
    Ok(if r.violations() == 0 { 0 } else { 2 })
}

fn cmd_run(common: &Common, workers: Option<usize>) -> Result<u8> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| Error::Validation(vec!["run needs --config <path>".into()]))?;
    let mut config = load_config(path)?;
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    if let Some(n) = common.n {
        config.dims = vec![n];
    }
    if let Some(dist) = common.dist {
        config.distribution = dist;
    }
    if let Some(p) = &common.perturbation {
        config.perturbation = p.0.clone();
    }
    if let Some(step) = common.step {
        config.z_grid.step = step;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    if workers == Some(0) {
        return Err(Error::Validation(vec!["--workers must be positive".into()]));
    }
    let report = run_experiment_with_workers(&config, workers)?;
    let c = &report.consistency;
    println!(
        "run {:?}: dims {:?}, {} replicates, dist = {}, perturbation = {}",
        config.name,
        config.dims,
        config.replicates,
        config.distribution,
        config.perturbation.kind_name()
    );
    println!("  grid points         {}", c.grid_points);
    println!("  singular points     {}", c.flagged_points);
    println!("  rank violations     {}", c.rank_violations);
    println!("  ibp violations      {}", c.ibp_violations);
    println!("  cross-check fails   {}", c.cross_check_failures);
    println!("  {:>6} {:>18} {:>12}", "n", "median |delta|", "median ks");
    for d in &report.scaling.per_dim {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4e}"));
        println!(
            "  {:>6} {:>18} {:>12}",
            d.n,
            show(d.median_abs_delta),
            show(d.median_ks)
        );
    }
    if let Some(fit) = &report.scaling.fit {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        println!(
            "  fitted exponents    a = {}, b = {}, eps = {}",
            show(fit.a_hat),
            show(fit.b_hat),
            show(fit.eps_hat)
        );
    }
    for t in &report.timings {
        println!("  time {:<14} {:.3}s", t.stage, t.seconds);
    }
    println!("  wrote reports to {}", config.output_dir.display());
    Ok(if c.failures() > 0 { 2 } else { 0 })
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sample(c) => cmd_sample(&c.resolve()?),
        Command::Spectrum(c) => cmd_spectrum(&c.resolve()?),
        Command::DeltaScan(c) => cmd_delta_scan(&c.resolve()?),
        Command::CircularLaw(c) => cmd_circular_law(&c.resolve()?),
        Command::ConstantCase(c) => cmd_constant_case(&c.resolve()?),
        Command::VerifyLemmas { trials, seed } => cmd_verify_lemmas(trials, seed),
        Command::Run { common, workers } => cmd_run(&common, workers),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
