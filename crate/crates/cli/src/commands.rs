//! Subcommand implementations. Results go to stdout and files; diagnostics
//! go to stderr.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use scatternet::analysis::{
    bragg_parallel_ep, detect_atr, find_exceptional_points, find_spectral_singularities, sweep,
    sweep_matrices, with_threads, EpMode, ScanOptions, SingularityKind, SweepGrid, SweepRecord,
};
use scatternet::cells::{bragg_matrix, ABRingSpec, BraggParams, PhysicalConstants};
use scatternet::network::parallel_identical;
use scatternet::{compose, presets, selfcheck, transfer_to_scattering, Error, TransferMatrix};

use crate::config::{parse_config, AnalysisConfig, ConfigError, FinderConfig, RunConfig};
use crate::output::{
    fmt_complex, fmt_f64, write_json_file, write_sweep_csv_file, AtrReportJson, ExceptionalPointsJson,
    SingularitiesJson,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(Vec<ConfigError>),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(errs) => {
                writeln!(f, "invalid configuration ({} error(s)):", errs.len())?;
                for e in errs {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.root_cause() {
            Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let cfg = parse_config(&text).map_err(CliError::Config)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn output_dir(cfg: &RunConfig, out: &Option<PathBuf>) -> PathBuf {
    out.clone().unwrap_or_else(|| cfg.output.directory.clone())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_json_file(path, value).map_err(|e| io_err(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn threaded<R: Send>(threads: usize, f: impl FnOnce() -> CliResult<R> + Send) -> CliResult<R> {
    with_threads(threads, f).map_err(|e| CliError::Usage(e.to_string()))?
}

fn print_matrix(m: &TransferMatrix) {
    println!("M11 = {}", fmt_complex(m.m11()));
    println!("M12 = {}", fmt_complex(m.m12()));
    println!("M21 = {}", fmt_complex(m.m21()));
    println!("M22 = {}", fmt_complex(m.m22()));
    println!("det = {}", fmt_complex(m.det()));
}

/// Prints the amplitudes; fails on a spectral singularity.
fn print_amplitudes(m: &TransferMatrix) -> CliResult<f64> {
    let s = transfer_to_scattering(m)?;
    println!("t = {}", fmt_complex(s.t));
    println!("r_left = {}", fmt_complex(s.r_left));
    println!("r_right = {}", fmt_complex(s.r_right));
    println!("T = {}", fmt_f64(s.transmittance));
    println!("R_left = {}", fmt_f64(s.reflectance_left));
    println!("R_right = {}", fmt_f64(s.reflectance_right));
    Ok(s.transmittance)
}

fn report_failed_points(records: &[SweepRecord]) -> CliResult<()> {
    let failed = records.iter().filter(|r| r.flags.issue.is_some()).count();
    let fallbacks: usize = records.iter().map(|r| r.flags.fallbacks).sum();
    if fallbacks > 0 {
        eprintln!("note: {fallbacks} parallel bundle(s) were solved by the dense fallback");
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {} sweep point(s) failed; see the flags column", records.len());
    }
    if failed == records.len() {
        return Err(CliError::Numerical("every sweep point failed".into()));
    }
    Ok(())
}

pub fn compose_cmd(config: &Path, omega: Option<f64>, threads: usize) -> CliResult<()> {
    let cfg = load_config(config)?;
    let omega = match (omega, cfg.bindings.first()) {
        (Some(w), _) => w,
        (None, None) => 0.0,
        (None, Some(path)) => {
            return Err(CliError::Usage(format!(
                "the network uses \"{}\" at {path}; pass --omega",
                cfg.parameter
            )))
        }
    };
    let composed = threaded(threads, || Ok(compose(&cfg.build(omega)?)?))?;
    if composed.fallbacks > 0 {
        eprintln!("note: {} parallel bundle(s) were solved by the dense fallback", composed.fallbacks);
    }
    println!("{} = {}", cfg.parameter, fmt_f64(omega));
    print_matrix(&composed.matrix);
    print_amplitudes(&composed.matrix)?;
    Ok(())
}

fn require_sweep(cfg: &RunConfig) -> CliResult<(f64, f64, usize)> {
    cfg.sweep
        .as_ref()
        .map(|s| (s.lo, s.hi, s.steps))
        .ok_or_else(|| CliError::Usage("the configuration has no sweep block".into()))
}

fn run_sweep(cfg: &RunConfig, grid: &SweepGrid) -> CliResult<Vec<SweepRecord>> {
    let family = |w: f64| cfg.build(w);
    Ok(sweep(&family, grid)?)
}

fn matrix_family(cfg: &RunConfig) -> impl Fn(f64) -> scatternet::Result<TransferMatrix> + Sync + '_ {
    move |w: f64| compose(&cfg.build(w)?).map(|c| c.matrix)
}

/// Overrides from the command line for the finders.
#[derive(Clone, Copy, Debug, Default)]
pub struct FinderOverrides {
    pub tol: Option<f64>,
    pub scan_points: Option<usize>,
}

fn scan_options(f: &FinderConfig, over: FinderOverrides, near_miss: f64) -> ScanOptions {
    let tol = over.tol.unwrap_or(f.tol);
    ScanOptions {
        scan_points: over.scan_points.unwrap_or(f.scan_points),
        tol,
        near_miss: near_miss.max(tol),
    }
}

fn run_singularities(
    cfg: &RunConfig,
    kind: Option<SingularityKind>,
    finder: &FinderConfig,
    near_miss: f64,
    over: FinderOverrides,
    path: &Path,
) -> CliResult<()> {
    let (lo, hi, _) = require_sweep(cfg)?;
    let range = finder.range.unwrap_or((lo, hi));
    let opts = scan_options(finder, over, near_miss);
    let family = matrix_family(cfg);
    let kinds = match kind {
        Some(k) => vec![k],
        None => vec![SingularityKind::Lasing, SingularityKind::Cpa],
    };
    let mut report = SingularitiesJson { range: [range.0, range.1], tol: opts.tol, ..Default::default() };
    for k in kinds {
        let scan = find_spectral_singularities(&family, range, k, &opts)?;
        for r in &scan.reports {
            println!("{} at {} = {} (residual {})", k.name(), cfg.parameter, fmt_f64(r.omega_c), fmt_f64(r.residual));
        }
        for r in &scan.near_misses {
            eprintln!(
                "warning: near miss ({}) at {} = {} with residual {}",
                k.name(),
                cfg.parameter,
                fmt_f64(r.omega_c),
                fmt_f64(r.residual)
            );
        }
        report.extend(&scan);
    }
    println!("{} spectral singularit(ies) found", report.singularities.len());
    write_json(path, &report)
}

fn run_exceptional_points(
    cfg: &RunConfig,
    mode: EpMode,
    finder: &FinderConfig,
    over: FinderOverrides,
    path: &Path,
) -> CliResult<()> {
    let (lo, hi, _) = require_sweep(cfg)?;
    let range = finder.range.unwrap_or((lo, hi));
    let opts = scan_options(finder, over, 1e-3);
    let family = matrix_family(cfg);
    let scan = find_exceptional_points(&family, range, mode, &opts)?;
    for r in &scan.reports {
        println!(
            "EP ({} branch) at {} = {} (residual {}, {})",
            r.branch_sign.symbol(),
            cfg.parameter,
            fmt_f64(r.omega),
            fmt_f64(r.condition_residual),
            r.crossing.name()
        );
    }
    if !scan.skipped.is_empty() {
        eprintln!("note: condition undefined at {} scan point(s)", scan.skipped.len());
    }
    println!("{} exceptional point(s) found", scan.reports.len());
    write_json(path, &ExceptionalPointsJson::new(range, opts.tol, &scan))
}

fn run_atr(records: &[SweepRecord], tol: f64, path: &Path) -> CliResult<()> {
    let scan = detect_atr(records, tol);
    println!(
        "{} anisotropic transmission resonance point(s), {} bidirectionally transparent point(s)",
        scan.resonances.len(),
        scan.bidirectional.len()
    );
    write_json(path, &AtrReportJson::new(tol, &scan))
}

fn grid_for(cfg: &RunConfig, steps: Option<usize>) -> CliResult<SweepGrid> {
    let (lo, hi, default_steps) = require_sweep(cfg)?;
    SweepGrid::new(lo, hi, steps.unwrap_or(default_steps)).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn sweep_cmd(
    config: &Path,
    out: &Option<PathBuf>,
    steps: Option<usize>,
    tol: Option<f64>,
    threads: usize,
) -> CliResult<()> {
    let cfg = load_config(config)?;
    let grid = grid_for(&cfg, steps)?;
    let dir = output_dir(&cfg, out);
    prepare_dir(&dir)?;
    let base = cfg.output.basename.clone();
    threaded(threads, || {
        let records = run_sweep(&cfg, &grid)?;
        let csv_path = dir.join(format!("{base}.csv"));
        write_sweep_csv_file(&csv_path, &records).map_err(|e| io_err(&csv_path, e))?;
        println!("wrote {} ({} rows)", csv_path.display(), records.len());
        report_failed_points(&records)?;
        let over = FinderOverrides { tol, scan_points: None };
        for a in &cfg.analyses {
            let path = dir.join(format!("{base}_{}.json", a.name()));
            match a {
                AnalysisConfig::Singularities { kind, finder, near_miss } => {
                    run_singularities(&cfg, *kind, finder, *near_miss, over, &path)?
                }
                AnalysisConfig::ExceptionalPoints { mode, finder } => {
                    run_exceptional_points(&cfg, *mode, finder, over, &path)?
                }
                AnalysisConfig::Atr { tol: atr_tol } => run_atr(&records, tol.unwrap_or(*atr_tol), &path)?,
            }
        }
        Ok(())
    })
}

pub fn singularities_cmd(
    config: &Path,
    out: &Option<PathBuf>,
    kind: Option<SingularityKind>,
    over: FinderOverrides,
    threads: usize,
) -> CliResult<()> {
    let cfg = load_config(config)?;
    let (cfg_kind, finder, near_miss) = cfg
        .analyses
        .iter()
        .find_map(|a| match a {
            AnalysisConfig::Singularities { kind, finder, near_miss } => Some((*kind, finder.clone(), *near_miss)),
            _ => None,
        })
        .unwrap_or((None, FinderConfig { tol: 1e-9, scan_points: 2001, range: None }, 1e-3));
    let dir = output_dir(&cfg, out);
    prepare_dir(&dir)?;
    let path = dir.join(format!("{}_singularities.json", cfg.output.basename));
    threaded(threads, || run_singularities(&cfg, kind.or(cfg_kind), &finder, near_miss, over, &path))
}

pub fn exceptional_points_cmd(
    config: &Path,
    out: &Option<PathBuf>,
    mode: Option<EpMode>,
    over: FinderOverrides,
    threads: usize,
) -> CliResult<()> {
    let cfg = load_config(config)?;
    let (cfg_mode, finder) = cfg
        .analyses
        .iter()
        .find_map(|a| match a {
            AnalysisConfig::ExceptionalPoints { mode, finder } => Some((*mode, finder.clone())),
            _ => None,
        })
        .unwrap_or((EpMode::Single, FinderConfig { tol: 1e-9, scan_points: 2001, range: None }));
    let dir = output_dir(&cfg, out);
    prepare_dir(&dir)?;
    let path = dir.join(format!("{}_exceptional_points.json", cfg.output.basename));
    threaded(threads, || run_exceptional_points(&cfg, mode.unwrap_or(cfg_mode), &finder, over, &path))
}

pub fn atr_cmd(
    config: &Path,
    out: &Option<PathBuf>,
    steps: Option<usize>,
    tol: Option<f64>,
    threads: usize,
) -> CliResult<()> {
    let cfg = load_config(config)?;
    let atr_tol = cfg
        .analyses
        .iter()
        .find_map(|a| match a {
            AnalysisConfig::Atr { tol } => Some(*tol),
            _ => None,
        })
        .unwrap_or(scatternet::analysis::DEFAULT_ATR_TOL);
    let grid = grid_for(&cfg, steps)?;
    let dir = output_dir(&cfg, out);
    prepare_dir(&dir)?;
    let path = dir.join(format!("{}_atr.json", cfg.output.basename));
    threaded(threads, || {
        let records = run_sweep(&cfg, &grid)?;
        report_failed_points(&records)?;
        run_atr(&records, tol.unwrap_or(atr_tol), &path)
    })
}

#[derive(Clone, Copy, Debug)]
pub struct AbRingArgs {
    pub k: f64,
    pub length: f64,
    pub flux_phase: f64,
    pub arm1: Option<f64>,
    pub steps: usize,
}

pub fn ab_ring_cmd(args: AbRingArgs, out: &Option<PathBuf>, threads: usize) -> CliResult<()> {
    let consts = PhysicalConstants::default();
    let arm1 = args.arm1.unwrap_or(args.length / 2.0);
    let ring = move |psi: f64| {
        let flux = -psi * consts.hbar * consts.c_light / consts.e_charge;
        presets::ab_ring(&ABRingSpec::new(args.k, flux, arm1, args.length - arm1)?, &consts)
    };
    threaded(threads, || {
        let composed = compose(&ring(args.flux_phase)?)?;
        println!("k = {}, L = {}, L1 = {}, psi = {}", fmt_f64(args.k), fmt_f64(args.length), fmt_f64(arm1), fmt_f64(args.flux_phase));
        print_matrix(&composed.matrix);
        print_amplitudes(&composed.matrix)?;
        if args.steps >= 2 {
            let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
            prepare_dir(&dir)?;
            let grid = SweepGrid::new(-std::f64::consts::PI, std::f64::consts::PI, args.steps)?;
            let records = sweep(&ring, &grid)?;
            report_failed_points(&records)?;
            let path = dir.join("ab_ring.csv");
            write_sweep_csv_file(&path, &records).map_err(|e| io_err(&path, e))?;
            println!("wrote {} ({} rows over the flux phase)", path.display(), records.len());
        }
        Ok(())
    })
}

#[derive(Clone, Copy, Debug)]
pub struct BraggArgs {
    pub params: BraggParams,
    pub k: f64,
    pub parallel: usize,
    pub steps: usize,
    pub span: f64,
    pub tol: f64,
}

pub fn bragg_cmd(args: BraggArgs, out: &Option<PathBuf>, threads: usize) -> CliResult<()> {
    if args.parallel == 0 {
        return Err(CliError::Usage("--parallel must be at least 1".into()));
    }
    let family = move |k: f64| -> scatternet::Result<TransferMatrix> {
        let cell = bragg_matrix(&args.params, k)?;
        if args.parallel == 1 {
            Ok(cell)
        } else {
            parallel_identical(&cell, args.parallel)
        }
    };
    threaded(threads, || {
        let m = family(args.k)?;
        println!("k = {}, detuning = {}, N = {}", fmt_f64(args.k), fmt_f64(args.params.detuning(args.k)), args.parallel);
        print_matrix(&m);
        print_amplitudes(&m)?;
        let single = scatternet::analysis::SweepRecord::from_matrix(args.k, Ok(m));
        let atr = detect_atr(std::slice::from_ref(&single), args.tol);
        match atr.resonances.first() {
            Some(a) => println!("unidirectional invisibility: reflectionless from the {}", a.direction.name()),
            None if !atr.bidirectional.is_empty() => println!("transparent from both sides"),
            None => println!("no anisotropic transmission resonance at tolerance {}", fmt_f64(args.tol)),
        }
        if args.parallel >= 2 {
            let p = &args.params;
            let n2 = bragg_parallel_ep(p.n0, p.n1, p.detuning(args.k), args.k, args.parallel)?;
            let tuned = parallel_identical(&bragg_matrix(&BraggParams { n2, ..*p }, args.k)?, args.parallel)?;
            println!("n2 giving M21 = 0 for N = {}: {}", args.parallel, fmt_f64(n2));
            println!("|M21| at that n2 = {}", fmt_f64(tuned.m21().norm()));
        }
        if args.steps >= 2 {
            let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
            prepare_dir(&dir)?;
            let grid = SweepGrid::new(args.k - args.span, args.k + args.span, args.steps)?;
            let records = sweep_matrices(&family, &grid)?;
            report_failed_points(&records)?;
            let path = dir.join("bragg.csv");
            write_sweep_csv_file(&path, &records).map_err(|e| io_err(&path, e))?;
            println!("wrote {} ({} rows over k)", path.display(), records.len());
            run_atr(&records, args.tol, &dir.join("bragg_atr.json"))?;
        }
        Ok(())
    })
}

pub fn selftest_cmd(seed: u64, threads: usize) -> CliResult<()> {
    let outcomes = threaded(threads, || Ok(selfcheck::run_all(seed)))?;
    println!("{:<28} {:>7} {:>9} {:>14} {:>10}  status", "suite", "checks", "failures", "worst err/tol", "fallbacks");
    for o in &outcomes {
        println!(
            "{:<28} {:>7} {:>9} {:>14.3e} {:>10}  {}",
            o.name,
            o.checks,
            o.failures,
            o.worst,
            o.fallbacks,
            if o.passed() { "PASS" } else { "FAIL" }
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} self-test suite(s) failed (seed {seed})")));
    }
    println!("all {} suites passed (seed {seed})", outcomes.len());
    Ok(())
}
