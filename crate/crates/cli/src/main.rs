//! `timebin` — configuration-driven front end for the time-bin
//! interferometer toolkit.
//!
//! Exit codes: 0 success, 2 configuration error, 3 verification
//! failure, 1 other runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use timebin_cli::config::{
    load_section, parse_grid_flag, CorrelateConfig, CorrelationsConfig, ExtractConfig, GridSpec,
    LandscapeConfig, ModelKey, RangesConfig, SimulateConfig, TagFormat, TreeKey, VerifyConfig,
};
use timebin_cli::formats;
use timebin_cli::manifest::write_manifest;

use timebin_core::analytic::{accessible_ranges, correlation_triple, landscape};
use timebin_core::extraction::{self, mean_photon_implausible};
use timebin_core::interferometer::{HomConfig, MziConfig};
use timebin_core::oracle::{verify_analytic, VerifyGrid, VerifyOutcome};
use timebin_core::sampler::{
    cross_correlation_trees, extended_hbt_trees, hbt_trees, sample_stream, DetectorModel,
    RunConfig, SourceConfig,
};
use timebin_core::seed::SeedSpec;

const PI: f64 = std::f64::consts::PI;

#[derive(Parser)]
#[command(
    name = "timebin",
    version,
    about = "Discrete time-bin model of photon-number engineering in a path-unbalanced interferometer"
)]
struct Cli {
    /// TOML configuration file, or a run manifest (JSON) to reproduce.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (overrides TIMEBIN_THREADS; default all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Photon-number probability landscape over (theta, phi).
    Landscape(LandscapeArgs),
    /// Closed-form correlation curves g2_ee/g2_ff/g2_ef.
    Correlations(CorrelationsArgs),
    /// Monte Carlo time-tag stream generation.
    Simulate(SimulateArgs),
    /// Coincidence histograms (and normalization) from tag files.
    Correlate(CorrelateArgs),
    /// Photon-number probabilities from measured rate and g2(0).
    Extract(ExtractArgs),
    /// Brute-force oracle vs closed forms; nonzero exit on mismatch.
    Verify(VerifyArgs),
    /// Accessible probability ranges of both geometries.
    Ranges(RangesArgs),
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long, value_enum)]
    model: Option<ModelKey>,
    /// Pulse areas in units of pi: comma list or min:max:steps.
    #[arg(long, value_parser = parse_grid_flag)]
    theta_pi: Option<GridSpec>,
    /// Phases in units of pi: comma list or min:max:steps.
    #[arg(long, value_parser = parse_grid_flag)]
    phi_pi: Option<GridSpec>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelationsArgs {
    #[arg(long, value_parser = parse_grid_flag)]
    theta_pi: Option<GridSpec>,
    #[arg(long, value_parser = parse_grid_flag)]
    phi_pi: Option<GridSpec>,
    /// Bin offsets, comma separated.
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<i32>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: Option<ModelKey>,
    #[arg(long)]
    theta_pi: Option<f64>,
    #[arg(long)]
    phi_pi: Option<f64>,
    #[arg(long)]
    purity: Option<f64>,
    #[arg(long)]
    n_bins: Option<u32>,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long)]
    chains: Option<u32>,
    #[arg(long)]
    efficiency: Option<f64>,
    #[arg(long)]
    dark_count_prob: Option<f64>,
    /// Photon-number-resolving detectors instead of click detectors.
    #[arg(long)]
    pnr: bool,
    #[arg(long, value_enum)]
    tree: Option<TreeKey>,
    #[arg(long, value_enum)]
    format: Option<TagFormat>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Tag files, merged as independent experiments.
    #[arg(value_name = "TAGS", num_args = 0..)]
    input: Vec<PathBuf>,
    #[arg(long)]
    order: Option<u8>,
    /// Detector ids: two for order 2, three for order 3.
    #[arg(long, value_delimiter = ',')]
    detectors: Option<Vec<u32>>,
    #[arg(long)]
    max_delta: Option<i64>,
    #[arg(long)]
    normalize: Option<bool>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    counts_per_second: Option<f64>,
    #[arg(long)]
    repetition_period_s: Option<f64>,
    #[arg(long)]
    total_efficiency: Option<f64>,
    #[arg(long)]
    g2_zero: Option<f64>,
    #[arg(long)]
    g3_zero: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_grid_flag)]
    theta_pi: Option<GridSpec>,
    #[arg(long, value_parser = parse_grid_flag)]
    phi_pi: Option<GridSpec>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<i32>>,
    #[arg(long)]
    purity: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RangesArgs {
    /// Restrict to one model (default: both).
    #[arg(long, value_enum)]
    model: Option<ModelKey>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum CliError {
    Config(anyhow::Error),
    Verification(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Config(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    let result = match &cli.command {
        Command::Landscape(args) => cmd_landscape(&cli, args),
        Command::Correlations(args) => cmd_correlations(&cli, args),
        Command::Simulate(args) => cmd_simulate(&cli, args),
        Command::Correlate(args) => cmd_correlate(&cli, args),
        Command::Extract(args) => cmd_extract(&cli, args),
        Command::Verify(args) => cmd_verify(&cli, args),
        Command::Ranges(args) => cmd_ranges(&cli, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("TIMEBIN_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn section<T>(cli: &Cli, name: &str) -> Result<T, CliError>
where
    T: serde::de::DeserializeOwned + Default,
{
    match &cli.config {
        Some(path) => Ok(load_section::<T>(path, name)
            .map_err(config_err)?
            .unwrap_or_default()),
        None => Ok(T::default()),
    }
}

// ---------------------------------------------------------------------
// landscape
// ---------------------------------------------------------------------

fn cmd_landscape(cli: &Cli, args: &LandscapeArgs) -> Result<(), CliError> {
    let mut cfg: LandscapeConfig = section(cli, "landscape")?;
    if let Some(m) = args.model {
        cfg.model = m;
    }
    if let Some(g) = &args.theta_pi {
        cfg.theta_pi_units = g.clone();
    }
    if let Some(g) = &args.phi_pi {
        cfg.phase_pi_units = g.clone();
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    let thetas = cfg.theta_pi_units.points().map_err(config_err)?;
    let phis = cfg.phase_pi_units.points().map_err(config_err)?;
    let theta_rad: Vec<f64> = thetas.iter().map(|t| t * PI).collect();
    let phi_rad: Vec<f64> = phis.iter().map(|p| p * PI).collect();
    let points = landscape(&theta_rad, &phi_rad, cfg.model.to_model()).map_err(config_err)?;
    let rows: Vec<formats::LandscapeRow> = points
        .iter()
        .enumerate()
        .map(|(k, p)| formats::LandscapeRow {
            theta_pi: thetas[k / phis.len()],
            phi_pi: phis[k % phis.len()],
            p0: p.p0,
            p1: p.p1,
            p2: p.p2,
            model: cfg.model.as_str(),
        })
        .collect();
    formats::write_landscape(&cfg.output, &rows).context("writing landscape CSV")?;
    write_manifest("landscape", &cfg, None, &[cfg.output.clone()])?;
    Ok(())
}

// ---------------------------------------------------------------------
// correlations
// ---------------------------------------------------------------------

fn cmd_correlations(cli: &Cli, args: &CorrelationsArgs) -> Result<(), CliError> {
    let mut cfg: CorrelationsConfig = section(cli, "correlations")?;
    if let Some(g) = &args.theta_pi {
        cfg.theta_pi_units = g.clone();
    }
    if let Some(g) = &args.phi_pi {
        cfg.phase_pi_units = g.clone();
    }
    if let Some(d) = &args.deltas {
        cfg.deltas = d.clone();
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    let thetas = cfg.theta_pi_units.points().map_err(config_err)?;
    let phis = cfg.phase_pi_units.points().map_err(config_err)?;
    if thetas.iter().any(|&t| t <= 0.0) {
        return Err(config_err(anyhow!(
            "correlations are undefined at zero pulse area; remove theta_pi <= 0 from the grid"
        )));
    }
    if cfg.deltas.is_empty() {
        return Err(config_err(anyhow!("deltas list is empty")));
    }
    let mut rows = Vec::new();
    for &t in &thetas {
        for &p in &phis {
            for &delta in &cfg.deltas {
                let triple = correlation_triple(t * PI, p * PI, delta).map_err(config_err)?;
                rows.push(formats::CorrelationRow {
                    theta_pi: t,
                    phi_pi: p,
                    delta,
                    g2_ee: triple[0].value,
                    g2_ff: triple[1].value,
                    g2_ef: triple[2].value,
                });
            }
        }
    }
    formats::write_correlations(&cfg.output, &rows).context("writing correlations CSV")?;
    write_manifest("correlations", &cfg, None, &[cfg.output.clone()])?;
    Ok(())
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg: SimulateConfig = section(cli, "simulate")?;
    if let Some(m) = args.model {
        cfg.model = m;
    }
    if let Some(v) = args.theta_pi {
        cfg.theta_pi_units = v;
    }
    if let Some(v) = args.phi_pi {
        cfg.phase_pi_units = v;
    }
    if let Some(v) = args.purity {
        cfg.purity = v;
    }
    if let Some(v) = args.n_bins {
        cfg.n_bins = v;
    }
    if let Some(v) = args.rng_seed {
        cfg.rng_seed = v;
    }
    if let Some(v) = args.chains {
        cfg.chains = v;
    }
    if let Some(v) = args.efficiency {
        cfg.efficiency = v;
    }
    if let Some(v) = args.dark_count_prob {
        cfg.dark_count_prob = v;
    }
    if args.pnr {
        cfg.photon_number_resolving = true;
    }
    if let Some(v) = args.tree {
        cfg.tree = v;
    }
    if let Some(v) = args.format {
        cfg.format = v;
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    if cfg.chains == 0 {
        return Err(config_err(anyhow!("chains must be >= 1")));
    }

    let seed_spec = SeedSpec {
        theta: cfg.theta_pi_units * PI,
        purity: cfg.purity,
        indistinguishability: cfg.indistinguishability,
        inversion_ceiling: cfg.inversion_ceiling,
        damping: cfg.damping,
    };
    seed_spec.validate().map_err(config_err)?;
    let source = match cfg.model {
        ModelKey::SingleMzi => {
            let mzi = MziConfig::new(cfg.phase_pi_units * PI)
                .with_reflectivities(cfg.r1, cfg.r2)
                .map_err(config_err)?
                .with_repetition_period(cfg.repetition_period_s)
                .map_err(config_err)?;
            SourceConfig::SingleMzi(mzi)
        }
        ModelKey::DualHom => {
            let hom = HomConfig::new(cfg.phase_pi_units * PI)
                .with_reflectivity(cfg.r1)
                .map_err(config_err)?;
            SourceConfig::DualHom(hom)
        }
    };
    let det = DetectorModel {
        efficiency: cfg.efficiency,
        dark_count_prob: cfg.dark_count_prob,
        photon_number_resolving: cfg.photon_number_resolving,
    };
    det.validate().map_err(config_err)?;
    let (e_tree, f_tree) = match cfg.tree {
        TreeKey::None => cross_correlation_trees(),
        TreeKey::Hbt => hbt_trees(),
        TreeKey::ExtendedHbt => extended_hbt_trees(),
    };
    let run_template = RunConfig {
        n_bins: cfg.n_bins,
        warmup_bins: cfg.warmup_bins,
        rng_seed: cfg.rng_seed,
    };
    run_template.validate().map_err(config_err)?;

    // Independent chains with seed + k; never interleaved.
    let streams: Vec<(PathBuf, Vec<timebin_core::sampler::TimeTagRecord>)> = (0..cfg.chains)
        .into_par_iter()
        .map(|k| {
            let run = RunConfig { rng_seed: cfg.rng_seed + k as u64, ..run_template };
            let tags = sample_stream(&run, &seed_spec, &source, &det, &e_tree, &f_tree)
                .map_err(|e| anyhow!("chain {k}: {e}"))?;
            Ok((cfg.chain_path(k), tags))
        })
        .collect::<Result<_>>()?;
    let mut outputs = Vec::new();
    for (path, tags) in &streams {
        match cfg.format {
            TagFormat::Text => formats::write_tags_text(path, tags)?,
            TagFormat::Binary => formats::write_tags_binary(path, tags)?,
        }
        outputs.push(path.clone());
    }
    write_manifest("simulate", &cfg, Some(cfg.rng_seed), &outputs)?;
    Ok(())
}

// ---------------------------------------------------------------------
// correlate
// ---------------------------------------------------------------------

fn cmd_correlate(cli: &Cli, args: &CorrelateArgs) -> Result<(), CliError> {
    let mut cfg: CorrelateConfig = section(cli, "correlate")?;
    if !args.input.is_empty() {
        cfg.input = args.input.clone();
    }
    if let Some(v) = args.order {
        cfg.order = v;
    }
    if let Some(v) = &args.detectors {
        cfg.detectors = v.clone();
    }
    if let Some(v) = args.max_delta {
        cfg.max_delta = v;
    }
    if let Some(v) = args.normalize {
        cfg.normalize = v;
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    if cfg.input.is_empty() {
        return Err(config_err(anyhow!("no tag files given (positional or `input` key)")));
    }
    // The default window reaches to 20; clip it to the histogram range.
    let window = (cfg.baseline_min, cfg.baseline_max.min(cfg.max_delta));
    match cfg.order {
        2 => {
            if cfg.detectors.len() != 2 {
                return Err(config_err(anyhow!(
                    "order-2 correlation needs exactly 2 detector ids, got {:?}",
                    cfg.detectors
                )));
            }
            let mut merged: Option<timebin_core::correlator::CoincidenceHistogram> = None;
            for path in &cfg.input {
                let tags = formats::read_tags(path)?;
                let hist = timebin_core::correlator::g2_histogram(
                    &tags,
                    cfg.detectors[0],
                    cfg.detectors[1],
                    cfg.max_delta,
                )
                .map_err(|e| config_err(anyhow!("{}: {e}", path.display())))?;
                match &mut merged {
                    None => merged = Some(hist),
                    Some(m) => m.merge(&hist).map_err(config_err)?,
                }
            }
            let hist = merged.expect("at least one input");
            let baseline = if cfg.normalize {
                let norm = timebin_core::correlator::normalize_side_peaks(&hist, window)
                    .map_err(config_err)?;
                Some(norm.baseline)
            } else {
                None
            };
            formats::write_g2_histogram(&cfg.output, &hist, baseline)?;
        }
        3 => {
            if cfg.detectors.len() != 3 {
                return Err(config_err(anyhow!(
                    "order-3 correlation needs exactly 3 detector ids, got {:?}",
                    cfg.detectors
                )));
            }
            let mut merged: Option<timebin_core::correlator::TripleHistogram> = None;
            for path in &cfg.input {
                let tags = formats::read_tags(path)?;
                let hist = timebin_core::correlator::g3_histogram(
                    &tags,
                    cfg.detectors[0],
                    cfg.detectors[1],
                    cfg.detectors[2],
                    cfg.max_delta,
                )
                .map_err(|e| config_err(anyhow!("{}: {e}", path.display())))?;
                match &mut merged {
                    None => merged = Some(hist),
                    Some(m) => m.merge(&hist).map_err(config_err)?,
                }
            }
            let hist = merged.expect("at least one input");
            let baseline = if cfg.normalize {
                let norm = timebin_core::correlator::normalize_triple(&hist, window)
                    .map_err(config_err)?;
                Some(norm.baseline)
            } else {
                None
            };
            formats::write_g3_histogram(&cfg.output, &hist, baseline)?;
        }
        other => {
            return Err(config_err(anyhow!("unsupported correlation order {other} (2 or 3)")));
        }
    }
    write_manifest("correlate", &cfg, None, &[cfg.output.clone()])?;
    Ok(())
}

// ---------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------

fn cmd_extract(cli: &Cli, args: &ExtractArgs) -> Result<(), CliError> {
    let mut cfg: ExtractConfig = section(cli, "extract")?;
    if let Some(v) = args.counts_per_second {
        cfg.counts_per_second = v;
    }
    if let Some(v) = args.repetition_period_s {
        cfg.repetition_period_s = v;
    }
    if let Some(v) = args.total_efficiency {
        cfg.total_efficiency = v;
    }
    if let Some(v) = args.g2_zero {
        cfg.g2_zero = v;
    }
    if let Some(v) = args.g3_zero {
        cfg.g3_zero = Some(v);
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    let input = extraction::ExtractionInput {
        counts_per_second: cfg.counts_per_second,
        repetition_period: cfg.repetition_period_s,
        total_efficiency: cfg.total_efficiency,
        g2_zero: cfg.g2_zero,
        g3_zero: cfg.g3_zero,
    };
    input.validate().map_err(config_err)?;
    let n = extraction::mean_photon(
        cfg.counts_per_second,
        cfg.repetition_period_s,
        cfg.total_efficiency,
    )
    .map_err(config_err)?;
    if mean_photon_implausible(n) {
        eprintln!(
            "warning: mean photon number {n:.3} per pulse exceeds the model cutoff; the rate, period, or efficiency is likely misstated"
        );
    }
    let probs = extraction::extract(&input).map_err(config_err)?;
    formats::write_extraction(&cfg.output, &probs)?;
    write_manifest("extract", &cfg, None, &[cfg.output.clone()])?;
    Ok(())
}

// ---------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    let mut cfg: VerifyConfig = section(cli, "verify")?;
    if let Some(g) = &args.theta_pi {
        cfg.theta_pi_units = g.clone();
    }
    if let Some(g) = &args.phi_pi {
        cfg.phase_pi_units = g.clone();
    }
    if let Some(d) = &args.deltas {
        cfg.deltas = d.clone();
    }
    if let Some(v) = args.purity {
        cfg.purity = v;
    }
    if let Some(v) = args.tolerance {
        cfg.tolerance = v;
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    let thetas = cfg.theta_pi_units.points().map_err(config_err)?;
    let phis = cfg.phase_pi_units.points().map_err(config_err)?;
    let template = SeedSpec::new(PI)
        .expect("pi is valid")
        .with_purity(cfg.purity);
    template.validate().map_err(config_err)?;

    // One sub-grid per pulse area; evaluated in parallel, merged in
    // deterministic parameter order.
    let outcomes: Vec<VerifyOutcome> = thetas
        .par_iter()
        .map(|&t| {
            let grid = VerifyGrid {
                thetas: vec![t * PI],
                phis: phis.iter().map(|p| p * PI).collect(),
                deltas: cfg.deltas.clone(),
                seed_template: template,
                cfg: MziConfig::default(),
            };
            verify_analytic(&grid, cfg.tolerance).map_err(|e| anyhow!("{e}"))
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for o in outcomes {
        reports.extend(o.reports);
    }
    let failures: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.deviation.map(|d| d > cfg.tolerance).unwrap_or(false))
        .map(|(i, _)| i)
        .collect();
    let outcome = VerifyOutcome { reports, tolerance: cfg.tolerance, failures };
    formats::write_verification(&cfg.output, &outcome)?;
    write_manifest("verify", &cfg, None, &[cfg.output.clone()])?;
    if !outcome.passed() {
        return Err(CliError::Verification(format!(
            "{} of {} comparisons exceeded {:.1e} (see {})",
            outcome.failures.len(),
            outcome.reports.len(),
            outcome.tolerance,
            cfg.output.display()
        )));
    }
    println!(
        "verify: {} comparisons within {:.1e}",
        outcome.reports.len(),
        outcome.tolerance
    );
    Ok(())
}

// ---------------------------------------------------------------------
// ranges
// ---------------------------------------------------------------------

fn cmd_ranges(cli: &Cli, args: &RangesArgs) -> Result<(), CliError> {
    let mut cfg: RangesConfig = section(cli, "ranges")?;
    if let Some(m) = args.model {
        cfg.models = vec![m];
    }
    if let Some(v) = args.resolution {
        cfg.resolution = v;
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    if cfg.models.is_empty() {
        return Err(config_err(anyhow!("models list is empty")));
    }
    let mut rows = Vec::new();
    for model in &cfg.models {
        let r = accessible_ranges(model.to_model(), cfg.resolution).map_err(config_err)?;
        for (quantity, (lo, hi)) in [("P0", r.p0), ("P1", r.p1), ("P2", r.p2)] {
            rows.push(formats::RangeRow { model: model.as_str(), quantity, lo, hi });
        }
    }
    formats::write_ranges(&cfg.output, &rows)?;
    write_manifest("ranges", &cfg, None, &[cfg.output.clone()])?;
    Ok(())
}
