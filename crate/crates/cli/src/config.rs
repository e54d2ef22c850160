//! Configuration model: one TOML file with a flat key table per
//! subcommand, overridable by command-line flags (flags win). A run
//! manifest emitted by a previous run can be supplied in place of the
//! TOML file to reproduce that run.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use timebin_core::analytic::Model;
use timebin_core::sampler::SplitterTopology;

/// Grid specification: a single value, an explicit list, or a linear
/// range (inclusive endpoints).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GridSpec {
    Scalar(f64),
    List(Vec<f64>),
    Linspace { min: f64, max: f64, steps: usize },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Scalar(v) => Ok(vec![*v]),
            GridSpec::List(v) => {
                if v.is_empty() {
                    bail!("grid list is empty");
                }
                Ok(v.clone())
            }
            GridSpec::Linspace { min, max, steps } => {
                if *steps < 1 {
                    bail!("grid needs at least one step");
                }
                if *steps == 1 {
                    return Ok(vec![*min]);
                }
                Ok((0..*steps)
                    .map(|i| min + (max - min) * i as f64 / (*steps - 1) as f64)
                    .collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKey {
    SingleMzi,
    DualHom,
}

impl ModelKey {
    pub fn to_model(self) -> Model {
        match self {
            ModelKey::SingleMzi => Model::SingleMzi,
            ModelKey::DualHom => Model::DualHom,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKey::SingleMzi => "single_mzi",
            ModelKey::DualHom => "dual_hom",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TreeKey {
    None,
    Hbt,
    ExtendedHbt,
}

impl TreeKey {
    pub fn topology(self) -> SplitterTopology {
        match self {
            TreeKey::None => SplitterTopology::None,
            TreeKey::Hbt => SplitterTopology::Hbt,
            TreeKey::ExtendedHbt => SplitterTopology::ExtendedHbt,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TagFormat {
    Text,
    Binary,
}

fn default_output(name: &str) -> PathBuf {
    PathBuf::from(name)
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    pub model: ModelKey,
    pub theta_pi_units: GridSpec,
    pub phase_pi_units: GridSpec,
    pub output: PathBuf,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            model: ModelKey::SingleMzi,
            theta_pi_units: GridSpec::Linspace { min: 0.0, max: 1.0, steps: 41 },
            phase_pi_units: GridSpec::Linspace { min: 0.0, max: 2.0, steps: 81 },
            output: default_output("landscape.csv"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationsConfig {
    pub theta_pi_units: GridSpec,
    pub phase_pi_units: GridSpec,
    pub deltas: Vec<i32>,
    pub output: PathBuf,
}

impl Default for CorrelationsConfig {
    fn default() -> Self {
        Self {
            theta_pi_units: GridSpec::List(vec![0.25, 0.5, 0.75]),
            phase_pi_units: GridSpec::Linspace { min: 0.0, max: 2.0, steps: 81 },
            deltas: vec![0],
            output: default_output("correlations.csv"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelKey,
    // Seed state.
    pub theta_pi_units: f64,
    pub purity: f64,
    pub indistinguishability: f64,
    pub inversion_ceiling: f64,
    pub damping: f64,
    // Interferometer.
    pub phase_pi_units: f64,
    pub r1: f64,
    pub r2: f64,
    pub repetition_period_s: f64,
    // Run.
    pub n_bins: u32,
    pub warmup_bins: u32,
    pub rng_seed: u64,
    /// Independent chains; chain k uses rng_seed + k and its own file.
    pub chains: u32,
    // Detection.
    pub efficiency: f64,
    pub dark_count_prob: f64,
    pub photon_number_resolving: bool,
    /// Splitter tree on output e; output f always keeps one detector.
    pub tree: TreeKey,
    pub format: TagFormat,
    pub output: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            model: ModelKey::SingleMzi,
            theta_pi_units: 1.0,
            purity: one(),
            indistinguishability: one(),
            inversion_ceiling: one(),
            damping: 0.0,
            phase_pi_units: 0.0,
            r1: 0.5,
            r2: 0.5,
            repetition_period_s: 13e-9,
            n_bins: 100_000,
            warmup_bins: 2,
            rng_seed: 1,
            chains: 1,
            efficiency: 1.0,
            dark_count_prob: 0.0,
            photon_number_resolving: false,
            tree: TreeKey::None,
            format: TagFormat::Text,
            output: default_output("run.tags"),
        }
    }
}

impl SimulateConfig {
    /// File path for one chain: chain 0 of a single-chain run keeps the
    /// configured name, otherwise `.k` is inserted before the
    /// extension.
    pub fn chain_path(&self, chain: u32) -> PathBuf {
        if self.chains <= 1 {
            return self.output.clone();
        }
        let stem = self.output.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let ext = self.output.extension().and_then(|s| s.to_str()).unwrap_or("tags");
        self.output.with_file_name(format!("{stem}.{chain}.{ext}"))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateConfig {
    /// Tag files; multiple files are merged as independent experiments.
    pub input: Vec<PathBuf>,
    pub order: u8,
    /// Two detectors for order 2, three for order 3.
    pub detectors: Vec<u32>,
    pub max_delta: i64,
    pub normalize: bool,
    pub baseline_min: i64,
    pub baseline_max: i64,
    pub output: PathBuf,
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        Self {
            input: Vec::new(),
            order: 2,
            detectors: vec![0, 1],
            max_delta: 20,
            normalize: true,
            baseline_min: 2,
            baseline_max: 20,
            output: default_output("histogram.csv"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    pub counts_per_second: f64,
    pub repetition_period_s: f64,
    pub total_efficiency: f64,
    pub g2_zero: f64,
    pub g3_zero: Option<f64>,
    pub output: PathBuf,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            counts_per_second: 0.0,
            repetition_period_s: 13e-9,
            total_efficiency: 1.0,
            g2_zero: 0.0,
            g3_zero: None,
            output: default_output("extract.csv"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub theta_pi_units: GridSpec,
    pub phase_pi_units: GridSpec,
    pub deltas: Vec<i32>,
    pub purity: f64,
    pub tolerance: f64,
    pub output: PathBuf,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            theta_pi_units: GridSpec::List(vec![0.25, 0.5, 0.75, 1.0]),
            phase_pi_units: GridSpec::List(vec![0.0, 0.12, 0.5, 0.87, 1.0]),
            deltas: vec![0, 1, 2],
            purity: 1.0,
            tolerance: 1e-10,
            output: default_output("verify.csv"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RangesConfig {
    pub models: Vec<ModelKey>,
    pub resolution: usize,
    pub output: PathBuf,
}

impl Default for RangesConfig {
    fn default() -> Self {
        Self {
            models: vec![ModelKey::SingleMzi, ModelKey::DualHom],
            resolution: 256,
            output: default_output("ranges.csv"),
        }
    }
}

/// The whole configuration file: one optional table per subcommand.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub landscape: Option<LandscapeConfig>,
    pub correlations: Option<CorrelationsConfig>,
    pub simulate: Option<SimulateConfig>,
    pub correlate: Option<CorrelateConfig>,
    pub extract: Option<ExtractConfig>,
    pub verify: Option<VerifyConfig>,
    pub ranges: Option<RangesConfig>,
}

/// Load the section for `subcommand` from a TOML config file, or from
/// the `config` snapshot of a run manifest (JSON).
pub fn load_section<T>(path: &Path, subcommand: &str) -> Result<Option<T>>
where
    T: serde::de::DeserializeOwned,
{
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let looks_json = path.extension().map(|e| e == "json").unwrap_or(false)
        || text.trim_start().starts_with('{');
    if looks_json {
        let manifest: crate::manifest::RunManifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        if manifest.subcommand != subcommand {
            bail!(
                "manifest {} records a `{}` run, not `{subcommand}`",
                path.display(),
                manifest.subcommand
            );
        }
        let cfg = serde_json::from_value(manifest.config.clone())
            .with_context(|| "decoding manifest config snapshot".to_string())?;
        return Ok(Some(cfg));
    }
    let file: FileConfig = toml::from_str(&text)
        .map_err(|e| anyhow!("parsing {}: {e}", path.display()))?;
    let section = match subcommand {
        "landscape" => file.landscape.map(serde_json::to_value),
        "correlations" => file.correlations.map(serde_json::to_value),
        "simulate" => file.simulate.map(serde_json::to_value),
        "correlate" => file.correlate.map(serde_json::to_value),
        "extract" => file.extract.map(serde_json::to_value),
        "verify" => file.verify.map(serde_json::to_value),
        "ranges" => file.ranges.map(serde_json::to_value),
        other => bail!("unknown subcommand `{other}`"),
    };
    match section {
        None => Ok(None),
        Some(value) => Ok(Some(serde_json::from_value(value?)?)),
    }
}

/// Parse a grid flag: either comma-separated values or `min:max:steps`.
pub fn parse_grid_flag(s: &str) -> Result<GridSpec> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("range grid must be min:max:steps, got `{s}`");
        }
        Ok(GridSpec::Linspace {
            min: parts[0].parse()?,
            max: parts[1].parse()?,
            steps: parts[2].parse()?,
        })
    } else {
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| anyhow!("bad grid value `{v}`: {e}")))
            .collect::<Result<_>>()?;
        if values.len() == 1 {
            Ok(GridSpec::Scalar(values[0]))
        } else {
            Ok(GridSpec::List(values))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_points() {
        assert_eq!(GridSpec::Scalar(0.25).points().unwrap(), vec![0.25]);
        assert_eq!(
            GridSpec::Linspace { min: 0.0, max: 1.0, steps: 3 }.points().unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert!(GridSpec::List(vec![]).points().is_err());
    }

    #[test]
    fn grid_flag_parsing() {
        assert_eq!(parse_grid_flag("0.25").unwrap(), GridSpec::Scalar(0.25));
        assert_eq!(
            parse_grid_flag("0.25, 1.0").unwrap(),
            GridSpec::List(vec![0.25, 1.0])
        );
        assert_eq!(
            parse_grid_flag("0:2:5").unwrap(),
            GridSpec::Linspace { min: 0.0, max: 2.0, steps: 5 }
        );
        assert!(parse_grid_flag("1:2").is_err());
        assert!(parse_grid_flag("x").is_err());
    }

    #[test]
    fn toml_roundtrip_with_spec_key_names() {
        let text = r#"
[simulate]
model = "single_mzi"
theta_pi_units = 0.25
purity = 0.98
indistinguishability = 0.9416
inversion_ceiling = 0.94
damping = 0.1
phase_pi_units = 0.87
r1 = 0.5
r2 = 0.5
repetition_period_s = 13e-9
n_bins = 1000
rng_seed = 7
tree = "hbt"

[landscape]
model = "dual_hom"
theta_pi_units = [0.25, 1.0]
phase_pi_units = { min = 0.0, max = 2.0, steps = 9 }
"#;
        let file: FileConfig = toml::from_str(text).unwrap();
        let sim = file.simulate.unwrap();
        assert_eq!(sim.theta_pi_units, 0.25);
        assert_eq!(sim.purity, 0.98);
        assert_eq!(sim.tree, TreeKey::Hbt);
        assert_eq!(sim.warmup_bins, 2); // default
        let land = file.landscape.unwrap();
        assert_eq!(land.model, ModelKey::DualHom);
        assert_eq!(land.theta_pi_units.points().unwrap().len(), 2);
        assert_eq!(land.phase_pi_units.points().unwrap().len(), 9);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "[simulate]\nn_bins = 10\nnot_a_key = 1\n";
        assert!(toml::from_str::<FileConfig>(text).is_err());
    }

    #[test]
    fn chain_paths() {
        let mut cfg = SimulateConfig { output: PathBuf::from("out/run.tags"), ..Default::default() };
        assert_eq!(cfg.chain_path(0), PathBuf::from("out/run.tags"));
        cfg.chains = 3;
        assert_eq!(cfg.chain_path(1), PathBuf::from("out/run.1.tags"));
    }
}
