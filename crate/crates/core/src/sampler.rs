//! Monte Carlo generation of detector time-tag streams.
//!
//! The pulse train is measured bin by bin: the one-bin quantum memory
//! (delay-arm state) is combined with a fresh seed, the joint output is
//! sampled by the Born rule, and the post-measurement delay-arm state
//! becomes the next memory. Sampled photons are routed through the
//! per-output splitter trees, thinned by detector efficiency, and
//! emitted as `(detector, bin)` records. Dark counts are independent
//! per-bin Bernoulli events per detector.
//!
//! Streams are deterministic given the 64-bit seed of the
//! counter-based generator (ChaCha); independent chains should use
//! `seed + chain_index`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::interferometer::{
    channel_step_modes, hom_output_state, mzi_channel_step, ChannelMemory, HomConfig, MziConfig,
};
use crate::seed::{seed_mixed, SeedSpec};
use crate::{Error, Result};

/// The stream generator: a counter-based keyed generator with an
/// explicit 64-bit seed.
pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

fn uniform(rng: &mut impl RngCore) -> f64 {
    // 53 random mantissa bits -> [0, 1).
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Detector response model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorModel {
    /// Detection efficiency per photon.
    pub efficiency: f64,
    /// Probability of a spurious count per detector per bin.
    pub dark_count_prob: f64,
    /// Photon-number resolving (one tag per detected photon) versus
    /// click/no-click.
    pub photon_number_resolving: bool,
}

impl DetectorModel {
    pub fn ideal() -> Self {
        Self { efficiency: 1.0, dark_count_prob: 0.0, photon_number_resolving: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidArgument(format!(
                "efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        if !(0.0..1.0).contains(&self.dark_count_prob) {
            return Err(Error::InvalidArgument(format!(
                "dark count probability {} outside [0, 1)",
                self.dark_count_prob
            )));
        }
        Ok(())
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Splitter-tree topology on one interferometer output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitterTopology {
    /// Direct fiber to a single detector.
    None,
    /// One 50:50 splitter feeding two detectors.
    Hbt,
    /// Two cascaded 50:50 splitters feeding three detectors; photons
    /// reach them with probabilities (1/2, 1/4, 1/4).
    ExtendedHbt,
}

impl SplitterTopology {
    pub fn leaf_count(&self) -> usize {
        match self {
            SplitterTopology::None => 1,
            SplitterTopology::Hbt => 2,
            SplitterTopology::ExtendedHbt => 3,
        }
    }
}

/// Detection tree on one output: topology plus the detector id at each
/// leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitterTree {
    pub topology: SplitterTopology,
    detectors: Vec<u32>,
}

impl SplitterTree {
    pub fn new(topology: SplitterTopology, detectors: Vec<u32>) -> Result<Self> {
        if detectors.len() != topology.leaf_count() {
            return Err(Error::InvalidArgument(format!(
                "{} detectors supplied for a {}-leaf tree",
                detectors.len(),
                topology.leaf_count()
            )));
        }
        for (i, d) in detectors.iter().enumerate() {
            if detectors[..i].contains(d) {
                return Err(Error::InvalidArgument(format!("duplicate detector id {d}")));
            }
        }
        Ok(Self { topology, detectors })
    }

    pub fn single(detector: u32) -> Self {
        Self { topology: SplitterTopology::None, detectors: vec![detector] }
    }

    pub fn detectors(&self) -> &[u32] {
        &self.detectors
    }
}

/// One detection event: which detector fired in which time bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimeTagRecord {
    pub bin: u32,
    pub detector: u32,
}

/// Run geometry and seeding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Total simulated bins, including warmup.
    pub n_bins: u32,
    /// Leading bins excluded from the emitted stream (boundary bins are
    /// not stationary).
    pub warmup_bins: u32,
    pub rng_seed: u64,
}

impl RunConfig {
    pub fn new(n_bins: u32, rng_seed: u64) -> Self {
        Self { n_bins, warmup_bins: 2, rng_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins <= self.warmup_bins {
            return Err(Error::InvalidArgument(format!(
                "n_bins {} must exceed warmup_bins {}",
                self.n_bins, self.warmup_bins
            )));
        }
        Ok(())
    }
}

/// Which geometry drives the stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceConfig {
    SingleMzi(MziConfig),
    DualHom(HomConfig),
}

/// Route `n_photons` through one splitter tree; returns arrival counts
/// per leaf (before detector effects). Each photon independently takes
/// a uniform branch at every 50:50 node.
pub fn route_splitter_tree(
    n_photons: u8,
    tree: &SplitterTree,
    rng: &mut impl RngCore,
) -> Vec<u8> {
    let mut arrivals = vec![0u8; tree.topology.leaf_count()];
    for _ in 0..n_photons {
        let leaf = match tree.topology {
            SplitterTopology::None => 0,
            SplitterTopology::Hbt => {
                if uniform(rng) < 0.5 {
                    0
                } else {
                    1
                }
            }
            SplitterTopology::ExtendedHbt => {
                if uniform(rng) < 0.5 {
                    0
                } else if uniform(rng) < 0.5 {
                    1
                } else {
                    2
                }
            }
        };
        arrivals[leaf] += 1;
    }
    arrivals
}

fn emit_arm(
    arrivals: &[u8],
    tree: &SplitterTree,
    det: &DetectorModel,
    bin: u32,
    rng: &mut impl RngCore,
    out: &mut Vec<TimeTagRecord>,
) {
    for (leaf, &n) in arrivals.iter().enumerate() {
        let detector = tree.detectors[leaf];
        let mut detected = 0u32;
        for _ in 0..n {
            if uniform(rng) < det.efficiency {
                detected += 1;
            }
        }
        let dark = det.dark_count_prob > 0.0 && uniform(rng) < det.dark_count_prob;
        if det.photon_number_resolving {
            let total = detected + dark as u32;
            for _ in 0..total {
                out.push(TimeTagRecord { bin, detector });
            }
        } else if detected > 0 || dark {
            out.push(TimeTagRecord { bin, detector });
        }
    }
}

fn sample_outcome(
    probs: &[(Vec<u8>, f64)],
    rng: &mut impl RngCore,
) -> Vec<u8> {
    let r = uniform(rng);
    let mut acc = 0.0;
    for (occ, p) in probs {
        acc += p;
        if r < acc {
            return occ.clone();
        }
    }
    // Guard against accumulated rounding at r ~ 1.
    probs.last().expect("non-empty outcome table").0.clone()
}

/// Generate a time-tag stream.
///
/// Per bin: build the conditional pre-measurement state, sample the
/// joint `(n_e, n_f)` photon numbers by the Born rule, project, carry
/// the post-measurement delay-arm state as the next memory, route the
/// sampled photons through the per-output trees, thin by efficiency,
/// add dark counts, and emit tags (warmup bins excluded).
pub fn sample_stream(
    run: &RunConfig,
    seed_spec: &SeedSpec,
    source: &SourceConfig,
    det: &DetectorModel,
    e_tree: &SplitterTree,
    f_tree: &SplitterTree,
) -> Result<Vec<TimeTagRecord>> {
    run.validate()?;
    det.validate()?;
    for d in e_tree.detectors() {
        if f_tree.detectors().contains(d) {
            return Err(Error::InvalidArgument(format!(
                "detector id {d} appears on both outputs"
            )));
        }
    }
    let seed = seed_mixed(seed_spec)?;
    let cutoff = seed.mixed().policy().max_photons();
    if cutoff < 2 {
        return Err(Error::CutoffTooLow { needed: 2, actual: cutoff });
    }
    let mut rng = stream_rng(run.rng_seed);
    let mut tags: Vec<TimeTagRecord> = Vec::new();
    let mut bin_tags: Vec<TimeTagRecord> = Vec::new();
    let (e_mode, f_mode, _) = channel_step_modes();

    match source {
        SourceConfig::SingleMzi(cfg) => {
            cfg.validate()?;
            let pure = seed.as_pure().is_some();
            let mut memory = ChannelMemory::vacuum(seed.mixed().policy(), pure);
            for bin in 0..run.n_bins {
                let joint = mzi_channel_step(&memory, &seed, cfg)?;
                let probs = joint.measure_number_probabilities(&[e_mode, f_mode])?;
                let outcome = sample_outcome(&probs, &mut rng);
                let (_, rest) = joint.condition_on_outcome(&[e_mode, f_mode], &outcome)?;
                memory = ChannelMemory::from_state(rest)?;
                if bin >= run.warmup_bins {
                    emit_bin(
                        outcome[0], outcome[1], e_tree, f_tree, det, bin, &mut rng,
                        &mut bin_tags, &mut tags,
                    );
                }
            }
        }
        SourceConfig::DualHom(cfg) => {
            // Bins are independent: the outcome table is fixed.
            let joint = hom_output_state(&seed, &seed, cfg)?;
            let probs = joint.measure_number_probabilities(&[e_mode, f_mode])?;
            for bin in 0..run.n_bins {
                let outcome = sample_outcome(&probs, &mut rng);
                if bin >= run.warmup_bins {
                    emit_bin(
                        outcome[0], outcome[1], e_tree, f_tree, det, bin, &mut rng,
                        &mut bin_tags, &mut tags,
                    );
                }
            }
        }
    }
    Ok(tags)
}

#[allow(clippy::too_many_arguments)]
fn emit_bin(
    n_e: u8,
    n_f: u8,
    e_tree: &SplitterTree,
    f_tree: &SplitterTree,
    det: &DetectorModel,
    bin: u32,
    rng: &mut impl RngCore,
    bin_tags: &mut Vec<TimeTagRecord>,
    tags: &mut Vec<TimeTagRecord>,
) {
    bin_tags.clear();
    let arrivals_e = route_splitter_tree(n_e, e_tree, rng);
    emit_arm(&arrivals_e, e_tree, det, bin, rng, bin_tags);
    let arrivals_f = route_splitter_tree(n_f, f_tree, rng);
    emit_arm(&arrivals_f, f_tree, det, bin, rng, bin_tags);
    // Stable output order within a bin.
    bin_tags.sort();
    tags.extend_from_slice(bin_tags);
}

/// Standard detection setups.
pub fn cross_correlation_trees() -> (SplitterTree, SplitterTree) {
    (SplitterTree::single(0), SplitterTree::single(1))
}

pub fn hbt_trees() -> (SplitterTree, SplitterTree) {
    (
        SplitterTree::new(SplitterTopology::Hbt, vec![0, 1]).expect("leaf count matches"),
        SplitterTree::single(2),
    )
}

pub fn extended_hbt_trees() -> (SplitterTree, SplitterTree) {
    (
        SplitterTree::new(SplitterTopology::ExtendedHbt, vec![0, 1, 2]).expect("leaf count matches"),
        SplitterTree::single(3),
    )
}
