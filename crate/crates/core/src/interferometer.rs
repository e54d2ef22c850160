//! Operator-level interferometer geometries.
//!
//! Two configurations are modeled. The path-unbalanced MZI splits each
//! seed pulse at BS1, delays one arm by exactly one repetition period
//! (plus a fine phase `phi`), and recombines adjacent pulses at BS2.
//! The dual-source HOM geometry interferes two independent seeds on a
//! single splitter, which removes the interaction between successive
//! pulses.
//!
//! Labeling convention: output `e` is the port at which the delayed (or
//! second-source) path interferes destructively at `phi = 0`. With the
//! seed entering the reflecting port of BS1 this reproduces the
//! populations `n_{e,f} = (sin²(θ/2)/2)(1 ∓ cos²(θ/2) cos φ)` with the
//! minus sign on `e`.

use alloc::format;
use alloc::vec;

use num_complex::Complex64;

use crate::fock::{ModeLabel, ModeName, State, SubstitutionRule, TruncationPolicy};
use crate::math;
use crate::seed::SeedState;
use crate::{Error, Result};

/// Largest pulse-train length accepted by the exact builder. The joint
/// state holds on the order of 5^N amplitudes, so this is a hard wall.
pub const MAX_TRAIN_BINS: usize = 12;

/// Path-unbalanced MZI geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MziConfig {
    phase: f64,
    delay_bins: u32,
    pub r1: f64,
    pub r2: f64,
    /// Pulse repetition period in seconds; metadata used by rate
    /// conversions, not by the state transforms.
    pub repetition_period: f64,
}

impl MziConfig {
    pub fn new(phase: f64) -> Self {
        Self {
            phase: math::wrap_angle(phase),
            delay_bins: 1,
            r1: 0.5,
            r2: 0.5,
            repetition_period: 13e-9,
        }
    }

    /// Derive the interferometric phase from the emission angular
    /// frequency and the fine delay: `phi = omega * dtau`.
    pub fn from_omega_delay(omega: f64, dtau: f64) -> Self {
        Self::new(omega * dtau)
    }

    pub fn with_reflectivities(mut self, r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "reflectivities ({r1}, {r2}) must lie strictly inside (0, 1)"
            )));
        }
        self.r1 = r1;
        self.r2 = r2;
        Ok(self)
    }

    pub fn with_repetition_period(mut self, tau_r: f64) -> Result<Self> {
        if !(tau_r > 0.0 && tau_r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "repetition period {tau_r} must be finite and positive"
            )));
        }
        self.repetition_period = tau_r;
        Ok(self)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = math::wrap_angle(phase);
        self
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Always 1 in this artifact; longer delays are rejected.
    pub fn delay_bins(&self) -> u32 {
        self.delay_bins
    }

    pub fn validate(&self) -> Result<()> {
        if self.delay_bins != 1 {
            return Err(Error::InvalidArgument(format!(
                "delay of {} bins unsupported (only 1)",
                self.delay_bins
            )));
        }
        if !(self.r1 > 0.0 && self.r1 < 1.0 && self.r2 > 0.0 && self.r2 < 1.0) {
            return Err(Error::InvalidArgument("reflectivities outside (0, 1)".into()));
        }
        Ok(())
    }
}

impl Default for MziConfig {
    fn default() -> Self {
        Self::new(0.0)
    }
}

/// Dual-source single-splitter (HOM) geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomConfig {
    phase: f64,
    pub reflectivity: f64,
}

impl HomConfig {
    pub fn new(phase: f64) -> Self {
        Self { phase: math::wrap_angle(phase), reflectivity: 0.5 }
    }

    pub fn with_reflectivity(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "reflectivity {r} must lie strictly inside (0, 1)"
            )));
        }
        self.reflectivity = r;
        Ok(self)
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

impl Default for HomConfig {
    fn default() -> Self {
        Self::new(0.0)
    }
}

/// One-mode state of the delay arm carried between channel steps.
#[derive(Clone, Debug)]
pub struct ChannelMemory {
    state: State,
}

impl ChannelMemory {
    /// Label of the memory mode as it enters BS2.
    pub const MODE: ModeLabel = ModeLabel::new(ModeName::DPrime, 0);

    /// Vacuum memory: the boundary condition before the first bin.
    pub fn vacuum(policy: TruncationPolicy, pure: bool) -> Self {
        let state = if pure {
            State::Pure(
                crate::fock::PureState::vacuum(vec![Self::MODE], policy)
                    .expect("fresh mode list"),
            )
        } else {
            State::Mixed(
                crate::fock::MixedState::vacuum(vec![Self::MODE], policy)
                    .expect("fresh mode list"),
            )
        };
        Self { state }
    }

    /// Wrap a conditional one-mode state (any label) as the next memory.
    pub fn from_state(state: State) -> Result<Self> {
        if state.modes().len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "channel memory must be a single mode, got {}",
                state.modes().len()
            )));
        }
        let from = state.modes()[0];
        let state = if from == Self::MODE { state } else { state.relabel_mode(from, Self::MODE)? };
        Ok(Self { state })
    }

    pub fn state(&self) -> &State {
        &self.state
    }
}

/// Beam-splitter substitution on a pair of occupied input modes:
///
/// `x† -> sqrt(1-r) u† + sqrt(r) v†`,
/// `y† -> sqrt(r) u† - sqrt(1-r) v†`.
///
/// `r = 1/2` gives the balanced splitter. Output modes must be fresh.
pub fn bs_transform(
    state: &State,
    in_modes: (ModeLabel, ModeLabel),
    out_modes: (ModeLabel, ModeLabel),
    r: f64,
) -> Result<State> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "reflectivity {r} must lie strictly inside (0, 1)"
        )));
    }
    let (x, y) = in_modes;
    let (u, v) = out_modes;
    if x == y {
        return Err(Error::ModeCollision(x));
    }
    if u == v {
        return Err(Error::ModeCollision(u));
    }
    let t = math::sqrt(1.0 - r);
    let rr = math::sqrt(r);
    let rules = [
        SubstitutionRule {
            source: x,
            targets: vec![(u, Complex64::new(t, 0.0)), (v, Complex64::new(rr, 0.0))],
        },
        SubstitutionRule {
            source: y,
            targets: vec![(u, Complex64::new(rr, 0.0)), (v, Complex64::new(-t, 0.0))],
        },
    ];
    state.substitute(&rules)
}

/// Delay-arm transport: relabels `mode` at bin `i` to the BS2 input
/// `d'[i+1]` and multiplies each photon by `e^{i phi}`.
pub fn delay_transform(state: &State, mode: ModeLabel, phi: f64) -> Result<State> {
    let target = ModeLabel::new(ModeName::DPrime, mode.bin + 1);
    let rules = [SubstitutionRule {
        source: mode,
        targets: vec![(target, Complex64::from_polar(1.0, phi))],
    }];
    state.substitute(&rules)
}

fn seed_state_for(seed: &SeedState, bin: i32, pure: bool) -> State {
    if pure {
        State::Pure(seed.pure_at_bin(bin).expect("purity checked by caller"))
    } else {
        State::Mixed(seed.mixed_at_bin(bin))
    }
}

fn fresh_vacuum(name: ModeName, bin: i32, policy: TruncationPolicy, pure: bool) -> State {
    if pure {
        State::Pure(
            crate::fock::PureState::vacuum(vec![ModeLabel::new(name, bin)], policy)
                .expect("fresh mode list"),
        )
    } else {
        State::Mixed(
            crate::fock::MixedState::vacuum(vec![ModeLabel::new(name, bin)], policy)
                .expect("fresh mode list"),
        )
    }
}

/// Exact joint output state of an `n_bins`-pulse train over the output
/// modes `e[0..=n_bins]`, `f[0..=n_bins]`.
///
/// Boundary convention: vacuum primes the delay arm before bin 0, and
/// the final delay-arm content exits through BS2 against vacuum in an
/// extra flush bin (index `n_bins`). Interior output bins are
/// `1..n_bins`. Memory grows like 5^N; the builder refuses more than
/// [`MAX_TRAIN_BINS`] bins.
pub fn build_pulse_train_state(
    n_bins: usize,
    seed: &SeedState,
    cfg: &MziConfig,
) -> Result<State> {
    cfg.validate()?;
    if n_bins < 3 {
        return Err(Error::InvalidArgument(format!(
            "pulse train needs at least 3 bins for an interior bin, got {n_bins}"
        )));
    }
    if n_bins > MAX_TRAIN_BINS {
        return Err(Error::Capacity { requested: n_bins, max: MAX_TRAIN_BINS });
    }
    let policy = seed.mixed().policy();
    let pure = seed.as_pure().is_some();
    let phi = cfg.phase();

    // Delay arm starts in vacuum at the BS2 input of bin 0.
    let mut state = fresh_vacuum(ModeName::DPrime, 0, policy, pure);
    for i in 0..n_bins as i32 {
        let a = ModeLabel::new(ModeName::A, i);
        let b = ModeLabel::new(ModeName::B, i);
        let c = ModeLabel::new(ModeName::C, i);
        let d = ModeLabel::new(ModeName::D, i);
        let c_in = ModeLabel::new(ModeName::CPrime, i);
        let d_in = ModeLabel::new(ModeName::DPrime, i);
        let e = ModeLabel::new(ModeName::E, i);
        let f = ModeLabel::new(ModeName::F, i);

        state = state.tensor(&seed_state_for(seed, i, pure))?;
        state = state.tensor(&fresh_vacuum(ModeName::B, i, policy, pure))?;
        // Seed on the reflecting port: a† -> sqrt(r1) c† - sqrt(1-r1) d†.
        state = bs_transform(&state, (b, a), (c, d), cfg.r1)?;
        // Short arm feeds BS2 in the same bin, long arm in the next.
        state = state.relabel_mode(c, c_in)?;
        state = delay_transform(&state, d, phi)?;
        state = bs_transform(&state, (c_in, d_in), (e, f), cfg.r2)?;
    }
    // Flush the final delay-arm content against vacuum.
    let i = n_bins as i32;
    let c_in = ModeLabel::new(ModeName::CPrime, i);
    let d_in = ModeLabel::new(ModeName::DPrime, i);
    state = state.tensor(&fresh_vacuum(ModeName::CPrime, i, policy, pure))?;
    state = bs_transform(
        &state,
        (c_in, d_in),
        (ModeLabel::new(ModeName::E, i), ModeLabel::new(ModeName::F, i)),
        cfg.r2,
    )?;
    Ok(state)
}

/// One bin of the MZI as a memory-1 channel.
///
/// Combines the memory (the previous bin's delay-arm content) with a
/// fresh seed: BS1 splits the seed, the short-arm component meets the
/// memory at BS2, and the new long-arm component becomes the next
/// memory. Returns the joint pre-measurement state over
/// `[e[0], f[0], d[0]]`, where `d[0]` is the next memory mode.
pub fn mzi_channel_step(
    memory: &ChannelMemory,
    seed: &SeedState,
    cfg: &MziConfig,
) -> Result<State> {
    cfg.validate()?;
    let policy = seed.mixed().policy();
    let pure = matches!(memory.state(), State::Pure(_)) && seed.as_pure().is_some();
    let a = SeedState::MODE;
    let b = ModeLabel::new(ModeName::B, 0);
    let c = ModeLabel::new(ModeName::C, 0);
    let d = ModeLabel::new(ModeName::D, 0);
    let e = ModeLabel::new(ModeName::E, 0);
    let f = ModeLabel::new(ModeName::F, 0);

    let mem_state = match (memory.state(), pure) {
        (State::Pure(p), false) => State::Mixed(p.clone().to_density()),
        (s, _) => s.clone(),
    };
    if mem_state.policy() != policy {
        return Err(Error::InvalidArgument(
            "memory and seed truncation policies differ".into(),
        ));
    }
    let mut state = mem_state.tensor(&seed_state_for(seed, 0, pure))?;
    state = state.tensor(&fresh_vacuum(ModeName::B, 0, policy, pure))?;
    state = bs_transform(&state, (b, a), (c, d), cfg.r1)?;
    // The memory picked up the delay phase on its way to BS2.
    state = state.apply_phase(ChannelMemory::MODE, cfg.phase())?;
    state = bs_transform(&state, (c, ChannelMemory::MODE), (e, f), cfg.r2)?;
    Ok(state)
}

/// Modes of the channel-step output: `(e, f, next_memory)`.
pub fn channel_step_modes() -> (ModeLabel, ModeLabel, ModeLabel) {
    (
        ModeLabel::new(ModeName::E, 0),
        ModeLabel::new(ModeName::F, 0),
        ModeLabel::new(ModeName::D, 0),
    )
}

/// Single-splitter interference of two independent seeds with relative
/// phase `phi`, over output modes `[e[0], f[0]]`.
pub fn hom_output_state(
    seed_a: &SeedState,
    seed_b: &SeedState,
    cfg: &HomConfig,
) -> Result<State> {
    let a = SeedState::MODE;
    let b = ModeLabel::new(ModeName::B, 0);
    let e = ModeLabel::new(ModeName::E, 0);
    let f = ModeLabel::new(ModeName::F, 0);
    let pure = seed_a.as_pure().is_some() && seed_b.as_pure().is_some();

    let sa = seed_state_for(seed_a, 0, pure);
    let sb = seed_state_for(seed_b, 0, pure).relabel_mode(SeedState::MODE, b)?;
    let mut state = sa.tensor(&sb)?;
    state = state.apply_phase(b, cfg.phase())?;
    // Second source on the port that interferes destructively at e for
    // phi = 0 (all single photons exit at f there).
    bs_transform(&state, (a, b), (f, e), cfg.reflectivity)
}

/// Interior output-bin labels of a built pulse train.
pub fn interior_bins(n_bins: usize) -> impl Iterator<Item = i32> {
    1..(n_bins as i32)
}

pub fn output_mode(name: ModeName, bin: i32) -> ModeLabel {
    ModeLabel::new(name, bin)
}
