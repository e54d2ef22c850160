//! Truncated Fock-space linear algebra over labeled bosonic modes.
//!
//! States are sparse maps from occupation vectors to complex amplitudes
//! (pure) or from occupation-vector pairs to matrix elements (mixed).
//! The protocol states handled here are extremely sparse — at most a
//! couple of photons spread over a handful of modes — so no dense
//! representation is ever materialized except inside the eigenvalue
//! check used by verification paths.
//!
//! Every mode is identified by a [`ModeLabel`]: a symbolic name (the
//! spatial channel) plus an integer time-bin index. Truncation is
//! explicit: any amplitude that a raising operation would push past the
//! per-mode cutoff is dropped and the lost weight is accounted for in
//! [`PureState::dropped_weight`] / [`MixedState::dropped_weight`].

mod eigen;
mod mixed;
mod pure;

pub use mixed::MixedState;
pub use pure::PureState;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::math;
use crate::{Error, Result};

/// Symbolic channel names of the interferometer geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeName {
    /// Source output / first beam-splitter input.
    A,
    /// Idle first beam-splitter input (or second source in the
    /// dual-source geometry).
    B,
    /// Short interferometer arm.
    C,
    /// Long (delay) interferometer arm.
    D,
    /// Second beam-splitter input fed by the short arm.
    CPrime,
    /// Second beam-splitter input fed by the delay arm.
    DPrime,
    /// First interferometer output.
    E,
    /// Second interferometer output.
    F,
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModeName::A => "a",
            ModeName::B => "b",
            ModeName::C => "c",
            ModeName::D => "d",
            ModeName::CPrime => "c'",
            ModeName::DPrime => "d'",
            ModeName::E => "e",
            ModeName::F => "f",
        };
        f.write_str(s)
    }
}

/// A bosonic mode: symbolic channel name plus time-bin index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub name: ModeName,
    pub bin: i32,
}

impl ModeLabel {
    pub const fn new(name: ModeName, bin: i32) -> Self {
        Self { name, bin }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.bin)
    }
}

/// Per-mode photon-number cutoff.
///
/// The default cutoff of 3 leaves headroom above the two photons any
/// output bin of this protocol can hold, so a nonzero dropped weight
/// flags a model violation instead of being silently truncated away.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationPolicy {
    max_photons_per_mode: u8,
}

impl TruncationPolicy {
    pub fn new(max_photons_per_mode: u8) -> Result<Self> {
        if max_photons_per_mode < 1 {
            return Err(Error::InvalidArgument(format!(
                "max_photons_per_mode must be >= 1, got {max_photons_per_mode}"
            )));
        }
        Ok(Self { max_photons_per_mode })
    }

    pub fn max_photons(&self) -> u8 {
        self.max_photons_per_mode
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { max_photons_per_mode: 3 }
    }
}

/// Direction of a ladder operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

/// A creation-operator substitution `m† -> Σ_j c_j t_j†`.
///
/// This is the Heisenberg-picture form every linear-optical element
/// takes; beam splitters use two rules sharing target modes, the delay
/// relabeling uses a single phase-weighted rule.
#[derive(Clone, Debug)]
pub struct SubstitutionRule {
    pub source: ModeLabel,
    pub targets: Vec<(ModeLabel, Complex64)>,
}

/// Either representation of a quantum state.
///
/// Pure-seed pipelines stay in the vector representation (the joint
/// output of a pure pulse train is pure, and the density form would
/// square the term count); mixed seeds propagate as density operators.
#[derive(Clone, Debug)]
pub enum State {
    Pure(PureState),
    Mixed(MixedState),
}

impl State {
    pub fn modes(&self) -> &[ModeLabel] {
        match self {
            State::Pure(s) => s.modes(),
            State::Mixed(s) => s.modes(),
        }
    }

    pub fn policy(&self) -> TruncationPolicy {
        match self {
            State::Pure(s) => s.policy(),
            State::Mixed(s) => s.policy(),
        }
    }

    /// Squared norm (pure) or trace (mixed); 1 for any valid state.
    pub fn weight(&self) -> f64 {
        match self {
            State::Pure(s) => s.norm_sqr(),
            State::Mixed(s) => s.trace().re,
        }
    }

    pub fn dropped_weight(&self) -> f64 {
        match self {
            State::Pure(s) => s.dropped_weight(),
            State::Mixed(s) => s.dropped_weight(),
        }
    }

    pub fn tensor(&self, other: &State) -> Result<State> {
        match (self, other) {
            (State::Pure(a), State::Pure(b)) => Ok(State::Pure(a.tensor(b)?)),
            (a, b) => Ok(State::Mixed(a.clone().into_mixed().tensor(&b.clone().into_mixed())?)),
        }
    }

    pub fn substitute(&self, rules: &[SubstitutionRule]) -> Result<State> {
        match self {
            State::Pure(s) => Ok(State::Pure(s.substitute(rules)?)),
            State::Mixed(s) => Ok(State::Mixed(s.substitute(rules)?)),
        }
    }

    /// Multiply every photon in `mode` by `e^{i phase}`.
    pub fn apply_phase(&self, mode: ModeLabel, phase: f64) -> Result<State> {
        match self {
            State::Pure(s) => Ok(State::Pure(s.apply_phase(mode, phase)?)),
            State::Mixed(s) => Ok(State::Mixed(s.apply_phase(mode, phase)?)),
        }
    }

    pub fn relabel_mode(&self, from: ModeLabel, to: ModeLabel) -> Result<State> {
        match self {
            State::Pure(s) => Ok(State::Pure(s.relabel_mode(from, to)?)),
            State::Mixed(s) => Ok(State::Mixed(s.relabel_mode(from, to)?)),
        }
    }

    pub fn expectation_number(&self, mode: ModeLabel) -> Result<f64> {
        match self {
            State::Pure(s) => s.expectation_number(mode),
            State::Mixed(s) => s.expectation_number(mode),
        }
    }

    /// Normally ordered moment `< Π m† Π m >` over the given multiset of
    /// modes (repeats allowed).
    pub fn normally_ordered_moment(&self, modes: &[ModeLabel]) -> Result<f64> {
        match self {
            State::Pure(s) => s.normally_ordered_moment(modes),
            State::Mixed(s) => s.normally_ordered_moment(modes),
        }
    }

    pub fn normally_ordered_pair(&self, x: ModeLabel, y: ModeLabel) -> Result<f64> {
        self.normally_ordered_moment(&[x, y])
    }

    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<MixedState> {
        match self {
            State::Pure(s) => s.partial_trace(keep),
            State::Mixed(s) => s.partial_trace(keep),
        }
    }

    /// Photon-number distribution of one mode (diagonal of the reduced
    /// state), indexed by photon number `0..=cutoff`.
    pub fn number_distribution(&self, mode: ModeLabel) -> Result<Vec<f64>> {
        match self {
            State::Pure(s) => s.number_distribution(mode),
            State::Mixed(s) => s.number_distribution(mode),
        }
    }

    /// Joint photon-number outcome probabilities on `modes`.
    pub fn measure_number_probabilities(&self, modes: &[ModeLabel]) -> Result<Vec<(Vec<u8>, f64)>> {
        match self {
            State::Pure(s) => s.measure_number_probabilities(modes),
            State::Mixed(s) => s.measure_number_probabilities(modes),
        }
    }

    /// Project onto a joint photon-number outcome of `modes`, returning
    /// the outcome probability and the normalized conditional state of
    /// the remaining modes.
    pub fn condition_on_outcome(&self, modes: &[ModeLabel], outcome: &[u8]) -> Result<(f64, State)> {
        match self {
            State::Pure(s) => {
                let (p, rest) = s.condition_on_outcome(modes, outcome)?;
                Ok((p, State::Pure(rest)))
            }
            State::Mixed(s) => {
                let (p, rest) = s.condition_on_outcome(modes, outcome)?;
                Ok((p, State::Mixed(rest)))
            }
        }
    }

    pub fn into_mixed(self) -> MixedState {
        match self {
            State::Pure(s) => s.to_density(),
            State::Mixed(s) => s,
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            State::Pure(s) => Some(s),
            State::Mixed(_) => None,
        }
    }
}

impl From<PureState> for State {
    fn from(s: PureState) -> Self {
        State::Pure(s)
    }
}

impl From<MixedState> for State {
    fn from(s: MixedState) -> Self {
        State::Mixed(s)
    }
}

// ---------------------------------------------------------------------
// Shared internals
// ---------------------------------------------------------------------

const FACTORIALS: [f64; 17] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
];

pub(crate) fn factorial(n: u8) -> f64 {
    FACTORIALS[n as usize]
}

pub(crate) fn check_unique_modes(modes: &[ModeLabel]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::ModeCollision(*m));
        }
    }
    Ok(())
}

pub(crate) fn mode_index(modes: &[ModeLabel], mode: ModeLabel) -> Result<usize> {
    modes
        .iter()
        .position(|&m| m == mode)
        .ok_or(Error::UnknownMode(mode))
}

/// Resolved substitution plan: result mode list plus index-level rules.
pub(crate) struct SubstitutionPlan {
    pub new_modes: Vec<ModeLabel>,
    /// Indices into the old mode list that survive, paired with their
    /// position in the new list.
    pub carried: Vec<(usize, usize)>,
    /// (old index, [(new index, coefficient)]) per substituted mode.
    pub rules: Vec<(usize, Vec<(usize, Complex64)>)>,
}

pub(crate) fn plan_substitution(
    old_modes: &[ModeLabel],
    rules: &[SubstitutionRule],
) -> Result<SubstitutionPlan> {
    let mut substituted: Vec<usize> = Vec::with_capacity(rules.len());
    for rule in rules {
        let idx = mode_index(old_modes, rule.source)?;
        if substituted.contains(&idx) {
            return Err(Error::ModeCollision(rule.source));
        }
        substituted.push(idx);
    }

    // Surviving old modes keep their relative order; fresh targets are
    // appended in first-appearance order.
    let mut new_modes: Vec<ModeLabel> = Vec::new();
    let mut carried: Vec<(usize, usize)> = Vec::new();
    for (i, &m) in old_modes.iter().enumerate() {
        if !substituted.contains(&i) {
            carried.push((i, new_modes.len()));
            new_modes.push(m);
        }
    }
    let mut planned: Vec<(usize, Vec<(usize, Complex64)>)> = Vec::with_capacity(rules.len());
    for (rule, &old_idx) in rules.iter().zip(&substituted) {
        let mut targets = Vec::with_capacity(rule.targets.len());
        for &(label, coef) in &rule.targets {
            if old_modes.contains(&label) && !rules.iter().any(|r| r.source == label) {
                // Target collides with a mode that is not being replaced.
                return Err(Error::ModeCollision(label));
            }
            let idx = match new_modes.iter().position(|&m| m == label) {
                Some(i) => {
                    if i < carried.len() && carried.iter().any(|&(_, n)| n == i) {
                        return Err(Error::ModeCollision(label));
                    }
                    i
                }
                None => {
                    new_modes.push(label);
                    new_modes.len() - 1
                }
            };
            targets.push((idx, coef));
        }
        planned.push((old_idx, targets));
    }
    Ok(SubstitutionPlan { new_modes, carried, rules: planned })
}

/// Expand one occupation vector through a substitution plan.
///
/// Each substituted mode holding `n` photons contributes the multinomial
/// expansion of `(Σ_j c_j t_j†)^n / sqrt(n!)`; the final bosonic factor
/// `sqrt(Π p_t!)` over target occupations is applied once all rules have
/// been folded in. Callers merge the returned terms and handle cutoff
/// stripping themselves.
pub(crate) fn expand_occupation(
    occ: &[u8],
    amp: Complex64,
    plan: &SubstitutionPlan,
) -> Vec<(Vec<u8>, Complex64)> {
    let n_new = plan.new_modes.len();
    let mut base = alloc::vec![0u8; n_new];
    for &(old_idx, new_idx) in &plan.carried {
        base[new_idx] = occ[old_idx];
    }

    let mut terms: Vec<(Vec<u8>, Complex64)> = alloc::vec![(base, amp)];
    for &(old_idx, ref targets) in &plan.rules {
        let n = occ[old_idx];
        if n == 0 {
            continue;
        }
        // One photon at a time: terms *= (Σ_j c_j T_j).
        for _ in 0..n {
            let mut next: Vec<(Vec<u8>, Complex64)> = Vec::with_capacity(terms.len() * targets.len());
            for (key, a) in &terms {
                for &(t_idx, coef) in targets {
                    let mut k = key.clone();
                    k[t_idx] += 1;
                    next.push((k, *a * coef));
                }
            }
            terms = next;
        }
        let inv = 1.0 / math::sqrt(factorial(n));
        for (_, a) in &mut terms {
            *a *= inv;
        }
    }

    // Bosonic normalization of the freshly created target occupations.
    let mut target_indices: Vec<usize> = Vec::new();
    for (_, targets) in &plan.rules {
        for &(t_idx, _) in targets {
            if !target_indices.contains(&t_idx) {
                target_indices.push(t_idx);
            }
        }
    }
    for (key, a) in &mut terms {
        let mut factor = 1.0;
        for &t in &target_indices {
            factor *= factorial(key[t]);
        }
        *a *= math::sqrt(factor);
    }
    terms
}
