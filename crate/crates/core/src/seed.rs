//! Per-bin input states from excitation parameters.
//!
//! A resonant pulse of area theta prepares each emission pulse in the
//! vacuum/one-photon superposition `cos(theta/2)|0> + sin(theta/2)|1>`.
//! Imperfect state purity enters as a linear scaling of the
//! vacuum-one-photon coherence; indistinguishability is carried as
//! metadata only (it rescales the analytic fringe visibility but has no
//! agreed microscopic correlation model).

use alloc::format;
use alloc::vec;

use num_complex::Complex64;

use crate::fock::{MixedState, ModeLabel, ModeName, PureState, TruncationPolicy};
use crate::math;
use crate::{Error, Result};

/// Emitter/excitation parameters defining the per-bin input state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedSpec {
    /// Pulse area in radians, in [0, pi].
    pub theta: f64,
    /// State purity lambda in [0, 1]; scales the |0><1| coherence.
    pub purity: f64,
    /// Wave-packet indistinguishability in [0, 1]; metadata for the
    /// analytic visibility model.
    pub indistinguishability: f64,
    /// Maximum population inversion beta in [0, 1].
    pub inversion_ceiling: f64,
    /// Spontaneous-emission damping per radian of pulse area, >= 0.
    pub damping: f64,
}

impl SeedSpec {
    pub fn new(theta: f64) -> Result<Self> {
        let spec = Self {
            theta,
            purity: 1.0,
            indistinguishability: 1.0,
            inversion_ceiling: 1.0,
            damping: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_purity(mut self, purity: f64) -> Self {
        self.purity = purity;
        self
    }

    pub fn with_indistinguishability(mut self, v: f64) -> Self {
        self.indistinguishability = v;
        self
    }

    pub fn with_inversion_ceiling(mut self, beta: f64) -> Self {
        self.inversion_ceiling = beta;
        self
    }

    pub fn with_damping(mut self, gamma: f64) -> Self {
        self.damping = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=core::f64::consts::PI).contains(&self.theta) {
            return Err(Error::InvalidArgument(format!(
                "pulse area {} outside [0, pi]",
                self.theta
            )));
        }
        for (name, v) in [
            ("purity", self.purity),
            ("indistinguishability", self.indistinguishability),
            ("inversion_ceiling", self.inversion_ceiling),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} {v} outside [0, 1]")));
            }
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "damping {} must be finite and >= 0",
                self.damping
            )));
        }
        Ok(())
    }
}

/// One-mode input state over Fock levels {0, 1}, anchored at mode
/// `a[0]` and relabeled per bin by the interferometer builders.
#[derive(Clone, Debug)]
pub struct SeedState {
    state: MixedState,
}

impl SeedState {
    /// The anchor mode the seed is defined over.
    pub const MODE: ModeLabel = ModeLabel::new(ModeName::A, 0);

    pub fn mixed(&self) -> &MixedState {
        &self.state
    }

    /// Relabeled copy at time-bin `bin`.
    pub fn mixed_at_bin(&self, bin: i32) -> MixedState {
        self.state
            .relabel_mode(Self::MODE, ModeLabel::new(ModeName::A, bin))
            .expect("seed anchor mode always present")
    }

    /// Vector form, when the seed is pure (purity within 1e-12 of one).
    pub fn as_pure(&self) -> Option<PureState> {
        let d0 = self.state.element(&[0], &[0]).re;
        let d1 = self.state.element(&[1], &[1]).re;
        let coh = self.state.element(&[0], &[1]);
        let (a0, a1) = if d0 > 1e-12 {
            let a0 = math::sqrt(d0);
            (Complex64::new(a0, 0.0), coh.conj() / a0)
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(math::sqrt(d1), 0.0))
        };
        // |psi><psi| must reproduce the matrix elementwise.
        if (a1.norm_sqr() - d1).abs() > 1e-12 || (a0 * a1.conj() - coh).norm() > 1e-12 {
            return None;
        }
        PureState::from_amplitudes(
            vec![Self::MODE],
            [(vec![0], a0), (vec![1], a1)],
            self.state.policy(),
        )
        .ok()
    }

    pub fn pure_at_bin(&self, bin: i32) -> Option<PureState> {
        self.as_pure().map(|s| {
            s.relabel_mode(Self::MODE, ModeLabel::new(ModeName::A, bin))
                .expect("seed anchor mode always present")
        })
    }

    /// Mean photon number `sin²(theta/2)`.
    pub fn mean_photon(&self) -> f64 {
        self.state
            .expectation_number(Self::MODE)
            .expect("seed anchor mode always present")
    }
}

/// Pure seed `cos(theta/2)|0> + sin(theta/2)|1>`.
pub fn seed_pure(theta: f64) -> Result<SeedState> {
    seed_pure_with_policy(theta, TruncationPolicy::default())
}

pub fn seed_pure_with_policy(theta: f64, policy: TruncationPolicy) -> Result<SeedState> {
    if !(0.0..=core::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("pulse area {theta} outside [0, pi]")));
    }
    let c0 = math::cos(theta / 2.0);
    let c1 = math::sin(theta / 2.0);
    let pure = PureState::from_amplitudes(
        vec![SeedState::MODE],
        [
            (vec![0], Complex64::new(c0, 0.0)),
            (vec![1], Complex64::new(c1, 0.0)),
        ],
        policy,
    )?;
    Ok(SeedState { state: pure.to_density() })
}

/// Seed density operator with purity-scaled coherence:
/// diagonal `(cos², sin²)`, off-diagonal `lambda · cos(theta/2) sin(theta/2)`.
pub fn seed_mixed(spec: &SeedSpec) -> Result<SeedState> {
    seed_mixed_with_policy(spec, TruncationPolicy::default())
}

pub fn seed_mixed_with_policy(spec: &SeedSpec, policy: TruncationPolicy) -> Result<SeedState> {
    spec.validate()?;
    let c0 = math::cos(spec.theta / 2.0);
    let c1 = math::sin(spec.theta / 2.0);
    let coh = spec.purity * c0 * c1;
    let state = MixedState::from_elements(
        vec![SeedState::MODE],
        [
            ((vec![0], vec![0]), Complex64::new(c0 * c0, 0.0)),
            ((vec![1], vec![1]), Complex64::new(c1 * c1, 0.0)),
            ((vec![0], vec![1]), Complex64::new(coh, 0.0)),
            ((vec![1], vec![0]), Complex64::new(coh, 0.0)),
        ],
        policy,
    )?;
    Ok(SeedState { state })
}

/// Damped Rabi calibration curve from normalized excitation power to
/// mean photon number: `n = beta (1 - cos(theta) e^{-gamma theta}) / 2`
/// with `theta = pi sqrt(power)`. Reduces to `sin²(theta/2)` for
/// `beta = 1, gamma = 0`.
pub fn rabi_mean_photon(power_norm: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(power_norm.is_finite() && power_norm >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "normalized power {power_norm} must be finite and >= 0"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("inversion ceiling {beta} outside [0, 1]")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("damping {gamma} must be finite and >= 0")));
    }
    let theta = core::f64::consts::PI * math::sqrt(power_norm);
    Ok(beta * (1.0 - math::cos(theta) * math::exp(-gamma * theta)) / 2.0)
}
