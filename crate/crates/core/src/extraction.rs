//! Inversion from measured rates and correlations to photon-number
//! probabilities.
//!
//! Under the vanishing-three-photon assumption, the mean photon number
//! `n` and the zero-delay autocorrelation `g²(0)` determine the triple:
//!
//! `P2 = n² g²(0) / 2`, `P1 = n - n² g²(0)`, `P0` the complement.
//!
//! A measured third-order correlation bounds the residual three-photon
//! probability as `P3 <= g³(0) n³ / 6` (assuming nothing above three).

use alloc::format;

use crate::{Error, Result};

/// Measured quantities feeding the inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractionInput {
    /// Detected counts per second at the analyzed output.
    pub counts_per_second: f64,
    /// Pulse repetition period in seconds.
    pub repetition_period: f64,
    /// Total efficiency from output to detection, in (0, 1].
    pub total_efficiency: f64,
    /// Side-peak-normalized zero-delay autocorrelation.
    pub g2_zero: f64,
    /// Optional normalized zero-delay third-order correlation.
    pub g3_zero: Option<f64>,
}

impl ExtractionInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.counts_per_second >= 0.0 && self.counts_per_second.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "counts per second {} must be finite and >= 0",
                self.counts_per_second
            )));
        }
        if !(self.repetition_period > 0.0 && self.repetition_period.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "repetition period {} must be finite and positive",
                self.repetition_period
            )));
        }
        if !(self.total_efficiency > 0.0 && self.total_efficiency <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "total efficiency {} outside (0, 1]",
                self.total_efficiency
            )));
        }
        if !(self.g2_zero >= 0.0 && self.g2_zero.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "g2(0) {} must be finite and >= 0",
                self.g2_zero
            )));
        }
        if let Some(g3) = self.g3_zero {
            if !(g3 >= 0.0 && g3.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "g3(0) {g3} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }
}

/// Extracted photon-number probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractedProbs {
    pub mean_photon: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3_bound: Option<f64>,
}

/// Mean photon number per pulse from the detected rate:
/// `n = N · τ_R / η`.
pub fn mean_photon(counts_per_second: f64, repetition_period: f64, efficiency: f64) -> Result<f64> {
    if !(counts_per_second >= 0.0 && counts_per_second.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "counts per second {counts_per_second} must be finite and >= 0"
        )));
    }
    if !(repetition_period > 0.0 && repetition_period.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "repetition period {repetition_period} must be finite and positive"
        )));
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "efficiency {efficiency} outside (0, 1]"
        )));
    }
    Ok(counts_per_second * repetition_period / efficiency)
}

/// A mean photon number above the truncation cutoff cannot come from
/// this protocol; callers surface this as a warning, not an error.
pub fn mean_photon_implausible(n: f64) -> bool {
    n > crate::fock::TruncationPolicy::default().max_photons() as f64
}

/// Invert `(n, g²(0))` into the probability triple. Inputs that drive
/// any probability out of [0, 1] violate the vanishing-three-photon
/// assumption and are rejected rather than clamped.
pub fn probs_from_g2(n: f64, g2_zero: f64) -> Result<ExtractedProbs> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("mean photon {n} must be finite and >= 0")));
    }
    if !(g2_zero >= 0.0 && g2_zero.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "g2(0) {g2_zero} must be finite and >= 0"
        )));
    }
    let p2 = n * n * g2_zero / 2.0;
    let p1 = n - n * n * g2_zero;
    let p0 = 1.0 - p1 - p2;
    for (name, p) in [("P0", p0), ("P1", p1), ("P2", p2)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InconsistentExtraction(format!(
                "{name} = {p} outside [0, 1] for n = {n}, g2(0) = {g2_zero}"
            )));
        }
    }
    Ok(ExtractedProbs { mean_photon: n, p0, p1, p2, p3_bound: None })
}

/// Upper bound on the three-photon probability: `g³(0) n³ / 6`.
pub fn p3_bound(n: f64, g3_zero: f64) -> f64 {
    g3_zero * n * n * n / 6.0
}

/// Full inversion from measured inputs.
pub fn extract(input: &ExtractionInput) -> Result<ExtractedProbs> {
    input.validate()?;
    let n = mean_photon(
        input.counts_per_second,
        input.repetition_period,
        input.total_efficiency,
    )?;
    let mut probs = probs_from_g2(n, input.g2_zero)?;
    probs.p3_bound = input.g3_zero.map(|g3| p3_bound(n, g3));
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_photon_reference_values() {
        // 3.18e-4 detected photons per pulse at total efficiency 6.75e-4.
        let tau = 13e-9;
        let rate = 3.18e-4 / tau;
        assert_abs_diff_eq!(mean_photon(rate, tau, 6.75e-4).unwrap(), 0.4711111111, epsilon = 1e-9);
        assert_eq!(mean_photon(0.0, tau, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(mean_photon(1.0 / tau, tau, 1.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mean_photon_input_validation() {
        assert!(mean_photon(-1.0, 13e-9, 0.5).is_err());
        assert!(mean_photon(1.0, 0.0, 0.5).is_err());
        assert!(mean_photon(1.0, 13e-9, 0.0).is_err());
        assert!(mean_photon(1.0, 13e-9, 1.5).is_err());
        assert!(mean_photon_implausible(3.2));
        assert!(!mean_photon_implausible(0.5));
    }

    #[test]
    fn probs_reference_point() {
        let p = probs_from_g2(0.471, 0.977).unwrap();
        assert_abs_diff_eq!(p.p0, 0.6373693285, epsilon = 1e-9);
        assert_abs_diff_eq!(p.p1, 0.2542613430, epsilon = 1e-9);
        assert_abs_diff_eq!(p.p2, 0.1083693285, epsilon = 1e-9);
    }

    #[test]
    fn probs_ideal_pi_pulse_point() {
        let p = probs_from_g2(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(p.p0, 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p1, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p2, 0.125, epsilon = 1e-15);
    }

    #[test]
    fn probs_without_pairs() {
        let p = probs_from_g2(0.3, 0.0).unwrap();
        assert_abs_diff_eq!(p.p0, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p1, 0.3, epsilon = 1e-15);
        assert_eq!(p.p2, 0.0);
    }

    #[test]
    fn inconsistent_inputs_rejected_not_clamped() {
        // Strong bunching at high mean photon number forces P1 < 0.
        assert!(matches!(
            probs_from_g2(0.9, 2.0),
            Err(Error::InconsistentExtraction(_))
        ));
    }

    #[test]
    fn monotonicity_in_g2_and_n() {
        let mut last_p2 = -1.0;
        for k in 0..=10 {
            let g2 = k as f64 / 10.0;
            let p = probs_from_g2(0.4, g2).unwrap();
            assert!(p.p2 > last_p2);
            last_p2 = p.p2;
        }
        let mut last_p0 = 2.0;
        for k in 1..=10 {
            let n = 0.06 * k as f64;
            let p = probs_from_g2(n, 1.0).unwrap();
            assert!(p.p0 < last_p0);
            last_p0 = p.p0;
        }
    }

    #[test]
    fn p3_bound_reference_values() {
        let b = p3_bound(0.471, 0.09);
        assert_abs_diff_eq!(b, 0.00156731, epsilon = 1e-7);
        assert!(b < 0.0016);
        assert_eq!(p3_bound(0.7, 0.0), 0.0);
        assert_abs_diff_eq!(p3_bound(1.0, 0.6), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn extract_end_to_end() {
        let tau = 13e-9;
        let input = ExtractionInput {
            counts_per_second: 3.18e-4 / tau,
            repetition_period: tau,
            total_efficiency: 6.75e-4,
            g2_zero: 0.977,
            g3_zero: Some(0.09),
        };
        let p = extract(&input).unwrap();
        assert_abs_diff_eq!(p.p0, 0.6372, epsilon = 5e-4);
        assert!(p.p3_bound.unwrap() < 0.0016);
    }
}
