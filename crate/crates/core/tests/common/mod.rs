//! Shared helpers for the statistical integration suites.

#![allow(dead_code)]

use timebin_core::correlator::{
    g2_histogram, normalize_side_peaks, CoincidenceHistogram, DEFAULT_BASELINE_WINDOW,
};
use timebin_core::sampler::TimeTagRecord;

/// A normalized g²(Δ = 0) estimate with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct G2Estimate {
    pub value: f64,
    pub stderr: f64,
    pub central_counts: u64,
    pub baseline: f64,
}

/// Estimate g²(0) from a tag stream using the default side-peak window,
/// with a Poisson error model for both the central peak and the
/// baseline mean.
pub fn estimate_g2_zero(tags: &[TimeTagRecord], det_a: u32, det_b: u32) -> G2Estimate {
    let hist = g2_histogram(tags, det_a, det_b, DEFAULT_BASELINE_WINDOW.1).expect("sorted stream");
    g2_zero_from_histogram(&hist)
}

pub fn g2_zero_from_histogram(hist: &CoincidenceHistogram) -> G2Estimate {
    let norm = normalize_side_peaks(hist, DEFAULT_BASELINE_WINDOW).expect("baseline present");
    let c0 = hist.counts(0);
    let (lo, hi) = DEFAULT_BASELINE_WINDOW;
    let cells = 2.0 * (hi - lo + 1) as f64;
    let baseline_total = norm.baseline * cells;
    let value = norm.central();
    // var(c0)/baseline² + value² · var(baseline mean)/baseline²
    let var = (c0.max(1) as f64) / (norm.baseline * norm.baseline)
        + value * value / baseline_total;
    G2Estimate { value, stderr: var.sqrt(), central_counts: c0, baseline: norm.baseline }
}

/// Detected tag count on one detector.
pub fn tags_on(tags: &[TimeTagRecord], detector: u32) -> u64 {
    tags.iter().filter(|t| t.detector == detector).count() as u64
}

pub fn assert_within_sigma(label: &str, measured: f64, expected: f64, sigma: f64, n_sigma: f64) {
    let dev = (measured - expected).abs();
    assert!(
        dev <= n_sigma * sigma,
        "{label}: measured {measured:.6}, expected {expected:.6}, |dev| {dev:.3e} > {n_sigma} x sigma {sigma:.3e}"
    );
}
