//! Coincidence analysis of time-tag streams.
//!
//! Counts pairs (and triples) of detection events at integer bin
//! offsets, normalizes by the mean of the uncorrelated side peaks
//! (|Δ| >= 2, where the model guarantees unit correlation), and
//! extracts the derived figures: HOM visibility from the suppressed
//! central cross-peak and fringe visibility from phase-scan fits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::sampler::TimeTagRecord;
use crate::{Error, Result};

/// Default side-peak window: 2 <= |Δ| <= 20.
pub const DEFAULT_BASELINE_WINDOW: (i64, i64) = (2, 20);

/// Second-order coincidence histogram over bin offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoincidenceHistogram {
    pub detector_a: u32,
    pub detector_b: u32,
    pub max_delta: i64,
    /// Total bins spanned by the analyzed stream (metadata).
    pub total_bins: u64,
    counts: BTreeMap<i64, u64>,
}

impl CoincidenceHistogram {
    pub fn counts(&self, delta: i64) -> u64 {
        self.counts.get(&delta).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(&d, &c)| (d, c))
    }

    /// Commutative merge of histograms from independent streams.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.detector_a != other.detector_a
            || self.detector_b != other.detector_b
            || self.max_delta != other.max_delta
        {
            return Err(Error::InvalidArgument(
                "histograms to merge must share detectors and delta range".into(),
            ));
        }
        for (&d, &c) in &other.counts {
            *self.counts.entry(d).or_insert(0) += c;
        }
        self.total_bins += other.total_bins;
        Ok(())
    }
}

/// Third-order coincidence histogram over offset pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleHistogram {
    pub detectors: (u32, u32, u32),
    pub max_delta: i64,
    pub total_bins: u64,
    counts: BTreeMap<(i64, i64), u64>,
}

impl TripleHistogram {
    pub fn counts(&self, delta1: i64, delta2: i64) -> u64 {
        self.counts.get(&(delta1, delta2)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), u64)> + '_ {
        self.counts.iter().map(|(&d, &c)| (d, c))
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.detectors != other.detectors || self.max_delta != other.max_delta {
            return Err(Error::InvalidArgument(
                "histograms to merge must share detectors and delta range".into(),
            ));
        }
        for (&d, &c) in &other.counts {
            *self.counts.entry(d).or_insert(0) += c;
        }
        self.total_bins += other.total_bins;
        Ok(())
    }
}

fn check_sorted(tags: &[TimeTagRecord]) -> Result<()> {
    for (i, pair) in tags.windows(2).enumerate() {
        if pair[1].bin < pair[0].bin {
            return Err(Error::UnsortedTags { index: i + 1 });
        }
    }
    Ok(())
}

fn span_bins(tags: &[TimeTagRecord]) -> u64 {
    match (tags.first(), tags.last()) {
        (Some(a), Some(b)) => (b.bin - a.bin) as u64 + 1,
        _ => 0,
    }
}

/// Count pairs `(tag on A at bin i, tag on B at bin i + Δ)` for
/// |Δ| <= max_delta. With `det_a == det_b` self-pairs are excluded, so
/// the zero-delay cell counts ordered pairs of distinct tags.
pub fn g2_histogram(
    tags: &[TimeTagRecord],
    det_a: u32,
    det_b: u32,
    max_delta: i64,
) -> Result<CoincidenceHistogram> {
    if max_delta < 2 {
        return Err(Error::InvalidArgument(format!(
            "max_delta {max_delta} leaves no uncorrelated side peaks (need >= 2)"
        )));
    }
    check_sorted(tags)?;
    let bins_a: Vec<i64> = tags.iter().filter(|t| t.detector == det_a).map(|t| t.bin as i64).collect();
    let bins_b: Vec<i64> = tags.iter().filter(|t| t.detector == det_b).map(|t| t.bin as i64).collect();

    let mut counts: BTreeMap<i64, u64> = (-max_delta..=max_delta).map(|d| (d, 0)).collect();
    let mut lo = 0usize;
    for &a in &bins_a {
        while lo < bins_b.len() && bins_b[lo] < a - max_delta {
            lo += 1;
        }
        let mut j = lo;
        while j < bins_b.len() && bins_b[j] <= a + max_delta {
            *counts.get_mut(&(bins_b[j] - a)).expect("delta within range") += 1;
            j += 1;
        }
    }
    if det_a == det_b {
        // Each tag paired with itself landed in the zero-delay cell.
        *counts.get_mut(&0).expect("zero in range") -= bins_a.len() as u64;
    }
    Ok(CoincidenceHistogram {
        detector_a: det_a,
        detector_b: det_b,
        max_delta,
        total_bins: span_bins(tags),
        counts,
    })
}

/// Count triples with offsets `(Δ1, Δ2)` of detectors 1 and 2 relative
/// to detector 0. Detectors must be pairwise distinct.
pub fn g3_histogram(
    tags: &[TimeTagRecord],
    det0: u32,
    det1: u32,
    det2: u32,
    max_delta: i64,
) -> Result<TripleHistogram> {
    if max_delta < 2 {
        return Err(Error::InvalidArgument(format!(
            "max_delta {max_delta} leaves no uncorrelated cells (need >= 2)"
        )));
    }
    if det0 == det1 || det0 == det2 || det1 == det2 {
        return Err(Error::InvalidArgument(
            "third-order histogram needs three distinct detectors".into(),
        ));
    }
    check_sorted(tags)?;
    let mut by_bin: [BTreeMap<i64, u64>; 3] = [BTreeMap::new(), BTreeMap::new(), BTreeMap::new()];
    for t in tags {
        let slot = if t.detector == det0 {
            0
        } else if t.detector == det1 {
            1
        } else if t.detector == det2 {
            2
        } else {
            continue;
        };
        *by_bin[slot].entry(t.bin as i64).or_insert(0) += 1;
    }
    let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for d1 in -max_delta..=max_delta {
        for d2 in -max_delta..=max_delta {
            counts.insert((d1, d2), 0);
        }
    }
    for (&bin0, &c0) in &by_bin[0] {
        for d1 in -max_delta..=max_delta {
            let c1 = by_bin[1].get(&(bin0 + d1)).copied().unwrap_or(0);
            if c1 == 0 {
                continue;
            }
            for d2 in -max_delta..=max_delta {
                let c2 = by_bin[2].get(&(bin0 + d2)).copied().unwrap_or(0);
                if c2 == 0 {
                    continue;
                }
                *counts.get_mut(&(d1, d2)).expect("delta within range") += c0 * c1 * c2;
            }
        }
    }
    Ok(TripleHistogram {
        detectors: (det0, det1, det2),
        max_delta,
        total_bins: span_bins(tags),
        counts,
    })
}

/// Correlations normalized to the uncorrelated side-peak baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedCorrelations {
    pub baseline: f64,
    pub window: (i64, i64),
    g2: BTreeMap<i64, f64>,
}

impl NormalizedCorrelations {
    pub fn value(&self, delta: i64) -> Option<f64> {
        self.g2.get(&delta).copied()
    }

    /// Zero-delay value.
    pub fn central(&self) -> f64 {
        self.g2.get(&0).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.g2.iter().map(|(&d, &v)| (d, v))
    }
}

/// Divide the histogram by the mean of the counts over the window
/// `lo <= |Δ| <= hi`.
pub fn normalize_side_peaks(
    hist: &CoincidenceHistogram,
    window: (i64, i64),
) -> Result<NormalizedCorrelations> {
    let (lo, hi) = window;
    if lo < 2 || hi < lo || hi > hist.max_delta {
        return Err(Error::InvalidArgument(format!(
            "baseline window [{lo}, {hi}] must satisfy 2 <= lo <= hi <= max_delta ({})",
            hist.max_delta
        )));
    }
    let cells: Vec<i64> = (lo..=hi).flat_map(|d| [d, -d]).collect();
    let total: u64 = cells.iter().map(|&d| hist.counts(d)).sum();
    let baseline = total as f64 / cells.len() as f64;
    if baseline <= 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    let g2 = hist
        .iter()
        .map(|(d, c)| (d, c as f64 / baseline))
        .collect();
    Ok(NormalizedCorrelations { baseline, window, g2 })
}

/// Normalized third-order correlations.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedTriple {
    pub baseline: f64,
    pub window: (i64, i64),
    g3: BTreeMap<(i64, i64), f64>,
}

impl NormalizedTriple {
    pub fn value(&self, delta1: i64, delta2: i64) -> Option<f64> {
        self.g3.get(&(delta1, delta2)).copied()
    }

    pub fn central(&self) -> f64 {
        self.value(0, 0).unwrap_or(0.0)
    }
}

/// Normalize a triple histogram by the mean over fully uncorrelated
/// cells: `lo <= |Δ1|, |Δ2| <= hi` and `|Δ1 - Δ2| >= lo` (two
/// detections sharing a bin offset are still pair-correlated).
pub fn normalize_triple(hist: &TripleHistogram, window: (i64, i64)) -> Result<NormalizedTriple> {
    let (lo, hi) = window;
    if lo < 2 || hi < lo || hi > hist.max_delta {
        return Err(Error::InvalidArgument(format!(
            "baseline window [{lo}, {hi}] must satisfy 2 <= lo <= hi <= max_delta ({})",
            hist.max_delta
        )));
    }
    let mut total = 0u64;
    let mut cells = 0u64;
    for ((d1, d2), c) in hist.iter() {
        if d1.abs() >= lo && d1.abs() <= hi && d2.abs() >= lo && d2.abs() <= hi && (d1 - d2).abs() >= lo
        {
            total += c;
            cells += 1;
        }
    }
    if cells == 0 {
        return Err(Error::InvalidArgument("empty triple baseline window".into()));
    }
    let baseline = total as f64 / cells as f64;
    if baseline <= 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    let g3 = hist.iter().map(|(d, c)| (d, c as f64 / baseline)).collect();
    Ok(NormalizedTriple { baseline, window, g3 })
}

/// HOM visibility from the suppressed central cross-correlation peak:
/// `V = 1 - 2 g²_ef(0)`.
pub fn hom_visibility(norm: &NormalizedCorrelations) -> f64 {
    1.0 - 2.0 * norm.central()
}

/// Same, straight from raw counts.
pub fn hom_visibility_raw(central_counts: f64, baseline: f64) -> Result<f64> {
    if baseline <= 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    Ok(1.0 - 2.0 * central_counts / baseline)
}

/// One phase-scan sample: simultaneous counts at both outputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeSample {
    pub phase: f64,
    pub counts_e: f64,
    pub counts_f: f64,
}

/// Least-squares sinusoid fit of a phase scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    pub visibility: f64,
    pub offset_e: f64,
    pub offset_f: f64,
    pub amplitude_e: f64,
    pub amplitude_f: f64,
    /// Root-mean-square residual of the two fits on the normalized
    /// counts.
    pub residual: f64,
}

/// Fit `a + b cos(phase) + c sin(phase)` to the normalized counts of
/// both outputs and evaluate the fringe visibility
/// `(n*_e - n*_f)/(n*_e + n*_f)` at the fringe extremum, which reduces
/// to `(m_e + m_f)/(a_e + a_f)` with `m = sqrt(b² + c²)`.
pub fn fringe_scan(samples: &[FringeSample]) -> Result<FringeFit> {
    if samples.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "{} samples are too few for a fringe fit (need >= 4)",
            samples.len()
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in samples {
        lo = lo.min(s.phase);
        hi = hi.max(s.phase);
    }
    let span = hi - lo;
    let mean_gap = span / (samples.len() - 1) as f64;
    let tau = 2.0 * core::f64::consts::PI;
    if span + 2.0 * mean_gap < tau {
        return Err(Error::InvalidArgument(format!(
            "phase span {span:.3} rad does not cover one full fringe period"
        )));
    }

    // Normalize as counts / (mean_e + mean_f).
    let n = samples.len() as f64;
    let mean_e: f64 = samples.iter().map(|s| s.counts_e).sum::<f64>() / n;
    let mean_f: f64 = samples.iter().map(|s| s.counts_f).sum::<f64>() / n;
    let denom = mean_e + mean_f;
    if denom <= 0.0 {
        return Err(Error::FitError { residual: f64::INFINITY });
    }

    let fit = |values: &mut dyn Iterator<Item = (f64, f64)>| -> Result<(f64, f64, f64, f64)> {
        // Normal equations for y = a + b cos + c sin.
        let mut m = [[0.0f64; 3]; 3];
        let mut v = [0.0f64; 3];
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (phase, y) in values {
            let basis = [1.0, math::cos(phase), math::sin(phase)];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += basis[i] * basis[j];
                }
                v[i] += basis[i] * y;
            }
            pts.push((phase, y));
        }
        let x = solve3(m, v).ok_or(Error::FitError { residual: f64::INFINITY })?;
        let mut ss = 0.0;
        for (phase, y) in &pts {
            let pred = x[0] + x[1] * math::cos(*phase) + x[2] * math::sin(*phase);
            ss += (y - pred) * (y - pred);
        }
        Ok((x[0], x[1], x[2], ss / pts.len() as f64))
    };

    let (a_e, b_e, c_e, ss_e) =
        fit(&mut samples.iter().map(|s| (s.phase, s.counts_e / denom)))?;
    let (a_f, b_f, c_f, ss_f) =
        fit(&mut samples.iter().map(|s| (s.phase, s.counts_f / denom)))?;
    let m_e = math::sqrt(b_e * b_e + c_e * c_e);
    let m_f = math::sqrt(b_f * b_f + c_f * c_f);
    if a_e + a_f <= 0.0 {
        return Err(Error::FitError { residual: math::sqrt(ss_e + ss_f) });
    }
    Ok(FringeFit {
        visibility: (m_e + m_f) / (a_e + a_f),
        offset_e: a_e,
        offset_f: a_f,
        amplitude_e: m_e,
        amplitude_f: m_f,
        residual: math::sqrt((ss_e + ss_f) / 2.0),
    })
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
#[allow(clippy::needless_range_loop)] // rows r and col alias the same matrix
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, &x| acc.max(math::fabs(x)))
        .max(1e-300);
    for col in 0..3 {
        let pivot = (col..3).fold(col, |best, r| {
            if math::fabs(m[r][col]) > math::fabs(m[best][col]) {
                r
            } else {
                best
            }
        });
        if math::fabs(m[pivot][col]) < 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for r in (col + 1)..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            v[r] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let mut s = v[r];
        for c in (r + 1)..3 {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}
