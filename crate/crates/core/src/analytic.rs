//! Closed-form photon statistics of the balanced interferometer.
//!
//! All expressions assume pure seeds and 50:50 splitters; the exact
//! oracle covers everything else numerically. Writing `s² = sin²(θ/2)`
//! and `c² = cos²(θ/2)`:
//!
//! populations
//!   `n_{e,f} = (s²/2)(1 ∓ c² cos φ)`
//!
//! autocorrelation at one output (the other is `φ -> φ + π`)
//!   `g²(0)    = 1 / (1 - c² cos φ)²`
//!   `g²(±1)   = (3 - 4 c² cos φ + 2 c² cos 2φ) / (4 (1 - c² cos φ)²)`
//!   `g²(|Δ|≥2)= 1`
//!
//! cross-correlation
//!   `g²(0) = 0`,
//!   `g²(±1) = (3 - 2 c² cos 2φ) / (4 (1 - c⁴ cos² φ))`,
//!   `1` beyond.
//!
//! single-source photon-number probabilities at one output
//!   `P1 = s⁴/4 + (s² c²/2)(1 - cos φ)`, `P2 = s⁴/8`, `P0` complement;
//!
//! dual-source (HOM) probabilities
//!   `P1 = s² c² (1 - cos φ)`, `P2 = s⁴/2`, `P0` complement.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

use core::f64::consts::PI;

/// Interferometer output port.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Output {
    E,
    F,
}

/// Which geometry a landscape refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    SingleMzi,
    DualHom,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::SingleMzi => "single_mzi",
            Model::DualHom => "dual_hom",
        }
    }
}

/// Photon-number probability triple at one output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonProbs {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

/// One grid point of a probability landscape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandscapePoint {
    pub theta: f64,
    pub phi: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub model: Model,
}

/// Kind of a two-bin correlation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrelationKind {
    AutoE,
    AutoF,
    Cross,
}

/// One evaluated correlation value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationPoint {
    pub theta: f64,
    pub phi: f64,
    pub delta: i32,
    pub value: f64,
    pub kind: CorrelationKind,
}

/// Extremal ranges of the probability triple over the (θ, φ) rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AccessibleRanges {
    pub p0: (f64, f64),
    pub p1: (f64, f64),
    pub p2: (f64, f64),
}

fn check_theta_closed(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("pulse area {theta} outside [0, pi]")));
    }
    Ok(())
}

fn check_theta_correlation(theta: f64) -> Result<()> {
    check_theta_closed(theta)?;
    if theta == 0.0 {
        // Zero driving: correlation normalization is 0/0.
        return Err(Error::UndefinedCorrelation);
    }
    Ok(())
}

fn half_angle_populations(theta: f64) -> (f64, f64) {
    let s = math::sin(theta / 2.0);
    let c = math::cos(theta / 2.0);
    (s * s, c * c)
}

/// Mean photon number at one output of the single-source MZI.
pub fn population(theta: f64, phi: f64, output: Output) -> Result<f64> {
    check_theta_closed(theta)?;
    let (s2, c2) = half_angle_populations(theta);
    let sign = match output {
        Output::E => -1.0,
        Output::F => 1.0,
    };
    Ok(s2 / 2.0 * (1.0 + sign * c2 * math::cos(phi)))
}

/// Normalized autocorrelation at one output, `delta` bins apart.
pub fn g2_auto(theta: f64, phi: f64, delta: i32, output: Output) -> Result<f64> {
    check_theta_correlation(theta)?;
    let phi_eff = match output {
        Output::E => phi,
        Output::F => phi + PI,
    };
    let (_, c2) = half_angle_populations(theta);
    let cos1 = math::cos(phi_eff);
    let denom = 1.0 - c2 * cos1;
    Ok(match delta.unsigned_abs() {
        0 => 1.0 / (denom * denom),
        1 => {
            let cos2 = math::cos(2.0 * phi_eff);
            (3.0 - 4.0 * c2 * cos1 + 2.0 * c2 * cos2) / (4.0 * denom * denom)
        }
        _ => 1.0,
    })
}

/// Normalized cross-correlation between the two outputs.
pub fn g2_cross(theta: f64, phi: f64, delta: i32) -> Result<f64> {
    check_theta_correlation(theta)?;
    let (_, c2) = half_angle_populations(theta);
    Ok(match delta.unsigned_abs() {
        0 => 0.0,
        1 => {
            let cos1 = math::cos(phi);
            let cos2 = math::cos(2.0 * phi);
            (3.0 - 2.0 * c2 * cos2) / (4.0 * (1.0 - c2 * c2 * cos1 * cos1))
        }
        _ => 1.0,
    })
}

/// Photon-number probabilities at one output of the single-source MZI.
pub fn probs_single(theta: f64, phi: f64) -> Result<PhotonProbs> {
    check_theta_closed(theta)?;
    let (s2, c2) = half_angle_populations(theta);
    let p2 = s2 * s2 / 8.0;
    let p1 = s2 * s2 / 4.0 + 0.5 * s2 * c2 * (1.0 - math::cos(phi));
    Ok(PhotonProbs { p0: 1.0 - p1 - p2, p1, p2 })
}

/// Photon-number probabilities at one output of the dual-source HOM
/// geometry.
pub fn probs_hom(theta: f64, phi: f64) -> Result<PhotonProbs> {
    check_theta_closed(theta)?;
    let (s2, c2) = half_angle_populations(theta);
    let p2 = s2 * s2 / 2.0;
    let p1 = s2 * c2 * (1.0 - math::cos(phi));
    Ok(PhotonProbs { p0: 1.0 - p1 - p2, p1, p2 })
}

/// Phase-scan fringe visibility `v = λ² sqrt(V) cos²(θ/2)`.
pub fn fringe_visibility(theta: f64, purity: f64, indistinguishability: f64) -> Result<f64> {
    check_theta_closed(theta)?;
    if !(0.0..=1.0).contains(&purity) {
        return Err(Error::InvalidArgument(format!("purity {purity} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&indistinguishability) {
        return Err(Error::InvalidArgument(format!(
            "indistinguishability {indistinguishability} outside [0, 1]"
        )));
    }
    let (_, c2) = half_angle_populations(theta);
    Ok(purity * purity * math::sqrt(indistinguishability) * c2)
}

/// Row-major probability landscape over the given grids.
pub fn landscape(theta_grid: &[f64], phi_grid: &[f64], model: Model) -> Result<Vec<LandscapePoint>> {
    if theta_grid.is_empty() || phi_grid.is_empty() {
        return Err(Error::InvalidArgument("landscape grids must be non-empty".into()));
    }
    let mut points = Vec::with_capacity(theta_grid.len() * phi_grid.len());
    for &theta in theta_grid {
        for &phi in phi_grid {
            let p = match model {
                Model::SingleMzi => probs_single(theta, phi)?,
                Model::DualHom => probs_hom(theta, phi)?,
            };
            points.push(LandscapePoint { theta, phi, p0: p.p0, p1: p.p1, p2: p.p2, model });
        }
    }
    Ok(points)
}

/// All three correlation kinds at one parameter point.
pub fn correlation_triple(theta: f64, phi: f64, delta: i32) -> Result<[CorrelationPoint; 3]> {
    Ok([
        CorrelationPoint {
            theta,
            phi,
            delta,
            value: g2_auto(theta, phi, delta, Output::E)?,
            kind: CorrelationKind::AutoE,
        },
        CorrelationPoint {
            theta,
            phi,
            delta,
            value: g2_auto(theta, phi, delta, Output::F)?,
            kind: CorrelationKind::AutoF,
        },
        CorrelationPoint {
            theta,
            phi,
            delta,
            value: g2_cross(theta, phi, delta)?,
            kind: CorrelationKind::Cross,
        },
    ])
}

/// Extrema of (P0, P1, P2) over θ ∈ [0, π], φ ∈ [0, 2π].
///
/// Dense grid scan at the requested resolution followed by
/// coordinate-wise golden-section refinement to 1e-4 in the parameters.
pub fn accessible_ranges(model: Model, resolution: usize) -> Result<AccessibleRanges> {
    if resolution < 100 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} too coarse (need >= 100 points per axis)"
        )));
    }
    let probs = move |theta: f64, phi: f64| -> PhotonProbs {
        match model {
            Model::SingleMzi => probs_single(theta, phi),
            Model::DualHom => probs_hom(theta, phi),
        }
        .expect("grid stays inside the valid domain")
    };
    let component = |p: PhotonProbs, k: usize| match k {
        0 => p.p0,
        1 => p.p1,
        _ => p.p2,
    };

    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for (k, range) in ranges.iter_mut().enumerate() {
        for &minimize in &[true, false] {
            // Grid argmin/argmax.
            let mut best = (0.0_f64, 0.0_f64, if minimize { f64::INFINITY } else { f64::NEG_INFINITY });
            for i in 0..resolution {
                let theta = PI * i as f64 / (resolution - 1) as f64;
                for j in 0..resolution {
                    let phi = 2.0 * PI * j as f64 / (resolution - 1) as f64;
                    let v = component(probs(theta, phi), k);
                    if (minimize && v < best.2) || (!minimize && v > best.2) {
                        best = (theta, phi, v);
                    }
                }
            }
            // Alternating golden-section passes around the best point.
            let (mut theta, mut phi, _) = best;
            let dtheta = PI / (resolution - 1) as f64;
            let dphi = 2.0 * PI / (resolution - 1) as f64;
            for _ in 0..4 {
                theta = golden_refine(
                    |t| {
                        let v = component(probs(t, phi), k);
                        if minimize { v } else { -v }
                    },
                    (theta - dtheta).max(0.0),
                    (theta + dtheta).min(PI),
                );
                phi = golden_refine(
                    |p| {
                        let v = component(probs(theta, p), k);
                        if minimize { v } else { -v }
                    },
                    (phi - dphi).max(0.0),
                    (phi + dphi).min(2.0 * PI),
                );
            }
            let v = component(probs(theta, phi), k);
            if minimize {
                range.0 = range.0.min(v);
            } else {
                range.1 = range.1.max(v);
            }
        }
    }
    Ok(AccessibleRanges { p0: ranges[0], p1: ranges[1], p2: ranges[2] })
}

/// Golden-section minimizer on [lo, hi] to width 1e-4.
fn golden_refine<Fx: Fn(f64) -> f64>(fx: Fx, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.6180339887498949;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = fx(c);
    let mut fd = fx(d);
    while hi - lo > 1e-4 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = fx(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = fx(d);
        }
    }
    0.5 * (lo + hi)
}
