//! Brute-force exact observables from the full multi-bin output state.
//!
//! Everything here is computed by building the joint state of a short
//! pulse train and evaluating moments directly — no closed forms enter.
//! This module is the ground truth the analytic layer is validated
//! against, and the only route for regimes without printed formulas
//! (mixed seeds, unbalanced splitters, third-order correlations).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::{self, Output};
use crate::fock::{ModeLabel, ModeName, State};
use crate::interferometer::{build_pulse_train_state, interior_bins, MziConfig, MAX_TRAIN_BINS};
use crate::seed::{seed_mixed, SeedSpec, SeedState};
use crate::{Error, Result};

/// Default train length for a correlator reaching `delta` bins.
pub fn default_train_bins(delta: i32) -> usize {
    delta.unsigned_abs() as usize + 4
}

fn check_capacity(n_bins: usize, delta_max: i32) -> Result<()> {
    let needed = delta_max.unsigned_abs() as usize + 3;
    if n_bins < needed {
        return Err(Error::InvalidArgument(alloc::format!(
            "train of {n_bins} bins has no interior pair at offset {delta_max}"
        )));
    }
    if n_bins > MAX_TRAIN_BINS {
        return Err(Error::Capacity { requested: n_bins, max: MAX_TRAIN_BINS });
    }
    Ok(())
}

fn check_two_photon_cutoff(seed: &SeedState) -> Result<()> {
    let cutoff = seed.mixed().policy().max_photons();
    if cutoff < 2 {
        return Err(Error::CutoffTooLow { needed: 2, actual: cutoff });
    }
    Ok(())
}

fn out_mode(output: Output, bin: i32) -> ModeLabel {
    match output {
        Output::E => ModeLabel::new(ModeName::E, bin),
        Output::F => ModeLabel::new(ModeName::F, bin),
    }
}

/// Exact interior-bin population at one output.
pub fn exact_population(
    seed: &SeedState,
    cfg: &MziConfig,
    output: Output,
    n_bins: usize,
) -> Result<f64> {
    check_capacity(n_bins, 0)?;
    let state = build_pulse_train_state(n_bins, seed, cfg)?;
    let mut total = 0.0;
    let mut count = 0;
    for bin in interior_bins(n_bins) {
        total += state.expectation_number(out_mode(output, bin))?;
        count += 1;
    }
    Ok(total / count as f64)
}

/// Exact normalized two-bin correlation between outputs `x` and `y` at
/// offset `delta`, averaged over all valid interior bin pairs.
pub fn exact_g2(
    seed: &SeedState,
    cfg: &MziConfig,
    delta: i32,
    outputs: (Output, Output),
    n_bins: usize,
) -> Result<f64> {
    check_capacity(n_bins, delta)?;
    check_two_photon_cutoff(seed)?;
    if seed.mean_photon() == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    let state = build_pulse_train_state(n_bins, seed, cfg)?;
    let mut total = 0.0;
    let mut count = 0;
    for i in interior_bins(n_bins) {
        let j = i - delta;
        if !(1..n_bins as i32).contains(&j) {
            continue;
        }
        let x = out_mode(outputs.0, i);
        let y = out_mode(outputs.1, j);
        let num = state.normally_ordered_moment(&[x, y])?;
        let den = state.expectation_number(x)? * state.expectation_number(y)?;
        total += num / den;
        count += 1;
    }
    debug_assert!(count > 0);
    Ok(total / count as f64)
}

/// Exact normalized three-bin correlation at one output, with bins at
/// offsets `0, delta1, delta2` from the reference bin.
pub fn exact_g3(
    seed: &SeedState,
    cfg: &MziConfig,
    delta1: i32,
    delta2: i32,
    output: Output,
    n_bins: usize,
) -> Result<f64> {
    let span = delta1.abs().max(delta2.abs());
    check_capacity(n_bins, span)?;
    check_two_photon_cutoff(seed)?;
    if seed.mean_photon() == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    let state = build_pulse_train_state(n_bins, seed, cfg)?;
    let mut total = 0.0;
    let mut count = 0;
    for i in interior_bins(n_bins) {
        let (j, k) = (i + delta1, i + delta2);
        if !(1..n_bins as i32).contains(&j) || !(1..n_bins as i32).contains(&k) {
            continue;
        }
        let (mi, mj, mk) = (out_mode(output, i), out_mode(output, j), out_mode(output, k));
        let num = state.normally_ordered_moment(&[mi, mj, mk])?;
        let den = state.expectation_number(mi)?
            * state.expectation_number(mj)?
            * state.expectation_number(mk)?;
        total += num / den;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "no interior triple at offsets ({delta1}, {delta2}) in {n_bins} bins"
        )));
    }
    Ok(total / count as f64)
}

/// Exact interior-bin photon-number distribution (P0..P3) at one
/// output, from the diagonal of the reduced one-mode state.
pub fn exact_photon_dist(
    seed: &SeedState,
    cfg: &MziConfig,
    output: Output,
    n_bins: usize,
) -> Result<[f64; 4]> {
    check_capacity(n_bins, 0)?;
    check_two_photon_cutoff(seed)?;
    let state = build_pulse_train_state(n_bins, seed, cfg)?;
    let mid = (n_bins / 2) as i32;
    let mode = out_mode(output, mid);
    let reduced = state.partial_trace(&[mode])?;
    let dist = reduced.number_distribution(mode)?;
    let mut out = [0.0; 4];
    for (n, &p) in dist.iter().enumerate() {
        if n < 3 {
            out[n] = p;
        } else {
            // Everything at or above three photons is folded into P3;
            // this stays identically zero for protocol states.
            out[3] += p;
        }
    }
    Ok(out)
}

/// One oracle-vs-analytic comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub theta: f64,
    pub phi: f64,
    pub delta: Option<i32>,
    pub exact: f64,
    /// Closed-form value, when one exists for the configuration.
    pub analytic: Option<f64>,
    pub deviation: Option<f64>,
}

impl OracleReport {
    fn new(
        quantity: &str,
        theta: f64,
        phi: f64,
        delta: Option<i32>,
        exact: f64,
        analytic: Option<f64>,
    ) -> Self {
        Self {
            quantity: String::from(quantity),
            theta,
            phi,
            delta,
            exact,
            analytic,
            deviation: analytic.map(|a| (exact - a).abs()),
        }
    }
}

/// Grid over which [`verify_analytic`] compares oracle and closed forms.
#[derive(Clone, Debug)]
pub struct VerifyGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub deltas: Vec<i32>,
    /// Template for the seed at each point; `theta` is overridden per
    /// grid point. Purity below one disables the closed forms.
    pub seed_template: SeedSpec,
    pub cfg: MziConfig,
}

impl VerifyGrid {
    /// The acceptance grid: θ ∈ {0.25, 0.5, 0.75, 1}π, φ ∈ {0, 0.12,
    /// 0.5, 0.87, 1}π, Δ ∈ {0, 1, 2}.
    pub fn acceptance() -> Self {
        let pi = core::f64::consts::PI;
        Self {
            thetas: vec![0.25 * pi, 0.5 * pi, 0.75 * pi, pi],
            phis: vec![0.0, 0.12 * pi, 0.5 * pi, 0.87 * pi, pi],
            deltas: vec![0, 1, 2],
            seed_template: SeedSpec::new(pi).expect("pi is a valid pulse area"),
            cfg: MziConfig::default(),
        }
    }
}

/// Outcome of a verification run.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub reports: Vec<OracleReport>,
    pub tolerance: f64,
    /// Indices into `reports` whose deviation exceeded the tolerance.
    pub failures: Vec<usize>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluate every oracle quantity across the grid and compare against
/// the closed forms where they apply (pure seed, balanced splitters).
pub fn verify_analytic(grid: &VerifyGrid, tolerance: f64) -> Result<VerifyOutcome> {
    if grid.thetas.is_empty() || grid.phis.is_empty() {
        return Err(Error::InvalidArgument("verification grid is empty".into()));
    }
    let closed_forms_apply =
        grid.seed_template.purity == 1.0 && grid.cfg.r1 == 0.5 && grid.cfg.r2 == 0.5;
    let mut reports = Vec::new();
    for &theta in &grid.thetas {
        let spec = SeedSpec { theta, ..grid.seed_template };
        let seed = seed_mixed(&spec)?;
        for &phi in &grid.phis {
            let cfg = grid.cfg.with_phase(phi);
            let n_pop = default_train_bins(0);
            let dist_e = exact_photon_dist(&seed, &cfg, Output::E, n_pop)?;
            let probs = if closed_forms_apply {
                Some(analytic::probs_single(theta, phi)?)
            } else {
                None
            };
            for (name, output) in [("population_e", Output::E), ("population_f", Output::F)] {
                let exact = exact_population(&seed, &cfg, output, n_pop)?;
                let an = if closed_forms_apply {
                    Some(analytic::population(theta, phi, output)?)
                } else {
                    None
                };
                reports.push(OracleReport::new(name, theta, phi, None, exact, an));
            }
            for (name, value, an) in [
                ("p0", dist_e[0], probs.map(|p| p.p0)),
                ("p1", dist_e[1], probs.map(|p| p.p1)),
                ("p2", dist_e[2], probs.map(|p| p.p2)),
            ] {
                reports.push(OracleReport::new(name, theta, phi, None, value, an));
            }
            for &delta in &grid.deltas {
                let n = default_train_bins(delta);
                if theta == 0.0 {
                    continue;
                }
                let gee = exact_g2(&seed, &cfg, delta, (Output::E, Output::E), n)?;
                let gff = exact_g2(&seed, &cfg, delta, (Output::F, Output::F), n)?;
                let gef = exact_g2(&seed, &cfg, delta, (Output::E, Output::F), n)?;
                let (aee, aff, aef) = if closed_forms_apply {
                    (
                        Some(analytic::g2_auto(theta, phi, delta, Output::E)?),
                        Some(analytic::g2_auto(theta, phi, delta, Output::F)?),
                        Some(analytic::g2_cross(theta, phi, delta)?),
                    )
                } else {
                    (None, None, None)
                };
                reports.push(OracleReport::new("g2_ee", theta, phi, Some(delta), gee, aee));
                reports.push(OracleReport::new("g2_ff", theta, phi, Some(delta), gff, aff));
                reports.push(OracleReport::new("g2_ef", theta, phi, Some(delta), gef, aef));
            }
        }
    }
    let failures = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.deviation.map(|d| d > tolerance).unwrap_or(false))
        .map(|(i, _)| i)
        .collect();
    Ok(VerifyOutcome { reports, tolerance, failures })
}

/// Exact photon-number distribution of one output of the dual-source
/// geometry (single shot, no train needed).
pub fn exact_hom_photon_dist(
    seed_a: &SeedState,
    seed_b: &SeedState,
    cfg: &crate::interferometer::HomConfig,
    output: Output,
) -> Result<[f64; 4]> {
    check_two_photon_cutoff(seed_a)?;
    let state = crate::interferometer::hom_output_state(seed_a, seed_b, cfg)?;
    let mode = out_mode(output, 0);
    let dist = state.number_distribution(mode)?;
    let mut out = [0.0; 4];
    for (n, &p) in dist.iter().enumerate() {
        if n < 3 {
            out[n] = p;
        } else {
            out[3] += p;
        }
    }
    Ok(out)
}

/// Convenience: interior-bin joint (n_e, n_f) distribution, used by the
/// sampler convergence tests.
pub fn exact_joint_distribution(
    seed: &SeedState,
    cfg: &MziConfig,
    n_bins: usize,
) -> Result<Vec<(Vec<u8>, f64)>> {
    check_capacity(n_bins, 0)?;
    let state: State = build_pulse_train_state(n_bins, seed, cfg)?;
    let mid = (n_bins / 2) as i32;
    state.measure_number_probabilities(&[
        ModeLabel::new(ModeName::E, mid),
        ModeLabel::new(ModeName::F, mid),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::HomConfig;
    use crate::seed::seed_pure;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    #[test]
    fn population_matches_closed_form() {
        let seed = seed_pure(PI).unwrap();
        let cfg = MziConfig::new(1.234);
        assert_abs_diff_eq!(
            exact_population(&seed, &cfg, Output::E, 4).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        let seed = seed_pure(0.25 * PI).unwrap();
        let cfg = MziConfig::new(0.0);
        assert_abs_diff_eq!(
            exact_population(&seed, &cfg, Output::E, 4).unwrap(),
            0.0107233047033631,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dephased_seed_population() {
        let spec = SeedSpec::new(PI / 2.0).unwrap().with_purity(0.0);
        let seed = seed_mixed(&spec).unwrap();
        let cfg = MziConfig::new(0.0);
        assert_abs_diff_eq!(
            exact_population(&seed, &cfg, Output::E, 3).unwrap(),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cross_correlation_vanishes_at_zero_delay() {
        for &(theta, phi) in &[(0.25 * PI, 0.0), (0.5 * PI, 0.87 * PI), (PI, 0.4)] {
            let seed = seed_pure(theta).unwrap();
            let cfg = MziConfig::new(phi);
            let g = exact_g2(&seed, &cfg, 0, (Output::E, Output::F), 4).unwrap();
            assert_abs_diff_eq!(g, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn autocorrelation_matches_formula_at_bunching_point() {
        let seed = seed_pure(0.25 * PI).unwrap();
        let cfg = MziConfig::new(0.87 * PI);
        let g = exact_g2(&seed, &cfg, 0, (Output::E, Output::E), 4).unwrap();
        assert_abs_diff_eq!(g, 0.3144311577804855, epsilon = 1e-10);
    }

    #[test]
    fn far_bins_are_uncorrelated() {
        let seed = seed_pure(0.5 * PI).unwrap();
        let cfg = MziConfig::new(0.3 * PI);
        let g = exact_g2(&seed, &cfg, 2, (Output::E, Output::E), 6).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn results_independent_of_train_length() {
        let seed = seed_pure(0.7 * PI).unwrap();
        let cfg = MziConfig::new(0.41 * PI);
        let base = exact_g2(&seed, &cfg, 1, (Output::E, Output::E), 4).unwrap();
        for n in 5..=7 {
            let g = exact_g2(&seed, &cfg, 1, (Output::E, Output::E), n).unwrap();
            assert_abs_diff_eq!(g, base, epsilon = 1e-12);
        }
        let pop4 = exact_population(&seed, &cfg, Output::E, 4).unwrap();
        for n in 5..=7 {
            let p = exact_population(&seed, &cfg, Output::E, n).unwrap();
            assert_abs_diff_eq!(p, pop4, epsilon = 1e-12);
        }
    }

    #[test]
    fn g3_zero_delay_vanishes() {
        for &(theta, phi) in &[(0.25 * PI, 0.12 * PI), (PI, 0.5 * PI)] {
            let seed = seed_pure(theta).unwrap();
            let cfg = MziConfig::new(phi);
            let g = exact_g3(&seed, &cfg, 0, 0, Output::E, 4).unwrap();
            assert_abs_diff_eq!(g, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn g3_factorizes_across_independent_bins() {
        let seed = seed_pure(PI).unwrap();
        let cfg = MziConfig::new(0.3);
        // Pair at the same bin, third two bins away: g3 = g2(0) * 1.
        let g = exact_g3(&seed, &cfg, 0, 2, Output::E, 6).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-10);
        // Fully separated triple.
        let g = exact_g3(&seed, &cfg, 2, 4, Output::E, 7).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn photon_dist_pi_pulse() {
        let seed = seed_pure(PI).unwrap();
        let cfg = MziConfig::new(0.9);
        let d = exact_photon_dist(&seed, &cfg, Output::E, 5).unwrap();
        assert_abs_diff_eq!(d[0], 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(d[2], 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(d[3], 0.0, epsilon = 1e-15);
        let vac = exact_photon_dist(&seed_pure(0.0).unwrap(), &cfg, Output::E, 4).unwrap();
        assert_eq!(vac, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn photon_dist_matches_closed_form_generic_point() {
        let seed = seed_pure(0.5 * PI).unwrap();
        let cfg = MziConfig::new(0.5 * PI);
        let d = exact_photon_dist(&seed, &cfg, Output::E, 5).unwrap();
        let p = analytic::probs_single(0.5 * PI, 0.5 * PI).unwrap();
        assert_abs_diff_eq!(d[0], p.p0, epsilon = 1e-10);
        assert_abs_diff_eq!(d[1], p.p1, epsilon = 1e-10);
        assert_abs_diff_eq!(d[2], p.p2, epsilon = 1e-10);
    }

    #[test]
    fn hom_dist_matches_closed_form() {
        let seed = seed_pure(0.6 * PI).unwrap();
        let cfg = HomConfig::new(0.8);
        let d = exact_hom_photon_dist(&seed, &seed, &cfg, Output::E).unwrap();
        let p = analytic::probs_hom(0.6 * PI, 0.8).unwrap();
        assert_abs_diff_eq!(d[0], p.p0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], p.p1, epsilon = 1e-12);
        assert_abs_diff_eq!(d[2], p.p2, epsilon = 1e-12);
    }

    #[test]
    fn verify_grid_pi_pulse_has_no_failures() {
        let pi = PI;
        let grid = VerifyGrid {
            thetas: vec![pi],
            phis: vec![0.0, 0.12 * pi, 0.5 * pi, 0.87 * pi, pi],
            deltas: vec![0, 1],
            seed_template: SeedSpec::new(pi).unwrap(),
            cfg: MziConfig::default(),
        };
        let outcome = verify_analytic(&grid, 1e-10).unwrap();
        assert!(outcome.passed(), "failures: {:?}", outcome.failures);
    }

    #[test]
    fn mixed_seed_reports_have_no_analytic_column() {
        let pi = PI;
        let grid = VerifyGrid {
            thetas: vec![0.5 * pi],
            phis: vec![0.3 * pi],
            deltas: vec![0],
            seed_template: SeedSpec::new(pi).unwrap().with_purity(0.5),
            cfg: MziConfig::default(),
        };
        let outcome = verify_analytic(&grid, 1e-10).unwrap();
        assert!(outcome.passed());
        assert!(!outcome.reports.is_empty());
        for r in &outcome.reports {
            assert!(r.analytic.is_none());
            assert!(r.deviation.is_none());
        }
    }

    #[test]
    fn capacity_errors() {
        let seed = seed_pure(PI).unwrap();
        let cfg = MziConfig::default();
        assert!(exact_g2(&seed, &cfg, 2, (Output::E, Output::E), 4).is_err());
        assert!(matches!(
            exact_population(&seed, &cfg, Output::E, 13),
            Err(Error::Capacity { .. })
        ));
        assert_eq!(
            exact_g2(&seed_pure(0.0).unwrap(), &cfg, 0, (Output::E, Output::E), 4),
            Err(Error::UndefinedCorrelation)
        );
    }
}
