//! Pure states as sparse amplitude maps over occupation vectors.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{
    check_unique_modes, expand_occupation, mode_index, plan_substitution, Ladder, MixedState,
    ModeLabel, SubstitutionRule, TruncationPolicy,
};
use crate::math;
use crate::{Error, Result};

/// A pure state over an ordered list of labeled modes.
///
/// Amplitudes are keyed by occupation vectors aligned with the mode
/// list. States produced by public constructors are normalized; ladder
/// operations and linear combinations deliberately return unnormalized
/// intermediates (annihilating the vacuum yields the zero vector, two
/// raises yield `sqrt(2)|2>`, and so on).
#[derive(Clone, Debug)]
pub struct PureState {
    modes: Vec<ModeLabel>,
    amps: BTreeMap<Vec<u8>, Complex64>,
    policy: TruncationPolicy,
    dropped: f64,
}

impl PureState {
    /// The vacuum over the given modes.
    pub fn vacuum(modes: Vec<ModeLabel>, policy: TruncationPolicy) -> Result<Self> {
        check_unique_modes(&modes)?;
        let mut amps = BTreeMap::new();
        amps.insert(alloc::vec![0u8; modes.len()], Complex64::new(1.0, 0.0));
        Ok(Self { modes, amps, policy, dropped: 0.0 })
    }

    /// A single occupation-basis ket `|occ>`.
    pub fn number_state(modes: Vec<ModeLabel>, occ: &[u8], policy: TruncationPolicy) -> Result<Self> {
        check_unique_modes(&modes)?;
        if occ.len() != modes.len() {
            return Err(Error::InvalidArgument(format!(
                "occupation length {} does not match {} modes",
                occ.len(),
                modes.len()
            )));
        }
        if let Some(&n) = occ.iter().find(|&&n| n > policy.max_photons()) {
            return Err(Error::InvalidArgument(format!(
                "occupation {n} exceeds cutoff {}",
                policy.max_photons()
            )));
        }
        let mut amps = BTreeMap::new();
        amps.insert(occ.to_vec(), Complex64::new(1.0, 0.0));
        Ok(Self { modes, amps, policy, dropped: 0.0 })
    }

    /// Build and normalize a state from explicit amplitudes.
    pub fn from_amplitudes<I>(
        modes: Vec<ModeLabel>,
        amplitudes: I,
        policy: TruncationPolicy,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, Complex64)>,
    {
        check_unique_modes(&modes)?;
        let mut amps: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, amp) in amplitudes {
            if occ.len() != modes.len() {
                return Err(Error::InvalidArgument(format!(
                    "occupation length {} does not match {} modes",
                    occ.len(),
                    modes.len()
                )));
            }
            if let Some(&n) = occ.iter().find(|&&n| n > policy.max_photons()) {
                return Err(Error::InvalidArgument(format!(
                    "occupation {n} exceeds cutoff {}",
                    policy.max_photons()
                )));
            }
            *amps.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut state = Self { modes, amps, policy, dropped: 0.0 };
        state.normalize()?;
        Ok(state)
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    /// Weight lost to truncation so far (sum of squared moduli of
    /// amplitudes dropped at the cutoff).
    pub fn dropped_weight(&self) -> f64 {
        self.dropped
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (&[u8], Complex64)> {
        self.amps.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn term_count(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sqr())
    }

    /// Rescale to unit norm. Global phase is left untouched.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n < 1e-150 {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / n;
        for a in self.amps.values_mut() {
            *a *= inv;
        }
        Ok(())
    }

    /// Apply a raising or lowering operator on one mode.
    ///
    /// Raising maps `|n> -> sqrt(n+1)|n+1>` and drops (while accounting)
    /// amplitudes that would exceed the cutoff; lowering maps
    /// `|n> -> sqrt(n)|n-1>`, so the vacuum component vanishes. The
    /// result is intentionally unnormalized.
    pub fn apply_ladder(&self, mode: ModeLabel, dir: Ladder) -> Result<Self> {
        let idx = mode_index(&self.modes, mode)?;
        let mut amps = BTreeMap::new();
        let mut dropped = self.dropped;
        for (occ, &amp) in &self.amps {
            match dir {
                Ladder::Raise => {
                    let n = occ[idx];
                    if n + 1 > self.policy.max_photons() {
                        dropped += ((n + 1) as f64) * amp.norm_sqr();
                        continue;
                    }
                    let mut k = occ.clone();
                    k[idx] = n + 1;
                    *amps.entry(k).or_insert(Complex64::new(0.0, 0.0)) +=
                        amp * math::sqrt((n + 1) as f64);
                }
                Ladder::Lower => {
                    let n = occ[idx];
                    if n == 0 {
                        continue;
                    }
                    let mut k = occ.clone();
                    k[idx] = n - 1;
                    *amps.entry(k).or_insert(Complex64::new(0.0, 0.0)) +=
                        amp * math::sqrt(n as f64);
                }
            }
        }
        Ok(Self { modes: self.modes.clone(), amps, policy: self.policy, dropped })
    }

    /// Tensor product with a state over disjoint modes.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.policy != other.policy {
            return Err(Error::InvalidArgument(
                "tensor factors must share a truncation policy".into(),
            ));
        }
        let mut modes = self.modes.clone();
        for &m in &other.modes {
            if modes.contains(&m) {
                return Err(Error::ModeCollision(m));
            }
            modes.push(m);
        }
        let mut amps = BTreeMap::new();
        for (ka, &va) in &self.amps {
            for (kb, &vb) in &other.amps {
                let mut k = ka.clone();
                k.extend_from_slice(kb);
                amps.insert(k, va * vb);
            }
        }
        Ok(Self { modes, amps, policy: self.policy, dropped: self.dropped + other.dropped })
    }

    /// Apply creation-operator substitutions (beam splitters, delays).
    pub fn substitute(&self, rules: &[SubstitutionRule]) -> Result<Self> {
        let plan = plan_substitution(&self.modes, rules)?;
        let mut amps: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, &amp) in &self.amps {
            for (key, a) in expand_occupation(occ, amp, &plan) {
                *amps.entry(key).or_insert(Complex64::new(0.0, 0.0)) += a;
            }
        }
        // Strip merged amplitudes that exceeded the cutoff.
        let cutoff = self.policy.max_photons();
        let mut dropped = self.dropped;
        amps.retain(|occ, amp| {
            if occ.iter().any(|&n| n > cutoff) {
                dropped += amp.norm_sqr();
                false
            } else {
                true
            }
        });
        Ok(Self { modes: plan.new_modes, amps, policy: self.policy, dropped })
    }

    /// Multiply every photon in `mode` by `e^{i phase}`.
    pub fn apply_phase(&self, mode: ModeLabel, phase: f64) -> Result<Self> {
        let idx = mode_index(&self.modes, mode)?;
        let mut amps = BTreeMap::new();
        for (occ, &amp) in &self.amps {
            let ph = Complex64::from_polar(1.0, phase * occ[idx] as f64);
            amps.insert(occ.clone(), amp * ph);
        }
        Ok(Self { modes: self.modes.clone(), amps, policy: self.policy, dropped: self.dropped })
    }

    pub fn relabel_mode(&self, from: ModeLabel, to: ModeLabel) -> Result<Self> {
        let idx = mode_index(&self.modes, from)?;
        if from != to && self.modes.contains(&to) {
            return Err(Error::ModeCollision(to));
        }
        let mut modes = self.modes.clone();
        modes[idx] = to;
        Ok(Self { modes, amps: self.amps.clone(), policy: self.policy, dropped: self.dropped })
    }

    /// Scale all amplitudes (linear-combination building block).
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut s = self.clone();
        for a in s.amps.values_mut() {
            *a *= factor;
        }
        s
    }

    /// Add another state over the identical mode list.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.modes != other.modes || self.policy != other.policy {
            return Err(Error::InvalidArgument(
                "states must share modes and policy to be added".into(),
            ));
        }
        let mut amps = self.amps.clone();
        for (occ, &amp) in &other.amps {
            *amps.entry(occ.clone()).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self {
            modes: self.modes.clone(),
            amps,
            policy: self.policy,
            dropped: self.dropped + other.dropped,
        })
    }

    /// `<n> = <psi|n|psi> / <psi|psi>`.
    pub fn expectation_number(&self, mode: ModeLabel) -> Result<f64> {
        let idx = mode_index(&self.modes, mode)?;
        let norm = self.norm_sqr();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let raw: f64 = self
            .amps
            .iter()
            .map(|(occ, amp)| occ[idx] as f64 * amp.norm_sqr())
            .sum();
        Ok(raw / norm)
    }

    /// Normally ordered moment `< Π m† Π m >` over a multiset of modes,
    /// computed as `|| Π m |psi> ||² / ||psi||²`.
    pub fn normally_ordered_moment(&self, modes: &[ModeLabel]) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let mut lowered = self.clone();
        for &m in modes {
            lowered = lowered.apply_ladder(m, Ladder::Lower)?;
        }
        Ok(lowered.norm_sqr() / norm)
    }

    pub fn normally_ordered_pair(&self, x: ModeLabel, y: ModeLabel) -> Result<f64> {
        self.normally_ordered_moment(&[x, y])
    }

    /// Density operator `|psi><psi|`.
    pub fn to_density(&self) -> MixedState {
        let mut elems = BTreeMap::new();
        for (kr, &vr) in &self.amps {
            for (kc, &vc) in &self.amps {
                elems.insert((kr.clone(), kc.clone()), vr * vc.conj());
            }
        }
        MixedState::from_parts(self.modes.clone(), elems, self.policy, self.dropped)
    }

    /// Trace out everything except `keep`; trace-preserving (the result
    /// trace equals this state's squared norm).
    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<MixedState> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("partial_trace keep set is empty".into()));
        }
        check_unique_modes(keep)?;
        let keep_idx: Vec<usize> = keep
            .iter()
            .map(|&m| mode_index(&self.modes, m))
            .collect::<Result<_>>()?;
        let rest_idx: Vec<usize> = (0..self.modes.len())
            .filter(|i| !keep_idx.contains(i))
            .collect();

        // Group amplitudes by the traced-out part: each group contributes
        // an outer product on the kept part.
        let mut groups: BTreeMap<Vec<u8>, Vec<(Vec<u8>, Complex64)>> = BTreeMap::new();
        for (occ, &amp) in &self.amps {
            let rest: Vec<u8> = rest_idx.iter().map(|&i| occ[i]).collect();
            let kept: Vec<u8> = keep_idx.iter().map(|&i| occ[i]).collect();
            groups.entry(rest).or_default().push((kept, amp));
        }
        let mut elems: BTreeMap<(Vec<u8>, Vec<u8>), Complex64> = BTreeMap::new();
        for (_, members) in groups {
            for (kr, vr) in &members {
                for (kc, vc) in &members {
                    *elems
                        .entry((kr.clone(), kc.clone()))
                        .or_insert(Complex64::new(0.0, 0.0)) += vr * vc.conj();
                }
            }
        }
        Ok(MixedState::from_parts(keep.to_vec(), elems, self.policy, self.dropped))
    }

    pub fn number_distribution(&self, mode: ModeLabel) -> Result<Vec<f64>> {
        let idx = mode_index(&self.modes, mode)?;
        let norm = self.norm_sqr();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let mut dist = alloc::vec![0.0; self.policy.max_photons() as usize + 1];
        for (occ, amp) in &self.amps {
            dist[occ[idx] as usize] += amp.norm_sqr() / norm;
        }
        Ok(dist)
    }

    pub fn measure_number_probabilities(&self, modes: &[ModeLabel]) -> Result<Vec<(Vec<u8>, f64)>> {
        let idx: Vec<usize> = modes
            .iter()
            .map(|&m| mode_index(&self.modes, m))
            .collect::<Result<_>>()?;
        let norm = self.norm_sqr();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let mut probs: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let outcome: Vec<u8> = idx.iter().map(|&i| occ[i]).collect();
            *probs.entry(outcome).or_insert(0.0) += amp.norm_sqr() / norm;
        }
        Ok(probs.into_iter().collect())
    }

    /// Project `modes` onto the photon-number `outcome`; returns the
    /// outcome probability and the normalized state of the remaining
    /// modes. The projected modes factor out exactly, so they are
    /// removed from the result.
    pub fn condition_on_outcome(&self, modes: &[ModeLabel], outcome: &[u8]) -> Result<(f64, Self)> {
        if modes.len() != outcome.len() {
            return Err(Error::InvalidArgument(
                "outcome length does not match measured mode count".into(),
            ));
        }
        let idx: Vec<usize> = modes
            .iter()
            .map(|&m| mode_index(&self.modes, m))
            .collect::<Result<_>>()?;
        let norm = self.norm_sqr();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let rest_idx: Vec<usize> = (0..self.modes.len()).filter(|i| !idx.contains(i)).collect();
        let rest_modes: Vec<ModeLabel> = rest_idx.iter().map(|&i| self.modes[i]).collect();

        let mut amps: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        let mut weight = 0.0;
        for (occ, &amp) in &self.amps {
            if idx.iter().zip(outcome).all(|(&i, &o)| occ[i] == o) {
                weight += amp.norm_sqr();
                let rest: Vec<u8> = rest_idx.iter().map(|&i| occ[i]).collect();
                *amps.entry(rest).or_insert(Complex64::new(0.0, 0.0)) += amp;
            }
        }
        let prob = weight / norm;
        if prob <= 0.0 {
            return Err(Error::InvalidArgument(
                "conditioning on a zero-probability outcome".into(),
            ));
        }
        let mut cond = Self { modes: rest_modes, amps, policy: self.policy, dropped: 0.0 };
        cond.normalize()?;
        Ok((prob, cond))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeName;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mode(name: ModeName, bin: i32) -> ModeLabel {
        ModeLabel::new(name, bin)
    }

    #[test]
    fn raise_on_vacuum_gives_one_photon() {
        let a = mode(ModeName::A, 0);
        let vac = PureState::vacuum(alloc::vec![a], TruncationPolicy::default()).unwrap();
        let one = vac.apply_ladder(a, Ladder::Raise).unwrap();
        assert_abs_diff_eq!(one.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(one.expectation_number(a).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lower_on_vacuum_is_zero_vector() {
        let a = mode(ModeName::A, 0);
        let vac = PureState::vacuum(alloc::vec![a], TruncationPolicy::default()).unwrap();
        let zero = vac.apply_ladder(a, Ladder::Lower).unwrap();
        assert_eq!(zero.norm_sqr(), 0.0);
        assert_eq!(zero.dropped_weight(), 0.0);
    }

    #[test]
    fn double_raise_gives_sqrt_two() {
        let a = mode(ModeName::A, 0);
        let vac = PureState::vacuum(alloc::vec![a], TruncationPolicy::default()).unwrap();
        let two = vac
            .apply_ladder(a, Ladder::Raise)
            .unwrap()
            .apply_ladder(a, Ladder::Raise)
            .unwrap();
        // sqrt(2)|2>, unnormalized.
        assert_abs_diff_eq!(two.norm_sqr(), 2.0, epsilon = 1e-15);
        let (occ, amp) = two.amplitudes().next().unwrap();
        assert_eq!(occ, &[2]);
        assert_abs_diff_eq!(amp.re, core::f64::consts::SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn raise_past_cutoff_reports_dropped_weight() {
        let a = mode(ModeName::A, 0);
        let policy = TruncationPolicy::new(1).unwrap();
        let one = PureState::number_state(alloc::vec![a], &[1], policy).unwrap();
        let clipped = one.apply_ladder(a, Ladder::Raise).unwrap();
        assert_eq!(clipped.norm_sqr(), 0.0);
        assert_abs_diff_eq!(clipped.dropped_weight(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn unknown_mode_is_a_lookup_error() {
        let a = mode(ModeName::A, 0);
        let b = mode(ModeName::B, 7);
        let vac = PureState::vacuum(alloc::vec![a], TruncationPolicy::default()).unwrap();
        assert_eq!(vac.apply_ladder(b, Ladder::Raise).unwrap_err(), Error::UnknownMode(b));
    }

    #[test]
    fn tensor_of_vacua_and_overlap_error() {
        let a = mode(ModeName::A, 0);
        let b = mode(ModeName::B, 0);
        let policy = TruncationPolicy::default();
        let va = PureState::vacuum(alloc::vec![a], policy).unwrap();
        let vb = PureState::vacuum(alloc::vec![b], policy).unwrap();
        let joint = va.tensor(&vb).unwrap();
        assert_eq!(joint.modes(), &[a, b]);
        assert_abs_diff_eq!(joint.norm(), 1.0, epsilon = 1e-15);
        assert_eq!(va.tensor(&va).unwrap_err(), Error::ModeCollision(a));
    }

    #[test]
    fn tensor_distributes_superpositions() {
        let a = mode(ModeName::A, 0);
        let b = mode(ModeName::A, 1);
        let policy = TruncationPolicy::default();
        let theta: f64 = 0.25 * core::f64::consts::PI;
        let mk = |m: ModeLabel| {
            PureState::from_amplitudes(
                alloc::vec![m],
                [
                    (alloc::vec![0], c((theta / 2.0).cos())),
                    (alloc::vec![1], c((theta / 2.0).sin())),
                ],
                policy,
            )
            .unwrap()
        };
        let joint = mk(a).tensor(&mk(b)).unwrap();
        assert_eq!(joint.term_count(), 4);
        assert_abs_diff_eq!(joint.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn three_bin_seed_train_norm_by_enumeration() {
        // Independent brute-force check: 2^3-term product state, norm 1.
        let policy = TruncationPolicy::default();
        let theta: f64 = 0.3 * core::f64::consts::PI;
        let (c0, c1) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let mut train = PureState::vacuum(alloc::vec![], policy).unwrap();
        for bin in 0..3 {
            let m = mode(ModeName::A, bin);
            let seed = PureState::from_amplitudes(
                alloc::vec![m],
                [(alloc::vec![0], c(c0)), (alloc::vec![1], c(c1))],
                policy,
            )
            .unwrap();
            train = train.tensor(&seed).unwrap();
        }
        assert_eq!(train.term_count(), 8);
        // Enumerate all 8 basis kets and re-sum the probability mass.
        let mut total = 0.0;
        for bits in 0..8u8 {
            let occ: Vec<u8> = (0..3).map(|i| (bits >> i) & 1).collect();
            let expect = (0..3)
                .map(|i| if occ[i] == 1 { c1 * c1 } else { c0 * c0 })
                .product::<f64>();
            let amp = train
                .amplitudes()
                .find(|(k, _)| *k == occ.as_slice())
                .map(|(_, a)| a.norm_sqr())
                .unwrap();
            assert_abs_diff_eq!(amp, expect, epsilon = 1e-14);
            total += amp;
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_like_state() {
        let e = mode(ModeName::E, 0);
        let f = mode(ModeName::F, 0);
        let policy = TruncationPolicy::default();
        let s = PureState::from_amplitudes(
            alloc::vec![e, f],
            [
                (alloc::vec![1, 0], c(core::f64::consts::FRAC_1_SQRT_2)),
                (alloc::vec![0, 1], c(core::f64::consts::FRAC_1_SQRT_2)),
            ],
            policy,
        )
        .unwrap();
        let rho = s.partial_trace(&[e]).unwrap();
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
        let dist = rho.number_distribution(e).unwrap();
        assert_abs_diff_eq!(dist[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dist[1], 0.5, epsilon = 1e-15);
        // Coherence must vanish after tracing the partner.
        assert_abs_diff_eq!(rho.element(&[0], &[1]).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_requires_nonempty_keep() {
        let e = mode(ModeName::E, 0);
        let s = PureState::vacuum(alloc::vec![e], TruncationPolicy::default()).unwrap();
        assert!(matches!(s.partial_trace(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn expectation_values() {
        let a = mode(ModeName::A, 0);
        let policy = TruncationPolicy::default();
        let one = PureState::number_state(alloc::vec![a], &[1], policy).unwrap();
        assert_abs_diff_eq!(one.expectation_number(a).unwrap(), 1.0, epsilon = 1e-15);
        let plus = PureState::from_amplitudes(
            alloc::vec![a],
            [(alloc::vec![0], c(1.0)), (alloc::vec![1], c(1.0))],
            policy,
        )
        .unwrap();
        assert_abs_diff_eq!(plus.expectation_number(a).unwrap(), 0.5, epsilon = 1e-15);
        // Seed at theta = 0.25 pi.
        let theta = 0.25 * core::f64::consts::PI;
        let seed = PureState::from_amplitudes(
            alloc::vec![a],
            [
                (alloc::vec![0], c((theta / 2.0).cos())),
                (alloc::vec![1], c((theta / 2.0).sin())),
            ],
            policy,
        )
        .unwrap();
        assert_abs_diff_eq!(
            seed.expectation_number(a).unwrap(),
            0.14644660940672624,
            epsilon = 1e-12
        );
    }

    #[test]
    fn normally_ordered_pairs() {
        let a = mode(ModeName::A, 0);
        let b = mode(ModeName::B, 0);
        let policy = TruncationPolicy::default();
        let two = PureState::number_state(alloc::vec![a], &[2], policy).unwrap();
        assert_abs_diff_eq!(two.normally_ordered_pair(a, a).unwrap(), 2.0, epsilon = 1e-15);
        let one_one = PureState::number_state(alloc::vec![a, b], &[1, 1], policy).unwrap();
        assert_abs_diff_eq!(one_one.normally_ordered_pair(a, b).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(one_one.normally_ordered_pair(b, a).unwrap(), 1.0, epsilon = 1e-15);
        let one = PureState::number_state(alloc::vec![a], &[1], policy).unwrap();
        assert_abs_diff_eq!(one.normally_ordered_pair(a, a).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ladder_chain_matches_expectation_number() {
        let a = mode(ModeName::A, 0);
        let policy = TruncationPolicy::default();
        for occ in 0..=3u8 {
            let s = PureState::number_state(alloc::vec![a], &[occ], policy).unwrap();
            let lowered = s.apply_ladder(a, Ladder::Lower).unwrap();
            assert_abs_diff_eq!(
                lowered.norm_sqr(),
                s.expectation_number(a).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn condition_on_outcome_splits_product_state() {
        let e = mode(ModeName::E, 0);
        let d = mode(ModeName::D, 0);
        let policy = TruncationPolicy::default();
        // (|0>_e + |1>_e)/sqrt2 ⊗ |1>_d
        let s = PureState::from_amplitudes(
            alloc::vec![e, d],
            [(alloc::vec![0, 1], c(1.0)), (alloc::vec![1, 1], c(1.0))],
            policy,
        )
        .unwrap();
        let (p, rest) = s.condition_on_outcome(&[e], &[1]).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        assert_eq!(rest.modes(), &[d]);
        assert_abs_diff_eq!(rest.expectation_number(d).unwrap(), 1.0, epsilon = 1e-15);
    }
}
