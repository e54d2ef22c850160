//! Density operators as sparse maps over occupation-basis pairs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::eigen::hermitian_eigenvalues;
use super::{
    check_unique_modes, expand_occupation, mode_index, plan_substitution, Ladder, ModeLabel,
    SubstitutionRule, TruncationPolicy,
};
use crate::{Error, Result};

type Elems = BTreeMap<(Vec<u8>, Vec<u8>), Complex64>;

/// A mixed state (density operator) over an ordered list of labeled
/// modes, stored sparsely in the occupation basis.
#[derive(Clone, Debug)]
pub struct MixedState {
    modes: Vec<ModeLabel>,
    elems: Elems,
    policy: TruncationPolicy,
    dropped: f64,
}

impl MixedState {
    pub fn vacuum(modes: Vec<ModeLabel>, policy: TruncationPolicy) -> Result<Self> {
        check_unique_modes(&modes)?;
        let occ = alloc::vec![0u8; modes.len()];
        let mut elems = BTreeMap::new();
        elems.insert((occ.clone(), occ), Complex64::new(1.0, 0.0));
        Ok(Self { modes, elems, policy, dropped: 0.0 })
    }

    /// Diagonal density operator over a single mode.
    pub fn from_diagonal(mode: ModeLabel, probs: &[f64], policy: TruncationPolicy) -> Result<Self> {
        if probs.is_empty() || probs.len() > policy.max_photons() as usize + 1 {
            return Err(Error::InvalidArgument(format!(
                "diagonal length {} incompatible with cutoff {}",
                probs.len(),
                policy.max_photons()
            )));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if total < 1e-150 {
            return Err(Error::ZeroNorm);
        }
        let mut elems = BTreeMap::new();
        for (n, &p) in probs.iter().enumerate() {
            if p != 0.0 {
                let occ = alloc::vec![n as u8];
                elems.insert((occ.clone(), occ), Complex64::new(p / total, 0.0));
            }
        }
        Ok(Self { modes: alloc::vec![mode], elems, policy, dropped: 0.0 })
    }

    /// Build from explicit matrix elements; enforces Hermiticity within
    /// 1e-12 (relative to the largest element), symmetrizes exactly, and
    /// normalizes the trace to one.
    pub fn from_elements<I>(modes: Vec<ModeLabel>, elements: I, policy: TruncationPolicy) -> Result<Self>
    where
        I: IntoIterator<Item = ((Vec<u8>, Vec<u8>), Complex64)>,
    {
        check_unique_modes(&modes)?;
        let mut elems: Elems = BTreeMap::new();
        for ((r, c), v) in elements {
            if r.len() != modes.len() || c.len() != modes.len() {
                return Err(Error::InvalidArgument(
                    "element key length does not match mode count".into(),
                ));
            }
            if r.iter().chain(c.iter()).any(|&n| n > policy.max_photons()) {
                return Err(Error::InvalidArgument("occupation exceeds cutoff".into()));
            }
            *elems.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        let scale = elems
            .values()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let mut sym: Elems = BTreeMap::new();
        for ((r, c), v) in &elems {
            let mirror = elems
                .get(&(c.clone(), r.clone()))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            if (*v - mirror.conj()).norm() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "matrix not Hermitian at ({r:?}, {c:?})"
                )));
            }
            sym.insert((r.clone(), c.clone()), 0.5 * (*v + mirror.conj()));
        }
        let mut state = Self { modes, elems: sym, policy, dropped: 0.0 };
        state.normalize()?;
        Ok(state)
    }

    pub(crate) fn from_parts(
        modes: Vec<ModeLabel>,
        elems: Elems,
        policy: TruncationPolicy,
        dropped: f64,
    ) -> Self {
        Self { modes, elems, policy, dropped }
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn dropped_weight(&self) -> f64 {
        self.dropped
    }

    pub fn elements(&self) -> impl Iterator<Item = (&[u8], &[u8], Complex64)> {
        self.elems.iter().map(|((r, c), &v)| (r.as_slice(), c.as_slice(), v))
    }

    pub fn element(&self, row: &[u8], col: &[u8]) -> Complex64 {
        self.elems
            .get(&(row.to_vec(), col.to_vec()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.elems
            .iter()
            .filter(|((r, c), _)| r == c)
            .map(|(_, &v)| v)
            .sum()
    }

    /// `Tr(rho^2)`; equals `Σ |rho_{rc}|²` for Hermitian operators.
    pub fn purity(&self) -> f64 {
        self.elems.values().map(|v| v.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let t = self.trace().re;
        if t < 1e-150 {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / t;
        for v in self.elems.values_mut() {
            *v *= inv;
        }
        Ok(())
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for ((r, c), v) in &self.elems {
            let mirror = self.element(c, r);
            worst = worst.max((*v - mirror.conj()).norm());
        }
        worst
    }

    /// Sandwich a ladder operator: raising maps `rho -> a† rho a`,
    /// lowering maps `rho -> a rho a†`. Unnormalized by design; weight
    /// pushed past the cutoff by a raise is accounted in
    /// [`dropped_weight`](Self::dropped_weight).
    pub fn apply_ladder(&self, mode: ModeLabel, dir: Ladder) -> Result<Self> {
        let idx = mode_index(&self.modes, mode)?;
        // Exact trace after the sandwich, before truncation.
        let expected: f64 = self
            .elems
            .iter()
            .filter(|((r, c), _)| r == c)
            .map(|((r, _), v)| {
                let n = r[idx] as f64;
                let w = match dir {
                    Ladder::Raise => n + 1.0,
                    Ladder::Lower => n,
                };
                w * v.re
            })
            .sum();
        let mut elems: Elems = BTreeMap::new();
        for ((r, c), &v) in &self.elems {
            let (nr, nc) = (r[idx], c[idx]);
            match dir {
                Ladder::Raise => {
                    if nr + 1 > self.policy.max_photons() || nc + 1 > self.policy.max_photons() {
                        continue;
                    }
                    let mut kr = r.clone();
                    let mut kc = c.clone();
                    kr[idx] = nr + 1;
                    kc[idx] = nc + 1;
                    let w = (((nr + 1) as f64) * ((nc + 1) as f64)).sqrt_shim();
                    *elems.entry((kr, kc)).or_insert(Complex64::new(0.0, 0.0)) += v * w;
                }
                Ladder::Lower => {
                    if nr == 0 || nc == 0 {
                        continue;
                    }
                    let mut kr = r.clone();
                    let mut kc = c.clone();
                    kr[idx] = nr - 1;
                    kc[idx] = nc - 1;
                    let w = ((nr as f64) * (nc as f64)).sqrt_shim();
                    *elems.entry((kr, kc)).or_insert(Complex64::new(0.0, 0.0)) += v * w;
                }
            }
        }
        let actual: f64 = elems
            .iter()
            .filter(|((r, c), _)| r == c)
            .map(|(_, v)| v.re)
            .sum();
        let dropped = self.dropped + (expected - actual).max(0.0);
        Ok(Self { modes: self.modes.clone(), elems, policy: self.policy, dropped })
    }

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
        let mut elems: Elems = BTreeMap::new();
        for ((ra, ca), &va) in &self.elems {
            for ((rb, cb), &vb) in &other.elems {
                let mut r = ra.clone();
                r.extend_from_slice(rb);
                let mut c = ca.clone();
                c.extend_from_slice(cb);
                elems.insert((r, c), va * vb);
            }
        }
        Ok(Self { modes, elems, policy: self.policy, dropped: self.dropped + other.dropped })
    }

    /// Apply creation-operator substitutions as `U rho U†`.
    pub fn substitute(&self, rules: &[SubstitutionRule]) -> Result<Self> {
        let plan = plan_substitution(&self.modes, rules)?;
        let trace_in = self.trace().re;

        // Rows first, then columns with conjugated coefficients.
        let mut rowed: Elems = BTreeMap::new();
        for ((r, c), &v) in &self.elems {
            for (nr, a) in expand_occupation(r, v, &plan) {
                *rowed.entry((nr, c.clone())).or_insert(Complex64::new(0.0, 0.0)) += a;
            }
        }
        let mut elems: Elems = BTreeMap::new();
        for ((r, c), &v) in &rowed {
            for (nc, a) in expand_occupation(c, v.conj(), &plan) {
                *elems.entry((r.clone(), nc)).or_insert(Complex64::new(0.0, 0.0)) += a.conj();
            }
        }
        let cutoff = self.policy.max_photons();
        elems.retain(|(r, c), _| {
            r.iter().all(|&n| n <= cutoff) && c.iter().all(|&n| n <= cutoff)
        });
        let trace_out: f64 = elems
            .iter()
            .filter(|((r, c), _)| r == c)
            .map(|(_, v)| v.re)
            .sum();
        let dropped = self.dropped + (trace_in - trace_out).max(0.0);
        Ok(Self { modes: plan.new_modes, elems, policy: self.policy, dropped })
    }

    pub fn apply_phase(&self, mode: ModeLabel, phase: f64) -> Result<Self> {
        let idx = mode_index(&self.modes, mode)?;
        let mut elems: Elems = BTreeMap::new();
        for ((r, c), &v) in &self.elems {
            let dn = r[idx] as f64 - c[idx] as f64;
            let ph = Complex64::from_polar(1.0, phase * dn);
            elems.insert((r.clone(), c.clone()), v * ph);
        }
        Ok(Self { modes: self.modes.clone(), elems, policy: self.policy, dropped: self.dropped })
    }

    pub fn relabel_mode(&self, from: ModeLabel, to: ModeLabel) -> Result<Self> {
        let idx = mode_index(&self.modes, from)?;
        if from != to && self.modes.contains(&to) {
            return Err(Error::ModeCollision(to));
        }
        let mut modes = self.modes.clone();
        modes[idx] = to;
        Ok(Self { modes, elems: self.elems.clone(), policy: self.policy, dropped: self.dropped })
    }

    pub fn expectation_number(&self, mode: ModeLabel) -> Result<f64> {
        let idx = mode_index(&self.modes, mode)?;
        let t = self.trace().re;
        if t < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let raw: f64 = self
            .elems
            .iter()
            .filter(|((r, c), _)| r == c)
            .map(|((r, _), v)| r[idx] as f64 * v.re)
            .sum();
        Ok(raw / t)
    }

    /// `Tr[rho Π m† Π m] / Tr[rho]` over a multiset of modes, evaluated
    /// as the trace of the lowered sandwich `(Π m) rho (Π m)†`.
    pub fn normally_ordered_moment(&self, modes: &[ModeLabel]) -> Result<f64> {
        let t = self.trace().re;
        if t < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let mut lowered = self.clone();
        for &m in modes {
            lowered = lowered.apply_ladder(m, Ladder::Lower)?;
        }
        Ok(lowered.trace().re / t)
    }

    pub fn normally_ordered_pair(&self, x: ModeLabel, y: ModeLabel) -> Result<f64> {
        self.normally_ordered_moment(&[x, y])
    }

    /// Trace out everything except `keep`; preserves the trace exactly.
    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<Self> {
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
        let mut elems: Elems = BTreeMap::new();
        for ((r, c), &v) in &self.elems {
            // Off-diagonal in the traced-out sector contributes nothing.
            if rest_idx.iter().any(|&i| r[i] != c[i]) {
                continue;
            }
            let kr: Vec<u8> = keep_idx.iter().map(|&i| r[i]).collect();
            let kc: Vec<u8> = keep_idx.iter().map(|&i| c[i]).collect();
            *elems.entry((kr, kc)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        Ok(Self { modes: keep.to_vec(), elems, policy: self.policy, dropped: self.dropped })
    }

    pub fn number_distribution(&self, mode: ModeLabel) -> Result<Vec<f64>> {
        let idx = mode_index(&self.modes, mode)?;
        let t = self.trace().re;
        if t < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let mut dist = alloc::vec![0.0; self.policy.max_photons() as usize + 1];
        for ((r, c), v) in &self.elems {
            if r == c {
                dist[r[idx] as usize] += v.re / t;
            }
        }
        Ok(dist)
    }

    pub fn measure_number_probabilities(&self, modes: &[ModeLabel]) -> Result<Vec<(Vec<u8>, f64)>> {
        let idx: Vec<usize> = modes
            .iter()
            .map(|&m| mode_index(&self.modes, m))
            .collect::<Result<_>>()?;
        let t = self.trace().re;
        if t < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let mut probs: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for ((r, c), v) in &self.elems {
            if r == c {
                let outcome: Vec<u8> = idx.iter().map(|&i| r[i]).collect();
                *probs.entry(outcome).or_insert(0.0) += v.re / t;
            }
        }
        Ok(probs.into_iter().collect())
    }

    /// Project `modes` onto `outcome` and trace them out; returns the
    /// outcome probability and the normalized conditional state of the
    /// remaining modes.
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
        let t = self.trace().re;
        if t < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let rest_idx: Vec<usize> = (0..self.modes.len()).filter(|i| !idx.contains(i)).collect();
        let rest_modes: Vec<ModeLabel> = rest_idx.iter().map(|&i| self.modes[i]).collect();
        let mut elems: Elems = BTreeMap::new();
        let mut weight = 0.0;
        for ((r, c), &v) in &self.elems {
            let row_match = idx.iter().zip(outcome).all(|(&i, &o)| r[i] == o);
            let col_match = idx.iter().zip(outcome).all(|(&i, &o)| c[i] == o);
            if row_match && col_match {
                if r == c {
                    weight += v.re;
                }
                let kr: Vec<u8> = rest_idx.iter().map(|&i| r[i]).collect();
                let kc: Vec<u8> = rest_idx.iter().map(|&i| c[i]).collect();
                *elems.entry((kr, kc)).or_insert(Complex64::new(0.0, 0.0)) += v;
            }
        }
        let prob = weight / t;
        if prob <= 0.0 {
            return Err(Error::InvalidArgument(
                "conditioning on a zero-probability outcome".into(),
            ));
        }
        let mut cond = Self { modes: rest_modes, elems, policy: self.policy, dropped: 0.0 };
        cond.normalize()?;
        Ok((prob, cond))
    }

    /// Smallest eigenvalue, via dense Jacobi diagonalization. Meant for
    /// verification paths only; cost grows with the cube of the number
    /// of occupied basis states.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut basis: Vec<Vec<u8>> = Vec::new();
        for (r, c, _) in self.elements() {
            if !basis.iter().any(|b| b == r) {
                basis.push(r.to_vec());
            }
            if !basis.iter().any(|b| b == c) {
                basis.push(c.to_vec());
            }
        }
        basis.sort();
        let n = basis.len();
        if n == 0 {
            return 0.0;
        }
        let mut dense = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for (i, r) in basis.iter().enumerate() {
            for (j, c) in basis.iter().enumerate() {
                dense[i * n + j] = self.element(r, c);
            }
        }
        hermitian_eigenvalues(&mut dense, n)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Density-operator sanity check used by tests and debug paths:
    /// trace 1 within `tol`, Hermitian within `tol`, eigenvalues above
    /// the stated floor.
    pub fn verify_density(&self, tol: f64, eigen_floor: f64) -> Result<()> {
        let t = self.trace();
        if (t.re - 1.0).abs() > tol || t.im.abs() > tol {
            return Err(Error::InvalidArgument(format!("trace {t} not 1 within {tol:e}")));
        }
        let h = self.hermiticity_defect();
        if h > tol {
            return Err(Error::InvalidArgument(format!("hermiticity defect {h:e}")));
        }
        let min = self.min_eigenvalue();
        if min < eigen_floor {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

// f64::sqrt is unavailable in core; route through libm while keeping
// call sites tidy.
trait SqrtShim {
    fn sqrt_shim(self) -> f64;
}

impl SqrtShim for f64 {
    fn sqrt_shim(self) -> f64 {
        crate::math::sqrt(self)
    }
}
