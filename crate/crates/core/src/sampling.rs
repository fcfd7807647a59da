//! Base sampling compatible with a fixed time step.

use crate::error::{Error, Result};
use crate::nds::base::{permutation_power, BaseFlow, BaseKind};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct BaseSampling<S> {
    pub base: BaseFlow<S>,
    pub step: S,
    pub samples: Vec<S>,
    /// `theta_T samples[i] = samples[step_perm[i]]`.
    pub step_perm: Vec<usize>,
}

/// Samples `m` base points. `step` is required for the trivial base and optional
/// elsewhere, where it must agree with the sampling (a positive integer for
/// finite bases).
pub fn sample_base<S: Real>(base: &BaseFlow<S>, m: usize, step: Option<S>) -> Result<BaseSampling<S>> {
    if m == 0 {
        return Err(Error::IncompatibleSampling("sample count must be at least 1".into()));
    }
    let evenly = |lo: S, len: S| -> Result<(S, Vec<S>, Vec<usize>)> {
        let t = len / S::from_usize_lossy(m);
        if let Some(s) = step {
            if (s - t).abs() > S::lit(1e-12) * len {
                return Err(Error::IncompatibleSampling(format!(
                    "step {s} does not equal length/m = {t}"
                )));
            }
        }
        let samples = (0..m).map(|i| lo + S::from_usize_lossy(i) * t).collect();
        let perm = (0..m).map(|i| (i + 1) % m).collect();
        Ok((t, samples, perm))
    };
    let (t, samples, step_perm) = match &base.kind {
        BaseKind::TrivialPoint => {
            if m != 1 {
                return Err(Error::IncompatibleSampling(format!("trivial base needs m = 1, got {m}")));
            }
            let t = step.ok_or_else(|| {
                Error::IncompatibleSampling("trivial base needs an explicit time step".into())
            })?;
            (t, vec![S::zero()], vec![0])
        }
        BaseKind::PeriodicCircle { period, origin } => evenly(*origin, *period)?,
        BaseKind::Line { lo, hi } => evenly(*lo, *hi - *lo)?,
        BaseKind::FiniteSet { shift } => {
            if m != shift.len() {
                return Err(Error::IncompatibleSampling(format!(
                    "finite base of size {} needs m = size, got {m}",
                    shift.len()
                )));
            }
            let t = step.unwrap_or_else(S::one);
            let k = t.round();
            if (t - k).abs() > S::lit(1e-12) || k < S::one() {
                return Err(Error::IncompatibleSampling(format!(
                    "finite base needs a positive integer step, got {t}"
                )));
            }
            let k = k.to_i64().unwrap_or(1);
            let perm = (0..m).map(|i| permutation_power(shift, i, k)).collect();
            (S::from_i64(k).unwrap_or_else(S::one), (0..m).map(S::from_usize_lossy).collect(), perm)
        }
    };
    if !(t > S::zero()) || !t.is_finite() {
        return Err(Error::IncompatibleSampling(format!("time step must be positive, got {t}")));
    }
    Ok(BaseSampling {
        base: base.clone(),
        step: t,
        samples,
        step_perm,
    })
}

impl<S: Real> BaseSampling<S> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index `j` with `theta_{k T} samples[i] = samples[j]`.
    pub fn advance(&self, i: usize, k: usize) -> usize {
        (0..k).fold(i, |j, _| self.step_perm[j])
    }

    /// Index of the sample nearest to `p` in the base metric.
    pub fn nearest(&self, p: S) -> usize {
        let mut best = 0;
        let mut best_d = S::infinity();
        for (i, &q) in self.samples.iter().enumerate() {
            let d = self.base.distance(p, q);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}
