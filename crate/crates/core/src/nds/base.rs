//! Driving flows on the base space.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of the base space and its group action.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseKind<S> {
    /// A single point; the system is autonomous.
    TrivialPoint,
    /// The circle `[origin, origin + period)` with `theta_t p = p + t (mod period)`.
    PeriodicCircle { period: S, origin: S },
    /// A finite set `{0, .., n-1}` with integer time; `shift[i]` is the image of `i`
    /// under the unit-time map.
    FiniteSet { shift: Vec<usize> },
    /// The real line with translation `theta_t p = p + t`. The window `[lo, hi)`
    /// is only used when the base is sampled.
    Line { lo: S, hi: S },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseFlow<S> {
    pub kind: BaseKind<S>,
    pub label: String,
}

impl<S: Real> BaseFlow<S> {
    pub fn trivial() -> Self {
        BaseFlow {
            kind: BaseKind::TrivialPoint,
            label: "point".into(),
        }
    }

    pub fn periodic(period: S) -> Result<Self> {
        Self::periodic_from(period, S::zero())
    }

    pub fn periodic_from(period: S, origin: S) -> Result<Self> {
        if !(period > S::zero()) || !period.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidInput(format!(
                "periodic base needs a positive finite period, got {period}"
            )));
        }
        Ok(BaseFlow {
            kind: BaseKind::PeriodicCircle { period, origin },
            label: format!("circle(period={period})"),
        })
    }

    pub fn finite(shift: Vec<usize>) -> Result<Self> {
        let n = shift.len();
        if n == 0 {
            return Err(Error::InvalidInput("finite base must be nonempty".into()));
        }
        let mut seen = vec![false; n];
        for &j in &shift {
            if j >= n || seen[j] {
                return Err(Error::InvalidInput(format!(
                    "finite base shift {shift:?} is not a permutation"
                )));
            }
            seen[j] = true;
        }
        Ok(BaseFlow {
            label: format!("finite(size={n})"),
            kind: BaseKind::FiniteSet { shift },
        })
    }

    pub fn line(lo: S, hi: S) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "line base window needs lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok(BaseFlow {
            kind: BaseKind::Line { lo, hi },
            label: format!("line[{lo},{hi})"),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `theta_t p`. Time may be negative; every supported base flow is a group.
    /// For a finite base, `t` is rounded to the nearest integer.
    pub fn shift(&self, p: S, t: S) -> S {
        match &self.kind {
            BaseKind::TrivialPoint => S::zero(),
            BaseKind::PeriodicCircle { period, origin } => {
                let mut r = (p - *origin + t) % *period;
                if r < S::zero() {
                    r += *period;
                }
                // `r` can round up to `period` when it was a tiny negative number.
                if r >= *period {
                    r = S::zero();
                }
                *origin + r
            }
            BaseKind::Line { .. } => p + t,
            BaseKind::FiniteSet { shift } => {
                let steps = t.round().to_i64().unwrap_or(0);
                let start = p.round().to_usize().unwrap_or(0).min(shift.len() - 1);
                S::from_usize_lossy(permutation_power(shift, start, steps))
            }
        }
    }

    /// Distance between base points, respecting the circle for periodic bases.
    pub fn distance(&self, a: S, b: S) -> S {
        match &self.kind {
            BaseKind::PeriodicCircle { period, .. } => {
                let d = ((a - b) % *period).abs();
                d.min(*period - d)
            }
            _ => (a - b).abs(),
        }
    }
}

/// Image of `start` under the `steps`-th power of `perm` (negative steps use the inverse).
pub fn permutation_power(perm: &[usize], start: usize, steps: i64) -> usize {
    let mut cycle = vec![start];
    let mut j = perm[start];
    while j != start {
        cycle.push(j);
        j = perm[j];
    }
    let len = cycle.len() as i64;
    cycle[steps.rem_euclid(len) as usize]
}
