//! Cocycle systems: a base flow paired with an evaluator for `phi(t, p, x)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nds::base::BaseFlow;
use crate::nds::integrate::{integrate, FieldFn, IntegratorSettings, Workspace};
use crate::scalar::{norm, Real};

/// Closed-form cocycle `(t, p, x, out)`; writes `phi(t, p, x)` into `out`.
pub type ClosedFormFn<S> = dyn Fn(S, S, &[S], &mut [S]) + Send + Sync;

#[derive(Clone)]
pub enum Evaluator<S> {
    ClosedForm(Arc<ClosedFormFn<S>>),
    VectorField {
        field: Arc<FieldFn<S>>,
        integrator: IntegratorSettings<S>,
    },
}

impl<S: Real> Evaluator<S> {
    /// Integrator step, or `None` for closed forms.
    pub fn step(&self) -> Option<S> {
        match self {
            Evaluator::ClosedForm(_) => None,
            Evaluator::VectorField { integrator, .. } => Some(integrator.step),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Evaluator::ClosedForm(_) => "closed-form".into(),
            Evaluator::VectorField { integrator, .. } => {
                format!("{}:{}", integrator.method.tag(), integrator.step)
            }
        }
    }
}

impl<S> fmt::Debug for Evaluator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::ClosedForm(_) => f.write_str("ClosedForm"),
            Evaluator::VectorField { .. } => f.write_str("VectorField"),
        }
    }
}

pub const DEFAULT_BLOWUP: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct CocycleSystem<S> {
    pub name: String,
    pub base: BaseFlow<S>,
    pub dim: usize,
    /// Declared state window per axis.
    pub window: Vec<(S, S)>,
    /// Axes that are circle valued; their period is the window width.
    pub circular: Vec<bool>,
    pub evaluator: Evaluator<S>,
    pub blowup: S,
}

impl<S: Real> CocycleSystem<S> {
    pub fn new(
        name: impl Into<String>,
        base: BaseFlow<S>,
        window: Vec<(S, S)>,
        evaluator: Evaluator<S>,
    ) -> Result<Self> {
        let dim = window.len();
        if dim == 0 {
            return Err(Error::InvalidInput("state dimension must be positive".into()));
        }
        for (i, &(lo, hi)) in window.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::InvalidInput(format!("window axis {i}: need lo < hi")));
            }
        }
        if let Some(h) = evaluator.step() {
            if !(h > S::zero()) {
                return Err(Error::InvalidInput("integrator step must be positive".into()));
            }
        }
        Ok(CocycleSystem {
            name: name.into(),
            base,
            dim,
            circular: vec![false; dim],
            window,
            evaluator,
            blowup: S::lit(DEFAULT_BLOWUP),
        })
    }

    pub fn with_circular(mut self, circular: Vec<bool>) -> Self {
        assert_eq!(circular.len(), self.dim);
        self.circular = circular;
        self
    }

    pub fn with_blowup(mut self, bound: S) -> Self {
        self.blowup = bound;
        self
    }

    pub fn with_step(mut self, h: S) -> Self {
        if let Evaluator::VectorField { integrator, .. } = &mut self.evaluator {
            integrator.step = h;
        }
        self
    }

    /// `phi(t, p, x)`.
    pub fn evolve(&self, p: S, x: &[S], t: S) -> Result<Vec<S>> {
        let mut out = x.to_vec();
        let mut ws = Workspace::new(self.dim);
        self.evolve_in_place(p, &mut out, t, &mut ws)?;
        Ok(out)
    }

    /// In-place `phi(t, p, x)`, reusing `ws` for vector fields.
    pub fn evolve_in_place(&self, p: S, x: &mut [S], t: S, ws: &mut Workspace<S>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "state has dimension {}, system `{}` expects {}",
                x.len(),
                self.name,
                self.dim
            )));
        }
        if t < S::zero() || !t.is_finite() {
            return Err(Error::InvalidInput(format!("evolve needs finite t >= 0, got {t}")));
        }
        if t == S::zero() {
            return Ok(());
        }
        match &self.evaluator {
            Evaluator::ClosedForm(f) => {
                let input = x.to_vec();
                f(t, p, &input, x);
                let n = norm(x);
                if !n.is_finite() || n > self.blowup {
                    return Err(Error::Diverged {
                        t: t.to_f64_lossy(),
                        norm: n.to_f64_lossy(),
                        bound: self.blowup.to_f64_lossy(),
                    });
                }
                Ok(())
            }
            Evaluator::VectorField { field, integrator } => {
                integrate(field.as_ref(), &self.base, integrator, p, x, t, self.blowup, ws)
            }
        }
    }

    /// Distance in the state space; circular axes use the wrapped difference.
    pub fn state_distance(&self, a: &[S], b: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..self.dim {
            let mut d = (a[i] - b[i]).abs();
            if self.circular[i] {
                let w = self.window[i].1 - self.window[i].0;
                d = d % w;
                d = d.min(w - d);
            }
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Maps circular coordinates back into the window.
    pub fn wrap_state(&self, x: &mut [S]) {
        for i in 0..self.dim {
            if self.circular[i] {
                let (lo, hi) = self.window[i];
                let w = hi - lo;
                let mut r = (x[i] - lo) % w;
                if r < S::zero() {
                    r += w;
                }
                if r >= w {
                    r = S::zero();
                }
                x[i] = lo + r;
            }
        }
    }

    /// Whether `x` lies in the closed window (circular axes always do).
    pub fn in_window(&self, x: &[S]) -> bool {
        (0..self.dim).all(|i| self.circular[i] || (x[i] >= self.window[i].0 && x[i] <= self.window[i].1))
    }
}

/// `|phi(t+s, p, x) - phi(t, theta_s p, phi(s, p, x))|`.
pub fn cocycle_residual<S: Real>(sys: &CocycleSystem<S>, p: S, x: &[S], s: S, t: S) -> Result<S> {
    let direct = sys.evolve(p, x, t + s)?;
    let mid = sys.evolve(p, x, s)?;
    let composed = sys.evolve(sys.base.shift(p, s), &mid, t)?;
    Ok(sys.state_distance(&direct, &composed))
}

/// `|phi(t, p, x(p)) - x(theta_t p)|` for a candidate stationary solution `x_map`.
pub fn stationary_residual<S: Real, F>(sys: &CocycleSystem<S>, x_map: F, p: S, t: S) -> Result<S>
where
    F: Fn(S) -> Vec<S>,
{
    let image = sys.evolve(p, &x_map(p), t)?;
    Ok(sys.state_distance(&image, &x_map(sys.base.shift(p, t))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nds::integrate::Method;

    fn identity_field() -> CocycleSystem<f64> {
        let field: Arc<FieldFn<f64>> = Arc::new(|_, _, dx: &mut [f64]| dx.fill(0.0));
        CocycleSystem::new(
            "still",
            BaseFlow::trivial(),
            vec![(0.0, 1.0), (0.0, 1.0)],
            Evaluator::VectorField { field, integrator: IntegratorSettings::default() },
        )
        .unwrap()
    }

    #[test]
    fn negative_time_rejected() {
        let sys = identity_field();
        assert!(matches!(sys.evolve(0.0, &[0.5, 0.5], -1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn dimension_checked() {
        let sys = identity_field();
        assert!(sys.evolve(0.0, &[0.5], 1.0).is_err());
    }

    #[test]
    fn circular_distance_wraps() {
        let sys = identity_field().with_circular(vec![true, false]);
        let d = sys.state_distance(&[0.05, 0.5], &[0.95, 0.5]);
        assert!((d - 0.1).abs() < 1e-12);
        let mut x = [1.25, 0.5];
        sys.wrap_state(&mut x);
        assert!((x[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let field: Arc<FieldFn<f64>> = Arc::new(|_, _, dx: &mut [f64]| dx.fill(0.0));
        let ev = Evaluator::VectorField {
            field,
            integrator: IntegratorSettings { step: 0.0, method: Method::Rk4 },
        };
        assert!(CocycleSystem::new("x", BaseFlow::trivial(), vec![(0.0, 1.0)], ev).is_err());
    }
}
