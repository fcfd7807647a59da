//! Fixed-step classical Runge-Kutta integration of time-dependent vector fields.

use crate::error::{Error, Result};
use crate::nds::base::BaseFlow;
use crate::scalar::{norm, Real};

/// Vector field `f(p_t, x)` evaluated at the current base point `p_t = theta_t p`.
pub type FieldFn<S> = dyn Fn(S, &[S], &mut [S]) + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::Config(format!("unknown integrator method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSettings<S> {
    pub step: S,
    pub method: Method,
}

impl<S: Real> Default for IntegratorSettings<S> {
    fn default() -> Self {
        IntegratorSettings {
            step: S::lit(1e-3),
            method: Method::Rk4,
        }
    }
}

/// Scratch buffers for one integration; reuse across calls to avoid allocation.
#[derive(Clone, Debug, Default)]
pub struct Workspace<S> {
    k1: Vec<S>,
    k2: Vec<S>,
    k3: Vec<S>,
    k4: Vec<S>,
    tmp: Vec<S>,
}

impl<S: Real> Workspace<S> {
    pub fn new(dim: usize) -> Self {
        let z = vec![S::zero(); dim];
        Workspace {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    fn ensure(&mut self, dim: usize) {
        if self.k1.len() != dim {
            *self = Self::new(dim);
        }
    }
}

fn rk4_step<S: Real>(
    field: &FieldFn<S>,
    base: &BaseFlow<S>,
    p: S,
    t: S,
    h: S,
    x: &mut [S],
    ws: &mut Workspace<S>,
) {
    let half = h * S::lit(0.5);
    let p0 = base.shift(p, t);
    let pm = base.shift(p, t + half);
    let p1 = base.shift(p, t + h);

    field(p0, x, &mut ws.k1);
    for i in 0..x.len() {
        ws.tmp[i] = x[i] + half * ws.k1[i];
    }
    field(pm, &ws.tmp, &mut ws.k2);
    for i in 0..x.len() {
        ws.tmp[i] = x[i] + half * ws.k2[i];
    }
    field(pm, &ws.tmp, &mut ws.k3);
    for i in 0..x.len() {
        ws.tmp[i] = x[i] + h * ws.k3[i];
    }
    field(p1, &ws.tmp, &mut ws.k4);
    let sixth = h / S::lit(6.0);
    for i in 0..x.len() {
        x[i] += sixth * (ws.k1[i] + S::lit(2.0) * (ws.k2[i] + ws.k3[i]) + ws.k4[i]);
    }
}

/// Integrates `x` in place from base point `p` over `[0, t]` with step `h`,
/// finishing with a partial step. Fails with `Diverged` as soon as the state
/// norm exceeds `blowup` or stops being finite.
#[allow(clippy::too_many_arguments)]
pub fn integrate<S: Real>(
    field: &FieldFn<S>,
    base: &BaseFlow<S>,
    settings: &IntegratorSettings<S>,
    p: S,
    x: &mut [S],
    t: S,
    blowup: S,
    ws: &mut Workspace<S>,
) -> Result<()> {
    ws.ensure(x.len());
    let h = settings.step;
    let full = (t / h).floor().to_usize().unwrap_or(0);
    let mut now = S::zero();
    for k in 0..full {
        rk4_step(field, base, p, now, h, x, ws);
        now = S::from_usize_lossy(k + 1) * h;
        check_bound(x, now, blowup)?;
    }
    let rest = t - now;
    // Skip partial steps that are pure rounding noise.
    if rest > h * S::lit(1e-9) {
        rk4_step(field, base, p, now, rest, x, ws);
        check_bound(x, t, blowup)?;
    }
    Ok(())
}

fn check_bound<S: Real>(x: &[S], t: S, blowup: S) -> Result<()> {
    let n = norm(x);
    if !n.is_finite() || n > blowup {
        return Err(Error::Diverged {
            t: t.to_f64_lossy(),
            norm: n.to_f64_lossy(),
            bound: blowup.to_f64_lossy(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_: f64, x: &[f64], dx: &mut [f64]) {
        dx[0] = -x[0];
    }

    #[test]
    fn exponential_decay_is_accurate() {
        let base = BaseFlow::trivial();
        let mut x = [1.0];
        let mut ws = Workspace::new(1);
        integrate(&decay, &base, &IntegratorSettings::default(), 0.0, &mut x, 2.0, 1e8, &mut ws)
            .unwrap();
        assert!((x[0] - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn partial_final_step() {
        let base = BaseFlow::trivial();
        let s = IntegratorSettings { step: 0.3, method: Method::Rk4 };
        let mut x = [1.0];
        let mut ws = Workspace::new(1);
        integrate(&decay, &base, &s, 0.0, &mut x, 1.0, 1e8, &mut ws).unwrap();
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn blowup_is_reported() {
        let grow = |_: f64, x: &[f64], dx: &mut [f64]| dx[0] = x[0] * x[0];
        let base = BaseFlow::trivial();
        let mut x = [1.0];
        let mut ws = Workspace::new(1);
        let err = integrate(&grow, &base, &IntegratorSettings::default(), 0.0, &mut x, 2.0, 1e8, &mut ws)
            .unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn zero_time_is_identity() {
        let base = BaseFlow::trivial();
        let mut x = [0.7];
        let mut ws = Workspace::new(1);
        integrate(&decay, &base, &IntegratorSettings::default(), 0.0, &mut x, 0.0, 1e8, &mut ws)
            .unwrap();
        assert_eq!(x[0], 0.7);
    }
}
