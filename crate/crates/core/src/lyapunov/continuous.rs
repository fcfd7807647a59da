//! Trajectory-based `lambda`, `g` and `l` for a pair given as box unions.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nds::{CocycleSystem, Workspace};
use crate::scalar::Real;

fn distance_to_union<S: Real>(grid: &Grid<S>, x: &[S], boxes: &[usize]) -> Option<S> {
    boxes.iter().map(|&b| grid.distance_to_box(x, b)).reduce(S::min)
}

/// `d(x, A) / (d(x, A) + d(x, R))`, where a distance to an empty set counts as 1.
pub fn lambda_ratio<S: Real>(grid: &Grid<S>, x: &[S], a: &[usize], r: &[usize]) -> S {
    let da = distance_to_union(grid, x, a).unwrap_or_else(S::one);
    let dr = distance_to_union(grid, x, r).unwrap_or_else(S::one);
    let total = da + dr;
    if total == S::zero() {
        // Only possible on a face shared by an A box and an R box.
        return S::zero();
    }
    da / total
}

/// Parameters shared by the trajectory functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitSettings<S> {
    pub horizon: S,
    pub dt: S,
}

impl<S: Real> Default for OrbitSettings<S> {
    fn default() -> Self {
        OrbitSettings { horizon: S::lit(20.0), dt: S::lit(0.01) }
    }
}

impl<S: Real> OrbitSettings<S> {
    fn steps(&self) -> Result<usize> {
        if !(self.dt > S::zero()) || !(self.horizon >= S::zero()) {
            return Err(Error::InvalidInput("need dt > 0 and horizon >= 0".into()));
        }
        Ok((self.horizon / self.dt).round().to_usize().unwrap_or(0))
    }
}

/// `lambda` along the orbit at times `0, dt, .., count * dt`.
fn lambda_series<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    p: S,
    x: &[S],
    dt: S,
    count: usize,
    a: &[usize],
    r: &[usize],
) -> Result<Vec<S>> {
    let mut ws = Workspace::new(sys.dim);
    let mut cur = x.to_vec();
    let mut out = Vec::with_capacity(count + 1);
    out.push(lambda_ratio(grid, &cur, a, r));
    for k in 0..count {
        let pk = sys.base.shift(p, S::from_usize_lossy(k) * dt);
        sys.evolve_in_place(pk, &mut cur, dt, &mut ws)?;
        out.push(lambda_ratio(grid, &cur, a, r));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupG<S> {
    pub value: S,
    /// Largest jump of `lambda` between consecutive samples.
    pub sampling_slack: S,
}

/// `max lambda` over orbit samples on `[0, horizon]`.
pub fn sup_g<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    p: S,
    x: &[S],
    orbit: OrbitSettings<S>,
    a: &[usize],
    r: &[usize],
) -> Result<SupG<S>> {
    let n = orbit.steps()?;
    let lam = lambda_series(sys, grid, p, x, orbit.dt, n, a, r)?;
    let value = lam.iter().copied().fold(S::zero(), S::max);
    let sampling_slack = lam.windows(2).map(|w| (w[1] - w[0]).abs()).fold(S::zero(), S::max);
    Ok(SupG { value, sampling_slack })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LValue<S> {
    pub value: S,
    /// `e^-horizon`, the most the neglected tail can contribute.
    pub tail_bound: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint<S> {
    pub t: S,
    pub lambda: S,
    pub g: S,
    pub l_partial: S,
}

/// `g` at the samples of `[0, horizon]`, each a sliding max of `lambda` over the
/// next `horizon` time units.
fn g_series<S: Real>(lam: &[S], window: usize) -> Vec<S> {
    let count = lam.len() - window;
    let mut out = Vec::with_capacity(count);
    let mut dq: VecDeque<usize> = VecDeque::new();
    // Slide from the end so each g_k is the max over lam[k..=k+window].
    let mut rev = vec![S::zero(); count];
    for k in (0..lam.len()).rev() {
        while dq.back().is_some_and(|&j| lam[j] <= lam[k]) {
            dq.pop_back();
        }
        dq.push_back(k);
        while dq.front().is_some_and(|&j| j > k + window) {
            dq.pop_front();
        }
        if k < count {
            rev[k] = lam[*dq.front().expect("nonempty window")];
        }
    }
    out.extend(rev);
    out
}

/// Trace of `lambda`, `g` and the partial integral of `e^-t g` on `[0, horizon]`.
pub fn lyapunov_trace<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    p: S,
    x: &[S],
    orbit: OrbitSettings<S>,
    a: &[usize],
    r: &[usize],
) -> Result<Vec<TracePoint<S>>> {
    let n = orbit.steps()?;
    let lam = lambda_series(sys, grid, p, x, orbit.dt, 2 * n, a, r)?;
    let g = g_series(&lam, n);
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = S::zero();
    let half = S::lit(0.5) * orbit.dt;
    for k in 0..=n {
        let t = S::from_usize_lossy(k) * orbit.dt;
        if k > 0 {
            let t0 = t - orbit.dt;
            acc += half * ((-t0).exp() * g[k - 1] + (-t).exp() * g[k]);
        }
        out.push(TracePoint { t, lambda: lam[k], g: g[k], l_partial: acc });
    }
    Ok(out)
}

/// `l(p, x) = int_0^inf e^-t g(theta_t p, phi(t, p) x) dt`, truncated at the horizon.
pub fn lyapunov_l<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    p: S,
    x: &[S],
    orbit: OrbitSettings<S>,
    a: &[usize],
    r: &[usize],
) -> Result<LValue<S>> {
    let trace = lyapunov_trace(sys, grid, p, x, orbit, a, r)?;
    Ok(LValue {
        value: trace.last().map_or(S::zero(), |t| t.l_partial),
        tail_bound: (-orbit.horizon).exp(),
    })
}
