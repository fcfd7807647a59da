//! Builtin example systems.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nds::base::BaseFlow;
use crate::nds::integrate::{FieldFn, IntegratorSettings};
use crate::nds::system::{ClosedFormFn, CocycleSystem, Evaluator};
use crate::scalar::Real;

pub const BUILTIN_NAMES: [&str; 4] = ["example-5-1", "example-5-2-circle", "forced-lorenz", "double-well"];

/// Parameters of the periodically forced Lorenz system
/// `x' = sigma (y - x)`, `y' = x (rho - z) - y + a sin(2 pi t / period)`, `z' = x y - beta z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorenzParams<S> {
    pub sigma: S,
    pub rho: S,
    pub beta: S,
    pub amplitude: S,
    pub period: S,
}

impl<S: Real> Default for LorenzParams<S> {
    fn default() -> Self {
        LorenzParams {
            sigma: S::lit(10.0),
            rho: S::lit(28.0),
            beta: S::lit(8.0 / 3.0),
            amplitude: S::lit(5.0),
            period: S::one(),
        }
    }
}

impl<S: Real> LorenzParams<S> {
    pub fn from_params(params: &BTreeMap<String, f64>) -> Result<Self> {
        let mut lp = Self::default();
        for (k, &v) in params {
            let slot = match k.as_str() {
                "sigma" => &mut lp.sigma,
                "rho" => &mut lp.rho,
                "beta" => &mut lp.beta,
                "amplitude" => &mut lp.amplitude,
                "period" => &mut lp.period,
                other => return Err(Error::Config(format!("forced-lorenz has no parameter `{other}`"))),
            };
            *slot = S::lit(v);
        }
        if !(lp.sigma > S::zero() && lp.beta > S::zero() && lp.period > S::zero()) {
            return Err(Error::Config("forced-lorenz needs sigma, beta, period > 0".into()));
        }
        Ok(lp)
    }
}

/// `x' = 2 t x` with closed form `x exp((t + p)^2 - p^2)` over the real line.
pub fn example_5_1<S: Real>(base_lo: S, base_hi: S) -> Result<CocycleSystem<S>> {
    let f: Arc<ClosedFormFn<S>> = Arc::new(|t: S, p: S, x: &[S], out: &mut [S]| {
        let g = ((t + p) * (t + p) - p * p).exp();
        out[0] = x[0] * g;
    });
    CocycleSystem::new(
        "example-5-1",
        BaseFlow::line(base_lo, base_hi)?,
        vec![(S::lit(-2.0), S::lit(2.0))],
        Evaluator::ClosedForm(f),
    )
}

/// Flow of `z' = -cos z`: `z(t) = 2 u(t) - pi/2` with `tan u(t) = tan u(0) e^{-t}`,
/// evaluated branch by branch so it is valid for every real `z`.
pub fn cos_gradient_flow<S: Real>(t: S, z: S) -> S {
    let two_pi = S::PI() + S::PI();
    let half_pi = S::FRAC_PI_2();
    // Reduce to the branch (-pi/2, 3pi/2] where u = z/2 + pi/4 lies in (0, pi].
    let k = ((z + half_pi) / two_pi).floor();
    let zr = z - k * two_pi;
    let u0 = zr * S::lit(0.5) + S::FRAC_PI_4();
    let u = (u0.sin() * (-t).exp()).atan2(u0.cos());
    let u = if u < S::zero() { u + S::PI() } else { u };
    S::lit(2.0) * u - half_pi + k * two_pi
}

/// The conjugated circle system `x' = 1 - cos(x - theta_t p)`, i.e.
/// `phi(t, p) = psi(theta_t p) o phi0(t) o psi(p)^{-1}` with `psi(p) x = x + p`.
pub fn example_5_2_circle<S: Real>() -> Result<CocycleSystem<S>> {
    let two_pi = S::PI() + S::PI();
    let field: Arc<FieldFn<S>> = Arc::new(|pt: S, x: &[S], dx: &mut [S]| {
        dx[0] = S::one() - (x[0] - pt).cos();
    });
    Ok(CocycleSystem::new(
        "example-5-2-circle",
        BaseFlow::periodic(two_pi)?,
        vec![(S::zero(), two_pi)],
        Evaluator::VectorField { field, integrator: IntegratorSettings::default() },
    )?
    .with_circular(vec![true]))
}

pub fn forced_lorenz<S: Real>(lp: LorenzParams<S>) -> Result<CocycleSystem<S>> {
    let omega = (S::PI() + S::PI()) / lp.period;
    let field: Arc<FieldFn<S>> = Arc::new(move |pt: S, u: &[S], du: &mut [S]| {
        let (x, y, z) = (u[0], u[1], u[2]);
        du[0] = lp.sigma * (y - x);
        du[1] = x * (lp.rho - z) - y + lp.amplitude * (omega * pt).sin();
        du[2] = x * y - lp.beta * z;
    });
    CocycleSystem::new(
        "forced-lorenz",
        BaseFlow::periodic(lp.period)?,
        vec![
            (S::lit(-30.0), S::lit(30.0)),
            (S::lit(-30.0), S::lit(30.0)),
            (S::lit(-10.0), S::lit(60.0)),
        ],
        Evaluator::VectorField { field, integrator: IntegratorSettings::default() },
    )
}

/// Autonomous `x' = x - x^3` over the trivial base.
pub fn double_well<S: Real>() -> Result<CocycleSystem<S>> {
    let field: Arc<FieldFn<S>> = Arc::new(|_, x: &[S], dx: &mut [S]| {
        dx[0] = x[0] - x[0] * x[0] * x[0];
    });
    CocycleSystem::new(
        "double-well",
        BaseFlow::trivial(),
        vec![(S::lit(-2.0), S::lit(2.0))],
        Evaluator::VectorField { field, integrator: IntegratorSettings::default() },
    )
}

/// Builds a builtin by name. `params` are only accepted by `forced-lorenz`.
pub fn make_builtin<S: Real>(name: &str, params: &BTreeMap<String, f64>) -> Result<CocycleSystem<S>> {
    let no_params = || -> Result<()> {
        match params.keys().next() {
            Some(k) => Err(Error::Config(format!("system `{name}` has no parameter `{k}`"))),
            None => Ok(()),
        }
    };
    match name {
        "example-5-1" => {
            no_params()?;
            example_5_1(S::lit(-2.0), S::lit(2.0))
        }
        "example-5-2-circle" => {
            no_params()?;
            example_5_2_circle()
        }
        "forced-lorenz" => forced_lorenz(LorenzParams::from_params(params)?),
        "double-well" => {
            no_params()?;
            double_well()
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}
