//! Bilinear energy form `u' = A(w) u + B(w)(u, u) + f(w)` and its structural checks.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nds::base::BaseFlow;
use crate::nds::builtins::LorenzParams;
use crate::nds::integrate::{FieldFn, IntegratorSettings};
use crate::nds::system::{CocycleSystem, Evaluator};
use crate::scalar::{dot, norm, Real};

/// `A(w) u` written into the output slice.
pub type LinearFn<S> = dyn Fn(S, &[S], &mut [S]) + Send + Sync;
/// `B(w)(u, v)` written into the output slice.
pub type BilinearFn<S> = dyn Fn(S, &[S], &[S], &mut [S]) + Send + Sync;
/// `f(w)` written into the output slice.
pub type ForcingFn<S> = dyn Fn(S, &mut [S]) + Send + Sync;

#[derive(Clone)]
pub struct BilinearSystemSpec<S> {
    pub dim: usize,
    pub a: Arc<LinearFn<S>>,
    pub b: Arc<BilinearFn<S>>,
    pub f: Arc<ForcingFn<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport<S> {
    /// `min -<A u, u> / |u|^2` over probes and base samples.
    pub alpha_estimate: S,
    /// `max |<B(u,v),w> + <B(u,w),v>|` over probes.
    pub antisymmetry_defect: S,
    /// Largest deviation from linearity in the first slot, relative to the probe scale.
    pub bilinearity_defect: S,
    /// `max |B(u,v)| / (|u| |v|)` over probes.
    pub c_b_estimate: S,
    /// `max |f(w)|` over base samples.
    pub forcing_norm: S,
    /// Whether `|f| C_B / alpha^2 < 1`; false whenever `alpha <= 0`.
    pub small_forcing: bool,
}

const MAX_REDRAWS: usize = 32;

fn probe<S: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<S>> {
    for _ in 0..MAX_REDRAWS {
        let v: Vec<S> = (0..dim).map(|_| S::lit(2.0 * rng.gen::<f64>() - 1.0)).collect();
        if norm(&v) > S::zero() {
            return Ok(v);
        }
    }
    Err(Error::DegenerateProbe { tries: MAX_REDRAWS })
}

/// Estimates the constants of the energy conditions on random probes at every base sample.
pub fn check_energy_conditions<S: Real, R: Rng + ?Sized>(
    spec: &BilinearSystemSpec<S>,
    samples: &[S],
    probes: usize,
    rng: &mut R,
) -> Result<EnergyReport<S>> {
    if probes == 0 || samples.is_empty() {
        return Err(Error::InvalidInput("need at least one probe and one base sample".into()));
    }
    let d = spec.dim;
    let mut alpha = S::infinity();
    let mut anti = S::zero();
    let mut bilin = S::zero();
    let mut c_b = S::zero();
    let mut f_norm = S::zero();
    let mut out1 = vec![S::zero(); d];
    let mut out2 = vec![S::zero(); d];
    let mut out3 = vec![S::zero(); d];
    for &w in samples {
        (spec.f)(w, &mut out1);
        f_norm = f_norm.max(norm(&out1));
        for _ in 0..probes {
            let u = probe::<S, R>(d, rng)?;
            let v = probe::<S, R>(d, rng)?;
            let z = probe::<S, R>(d, rng)?;

            (spec.a)(w, &u, &mut out1);
            let uu = dot(&u, &u);
            alpha = alpha.min(-dot(&out1, &u) / uu);

            (spec.b)(w, &u, &v, &mut out1);
            (spec.b)(w, &u, &z, &mut out2);
            anti = anti.max((dot(&out1, &z) + dot(&out2, &v)).abs());
            c_b = c_b.max(norm(&out1) / (norm(&u) * norm(&v)));

            // B(2u + z, v) against 2 B(u, v) + B(z, v).
            let mix: Vec<S> = u.iter().zip(&z).map(|(&a, &b)| S::lit(2.0) * a + b).collect();
            (spec.b)(w, &mix, &v, &mut out2);
            (spec.b)(w, &z, &v, &mut out3);
            let scale = S::one() + norm(&out2);
            for i in 0..d {
                let e = (out2[i] - S::lit(2.0) * out1[i] - out3[i]).abs() / scale;
                bilin = bilin.max(e);
            }
        }
    }
    let small_forcing = alpha > S::zero() && f_norm * c_b / (alpha * alpha) < S::one();
    Ok(EnergyReport {
        alpha_estimate: alpha,
        antisymmetry_defect: anti,
        bilinearity_defect: bilin,
        c_b_estimate: c_b,
        forcing_norm: f_norm,
        small_forcing,
    })
}

/// Forced Lorenz in shifted variables `(x, y, w)` with `w = z - rho - sigma`.
pub fn shifted_lorenz<S: Real>(lp: LorenzParams<S>) -> BilinearSystemSpec<S> {
    let omega = (S::PI() + S::PI()) / lp.period;
    BilinearSystemSpec {
        dim: 3,
        a: Arc::new(move |_, u: &[S], out: &mut [S]| {
            out[0] = -lp.sigma * u[0] + lp.sigma * u[1];
            out[1] = -lp.sigma * u[0] - u[1];
            out[2] = -lp.beta * u[2];
        }),
        b: Arc::new(|_, u: &[S], v: &[S], out: &mut [S]| {
            out[0] = S::zero();
            out[1] = -u[0] * v[2];
            out[2] = u[0] * v[1];
        }),
        f: Arc::new(move |w: S, out: &mut [S]| {
            out[0] = S::zero();
            out[1] = lp.amplitude * (omega * w).sin();
            out[2] = -lp.beta * (lp.rho + lp.sigma);
        }),
    }
}

/// Cocycle system integrating the bilinear form directly.
pub fn bilinear_system<S: Real>(
    name: &str,
    spec: &BilinearSystemSpec<S>,
    base: BaseFlow<S>,
    window: Vec<(S, S)>,
    integrator: IntegratorSettings<S>,
) -> Result<CocycleSystem<S>> {
    if window.len() != spec.dim {
        return Err(Error::InvalidInput("window dimension differs from spec".into()));
    }
    let s = spec.clone();
    let field: Arc<FieldFn<S>> = Arc::new(move |w: S, u: &[S], du: &mut [S]| {
        let mut tmp = [S::zero(); 8];
        let d = u.len();
        assert!(d <= tmp.len(), "bilinear_system supports dim <= 8");
        (s.a)(w, u, du);
        (s.b)(w, u, u, &mut tmp[..d]);
        for i in 0..d {
            du[i] += tmp[i];
        }
        (s.f)(w, &mut tmp[..d]);
        for i in 0..d {
            du[i] += tmp[i];
        }
    });
    CocycleSystem::new(name, base, window, Evaluator::VectorField { field, integrator })
}
