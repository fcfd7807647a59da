//! Run configuration: flat dotted keys over per-system defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use toml::Value;

use crate::error::{Error, Result};
use crate::grid::{Grid, DEFAULT_MAX_BOXES};
use crate::nds::{make_builtin, BaseKind, CocycleSystem, Evaluator, Method};
use crate::sampling::{sample_base, BaseSampling};
use crate::transition::{ChainMode, EscapePolicy, TransitionOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub dim: usize,
    pub seed: u64,
    pub base_kind: String,
    pub base_period: Option<f64>,
    pub base_lo: Option<f64>,
    pub base_hi: Option<f64>,
    pub base_m: usize,
    pub base_step: Option<f64>,
    pub integrator_h: f64,
    pub integrator_method: String,
    pub integrator_blowup: f64,
    pub window_lo: Vec<f64>,
    pub window_hi: Vec<f64>,
    pub window_circular: Vec<bool>,
    pub params: BTreeMap<String, f64>,
    pub grid_depth: Vec<u32>,
    pub grid_max_boxes: u64,
    pub transition_mode: ChainMode,
    pub transition_leg_steps: usize,
    pub transition_scheme: usize,
    /// Padding as a multiple of the box diameter.
    pub transition_eps_pad_boxes: f64,
    pub transition_escape: EscapePolicy,
    pub lyapunov_horizon: f64,
    pub lyapunov_dt: f64,
    pub pullback_p: f64,
    pub pullback_u_lo: Vec<f64>,
    pub pullback_u_hi: Vec<f64>,
    /// Reference attractor for the distance series; empty means use the computed one.
    pub pullback_a_lo: Vec<f64>,
    pub pullback_a_hi: Vec<f64>,
    pub pullback_schedule: Vec<f64>,
    /// Convergence tolerance as a multiple of the box diameter.
    pub pullback_tol_boxes: f64,
    pub pullback_eps_pad_boxes: f64,
    pub output_dir: String,
}

impl RunConfig {
    /// Defaults for a builtin system.
    pub fn defaults_for(name: &str) -> Result<Self> {
        let mut c = RunConfig {
            name: name.to_string(),
            dim: 1,
            seed: 0,
            base_kind: "trivial".into(),
            base_period: None,
            base_lo: None,
            base_hi: None,
            base_m: 1,
            base_step: None,
            integrator_h: 1e-3,
            integrator_method: "rk4".into(),
            integrator_blowup: 1e8,
            window_lo: vec![-2.0],
            window_hi: vec![2.0],
            window_circular: vec![false],
            params: BTreeMap::new(),
            grid_depth: vec![6],
            grid_max_boxes: DEFAULT_MAX_BOXES,
            transition_mode: ChainMode::Skew,
            transition_leg_steps: 1,
            transition_scheme: 2,
            transition_eps_pad_boxes: 1.0,
            transition_escape: EscapePolicy::Absorb,
            lyapunov_horizon: 20.0,
            lyapunov_dt: 0.01,
            pullback_p: 0.0,
            pullback_u_lo: vec![-2.0],
            pullback_u_hi: vec![2.0],
            pullback_a_lo: Vec::new(),
            pullback_a_hi: Vec::new(),
            pullback_schedule: (1..=10).map(f64::from).collect(),
            pullback_tol_boxes: 1.0,
            pullback_eps_pad_boxes: 0.0,
            output_dir: "out".into(),
        };
        match name {
            "double-well" => {
                c.base_step = Some(0.5);
                c.transition_eps_pad_boxes = 0.0;
            }
            "example-5-1" => {
                c.base_kind = "line".into();
                c.base_lo = Some(-2.0);
                c.base_hi = Some(2.0);
                c.base_m = 8;
                c.grid_depth = vec![8];
                c.transition_mode = ChainMode::Fiber;
                c.transition_leg_steps = 8;
                c.transition_eps_pad_boxes = 0.0;
                c.pullback_u_lo = vec![-1.0];
                c.pullback_u_hi = vec![1.0];
                c.pullback_a_lo = vec![0.0];
                c.pullback_a_hi = vec![0.0];
                c.pullback_schedule = vec![1.0, 2.0, 3.0, 4.0, 5.0];
            }
            "example-5-2-circle" => {
                let tau = std::f64::consts::TAU;
                c.base_kind = "periodic".into();
                c.base_period = Some(tau);
                c.base_m = 16;
                c.window_lo = vec![0.0];
                c.window_hi = vec![tau];
                c.window_circular = vec![true];
                c.grid_depth = vec![8];
                c.transition_mode = ChainMode::Fiber;
                c.transition_eps_pad_boxes = 0.0;
                c.pullback_u_lo = vec![0.0];
                c.pullback_u_hi = vec![tau];
                c.pullback_schedule = vec![1.0, 2.0, 3.0];
            }
            "forced-lorenz" => {
                c.dim = 3;
                c.base_kind = "periodic".into();
                c.base_period = Some(1.0);
                c.base_m = 4;
                c.window_lo = vec![-30.0, -30.0, -10.0];
                c.window_hi = vec![30.0, 30.0, 60.0];
                c.window_circular = vec![false; 3];
                c.grid_depth = vec![6, 6, 6];
                c.transition_eps_pad_boxes = 0.0;
                c.transition_escape = EscapePolicy::Drop;
                c.pullback_u_lo = c.window_lo.clone();
                c.pullback_u_hi = c.window_hi.clone();
                c.pullback_schedule = vec![1.0, 2.0, 3.0];
            }
            other => return Err(Error::UnknownName(other.to_string())),
        }
        Ok(c)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }

    /// Parses a config; every key not given keeps the default of the named system.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &Value::Table(table), &mut flat);
        let name = match flat.remove("name") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(Error::Config("`name` must be a string".into())),
            None => "double-well".into(),
        };
        let mut c = Self::defaults_for(&name)?;
        // `dim` first so that scalars broadcast to the right length.
        if let Some(v) = flat.remove("dim") {
            c.dim = as_usize("dim", &v)?;
        }
        for (k, v) in &flat {
            c.apply(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn apply(&mut self, key: &str, v: &Value) -> Result<()> {
        let d = self.dim;
        match key {
            "seed" => self.seed = as_usize(key, v)? as u64,
            "base.kind" => self.base_kind = as_str(key, v)?,
            "base.period" => self.base_period = Some(as_f64(key, v)?),
            "base.lo" => self.base_lo = Some(as_f64(key, v)?),
            "base.hi" => self.base_hi = Some(as_f64(key, v)?),
            "base.m" => self.base_m = as_usize(key, v)?,
            "base.T" => self.base_step = Some(as_f64(key, v)?),
            "integrator.h" => self.integrator_h = as_f64(key, v)?,
            "integrator.method" => self.integrator_method = as_str(key, v)?,
            "integrator.blowup" => self.integrator_blowup = as_f64(key, v)?,
            "window.lo" => self.window_lo = as_f64s(key, v, d)?,
            "window.hi" => self.window_hi = as_f64s(key, v, d)?,
            "window.circular" => {
                self.window_circular = match v {
                    Value::Boolean(b) => vec![*b; d],
                    Value::Array(a) => a.iter().map(|x| x.as_bool().ok_or_else(|| bad(key))).collect::<Result<_>>()?,
                    _ => return Err(bad(key)),
                }
            }
            "grid.depth" => self.grid_depth = as_f64s(key, v, d)?.into_iter().map(|x| x as u32).collect(),
            "grid.max_boxes" => self.grid_max_boxes = as_usize(key, v)? as u64,
            "transition.mode" => self.transition_mode = as_str(key, v)?.parse()?,
            "transition.leg_steps" => self.transition_leg_steps = as_usize(key, v)?,
            "transition.scheme" => self.transition_scheme = as_usize(key, v)?,
            "transition.eps_pad_boxes" => self.transition_eps_pad_boxes = as_f64(key, v)?,
            "transition.escape" => self.transition_escape = as_str(key, v)?.parse()?,
            "lyapunov.horizon" => self.lyapunov_horizon = as_f64(key, v)?,
            "lyapunov.dt" => self.lyapunov_dt = as_f64(key, v)?,
            "pullback.p" => self.pullback_p = as_f64(key, v)?,
            "pullback.u_lo" => self.pullback_u_lo = as_f64s(key, v, d)?,
            "pullback.u_hi" => self.pullback_u_hi = as_f64s(key, v, d)?,
            "pullback.a_lo" => self.pullback_a_lo = as_f64s(key, v, d)?,
            "pullback.a_hi" => self.pullback_a_hi = as_f64s(key, v, d)?,
            "pullback.schedule" => self.pullback_schedule = as_f64s(key, v, 0)?,
            "pullback.tol_boxes" => self.pullback_tol_boxes = as_f64(key, v)?,
            "pullback.eps_pad_boxes" => self.pullback_eps_pad_boxes = as_f64(key, v)?,
            "output.dir" => self.output_dir = as_str(key, v)?,
            k if k.starts_with("params.") => {
                self.params.insert(k["params.".len()..].to_string(), as_f64(key, v)?);
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        let lens = [
            ("window.lo", self.window_lo.len()),
            ("window.hi", self.window_hi.len()),
            ("window.circular", self.window_circular.len()),
            ("grid.depth", self.grid_depth.len()),
            ("pullback.u_lo", self.pullback_u_lo.len()),
            ("pullback.u_hi", self.pullback_u_hi.len()),
        ];
        for (k, n) in lens {
            if n != d {
                return Err(Error::Config(format!("`{k}` has {n} entries, dim is {d}")));
            }
        }
        if self.pullback_a_lo.len() != self.pullback_a_hi.len() || !(self.pullback_a_lo.is_empty() || self.pullback_a_lo.len() == d) {
            return Err(Error::Config("`pullback.a_lo`/`pullback.a_hi` must both be empty or have dim entries".into()));
        }
        if self.transition_eps_pad_boxes < 0.0 || self.pullback_eps_pad_boxes < 0.0 {
            return Err(Error::Config("padding must be nonnegative".into()));
        }
        if !(self.lyapunov_dt > 0.0 && self.lyapunov_horizon >= 0.0) {
            return Err(Error::Config("lyapunov needs dt > 0 and horizon >= 0".into()));
        }
        Method::parse(&self.integrator_method)?;
        Ok(())
    }

    /// The configured system.
    pub fn system(&self) -> Result<CocycleSystem<f64>> {
        let mut sys = make_builtin::<f64>(&self.name, &self.params)?;
        if sys.dim != self.dim {
            return Err(Error::Config(format!("system `{}` has dimension {}, config says {}", self.name, sys.dim, self.dim)));
        }
        let kind = match &sys.base.kind {
            BaseKind::TrivialPoint => "trivial",
            BaseKind::PeriodicCircle { .. } => "periodic",
            BaseKind::FiniteSet { .. } => "finite",
            BaseKind::Line { .. } => "line",
        };
        if kind != self.base_kind {
            return Err(Error::Config(format!("system `{}` has a {kind} base, config says {}", self.name, self.base_kind)));
        }
        match &sys.base.kind {
            BaseKind::PeriodicCircle { period, .. } => {
                if let Some(p) = self.base_period {
                    if (p - period).abs() > 1e-12 * period {
                        return Err(Error::Config(format!("base.period {p} disagrees with the system period {period}")));
                    }
                }
            }
            BaseKind::Line { .. } => {
                let lo = self.base_lo.unwrap_or(-2.0);
                let hi = self.base_hi.unwrap_or(2.0);
                sys.base = crate::nds::BaseFlow::line(lo, hi)?;
            }
            _ => {}
        }
        sys.window = self.window_lo.iter().copied().zip(self.window_hi.iter().copied()).collect();
        sys.circular = self.window_circular.clone();
        sys.blowup = self.integrator_blowup;
        if let Evaluator::VectorField { integrator, .. } = &mut sys.evaluator {
            integrator.step = self.integrator_h;
            integrator.method = Method::parse(&self.integrator_method)?;
        }
        if !(self.integrator_h > 0.0) {
            return Err(Error::Config("integrator.h must be positive".into()));
        }
        Ok(sys)
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        let window: Vec<(f64, f64)> = self.window_lo.iter().copied().zip(self.window_hi.iter().copied()).collect();
        Grid::new(&window, &self.grid_depth, &self.window_circular, self.grid_max_boxes)
    }

    pub fn sampling(&self, sys: &CocycleSystem<f64>) -> Result<BaseSampling<f64>> {
        sample_base(&sys.base, self.base_m, self.base_step)
    }

    pub fn transition_options(&self, grid: &Grid<f64>, workers: usize) -> TransitionOptions<f64> {
        TransitionOptions {
            mode: self.transition_mode,
            leg_steps: self.transition_leg_steps,
            scheme: self.transition_scheme,
            eps_pad: self.transition_eps_pad_boxes * grid.diameter(),
            escape: self.transition_escape,
            workers,
        }
    }

    /// Every key with its value, in documentation order.
    pub fn to_toml_string(&self) -> String {
        let mut s = String::new();
        let f = |v: &[f64]| format!("[{}]", v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", "));
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("name", format!("{:?}", self.name));
        line("dim", self.dim.to_string());
        line("seed", self.seed.to_string());
        line("base.kind", format!("{:?}", self.base_kind));
        if let Some(p) = self.base_period {
            line("base.period", fmt_f64(p));
        }
        if let Some(p) = self.base_lo {
            line("base.lo", fmt_f64(p));
        }
        if let Some(p) = self.base_hi {
            line("base.hi", fmt_f64(p));
        }
        line("base.m", self.base_m.to_string());
        if let Some(t) = self.base_step {
            line("base.T", fmt_f64(t));
        }
        line("integrator.h", fmt_f64(self.integrator_h));
        line("integrator.method", format!("{:?}", self.integrator_method));
        line("integrator.blowup", fmt_f64(self.integrator_blowup));
        line("window.lo", f(&self.window_lo));
        line("window.hi", f(&self.window_hi));
        line("window.circular", format!("{:?}", self.window_circular));
        for (k, v) in &self.params {
            line(&format!("params.{k}"), fmt_f64(*v));
        }
        line("grid.depth", format!("{:?}", self.grid_depth));
        line("grid.max_boxes", self.grid_max_boxes.to_string());
        line("transition.mode", format!("\"{}\"", self.transition_mode));
        line("transition.leg_steps", self.transition_leg_steps.to_string());
        line("transition.scheme", self.transition_scheme.to_string());
        line("transition.eps_pad_boxes", fmt_f64(self.transition_eps_pad_boxes));
        line("transition.escape", format!("\"{}\"", self.transition_escape));
        line("lyapunov.horizon", fmt_f64(self.lyapunov_horizon));
        line("lyapunov.dt", fmt_f64(self.lyapunov_dt));
        line("pullback.p", fmt_f64(self.pullback_p));
        line("pullback.u_lo", f(&self.pullback_u_lo));
        line("pullback.u_hi", f(&self.pullback_u_hi));
        line("pullback.a_lo", f(&self.pullback_a_lo));
        line("pullback.a_hi", f(&self.pullback_a_hi));
        line("pullback.schedule", f(&self.pullback_schedule));
        line("pullback.tol_boxes", fmt_f64(self.pullback_tol_boxes));
        line("pullback.eps_pad_boxes", fmt_f64(self.pullback_eps_pad_boxes));
        line("output.dir", format!("{:?}", self.output_dir));
        s
    }
}

fn fmt_f64(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                if prefix == "params" || !matches!(v, Value::Table(_)) {
                    out.insert(key, v.clone());
                } else {
                    flatten(&key, v, out);
                }
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn bad(key: &str) -> Error {
    Error::Config(format!("bad value for `{key}`"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(bad(key)),
    }
}

fn as_str(key: &str, v: &Value) -> Result<String> {
    v.as_str().map(str::to_string).ok_or_else(|| bad(key))
}

/// A list, or a scalar broadcast to `broadcast` entries (when nonzero).
fn as_f64s(key: &str, v: &Value, broadcast: usize) -> Result<Vec<f64>> {
    match v {
        Value::Array(a) => a.iter().map(|x| as_f64(key, x)).collect(),
        scalar if broadcast > 0 => Ok(vec![as_f64(key, scalar)?; broadcast]),
        _ => Err(bad(key)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nds::BUILTIN_NAMES;

    #[test]
    fn defaults_round_trip_through_text() {
        for name in BUILTIN_NAMES {
            let c = RunConfig::defaults_for(name).unwrap();
            let back = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
            assert_eq!(back, c, "{name}");
            c.system().unwrap();
            c.grid().unwrap();
        }
    }

    #[test]
    fn dotted_and_nested_keys_agree() {
        let a = RunConfig::from_toml_str("name = \"double-well\"\ngrid.depth = 4\nbase.T = 0.25\n").unwrap();
        let b = RunConfig::from_toml_str("name = \"double-well\"\n[grid]\ndepth = [4]\n[base]\nT = 0.25\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid_depth, vec![4]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_toml_str("name = \"double-well\"\ngrid.dpeth = 4\n").unwrap_err();
        assert!(err.to_string().contains("grid.dpeth"));
        assert!(matches!(RunConfig::from_toml_str("name = \"nope\"\n"), Err(Error::UnknownName(_))));
        assert!(RunConfig::from_toml_str("name = \"double-well\"\ntransition.mode = \"sideways\"\n").is_err());
    }

    #[test]
    fn params_and_dimension_checks() {
        let c = RunConfig::from_toml_str("name = \"forced-lorenz\"\nparams.amplitude = 2.0\n").unwrap();
        assert_eq!(c.params.get("amplitude"), Some(&2.0));
        c.system().unwrap();
        assert!(RunConfig::from_toml_str("name = \"forced-lorenz\"\nwindow.lo = [0.0, 0.0]\n").is_err());
        let c = RunConfig::from_toml_str("name = \"double-well\"\nparams.k = 1.0\n").unwrap();
        assert!(c.system().is_err());
    }

    #[test]
    fn box_cap_is_configurable() {
        let c = RunConfig::from_toml_str("name = \"double-well\"\ngrid.depth = 30\n").unwrap();
        assert!(matches!(c.grid(), Err(Error::TooManyBoxes { .. })));
    }
}
