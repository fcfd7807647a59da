//! Outer approximation of the time-T cocycle map as a graph on skew nodes.
//!
//! Node `(i, b)` of a graph with `m` base samples and `n` boxes has id
//! `i * n + b`. Under the `absorb` escape policy a sink `OUTSIDE` with id
//! `m * n` is appended when some node escapes.

mod build;
mod io;

use std::fmt;
use std::str::FromStr;

pub use build::{build_transition, cover_box_images, BoxImages, TransitionOptions};
pub use io::{load_graph, read_graph, save_graph, write_graph, FORMAT_MAGIC, FORMAT_VERSION};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::sampling::BaseSampling;
use crate::scalar::Real;

/// Which chain legs the edges realize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainMode {
    /// Edges follow the skew product: `(i, b) -> (perm(i), b')` via `phi(T, p_i)`.
    Skew,
    /// Edges stay in a fiber: `(i, b) -> (i, b')` via `phi(tau, theta_{-tau} p_i)`.
    Fiber,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapePolicy {
    Absorb,
    Drop,
}

macro_rules! text_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    other => Err(Error::Config(format!("unknown {} `{other}`", stringify!($t)))),
                }
            }
        }
    };
}

text_enum!(ChainMode, ChainMode::Skew => "skew", ChainMode::Fiber => "fiber");
text_enum!(EscapePolicy, EscapePolicy::Absorb => "absorb", EscapePolicy::Drop => "drop");

#[derive(Clone, Debug, PartialEq)]
pub struct GraphMeta<S> {
    pub system: String,
    pub mode: ChainMode,
    /// Leg time in units of the sampling step.
    pub leg_steps: usize,
    /// Absolute padding added to every image hull.
    pub eps_pad: S,
    /// Sample points per box and axis (plus the center).
    pub scheme: usize,
    /// `closed-form` or `<method>:<step>`.
    pub integrator: String,
    pub escape: EscapePolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionGraph<S> {
    pub grid: Grid<S>,
    pub sampling: BaseSampling<S>,
    pub meta: GraphMeta<S>,
    pub graph: Digraph,
    pub escaped: Vec<bool>,
    pub outside: Option<usize>,
}

/// How skew nodes are grouped into fibers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberLayout {
    pub fibers: usize,
    pub boxes: usize,
    pub outside: Option<usize>,
}

impl FiberLayout {
    /// Every node in one fiber; used for plain digraphs.
    pub fn single(n: usize) -> Self {
        FiberLayout { fibers: 1, boxes: n, outside: None }
    }

    pub fn fiber_of(&self, v: usize) -> Option<usize> {
        if Some(v) == self.outside {
            None
        } else {
            Some(v / self.boxes)
        }
    }

    pub fn box_of(&self, v: usize) -> Option<usize> {
        if Some(v) == self.outside {
            None
        } else {
            Some(v % self.boxes)
        }
    }
}

impl<S: Real> TransitionGraph<S> {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn node(&self, base_index: usize, box_index: usize) -> usize {
        base_index * self.grid.box_count() + box_index
    }

    /// `(base_index, box_index)`, or `None` for `OUTSIDE`.
    pub fn split(&self, v: usize) -> Option<(usize, usize)> {
        let n = self.grid.box_count();
        if Some(v) == self.outside {
            None
        } else {
            Some((v / n, v % n))
        }
    }

    pub fn layout(&self) -> FiberLayout {
        FiberLayout {
            fibers: self.sampling.len(),
            boxes: self.grid.box_count(),
            outside: self.outside,
        }
    }

    /// Seeds are lifted to every fiber when edges stay inside fibers.
    pub fn lift(&self) -> crate::conley::Lift {
        match self.meta.mode {
            ChainMode::Skew => crate::conley::Lift::Identity,
            ChainMode::Fiber => crate::conley::Lift::AcrossFibers(self.layout()),
        }
    }

    pub fn leg_time(&self) -> S {
        S::from_usize_lossy(self.meta.leg_steps) * self.sampling.step
    }
}
