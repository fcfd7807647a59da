//! Set-oriented decomposition of nonautonomous dynamical systems into chain
//! recurrent and gradient-like parts.

pub mod config;
pub mod conley;
pub mod digraph;
pub mod error;
pub mod grid;
pub mod lyapunov;
pub mod nds;
pub mod oracle;
pub mod pipeline;
pub mod pullback;
pub mod sampling;
pub mod scalar;
pub mod transition;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CocycleSystem64 = nds::CocycleSystem<f64>;
pub type CocycleSystem32 = nds::CocycleSystem<f32>;
pub type BaseFlow64 = nds::BaseFlow<f64>;
pub type Grid64 = grid::Grid<f64>;
pub type Rect64 = grid::Rect<f64>;
pub type BaseSampling64 = sampling::BaseSampling<f64>;
pub type TransitionOptions64 = transition::TransitionOptions<f64>;
pub type TransitionGraph64 = transition::TransitionGraph<f64>;
pub type PullbackOptions64 = pullback::PullbackOptions<f64>;
pub type PullbackResult64 = pullback::PullbackResult<f64>;
pub type OrbitSettings64 = lyapunov::OrbitSettings<f64>;
