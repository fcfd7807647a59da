//! Complete Lyapunov functions: exact on graphs, numeric along trajectories.

mod continuous;
mod graph;

pub use continuous::{lambda_ratio, lyapunov_l, lyapunov_trace, sup_g, LValue, OrbitSettings, SupG, TracePoint};
pub use graph::{complete_lyapunov, exact_string, pair_function, LyapunovField, PairFunction, PropertyReport};
