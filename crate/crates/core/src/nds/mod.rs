//! Base flows, cocycles and the builtin example systems.

pub mod base;
pub mod builtins;
pub mod energy;
pub mod integrate;
pub mod system;

pub use base::{BaseFlow, BaseKind};
pub use builtins::{make_builtin, LorenzParams, BUILTIN_NAMES};
pub use energy::{check_energy_conditions, shifted_lorenz, BilinearSystemSpec, EnergyReport};
pub use integrate::{IntegratorSettings, Method, Workspace};
pub use system::{cocycle_residual, stationary_residual, CocycleSystem, Evaluator};
