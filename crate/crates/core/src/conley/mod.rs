//! Combinatorial chain recurrence: SCCs, attractor-repeller pairs and chains.

mod chain;
mod pairs;
mod scc;

pub use chain::{chain_exists, numeric_chain, ChainCertificate, ChainQuery};
pub use pairs::{
    attractor_from_nodes, attractor_from_seed, basin, enumerate_pairs, repeller, verify_decomposition,
    AttractorRepellerPair, DecompositionReport, PairOrigin,
};
pub use scc::{morse, MorseDecomposition};

use crate::transition::FiberLayout;

/// How a seed set is spread before its forward closure is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lift {
    Identity,
    /// Copy each box to the same box in every fiber (constant sections).
    AcrossFibers(FiberLayout),
}

impl Lift {
    pub fn apply(&self, nodes: &[usize]) -> Vec<usize> {
        match self {
            Lift::Identity => nodes.to_vec(),
            Lift::AcrossFibers(layout) => {
                let mut out = Vec::new();
                for &v in nodes {
                    match layout.box_of(v) {
                        None => out.push(v),
                        Some(b) => out.extend((0..layout.fibers).map(|j| j * layout.boxes + b)),
                    }
                }
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    }
}
