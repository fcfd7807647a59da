//! Attractors, basins, repellers and the decomposition identities.

use std::collections::HashSet;

use crate::conley::scc::MorseDecomposition;
use crate::conley::Lift;
use crate::digraph::{empty_set, full_set, members, Digraph, NodeSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairOrigin {
    /// Seeded by a cyclic SCC.
    Cyclic(usize),
    /// Seeded by a transient node not covered by earlier pairs.
    Transient(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractorRepellerPair {
    pub attractor: NodeSet,
    pub basin: NodeSet,
    /// Invariant core of the basin complement.
    pub repeller: NodeSet,
    /// The whole basin complement.
    pub coarse_repeller: NodeSet,
    pub origin: PairOrigin,
}

/// Forward closure of the successors of the lifted seed nodes: every end point
/// of a walk of length >= 1 starting in the seed.
pub fn attractor_from_nodes(g: &Digraph, seed: &[usize], lift: &Lift) -> NodeSet {
    let lifted = lift.apply(seed);
    g.closure(lifted.iter().flat_map(|&v| g.successors(v).iter().map(|&w| w as usize)))
}

/// Attractor generated by SCC `seed`.
pub fn attractor_from_seed(g: &Digraph, md: &MorseDecomposition, seed: usize, lift: &Lift) -> NodeSet {
    let nodes: Vec<usize> = md.members(seed).iter().map(|&v| v as usize).collect();
    attractor_from_nodes(g, &nodes, lift)
}

fn check_forward_invariant(g: &Digraph, a: &NodeSet) -> Result<()> {
    for v in a.iter_ones() {
        if g.successors(v).iter().any(|&w| !a[w as usize]) {
            return Err(Error::NotForwardInvariant { node: v });
        }
    }
    Ok(())
}

/// Nodes from which every walk eventually enters `a`.
///
/// A node is outside the basin when, with `a` deleted, it still reaches a
/// cyclic SCC. Dead ends belong to the basin.
pub fn basin(g: &Digraph, md: &MorseDecomposition, a: &NodeSet) -> Result<NodeSet> {
    check_forward_invariant(g, a)?;
    let c = md.scc_count();
    let mut bad = vec![false; c];
    // Ascending SCC ids visit successors first.
    for s in 0..c {
        let rep = md.members(s)[0] as usize;
        if a[rep] {
            continue;
        }
        bad[s] = md.cyclic[s] || md.condensation.successors(s).iter().any(|&t| bad[t as usize]);
    }
    let mut b = full_set(g.node_count());
    for v in 0..g.node_count() {
        if bad[md.scc_of[v] as usize] {
            b.set(v, false);
        }
    }
    Ok(b)
}

/// `(core, coarse)`: the basin complement and the part of it on bi-infinite
/// walks inside it.
pub fn repeller(g: &Digraph, md: &MorseDecomposition, b: &NodeSet) -> (NodeSet, NodeSet) {
    let n = g.node_count();
    let mut coarse = b.clone();
    coarse = !coarse;
    let c = md.scc_count();
    let outside = |s: usize| coarse[md.members(s)[0] as usize];
    let mut reached = vec![false; c];
    for &s in &md.topo_order {
        if !outside(s) {
            continue;
        }
        if md.cyclic[s] {
            reached[s] = true;
        }
        if reached[s] {
            for &t in md.condensation.successors(s) {
                if outside(t as usize) {
                    reached[t as usize] = true;
                }
            }
        }
    }
    let mut core = empty_set(n);
    for v in 0..n {
        if reached[md.scc_of[v] as usize] {
            core.set(v, true);
        }
    }
    (core, coarse)
}

fn make_pair(g: &Digraph, md: &MorseDecomposition, a: NodeSet, origin: PairOrigin) -> AttractorRepellerPair {
    let b = basin(g, md, &a).expect("forward closures are forward invariant");
    let (r, coarse) = repeller(g, md, &b);
    AttractorRepellerPair { attractor: a, basin: b, repeller: r, coarse_repeller: coarse, origin }
}

/// One pair per cyclic SCC seed (sources of the condensation first), then
/// supplementary pairs seeded at transient nodes lying in no `B \ A` so far.
/// Pairs with equal attractors are kept once.
pub fn enumerate_pairs(g: &Digraph, md: &MorseDecomposition, lift: &Lift) -> Vec<AttractorRepellerPair> {
    let mut pairs = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for &s in &md.topo_order {
        if !md.cyclic[s] {
            continue;
        }
        let a = attractor_from_seed(g, md, s, lift);
        if seen.insert(a.as_raw_slice().to_vec()) {
            pairs.push(make_pair(g, md, a, PairOrigin::Cyclic(s)));
        }
    }
    let mut covered = empty_set(g.node_count());
    for p in &pairs {
        let mut t = p.basin.clone();
        t &= !p.attractor.clone();
        covered |= t;
    }
    for s in 0..md.scc_count() {
        if md.cyclic[s] {
            continue;
        }
        let v = md.members(s)[0] as usize;
        if covered[v] {
            continue;
        }
        let a = attractor_from_nodes(g, &[v], lift);
        if seen.insert(a.as_raw_slice().to_vec()) {
            let p = make_pair(g, md, a, PairOrigin::Transient(v));
            let mut t = p.basin.clone();
            t &= !p.attractor.clone();
            covered |= t;
            pairs.push(p);
        }
    }
    pairs
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecompositionReport {
    pub nodes: usize,
    pub chain_recurrent: usize,
    pub pairs: usize,
    /// `(X \ CR) symmetric difference (union of B \ A)`.
    pub union_residual: Vec<usize>,
    /// `CR symmetric difference (intersection of A u R)` with the refined repeller.
    pub intersection_residual: Vec<usize>,
    /// Same with the coarse repeller `X \ B`.
    pub intersection_residual_coarse: Vec<usize>,
}

impl DecompositionReport {
    pub fn holds(&self) -> bool {
        self.union_residual.is_empty() && self.intersection_residual.is_empty() && self.intersection_residual_coarse.is_empty()
    }
}

/// Checks `X \ CR = U (B \ A)` and `CR = n (A u R)` over the given pairs.
/// The intersection over an empty family is `X`.
pub fn verify_decomposition(g: &Digraph, md: &MorseDecomposition, pairs: &[AttractorRepellerPair]) -> DecompositionReport {
    let n = g.node_count();
    let mut cr = empty_set(n);
    for v in md.recurrent_nodes() {
        cr.set(v, true);
    }
    let mut union = empty_set(n);
    let mut inter = full_set(n);
    let mut inter_coarse = full_set(n);
    for p in pairs {
        let mut t = p.basin.clone();
        t &= !p.attractor.clone();
        union |= t;
        let mut ar = p.attractor.clone();
        ar |= p.repeller.clone();
        inter &= ar;
        let mut ac = p.attractor.clone();
        ac |= p.coarse_repeller.clone();
        inter_coarse &= ac;
    }
    let not_cr = !cr.clone();
    DecompositionReport {
        nodes: n,
        chain_recurrent: cr.count_ones(),
        pairs: pairs.len(),
        union_residual: members(&(not_cr ^ union)),
        intersection_residual: members(&(cr.clone() ^ inter)),
        intersection_residual_coarse: members(&(cr ^ inter_coarse)),
    }
}
