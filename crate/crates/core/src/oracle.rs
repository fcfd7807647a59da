//! Brute-force reachability oracle for small graphs.
//!
//! Everything here is derived from a dense transitive closure, independently
//! of the SCC and basin algorithms it is used to check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conley::{enumerate_pairs, morse, verify_decomposition, Lift};
use crate::digraph::Digraph;
use crate::lyapunov::complete_lyapunov;
use crate::transition::FiberLayout;

/// `reach[u][v]`: a walk of length >= 1 from `u` to `v` using only nodes in `keep`.
pub fn dense_closure(g: &Digraph, keep: &[bool]) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        if keep[u] && keep[v] {
            r[u][v] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

pub fn random_digraph(rng: &mut impl Rng, max_nodes: usize) -> Digraph {
    let n = rng.gen_range(1..=max_nodes);
    let p: f64 = rng.gen_range(0.05..0.5);
    let lists: Vec<Vec<usize>> = (0..n).map(|_| (0..n).filter(|_| rng.gen_bool(p)).collect()).collect();
    Digraph::from_lists(&lists)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub graphs: usize,
    pub pairs: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks one graph; returns the pair count and a list of failures.
pub fn check_graph(g: &Digraph) -> (usize, Vec<String>) {
    let n = g.node_count();
    let mut fails = Vec::new();
    let all = vec![true; n];
    let reach = dense_closure(g, &all);
    let cr: Vec<bool> = (0..n).map(|v| reach[v][v]).collect();
    let md = morse(g);
    for v in 0..n {
        if md.is_recurrent(v) != cr[v] {
            fails.push(format!("recurrence of node {v}"));
        }
    }
    let pairs = enumerate_pairs(g, &md, &Lift::Identity);
    let mut union = vec![false; n];
    let mut inter = vec![true; n];
    for (k, p) in pairs.iter().enumerate() {
        let a: Vec<bool> = (0..n).map(|v| p.attractor[v]).collect();
        if (0..n).any(|u| a[u] && (0..n).any(|v| g.has_edge(u, v) && !a[v])) {
            fails.push(format!("pair {k}: attractor not forward invariant"));
        }
        // Outside the basin: an infinite walk avoiding A exists.
        let not_a: Vec<bool> = a.iter().map(|&x| !x).collect();
        let ra = dense_closure(g, &not_a);
        let escapes = |v: usize| not_a[v] && (0..n).any(|u| (u == v || ra[v][u]) && ra[u][u]);
        let b: Vec<bool> = (0..n).map(|v| !escapes(v)).collect();
        let not_b: Vec<bool> = b.iter().map(|&x| !x).collect();
        let rb = dense_closure(g, &not_b);
        let r: Vec<bool> = (0..n).map(|v| not_b[v] && (0..n).any(|c| not_b[c] && cr[c] && (c == v || rb[c][v]))).collect();
        for v in 0..n {
            if p.basin[v] != b[v] {
                fails.push(format!("pair {k}: basin at node {v}"));
            }
            if p.repeller[v] != r[v] {
                fails.push(format!("pair {k}: repeller at node {v}"));
            }
            if p.coarse_repeller[v] != not_b[v] {
                fails.push(format!("pair {k}: coarse repeller at node {v}"));
            }
            union[v] |= b[v] && !a[v];
            inter[v] &= a[v] || r[v];
        }
    }
    for v in 0..n {
        if union[v] == cr[v] {
            fails.push(format!("union identity at node {v}"));
        }
        if inter[v] != cr[v] {
            fails.push(format!("intersection identity at node {v}"));
        }
    }
    if !verify_decomposition(g, &md, &pairs).holds() {
        fails.push("library residuals nonempty".into());
    }
    match complete_lyapunov(g, &md, &pairs) {
        Ok(field) => {
            if !field.check_properties(g, &md, &FiberLayout::single(n)).all_hold() {
                fails.push("Lyapunov properties".into());
            }
        }
        Err(e) => fails.push(format!("Lyapunov construction: {e}")),
    }
    (pairs.len(), fails)
}

/// Runs `count` seeded random graphs with at most `max_nodes` nodes.
pub fn run_oracle_suite(count: usize, max_nodes: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::default();
    for i in 0..count {
        let g = random_digraph(&mut rng, max_nodes);
        let (pairs, fails) = check_graph(&g);
        report.graphs += 1;
        report.pairs += pairs;
        report.failures.extend(fails.into_iter().map(|f| format!("graph {i}: {f}")));
    }
    report
}
