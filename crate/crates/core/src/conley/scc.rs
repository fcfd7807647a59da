//! Strongly connected components and the condensation.

use crate::digraph::Digraph;

/// SCC partition of a digraph.
///
/// SCC ids follow Tarjan completion order, so every condensation edge goes
/// from a larger id to a smaller one; `topo_order` lists sources first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorseDecomposition {
    pub scc_of: Vec<u32>,
    pub cyclic: Vec<bool>,
    pub condensation: Digraph,
    pub topo_order: Vec<usize>,
    member_offsets: Vec<usize>,
    members: Vec<u32>,
}

const UNVISITED: u32 = u32::MAX;

impl MorseDecomposition {
    pub fn scc_count(&self) -> usize {
        self.cyclic.len()
    }

    /// Sorted nodes of SCC `c`.
    pub fn members(&self, c: usize) -> &[u32] {
        &self.members[self.member_offsets[c]..self.member_offsets[c + 1]]
    }

    pub fn is_recurrent(&self, v: usize) -> bool {
        self.cyclic[self.scc_of[v] as usize]
    }

    pub fn cyclic_count(&self) -> usize {
        self.cyclic.iter().filter(|&&c| c).count()
    }

    /// Nodes of cyclic SCCs (the combinatorial chain recurrent set).
    pub fn recurrent_nodes(&self) -> Vec<usize> {
        (0..self.scc_of.len()).filter(|&v| self.is_recurrent(v)).collect()
    }
}

/// Tarjan's algorithm, iterative, linear in nodes plus edges.
pub fn morse(g: &Digraph) -> MorseDecomposition {
    let n = g.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut calls: Vec<(u32, usize)> = Vec::new();
    let mut scc_of = vec![UNVISITED; n];
    let mut comps: Vec<Vec<u32>> = Vec::new();
    let mut next = 0u32;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        calls.push((root as u32, 0));
        while let Some(top) = calls.last_mut() {
            let v = top.0 as usize;
            let succ = g.successors(v);
            if top.1 < succ.len() {
                let w = succ[top.1] as usize;
                top.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    calls.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if low[v] == index[v] {
                let id = comps.len() as u32;
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack") as usize;
                    on_stack[w] = false;
                    scc_of[w] = id;
                    comp.push(w as u32);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
            if let Some(&(parent, _)) = calls.last() {
                let p = parent as usize;
                low[p] = low[p].min(low[v]);
            }
        }
    }

    let c = comps.len();
    let cyclic: Vec<bool> = comps
        .iter()
        .map(|m| m.len() > 1 || g.has_edge(m[0] as usize, m[0] as usize))
        .collect();
    let mut cond: Vec<Vec<usize>> = vec![Vec::new(); c];
    for u in 0..n {
        let cu = scc_of[u] as usize;
        for &w in g.successors(u) {
            let cw = scc_of[w as usize] as usize;
            if cw != cu {
                cond[cu].push(cw);
            }
        }
    }
    let mut member_offsets = Vec::with_capacity(c + 1);
    member_offsets.push(0);
    let mut members = Vec::with_capacity(n);
    for m in &comps {
        members.extend_from_slice(m);
        member_offsets.push(members.len());
    }
    MorseDecomposition {
        scc_of,
        cyclic,
        condensation: Digraph::from_lists(&cond),
        topo_order: (0..c).rev().collect(),
        member_offsets,
        members,
    }
}
