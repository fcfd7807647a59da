//! Compressed sparse row digraph and node sets.

use std::collections::VecDeque;

use bitvec::prelude::{BitVec, Lsb0};

use crate::error::{Error, Result};

pub type NodeSet = BitVec<usize, Lsb0>;

pub fn empty_set(n: usize) -> NodeSet {
    BitVec::repeat(false, n)
}

pub fn full_set(n: usize) -> NodeSet {
    BitVec::repeat(true, n)
}

pub fn set_from(n: usize, nodes: impl IntoIterator<Item = usize>) -> NodeSet {
    let mut s = empty_set(n);
    for v in nodes {
        s.set(v, true);
    }
    s
}

/// Sorted member list of a set.
pub fn members(s: &NodeSet) -> Vec<usize> {
    s.iter_ones().collect()
}

/// Directed graph with sorted, duplicate-free successor lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Digraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Digraph {
    /// Builds from adjacency lists, sorting and deduplicating each list.
    pub fn from_lists<L: AsRef<[usize]>>(lists: &[L]) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for l in lists {
            let mut v: Vec<u32> = l.as_ref().iter().map(|&x| x as u32).collect();
            v.sort_unstable();
            v.dedup();
            assert!(v.iter().all(|&x| (x as usize) < n), "edge target out of range");
            targets.extend_from_slice(&v);
            offsets.push(targets.len());
        }
        Digraph { offsets, targets }
    }

    /// Builds from raw CSR arrays, validating ranges and list order.
    pub fn from_csr(offsets: Vec<usize>, targets: Vec<u32>) -> Result<Self> {
        if offsets.first() != Some(&0) || offsets.last() != Some(&targets.len()) {
            return Err(Error::InvalidInput("malformed CSR offsets".into()));
        }
        let n = offsets.len() - 1;
        for v in 0..n {
            if offsets[v] > offsets[v + 1] {
                return Err(Error::InvalidInput("CSR offsets decrease".into()));
            }
            let s = &targets[offsets[v]..offsets[v + 1]];
            if s.windows(2).any(|w| w[0] >= w[1]) || s.iter().any(|&t| t as usize >= n) {
                return Err(Error::InvalidInput(format!("successors of node {v} unsorted or out of range")));
            }
        }
        Ok(Digraph { offsets, targets })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn successors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.successors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| self.successors(u).iter().map(move |&v| (u, v as usize)))
    }

    pub fn reverse(&self) -> Digraph {
        let n = self.node_count();
        let mut deg = vec![0usize; n + 1];
        for &t in &self.targets {
            deg[t as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut targets = vec![0u32; self.targets.len()];
        for u in 0..n {
            for &v in self.successors(u) {
                targets[fill[v as usize]] = u as u32;
                fill[v as usize] += 1;
            }
        }
        Digraph { offsets: deg, targets }
    }

    /// Nodes reachable from `starts` by walks of length >= 0.
    pub fn closure(&self, starts: impl IntoIterator<Item = usize>) -> NodeSet {
        let mut seen = empty_set(self.node_count());
        let mut queue = VecDeque::new();
        for s in starts {
            if !seen[s] {
                seen.set(s, true);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in self.successors(u) {
                let v = v as usize;
                if !seen[v] {
                    seen.set(v, true);
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Shortest walk of length >= 1 from `from` to `to`, as a node list.
    pub fn shortest_walk(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.node_count();
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &v in self.successors(from) {
            let v = v as usize;
            if parent[v] == usize::MAX {
                parent[v] = from;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                loop {
                    cur = parent[cur];
                    path.push(cur);
                    if cur == from && path.len() >= 2 {
                        break;
                    }
                }
                path.reverse();
                return Some(path);
            }
            for &v in self.successors(u) {
                let v = v as usize;
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }
}
