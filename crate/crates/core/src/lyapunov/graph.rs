//! Complete Lyapunov function on a transition graph.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Zero};

use crate::conley::{AttractorRepellerPair, MorseDecomposition};
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::transition::FiberLayout;

const ON_REPELLER: u32 = u32::MAX;

/// Values of one pair function: 0 on `A`, 1 on `X \ B`, and
/// `rank / (rank_max + 1)` on `B \ A`, where `rank` is the length of the
/// longest walk inside `B \ A` plus one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFunction {
    ranks: Vec<u32>,
    pub rank_max: u32,
}

impl PairFunction {
    /// `(numerator, denominator)` of `l(v)`.
    pub fn fraction(&self, v: usize) -> (u64, u64) {
        match self.ranks[v] {
            0 => (0, 1),
            ON_REPELLER => (1, 1),
            r => (r as u64, self.rank_max as u64 + 1),
        }
    }

    pub fn value<T: Num + FromPrimitive>(&self, v: usize) -> T {
        let (n, d) = self.fraction(v);
        T::from_u64(n).expect("numerator") / T::from_u64(d).expect("denominator")
    }

    pub fn is_zero(&self, v: usize) -> bool {
        self.ranks[v] == 0
    }

    pub fn is_one(&self, v: usize) -> bool {
        self.ranks[v] == ON_REPELLER
    }

    fn cmp_nodes(&self, u: usize, v: usize) -> Ordering {
        // Ranks order the values within one pair function.
        self.ranks[u].cmp(&self.ranks[v])
    }
}

/// Builds the pair function for `pair`.
pub fn pair_function(g: &Digraph, md: &MorseDecomposition, pair: &AttractorRepellerPair) -> Result<PairFunction> {
    let n = g.node_count();
    let mut ranks = vec![0u32; n];
    let mut rank_max = 0;
    // SCC ids ascend from sinks, so successors are ranked first.
    for s in 0..md.scc_count() {
        for &v in md.members(s) {
            let v = v as usize;
            if pair.attractor[v] {
                continue;
            }
            if !pair.basin[v] {
                ranks[v] = ON_REPELLER;
                continue;
            }
            if md.cyclic[s] {
                return Err(Error::CycleInTransientSet { node: v });
            }
            let mut r = 0;
            for &w in g.successors(v) {
                let w = w as usize;
                if !pair.basin[w] {
                    return Err(Error::CycleInTransientSet { node: v });
                }
                if !pair.attractor[w] {
                    r = r.max(ranks[w]);
                }
            }
            ranks[v] = r + 1;
            rank_max = rank_max.max(r + 1);
        }
    }
    Ok(PairFunction { ranks, rank_max })
}

/// `L = sum_n 2 l_n / 3^n` over the enumerated pairs, `n` starting at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LyapunovField {
    pub functions: Vec<PairFunction>,
}

pub fn complete_lyapunov(g: &Digraph, md: &MorseDecomposition, pairs: &[AttractorRepellerPair]) -> Result<LyapunovField> {
    let functions = pairs.iter().map(|p| pair_function(g, md, p)).collect::<Result<_>>()?;
    Ok(LyapunovField { functions })
}

impl LyapunovField {
    pub fn pair_count(&self) -> usize {
        self.functions.len()
    }

    /// `L(v)` in any exact or floating scalar.
    pub fn value<T: Num + FromPrimitive + Clone>(&self, v: usize) -> T {
        let three = T::from_u8(3).expect("3");
        let mut weight = T::from_u8(2).expect("2") / three.clone();
        let mut acc = T::zero();
        for f in &self.functions {
            acc = acc + weight.clone() * f.value::<T>(v);
            weight = weight / three.clone();
        }
        acc
    }

    pub fn value_f64(&self, v: usize) -> f64 {
        self.value::<f64>(v)
    }

    pub fn value_exact(&self, v: usize) -> BigRational {
        self.value::<BigRational>(v)
    }

    /// Largest contribution of further pairs: `3^-N`.
    pub fn truncation_bound(&self) -> f64 {
        3f64.powi(-(self.functions.len() as i32))
    }

    /// Base-3 digits of `L(v)` when every `l_n(v)` is 0 or 1.
    pub fn ternary_digits(&self, v: usize) -> Option<Vec<u8>> {
        self.functions
            .iter()
            .map(|f| if f.is_zero(v) { Some(0) } else if f.is_one(v) { Some(2) } else { None })
            .collect()
    }

    /// Exact comparison of `L(u)` and `L(v)`.
    pub fn compare(&self, u: usize, v: usize) -> Ordering {
        let mut ge = true;
        let mut le = true;
        for f in &self.functions {
            match f.cmp_nodes(u, v) {
                Ordering::Less => ge = false,
                Ordering::Greater => le = false,
                Ordering::Equal => {}
            }
        }
        match (ge, le) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => self.value_exact(u).cmp(&self.value_exact(v)),
        }
    }

    fn same_vector(&self, u: usize, v: usize) -> bool {
        self.functions.iter().all(|f| f.ranks[u] == f.ranks[v])
    }

    /// Graph versions of the four defining properties, all checked exactly.
    pub fn check_properties(&self, g: &Digraph, md: &MorseDecomposition, layout: &FiberLayout) -> PropertyReport {
        let mut rep = PropertyReport {
            pairs: self.pair_count(),
            truncation_bound: self.truncation_bound(),
            cyclic_sccs: md.cyclic_count(),
            ..Default::default()
        };
        for s in 0..md.scc_count() {
            let m = md.members(s);
            let first = m[0] as usize;
            rep.scc_constant_violations += m.iter().filter(|&&v| !self.same_vector(first, v as usize)).count();
        }
        for (u, v) in g.edges() {
            let su = md.scc_of[u];
            let sv = md.scc_of[v];
            if su == sv {
                if md.cyclic[su as usize] && !self.same_vector(u, v) {
                    rep.cyclic_edge_violations += 1;
                }
                continue;
            }
            let ord = self.compare(u, v);
            if ord == Ordering::Less {
                rep.monotone_violations += 1;
            }
            let transient_somewhere = self.functions.iter().any(|f| f.ranks[u] != 0 && f.ranks[u] != ON_REPELLER);
            if transient_somewhere && ord != Ordering::Greater {
                rep.strict_violations += 1;
            }
        }
        let mut keys: HashMap<(Option<usize>, Vec<u8>), u32> = HashMap::new();
        let mut global: HashMap<Vec<u8>, ()> = HashMap::new();
        for v in md.recurrent_nodes() {
            let Some(digits) = self.ternary_digits(v) else {
                rep.cantor_violations += 1;
                continue;
            };
            global.insert(digits.clone(), ());
            let s = md.scc_of[v];
            match keys.entry((layout.fiber_of(v), digits)) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    if *e.get() != s {
                        rep.distinctness_collisions += 1;
                    }
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(s);
                }
            }
        }
        rep.distinct_cyclic_values = global.len();
        rep
    }
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct PropertyReport {
    pub pairs: usize,
    pub truncation_bound: f64,
    pub cyclic_sccs: usize,
    /// Nodes whose pair values differ from the rest of their SCC.
    pub scc_constant_violations: usize,
    /// (a) edges inside a cyclic SCC along which L changes.
    pub cyclic_edge_violations: usize,
    /// (b) edges along which L increases.
    pub monotone_violations: usize,
    /// (b) edges between SCCs, leaving a transient node, along which L does not drop.
    pub strict_violations: usize,
    /// (c) chain recurrent nodes with a pair value outside {0, 1}.
    pub cantor_violations: usize,
    /// (d) chain recurrent nodes sharing a fiber and an L value with another SCC.
    pub distinctness_collisions: usize,
    pub distinct_cyclic_values: usize,
}

impl PropertyReport {
    pub fn a_holds(&self) -> bool {
        self.cyclic_edge_violations == 0 && self.scc_constant_violations == 0
    }

    pub fn b_holds(&self) -> bool {
        self.monotone_violations == 0 && self.strict_violations == 0
    }

    pub fn c_holds(&self) -> bool {
        self.cantor_violations == 0
    }

    pub fn d_holds(&self) -> bool {
        self.distinctness_collisions == 0
    }

    pub fn all_hold(&self) -> bool {
        self.a_holds() && self.b_holds() && self.c_holds() && self.d_holds()
    }
}

/// Exact `L(v)` as a reduced fraction string.
pub fn exact_string(q: &BigRational) -> String {
    if q.denom() == &BigInt::from(1) || q.is_zero() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
