//! Chain queries on graphs and on the underlying system.

use std::collections::{HashSet, VecDeque};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::grid::{Grid, DEFAULT_MAX_BOXES};
use crate::nds::{CocycleSystem, Workspace};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainQuery {
    pub reachable: bool,
    /// Node path `from, .., to` with at least one edge.
    pub path: Option<Vec<usize>>,
}

/// Whether a walk of length >= 1 leads from `from` to `to`; returns a shortest one.
pub fn chain_exists(g: &Digraph, from: usize, to: usize) -> ChainQuery {
    let path = g.shortest_walk(from, to);
    ChainQuery { reachable: path.is_some(), path }
}

/// A verified chain `x_1 = x, .., x_{n+1} = y` with legs of time `T` in fiber `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainCertificate<S> {
    pub points: Vec<Vec<S>>,
    pub times: Vec<S>,
    /// `d(phi(t_i, theta_{-t_i} p) x_i, x_{i+1})`, each below epsilon.
    pub defects: Vec<S>,
}

/// Searches for an `(eps, T)`-chain from `x` to `y` in fiber `p`.
///
/// Breadth-first search over boxes of diameter at most `eps / 2`. Each box
/// visited keeps one representative point: the point of the box closest to
/// the image that reached it. Legs are re-integrated to measure the defects.
/// `NotFound` means only that no chain was found at this resolution.
#[allow(clippy::too_many_arguments)]
pub fn numeric_chain<S: Real>(
    sys: &CocycleSystem<S>,
    p: S,
    x: &[S],
    y: &[S],
    eps: S,
    t: S,
    max_legs: usize,
) -> Result<ChainCertificate<S>> {
    if !(eps > S::zero()) || !(t > S::zero()) {
        return Err(Error::InvalidInput("numeric_chain needs eps > 0 and T > 0".into()));
    }
    let d = sys.dim;
    let root_d = S::from_usize_lossy(d).sqrt();
    let depth: Vec<u32> = sys
        .window
        .iter()
        .map(|&(lo, hi)| {
            let ratio = (hi - lo) * root_d * S::lit(2.0) / eps;
            ratio.log2().ceil().max(S::zero()).to_u32().unwrap_or(0)
        })
        .collect();
    let grid = Grid::new(&sys.window, &depth, &sys.circular, DEFAULT_MAX_BOXES)?;
    let q = sys.base.shift(p, -t);
    let mut ws = Workspace::new(d);
    let leg = |z: &[S], ws: &mut Workspace<S>| -> Option<Vec<S>> {
        let mut out = z.to_vec();
        sys.evolve_in_place(q, &mut out, t, ws).ok()?;
        Some(out)
    };

    struct Node<S> {
        point: Vec<S>,
        parent: Option<usize>,
        legs: usize,
    }
    let mut nodes = vec![Node { point: x.to_vec(), parent: None, legs: 0 }];
    let mut visited: HashSet<usize> = grid.box_of(x).into_iter().collect();
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        if nodes[u].legs >= max_legs {
            continue;
        }
        let Some(z) = leg(&nodes[u].point, &mut ws) else { continue };
        if sys.state_distance(&z, y) < eps {
            let mut points = vec![y.to_vec()];
            let mut cur = Some(u);
            while let Some(c) = cur {
                points.push(nodes[c].point.clone());
                cur = nodes[c].parent;
            }
            points.reverse();
            let mut defects = Vec::with_capacity(points.len() - 1);
            for w in points.windows(2) {
                let img = leg(&w[0], &mut ws).ok_or(Error::NotFound { max_legs })?;
                defects.push(sys.state_distance(&img, &w[1]));
            }
            debug_assert!(defects.iter().all(|&e| e < eps));
            return Ok(ChainCertificate { times: vec![t; defects.len()], points, defects });
        }
        let lo: Vec<S> = z.iter().map(|&v| v - eps).collect();
        let hi: Vec<S> = z.iter().map(|&v| v + eps).collect();
        for b in grid.cover(&lo, &hi).boxes {
            if visited.contains(&b) || grid.distance_to_box(&z, b) >= eps {
                continue;
            }
            let rep = closest_point(&grid, b, &z);
            if sys.state_distance(&z, &rep) >= eps {
                continue;
            }
            visited.insert(b);
            nodes.push(Node { point: rep, parent: Some(u), legs: nodes[u].legs + 1 });
            queue.push_back(nodes.len() - 1);
        }
    }
    Err(Error::NotFound { max_legs })
}

fn closest_point<S: Real>(grid: &Grid<S>, b: usize, z: &[S]) -> Vec<S> {
    let r = grid.rect(b);
    (0..grid.dim())
        .map(|a| {
            let clamp = |v: S| v.max(r.lo[a]).min(r.hi[a]);
            if grid.circular()[a] {
                let w = grid.hi()[a] - grid.lo()[a];
                [z[a], z[a] - w, z[a] + w]
                    .into_iter()
                    .map(|v| (clamp(v), (clamp(v) - v).abs()))
                    .fold((clamp(z[a]), S::infinity()), |best, c| if c.1 < best.1 { c } else { best })
                    .0
            } else {
                clamp(z[a])
            }
        })
        .collect()
}
