//! Fiberwise pullback images and their limits.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, Rect};
use crate::nds::{CocycleSystem, Workspace};
use crate::scalar::Real;
use crate::transition::{cover_box_images, BoxImages};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PullbackOptions<S> {
    /// Sample points per box and axis; the center is always added.
    pub scheme: usize,
    pub eps_pad: S,
}

impl<S: Real> Default for PullbackOptions<S> {
    fn default() -> Self {
        PullbackOptions { scheme: 2, eps_pad: S::zero() }
    }
}

/// Sample points of box `b`: a `k`-per-axis lattice (corners first) and the center.
fn box_samples<S: Real>(grid: &Grid<S>, b: usize, k: usize) -> (Vec<Vec<S>>, usize) {
    let r = grid.rect(b);
    let d = grid.dim();
    let mut pts = Vec::new();
    let mut corners = 0;
    if k >= 2 {
        for mask in 0..1usize << d {
            pts.push((0..d).map(|a| if mask >> a & 1 == 1 { r.hi[a] } else { r.lo[a] }).collect());
        }
        corners = pts.len();
        let km1 = S::from_usize_lossy(k - 1);
        for s in 0..k.pow(d as u32) {
            let mut rem = s;
            let mut off = vec![0usize; d];
            for o in off.iter_mut().rev() {
                *o = rem % k;
                rem /= k;
            }
            if off.iter().all(|&o| o == 0 || o == k - 1) {
                continue;
            }
            pts.push((0..d).map(|a| r.lo[a] + S::from_usize_lossy(off[a]) * (r.hi[a] - r.lo[a]) / km1).collect());
        }
    }
    pts.push(grid.center(b));
    (pts, corners)
}

fn evolve_samples<S: Real>(sys: &CocycleSystem<S>, q: S, s: S, pts: &mut [Vec<S>], ws: &mut Workspace<S>) -> Result<()> {
    for x in pts.iter_mut() {
        sys.evolve_in_place(q, x, s, ws)?;
    }
    Ok(())
}

/// Boxes covering the sampled image of `u` evolved for time `s` from base point `theta_{-s} p`.
pub fn pullback_image<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    p: S,
    u: &[usize],
    s: S,
    opts: &PullbackOptions<S>,
) -> Result<Vec<usize>> {
    if s < S::zero() {
        return Err(Error::InvalidInput("pullback time must be nonnegative".into()));
    }
    let q = sys.base.shift(p, -s);
    let per_box: Vec<Vec<usize>> = u
        .par_iter()
        .map_init(
            || Workspace::new(sys.dim),
            |ws, &b| -> Result<Vec<usize>> {
                let (mut pts, corners) = box_samples(grid, b, opts.scheme);
                evolve_samples(sys, q, s, &mut pts, ws)?;
                let imgs = BoxImages {
                    points: pts.iter().map(Vec::as_slice).collect(),
                    center: pts.last().map(Vec::as_slice),
                    corners: pts[..corners].iter().map(Vec::as_slice).collect(),
                    corner_total: corners,
                    diverged: false,
                };
                Ok(cover_box_images(grid, &imgs, opts.eps_pad).0)
            },
        )
        .collect::<Result<_>>()?;
    let mut out: Vec<usize> = per_box.into_iter().flatten().collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Symmetric Hausdorff distance between box unions, measured on box centers.
pub fn hausdorff<S: Real>(grid: &Grid<S>, a: &[usize], b: &[usize]) -> S {
    let semi = |x: &[usize], y: &[usize]| -> S {
        x.iter()
            .map(|&i| {
                let c = grid.center(i);
                y.iter().map(|&j| grid.distance_to_box(&c, j).max(S::zero())).fold(S::infinity(), S::min)
            })
            .fold(S::zero(), S::max)
    };
    if a.is_empty() || b.is_empty() {
        return S::zero();
    }
    semi(a, b).max(semi(b, a))
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullbackResult<S> {
    pub p: S,
    pub u: Vec<usize>,
    pub schedule: Vec<S>,
    pub coverings: Vec<Vec<usize>>,
    /// Whether each covering lies inside `U`.
    pub inside_u: Vec<bool>,
    /// First index from which coverings lie in `U` and shrink monotonically.
    pub nested_from: Option<usize>,
    pub a_approx: Vec<usize>,
    /// Hausdorff distances between successive coverings.
    pub successive: Vec<S>,
    pub converged: bool,
}

/// Iterates pullback images of `u` along `schedule` and intersects the nested tail.
pub fn pullback_attractor<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    p: S,
    u: &[usize],
    schedule: &[S],
    tol: S,
    opts: &PullbackOptions<S>,
) -> Result<PullbackResult<S>> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("schedule must be nonempty and strictly increasing".into()));
    }
    let mut u = u.to_vec();
    u.sort_unstable();
    u.dedup();
    let coverings = schedule
        .iter()
        .map(|&s| pullback_image(sys, grid, p, &u, s, opts))
        .collect::<Result<Vec<_>>>()?;
    let inside_u: Vec<bool> = coverings.iter().map(|c| is_subset(c, &u)).collect();
    let first_inside = inside_u.iter().position(|&b| b).ok_or(Error::NotNested)?;
    let k = coverings.len();
    let mut nested_from = None;
    for start in (0..k).rev() {
        let ok_here = inside_u[start] && (start + 1 == k || is_subset(&coverings[start + 1], &coverings[start]));
        if !ok_here {
            break;
        }
        nested_from = Some(start);
    }
    let from = nested_from.unwrap_or(first_inside);
    let mut a_approx = coverings[from].clone();
    for c in &coverings[from + 1..] {
        if nested_from.is_some() || is_subset(c, &u) {
            a_approx = intersect(&a_approx, c);
        }
    }
    let successive: Vec<S> = coverings.windows(2).map(|w| hausdorff(grid, &w[0], &w[1])).collect();
    let converged = nested_from.is_some() && successive.last().is_some_and(|&d| d <= tol);
    Ok(PullbackResult {
        p,
        u,
        schedule: schedule.to_vec(),
        coverings,
        inside_u,
        nested_from,
        a_approx,
        successive,
        converged,
    })
}

/// `dist(phi(s, theta_{-s} p) D, A)` along the schedule, measured from the
/// sampled image points of `d` to the rectangles of `a`; zero when either set is empty.
pub fn pullback_convergence<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    p: S,
    d: &[usize],
    a: &[Rect<S>],
    schedule: &[S],
    scheme: usize,
) -> Result<Vec<S>> {
    if schedule.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("schedule must be strictly increasing".into()));
    }
    let mut ws = Workspace::new(sys.dim);
    schedule
        .iter()
        .map(|&s| {
            if d.is_empty() || a.is_empty() {
                return Ok(S::zero());
            }
            let q = sys.base.shift(p, -s);
            let mut worst = S::zero();
            for &b in d {
                let (mut pts, _) = box_samples(grid, b, scheme);
                evolve_samples(sys, q, s, &mut pts, &mut ws)?;
                for x in &pts {
                    let near = a.iter().map(|r| r.distance_to(x)).fold(S::infinity(), S::min);
                    worst = worst.max(near);
                }
            }
            Ok(worst)
        })
        .collect()
}
