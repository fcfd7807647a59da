use rayon::prelude::*;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nds::{CocycleSystem, Workspace};
use crate::sampling::BaseSampling;
use crate::scalar::{norm, Real};
use crate::transition::{ChainMode, EscapePolicy, GraphMeta, TransitionGraph};

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionOptions<S> {
    pub mode: ChainMode,
    pub leg_steps: usize,
    /// Points per box and axis; 2 means corners. The center is always added.
    pub scheme: usize,
    /// Absolute padding of every image hull.
    pub eps_pad: S,
    pub escape: EscapePolicy,
    /// Worker threads; the result does not depend on it.
    pub workers: usize,
}

impl<S: Real> Default for TransitionOptions<S> {
    fn default() -> Self {
        TransitionOptions {
            mode: ChainMode::Skew,
            leg_steps: 1,
            scheme: 2,
            eps_pad: S::zero(),
            escape: EscapePolicy::Absorb,
            workers: 1,
        }
    }
}

/// Sampled images of one box.
#[derive(Clone, Debug, Default)]
pub struct BoxImages<'a, S> {
    /// Every image that did not diverge, corners and center included.
    pub points: Vec<&'a [S]>,
    pub center: Option<&'a [S]>,
    /// Corner images; the curvature pad is only used when all are present.
    pub corners: Vec<&'a [S]>,
    pub corner_total: usize,
    pub diverged: bool,
}

/// Boxes met by the image hull of one box plus its padding.
///
/// The hull is the axis-aligned bounding box of the sampled images, padded by
/// `eps_pad` plus how far the center image sticks out of the bounding box of
/// the corner images (a second-order estimate of how far the true image
/// bulges past the samples). Returns the boxes and whether some image left
/// the window.
pub fn cover_box_images<S: Real>(grid: &Grid<S>, imgs: &BoxImages<'_, S>, eps_pad: S) -> (Vec<usize>, bool) {
    let d = grid.dim();
    let Some(&first) = imgs.center.as_ref().or(imgs.points.first()) else {
        return (Vec::new(), true);
    };
    let reference = first.to_vec();
    let unwrap = |v: &[S], out: &mut Vec<S>| {
        out.clear();
        for a in 0..d {
            let mut x = v[a];
            if grid.circular()[a] {
                let w = grid.hi()[a] - grid.lo()[a];
                x -= w * ((x - reference[a]) / w).round();
            }
            out.push(x);
        }
    };
    let mut lo = vec![S::infinity(); d];
    let mut hi = vec![S::neg_infinity(); d];
    let mut buf = Vec::with_capacity(d);
    let mut escaped = imgs.diverged;
    for p in &imgs.points {
        unwrap(p, &mut buf);
        for a in 0..d {
            lo[a] = lo[a].min(buf[a]);
            hi[a] = hi[a].max(buf[a]);
            if !grid.circular()[a] && (buf[a] < grid.lo()[a] || buf[a] > grid.hi()[a]) {
                escaped = true;
            }
        }
    }
    let mut pad = eps_pad;
    if let Some(c) = imgs.center {
        if !imgs.corners.is_empty() && imgs.corners.len() == imgs.corner_total {
            let mut clo = vec![S::infinity(); d];
            let mut chi = vec![S::neg_infinity(); d];
            for q in &imgs.corners {
                unwrap(q, &mut buf);
                for a in 0..d {
                    clo[a] = clo[a].min(buf[a]);
                    chi[a] = chi[a].max(buf[a]);
                }
            }
            unwrap(c, &mut buf);
            let bulge: Vec<S> = (0..d)
                .map(|a| (buf[a] - chi[a]).max(clo[a] - buf[a]).max(S::zero()))
                .collect();
            pad += norm(&bulge);
        }
    }
    for a in 0..d {
        lo[a] -= pad;
        hi[a] += pad;
    }
    (grid.cover(&lo, &hi).boxes, escaped)
}

struct Lattice {
    per_box: usize,
    points_per_axis: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Lattice {
    fn new<S: Real>(grid: &Grid<S>, k: usize) -> Self {
        let d = grid.dim();
        if k < 2 {
            return Lattice { per_box: 1, points_per_axis: vec![0; d], strides: vec![0; d], total: 0 };
        }
        let points_per_axis: Vec<usize> = grid.counts().iter().map(|&c| c * (k - 1) + 1).collect();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * points_per_axis[a + 1];
        }
        Lattice {
            per_box: k,
            total: points_per_axis.iter().product(),
            points_per_axis,
            strides,
        }
    }

    fn point<S: Real>(&self, grid: &Grid<S>, idx: usize, out: &mut [S]) {
        let k = S::from_usize_lossy(self.per_box - 1);
        for a in 0..grid.dim() {
            let j = (idx / self.strides[a]) % self.points_per_axis[a];
            out[a] = if j + 1 == self.points_per_axis[a] {
                grid.hi()[a]
            } else {
                grid.lo()[a] + S::from_usize_lossy(j) * (grid.box_width(a) / k)
            };
        }
    }
}

fn evolve_all<S: Real>(
    sys: &CocycleSystem<S>,
    q: S,
    tau: S,
    count: usize,
    dim: usize,
    place: impl Fn(usize, &mut [S]) + Sync,
) -> (Vec<S>, Vec<bool>) {
    let mut pts = vec![S::zero(); count * dim];
    let mut ok = vec![false; count];
    pts.par_chunks_mut(dim)
        .zip(ok.par_iter_mut())
        .enumerate()
        .for_each_init(
            || Workspace::new(dim),
            |ws, (j, (x, flag))| {
                place(j, x);
                *flag = sys.evolve_in_place(q, x, tau, ws).is_ok();
            },
        );
    (pts, ok)
}

fn check_inputs<S: Real>(sys: &CocycleSystem<S>, grid: &Grid<S>, sampling: &BaseSampling<S>, opts: &TransitionOptions<S>) -> Result<()> {
    if grid.dim() != sys.dim {
        return Err(Error::InvalidInput(format!("grid dimension {} differs from system dimension {}", grid.dim(), sys.dim)));
    }
    if sampling.base != sys.base {
        return Err(Error::IncompatibleSampling("sampling was built for a different base flow".into()));
    }
    if grid.circular() != sys.circular.as_slice() {
        return Err(Error::InvalidInput("grid circular flags differ from the system".into()));
    }
    for a in 0..sys.dim {
        let (lo, hi) = sys.window[a];
        let slack = S::lit(1e-12) * (hi - lo);
        if grid.lo()[a] < lo - slack || grid.hi()[a] > hi + slack {
            return Err(Error::InvalidInput(format!("grid axis {a} exceeds the system window")));
        }
    }
    if opts.scheme == 0 || opts.leg_steps == 0 {
        return Err(Error::InvalidInput("scheme and leg_steps must be at least 1".into()));
    }
    if !(opts.eps_pad >= S::zero()) {
        return Err(Error::InvalidInput("eps_pad must be nonnegative".into()));
    }
    Ok(())
}

/// Builds the transition graph. Deterministic for any worker count.
pub fn build_transition<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    sampling: &BaseSampling<S>,
    opts: &TransitionOptions<S>,
) -> Result<TransitionGraph<S>> {
    check_inputs(sys, grid, sampling, opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| build_inner(sys, grid, sampling, opts))
}

fn build_inner<S: Real>(
    sys: &CocycleSystem<S>,
    grid: &Grid<S>,
    sampling: &BaseSampling<S>,
    opts: &TransitionOptions<S>,
) -> Result<TransitionGraph<S>> {
    let d = grid.dim();
    let n = grid.box_count();
    let m = sampling.len();
    let tau = S::from_usize_lossy(opts.leg_steps) * sampling.step;
    let lattice = Lattice::new(grid, opts.scheme);
    let k = lattice.per_box;
    let corner_offsets: Vec<Vec<usize>> = if k >= 2 {
        (0..1usize << d)
            .map(|mask| (0..d).map(|a| if mask >> (d - 1 - a) & 1 == 1 { k - 1 } else { 0 }).collect())
            .collect()
    } else {
        Vec::new()
    };
    let samples_per_box = if k >= 2 { k.pow(d as u32) } else { 0 };

    let mut lists: Vec<Vec<u32>> = Vec::with_capacity(m * n);
    let mut escaped = vec![false; m * n];
    for i in 0..m {
        let (q, target) = match opts.mode {
            ChainMode::Skew => (sampling.samples[i], sampling.advance(i, opts.leg_steps)),
            ChainMode::Fiber => (sys.base.shift(sampling.samples[i], -tau), i),
        };
        let (lat, lat_ok) = evolve_all(sys, q, tau, lattice.total, d, |j, x| lattice.point(grid, j, x));
        let (cen, cen_ok) = evolve_all(sys, q, tau, n, d, |b, x| x.copy_from_slice(&grid.center(b)));

        let fiber: Vec<(Vec<u32>, bool)> = (0..n)
            .into_par_iter()
            .map(|b| {
                let c = grid.coords(b);
                let mut imgs = BoxImages {
                    corner_total: corner_offsets.len(),
                    ..Default::default()
                };
                let lattice_index = |off: &[usize]| -> usize {
                    (0..d).map(|a| (c[a] * (k - 1) + off[a]) * lattice.strides[a]).sum()
                };
                let mut off = vec![0usize; d];
                for s in 0..samples_per_box {
                    let mut r = s;
                    for a in (0..d).rev() {
                        off[a] = r % k;
                        r /= k;
                    }
                    let j = lattice_index(&off);
                    if lat_ok[j] {
                        imgs.points.push(&lat[j * d..(j + 1) * d]);
                    } else {
                        imgs.diverged = true;
                    }
                }
                for off in &corner_offsets {
                    let j = lattice_index(off);
                    if lat_ok[j] {
                        imgs.corners.push(&lat[j * d..(j + 1) * d]);
                    }
                }
                if cen_ok[b] {
                    let p = &cen[b * d..(b + 1) * d];
                    imgs.center = Some(p);
                    imgs.points.push(p);
                } else {
                    imgs.diverged = true;
                }
                let (boxes, esc) = cover_box_images(grid, &imgs, opts.eps_pad);
                let base = (target * n) as u32;
                (boxes.into_iter().map(|bb| base + bb as u32).collect(), esc)
            })
            .collect();
        for (b, (succ, esc)) in fiber.into_iter().enumerate() {
            escaped[i * n + b] = esc;
            lists.push(succ);
        }
    }

    let outside = match opts.escape {
        EscapePolicy::Absorb if escaped.iter().any(|&e| e) => Some(m * n),
        _ => None,
    };
    if let Some(o) = outside {
        for (v, list) in lists.iter_mut().enumerate() {
            if escaped[v] {
                list.push(o as u32);
            }
        }
        lists.push(vec![o as u32]);
        escaped.push(false);
    }
    let total = lists.len();
    if total > u32::MAX as usize {
        return Err(Error::TooManyBoxes { requested: total as u128, cap: u32::MAX as u64 });
    }
    let mut offsets = Vec::with_capacity(total + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
    for l in lists {
        targets.extend_from_slice(&l);
        offsets.push(targets.len());
    }
    let graph = Digraph::from_csr(offsets, targets)?;
    Ok(TransitionGraph {
        grid: grid.clone(),
        sampling: sampling.clone(),
        meta: GraphMeta {
            system: sys.name.clone(),
            mode: opts.mode,
            leg_steps: opts.leg_steps,
            eps_pad: opts.eps_pad,
            scheme: opts.scheme,
            integrator: sys.evaluator.describe(),
            escape: opts.escape,
        },
        graph,
        escaped,
        outside,
    })
}
