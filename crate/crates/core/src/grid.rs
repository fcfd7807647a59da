//! Uniform box partitions of a rectangular state window.
//!
//! Boxes are numbered row-major with the first axis most significant. Every
//! box is half-open `[lo, hi)` except that the upper window face belongs to
//! the last box on non-circular axes.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_MAX_BOXES: u64 = 1 << 26;

/// Closed axis-aligned rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect<S> {
    pub lo: Vec<S>,
    pub hi: Vec<S>,
}

impl<S: Real> Rect<S> {
    pub fn new(lo: Vec<S>, hi: Vec<S>) -> Self {
        Rect { lo, hi }
    }

    pub fn point(x: &[S]) -> Self {
        Rect { lo: x.to_vec(), hi: x.to_vec() }
    }

    pub fn contains(&self, x: &[S]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| v >= l && v <= h)
    }

    /// Euclidean distance from `x` (zero inside).
    pub fn distance_to(&self, x: &[S]) -> S {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| {
                let g = if v < l { l - v } else if v > h { v - h } else { S::zero() };
                g * g
            })
            .sum::<S>()
            .sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<S> {
    lo: Vec<S>,
    hi: Vec<S>,
    depth: Vec<u32>,
    circular: Vec<bool>,
    counts: Vec<usize>,
    strides: Vec<usize>,
    width: Vec<S>,
    boxes: usize,
}

/// Result of covering a rectangle by boxes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Covering {
    /// Sorted, duplicate-free box indices.
    pub boxes: Vec<usize>,
    /// Part of the rectangle lies outside the window.
    pub leaves_window: bool,
}

/// Builds a grid after checking the box count against `cap`.
pub fn build_grid<S: Real>(window: &[(S, S)], depth: &[u32], circular: &[bool], cap: u64) -> Result<Grid<S>> {
    Grid::new(window, depth, circular, cap)
}

impl<S: Real> Grid<S> {
    pub fn new(window: &[(S, S)], depth: &[u32], circular: &[bool], cap: u64) -> Result<Self> {
        let dim = window.len();
        if dim == 0 || depth.len() != dim || circular.len() != dim {
            return Err(Error::InvalidInput(format!(
                "grid needs matching window/depth/circular lengths, got {}/{}/{}",
                dim,
                depth.len(),
                circular.len()
            )));
        }
        for (i, &(lo, hi)) in window.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInput(format!("grid axis {i}: need finite lo < hi")));
            }
        }
        let total: u32 = depth.iter().sum();
        let requested: u128 = if total >= 127 { u128::MAX } else { 1u128 << total };
        if total > 60 || requested > cap as u128 {
            return Err(Error::TooManyBoxes { requested, cap });
        }
        let counts: Vec<usize> = depth.iter().map(|&k| 1usize << k).collect();
        let mut strides = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * counts[a + 1];
        }
        let width = window
            .iter()
            .zip(&counts)
            .map(|(&(lo, hi), &c)| (hi - lo) / S::from_usize_lossy(c))
            .collect();
        Ok(Grid {
            lo: window.iter().map(|w| w.0).collect(),
            hi: window.iter().map(|w| w.1).collect(),
            depth: depth.to_vec(),
            circular: circular.to_vec(),
            boxes: counts.iter().product(),
            counts,
            strides,
            width,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn box_count(&self) -> usize {
        self.boxes
    }

    pub fn window(&self) -> Vec<(S, S)> {
        self.lo.iter().copied().zip(self.hi.iter().copied()).collect()
    }

    pub fn lo(&self) -> &[S] {
        &self.lo
    }

    pub fn hi(&self) -> &[S] {
        &self.hi
    }

    pub fn depth(&self) -> &[u32] {
        &self.depth
    }

    pub fn circular(&self) -> &[bool] {
        &self.circular
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn box_width(&self, axis: usize) -> S {
        self.width[axis]
    }

    pub fn widths(&self) -> &[S] {
        &self.width
    }

    /// Euclidean diameter shared by all boxes.
    pub fn diameter(&self) -> S {
        self.width.iter().map(|&w| w * w).sum::<S>().sqrt()
    }

    pub fn coords(&self, b: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| (b / self.strides[a]) % self.counts[a]).collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(&c, &s)| c * s).sum()
    }

    pub fn rect(&self, b: usize) -> Rect<S> {
        let c = self.coords(b);
        let lo: Vec<S> = (0..self.dim())
            .map(|a| self.lo[a] + S::from_usize_lossy(c[a]) * self.width[a])
            .collect();
        let hi = (0..self.dim())
            .map(|a| {
                if c[a] + 1 == self.counts[a] {
                    self.hi[a]
                } else {
                    self.lo[a] + S::from_usize_lossy(c[a] + 1) * self.width[a]
                }
            })
            .collect();
        Rect { lo, hi }
    }

    pub fn center(&self, b: usize) -> Vec<S> {
        let c = self.coords(b);
        (0..self.dim())
            .map(|a| self.lo[a] + (S::from_usize_lossy(c[a]) + S::lit(0.5)) * self.width[a])
            .collect()
    }

    /// Wraps circular coordinates into the window.
    pub fn wrap(&self, x: &mut [S]) {
        for a in 0..self.dim() {
            if self.circular[a] {
                let w = self.hi[a] - self.lo[a];
                let mut r = (x[a] - self.lo[a]) % w;
                if r < S::zero() {
                    r += w;
                }
                if r >= w {
                    r = S::zero();
                }
                x[a] = self.lo[a] + r;
            }
        }
    }

    /// Box containing `x`, or `None` outside the window.
    pub fn box_of(&self, x: &[S]) -> Option<usize> {
        let mut b = 0;
        for a in 0..self.dim() {
            let mut v = x[a];
            if self.circular[a] {
                let w = self.hi[a] - self.lo[a];
                v = self.lo[a] + (v - self.lo[a]) % w;
                if v < self.lo[a] {
                    v += w;
                }
            } else if !(v >= self.lo[a] && v <= self.hi[a]) {
                return None;
            }
            let raw = ((v - self.lo[a]) / self.width[a]).floor();
            let c = raw.to_usize().unwrap_or(0).min(self.counts[a] - 1);
            b += c * self.strides[a];
        }
        Some(b)
    }

    /// Index range `[first, last]` (in unbounded box units) of boxes meeting `[lo, hi]` on an axis.
    fn axis_range(&self, a: usize, lo: S, hi: S) -> (i64, i64) {
        let tol = S::epsilon().sqrt();
        let s = (lo - self.lo[a]) / self.width[a];
        let e = (hi - self.lo[a]) / self.width[a];
        let first = (s + tol).floor().to_i64().unwrap_or(i64::MIN / 4);
        let last = ((e - tol).ceil().to_i64().unwrap_or(i64::MAX / 4) - 1).max(first);
        (first, last)
    }

    /// All boxes meeting the closed rectangle `[lo, hi]`, up to a relative
    /// tolerance of `sqrt(eps)` box widths at the faces. On circular axes the
    /// rectangle is read in unwrapped coordinates.
    pub fn cover(&self, lo: &[S], hi: &[S]) -> Covering {
        let d = self.dim();
        let mut leaves = false;
        let mut per_axis: Vec<Vec<usize>> = Vec::with_capacity(d);
        for a in 0..d {
            let (first, last) = self.axis_range(a, lo[a], hi[a]);
            let n = self.counts[a] as i64;
            if self.circular[a] {
                if last - first + 1 >= n {
                    per_axis.push((0..self.counts[a]).collect());
                } else {
                    let mut v: Vec<usize> = (first..=last).map(|k| k.rem_euclid(n) as usize).collect();
                    v.sort_unstable();
                    per_axis.push(v);
                }
            } else {
                if first < 0 || last >= n {
                    leaves = true;
                }
                let f = first.max(0);
                let l = last.min(n - 1);
                if f > l {
                    return Covering { boxes: Vec::new(), leaves_window: true };
                }
                per_axis.push((f as usize..=l as usize).collect());
            }
        }
        let mut boxes = Vec::with_capacity(per_axis.iter().map(Vec::len).product());
        let mut idx = vec![0usize; d];
        'outer: loop {
            boxes.push((0..d).map(|a| per_axis[a][idx[a]] * self.strides[a]).sum());
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < per_axis[a].len() {
                    continue 'outer;
                }
                idx[a] = 0;
            }
            break;
        }
        // Row-major enumeration over sorted per-axis lists is already sorted.
        debug_assert!(boxes.windows(2).all(|w| w[0] < w[1]));
        Covering { boxes, leaves_window: leaves }
    }

    /// Euclidean distance from `x` to box `b`, wrapping circular axes.
    pub fn distance_to_box(&self, x: &[S], b: usize) -> S {
        let r = self.rect(b);
        let gap = |v: S, a: usize| {
            if v < r.lo[a] {
                r.lo[a] - v
            } else if v > r.hi[a] {
                v - r.hi[a]
            } else {
                S::zero()
            }
        };
        let mut acc = S::zero();
        for a in 0..self.dim() {
            let g = if self.circular[a] {
                let w = self.hi[a] - self.lo[a];
                let mut t = (x[a] - self.lo[a]) % w;
                if t < S::zero() {
                    t += w;
                }
                let v = self.lo[a] + t;
                gap(v, a).min(gap(v - w, a)).min(gap(v + w, a))
            } else {
                gap(x[a], a)
            };
            acc += g * g;
        }
        acc.sqrt()
    }

    /// Boxes whose closure lies in `[lo, hi]`, up to rounding.
    pub fn boxes_within(&self, lo: &[S], hi: &[S]) -> Vec<usize> {
        let tol = S::epsilon().sqrt();
        (0..self.box_count())
            .filter(|&b| {
                let r = self.rect(b);
                (0..self.dim()).all(|a| {
                    let slack = tol * self.width[a];
                    r.lo[a] >= lo[a] - slack && r.hi[a] <= hi[a] + slack
                })
            })
            .collect()
    }

    /// Refines the listed axes by one level.
    pub fn subdivide(&self, axes: &[usize], cap: u64) -> Result<Self> {
        let mut depth = self.depth.clone();
        for &a in axes {
            if a >= self.dim() {
                return Err(Error::InvalidInput(format!("axis {a} out of range")));
            }
            depth[a] += 1;
        }
        Grid::new(&self.window(), &depth, &self.circular, cap)
    }

    /// Whether `self` is a refinement of `coarse` over the same window.
    pub fn refines(&self, coarse: &Grid<S>) -> bool {
        self.lo == coarse.lo
            && self.hi == coarse.hi
            && self.circular == coarse.circular
            && self.depth.iter().zip(&coarse.depth).all(|(f, c)| f >= c)
    }

    /// Box of `coarse` containing box `child` of this (finer) grid.
    pub fn parent_in(&self, coarse: &Grid<S>, child: usize) -> usize {
        debug_assert!(self.refines(coarse));
        let c = self.coords(child);
        let pc: Vec<usize> = (0..self.dim()).map(|a| c[a] >> (self.depth[a] - coarse.depth[a])).collect();
        coarse.index(&pc)
    }

    /// Boxes of this (finer) grid inside box `parent` of `coarse`, sorted.
    pub fn children_of(&self, coarse: &Grid<S>, parent: usize) -> Vec<usize> {
        debug_assert!(self.refines(coarse));
        let pc = coarse.coords(parent);
        let spans: Vec<(usize, usize)> = (0..self.dim())
            .map(|a| {
                let k = self.depth[a] - coarse.depth[a];
                (pc[a] << k, 1usize << k)
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.dim()];
        'outer: loop {
            let c: Vec<usize> = (0..self.dim()).map(|a| spans[a].0 + idx[a]).collect();
            out.push(self.index(&c));
            for a in (0..self.dim()).rev() {
                idx[a] += 1;
                if idx[a] < spans[a].1 {
                    continue 'outer;
                }
                idx[a] = 0;
            }
            break;
        }
        out
    }
}
