//! End-to-end steps shared by the command-line front end and the test suites.

use std::io::Write;

use serde::Serialize;

use crate::config::RunConfig;
use crate::conley::{enumerate_pairs, morse, verify_decomposition, AttractorRepellerPair, DecompositionReport, MorseDecomposition, PairOrigin};
use crate::error::{Error, Result};
use crate::grid::{Grid, Rect};
use crate::lyapunov::{complete_lyapunov, LyapunovField, PropertyReport};
use crate::pullback::{pullback_attractor, pullback_convergence, PullbackOptions, PullbackResult};
use crate::transition::{build_transition, TransitionGraph};

/// Builds the transition graph described by `cfg`.
pub fn build_map(cfg: &RunConfig, workers: usize) -> Result<TransitionGraph<f64>> {
    let sys = cfg.system()?;
    let grid = cfg.grid()?;
    let sampling = cfg.sampling(&sys)?;
    let opts = cfg.transition_options(&grid, workers);
    build_transition(&sys, &grid, &sampling, &opts)
}

pub struct Decomposition {
    pub md: MorseDecomposition,
    pub pairs: Vec<AttractorRepellerPair>,
    pub report: DecompositionReport,
}

pub fn decompose(tg: &TransitionGraph<f64>) -> Decomposition {
    let md = morse(&tg.graph);
    let pairs = enumerate_pairs(&tg.graph, &md, &tg.lift());
    let report = verify_decomposition(&tg.graph, &md, &pairs);
    Decomposition { md, pairs, report }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSummary {
    pub origin: String,
    pub attractor: usize,
    pub basin: usize,
    pub repeller: usize,
    pub coarse_repeller: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConleySummary {
    pub system: String,
    pub mode: String,
    pub fibers: usize,
    pub boxes_per_fiber: usize,
    pub nodes: usize,
    pub edges: usize,
    pub escaped_nodes: usize,
    pub outside: Option<usize>,
    pub scc_count: usize,
    pub cyclic_sccs: usize,
    /// Chain recurrent nodes, `OUTSIDE` excluded.
    pub chain_recurrent_nodes: usize,
    /// `chain_recurrent_nodes` over the number of box nodes.
    pub cyclic_fraction: f64,
    pub chain_recurrent_per_fiber: Vec<usize>,
    /// Grid-connected clusters of chain recurrent boxes, per fiber.
    pub clusters_per_fiber: Vec<usize>,
    pub pairs: Vec<PairSummary>,
    /// Size of `(X \ CR) symmetric difference (union of B \ A)`.
    pub union_residual: usize,
    /// Size of `CR symmetric difference (intersection of A u R)`.
    pub intersection_residual: usize,
    pub intersection_residual_coarse: usize,
    pub identities_hold: bool,
}

pub fn conley_summary(tg: &TransitionGraph<f64>, dec: &Decomposition) -> ConleySummary {
    let layout = tg.layout();
    let box_nodes = layout.fibers * layout.boxes;
    let mut per_fiber = vec![0usize; layout.fibers];
    let mut cr_boxes: Vec<Vec<usize>> = vec![Vec::new(); layout.fibers];
    for v in dec.md.recurrent_nodes() {
        if let Some((f, b)) = tg.split(v) {
            per_fiber[f] += 1;
            cr_boxes[f].push(b);
        }
    }
    let cr: usize = per_fiber.iter().sum();
    ConleySummary {
        system: tg.meta.system.clone(),
        mode: tg.meta.mode.to_string(),
        fibers: layout.fibers,
        boxes_per_fiber: layout.boxes,
        nodes: tg.node_count(),
        edges: tg.graph.edge_count(),
        escaped_nodes: tg.escaped.iter().filter(|&&e| e).count(),
        outside: tg.outside,
        scc_count: dec.md.scc_count(),
        cyclic_sccs: dec.md.cyclic_count(),
        chain_recurrent_nodes: cr,
        cyclic_fraction: cr as f64 / box_nodes as f64,
        chain_recurrent_per_fiber: per_fiber,
        clusters_per_fiber: cr_boxes.iter().map(|b| box_clusters(&tg.grid, b)).collect(),
        pairs: dec
            .pairs
            .iter()
            .map(|p| PairSummary {
                origin: match p.origin {
                    PairOrigin::Cyclic(c) => format!("scc:{c}"),
                    PairOrigin::Transient(v) => format!("node:{v}"),
                },
                attractor: p.attractor.count_ones(),
                basin: p.basin.count_ones(),
                repeller: p.repeller.count_ones(),
                coarse_repeller: p.coarse_repeller.count_ones(),
            })
            .collect(),
        union_residual: dec.report.union_residual.len(),
        intersection_residual: dec.report.intersection_residual.len(),
        intersection_residual_coarse: dec.report.intersection_residual_coarse.len(),
        identities_hold: dec.report.holds(),
    }
}

/// Connected components of a box set, boxes touching at faces or corners.
pub fn box_clusters(grid: &Grid<f64>, boxes: &[usize]) -> usize {
    let mut sorted = boxes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let idx = |b: usize| sorted.binary_search(&b).ok();
    let mut parent: Vec<usize> = (0..sorted.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let d = grid.dim();
    let counts = grid.counts();
    for (i, &b) in sorted.iter().enumerate() {
        let c = grid.coords(b);
        'offsets: for code in 0..3usize.pow(d as u32) {
            let mut rem = code;
            let mut nb = c.clone();
            for a in 0..d {
                let off = rem % 3;
                rem /= 3;
                let n = counts[a];
                nb[a] = match off {
                    0 => c[a],
                    1 if c[a] + 1 < n => c[a] + 1,
                    1 if grid.circular()[a] => 0,
                    2 if c[a] > 0 => c[a] - 1,
                    2 if grid.circular()[a] => n - 1,
                    _ => continue 'offsets,
                };
            }
            if let Some(j) = idx(grid.index(&nb)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    (0..sorted.len()).filter(|&i| find(&mut parent, i) == i).count()
}

/// Per-node CSV: `base_index,box_index,scc_id,cyclic,in_A_1..,in_R_1..`, then
/// `L,l_1..` when a Lyapunov field is given. `OUTSIDE` has indices `-1`.
pub fn write_nodes_csv<W: Write>(
    tg: &TransitionGraph<f64>,
    dec: &Decomposition,
    field: Option<&LyapunovField>,
    mut w: W,
) -> Result<()> {
    let k = dec.pairs.len();
    let mut head = String::from("base_index,box_index,scc_id,cyclic");
    for i in 1..=k {
        head.push_str(&format!(",in_A_{i}"));
    }
    for i in 1..=k {
        head.push_str(&format!(",in_R_{i}"));
    }
    if let Some(f) = field {
        head.push_str(",L");
        for i in 1..=f.pair_count() {
            head.push_str(&format!(",l_{i}"));
        }
    }
    writeln!(w, "{head}")?;
    let mut line = String::new();
    for v in 0..tg.node_count() {
        line.clear();
        match tg.split(v) {
            Some((f, b)) => line.push_str(&format!("{f},{b}")),
            None => line.push_str("-1,-1"),
        }
        let c = dec.md.scc_of[v];
        line.push_str(&format!(",{c},{}", u8::from(dec.md.cyclic[c as usize])));
        for p in &dec.pairs {
            line.push_str(if p.attractor[v] { ",1" } else { ",0" });
        }
        for p in &dec.pairs {
            line.push_str(if p.repeller[v] { ",1" } else { ",0" });
        }
        if let Some(f) = field {
            line.push_str(&format!(",{}", f.value_f64(v)));
            for pf in &f.functions {
                line.push_str(&format!(",{}", pf.value::<f64>(v)));
            }
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// The condensation DAG in Graphviz format; cyclic SCCs are drawn as boxes.
pub fn write_condensation_dot<W: Write>(dec: &Decomposition, mut w: W) -> Result<()> {
    let md = &dec.md;
    writeln!(w, "digraph condensation {{")?;
    for c in 0..md.scc_count() {
        let shape = if md.cyclic[c] { "box" } else { "ellipse" };
        writeln!(w, "  s{c} [label=\"{c} ({})\", shape={shape}];", md.members(c).len())?;
    }
    for (a, b) in md.condensation.edges() {
        writeln!(w, "  s{a} -> s{b};")?;
    }
    writeln!(w, "}}")?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovSummary {
    pub system: String,
    pub properties: PropertyReport,
    pub a_holds: bool,
    pub b_holds: bool,
    pub c_holds: bool,
    pub d_holds: bool,
    pub all_hold: bool,
}

pub fn lyapunov_field(tg: &TransitionGraph<f64>, dec: &Decomposition) -> Result<(LyapunovField, LyapunovSummary)> {
    let field = complete_lyapunov(&tg.graph, &dec.md, &dec.pairs)?;
    let properties = field.check_properties(&tg.graph, &dec.md, &tg.layout());
    let summary = LyapunovSummary {
        system: tg.meta.system.clone(),
        a_holds: properties.a_holds(),
        b_holds: properties.b_holds(),
        c_holds: properties.c_holds(),
        d_holds: properties.d_holds(),
        all_hold: properties.all_hold(),
        properties,
    };
    Ok((field, summary))
}

/// Boxes of fiber `f` in a node set.
pub fn fiber_boxes(tg: &TransitionGraph<f64>, set: &crate::digraph::NodeSet, f: usize) -> Vec<usize> {
    let n = tg.grid.box_count();
    (0..n).filter(|&b| set[f * n + b]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullbackSummary {
    pub system: String,
    pub p: f64,
    pub schedule: Vec<f64>,
    pub u_boxes: usize,
    pub covering_sizes: Vec<usize>,
    pub inside_u: Vec<bool>,
    pub nested: bool,
    pub nested_from: Option<usize>,
    pub converged: bool,
    pub tol: f64,
    pub box_diameter: f64,
    pub a_approx_boxes: usize,
    pub a_approx_lo: Option<Vec<f64>>,
    pub a_approx_hi: Option<Vec<f64>>,
    /// Hausdorff distances between successive coverings.
    pub successive: Vec<f64>,
    /// Distance from the pulled-back image of `U` to the reference attractor.
    pub distance_series: Vec<f64>,
    pub final_distance: Option<f64>,
}

pub struct PullbackRun {
    pub result: Option<PullbackResult<f64>>,
    pub summary: PullbackSummary,
}

/// Pullback iteration from the config; a `U` that never re-enters itself is
/// reported with `nested = false` rather than as an error.
pub fn run_pullback(cfg: &RunConfig) -> Result<PullbackRun> {
    let sys = cfg.system()?;
    let grid = cfg.grid()?;
    let diam = grid.diameter();
    let u = grid.boxes_within(&cfg.pullback_u_lo, &cfg.pullback_u_hi);
    let opts = PullbackOptions { scheme: cfg.transition_scheme, eps_pad: cfg.pullback_eps_pad_boxes * diam };
    let tol = cfg.pullback_tol_boxes * diam;
    let p = cfg.pullback_p;
    let result = match pullback_attractor(&sys, &grid, p, &u, &cfg.pullback_schedule, tol, &opts) {
        Ok(r) => Some(r),
        Err(Error::NotNested) => None,
        Err(e) => return Err(e),
    };
    let reference: Vec<Rect<f64>> = if !cfg.pullback_a_lo.is_empty() {
        vec![Rect::new(cfg.pullback_a_lo.clone(), cfg.pullback_a_hi.clone())]
    } else {
        result.as_ref().map(|r| r.a_approx.iter().map(|&b| grid.rect(b)).collect()).unwrap_or_default()
    };
    let distance_series = if reference.is_empty() {
        Vec::new()
    } else {
        pullback_convergence(&sys, &grid, p, &u, &reference, &cfg.pullback_schedule, opts.scheme)?
    };
    let (lo, hi) = match &result {
        Some(r) if !r.a_approx.is_empty() => {
            let rects: Vec<Rect<f64>> = r.a_approx.iter().map(|&b| grid.rect(b)).collect();
            let d = grid.dim();
            let lo = (0..d).map(|a| rects.iter().map(|r| r.lo[a]).fold(f64::INFINITY, f64::min)).collect();
            let hi = (0..d).map(|a| rects.iter().map(|r| r.hi[a]).fold(f64::NEG_INFINITY, f64::max)).collect();
            (Some(lo), Some(hi))
        }
        _ => (None, None),
    };
    let summary = PullbackSummary {
        system: cfg.name.clone(),
        p,
        schedule: cfg.pullback_schedule.clone(),
        u_boxes: u.len(),
        covering_sizes: result.as_ref().map(|r| r.coverings.iter().map(Vec::len).collect()).unwrap_or_default(),
        inside_u: result.as_ref().map(|r| r.inside_u.clone()).unwrap_or_default(),
        nested: result.as_ref().is_some_and(|r| r.nested_from.is_some()),
        nested_from: result.as_ref().and_then(|r| r.nested_from),
        converged: result.as_ref().is_some_and(|r| r.converged),
        tol,
        box_diameter: diam,
        a_approx_boxes: result.as_ref().map_or(0, |r| r.a_approx.len()),
        a_approx_lo: lo,
        a_approx_hi: hi,
        successive: result.as_ref().map(|r| r.successive.clone()).unwrap_or_default(),
        final_distance: distance_series.last().copied(),
        distance_series,
    };
    Ok(PullbackRun { result, summary })
}

/// `s,covering_size,inside_u,successive,distance`; missing values are empty.
pub fn write_pullback_csv<W: Write>(s: &PullbackSummary, mut w: W) -> Result<()> {
    writeln!(w, "s,covering_size,inside_u,successive,distance")?;
    for (k, t) in s.schedule.iter().enumerate() {
        let size = s.covering_sizes.get(k).map_or(String::new(), |x| x.to_string());
        let inside = s.inside_u.get(k).map_or(String::new(), |&b| u8::from(b).to_string());
        let succ = if k == 0 { String::new() } else { s.successive.get(k - 1).map_or(String::new(), |x| x.to_string()) };
        let dist = s.distance_series.get(k).map_or(String::new(), |x| x.to_string());
        writeln!(w, "{t},{size},{inside},{succ},{dist}")?;
    }
    w.flush()?;
    Ok(())
}
