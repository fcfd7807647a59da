//! Property tests for the geometric and graph invariants.

use std::collections::BTreeMap;

use conley_nds::conley::{enumerate_pairs, morse};
use conley_nds::digraph::Digraph;
use conley_nds::grid::{build_grid, Grid, Rect};
use conley_nds::lyapunov::{complete_lyapunov, lambda_ratio, sup_g, OrbitSettings};
use conley_nds::nds::{make_builtin, BaseFlow};
use conley_nds::pullback::{pullback_attractor, pullback_convergence, PullbackOptions};
use conley_nds::sampling::sample_base;
use conley_nds::transition::{build_transition, read_graph, write_graph, ChainMode, FiberLayout, TransitionGraph, TransitionOptions};
use proptest::prelude::*;

fn double_well(t: f64, depth: u32, eps_boxes: f64) -> TransitionGraph<f64> {
    let sys = make_builtin::<f64>("double-well", &BTreeMap::new()).unwrap();
    let grid = build_grid(&[(-2.0, 2.0)], &[depth], &[false], 1 << 20).unwrap();
    let sampling = sample_base(&sys.base, 1, Some(t)).unwrap();
    let opts = TransitionOptions { eps_pad: eps_boxes * grid.diameter(), ..TransitionOptions::default() };
    build_transition(&sys, &grid, &sampling, &opts).unwrap()
}

fn circle(depth: u32, m: usize, eps_boxes: f64) -> TransitionGraph<f64> {
    let sys = make_builtin::<f64>("example-5-2-circle", &BTreeMap::new()).unwrap();
    let tau = std::f64::consts::TAU;
    let grid = build_grid(&[(0.0, tau)], &[depth], &[true], 1 << 20).unwrap();
    let sampling = sample_base(&sys.base, m, None).unwrap();
    let opts = TransitionOptions { eps_pad: eps_boxes * grid.diameter(), ..TransitionOptions::default() };
    build_transition(&sys, &grid, &sampling, &opts).unwrap()
}

fn edges_project(fine: &TransitionGraph<f64>, coarse: &TransitionGraph<f64>) -> bool {
    let (nf, nc) = (fine.grid.box_count(), coarse.grid.box_count());
    let project = |v: usize| (v / nf) * nc + fine.grid.parent_in(&coarse.grid, v % nf);
    fine.graph.edges().all(|(u, v)| coarse.graph.has_edge(project(u), project(v)))
}

fn cr_projects(fine: &TransitionGraph<f64>, coarse: &TransitionGraph<f64>) -> bool {
    let (nf, nc) = (fine.grid.box_count(), coarse.grid.box_count());
    let mf = morse(&fine.graph);
    let mc = morse(&coarse.graph);
    mf.recurrent_nodes().into_iter().all(|v| mc.is_recurrent((v / nf) * nc + fine.grid.parent_in(&coarse.grid, v % nf)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_tiles_the_window(
        lo in -5.0f64..5.0, w in 0.5f64..4.0, lo2 in -5.0f64..5.0, w2 in 0.5f64..4.0,
        d1 in 0u32..6, d2 in 0u32..5, u in 0.0f64..1.0, v in 0.0f64..1.0,
    ) {
        let g: Grid<f64> = build_grid(&[(lo, lo + w), (lo2, lo2 + w2)], &[d1, d2], &[false, false], 1 << 20).unwrap();
        let x = [lo + u * w, lo2 + v * w2];
        let b = g.box_of(&x).unwrap();
        prop_assert!(g.rect(b).contains(&x));
        prop_assert_eq!(g.box_of(&g.center(b)), Some(b));
        let r = g.rect(b);
        let diam = ((r.hi[0] - r.lo[0]).powi(2) + (r.hi[1] - r.lo[1]).powi(2)).sqrt();
        prop_assert!((diam - g.diameter()).abs() <= 1e-12 * g.diameter().max(1.0));
    }

    #[test]
    fn periodic_samples_map_onto_themselves(period in 0.1f64..10.0, origin in -3.0f64..3.0, m in 1usize..40) {
        let base = BaseFlow::periodic_from(period, origin).unwrap();
        let s = sample_base(&base, m, None).unwrap();
        for i in 0..m {
            let image = base.shift(s.samples[i], s.step);
            let j = s.advance(i, 1);
            prop_assert!(base.distance(image, s.samples[j]) <= 1e-12 * period);
        }
    }

    #[test]
    fn padding_never_removes_edges(t in 0.1f64..1.0, e1 in 0.0f64..1.0, extra in 0.0f64..1.0) {
        let a = double_well(t, 5, e1);
        let b = double_well(t, 5, e1 + extra);
        prop_assert!(a.graph.edges().all(|(u, v)| b.graph.has_edge(u, v)));
    }

    #[test]
    fn lyapunov_properties_on_larger_random_graphs(n in 1usize..40, seed in any::<u64>(), density in 0.0f64..0.2) {
        let mut state = seed | 1;
        let mut next = move || { state ^= state << 13; state ^= state >> 7; state ^= state << 17; state };
        let lists: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..n).filter(|_| (next() % 10_000) as f64 / 10_000.0 < density).collect())
            .collect();
        let g = Digraph::from_lists(&lists);
        let md = morse(&g);
        let pairs = enumerate_pairs(&g, &md, &conley_nds::conley::Lift::Identity);
        let field = complete_lyapunov(&g, &md, &pairs).unwrap();
        let report = field.check_properties(&g, &md, &FiberLayout::single(n));
        prop_assert!(report.all_hold(), "{:?}", report);
        for v in 0..n {
            let l = field.value_f64(v);
            prop_assert!((0.0..=1.0).contains(&l));
        }
    }

    #[test]
    fn example_5_1_series_respects_envelope(p in -0.5f64..0.5) {
        let sys = make_builtin::<f64>("example-5-1", &BTreeMap::new()).unwrap();
        let grid = build_grid(&[(-2.0, 2.0)], &[8], &[false], 1 << 20).unwrap();
        let u = grid.boxes_within(&[-1.0], &[1.0]);
        let schedule = [1.0, 2.0, 3.0, 4.0, 5.0];
        let series = pullback_convergence(&sys, &grid, p, &u, &[Rect::point(&[0.0])], &schedule, 2).unwrap();
        for (k, &s) in schedule.iter().enumerate() {
            let envelope = (2.0 * p * s - s * s).exp();
            prop_assert!(series[k] <= envelope * (1.0 + 1e-12));
            if k > 0 {
                prop_assert!(series[k] < series[k - 1]);
            }
        }
    }

    #[test]
    fn lambda_is_a_ratio_and_g_dominates(x in -2.0f64..2.0) {
        let sys = make_builtin::<f64>("double-well", &BTreeMap::new()).unwrap();
        let grid = build_grid(&[(-2.0, 2.0)], &[6], &[false], 1 << 20).unwrap();
        let a = vec![47, 48];
        let r = vec![31, 32];
        let lam = lambda_ratio(&grid, &[x], &a, &r);
        prop_assert!((0.0..=1.0).contains(&lam));
        let g = sup_g(&sys, &grid, 0.0, &[x], OrbitSettings { horizon: 5.0, dt: 0.01 }, &a, &r).unwrap();
        prop_assert!(g.value >= lam);
    }
}

#[test]
fn refinement_keeps_edges_and_recurrence_inside_parents() {
    for t in [0.25, 0.5, 1.0] {
        let coarse = double_well(t, 5, 1.0);
        let fine = double_well(t, 6, 1.0);
        assert!(edges_project(&fine, &coarse), "double well T = {t}");
        assert!(cr_projects(&fine, &coarse), "double well T = {t}");
    }
    let coarse = circle(6, 8, 1.0);
    let fine = circle(7, 8, 1.0);
    assert!(edges_project(&fine, &coarse));
    assert!(cr_projects(&fine, &coarse));
}

#[test]
fn coverings_nest_after_nested_from() {
    let sys = make_builtin::<f64>("double-well", &BTreeMap::new()).unwrap();
    let grid = build_grid(&[(-2.0, 2.0)], &[7], &[false], 1 << 20).unwrap();
    let u = grid.boxes_within(&[-2.0], &[2.0]);
    let schedule: Vec<f64> = (1..=8).map(f64::from).collect();
    let r = pullback_attractor(&sys, &grid, 0.0, &u, &schedule, grid.diameter(), &PullbackOptions::default()).unwrap();
    let from = r.nested_from.unwrap();
    for k in from + 1..r.coverings.len() {
        assert!(r.coverings[k].iter().all(|b| r.coverings[k - 1].binary_search(b).is_ok()));
    }
    assert!(r.a_approx.iter().all(|b| r.coverings[from..].iter().all(|c| c.binary_search(b).is_ok())));
}

#[test]
fn graph_files_round_trip_byte_for_byte() {
    for g in [double_well(0.5, 6, 0.0), circle(6, 4, 0.5)] {
        let mut a = Vec::new();
        write_graph(&g, &mut a).unwrap();
        let back: TransitionGraph<f64> = read_graph(&a[..]).unwrap();
        assert_eq!(back.graph, g.graph);
        assert_eq!(back.escaped, g.escaped);
        let mut b = Vec::new();
        write_graph(&back, &mut b).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn fiber_mode_keeps_edges_in_fibers() {
    let sys = make_builtin::<f64>("example-5-2-circle", &BTreeMap::new()).unwrap();
    let grid = build_grid(&[(0.0, std::f64::consts::TAU)], &[5], &[true], 1 << 20).unwrap();
    let sampling = sample_base(&sys.base, 4, None).unwrap();
    let opts = TransitionOptions { mode: ChainMode::Fiber, ..TransitionOptions::default() };
    let g = build_transition(&sys, &grid, &sampling, &opts).unwrap();
    let n = grid.box_count();
    assert!(g.graph.edges().all(|(u, v)| u / n == v / n));
}
