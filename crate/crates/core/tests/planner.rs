use proptest::prelude::*;
use racenav::oracle::{enumerate_paths, path_cost_from_geometry};
use racenav::planner::{
    build_road_graph, plan, sample_path, CostWeights, LineSample, NodeId, Obstacle, RacingLine, RoadGraph,
};

fn wavy_line(len: f64) -> RacingLine {
    // y = 2 sin(x / 15), headings and curvature from the derivatives
    let n = len as usize;
    let mut s = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let samples = (0..=n)
        .map(|k| {
            let x = k as f64;
            let (d1, d2) = ((x / 15.0).cos() * 2.0 / 15.0, -(x / 15.0).sin() * 2.0 / 225.0);
            let y = 2.0 * (x / 15.0).sin();
            if let Some((px, py)) = prev {
                s += (x - px).hypot(y - py);
            }
            prev = Some((x, y));
            LineSample {
                x,
                y,
                s,
                heading: d1.atan(),
                kappa: d2 / (1.0 + d1 * d1).powf(1.5),
            }
        })
        .collect();
    RacingLine::new(samples).unwrap()
}

fn graph(layers: usize, n_off: usize, jump: usize) -> RoadGraph {
    let offsets = [-3.0, -1.5, 0.0, 1.5, 3.0];
    let line = wavy_line(10.0 * (layers - 1) as f64 + 0.5);
    build_road_graph(&line, 7.5, &offsets[..n_off], 10.0, jump).unwrap()
}

fn obstacles() -> impl Strategy<Value = Vec<Obstacle>> {
    prop::collection::vec((0.0..45.0f64, -5.0..5.0f64, 0.2..1.2f64), 0..5)
        .prop_map(|v| v.into_iter().map(|(x, y, r)| Obstacle { center: [x, y], radius: r }).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_matches_exhaustive_enumeration(
        layers in 2usize..=5, n_off in 1usize..=5, jump in 1usize..=2,
        start_pick in 0usize..5, obs in obstacles(),
        k_c in 0.0..10.0f64, k_kappa in 0.0..100.0f64, k_d in 0.0..3.0f64,
    ) {
        let g = graph(layers, n_off, jump);
        prop_assume!(g.layers.len() == layers);
        let w = CostWeights { k_c, k_kappa, k_d, ..CostWeights::default() };
        let start = NodeId { layer: 0, offset_index: start_pick % n_off };
        let want = enumerate_paths(&g, start, &obs, &w, layers);
        match (want, plan(&g, start, &obs, &w, layers)) {
            (None, Err(_)) => {}
            (Some((seq, cost)), Ok(p)) => {
                let got: Vec<usize> = p.nodes.iter().map(|n| n.offset_index).collect();
                prop_assert_eq!(got, seq);
                prop_assert!((p.total_cost - cost).abs() <= 1e-9 * cost.abs().max(1.0));
                let kappas: Vec<f64> = p.nodes.iter().map(|&id| g.node(id).unwrap().kappa).collect();
                let geo = path_cost_from_geometry(&p.points, &kappas, &p.offsets, &obs, &w);
                prop_assert!((geo - cost).abs() <= 1e-9 * cost.abs().max(1.0));
            }
            (a, b) => prop_assert!(false, "feasibility differs: {:?} vs {:?}", a, b.map(|p| p.nodes)),
        }
    }

    #[test]
    fn planned_paths_respect_margin_and_jump(
        obs in obstacles(), start_pick in 0usize..5,
    ) {
        let g = graph(5, 5, 1);
        let w = CostWeights::default();
        let start = NodeId { layer: 0, offset_index: start_pick };
        if let Ok(p) = plan(&g, start, &obs, &w, 5) {
            prop_assert!(p.min_clearance >= w.safety_margin);
            for pair in p.nodes.windows(2) {
                prop_assert!(pair[0].offset_index.abs_diff(pair[1].offset_index) <= 1);
            }
            let poses = sample_path(&p, 1.0).unwrap();
            for q in &poses {
                for o in &obs {
                    prop_assert!(o.clearance(q.x, q.y) >= w.safety_margin - 1e-9);
                }
            }
        }
    }
}
