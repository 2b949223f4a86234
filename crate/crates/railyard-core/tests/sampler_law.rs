use std::collections::HashMap;

use railyard_core::railyard::validate;
use railyard_core::sampler::{run_sweep, run_sweep_with_grid, sample_many, sample_rng, SamplerConfig};
use railyard_core::scalar::rat;
use railyard_core::zfunction::{exact_distribution, EnumerationBound};
use railyard_core::{CoveringState, RailYardGraph, Scalar};

fn graph(a: &str, b: &str, x: &[(i64, i64)], uv: (i64, i64)) -> RailYardGraph {
    let x = x.iter().map(|&(p, q)| rat(p, q)).collect();
    RailYardGraph::from_letters(1, a, b, x, rat(uv.0, uv.1), rat(uv.0, uv.1)).unwrap()
}

fn tv(g: &RailYardGraph, samples: &[CoveringState], bound: EnumerationBound) -> f64 {
    let exact: HashMap<CoveringState, f64> =
        exact_distribution(g, bound).into_iter().map(|(s, p)| (s, p.to_f64())).collect();
    let mut emp: HashMap<&CoveringState, f64> = HashMap::new();
    for s in samples {
        *emp.entry(s).or_default() += 1.0 / samples.len() as f64;
    }
    let mut d = 0.0;
    for (s, p) in &exact {
        d += (p - emp.get(s).copied().unwrap_or(0.0)).abs();
    }
    for (s, q) in &emp {
        if !exact.contains_key(*s) {
            d += q;
        }
    }
    d / 2.0
}

#[test]
fn sweep_is_deterministic_and_valid() {
    let g = graph("LRRL", "++--", &[(1, 2), (1, 3), (1, 2), (1, 3)], (3, 10));
    let cfg = SamplerConfig::new(g.clone(), 3, 7).unwrap();
    let a = run_sweep(&cfg, &mut sample_rng(7, 0)).unwrap();
    let b = run_sweep(&cfg, &mut sample_rng(7, 0)).unwrap();
    assert_eq!(a, b);
    for s in sample_many(&cfg, 200).unwrap() {
        assert!(validate(&g, &s).unwrap());
        assert!(s.seq[0].first() as u64 <= 3 * 4 * 10);
    }
}

#[test]
fn grid_path_carries_the_sample() {
    let g = graph("LRLR", "+-+-", &[(1, 2), (1, 2), (1, 3), (1, 2)], (3, 10));
    let cfg = SamplerConfig::new(g, 2, 1).unwrap();
    for i in 0..20 {
        let (s, grid) = run_sweep_with_grid(&cfg, &mut sample_rng(1, i)).unwrap();
        assert_eq!(grid.boundary_path(), s.seq);
        assert_eq!(grid.frontier[0], (-2, 0));
        assert_eq!(grid.frontier[4], (0, -2));
    }
}

#[test]
fn pure_boundary_law() {
    let g = graph("LR", "+-", &[(1, 2), (2, 3)], (0, 1));
    let cfg = SamplerConfig::new(g.clone(), 2, 11).unwrap();
    let s = sample_many(&cfg, 20000).unwrap();
    let d = tv(&g, &s, EnumerationBound::square(3));
    assert!(d < 0.02, "tv {d}");
}

#[test]
fn free_boundary_law_small() {
    for (a, b) in [("LL", "+-"), ("LR", "-+"), ("RLR", "+--"), ("RR", "--")] {
        let n = a.len();
        let x = vec![(1, 2); n];
        let g = graph(a, b, &x, (3, 10));
        let cfg = SamplerConfig::new(g.clone(), 4, 5).unwrap();
        let s = sample_many(&cfg, 40000).unwrap();
        let d = tv(&g, &s, EnumerationBound::square(5));
        assert!(d < 0.03, "{a} {b}: tv {d}");
    }
}
