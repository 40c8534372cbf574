use ribbonlab::cycles::{enumerate_cycles, girth};
use ribbonlab::sampler::{sample_map, SamplerConfig};

/// Brute force over edge subsets: a subset is a simple cycle iff every
/// touched vertex has degree exactly 2 in it and it is connected.
fn subset_cycle_lengths(map: &ribbonlab::MetricMapF64) -> Vec<f64> {
    let g = map.graph();
    let e = g.edge_count();
    assert!(e <= 20);
    let mut out = Vec::new();
    for mask in 1u32..(1 << e) {
        let mut deg = vec![0u32; g.vertex_count()];
        let mut len = 0.0;
        let mut edges = Vec::new();
        for i in 0..e {
            if mask >> i & 1 == 1 {
                let (u, v) = g.edge_endpoints(i);
                deg[u] += 1;
                deg[v] += 1;
                len += map.edge_length(i);
                edges.push(i);
            }
        }
        if deg.iter().any(|&d| d != 0 && d != 2) {
            continue;
        }
        // connectivity over the chosen edges
        let verts: Vec<usize> =
            (0..deg.len()).filter(|&v| deg[v] > 0).collect();
        let mut seen = vec![false; deg.len()];
        let mut stack = vec![verts[0]];
        seen[verts[0]] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &i in &edges {
                let (a, b) = g.edge_endpoints(i);
                for (x, y) in [(a, b), (b, a)] {
                    if x == u && !seen[y] {
                        seen[y] = true;
                        reached += 1;
                        stack.push(y);
                    }
                }
            }
        }
        if reached == verts.len() {
            out.push(len);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

#[test]
fn bounded_search_matches_subset_enumeration() {
    for seed in 0..100 {
        let cfg = SamplerConfig::new(3, seed);
        let map = sample_map(&cfg).unwrap().map;
        let e = map.graph().edge_count();
        let mut expect = subset_cycle_lengths(&map);
        let mut got: Vec<f64> = enumerate_cycles(&map, 1e9, e)
            .into_iter()
            .map(|c| c.length())
            .collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got.len(), expect.len(), "seed {seed}");
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
        }
        expect.clear();
    }
}

#[test]
fn girth_equals_full_enumeration_minimum() {
    for seed in 0..50 {
        let cfg = SamplerConfig::new(2, seed).with_trial(seed + 1);
        let map = sample_map(&cfg).unwrap().map;
        let e = map.graph().edge_count();
        let full = enumerate_cycles(&map, 1e9, e);
        let min = full
            .iter()
            .map(|c| c.length())
            .fold(f64::INFINITY, f64::min);
        let g = girth(&map).unwrap();
        assert!((g - min).abs() < 1e-9, "seed {seed}: girth {g} vs min {min}");
    }
}
