//! Simple-cycle enumeration with length/edge-count truncation, exact girth,
//! and interval counts of the cycle length spectrum.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::halfedge::HalfEdgeStructure;
use crate::scalar::Scalar;
use crate::MetricMap;

#[derive(Debug, Error, PartialEq)]
pub enum CensusError {
    #[error("map has no cycle")]
    Acyclic,
    #[error("interval end {requested} exceeds the truncation bound {b_max}")]
    TruncationExceeded { requested: f64, b_max: f64 },
}

/// A simple cycle: distinct edges joining distinct vertices, stored so that
/// `edges[i]` runs from `vertices[i]` to `vertices[(i+1) % k]`. The stored
/// form is canonical: lexicographically least over all rotations and the
/// reflection, so each free cycle has exactly one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle<F: Scalar> {
    edges: Vec<usize>,
    vertices: Vec<usize>,
    length: F,
}

impl<F: Scalar> Cycle<F> {
    pub fn new(edges: Vec<usize>, vertices: Vec<usize>, length: F) -> Self {
        assert!(!edges.is_empty());
        assert_eq!(edges.len(), vertices.len());
        let distinct = |xs: &[usize]| {
            let set: HashSet<usize> = xs.iter().copied().collect();
            set.len() == xs.len()
        };
        assert!(distinct(&edges), "cycle repeats an edge");
        assert!(distinct(&vertices), "cycle repeats a vertex");
        assert!(length > F::zero());
        let (edges, vertices) = canonical_form(&edges, &vertices);
        Self { edges, vertices, length }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn length(&self) -> F {
        self.length
    }
}

/// Least (edges, vertices) pair over all rotations of both traversal
/// directions.
fn canonical_form(edges: &[usize], vertices: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let k = edges.len();
    let rotate = |es: &[usize], vs: &[usize], r: usize| -> (Vec<usize>, Vec<usize>) {
        let e: Vec<usize> = (0..k).map(|i| es[(r + i) % k]).collect();
        let v: Vec<usize> = (0..k).map(|i| vs[(r + i) % k]).collect();
        (e, v)
    };
    // reversed traversal: edges backwards, vertices re-anchored
    let rev_edges: Vec<usize> = edges.iter().rev().copied().collect();
    let rev_vertices: Vec<usize> = (0..k).map(|i| vertices[(k - i) % k]).collect();

    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for r in 0..k {
        for cand in [rotate(edges, vertices, r), rotate(&rev_edges, &rev_vertices, r)] {
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

/// All distinct simple cycles with length < `b_max` and at most `d_max`
/// edges, each in canonical form, sorted by edge-id sequence.
///
/// Depth-first from each start vertex in increasing id, visiting only
/// vertices of id at least the start, never repeating a vertex or edge, and
/// pruning once the accumulated length reaches `b_max` or the edge count
/// would exceed `d_max`.
pub fn enumerate_cycles<F: Scalar>(m: &MetricMap<F>, b_max: F, d_max: usize) -> Vec<Cycle<F>> {
    assert!(b_max > F::zero());
    assert!(d_max >= 1);
    let g = m.graph();
    let incident = incidence_lists(g);

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out: Vec<Cycle<F>> = Vec::new();
    let mut used_vertex = vec![false; g.vertex_count()];
    let mut used_edge = vec![false; g.edge_count()];
    let mut epath: Vec<usize> = Vec::new();
    let mut vpath: Vec<usize> = Vec::new();

    struct Ctx<'a, F: Scalar> {
        m: &'a MetricMap<F>,
        incident: &'a [Vec<usize>],
        b_max: F,
        d_max: usize,
    }

    fn dfs<F: Scalar>(
        ctx: &Ctx<'_, F>,
        start: usize,
        u: usize,
        acc: F,
        used_vertex: &mut [bool],
        used_edge: &mut [bool],
        epath: &mut Vec<usize>,
        vpath: &mut Vec<usize>,
        seen: &mut HashSet<Vec<usize>>,
        out: &mut Vec<Cycle<F>>,
    ) {
        let g = ctx.m.graph();
        for &h in &ctx.incident[u] {
            let e = g.edge_of(h);
            if used_edge[e] {
                continue;
            }
            let w = g.vertex_of(g.alpha()[h]);
            let next_len = acc + ctx.m.edge_length(e);
            if next_len >= ctx.b_max || epath.len() + 1 > ctx.d_max {
                continue;
            }
            if w == start {
                let mut edges = epath.clone();
                edges.push(e);
                let cycle = Cycle::new(edges, vpath.clone(), next_len);
                if seen.insert(cycle.edges().to_vec()) {
                    out.push(cycle);
                }
            } else if w > start && !used_vertex[w] {
                used_vertex[w] = true;
                used_edge[e] = true;
                epath.push(e);
                vpath.push(w);
                dfs(ctx, start, w, next_len, used_vertex, used_edge, epath, vpath, seen, out);
                vpath.pop();
                epath.pop();
                used_edge[e] = false;
                used_vertex[w] = false;
            }
        }
    }

    let ctx = Ctx { m, incident: &incident, b_max, d_max };
    for start in 0..g.vertex_count() {
        used_vertex[start] = true;
        vpath.push(start);
        dfs(
            &ctx,
            start,
            start,
            F::zero(),
            &mut used_vertex,
            &mut used_edge,
            &mut epath,
            &mut vpath,
            &mut seen,
            &mut out,
        );
        vpath.pop();
        used_vertex[start] = false;
    }
    out.sort_by(|a, b| a.edges().cmp(b.edges()).then_with(|| a.vertices().cmp(b.vertices())));
    out
}

fn incidence_lists(g: &HalfEdgeStructure) -> Vec<Vec<usize>> {
    let mut incident = vec![Vec::new(); g.vertex_count()];
    for h in 0..g.half_edge_count() {
        incident[g.vertex_of(h)].push(h);
    }
    incident
}

#[derive(PartialEq)]
struct HeapItem<F: Scalar> {
    dist: F,
    node: usize,
}

impl<F: Scalar> Eq for HeapItem<F> {}

impl<F: Scalar> Ord for HeapItem<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on finite nonnegative distances
        other
            .dist
            .partial_cmp(&self.dist)
            .expect("finite distance")
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl<F: Scalar> PartialOrd for HeapItem<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn shortest_path_avoiding<F: Scalar>(
    m: &MetricMap<F>,
    incident: &[Vec<usize>],
    banned_edge: usize,
    src: usize,
    dst: usize,
) -> Option<F> {
    let g = m.graph();
    let mut dist: Vec<Option<F>> = vec![None; g.vertex_count()];
    let mut settled = vec![false; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(F::zero());
    heap.push(HeapItem { dist: F::zero(), node: src });
    while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == dst {
            return Some(d);
        }
        for &h in &incident[u] {
            let e = g.edge_of(h);
            if e == banned_edge {
                continue;
            }
            let w = g.vertex_of(g.alpha()[h]);
            let nd = d + m.edge_length(e);
            if dist[w].map_or(true, |old| nd < old) {
                dist[w] = Some(nd);
                heap.push(HeapItem { dist: nd, node: w });
            }
        }
    }
    None
}

/// Exact girth: the minimum cycle length, with no truncation. For each edge
/// e = (u, v), the best cycle through e costs its length plus the shortest
/// u-v distance avoiding e; self-loops cost their own length.
pub fn girth<F: Scalar>(m: &MetricMap<F>) -> Result<F, CensusError> {
    let g = m.graph();
    let incident = incidence_lists(g);
    let mut best: Option<F> = None;
    for e in 0..g.edge_count() {
        let (u, v) = g.edge_endpoints(e);
        let le = m.edge_length(e);
        let cand = if u == v {
            Some(le)
        } else {
            shortest_path_avoiding(m, &incident, e, u, v).map(|d| le + d)
        };
        if let Some(c) = cand {
            if best.map_or(true, |b| c < b) {
                best = Some(c);
            }
        }
    }
    best.ok_or(CensusError::Acyclic)
}

/// Per-trial census: cycle (length, edge count) pairs sorted by length, the
/// exact girth, and the truncation bounds the census was run with.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord<F: Scalar> {
    entries: Vec<(F, usize)>,
    girth: F,
    b_max: F,
    d_max: usize,
}

impl<F: Scalar> SpectrumRecord<F> {
    pub fn new(cycles: &[Cycle<F>], girth: F, b_max: F, d_max: usize) -> Self {
        let mut entries: Vec<(F, usize)> =
            cycles.iter().map(|c| (c.length(), c.edge_count())).collect();
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite length"));
        assert!(entries.iter().all(|&(l, k)| l < b_max && k <= d_max));
        Self { entries, girth, b_max, d_max }
    }

    /// Rebuilds a record from already-censused (length, edge count) pairs,
    /// e.g. when reloading logged trials.
    pub fn from_entries(
        mut entries: Vec<(F, usize)>,
        girth: F,
        b_max: F,
        d_max: usize,
    ) -> Self {
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite length"));
        assert!(entries.iter().all(|&(l, k)| l < b_max && k <= d_max));
        Self { entries, girth, b_max, d_max }
    }

    /// Runs the census on a map: bounded enumeration plus exact girth.
    pub fn from_map(m: &MetricMap<F>, b_max: F, d_max: usize) -> Result<Self, CensusError> {
        let cycles = enumerate_cycles(m, b_max, d_max);
        let girth = girth(m)?;
        Ok(Self::new(&cycles, girth, b_max, d_max))
    }

    pub fn entries(&self) -> &[(F, usize)] {
        &self.entries
    }

    pub fn girth(&self) -> F {
        self.girth
    }

    pub fn b_max(&self) -> F {
        self.b_max
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }
}

/// Number of recorded cycle lengths in each half-open interval [a, b).
/// Intervals must be pairwise disjoint and lie within the truncation bound.
pub fn spectrum_counts<F: Scalar>(
    rec: &SpectrumRecord<F>,
    intervals: &[(F, F)],
) -> Result<Vec<u64>, CensusError> {
    for (i, &(a, b)) in intervals.iter().enumerate() {
        assert!(a >= F::zero() && a < b, "interval must satisfy 0 <= a < b");
        if b > rec.b_max {
            return Err(CensusError::TruncationExceeded {
                requested: b.as_f64(),
                b_max: rec.b_max.as_f64(),
            });
        }
        for &(c, d) in &intervals[i + 1..] {
            assert!(b <= c || d <= a, "intervals must be pairwise disjoint");
        }
    }
    Ok(intervals
        .iter()
        .map(|&(a, b)| rec.entries.iter().filter(|&&(l, _)| a <= l && l < b).count() as u64)
        .collect())
}
