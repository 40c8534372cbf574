//! Genus-decorated multigraphs with labelled leaves: enumeration up to
//! isomorphism, automorphism counts, and the combinatorial bounds used in
//! the separating-sum analysis.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::scaled::{factorial_scaled, ScaledReal};
use crate::volumes::aggarwal_normalized;

pub const MAX_GENUS: u32 = 5;
pub const MAX_LEAVES: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StableGraphError {
    #[error("enumeration is limited to genus <= {MAX_GENUS} and leaves <= {MAX_LEAVES}, requested ({genus}, {leaves})")]
    SizeGuard { genus: u32, leaves: usize },
    #[error("operation requires a graph with at least two vertices")]
    NotSeparating,
    #[error("vertex {vertex} violates stability: 2g - 2 + valency must be positive")]
    Unstable { vertex: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("{0}")]
    Malformed(&'static str),
}

/// Connected multigraph with a genus per vertex, self-loops, and leaf labels
/// 1..=n distributed over the vertices. Stability 2g_v - 2 + n_v > 0 holds at
/// every vertex, where the valency n_v counts leaves, loop ends, and edge ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableGraph {
    genera: Vec<u32>,
    leaves: Vec<Vec<u32>>,
    loops: Vec<u32>,
    adj: Vec<Vec<u32>>,
}

impl StableGraph {
    pub fn new(
        genera: Vec<u32>,
        leaves: Vec<Vec<u32>>,
        loops: Vec<u32>,
        adj: Vec<Vec<u32>>,
    ) -> Result<Self, StableGraphError> {
        let v = genera.len();
        if v == 0 {
            return Err(StableGraphError::Malformed("no vertices"));
        }
        if leaves.len() != v || loops.len() != v || adj.len() != v {
            return Err(StableGraphError::Malformed("field lengths disagree"));
        }
        for (i, row) in adj.iter().enumerate() {
            if row.len() != v {
                return Err(StableGraphError::Malformed("adjacency is not square"));
            }
            if row[i] != 0 {
                return Err(StableGraphError::Malformed(
                    "loops belong in the loop vector, not the diagonal",
                ));
            }
            for j in 0..v {
                if adj[i][j] != adj[j][i] {
                    return Err(StableGraphError::Malformed("adjacency is not symmetric"));
                }
            }
        }
        let mut all_labels: Vec<u32> = leaves.iter().flatten().copied().collect();
        all_labels.sort_unstable();
        if all_labels.iter().enumerate().any(|(i, &l)| l != i as u32 + 1) {
            return Err(StableGraphError::Malformed("leaf labels must be exactly 1..=n"));
        }
        let graph = Self { genera, leaves, loops, adj };
        for vtx in 0..v {
            if 2 * graph.genera[vtx] as i64 - 2 + graph.valency(vtx) as i64 <= 0 {
                return Err(StableGraphError::Unstable { vertex: vtx });
            }
        }
        if !connected(&graph.adj) {
            return Err(StableGraphError::Disconnected);
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.genera.len()
    }

    pub fn edge_count(&self) -> usize {
        let bundles: u32 = (0..self.genera.len())
            .flat_map(|i| (i + 1..self.genera.len()).map(move |j| (i, j)))
            .map(|(i, j)| self.adj[i][j])
            .sum();
        (self.loops.iter().sum::<u32>() + bundles) as usize
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.iter().map(Vec::len).sum()
    }

    /// Valency n_v: leaves plus two ends per loop plus incident edge ends.
    pub fn valency(&self, v: usize) -> usize {
        self.leaves[v].len() + 2 * self.loops[v] as usize + self.adj[v].iter().sum::<u32>() as usize
    }

    /// Total genus: sum of decorations plus the first Betti number.
    pub fn genus(&self) -> u32 {
        let betti = self.edge_count() as i64 - self.vertex_count() as i64 + 1;
        (self.genera.iter().sum::<u32>() as i64 + betti) as u32
    }

    pub fn is_separating(&self) -> bool {
        self.vertex_count() >= 2
    }

    pub fn genus_of(&self, v: usize) -> u32 {
        self.genera[v]
    }

    pub fn leaf_labels(&self, v: usize) -> &[u32] {
        &self.leaves[v]
    }

    pub fn loop_count(&self, v: usize) -> u32 {
        self.loops[v]
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        self.adj[i][j]
    }

    /// Edge list with loops reported as (v, v) and parallel edges repeated.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for v in 0..self.vertex_count() {
            for _ in 0..self.loops[v] {
                out.push((v, v));
            }
        }
        for i in 0..self.vertex_count() {
            for j in i + 1..self.vertex_count() {
                for _ in 0..self.adj[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Concrete half-edge realization: incidence, involution, and the leaf
    /// label carried by each fixed point of the involution.
    pub fn half_edges(&self) -> (Vec<usize>, Vec<usize>, Vec<Option<u32>>) {
        let mut nu = Vec::new();
        let mut iota = Vec::new();
        let mut label = Vec::new();
        for v in 0..self.vertex_count() {
            for &l in &self.leaves[v] {
                let h = nu.len();
                nu.push(v);
                iota.push(h);
                label.push(Some(l));
            }
        }
        for (a, b) in self.edges() {
            let h = nu.len();
            nu.push(a);
            nu.push(b);
            iota.push(h + 1);
            iota.push(h);
            label.push(None);
            label.push(None);
        }
        (nu, iota, label)
    }

    fn chi(&self, v: usize) -> u64 {
        (2 * self.genera[v] as i64 - 2 + self.valency(v) as i64) as u64
    }
}

fn connected(adj: &[Vec<u32>]) -> bool {
    let v = adj.len();
    let mut seen = vec![false; v];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..v {
            if adj[i][j] > 0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Cheap deterministic hasher for the dedup maps; keys are canonical words,
/// so hash quality only affects speed, never results.
#[derive(Default)]
struct FoldHasher(u64);

impl std::hash::Hasher for FoldHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut b = [0u8; 8];
            b[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(b));
        }
    }
    fn write_u64(&mut self, x: u64) {
        self.0 = (self.0 ^ x).wrapping_mul(0x9e3779b97f4a7c15).rotate_left(26);
    }
    fn write_usize(&mut self, x: usize) {
        self.write_u64(x as u64);
    }
}

type FoldMap<K, V> = HashMap<K, V, std::hash::BuildHasherDefault<FoldHasher>>;

// ---------------------------------------------------------------------------
// canonical forms

fn mix(mut h: u64, v: u64) -> u64 {
    h ^= v.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h.wrapping_mul(0xff51afd7ed558ccd).rotate_left(31)
}

/// Iso-invariant refinement of initial vertex classes by neighbor multisets.
fn refined_keys(ranks: &[usize], adj: &[Vec<u32>]) -> Vec<u64> {
    let v = ranks.len();
    let mut keys: Vec<u64> = ranks.iter().map(|&r| mix(0, r as u64)).collect();
    for _ in 0..3 {
        let mut next = Vec::with_capacity(v);
        for i in 0..v {
            let mut neigh: Vec<(u64, u32)> = (0..v)
                .filter(|&j| j != i && adj[i][j] > 0)
                .map(|j| (keys[j], adj[i][j]))
                .collect();
            neigh.sort_unstable();
            let mut h = mix(keys[i], 0x517cc1b727220a95);
            for (k, m) in neigh {
                h = mix(mix(h, k), m as u64);
            }
            next.push(h);
        }
        keys = next;
    }
    keys
}

struct CanonInput<'a> {
    genera: &'a [u32],
    slots: &'a [u32],
    labels: &'a [Vec<u32>],
    loops: &'a [u32],
    adj: &'a [Vec<u32>],
}

/// Packs small field values four bits at a time; values of 15 or more get a
/// marker nibble followed by the full 16-nibble word, so the encoding stays
/// injective for arbitrary inputs.
struct NibbleWriter<'a> {
    out: &'a mut Vec<u64>,
    acc: u64,
    filled: u32,
}

impl<'a> NibbleWriter<'a> {
    fn new(out: &'a mut Vec<u64>) -> Self {
        out.clear();
        Self { out, acc: 0, filled: 0 }
    }

    fn nibble(&mut self, val: u64) {
        self.acc = (self.acc << 4) | val;
        self.filled += 1;
        if self.filled == 16 {
            self.out.push(self.acc);
            self.acc = 0;
            self.filled = 0;
        }
    }

    fn push(&mut self, val: u64) {
        if val < 15 {
            self.nibble(val);
        } else {
            self.nibble(15);
            for shift in (0..16).rev() {
                self.nibble((val >> (4 * shift)) & 0xf);
            }
        }
    }

    fn finish(self) {
        if self.filled > 0 {
            self.out.push(self.acc << (4 * (16 - self.filled)));
        }
    }
}

fn serialize(inp: &CanonInput, perm: &[usize], out: &mut Vec<u64>) {
    let mut w = NibbleWriter::new(out);
    let v = perm.len();
    w.push(v as u64);
    for &old in perm {
        w.push(inp.genera[old] as u64);
        w.push(inp.loops[old] as u64);
        w.push(inp.slots[old] as u64);
        w.push(inp.labels[old].len() as u64);
        for &l in &inp.labels[old] {
            w.push(l as u64);
        }
    }
    for i in 0..v {
        for j in i + 1..v {
            w.push(inp.adj[perm[i]][perm[j]] as u64);
        }
    }
    w.finish();
}

/// Reusable buffers for the canonical search; keeps the per-candidate hot
/// path free of allocations.
#[derive(Default)]
struct CanonScratch {
    order: Vec<usize>,
    span: Vec<(u32, u32)>,
    ranks: Vec<usize>,
    perm: Vec<usize>,
    used: Vec<bool>,
    word: Vec<u64>,
    best: Vec<u64>,
    best_perm: Vec<usize>,
    count: u64,
}

/// Fills `s.best` with the minimal serialization over decoration-preserving
/// vertex relabelings, `s.best_perm` with a relabeling attaining it, and
/// `s.count` with the number that attain it (the vertex automorphism count).
fn canonical_vertex_form(inp: &CanonInput, s: &mut CanonScratch) {
    let v = inp.genera.len();
    // row multisets fit exactly in a u64: 4-bit count per multiplicity value
    let base_key = |i: usize| {
        let rowsig: u64 = inp.adj[i]
            .iter()
            .map(|&m| 1u64 << (4 * (m as usize).min(15)))
            .sum();
        (inp.genera[i], inp.slots[i], inp.labels[i].as_slice(), inp.loops[i], rowsig)
    };
    s.ranks.clear();
    s.ranks.resize(v, 0);
    s.order.clear();
    s.order.extend(0..v);
    s.order.sort_unstable_by(|&a, &b| base_key(a).cmp(&base_key(b)));
    // ranks[vertex] = index of its block in the sorted order
    let mut rank = 0usize;
    for pos in 0..v {
        if pos > 0 && base_key(s.order[pos - 1]) != base_key(s.order[pos]) {
            rank += 1;
        }
        s.ranks[s.order[pos]] = rank;
    }
    rebuild_spans(&s.order, &s.ranks, &mut s.span);
    if perm_space(&s.span) > 24 {
        // split symmetric-looking blocks by neighborhood structure before
        // searching; coarse blocks only cost extra search, never correctness
        let keys = refined_keys(&s.ranks, inp.adj);
        let ranks = &s.ranks;
        s.order
            .sort_unstable_by(|&a, &b| (ranks[a], keys[a]).cmp(&(ranks[b], keys[b])));
        let mut rank = 0usize;
        let mut fine = vec![0usize; v];
        for pos in 0..v {
            if pos > 0 {
                let (a, b) = (s.order[pos - 1], s.order[pos]);
                if (s.ranks[a], keys[a]) != (s.ranks[b], keys[b]) {
                    rank += 1;
                }
            }
            fine[s.order[pos]] = rank;
        }
        s.ranks = fine;
        rebuild_spans(&s.order, &s.ranks, &mut s.span);
    }
    assert!(perm_space(&s.span) <= 2_000_000, "vertex symmetry beyond desk scale");

    s.count = 0;
    s.best.clear();
    if s.span.iter().all(|&(a, b)| b - a == 1) {
        serialize(inp, &s.order, &mut s.best);
        s.best_perm.clear();
        s.best_perm.extend_from_slice(&s.order);
        s.count = 1;
        return;
    }
    s.perm.clear();
    s.used.clear();
    s.used.resize(v, false);
    descend(
        inp,
        &s.order,
        &s.span,
        &mut s.perm,
        &mut s.used,
        &mut s.word,
        &mut s.best,
        &mut s.best_perm,
        &mut s.count,
    );
}

fn perm_space(span: &[(u32, u32)]) -> u64 {
    let mut product = 1u64;
    let mut pos = 0usize;
    while pos < span.len() {
        let (a, b) = span[pos];
        product *= (1..=(b - a) as u64).product::<u64>();
        pos = b as usize;
    }
    product
}

fn rebuild_spans(order: &[usize], ranks: &[usize], span: &mut Vec<(u32, u32)>) {
    let v = order.len();
    span.clear();
    span.resize(v, (0, 0));
    let mut start = 0usize;
    for pos in 0..=v {
        if pos == v || (pos > 0 && ranks[order[pos]] != ranks[order[pos - 1]]) {
            for item in span.iter_mut().take(pos).skip(start) {
                *item = (start as u32, pos as u32);
            }
            start = pos;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn descend(
    inp: &CanonInput,
    order: &[usize],
    span: &[(u32, u32)],
    perm: &mut Vec<usize>,
    used: &mut [bool],
    word: &mut Vec<u64>,
    best: &mut Vec<u64>,
    best_perm: &mut Vec<usize>,
    count: &mut u64,
) {
    let pos = perm.len();
    if pos == used.len() {
        serialize(inp, perm, word);
        if best.is_empty() || word.as_slice() < best.as_slice() {
            std::mem::swap(word, best);
            best_perm.clear();
            best_perm.extend_from_slice(perm);
            *count = 1;
        } else if word == best {
            *count += 1;
        }
        return;
    }
    let (a, b) = span[pos];
    for q in a as usize..b as usize {
        let cand = order[q];
        if !used[cand] {
            used[cand] = true;
            perm.push(cand);
            descend(inp, order, span, perm, used, word, best, best_perm, count);
            perm.pop();
            used[cand] = false;
        }
    }
}

fn graph_canonical_form(graph: &StableGraph) -> (Vec<u64>, u64) {
    let slots: Vec<u32> = graph.leaves.iter().map(|l| l.len() as u32).collect();
    let mut s = CanonScratch::default();
    canonical_vertex_form(
        &CanonInput {
            genera: &graph.genera,
            slots: &slots,
            labels: &graph.leaves,
            loops: &graph.loops,
            adj: &graph.adj,
        },
        &mut s,
    );
    (s.best, s.count)
}

/// Order of the automorphism group: decoration-preserving vertex bijections
/// combined with permutations of parallel edges and swaps/permutations of
/// loop half-edges.
pub fn aut_order(graph: &StableGraph) -> u64 {
    let (_, vertex_auts) = graph_canonical_form(graph);
    vertex_auts * internal_edge_symmetries(graph)
}

fn internal_edge_symmetries(graph: &StableGraph) -> u64 {
    let v = graph.vertex_count();
    let mut f = 1u64;
    for i in 0..v {
        let l = graph.loops[i] as u64;
        f *= (1..=l).product::<u64>() << l;
        for j in i + 1..v {
            f *= (1..=graph.adj[i][j] as u64).product::<u64>();
        }
    }
    f
}

// ---------------------------------------------------------------------------
// enumeration

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct VertexType {
    chi: u32,
    genus: u32,
    slots: u32,
}

impl VertexType {
    fn valency(&self) -> u32 {
        self.chi + 2 - 2 * self.genus
    }
    fn degree(&self) -> u32 {
        self.valency() - self.slots
    }
}

/// One representative per isomorphism class of stable graphs of type (g, n),
/// each with its automorphism count, in a deterministic canonical order.
pub fn enumerate_stable_graphs(
    g: u32,
    n: usize,
) -> Result<Vec<(StableGraph, u64)>, StableGraphError> {
    if g > MAX_GENUS || n > MAX_LEAVES {
        return Err(StableGraphError::SizeGuard { genus: g, leaves: n });
    }
    assert!(2 * g as i64 - 2 + n as i64 > 0, "({g}, {n}) is not a stable type");
    let chi_total = (2 * g as i64 - 2 + n as i64) as u32;

    let mut types: Vec<VertexType> = Vec::new();
    for chi in 1..=chi_total {
        for genus in 0..=g.min((chi + 2) / 2) {
            let t = VertexType { chi, genus, slots: 0 };
            for slots in 0..=(n as u32).min(t.valency()) {
                types.push(VertexType { slots, ..t });
            }
        }
    }
    types.sort_unstable_by(|a, b| b.cmp(a));

    // stage 1: unlabelled graphs, leaf labels abstracted to slot counts
    let mut unlabelled: FoldMap<Vec<u64>, Candidate> = FoldMap::default();
    let mut seq: Vec<VertexType> = Vec::new();
    let mut scratch = CanonScratch::default();
    pick_types(
        g,
        n as u32,
        chi_total,
        &types,
        0,
        (0, 0, 0),
        &mut seq,
        &mut scratch,
        &mut unlabelled,
    );

    // stage 2: distribute the labels 1..=n over the slots of each class
    let mut classes: FoldMap<Vec<u64>, (StableGraph, u64)> = FoldMap::default();
    for cand in unlabelled.values() {
        let slotted: Vec<usize> =
            (0..cand.genera.len()).filter(|&v| cand.slots[v] > 0).collect();
        let mut labels = vec![Vec::new(); cand.genera.len()];
        let pool: Vec<u32> = (1..=n as u32).collect();
        assign_labels(cand, &slotted, 0, &pool, &mut labels, &mut scratch, &mut classes);
    }

    let mut out: Vec<(Vec<u64>, StableGraph, u64)> = classes
        .into_iter()
        .map(|(k, (gr, aut))| (k, gr, aut))
        .collect();
    out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let result: Vec<(StableGraph, u64)> = out.into_iter().map(|(_, gr, aut)| (gr, aut)).collect();
    for (graph, _) in &result {
        assert_eq!(graph.genus(), g);
        assert_eq!(graph.leaf_count(), n);
    }
    Ok(result)
}

struct Candidate {
    genera: Vec<u32>,
    slots: Vec<u32>,
    loops: Vec<u32>,
    adj: Vec<Vec<u32>>,
}

#[allow(clippy::too_many_arguments)]
fn pick_types(
    g: u32,
    n: u32,
    chi_total: u32,
    types: &[VertexType],
    from: usize,
    sums: (u32, u32, u32),
    seq: &mut Vec<VertexType>,
    scratch: &mut CanonScratch,
    unlabelled: &mut FoldMap<Vec<u64>, Candidate>,
) {
    let (chi_sum, g_sum, slot_sum) = sums;
    if chi_sum == chi_total {
        if slot_sum == n && g_sum <= g {
            flush_type_sequence(g, seq, scratch, unlabelled);
        }
        return;
    }
    for idx in from..types.len() {
        let t = types[idx];
        if chi_sum + t.chi > chi_total || g_sum + t.genus > g || slot_sum + t.slots > n {
            continue;
        }
        seq.push(t);
        pick_types(
            g,
            n,
            chi_total,
            types,
            idx,
            (chi_sum + t.chi, g_sum + t.genus, slot_sum + t.slots),
            seq,
            scratch,
            unlabelled,
        );
        seq.pop();
    }
}

fn flush_type_sequence(
    g: u32,
    seq: &[VertexType],
    scratch: &mut CanonScratch,
    unlabelled: &mut FoldMap<Vec<u64>, Candidate>,
) {
    let v = seq.len();
    let g_sum: u32 = seq.iter().map(|t| t.genus).sum();
    let edges = g - g_sum + v as u32 - 1;
    let degrees: Vec<u32> = seq.iter().map(VertexType::degree).collect();
    if v >= 2 && degrees.iter().any(|&d| d == 0) {
        return;
    }
    debug_assert_eq!(degrees.iter().sum::<u32>(), 2 * edges);

    let genera: Vec<u32> = seq.iter().map(|t| t.genus).collect();
    let slots: Vec<u32> = seq.iter().map(|t| t.slots).collect();
    let same_next: Vec<bool> = (0..v).map(|i| i + 1 < v && seq[i] == seq[i + 1]).collect();
    let empty_labels = vec![Vec::new(); v];
    let mut loops = vec![0u32; v];
    let mut adj = vec![vec![0u32; v]; v];
    let mut rem = degrees.clone();
    fill_vertex(
        0,
        &mut loops,
        &mut adj,
        &mut rem,
        &mut |loops, adj| {
            if !locally_minimal(loops, adj, &same_next) {
                return;
            }
            if !connected(adj) {
                return;
            }
            let inp = CanonInput {
                genera: &genera,
                slots: &slots,
                labels: &empty_labels,
                loops,
                adj,
            };
            canonical_vertex_form(&inp, scratch);
            if !unlabelled.contains_key(&scratch.best) {
                unlabelled.insert(
                    scratch.best.clone(),
                    Candidate {
                        genera: genera.clone(),
                        slots: slots.clone(),
                        loops: loops.to_vec(),
                        adj: adj.to_vec(),
                    },
                );
            }
        },
    );
}

/// Keeps only candidates not strictly above a neighbor in their relabeling
/// orbit: swapping two adjacent vertices of equal type must not produce a
/// lexicographically smaller fill. The orbit minimum always passes, so every
/// class survives; canonical dedup removes the rest.
fn locally_minimal(loops: &[u32], adj: &[Vec<u32>], same_next: &[bool]) -> bool {
    let v = loops.len();
    for u in 0..v.saturating_sub(1) {
        if !same_next[u] {
            continue;
        }
        let ok = 'pair: {
            for w in 0..u {
                if adj[w][u] != adj[w][u + 1] {
                    break 'pair adj[w][u] < adj[w][u + 1];
                }
            }
            if loops[u] != loops[u + 1] {
                break 'pair loops[u] < loops[u + 1];
            }
            for x in u + 2..v {
                if adj[u][x] != adj[u + 1][x] {
                    break 'pair adj[u][x] < adj[u + 1][x];
                }
            }
            true
        };
        if !ok {
            return false;
        }
    }
    true
}

fn fill_vertex(
    v: usize,
    loops: &mut Vec<u32>,
    adj: &mut Vec<Vec<u32>>,
    rem: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32], &[Vec<u32>]),
) {
    let count = rem.len();
    if v == count {
        visit(loops, adj);
        return;
    }
    // once rows 0..v are fixed, a prefix with no edge into v.. can never
    // become connected, so the whole subtree is dead
    if v >= 1 && (v..count).all(|u| (0..v).all(|w| adj[w][u] == 0)) {
        return;
    }
    let budget = rem[v];
    for l in 0..=budget / 2 {
        loops[v] = l;
        fill_row(v, v + 1, budget - 2 * l, loops, adj, rem, visit);
        loops[v] = 0;
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_row(
    v: usize,
    u: usize,
    left: u32,
    loops: &mut Vec<u32>,
    adj: &mut Vec<Vec<u32>>,
    rem: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32], &[Vec<u32>]),
) {
    let count = rem.len();
    if u == count {
        if left == 0 {
            let saved = rem[v];
            rem[v] = 0;
            fill_vertex(v + 1, loops, adj, rem, visit);
            rem[v] = saved;
        }
        return;
    }
    if u == count - 1 {
        // last column must absorb the remaining row budget exactly
        if left <= rem[u] {
            adj[v][u] = left;
            adj[u][v] = left;
            rem[u] -= left;
            let saved = rem[v];
            rem[v] = 0;
            fill_vertex(v + 1, loops, adj, rem, visit);
            rem[v] = saved;
            rem[u] += left;
            adj[v][u] = 0;
            adj[u][v] = 0;
        }
        return;
    }
    if rem[u..].iter().sum::<u32>() < left {
        return;
    }
    for m in 0..=left.min(rem[u]) {
        adj[v][u] = m;
        adj[u][v] = m;
        rem[u] -= m;
        fill_row(v, u + 1, left - m, loops, adj, rem, visit);
        rem[u] += m;
        adj[v][u] = 0;
        adj[u][v] = 0;
    }
}

#[allow(clippy::too_many_arguments)]
fn assign_labels(
    cand: &Candidate,
    slotted: &[usize],
    idx: usize,
    pool: &[u32],
    labels: &mut Vec<Vec<u32>>,
    scratch: &mut CanonScratch,
    classes: &mut FoldMap<Vec<u64>, (StableGraph, u64)>,
) {
    if idx == slotted.len() {
        let inp = CanonInput {
            genera: &cand.genera,
            slots: &cand.slots,
            labels,
            loops: &cand.loops,
            adj: &cand.adj,
        };
        canonical_vertex_form(&inp, scratch);
        if !classes.contains_key(&scratch.best) {
            // store the representative in canonical vertex order so output
            // does not depend on which raw candidate was met first
            let p = &scratch.best_perm;
            let graph = StableGraph::new(
                p.iter().map(|&o| cand.genera[o]).collect(),
                p.iter().map(|&o| labels[o].clone()).collect(),
                p.iter().map(|&o| cand.loops[o]).collect(),
                p.iter()
                    .map(|&pi| p.iter().map(|&pj| cand.adj[pi][pj]).collect())
                    .collect(),
            )
            .expect("enumerated candidate must be a valid stable graph");
            let aut = scratch.count * internal_edge_symmetries(&graph);
            classes.insert(scratch.best.clone(), (graph, aut));
        }
        return;
    }
    let v = slotted[idx];
    let want = cand.slots[v] as usize;
    let mut subset = Vec::with_capacity(want);
    choose_subsets(pool, want, 0, &mut subset, &mut |chosen| {
        labels[v] = chosen.to_vec();
        let rest: Vec<u32> = pool.iter().copied().filter(|l| !chosen.contains(l)).collect();
        assign_labels(cand, slotted, idx + 1, &rest, labels, scratch, classes);
        labels[v].clear();
    });
}

fn choose_subsets(pool: &[u32], want: usize, from: usize, acc: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if acc.len() == want {
        f(acc);
        return;
    }
    let need = want - acc.len();
    for i in from..=pool.len().saturating_sub(need) {
        acc.push(pool[i]);
        choose_subsets(pool, want, i + 1, acc, f);
        acc.pop();
    }
}

// ---------------------------------------------------------------------------
// combinatorial bounds

/// F(n, k) = sum over compositions n_1 + ... + n_k = n, n_i >= 1, of
/// n_1! ... n_k! / n!, exactly; satisfies F(n, k) <= 4/n.
pub fn lemma_k_sum(n: u32, k: u32) -> BigRational {
    assert!(2 <= k && k <= n, "need 2 <= k <= n");
    let n = n as usize;
    let fact: Vec<BigInt> = {
        let mut f = vec![BigInt::one()];
        for i in 1..=n {
            let last = f.last().unwrap() * BigInt::from(i);
            f.push(last);
        }
        f
    };
    // G(m, j) = sum over compositions of m into j positive parts of prod part!
    let mut row: Vec<BigInt> = fact.clone(); // j = 1
    for _ in 2..=k {
        let mut next = vec![BigInt::from(0); n + 1];
        for m in 1..=n {
            for i in 1..m {
                next[m] += &fact[i] * &row[m - i];
            }
        }
        row = next;
    }
    BigRational::new(row[n].clone(), fact[n].clone())
}

/// Separating-graph inequality: the vertex-factorized double-factorial
/// product against 4^(2-V+E) prod chi_v! / chi!, both in scaled arithmetic.
pub fn lemma_kk_check(
    graph: &StableGraph,
) -> Result<(ScaledReal, ScaledReal, bool), StableGraphError> {
    if !graph.is_separating() {
        return Err(StableGraphError::NotSeparating);
    }
    let g = graph.genus();
    let n = graph.leaf_count();
    let mut lhs = ScaledReal::one();
    for v in 0..graph.vertex_count() {
        lhs = lhs * aggarwal_normalized(graph.genus_of(v), graph.valency(v));
    }
    lhs = lhs / aggarwal_normalized(g, n);
    let exponent = graph.edge_count() as i64 - graph.vertex_count() as i64 + 2;
    let mut rhs = ScaledReal::from_u64(4).powi(exponent);
    for v in 0..graph.vertex_count() {
        rhs = rhs * factorial_scaled(graph.chi(v));
    }
    rhs = rhs / factorial_scaled((2 * g as i64 - 2 + n as i64) as u64);
    let holds = lhs <= rhs * ScaledReal::from_f64(1.0 + 1e-12);
    Ok((lhs, rhs, holds))
}

/// Expected-multicurve bound for a separating graph:
/// sqrt(g)/|Aut| * C^E/(2E)! * prod chi_v! / chi!.
pub fn emleq_bound(graph: &StableGraph, c: f64) -> Result<ScaledReal, StableGraphError> {
    if !graph.is_separating() {
        return Err(StableGraphError::NotSeparating);
    }
    assert!(c > 0.0, "the bound constant must be positive");
    emleq_bound_with_aut(graph, aut_order(graph), c)
}

fn emleq_bound_with_aut(
    graph: &StableGraph,
    aut: u64,
    c: f64,
) -> Result<ScaledReal, StableGraphError> {
    let g = graph.genus();
    let n = graph.leaf_count();
    let e = graph.edge_count() as u64;
    let mut val = ScaledReal::from_f64((g as f64).sqrt()) / ScaledReal::from_u64(aut);
    val = val * ScaledReal::from_f64(c).powi(e as i64) / factorial_scaled(2 * e);
    for v in 0..graph.vertex_count() {
        val = val * factorial_scaled(graph.chi(v));
    }
    Ok(val / factorial_scaled((2 * g as i64 - 2 + n as i64) as u64))
}

/// Sum of [emleq_bound] over every separating graph of type (g, n); each
/// term carries its own 1/|Aut| weight.
pub fn sum_emleq_bound(g: u32, n: usize, c: f64) -> Result<ScaledReal, StableGraphError> {
    let mut sum = ScaledReal::zero();
    for (graph, aut) in enumerate_stable_graphs(g, n)? {
        if graph.is_separating() {
            sum = sum + emleq_bound_with_aut(&graph, aut, c)?;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_vertex(genus: u32, n_leaves: u32, loops: u32) -> StableGraph {
        StableGraph::new(
            vec![genus],
            vec![(1..=n_leaves).collect()],
            vec![loops],
            vec![vec![0]],
        )
        .unwrap()
    }

    fn bridge(g1: u32, g2: u32, leaves1: Vec<u32>, leaves2: Vec<u32>) -> StableGraph {
        StableGraph::new(
            vec![g1, g2],
            vec![leaves1, leaves2],
            vec![0, 0],
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap()
    }

    #[test]
    fn validation_rejects_bad_graphs() {
        // torus vertex with no half-edges is unstable
        assert_eq!(
            StableGraph::new(vec![1], vec![vec![]], vec![0], vec![vec![0]]),
            Err(StableGraphError::Unstable { vertex: 0 })
        );
        // two stable components without a joining edge
        assert_eq!(
            StableGraph::new(
                vec![2, 2],
                vec![vec![], vec![]],
                vec![0, 0],
                vec![vec![0, 0], vec![0, 0]],
            ),
            Err(StableGraphError::Disconnected)
        );
        assert_eq!(
            StableGraph::new(vec![2], vec![vec![2]], vec![0], vec![vec![0]]),
            Err(StableGraphError::Malformed("leaf labels must be exactly 1..=n"))
        );
    }

    #[test]
    fn genus_combines_decorations_and_betti_number() {
        assert_eq!(single_vertex(0, 1, 1).genus(), 1);
        assert_eq!(single_vertex(0, 0, 2).genus(), 2);
        assert_eq!(bridge(1, 1, vec![1], vec![2]).genus(), 2);
    }

    #[test]
    fn enumeration_1_1() {
        let all = enumerate_stable_graphs(1, 1).unwrap();
        assert_eq!(all.len(), 2);
        let mut auts: Vec<u64> = all.iter().map(|(_, a)| *a).collect();
        auts.sort_unstable();
        assert_eq!(auts, [1, 2]);
        assert!(all.iter().all(|(g, _)| !g.is_separating()));
        let looped = all.iter().find(|(g, _)| g.loop_count(0) == 1).unwrap();
        assert_eq!(looped.0.genus_of(0), 0);
        assert_eq!(looped.1, 2);
    }

    #[test]
    fn enumeration_genus0() {
        let three = enumerate_stable_graphs(0, 3).unwrap();
        assert_eq!(three.len(), 1);
        assert_eq!(three[0].1, 1);
        assert_eq!(three[0].0.vertex_count(), 1);

        let four = enumerate_stable_graphs(0, 4).unwrap();
        assert_eq!(four.len(), 4);
        assert_eq!(four.iter().filter(|(g, _)| g.is_separating()).count(), 3);
        assert!(four.iter().all(|(_, aut)| *aut == 1));
    }

    #[test]
    fn enumeration_1_2() {
        let all = enumerate_stable_graphs(1, 2).unwrap();
        assert_eq!(all.len(), 5);
        assert_eq!(all.iter().filter(|(g, _)| g.is_separating()).count(), 3);
    }

    #[test]
    fn enumeration_2_0_matches_hand_count() {
        let all = enumerate_stable_graphs(2, 0).unwrap();
        assert_eq!(all.len(), 7);
        let mut auts: Vec<u64> = all.iter().map(|(_, a)| *a).collect();
        auts.sort_unstable();
        assert_eq!(auts, [1, 2, 2, 2, 8, 8, 12]);
        assert_eq!(all.iter().filter(|(g, _)| g.is_separating()).count(), 4);
    }

    #[test]
    fn loop_swaps_and_permutations_count() {
        for r in 1..=3u32 {
            let all = enumerate_stable_graphs(r, 1).unwrap();
            let looped = all
                .iter()
                .find(|(g, _)| g.vertex_count() == 1 && g.loop_count(0) == r)
                .unwrap();
            assert_eq!(looped.0.genus_of(0), 0);
            let expected = (1..=r as u64).product::<u64>() << r;
            assert_eq!(looped.1, expected, "r = {r}");
            assert_eq!(aut_order(&looped.0), expected);
        }
    }

    #[test]
    fn aut_matches_exhaustive_half_edge_search() {
        let mut graphs: Vec<StableGraph> =
            enumerate_stable_graphs(1, 1).unwrap().into_iter().map(|(g, _)| g).collect();
        graphs.extend(enumerate_stable_graphs(2, 0).unwrap().into_iter().map(|(g, _)| g));
        for graph in &graphs {
            let (nu, iota, label) = graph.half_edges();
            if nu.len() > 6 {
                continue;
            }
            assert_eq!(aut_order(graph), exhaustive_aut(graph, &nu, &iota, &label));
        }
    }

    fn exhaustive_aut(
        graph: &StableGraph,
        nu: &[usize],
        iota: &[usize],
        label: &[Option<u32>],
    ) -> u64 {
        let v = graph.vertex_count();
        let h = nu.len();
        let mut count = 0u64;
        permute(&mut (0..v).collect::<Vec<_>>(), 0, &mut |vp| {
            if (0..v).any(|i| graph.genus_of(vp[i]) != graph.genus_of(i)) {
                return;
            }
            let vp = vp.to_vec();
            permute(&mut (0..h).collect::<Vec<_>>(), 0, &mut |hp| {
                let nu_ok = (0..h).all(|x| nu[hp[x]] == vp[nu[x]]);
                let iota_ok = (0..h).all(|x| iota[hp[x]] == hp[iota[x]]);
                let labels_ok = (0..h).all(|x| label[hp[x]] == label[x]);
                if nu_ok && iota_ok && labels_ok {
                    count += 1;
                }
            });
        });
        count
    }

    fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, f);
            items.swap(k, i);
        }
    }

    #[test]
    fn aut_divides_vertex_and_half_edge_factorials() {
        for (graph, aut) in enumerate_stable_graphs(2, 2).unwrap() {
            let v = graph.vertex_count() as u128;
            let h = graph.half_edges().0.len() as u128;
            let vfact: u128 = (1..=v).product();
            let hfact: u128 = (1..=h).product();
            assert_eq!((vfact * hfact) % aut as u128, 0);
        }
    }

    #[test]
    fn size_guard() {
        assert_eq!(
            enumerate_stable_graphs(6, 1),
            Err(StableGraphError::SizeGuard { genus: 6, leaves: 1 })
        );
        assert_eq!(
            enumerate_stable_graphs(1, 6),
            Err(StableGraphError::SizeGuard { genus: 1, leaves: 6 })
        );
    }

    #[test]
    fn composition_sum_examples() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let two_thirds = BigRational::new(BigInt::from(2), BigInt::from(3));
        assert_eq!(lemma_k_sum(2, 2), half);
        assert_eq!(lemma_k_sum(3, 2), two_thirds);
        assert_eq!(lemma_k_sum(4, 2), two_thirds);
    }

    #[test]
    fn composition_sum_bound_small_range() {
        for n in 2..=12u32 {
            let bound = BigRational::new(BigInt::from(4), BigInt::from(n));
            for k in 2..=n {
                assert!(lemma_k_sum(n, k) <= bound, "F({n}, {k}) > 4/{n}");
            }
        }
    }

    #[test]
    fn separating_inequality_hand_instance() {
        // two torus vertices joined by a bridge, one leaf each: type (2, 2)
        let graph = bridge(1, 1, vec![1], vec![2]);
        let (lhs, rhs, holds) = lemma_kk_check(&graph).unwrap();
        assert_relative_eq!(lhs.as_f64(), 10.0 / 231.0, max_relative = 1e-12);
        assert_relative_eq!(rhs.as_f64(), 2.0 / 3.0, max_relative = 1e-14);
        assert!(holds);
    }

    #[test]
    fn separating_inequality_tree_exponent() {
        // trees get a single factor of 4 in the right side
        let graph = bridge(1, 1, vec![1], vec![]);
        let (_, rhs, holds) = lemma_kk_check(&graph).unwrap();
        assert_relative_eq!(rhs.as_f64(), 4.0 / 3.0, max_relative = 1e-14);
        assert!(holds);
        assert_eq!(
            lemma_kk_check(&single_vertex(0, 1, 1)),
            Err(StableGraphError::NotSeparating)
        );
    }

    #[test]
    fn expected_multicurve_bound_reduces_on_bridges() {
        let graph = bridge(1, 1, vec![1], vec![]);
        let c = 1.7;
        let expected = (2f64).sqrt() * (c / 2.0) * (2.0 * 1.0) / 6.0;
        assert_relative_eq!(
            emleq_bound(&graph, c).unwrap().as_f64(),
            expected,
            max_relative = 1e-12
        );
        assert_eq!(
            emleq_bound(&single_vertex(0, 1, 1), 1.0),
            Err(StableGraphError::NotSeparating)
        );
    }

    #[test]
    fn bound_constant_doubling_scales_by_edge_power() {
        let graphs = enumerate_stable_graphs(2, 1).unwrap();
        for (graph, _) in graphs.iter().filter(|(g, _)| g.is_separating()) {
            let base = emleq_bound(graph, 0.9).unwrap();
            let doubled = emleq_bound(graph, 1.8).unwrap();
            let factor = 2f64.powi(graph.edge_count() as i32);
            assert_relative_eq!(
                (doubled / base).as_f64(),
                factor,
                max_relative = 1e-13
            );
        }
    }
}
