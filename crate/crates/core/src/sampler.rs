//! Uniform sampling of trivalent one-faced metric ribbon graphs: Rémy tree
//! growth, three-by-three leaf merging oriented along the face tour, and
//! Dirichlet edge lengths with prescribed boundary total.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::halfedge::HalfEdgeStructure;
use crate::scalar::Scalar;
use crate::MetricMap;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("repeated degenerate exponential draws")]
    DegenerateDraw,
}

/// Planted plane trivalent tree produced by the growth loop. Leaves are
/// listed as half-edge ids at 1-valent vertices, ascending.
#[derive(Debug, Clone)]
pub struct PlantedTree {
    structure: HalfEdgeStructure,
    leaves: Vec<usize>,
}

impl PlantedTree {
    pub fn structure(&self) -> &HalfEdgeStructure {
        &self.structure
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }
}

/// Parameters for one sampling trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub genus: u32,
    /// Total boundary length L; the face of every sample has this length.
    pub boundary_total: f64,
    pub seed: u64,
    pub trial_index: u64,
}

impl SamplerConfig {
    /// Config with the default boundary total L = 12 g.
    pub fn new(genus: u32, seed: u64) -> Self {
        assert!(genus >= 1, "genus must be at least 1");
        Self { genus, boundary_total: 12.0 * genus as f64, seed, trial_index: 0 }
    }

    pub fn with_boundary_total(mut self, l: f64) -> Self {
        assert!(l > 0.0, "boundary total must be positive");
        self.boundary_total = l;
        self
    }

    pub fn with_trial(mut self, trial_index: u64) -> Self {
        self.trial_index = trial_index;
        self
    }

    /// Independent random stream for this (seed, trial) pair.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// One sample; `rejections` counts resampled gluings and is always zero for
/// the tour-aligned merge, kept so trial logs have a stable schema.
#[derive(Debug, Clone)]
pub struct MapSample<F: Scalar> {
    pub map: MetricMap<F>,
    pub rejections: u64,
}

/// Unbiased uniform draw from 0..n by masked rejection.
fn uniform_usize(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n >= 1);
    let mask = (n as u64).next_power_of_two() - 1;
    loop {
        let v = rng.next_u64() & mask;
        if (v as usize) < n {
            return v as usize;
        }
    }
}

/// Uniform draw from (0, 1] at full 53-bit resolution.
fn uniform_open_closed(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn shuffle(rng: &mut impl RngCore, items: &mut [usize]) {
    for i in (1..items.len()).rev() {
        items.swap(i, uniform_usize(rng, i + 1));
    }
}

/// Grows a uniform planted plane trivalent tree with 6g-3 edges and 3g
/// leaves (the planted root end counts as a leaf).
///
/// Starts from a single edge whose two endpoints are leaves. Each step picks
/// an edge uniformly, subdivides it with a new trivalent vertex, and hangs a
/// fresh leaf there, on the side given by a fair coin.
pub fn remy_grow(genus: u32, rng: &mut impl RngCore) -> PlantedTree {
    assert!(genus >= 1, "genus must be at least 1");
    let steps = 3 * genus as usize - 2;
    let final_half = 12 * genus as usize - 6;

    let mut sigma: Vec<usize> = Vec::with_capacity(final_half);
    let mut alpha: Vec<usize> = Vec::with_capacity(final_half);
    // single starting edge; both endpoints 1-valent, so sigma fixes them
    sigma.extend([0, 1]);
    alpha.extend([1, 0]);

    for k in 0..steps {
        // picking a half-edge uniformly picks its edge uniformly
        let a = uniform_usize(rng, sigma.len());
        let b = alpha[a];
        let base = sigma.len();
        let (c1, c2, c3, d) = (base, base + 1, base + 2, base + 3);

        alpha[a] = c1;
        alpha[b] = c2;
        alpha.extend([a, b, d, c3]);

        // rotation at the new mid vertex: leaf to one side or the other
        if uniform_usize(rng, 2) == 0 {
            sigma.extend([c2, c3, c1, d]);
        } else {
            sigma.extend([c3, c1, c2, d]);
        }

        assert_eq!(sigma.len() / 2, 1 + 2 * (k + 1), "each step must add two edges");
    }

    let leaves: Vec<usize> = (0..sigma.len()).filter(|&h| sigma[h] == h).collect();
    debug_assert_eq!(leaves.len(), 3 * genus as usize);

    let structure = HalfEdgeStructure::build(sigma, alpha)
        .expect("growth always yields a valid connected structure");
    debug_assert_eq!(structure.face_count(), 1);
    debug_assert_eq!(structure.genus(), Ok(0));
    PlantedTree { structure, leaves }
}

/// Merges the tree's leaves three-by-three into trivalent vertices.
///
/// The leaves are split into triples uniformly at random and merged one
/// triple at a time. Each new vertex gets the rotation that sends every
/// half-edge of the triple to the next triple member along the current face
/// tour; that choice keeps the map one-faced at every step (the opposite
/// rotation always splits the face in three), so no gluing is ever rejected
/// and each merge raises the genus by one.
pub fn merge_leaves(tree: &PlantedTree, rng: &mut impl RngCore) -> HalfEdgeStructure {
    let leaves = tree.leaves();
    assert!(leaves.len() % 3 == 0, "leaf count must be divisible by 3");
    let alpha = tree.structure().alpha();
    let genus = leaves.len() / 3;

    let mut sigma = tree.structure().sigma().to_vec();
    let mut order = leaves.to_vec();
    shuffle(rng, &mut order);
    for triple in order.chunks_exact(3) {
        let (p, q, r) = (triple[0], triple[1], triple[2]);
        // walk the face tour from p; the first triple member it meets is the
        // successor of p in the new rotation
        let mut h = sigma[alpha[p]];
        while h != q && h != r {
            h = sigma[alpha[h]];
        }
        let (first, second) = if h == q { (q, r) } else { (r, q) };
        sigma[p] = first;
        sigma[first] = second;
        sigma[second] = p;
    }

    let merged =
        HalfEdgeStructure::build(sigma, alpha.to_vec()).expect("merged permutations stay valid");
    assert!(merged.is_trivalent());
    assert_eq!(merged.edge_count(), 6 * genus - 3);
    assert_eq!(merged.vertex_count(), 4 * genus - 2);
    assert_eq!(merged.face_count(), 1);
    assert_eq!(merged.genus(), Ok(genus));
    merged
}

/// Endows the graph with edge lengths (L/2) e_i / sum(e), where the e_i are
/// iid standard exponentials drawn by inverse CDF; the scaled lengths
/// (2 l_i / L) are then Dirichlet(1,...,1) and the single face has length L.
pub fn sample_metric<F: Scalar>(
    graph: HalfEdgeStructure,
    boundary_total: F,
    rng: &mut impl RngCore,
) -> Result<MetricMap<F>, SampleError> {
    assert!(boundary_total > F::zero());
    let e = graph.edge_count();
    for _ in 0..64 {
        let draws: Vec<f64> = (0..e).map(|_| -uniform_open_closed(rng).ln()).collect();
        let total: f64 = draws.iter().sum();
        if !(total > 0.0 && total.is_finite()) || draws.iter().any(|&x| x <= 0.0) {
            continue;
        }
        let half_l = boundary_total / F::from_f64_exact(2.0);
        let lengths: Vec<F> =
            draws.iter().map(|&x| half_l * F::from_f64_exact(x / total)).collect();
        if lengths.iter().any(|&x| x <= F::zero()) {
            continue;
        }
        return Ok(MetricMap::new(graph, lengths).expect("positive lengths of correct count"));
    }
    Err(SampleError::DegenerateDraw)
}

/// Runs the full pipeline for one trial: grow, merge, endow with lengths.
/// Deterministic in (seed, trial_index) independent of scheduling.
pub fn sample_map(cfg: &SamplerConfig) -> Result<MapSample<f64>, SampleError> {
    let mut rng = cfg.rng();
    let tree = remy_grow(cfg.genus, &mut rng);
    let merged = merge_leaves(&tree, &mut rng);
    let map = sample_metric(merged, cfg.boundary_total, &mut rng)?;
    Ok(MapSample { map, rejections: 0 })
}
