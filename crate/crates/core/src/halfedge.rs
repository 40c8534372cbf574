//! Ribbon graphs encoded as a pair of permutations on half-edges.
//!
//! `sigma` rotates the half-edges counterclockwise around their vertex,
//! `alpha` swaps the two halves of each edge. Vertices are the orbits of
//! `sigma`, edges the orbits of `alpha`, and faces the orbits of the
//! composition `sigma ∘ alpha` (this composition order is fixed; every
//! genus computation downstream depends on it).

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("sigma and alpha must be permutations of the same even-sized, non-empty ground set")]
    InvalidPermutation,
    #[error("alpha must be an involution with no fixed points")]
    NotInvolution,
    #[error("the group generated by sigma and alpha must act transitively on half-edges")]
    Disconnected,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenusError {
    #[error("V - E + F is not of the form 2 - 2g with g a non-negative integer")]
    InvalidEuler,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("expected one length per edge ({expected}), got {got}")]
    LengthCount { expected: usize, got: usize },
    #[error("edge lengths must be strictly positive and finite")]
    NonPositiveLength,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("expected a `sigma:` line followed by an `alpha:` line")]
    MissingLine,
    #[error("half-edge image is not a number: {0}")]
    BadToken(String),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Connected ribbon graph on half-edges `0..2E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfEdgeStructure {
    sigma: Vec<usize>,
    alpha: Vec<usize>,
    edge_index: Vec<usize>,
    vertex_index: Vec<usize>,
    edge_rep: Vec<usize>,
    vertex_count: usize,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

impl HalfEdgeStructure {
    /// Validates the permutation pair and labels vertices and edges.
    ///
    /// Edge and vertex ids are assigned in order of first occurrence in
    /// half-edge order, so equal permutations always produce identical
    /// structures.
    pub fn build(sigma: Vec<usize>, alpha: Vec<usize>) -> Result<Self, BuildError> {
        let n = sigma.len();
        if n == 0 || n % 2 != 0 || alpha.len() != n {
            return Err(BuildError::InvalidPermutation);
        }
        if !is_permutation(&sigma) || !is_permutation(&alpha) {
            return Err(BuildError::InvalidPermutation);
        }
        for h in 0..n {
            if alpha[h] == h || alpha[alpha[h]] != h {
                return Err(BuildError::NotInvolution);
            }
        }

        let mut vertex_index = vec![usize::MAX; n];
        let mut vertex_count = 0;
        for start in 0..n {
            if vertex_index[start] != usize::MAX {
                continue;
            }
            let mut h = start;
            while vertex_index[h] == usize::MAX {
                vertex_index[h] = vertex_count;
                h = sigma[h];
            }
            vertex_count += 1;
        }

        let mut edge_index = vec![usize::MAX; n];
        let mut edge_rep = Vec::with_capacity(n / 2);
        for h in 0..n {
            if edge_index[h] == usize::MAX {
                edge_index[h] = edge_rep.len();
                edge_index[alpha[h]] = edge_rep.len();
                edge_rep.push(h);
            }
        }

        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(h) = stack.pop() {
            for next in [sigma[h], alpha[h]] {
                if !seen[next] {
                    seen[next] = true;
                    reached += 1;
                    stack.push(next);
                }
            }
        }
        if reached != n {
            return Err(BuildError::Disconnected);
        }

        Ok(Self {
            sigma,
            alpha,
            edge_index,
            vertex_index,
            edge_rep,
            vertex_count,
        })
    }

    pub fn half_edge_count(&self) -> usize {
        self.sigma.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_rep.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// Edge id of a half-edge.
    pub fn edge_of(&self, h: usize) -> usize {
        self.edge_index[h]
    }

    /// Vertex id of a half-edge.
    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_index[h]
    }

    /// The two endpoint vertices of an edge (equal for a self-loop).
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let h = self.edge_rep[e];
        (self.vertex_index[h], self.vertex_index[self.alpha[h]])
    }

    /// Face orbits of `sigma ∘ alpha`, each starting at its least half-edge,
    /// listed in order of that least half-edge.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let n = self.sigma.len();
        let mut seen = vec![false; n];
        let mut faces = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut h = start;
            while !seen[h] {
                seen[h] = true;
                orbit.push(h);
                h = self.sigma[self.alpha[h]];
            }
            faces.push(orbit);
        }
        faces
    }

    pub fn face_count(&self) -> usize {
        let n = self.sigma.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut h = start;
            while !seen[h] {
                seen[h] = true;
                h = self.sigma[self.alpha[h]];
            }
        }
        count
    }

    /// Genus from V - E + F = 2 - 2g.
    pub fn genus(&self) -> Result<usize, GenusError> {
        let v = self.vertex_count as i64;
        let e = self.edge_count() as i64;
        let f = self.face_count() as i64;
        let twice = 2 - v + e - f;
        if twice < 0 || twice % 2 != 0 {
            return Err(GenusError::InvalidEuler);
        }
        Ok((twice / 2) as usize)
    }

    /// Valency of each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &v in &self.vertex_index {
            deg[v] += 1;
        }
        deg
    }

    pub fn is_trivalent(&self) -> bool {
        self.degrees().iter().all(|&d| d == 3)
    }

    /// Two-line text form: `sigma: ...` and `alpha: ...`, images listed by
    /// half-edge index.
    pub fn to_text(&self) -> String {
        let join = |p: &[usize]| {
            p.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("sigma: {}\nalpha: {}\n", join(&self.sigma), join(&self.alpha))
    }

    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        let mut lines = text.lines();
        let parse = |line: Option<&str>, prefix: &str| -> Result<Vec<usize>, ParseError> {
            let line = line.ok_or(ParseError::MissingLine)?;
            let rest = line.strip_prefix(prefix).ok_or(ParseError::MissingLine)?;
            rest.split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| ParseError::BadToken(tok.to_string()))
                })
                .collect()
        };
        let sigma = parse(lines.next(), "sigma:")?;
        let alpha = parse(lines.next(), "alpha:")?;
        Ok(Self::build(sigma, alpha)?)
    }
}

/// Ribbon graph with a positive length per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMap<F: Scalar> {
    graph: HalfEdgeStructure,
    lengths: Vec<F>,
}

impl<F: Scalar> MetricMap<F> {
    pub fn new(graph: HalfEdgeStructure, lengths: Vec<F>) -> Result<Self, MetricError> {
        if lengths.len() != graph.edge_count() {
            return Err(MetricError::LengthCount {
                expected: graph.edge_count(),
                got: lengths.len(),
            });
        }
        if lengths.iter().any(|l| !(*l > F::zero()) || !l.is_finite()) {
            return Err(MetricError::NonPositiveLength);
        }
        Ok(Self { graph, lengths })
    }

    pub fn graph(&self) -> &HalfEdgeStructure {
        &self.graph
    }

    pub fn lengths(&self) -> &[F] {
        &self.lengths
    }

    pub fn edge_length(&self, e: usize) -> F {
        self.lengths[e]
    }

    pub fn total_edge_length(&self) -> F {
        self.lengths.iter().fold(F::zero(), |acc, &l| acc + l)
    }

    /// Boundary length of each face: every half-edge on the face contributes
    /// the length of its edge, so an edge traversed twice counts twice.
    pub fn face_lengths(&self) -> Vec<F> {
        self.graph
            .faces()
            .iter()
            .map(|face| {
                face.iter()
                    .fold(F::zero(), |acc, &h| acc + self.lengths[self.graph.edge_of(h)])
            })
            .collect()
    }

    /// Same graph with every length multiplied by `c`.
    pub fn scale_lengths(&self, c: F) -> Result<Self, MetricError> {
        Self::new(
            self.graph.clone(),
            self.lengths.iter().map(|&l| l * c).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta_genus1() -> HalfEdgeStructure {
        // sigma = (0 2 4)(1 3 5), alpha = (0 1)(2 3)(4 5)
        HalfEdgeStructure::build(vec![2, 3, 4, 5, 0, 1], vec![1, 0, 3, 2, 5, 4]).unwrap()
    }

    fn theta_genus0() -> HalfEdgeStructure {
        // sigma = (0 2 4)(1 5 3), alpha = (0 1)(2 3)(4 5)
        HalfEdgeStructure::build(vec![2, 5, 4, 1, 0, 3], vec![1, 0, 3, 2, 5, 4]).unwrap()
    }

    #[test]
    fn theta_genus1_counts_and_face_trace() {
        let g = theta_genus1();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 3);
        let faces = g.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0], vec![0, 3, 4, 1, 2, 5]);
        assert_eq!(g.genus(), Ok(1));
    }

    #[test]
    fn theta_genus0_counts_and_faces() {
        let g = theta_genus0();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 3);
        let faces = g.faces();
        assert_eq!(faces, vec![vec![0, 5], vec![1, 2], vec![3, 4]]);
        assert_eq!(g.genus(), Ok(0));
    }

    #[test]
    fn edge_ids_assigned_in_first_occurrence_order() {
        let g = theta_genus1();
        let ids: Vec<usize> = (0..6).map(|h| g.edge_of(h)).collect();
        assert_eq!(ids, vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn fixed_point_in_alpha_is_rejected() {
        let err = HalfEdgeStructure::build(vec![0, 1], vec![0, 1]).unwrap_err();
        assert_eq!(err, BuildError::NotInvolution);
    }

    #[test]
    fn non_involution_alpha_is_rejected() {
        // alpha = (0 1 2 3) is a 4-cycle, not an involution
        let err =
            HalfEdgeStructure::build(vec![0, 1, 2, 3], vec![1, 2, 3, 0]).unwrap_err();
        assert_eq!(err, BuildError::NotInvolution);
    }

    #[test]
    fn mismatched_or_invalid_permutations_are_rejected() {
        let err = HalfEdgeStructure::build(vec![0, 1], vec![1, 0, 3, 2]).unwrap_err();
        assert_eq!(err, BuildError::InvalidPermutation);
        let err = HalfEdgeStructure::build(vec![1, 1], vec![1, 0]).unwrap_err();
        assert_eq!(err, BuildError::InvalidPermutation);
        let err = HalfEdgeStructure::build(vec![], vec![]).unwrap_err();
        assert_eq!(err, BuildError::InvalidPermutation);
    }

    #[test]
    fn two_disjoint_edges_are_rejected() {
        let err =
            HalfEdgeStructure::build(vec![0, 1, 2, 3], vec![1, 0, 3, 2]).unwrap_err();
        assert_eq!(err, BuildError::Disconnected);
    }

    #[test]
    fn single_edge_tree_has_one_face_of_size_two() {
        let g = HalfEdgeStructure::build(vec![0, 1], vec![1, 0]).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.faces(), vec![vec![0, 1]]);
        assert_eq!(g.genus(), Ok(0));
    }

    #[test]
    fn genus1_theta_single_face_length_is_twice_total() {
        let m = MetricMap::new(theta_genus1(), vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.face_lengths(), vec![12.0]);
    }

    #[test]
    fn genus0_theta_face_lengths() {
        let m = MetricMap::new(theta_genus0(), vec![1.0, 2.0, 3.0]).unwrap();
        let mut lens = m.face_lengths();
        lens.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(lens, vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn metric_validation() {
        let g = theta_genus1();
        assert_eq!(
            MetricMap::new(g.clone(), vec![1.0, 2.0]).unwrap_err(),
            MetricError::LengthCount {
                expected: 3,
                got: 2
            }
        );
        assert_eq!(
            MetricMap::new(g, vec![1.0, 0.0, 2.0]).unwrap_err(),
            MetricError::NonPositiveLength
        );
    }

    #[test]
    fn text_round_trip() {
        let g = theta_genus1();
        let text = g.to_text();
        assert_eq!(text, "sigma: 2 3 4 5 0 1\nalpha: 1 0 3 2 5 4\n");
        let back = HalfEdgeStructure::from_text(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn trivalence_check() {
        assert!(theta_genus1().is_trivalent());
        let tree = HalfEdgeStructure::build(vec![0, 1], vec![1, 0]).unwrap();
        assert!(!tree.is_trivalent());
        assert_eq!(tree.degrees(), vec![1, 1]);
    }

    mod random_structures {
        use super::*;
        use proptest::prelude::*;
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn random_pair(seed: u64, half_edges: usize) -> (Vec<usize>, Vec<usize>) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled: Vec<usize> = (0..half_edges).collect();
            for i in (1..half_edges).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                shuffled.swap(i, j);
            }
            let mut sigma = vec![0; half_edges];
            // sigma from random cycle structure: walk the shuffle in blocks
            let mut idx = 0;
            while idx < half_edges {
                let block = 1 + (rng.next_u64() as usize) % (half_edges - idx);
                for k in 0..block {
                    sigma[shuffled[idx + k]] = shuffled[idx + (k + 1) % block];
                }
                idx += block;
            }
            let mut paired: Vec<usize> = (0..half_edges).collect();
            for i in (1..half_edges).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                paired.swap(i, j);
            }
            let mut alpha = vec![0; half_edges];
            for pair in paired.chunks(2) {
                alpha[pair[0]] = pair[1];
                alpha[pair[1]] = pair[0];
            }
            (sigma, alpha)
        }

        proptest! {
            #[test]
            fn euler_identity_and_face_partition(seed in 0u64..500, e in 1usize..9) {
                let (sigma, alpha) = random_pair(seed, 2 * e);
                if let Ok(g) = HalfEdgeStructure::build(sigma, alpha) {
                    let genus = g.genus().expect("connected maps satisfy Euler parity");
                    let v = g.vertex_count() as i64;
                    let f = g.face_count() as i64;
                    prop_assert_eq!(v - e as i64 + f, 2 - 2 * genus as i64);

                    let faces = g.faces();
                    let mut seen = vec![false; 2 * e];
                    for face in &faces {
                        for &h in face {
                            prop_assert!(!seen[h]);
                            seen[h] = true;
                        }
                    }
                    prop_assert!(seen.into_iter().all(|s| s));
                }
            }

            #[test]
            fn face_lengths_sum_to_twice_total(seed in 0u64..200, e in 1usize..9) {
                let (sigma, alpha) = random_pair(seed, 2 * e);
                if let Ok(g) = HalfEdgeStructure::build(sigma, alpha) {
                    let lengths: Vec<f64> = (0..e).map(|i| 0.25 + i as f64).collect();
                    let m = MetricMap::new(g, lengths).unwrap();
                    let total: f64 = m.face_lengths().iter().sum();
                    let expected = 2.0 * m.total_edge_length();
                    prop_assert!((total - expected).abs() <= 1e-9 * expected);

                    let doubled = m.scale_lengths(2.0).unwrap();
                    let scaled: Vec<f64> = m.face_lengths().iter().map(|x| 2.0 * x).collect();
                    prop_assert_eq!(doubled.face_lengths(), scaled);
                }
            }
        }
    }
}
