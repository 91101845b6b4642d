//! Dense simple graphs with bit-packed adjacency rows.
//!
//! Two-star and triangle counts are maintained incrementally: flipping the
//! pair `(i, j)` changes the two-star count by `deg(i) + deg(j)` and the
//! triangle count by `|N(i) ∩ N(j)|`, the latter being one AND + popcount per
//! 64-vertex word.
//!
//! Homomorphisms are injective (a map from `V(H)` into `V(G)` that is
//! one-to-one and sends edges to edges), so `hom(edge, G) = 2E` and
//! `hom(triangle, G) = 6T`.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{ErgmParams, PatternKind, SubgraphSpec, MAX_PATTERN_VERTICES};
use crate::{math, Error, Result};

/// Largest `n` the dense representation is intended for.
pub const MAX_VERTICES: usize = 4096;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DenseGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    degrees: Vec<u32>,
}

impl core::fmt::Debug for DenseGraph {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DenseGraph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl DenseGraph {
    /// Empty graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        DenseGraph {
            n,
            words,
            rows: vec![0; n * words],
            degrees: vec![0; n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = DenseGraph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    /// Builds a graph from an edge list. Duplicate pairs are rejected, as are
    /// loops and out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = DenseGraph::new(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(alloc::format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidArgument(alloc::format!("self-loop at {u}")));
            }
            if !g.add_edge(u, v) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "duplicate edge ({u}, {v})"
                )));
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of unordered vertex pairs, `n(n-1)/2`.
    #[inline]
    pub fn pair_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).sum::<usize>() / 2
    }

    /// `|N(i) ∩ N(j)|`.
    #[inline]
    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.row(i), self.row(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// Present edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    /// Inserts `(i, j)`; returns `false` if it was already present.
    pub fn add_edge(&mut self, i: usize, j: usize) -> bool {
        debug_assert!(i != j && i < self.n && j < self.n);
        if self.has_edge(i, j) {
            return false;
        }
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
        self.rows[j * self.words + i / 64] |= 1 << (i % 64);
        self.degrees[i] += 1;
        self.degrees[j] += 1;
        true
    }

    /// Deletes `(i, j)`; returns `false` if it was absent.
    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        debug_assert!(i != j && i < self.n && j < self.n);
        if !self.has_edge(i, j) {
            return false;
        }
        self.rows[i * self.words + j / 64] &= !(1 << (j % 64));
        self.rows[j * self.words + i / 64] &= !(1 << (i % 64));
        self.degrees[i] -= 1;
        self.degrees[j] -= 1;
        true
    }
}

/// Edge, two-star and triangle counts of a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RunningCounts {
    pub edges: u64,
    pub two_stars: u64,
    pub triangles: u64,
}

/// Counts from scratch: `E = Σ deg / 2`, `V = Σ C(deg, 2)` and `T` from
/// common neighbourhoods of the present edges.
pub fn count_statistics(g: &DenseGraph) -> RunningCounts {
    let mut edges = 0u64;
    let mut two_stars = 0u64;
    for &d in g.degrees() {
        let d = d as u64;
        edges += d;
        two_stars += d * d.saturating_sub(1) / 2;
    }
    let mut triangle_corners = 0u64;
    for (i, j) in g.edges() {
        triangle_corners += g.common_neighbors(i, j) as u64;
    }
    RunningCounts {
        edges: edges / 2,
        two_stars,
        triangles: triangle_corners / 3,
    }
}

/// Toggles the pair `(i, j)` and updates `counts` in O(n / 64).
///
/// Returns whether the edge is present after the flip.
pub fn flip_edge(g: &mut DenseGraph, counts: &mut RunningCounts, i: usize, j: usize) -> bool {
    debug_assert!(i != j);
    if g.has_edge(i, j) {
        g.remove_edge(i, j);
        counts.edges -= 1;
        counts.two_stars -= (g.degree(i) + g.degree(j)) as u64;
        counts.triangles -= g.common_neighbors(i, j) as u64;
        false
    } else {
        counts.edges += 1;
        counts.two_stars += (g.degree(i) + g.degree(j)) as u64;
        counts.triangles += g.common_neighbors(i, j) as u64;
        g.add_edge(i, j);
        true
    }
}

/// Number of injective edge-preserving maps `V(H) → V(G)`.
pub fn hom_count(h: &SubgraphSpec, g: &DenseGraph) -> u64 {
    match h.kind() {
        PatternKind::Edge => 2 * g.edge_count() as u64,
        PatternKind::TwoStar => 2 * count_statistics(g).two_stars,
        PatternKind::Triangle => 6 * count_statistics(g).triangles,
        PatternKind::General => hom_count_by_search(h, g),
    }
}

/// Number of injective maps that send some edge of `H` onto the pair
/// `(i, j)` and every other edge of `H` onto an edge of `G`. The value does
/// not depend on whether `(i, j)` itself is present.
pub fn hom_count_rooted(h: &SubgraphSpec, g: &DenseGraph, i: usize, j: usize) -> u64 {
    debug_assert!(i != j);
    match h.kind() {
        PatternKind::Edge => 2,
        PatternKind::TwoStar => {
            let y = g.has_edge(i, j) as usize;
            2 * (g.degree(i) - y + g.degree(j) - y) as u64
        }
        PatternKind::Triangle => 6 * g.common_neighbors(i, j) as u64,
        PatternKind::General => hom_count_rooted_by_search(h, g, i, j),
    }
}

/// Backtracking count of injective homomorphisms. Used for patterns without a
/// closed form and as the reference for the closed forms.
pub fn hom_count_by_search(h: &SubgraphSpec, g: &DenseGraph) -> u64 {
    if h.vertex_count() > g.n() {
        return 0;
    }
    let mut search = Search::new(h, g, None);
    search.extend(0)
}

/// Backtracking version of [`hom_count_rooted`].
pub fn hom_count_rooted_by_search(h: &SubgraphSpec, g: &DenseGraph, i: usize, j: usize) -> u64 {
    if h.vertex_count() > g.n() {
        return 0;
    }
    let mut total = 0;
    for &(a, b) in h.edges() {
        for (x, y) in [(i, j), (j, i)] {
            let mut search = Search::new(h, g, Some((a, b)));
            search.image[0] = x;
            search.image[1] = y;
            total += search.extend(2);
        }
    }
    total
}

/// `∂_e H(y) = Σ_l β_l n^{2 - v_l} hom(H_l, y, e)`: the change in the ERGM
/// exponent when the pair `e = (i, j)` is switched on.
pub fn partial_hamiltonian(params: &ErgmParams, g: &DenseGraph, i: usize, j: usize) -> f64 {
    let n = g.n() as f64;
    params
        .terms()
        .iter()
        .map(|term| {
            let scale = math::powi(n, 2 - term.graph.vertex_count() as i32);
            term.beta * scale * hom_count_rooted(&term.graph, g, i, j) as f64
        })
        .sum()
}

/// The ERGM exponent `n² Σ β_l t(H_l, G) = Σ β_l n^{2 - v_l} hom(H_l, G)`.
pub fn hamiltonian(params: &ErgmParams, g: &DenseGraph) -> f64 {
    let counts = count_statistics(g);
    hamiltonian_with_counts(params, g, &counts)
}

/// Same as [`hamiltonian`] but reuses already maintained counts for the
/// edge, two-star and triangle terms.
pub fn hamiltonian_with_counts(params: &ErgmParams, g: &DenseGraph, counts: &RunningCounts) -> f64 {
    let n = g.n() as f64;
    params
        .terms()
        .iter()
        .map(|term| {
            let hom = match term.graph.kind() {
                PatternKind::Edge => 2 * counts.edges,
                PatternKind::TwoStar => 2 * counts.two_stars,
                PatternKind::Triangle => 6 * counts.triangles,
                PatternKind::General => hom_count_by_search(&term.graph, g),
            };
            term.beta * math::powi(n, 2 - term.graph.vertex_count() as i32) * hom as f64
        })
        .sum()
}

/// Number of vertex permutations of a pattern mapping its edge set onto
/// itself. Brute force over all `v!` permutations, so `v ≤ 8`.
pub fn automorphism_count(vertex_count: usize, edges: &[(usize, usize)]) -> Result<u64> {
    if vertex_count > MAX_PATTERN_VERTICES {
        return Err(Error::UnsupportedSize {
            what: "pattern vertex count",
            size: vertex_count,
            max: MAX_PATTERN_VERTICES,
        });
    }
    let mut adj = [0u16; MAX_PATTERN_VERTICES];
    for &(u, v) in edges {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let mut perm: Vec<usize> = (0..vertex_count).collect();
    let mut count = 0;
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; vertex_count];
    let preserves = |perm: &[usize]| {
        edges.iter().all(|&(u, v)| adj[perm[u]] >> perm[v] & 1 == 1)
    };
    if preserves(&perm) {
        count += 1;
    }
    let mut k = 0;
    while k < vertex_count {
        if c[k] < k {
            if k % 2 == 0 {
                perm.swap(0, k);
            } else {
                perm.swap(c[k], k);
            }
            if preserves(&perm) {
                count += 1;
            }
            c[k] += 1;
            k = 0;
        } else {
            c[k] = 0;
            k += 1;
        }
    }
    Ok(count)
}

/// Backtracking state: pattern vertices are placed in a fixed order where,
/// within each connected component, every vertex after the first has an
/// earlier neighbour, so candidates come from a neighbour's adjacency row.
struct Search<'a> {
    g: &'a DenseGraph,
    len: usize,
    /// `earlier[k]`: bitmask of positions `< k` adjacent to position `k`.
    earlier: [u16; MAX_PATTERN_VERTICES],
    min_degree: [usize; MAX_PATTERN_VERTICES],
    image: [usize; MAX_PATTERN_VERTICES],
}

impl<'a> Search<'a> {
    fn new(h: &SubgraphSpec, g: &'a DenseGraph, pinned: Option<(usize, usize)>) -> Self {
        let v = h.vertex_count();
        let mut adj = [0u16; MAX_PATTERN_VERTICES];
        for &(a, b) in h.edges() {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }

        let mut order = [0usize; MAX_PATTERN_VERTICES];
        let mut placed = 0u16;
        let mut len = 0;
        macro_rules! place {
            ($x:expr) => {{
                let x = $x;
                order[len] = x;
                placed |= 1 << x;
                len += 1;
            }};
        }
        if let Some((a, b)) = pinned {
            place!(a);
            place!(b);
        }
        // Breadth-first completion, restarting at the lowest unplaced vertex
        // for each new component.
        let mut head = 0;
        loop {
            while head < len {
                let x = order[head];
                head += 1;
                for y in 0..v {
                    if adj[x] >> y & 1 == 1 && placed >> y & 1 == 0 {
                        place!(y);
                    }
                }
            }
            match (0..v).find(|&y| placed >> y & 1 == 0) {
                Some(y) => place!(y),
                None => break,
            }
        }

        let mut earlier = [0u16; MAX_PATTERN_VERTICES];
        let mut min_degree = [0usize; MAX_PATTERN_VERTICES];
        for k in 0..v {
            let x = order[k];
            min_degree[k] = adj[x].count_ones() as usize;
            for (m, &y) in order.iter().enumerate().take(k) {
                if adj[x] >> y & 1 == 1 {
                    earlier[k] |= 1 << m;
                }
            }
        }
        Search {
            g,
            len: v,
            earlier,
            min_degree,
            image: [0; MAX_PATTERN_VERTICES],
        }
    }

    fn admissible(&self, k: usize, x: usize) -> bool {
        if self.g.degree(x) < self.min_degree[k] {
            return false;
        }
        for m in 0..k {
            let y = self.image[m];
            if y == x {
                return false;
            }
            if self.earlier[k] >> m & 1 == 1 && !self.g.has_edge(y, x) {
                return false;
            }
        }
        true
    }

    fn extend(&mut self, k: usize) -> u64 {
        if k == self.len {
            return 1;
        }
        let mut total = 0;
        if self.earlier[k] != 0 {
            let anchor = self.image[self.earlier[k].trailing_zeros() as usize];
            let row = self.g.row(anchor);
            for (w, &word) in row.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let x = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if self.admissible(k, x) {
                        self.image[k] = x;
                        total += self.extend(k + 1);
                    }
                }
            }
        } else {
            for x in 0..self.g.n() {
                if self.admissible(k, x) {
                    self.image[k] = x;
                    total += self.extend(k + 1);
                }
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SubgraphSpec;
    use proptest::prelude::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};
    use std::vec::Vec;

    fn path3() -> DenseGraph {
        DenseGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> DenseGraph {
        let mut rng = SmallRng::seed_from_u64(seed);
        let mut g = DenseGraph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Exhaustive triple enumeration.
    fn brute_counts(g: &DenseGraph) -> RunningCounts {
        let n = g.n();
        let mut c = RunningCounts::default();
        for i in 0..n {
            for j in (i + 1)..n {
                c.edges += g.has_edge(i, j) as u64;
                for k in (j + 1)..n {
                    let (a, b, d) = (g.has_edge(i, j), g.has_edge(j, k), g.has_edge(i, k));
                    c.two_stars += (a && b) as u64 + (b && d) as u64 + (a && d) as u64;
                    c.triangles += (a && b && d) as u64;
                }
            }
        }
        c
    }

    /// Enumerates all injective maps `V(H) → V(G)` explicitly.
    fn brute_hom(h: &SubgraphSpec, g: &DenseGraph, pinned: Option<(usize, usize)>) -> u64 {
        fn rec(
            h: &SubgraphSpec,
            g: &DenseGraph,
            pinned: Option<(usize, usize)>,
            map: &mut Vec<usize>,
        ) -> u64 {
            if map.len() == h.vertex_count() {
                let mut hits_pinned = 0;
                for &(a, b) in h.edges() {
                    let (x, y) = (map[a], map[b]);
                    let on_pin = pinned.is_some_and(|(i, j)| (x, y) == (i, j) || (x, y) == (j, i));
                    if on_pin {
                        hits_pinned += 1;
                    } else if !g.has_edge(x, y) {
                        return 0;
                    }
                }
                return match pinned {
                    Some(_) => (hits_pinned > 0) as u64,
                    None => 1,
                };
            }
            let mut total = 0;
            for x in 0..g.n() {
                if !map.contains(&x) {
                    map.push(x);
                    total += rec(h, g, pinned, map);
                    map.pop();
                }
            }
            total
        }
        rec(h, g, pinned, &mut Vec::new())
    }

    fn patterns() -> Vec<SubgraphSpec> {
        [
            &[(0, 1)][..],
            &[(0, 1), (1, 2)],
            &[(0, 1), (1, 2), (0, 2)],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
            &[(0, 1), (1, 2), (0, 2), (2, 3)],
            &[(0, 1), (2, 3)],
            &[(0, 1), (0, 2), (0, 3)],
        ]
        .iter()
        .map(|e| SubgraphSpec::new(e).unwrap())
        .collect()
    }

    #[test]
    fn counts_of_small_graphs() {
        let k3 = DenseGraph::complete(3);
        let c = count_statistics(&k3);
        assert_eq!((c.edges, c.two_stars, c.triangles), (3, 3, 1));
        assert_eq!(count_statistics(&DenseGraph::new(10)), RunningCounts::default());
        let c = count_statistics(&path3());
        assert_eq!((c.edges, c.two_stars, c.triangles), (2, 1, 0));
    }

    #[test]
    fn counts_match_triple_enumeration() {
        for seed in 0..20 {
            let g = random_graph(7, 0.5, seed);
            assert_eq!(count_statistics(&g), brute_counts(&g));
        }
    }

    #[test]
    fn hom_counts_of_named_patterns() {
        let edge = SubgraphSpec::edge();
        let triangle = SubgraphSpec::triangle();
        let two_star = SubgraphSpec::two_star();
        let g = random_graph(9, 0.4, 3);
        assert_eq!(hom_count(&edge, &g), 2 * g.edge_count() as u64);
        assert_eq!(hom_count(&triangle, &DenseGraph::complete(3)), 6);
        assert_eq!(hom_count(&two_star, &path3()), 2);
    }

    #[test]
    fn search_matches_explicit_enumeration() {
        for seed in 0..6 {
            let g = random_graph(6, 0.55, 100 + seed);
            for h in patterns() {
                assert_eq!(hom_count_by_search(&h, &g), brute_hom(&h, &g, None));
                assert_eq!(hom_count(&h, &g), brute_hom(&h, &g, None), "closed form");
            }
        }
    }

    #[test]
    fn rooted_search_matches_explicit_enumeration() {
        for seed in 0..4 {
            let g = random_graph(6, 0.5, 200 + seed);
            for h in patterns() {
                for i in 0..6 {
                    for j in (i + 1)..6 {
                        let want = brute_hom(&h, &g, Some((i, j)));
                        assert_eq!(hom_count_rooted_by_search(&h, &g, i, j), want);
                        assert_eq!(hom_count_rooted(&h, &g, i, j), want, "closed form");
                    }
                }
            }
        }
    }

    #[test]
    fn rooted_edge_is_always_two() {
        let g = random_graph(8, 0.3, 9);
        for (i, j) in [(0, 1), (2, 7), (5, 6)] {
            assert_eq!(hom_count_rooted(&SubgraphSpec::edge(), &g, i, j), 2);
        }
    }

    #[test]
    fn rooted_count_vanishes_on_empty_graph() {
        let g = DenseGraph::new(6);
        for h in patterns().into_iter().filter(|h| h.edge_count() >= 2) {
            assert_eq!(hom_count_rooted(&h, &g, 1, 4), 0);
        }
    }

    #[test]
    fn rooted_two_star_on_path() {
        // path 0-1-2 with the pair pinned at (0, 1)
        let g = path3();
        let h = SubgraphSpec::two_star();
        assert_eq!(hom_count_rooted(&h, &g, 0, 1), brute_hom(&h, &g, Some((0, 1))));
        assert_eq!(hom_count_rooted(&h, &g, 0, 1), 2);
    }

    #[test]
    fn rooted_counts_sum_to_edge_count_times_hom() {
        // Each injective map is counted once per pattern edge it sends onto a
        // present edge.
        for seed in 0..4 {
            let g = random_graph(6, 0.6, 300 + seed);
            for h in patterns() {
                let total: u64 = g.edges().map(|(i, j)| hom_count_rooted(&h, &g, i, j)).sum();
                assert_eq!(total, h.edge_count() as u64 * hom_count(&h, &g));
            }
        }
    }

    #[test]
    fn hom_is_automorphisms_times_copies() {
        // Copy enumeration: distinct edge images of injective maps.
        for seed in 0..3 {
            let g = random_graph(6, 0.6, 400 + seed);
            for h in patterns() {
                let mut copies = std::collections::BTreeSet::new();
                let v = h.vertex_count();
                let mut map = Vec::new();
                fn rec(
                    h: &SubgraphSpec,
                    g: &DenseGraph,
                    v: usize,
                    map: &mut Vec<usize>,
                    copies: &mut std::collections::BTreeSet<Vec<(usize, usize)>>,
                ) {
                    if map.len() == v {
                        let mut img: Vec<_> = h
                            .edges()
                            .iter()
                            .map(|&(a, b)| (map[a].min(map[b]), map[a].max(map[b])))
                            .collect();
                        if img.iter().all(|&(x, y)| g.has_edge(x, y)) {
                            img.sort();
                            copies.insert(img);
                        }
                        return;
                    }
                    for x in 0..g.n() {
                        if !map.contains(&x) {
                            map.push(x);
                            rec(h, g, v, map, copies);
                            map.pop();
                        }
                    }
                }
                rec(&h, &g, v, &mut map, &mut copies);
                assert_eq!(hom_count(&h, &g), h.automorphisms() * copies.len() as u64);
            }
        }
    }

    #[test]
    fn flip_examples() {
        let mut g = DenseGraph::new(4);
        let mut c = RunningCounts::default();
        assert!(flip_edge(&mut g, &mut c, 1, 2));
        assert_eq!((c.edges, c.two_stars, c.triangles), (1, 0, 0));

        // closing the path 1-2-3 into a triangle
        let mut g = DenseGraph::from_edges(4, [(1, 2), (2, 3)]).unwrap();
        let mut c = count_statistics(&g);
        flip_edge(&mut g, &mut c, 1, 3);
        assert_eq!((c.edges, c.two_stars, c.triangles), (3, 3, 1));
    }

    #[test]
    fn long_random_flip_sequence_matches_recount() {
        let mut rng = SmallRng::seed_from_u64(17);
        let n = 30;
        let mut g = DenseGraph::new(n);
        let mut c = RunningCounts::default();
        for step in 0..100_000 {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            flip_edge(&mut g, &mut c, i, j);
            if step % 10_000 == 0 {
                assert_eq!(c, count_statistics(&g));
            }
        }
        assert_eq!(c, count_statistics(&g));
    }

    #[test]
    fn automorphisms_of_small_patterns() {
        assert_eq!(automorphism_count(2, &[(0, 1)]).unwrap(), 2);
        assert_eq!(automorphism_count(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), 6);
        assert_eq!(automorphism_count(3, &[(0, 1), (1, 2)]).unwrap(), 2);
        assert_eq!(automorphism_count(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap(), 8);
        let k4: Vec<_> = (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j))).collect();
        assert_eq!(automorphism_count(4, &k4).unwrap(), 24);
        assert!(matches!(
            automorphism_count(9, &[(0, 1)]),
            Err(Error::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn partial_hamiltonian_edge_only_and_zero() {
        let g = random_graph(6, 0.5, 1);
        let edge_only = ErgmParams::edge_only(6, 0.37).unwrap();
        let zero = ErgmParams::new(6, vec![(0.0, SubgraphSpec::edge()), (0.0, SubgraphSpec::triangle())])
            .unwrap();
        for (i, j) in [(0, 1), (2, 5)] {
            assert!((partial_hamiltonian(&edge_only, &g, i, j) - 0.74).abs() < 1e-15);
            assert_eq!(partial_hamiltonian(&zero, &g, i, j), 0.0);
        }
    }

    #[test]
    fn partial_hamiltonian_is_energy_difference() {
        let params = ErgmParams::new(
            6,
            vec![(-0.3, SubgraphSpec::edge()), (0.4, SubgraphSpec::triangle())],
        )
        .unwrap();
        for seed in 0..5 {
            let g = random_graph(6, 0.5, 500 + seed);
            for i in 0..6 {
                for j in (i + 1)..6 {
                    let pinned = brute_hom(&SubgraphSpec::triangle(), &g, Some((i, j))) as f64;
                    let want = 2.0 * -0.3 + 0.4 / 6.0 * pinned;
                    let got = partial_hamiltonian(&params, &g, i, j);
                    assert!((got - want).abs() < 1e-12);

                    let mut plus = g.clone();
                    plus.add_edge(i, j);
                    let mut minus = g.clone();
                    minus.remove_edge(i, j);
                    let diff = hamiltonian(&params, &plus) - hamiltonian(&params, &minus);
                    assert!((got - diff).abs() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn flips_keep_counts_exact(seed in any::<u64>(), n in 3usize..70, steps in 1usize..400) {
            let mut rng = SmallRng::seed_from_u64(seed);
            let mut g = random_graph(n, 0.4, seed ^ 0xabc);
            let mut c = count_statistics(&g);
            for _ in 0..steps {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i { j += 1; }
                flip_edge(&mut g, &mut c, i, j);
            }
            prop_assert_eq!(c, count_statistics(&g));
        }

        #[test]
        fn flip_is_an_involution(seed in any::<u64>(), n in 3usize..40, a in 0usize..1000, b in 0usize..1000) {
            let g0 = random_graph(n, 0.5, seed);
            let c0 = count_statistics(&g0);
            let i = a % n;
            let j = (i + 1 + b % (n - 1)) % n;
            let (mut g, mut c) = (g0.clone(), c0);
            flip_edge(&mut g, &mut c, i, j);
            flip_edge(&mut g, &mut c, i, j);
            prop_assert_eq!(g, g0);
            prop_assert_eq!(c, c0);
        }

        #[test]
        fn named_hom_identities(seed in any::<u64>(), n in 3usize..30, p in 0.0f64..1.0) {
            let g = random_graph(n, p, seed);
            let c = count_statistics(&g);
            prop_assert_eq!(hom_count(&SubgraphSpec::edge(), &g), 2 * c.edges);
            prop_assert_eq!(hom_count(&SubgraphSpec::triangle(), &g), 6 * c.triangles);
            prop_assert_eq!(hom_count_by_search(&SubgraphSpec::triangle(), &g), 6 * c.triangles);
        }
    }
}
