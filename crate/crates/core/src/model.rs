//! ERGM parameterizations and mean-field region analysis.
//!
//! For terms `(β_l, H_l)` with `e_l` edges,
//!
//! ```text
//! Φ(a) = Σ_l β_l e_l a^{e_l - 1},      φ(a) = e^{2Φ(a)} / (1 + e^{2Φ(a)})
//! ```
//!
//! The parameters are subcritical when `φ(a) = a` has a unique solution `p`
//! in (0, 1) with `φ'(p) < 1`, and in the Dobrushin region when
//! `Φ'(1) < 2`.

use alloc::format;
use alloc::vec::Vec;

use crate::graph::automorphism_count;
use crate::{math, Error, Result};

/// Patterns are limited by the brute-force automorphism count.
pub const MAX_PATTERN_VERTICES: usize = 8;

/// Grid spacing used to bracket roots of `φ(a) - a` on [0, 1].
pub const ROOT_GRID_STEP: f64 = 1e-4;

/// Half-width of the band around `φ'(p) = 1` reported as indeterminate.
pub const CRITICAL_MARGIN: f64 = 1e-6;

/// Shapes with closed-form counts in the graph module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternKind {
    Edge,
    TwoStar,
    Triangle,
    General,
}

/// A small simple graph `H` without isolated vertices, with its vertex
/// labels compacted to `0..v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubgraphSpec {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    two_stars: u64,
    triangles: u64,
    automorphisms: u64,
    kind: PatternKind,
}

impl SubgraphSpec {
    /// Builds a pattern from an edge list. Labels may be arbitrary; they are
    /// relabelled in increasing order to `0..v`, so every vertex is covered
    /// by an edge.
    pub fn new(edges: &[(usize, usize)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidSubgraph("pattern has no edges".into()));
        }
        let mut labels: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        labels.sort_unstable();
        labels.dedup();
        let vertex_count = labels.len();
        if vertex_count > MAX_PATTERN_VERTICES {
            return Err(Error::UnsupportedSize {
                what: "pattern vertex count",
                size: vertex_count,
                max: MAX_PATTERN_VERTICES,
            });
        }
        let relabel = |x: usize| labels.binary_search(&x).unwrap();

        let mut compact = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidSubgraph(format!("self-loop at vertex {u}")));
            }
            let (a, b) = (relabel(u), relabel(v));
            let pair = (a.min(b), a.max(b));
            if compact.contains(&pair) {
                return Err(Error::InvalidSubgraph(format!("repeated edge ({u}, {v})")));
            }
            compact.push(pair);
        }
        compact.sort_unstable();

        let mut degree = [0u64; MAX_PATTERN_VERTICES];
        let mut adj = [0u16; MAX_PATTERN_VERTICES];
        for &(a, b) in &compact {
            degree[a] += 1;
            degree[b] += 1;
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        let two_stars = degree.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
        let mut triangles = 0;
        for a in 0..vertex_count {
            for b in (a + 1)..vertex_count {
                for c in (b + 1)..vertex_count {
                    if adj[a] >> b & 1 == 1 && adj[b] >> c & 1 == 1 && adj[a] >> c & 1 == 1 {
                        triangles += 1;
                    }
                }
            }
        }
        let automorphisms = automorphism_count(vertex_count, &compact)?;
        let kind = match (vertex_count, compact.len()) {
            (2, 1) => PatternKind::Edge,
            (3, 2) => PatternKind::TwoStar,
            (3, 3) => PatternKind::Triangle,
            _ => PatternKind::General,
        };
        Ok(SubgraphSpec {
            vertex_count,
            edges: compact,
            two_stars,
            triangles,
            automorphisms,
            kind,
        })
    }

    pub fn edge() -> Self {
        Self::new(&[(0, 1)]).unwrap()
    }

    pub fn two_star() -> Self {
        Self::new(&[(0, 1), (0, 2)]).unwrap()
    }

    pub fn triangle() -> Self {
        Self::new(&[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    /// Looks up `edge`, `two-star` (or `two_star`, `2-star`) and `triangle`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "edge" => Some(Self::edge()),
            "two-star" | "two_star" | "2-star" | "twostar" => Some(Self::two_star()),
            "triangle" => Some(Self::triangle()),
            _ => None,
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn two_stars(&self) -> u64 {
        self.two_stars
    }

    pub fn triangles(&self) -> u64 {
        self.triangles
    }

    pub fn automorphisms(&self) -> u64 {
        self.automorphisms
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    /// The pattern with one edge deleted and all vertices kept. Returned as
    /// `(two-star count, triangle count)` since the result may have isolated
    /// vertices and so is not itself a valid pattern.
    pub fn counts_without_edge(&self, index: usize) -> (u64, u64) {
        let mut degree = [0u64; MAX_PATTERN_VERTICES];
        let mut adj = [0u16; MAX_PATTERN_VERTICES];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if k == index {
                continue;
            }
            degree[a] += 1;
            degree[b] += 1;
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        let s = degree.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
        let v = self.vertex_count;
        let mut t = 0;
        for a in 0..v {
            for b in (a + 1)..v {
                for c in (b + 1)..v {
                    if adj[a] >> b & 1 == 1 && adj[b] >> c & 1 == 1 && adj[a] >> c & 1 == 1 {
                        t += 1;
                    }
                }
            }
        }
        (s, t)
    }
}

/// One `(β_l, H_l)` term of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub beta: f64,
    pub graph: SubgraphSpec,
}

/// An ERGM on `n` vertices. The first term is always the single edge;
/// the remaining terms have at least two edges and nonnegative `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgmParams {
    n: usize,
    terms: Vec<Term>,
}

impl ErgmParams {
    pub fn new(n: usize, terms: Vec<(f64, SubgraphSpec)>) -> Result<Self> {
        let terms: Vec<Term> = terms
            .into_iter()
            .map(|(beta, graph)| Term { beta, graph })
            .collect();
        let Some(first) = terms.first() else {
            return Err(Error::InvalidArgument("model has no terms".into()));
        };
        if first.graph.kind() != PatternKind::Edge {
            return Err(Error::InvalidArgument(
                "the first term must be the single edge".into(),
            ));
        }
        for (l, term) in terms.iter().enumerate() {
            if !term.beta.is_finite() {
                return Err(Error::InvalidArgument(format!("beta[{l}] is not finite")));
            }
            if l == 0 {
                continue;
            }
            if term.graph.edge_count() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "term {l}: only the first term may be a single edge"
                )));
            }
            if term.beta < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "beta[{l}] = {} must be nonnegative",
                    term.beta
                )));
            }
        }
        let max_v = terms.iter().map(|t| t.graph.vertex_count()).max().unwrap_or(0);
        if n < max_v.max(2) {
            return Err(Error::InvalidArgument(format!(
                "n = {n} is smaller than the largest pattern ({max_v} vertices)"
            )));
        }
        Ok(ErgmParams { n, terms })
    }

    /// Erdős–Rényi as an ERGM: each edge present with probability
    /// `e^{2β₁} / (1 + e^{2β₁})`.
    pub fn edge_only(n: usize, beta1: f64) -> Result<Self> {
        Self::new(n, alloc::vec![(beta1, SubgraphSpec::edge())])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `N = n(n-1)/2`.
    #[inline]
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Terms beyond the edge term.
    pub fn interaction_terms(&self) -> &[Term] {
        &self.terms[1..]
    }

    pub fn is_edge_only(&self) -> bool {
        self.interaction_terms().iter().all(|t| t.beta == 0.0)
    }

    /// Same terms on a different vertex count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(
            n,
            self.terms.iter().map(|t| (t.beta, t.graph.clone())).collect(),
        )
    }

    /// Same model with `β₁` replaced.
    pub fn with_edge_beta(&self, beta1: f64) -> Self {
        let mut out = self.clone();
        out.terms[0].beta = beta1;
        out
    }
}

/// `Φ(a) = Σ β_l e_l a^{e_l - 1}`.
pub fn big_phi(params: &ErgmParams, a: f64) -> f64 {
    params
        .terms()
        .iter()
        .map(|t| {
            let e = t.graph.edge_count() as i32;
            t.beta * e as f64 * math::powi(a, e - 1)
        })
        .sum()
}

/// `Φ'(a) = Σ β_l e_l (e_l - 1) a^{e_l - 2}`.
pub fn big_phi_prime(params: &ErgmParams, a: f64) -> f64 {
    params
        .terms()
        .iter()
        .filter(|t| t.graph.edge_count() >= 2)
        .map(|t| {
            let e = t.graph.edge_count() as i32;
            t.beta * (e * (e - 1)) as f64 * math::powi(a, e - 2)
        })
        .sum()
}

/// `φ(a) = e^{2Φ(a)} / (1 + e^{2Φ(a)})`.
pub fn small_phi(params: &ErgmParams, a: f64) -> f64 {
    math::logistic(2.0 * big_phi(params, a))
}

/// `φ'(a) = 2 φ(a)(1 - φ(a)) Φ'(a)`; at a fixed point this is
/// `2p(1-p)Φ'(p)`.
pub fn small_phi_prime(params: &ErgmParams, a: f64) -> f64 {
    let f = small_phi(params, a);
    2.0 * f * (1.0 - f) * big_phi_prime(params, a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Subcritical,
    DobrushinSubcritical,
    NotSubcritical,
    Indeterminate,
}

impl Classification {
    pub fn is_subcritical(self) -> bool {
        matches!(self, Classification::Subcritical | Classification::DobrushinSubcritical)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Subcritical => "Subcritical",
            Classification::DobrushinSubcritical => "DobrushinSubcritical",
            Classification::NotSubcritical => "NotSubcritical",
            Classification::Indeterminate => "Indeterminate",
        }
    }
}

impl core::fmt::Display for Classification {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    /// The fixed point, present iff the classification is subcritical.
    pub p: Option<f64>,
    pub classification: Classification,
    /// `φ'` at the unique root, or the largest `φ'` over all roots when
    /// there are several.
    pub phi_prime_at_p: f64,
    pub big_phi_prime_at_one: f64,
    pub root_count_on_grid: usize,
    /// Every refined root of `φ(a) = a`, ascending.
    pub roots: Vec<f64>,
}

/// Locates the solutions of `φ(a) = a` and classifies the parameters.
///
/// `φ(a) - a` is evaluated on the grid `a = k · 10⁻⁴`; each sign change (or
/// exact zero) is refined by bisection until `|φ(p) - p| ≤ tol`. A unique
/// root with `φ'(p)` within [`CRITICAL_MARGIN`] of 1 is reported as
/// [`Classification::Indeterminate`].
pub fn solve_fixed_point(params: &ErgmParams, tol: f64) -> Result<RegionReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    let big_phi_prime_at_one = big_phi_prime(params, 1.0);

    if params.is_edge_only() {
        let p = small_phi(params, 0.0);
        return Ok(RegionReport {
            p: Some(p),
            classification: Classification::DobrushinSubcritical,
            phi_prime_at_p: 0.0,
            big_phi_prime_at_one,
            root_count_on_grid: 1,
            roots: alloc::vec![p],
        });
    }

    let g = |a: f64| small_phi(params, a) - a;
    let steps = math::round(1.0 / ROOT_GRID_STEP) as usize;
    let mut roots = Vec::new();
    let mut prev_a = 0.0;
    let mut prev_g = g(0.0);
    for k in 1..=steps {
        let a = k as f64 / steps as f64;
        let ga = g(a);
        if prev_g == 0.0 {
            roots.push(prev_a);
        } else if ga != 0.0 && (prev_g > 0.0) != (ga > 0.0) {
            roots.push(bisect(&g, prev_a, a, prev_g, tol));
        }
        prev_a = a;
        prev_g = ga;
    }
    // g(1) = φ(1) - 1 < 0 always, so no root sits on the right end.

    let root_phi_prime: Vec<f64> = roots.iter().map(|&r| small_phi_prime(params, r)).collect();
    let phi_prime_at_p = root_phi_prime.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let classification = if roots.len() != 1 {
        Classification::NotSubcritical
    } else if (phi_prime_at_p - 1.0).abs() <= CRITICAL_MARGIN {
        Classification::Indeterminate
    } else if phi_prime_at_p >= 1.0 {
        Classification::NotSubcritical
    } else if big_phi_prime_at_one < 2.0 {
        Classification::DobrushinSubcritical
    } else {
        Classification::Subcritical
    };

    Ok(RegionReport {
        p: classification.is_subcritical().then(|| roots[0]),
        classification,
        phi_prime_at_p,
        big_phi_prime_at_one,
        root_count_on_grid: roots.len(),
        roots,
    })
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, g_lo: f64, tol: f64) -> f64 {
    let lo_positive = g_lo > 0.0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() <= tol || hi - lo <= f64::EPSILON {
            break;
        }
        if (gm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}
