//! Markov chains on simple graphs and exact enumeration for tiny `n`.
//!
//! - Glauber dynamics: pick a uniform pair `e`, set `Y_e = 1` with
//!   probability `e^{∂_eH} / (1 + e^{∂_eH})`. Its stationary law is the ERGM.
//! - Edge-swap chain: pick a uniform present edge `f` and a uniform absent
//!   pair `h` and move the edge from `f` to `h` with Metropolis acceptance.
//!   The proposal is symmetric, the edge count is fixed, and the stationary
//!   law is the ERGM conditioned on `E = k`, which does not involve `β₁`.
//!
//! One sweep is `N = n(n-1)/2` proposals for either chain.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{count_statistics, flip_edge, hamiltonian, partial_hamiltonian, DenseGraph, RunningCounts};
use crate::model::ErgmParams;
use crate::{math, stats, Error, Result};

/// Largest `n` accepted by exact enumeration (`2^15` graphs).
pub const MAX_EXACT_VERTICES: usize = 6;

pub const DEFAULT_BURN_IN_SWEEPS: usize = 200;
pub const DEFAULT_THINNING_SWEEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Empty,
    Complete,
    /// Each pair present independently with the given probability.
    Iid(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub seed: u64,
    pub burn_in_sweeps: usize,
    pub samples: usize,
    pub thinning_sweeps: usize,
    pub initial_state: InitialState,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            seed: 0,
            burn_in_sweeps: DEFAULT_BURN_IN_SWEEPS,
            samples: 1000,
            thinning_sweeps: DEFAULT_THINNING_SWEEPS,
            initial_state: InitialState::Iid(0.5),
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        if self.thinning_sweeps == 0 {
            return Err(Error::InvalidArgument("thinning_sweeps must be at least 1".into()));
        }
        if let InitialState::Iid(p) = self.initial_state {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("initial density {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    Unconditional,
    /// Edge-swap chain on graphs with exactly this many edges.
    Conditional { edges: usize },
}

/// Counts observed at one emission of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleRecord {
    /// Sweeps completed (burn-in included) when the record was taken.
    pub sweep: u64,
    pub edges: u64,
    pub two_stars: u64,
    pub triangles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapOutcome {
    Accepted,
    Rejected,
    /// No present edge or no absent pair to swap with.
    Degenerate,
}

/// Probability that a Glauber update of `(i, j)` leaves the pair present.
pub fn glauber_update_probability(params: &ErgmParams, g: &DenseGraph, i: usize, j: usize) -> f64 {
    math::logistic(partial_hamiltonian(params, g, i, j))
}

/// Draws a uniform unordered pair of distinct vertices.
#[inline]
fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// One Glauber update. Returns whether the graph changed.
pub fn glauber_step<R: Rng + ?Sized>(
    params: &ErgmParams,
    g: &mut DenseGraph,
    counts: &mut RunningCounts,
    rng: &mut R,
) -> bool {
    let (i, j) = random_pair(g.n(), rng);
    let on = rng.random::<f64>() < glauber_update_probability(params, g, i, j);
    if on != g.has_edge(i, j) {
        flip_edge(g, counts, i, j);
        true
    } else {
        false
    }
}

/// Present and absent pairs as index arrays with O(1) swap-remove, so the
/// swap chain can draw uniformly from either side.
#[derive(Debug, Clone)]
pub struct EdgeLists {
    n: usize,
    present: Vec<u32>,
    absent: Vec<u32>,
    /// Position of each pair inside whichever list currently holds it.
    slot: Vec<u32>,
}

impl EdgeLists {
    pub fn new(g: &DenseGraph) -> Self {
        let n = g.n();
        let mut lists = EdgeLists {
            n,
            present: Vec::new(),
            absent: Vec::new(),
            slot: vec![0; g.pair_count()],
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let idx = lists.index_of(i, j);
                let list = if g.has_edge(i, j) { &mut lists.present } else { &mut lists.absent };
                lists.slot[idx] = list.len() as u32;
                list.push(idx as u32);
            }
        }
        lists
    }

    /// Lexicographic index of the pair `(i, j)`, `i < j`.
    #[inline]
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn pair_of(&self, mut idx: usize) -> (usize, usize) {
        let mut i = 0;
        loop {
            let row = self.n - i - 1;
            if idx < row {
                return (i, i + 1 + idx);
            }
            idx -= row;
            i += 1;
        }
    }

    pub fn present_len(&self) -> usize {
        self.present.len()
    }

    pub fn absent_len(&self) -> usize {
        self.absent.len()
    }

    fn move_pair(&mut self, idx: usize, to_present: bool) {
        let (from, to) = if to_present {
            (&mut self.absent, &mut self.present)
        } else {
            (&mut self.present, &mut self.absent)
        };
        let pos = self.slot[idx] as usize;
        let last = *from.last().unwrap();
        from.swap_remove(pos);
        if last as usize != idx {
            self.slot[last as usize] = pos as u32;
        }
        self.slot[idx] = to.len() as u32;
        to.push(idx as u32);
    }

    /// Flips the pair in both the graph (with counts) and the lists.
    pub fn flip(&mut self, g: &mut DenseGraph, counts: &mut RunningCounts, i: usize, j: usize) {
        let now_present = flip_edge(g, counts, i, j);
        self.move_pair(self.index_of(i, j), now_present);
    }
}

/// `min(1, exp(H(g') - H(g)))` for moving the edge `f` (present) to the
/// absent pair `h`.
pub fn swap_acceptance(
    params: &ErgmParams,
    g: &DenseGraph,
    f: (usize, usize),
    h: (usize, usize),
) -> f64 {
    let mut moved = g.clone();
    let before = partial_hamiltonian(params, &moved, f.0, f.1);
    moved.remove_edge(f.0, f.1);
    let after = partial_hamiltonian(params, &moved, h.0, h.1);
    let delta = after - before;
    if delta >= 0.0 {
        1.0
    } else {
        math::exp(delta)
    }
}

/// One edge-swap Metropolis step. `E` never changes.
///
/// `ΔH = ∂_hH(g - f) - ∂_fH(g)`, evaluated by removing `f`, reading the local
/// field at `h`, and either adding `h` or restoring `f`. The edge term
/// contributes `2β₁` to both sides, so `β₁` cancels.
pub fn conditional_swap_step<R: Rng + ?Sized>(
    params: &ErgmParams,
    g: &mut DenseGraph,
    counts: &mut RunningCounts,
    lists: &mut EdgeLists,
    rng: &mut R,
) -> SwapOutcome {
    if lists.present.is_empty() || lists.absent.is_empty() {
        return SwapOutcome::Degenerate;
    }
    let f_idx = lists.present[rng.random_range(0..lists.present.len())] as usize;
    let h_idx = lists.absent[rng.random_range(0..lists.absent.len())] as usize;
    let f = lists.pair_of(f_idx);
    let h = lists.pair_of(h_idx);

    let before = partial_hamiltonian(params, g, f.0, f.1);
    lists.flip(g, counts, f.0, f.1);
    let after = partial_hamiltonian(params, g, h.0, h.1);
    let delta = after - before;
    let u: f64 = rng.random();
    if delta >= 0.0 || u < math::exp(delta) {
        lists.flip(g, counts, h.0, h.1);
        SwapOutcome::Accepted
    } else {
        lists.flip(g, counts, f.0, f.1);
        SwapOutcome::Rejected
    }
}

/// Totals reported after a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainSummary {
    pub proposals: u64,
    /// Accepted swaps, or Glauber updates that changed the graph.
    pub moves: u64,
    pub degenerate_steps: u64,
}

/// A running chain owning its graph, counts and generator.
#[derive(Debug, Clone)]
pub struct Chain {
    params: ErgmParams,
    kind: ChainKind,
    graph: DenseGraph,
    counts: RunningCounts,
    lists: Option<EdgeLists>,
    rng: ChaCha8Rng,
    sweeps: u64,
    summary: ChainSummary,
}

impl Chain {
    /// Seeds ChaCha8 from `config.seed` and builds the initial state. For a
    /// conditional chain, uniformly random pairs are then added or removed
    /// until exactly `k` edges remain.
    pub fn new(params: &ErgmParams, config: &ChainConfig, kind: ChainKind) -> Result<Self> {
        config.validate()?;
        let n = params.n();
        let pairs = params.pair_count();
        if let ChainKind::Conditional { edges } = kind {
            if edges > pairs {
                return Err(Error::InvalidArgument(format!(
                    "conditional edge count {edges} exceeds N = {pairs}"
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut graph = match config.initial_state {
            InitialState::Empty => DenseGraph::new(n),
            InitialState::Complete => DenseGraph::complete(n),
            InitialState::Iid(p) => {
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
        };
        let mut counts = count_statistics(&graph);
        let lists = match kind {
            ChainKind::Unconditional => None,
            ChainKind::Conditional { edges } => {
                let mut lists = EdgeLists::new(&graph);
                while (counts.edges as usize) < edges {
                    let idx = lists.absent[rng.random_range(0..lists.absent.len())] as usize;
                    let (i, j) = lists.pair_of(idx);
                    lists.flip(&mut graph, &mut counts, i, j);
                }
                while (counts.edges as usize) > edges {
                    let idx = lists.present[rng.random_range(0..lists.present.len())] as usize;
                    let (i, j) = lists.pair_of(idx);
                    lists.flip(&mut graph, &mut counts, i, j);
                }
                Some(lists)
            }
        };
        Ok(Chain {
            params: params.clone(),
            kind,
            graph,
            counts,
            lists,
            rng,
            sweeps: 0,
            summary: ChainSummary::default(),
        })
    }

    pub fn graph(&self) -> &DenseGraph {
        &self.graph
    }

    pub fn counts(&self) -> RunningCounts {
        self.counts
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn summary(&self) -> ChainSummary {
        self.summary
    }

    pub fn step(&mut self) {
        self.summary.proposals += 1;
        match &mut self.lists {
            None => {
                if glauber_step(&self.params, &mut self.graph, &mut self.counts, &mut self.rng) {
                    self.summary.moves += 1;
                }
            }
            Some(lists) => {
                match conditional_swap_step(&self.params, &mut self.graph, &mut self.counts, lists, &mut self.rng) {
                    SwapOutcome::Accepted => self.summary.moves += 1,
                    SwapOutcome::Rejected => {}
                    SwapOutcome::Degenerate => self.summary.degenerate_steps += 1,
                }
            }
        }
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.params.pair_count() {
            self.step();
        }
        self.sweeps += 1;
    }

    pub fn record(&self) -> SampleRecord {
        SampleRecord {
            sweep: self.sweeps,
            edges: self.counts.edges,
            two_stars: self.counts.two_stars,
            triangles: self.counts.triangles,
        }
    }
}

/// Runs a chain and hands every emitted record, together with the graph at
/// that moment, to `visit`. Emission happens every `thinning_sweeps` sweeps
/// after `burn_in_sweeps`; the stream is a pure function of the inputs.
pub fn run_chain_with<F>(
    params: &ErgmParams,
    config: &ChainConfig,
    kind: ChainKind,
    mut visit: F,
) -> Result<ChainSummary>
where
    F: FnMut(&SampleRecord, &DenseGraph),
{
    let mut chain = Chain::new(params, config, kind)?;
    for _ in 0..config.burn_in_sweeps {
        chain.sweep();
    }
    for _ in 0..config.samples {
        for _ in 0..config.thinning_sweeps {
            chain.sweep();
        }
        visit(&chain.record(), chain.graph());
    }
    Ok(chain.summary())
}

pub fn run_chain(params: &ErgmParams, config: &ChainConfig, kind: ChainKind) -> Result<Vec<SampleRecord>> {
    let mut out = Vec::with_capacity(config.samples);
    run_chain_with(params, config, kind, |r, _| out.push(*r))?;
    Ok(out)
}

/// Batch-means estimate of `p̃ = E(E_n) / N` from an unconditional chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtildeEstimate {
    pub p_tilde: f64,
    pub standard_error: f64,
    pub samples: usize,
}

pub fn estimate_ptilde(params: &ErgmParams, config: &ChainConfig) -> Result<PtildeEstimate> {
    let pairs = params.pair_count() as f64;
    let densities: Vec<f64> = run_chain(params, config, ChainKind::Unconditional)?
        .iter()
        .map(|r| r.edges as f64 / pairs)
        .collect();
    let bm = stats::batch_means(&densities)?;
    Ok(PtildeEstimate {
        p_tilde: bm.mean,
        standard_error: bm.standard_error,
        samples: densities.len(),
    })
}

/// The exact law of a tiny ERGM, with graphs encoded as bitmasks over the
/// lexicographically ordered pairs.
#[derive(Debug, Clone)]
pub struct ExactTable {
    n: usize,
    pairs: Vec<(usize, usize)>,
    /// `(mask, probability)` over the support, masks ascending.
    states: Vec<(u32, f64)>,
}

impl ExactTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn states(&self) -> &[(u32, f64)] {
        &self.states
    }

    pub fn graph(&self, mask: u32) -> DenseGraph {
        let mut g = DenseGraph::new(self.n);
        for (b, &(i, j)) in self.pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn mask(&self, g: &DenseGraph) -> u32 {
        self.pairs
            .iter()
            .enumerate()
            .filter(|&(_, &(i, j))| g.has_edge(i, j))
            .fold(0, |m, (b, _)| m | 1 << b)
    }

    pub fn probability(&self, mask: u32) -> f64 {
        match self.states.binary_search_by_key(&mask, |&(m, _)| m) {
            Ok(k) => self.states[k].1,
            Err(_) => 0.0,
        }
    }

    /// Exact expectation of a function of the counts.
    pub fn expectation(&self, mut f: impl FnMut(&RunningCounts) -> f64) -> f64 {
        self.states
            .iter()
            .map(|&(m, p)| p * f(&count_statistics(&self.graph(m))))
            .sum()
    }
}

fn enumerate(params: &ErgmParams, edges: Option<usize>) -> Result<ExactTable> {
    let n = params.n();
    if n > MAX_EXACT_VERTICES {
        return Err(Error::UnsupportedSize {
            what: "n for exact enumeration",
            size: n,
            max: MAX_EXACT_VERTICES,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut table = ExactTable { n, pairs, states: Vec::new() };
    let mut energies = Vec::new();
    for mask in 0u32..(1u32 << table.pairs.len()) {
        if edges.is_some_and(|k| mask.count_ones() as usize != k) {
            continue;
        }
        energies.push((mask, hamiltonian(params, &table.graph(mask))));
    }
    if energies.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no graph on {n} vertices has {} edges",
            edges.unwrap_or(0)
        )));
    }
    let max = energies.iter().map(|&(_, h)| h).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = energies.iter().map(|&(_, h)| math::exp(h - max)).sum();
    table.states = energies
        .into_iter()
        .map(|(m, h)| (m, math::exp(h - max) / z))
        .collect();
    Ok(table)
}

/// `P(G) ∝ exp(n² Σ β_l t(H_l, G))` over all graphs on `n ≤ 6` vertices.
pub fn exact_distribution(params: &ErgmParams) -> Result<ExactTable> {
    enumerate(params, None)
}

/// The exact law conditioned on `E = k`.
pub fn exact_conditional(params: &ErgmParams, k: usize) -> Result<ExactTable> {
    enumerate(params, Some(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SubgraphSpec;
    use rand::rngs::SmallRng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::BTreeMap;

    fn edge_plus(n: usize, b1: f64, b2: f64, h: SubgraphSpec) -> ErgmParams {
        ErgmParams::new(n, vec![(b1, SubgraphSpec::edge()), (b2, h)]).unwrap()
    }

    /// Pearson chi-square p-value of observed counts against exact
    /// probabilities, pooling cells with expectation below 5.
    fn chi_square_p_value(observed: &BTreeMap<u32, u64>, table: &ExactTable, total: u64) -> f64 {
        let mut stat = 0.0;
        let mut cells = 0;
        let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
        for &(m, p) in table.states() {
            let exp = p * total as f64;
            let obs = *observed.get(&m).unwrap_or(&0) as f64;
            if exp < 5.0 {
                pooled_obs += obs;
                pooled_exp += exp;
            } else {
                stat += (obs - exp).powi(2) / exp;
                cells += 1;
            }
        }
        if pooled_exp > 0.0 {
            stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
            cells += 1;
        }
        1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
    }

    #[test]
    fn pair_indexing_round_trips() {
        let lists = EdgeLists::new(&DenseGraph::new(9));
        let mut idx = 0;
        for i in 0..9 {
            for j in (i + 1)..9 {
                assert_eq!(lists.index_of(i, j), idx);
                assert_eq!(lists.index_of(j, i), idx);
                assert_eq!(lists.pair_of(idx), (i, j));
                idx += 1;
            }
        }
    }

    #[test]
    fn glauber_acceptance_edge_only() {
        let mut rng = SmallRng::seed_from_u64(1);
        let g = DenseGraph::complete(7);
        let zero = ErgmParams::edge_only(7, 0.0).unwrap();
        assert_eq!(glauber_update_probability(&zero, &g, 2, 3), 0.5);
        let b1: f64 = 0.6;
        let p = (2.0 * b1).exp() / (1.0 + (2.0 * b1).exp());
        let params = ErgmParams::edge_only(7, b1).unwrap();
        for _ in 0..10 {
            let (i, j) = random_pair(7, &mut rng);
            assert!((glauber_update_probability(&params, &g, i, j) - p).abs() < 1e-15);
            assert!((glauber_update_probability(&params, &DenseGraph::new(7), i, j) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn glauber_step_fair_coin() {
        let params = ErgmParams::edge_only(10, 0.0).unwrap();
        let mut g = DenseGraph::new(10);
        let mut c = RunningCounts::default();
        let mut rng = SmallRng::seed_from_u64(5);
        let mut on = 0;
        let steps = 200_000;
        for _ in 0..steps {
            glauber_step(&params, &mut g, &mut c, &mut rng);
            on += c.edges;
        }
        let mean_density = on as f64 / steps as f64 / 45.0;
        assert!((mean_density - 0.5).abs() < 0.01, "{mean_density}");
        assert_eq!(c, count_statistics(&g));
    }

    #[test]
    fn exact_distribution_uniform_and_bernoulli() {
        let zero = edge_plus(4, 0.0, 0.0, SubgraphSpec::triangle());
        let t = exact_distribution(&zero).unwrap();
        assert_eq!(t.states().len(), 64);
        for &(_, p) in t.states() {
            assert!((p - 1.0 / 64.0).abs() < 1e-15);
        }

        let b1: f64 = -0.35;
        let p = (2.0 * b1).exp() / (1.0 + (2.0 * b1).exp());
        let t = exact_distribution(&ErgmParams::edge_only(5, b1).unwrap()).unwrap();
        let total: f64 = t.states().iter().map(|s| s.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for &(m, prob) in t.states() {
            let e = m.count_ones() as i32;
            let want = p.powi(e) * (1.0 - p).powi(10 - e);
            assert!((prob - want).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_conditional_ignores_edge_beta() {
        let a = edge_plus(5, 0.0, 0.4, SubgraphSpec::triangle());
        let b = a.with_edge_beta(7.3);
        for k in [0, 3, 5, 10] {
            let ta = exact_conditional(&a, k).unwrap();
            let tb = exact_conditional(&b, k).unwrap();
            for (x, y) in ta.states().iter().zip(tb.states()) {
                assert_eq!(x.0, y.0);
                assert!((x.1 - y.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_rejects_large_n() {
        let params = ErgmParams::edge_only(7, 0.0).unwrap();
        assert!(matches!(exact_distribution(&params), Err(Error::UnsupportedSize { .. })));
        assert!(matches!(exact_conditional(&params, 3), Err(Error::UnsupportedSize { .. })));
    }

    #[test]
    fn glauber_detailed_balance_exact() {
        let params = edge_plus(5, -0.2, 0.1, SubgraphSpec::two_star());
        let table = exact_distribution(&params).unwrap();
        let pairs = table.pairs().len() as f64;
        for &(x, px) in table.states() {
            let gx = table.graph(x);
            for (b, &(i, j)) in table.pairs().iter().enumerate() {
                let y = x ^ (1 << b);
                let gy = table.graph(y);
                let py = table.probability(y);
                let on_x = glauber_update_probability(&params, &gx, i, j);
                let on_y = glauber_update_probability(&params, &gy, i, j);
                let pxy = if gx.has_edge(i, j) { 1.0 - on_x } else { on_x } / pairs;
                let pyx = if gy.has_edge(i, j) { 1.0 - on_y } else { on_y } / pairs;
                assert!((px * pxy - py * pyx).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn swap_detailed_balance_exact() {
        let params = edge_plus(5, 0.8, 0.35, SubgraphSpec::triangle());
        let k = 5;
        let table = exact_conditional(&params, k).unwrap();
        let npairs = table.pairs().len();
        let proposal = 1.0 / (k * (npairs - k)) as f64;
        for &(x, px) in table.states() {
            let gx = table.graph(x);
            for f in 0..npairs {
                for h in 0..npairs {
                    if x >> f & 1 == 0 || x >> h & 1 == 1 {
                        continue;
                    }
                    let y = x ^ (1 << f) ^ (1 << h);
                    let gy = table.graph(y);
                    let py = table.probability(y);
                    let (fp, hp) = (table.pairs()[f], table.pairs()[h]);
                    let a_xy = swap_acceptance(&params, &gx, fp, hp);
                    let a_yx = swap_acceptance(&params, &gy, hp, fp);
                    assert!((px * proposal * a_xy - py * proposal * a_yx).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn glauber_matches_exact_law_chi_square() {
        let params = edge_plus(4, -0.3, 0.9, SubgraphSpec::triangle());
        let table = exact_distribution(&params).unwrap();
        let mut rng = SmallRng::seed_from_u64(99);
        let mut g = DenseGraph::new(4);
        let mut c = RunningCounts::default();
        let mut observed = BTreeMap::new();
        // 10^7 updates; the state is read every 60 updates (10 sweeps).
        for _ in 0..1000 {
            glauber_step(&params, &mut g, &mut c, &mut rng);
        }
        let mut total = 0;
        for step in 0..10_000_000u64 {
            glauber_step(&params, &mut g, &mut c, &mut rng);
            if step % 60 == 0 {
                *observed.entry(table.mask(&g)).or_insert(0) += 1;
                total += 1;
            }
        }
        let pv = chi_square_p_value(&observed, &table, total);
        assert!(pv > 0.01, "p-value {pv}");
    }

    #[test]
    fn swap_chain_matches_exact_conditional_chi_square() {
        let params = edge_plus(5, 0.0, 0.6, SubgraphSpec::two_star());
        let table = exact_conditional(&params, 5).unwrap();
        let mut rng = SmallRng::seed_from_u64(2024);
        let mut g = DenseGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let mut c = count_statistics(&g);
        let mut lists = EdgeLists::new(&g);
        let mut observed = BTreeMap::new();
        let mut total = 0;
        for step in 0..10_000_000u64 {
            conditional_swap_step(&params, &mut g, &mut c, &mut lists, &mut rng);
            assert_eq!(c.edges, 5);
            if step % 100 == 0 {
                *observed.entry(table.mask(&g)).or_insert(0) += 1;
                total += 1;
            }
        }
        let pv = chi_square_p_value(&observed, &table, total);
        assert!(pv > 0.01, "p-value {pv}");
        assert_eq!(c, count_statistics(&g));
    }

    #[test]
    fn swap_chain_accepts_everything_without_interactions() {
        let params = edge_plus(8, 1.3, 0.0, SubgraphSpec::triangle());
        let config = ChainConfig { seed: 3, burn_in_sweeps: 0, samples: 5, thinning_sweeps: 1, ..Default::default() };
        let mut chain = Chain::new(&params, &config, ChainKind::Conditional { edges: 11 }).unwrap();
        for _ in 0..20 {
            chain.sweep();
            assert_eq!(chain.counts().edges, 11);
        }
        let s = chain.summary();
        assert_eq!(s.moves, s.proposals);
    }

    #[test]
    fn degenerate_swap_is_flagged() {
        let params = edge_plus(5, 0.0, 0.2, SubgraphSpec::triangle());
        let mut rng = SmallRng::seed_from_u64(0);
        for mut g in [DenseGraph::new(5), DenseGraph::complete(5)] {
            let mut c = count_statistics(&g);
            let mut lists = EdgeLists::new(&g);
            let before = g.clone();
            let outcome = conditional_swap_step(&params, &mut g, &mut c, &mut lists, &mut rng);
            assert_eq!(outcome, SwapOutcome::Degenerate);
            assert_eq!(g, before);
        }
    }

    #[test]
    fn run_chain_is_deterministic() {
        let params = edge_plus(12, -0.1, 0.3, SubgraphSpec::triangle());
        let config = ChainConfig { seed: 77, burn_in_sweeps: 5, samples: 30, thinning_sweeps: 2, ..Default::default() };
        for kind in [ChainKind::Unconditional, ChainKind::Conditional { edges: 30 }] {
            let a = run_chain(&params, &config, kind).unwrap();
            let b = run_chain(&params, &config, kind).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 30);
            assert_eq!(a[0].sweep, 7);
            assert_eq!(a[29].sweep, 5 + 60);
        }
        let other = ChainConfig { seed: 78, ..config.clone() };
        assert_ne!(
            run_chain(&params, &config, ChainKind::Unconditional).unwrap(),
            run_chain(&params, &other, ChainKind::Unconditional).unwrap()
        );
    }

    #[test]
    fn run_chain_rejects_bad_arguments() {
        let params = ErgmParams::edge_only(6, 0.0).unwrap();
        let config = ChainConfig::default();
        assert!(matches!(
            run_chain(&params, &config, ChainKind::Conditional { edges: 16 }),
            Err(Error::InvalidArgument(_))
        ));
        let bad = ChainConfig { samples: 0, ..config.clone() };
        assert!(run_chain(&params, &bad, ChainKind::Unconditional).is_err());
        let bad = ChainConfig { thinning_sweeps: 0, ..config };
        assert!(run_chain(&params, &bad, ChainKind::Unconditional).is_err());
    }

    #[test]
    fn conditional_initial_state_is_adjusted() {
        let params = ErgmParams::edge_only(9, 0.0).unwrap();
        for init in [InitialState::Empty, InitialState::Complete, InitialState::Iid(0.3)] {
            for k in [0, 1, 17, 35, 36] {
                let config = ChainConfig { initial_state: init, ..Default::default() };
                let chain = Chain::new(&params, &config, ChainKind::Conditional { edges: k }).unwrap();
                assert_eq!(chain.counts().edges as usize, k);
                assert_eq!(chain.counts(), count_statistics(chain.graph()));
            }
        }
    }

    #[test]
    fn unconditional_density_half() {
        let params = ErgmParams::edge_only(12, 0.0).unwrap();
        let config = ChainConfig { seed: 1, burn_in_sweeps: 10, samples: 4000, thinning_sweeps: 1, ..Default::default() };
        let est = estimate_ptilde(&params, &config).unwrap();
        assert!((est.p_tilde - 0.5).abs() < 3.0 * est.standard_error, "{est:?}");
    }

    #[test]
    fn estimate_ptilde_edge_only() {
        let b1: f64 = 0.4;
        let p = (2.0 * b1).exp() / (1.0 + (2.0 * b1).exp());
        let params = ErgmParams::edge_only(15, b1).unwrap();
        let config = ChainConfig { seed: 8, burn_in_sweeps: 10, samples: 4000, thinning_sweeps: 1, ..Default::default() };
        let est = estimate_ptilde(&params, &config).unwrap();
        assert!((est.p_tilde - p).abs() < 3.0 * est.standard_error, "{est:?} vs {p}");
    }

    #[test]
    fn conditional_two_star_mean_erdos_renyi() {
        // Uniform k-edge graphs: two given edges sharing a vertex are both
        // present with probability k(k-1) / (N(N-1)).
        let n = 14;
        let params = ErgmParams::edge_only(n, 0.0).unwrap();
        let pairs = params.pair_count() as f64;
        let k = 40;
        let config = ChainConfig { seed: 4, burn_in_sweeps: 20, samples: 3000, thinning_sweeps: 1, ..Default::default() };
        let vs: Vec<f64> = run_chain(&params, &config, ChainKind::Conditional { edges: k })
            .unwrap()
            .iter()
            .map(|r| r.two_stars as f64)
            .collect();
        let bm = stats::batch_means(&vs).unwrap();
        let pt = k as f64 / pairs;
        let exact = pairs * (n as f64 - 2.0) * pt * (pairs * pt - 1.0) / (pairs - 1.0);
        assert!((bm.mean - exact).abs() < 3.0 * bm.standard_error, "{} vs {exact} ± {}", bm.mean, bm.standard_error);
    }

    #[test]
    fn edge_count_is_binomial_dkw() {
        // Records one sweep apart are independent for the edge-only chain up
        // to the pairs never touched during the sweep; use 4 sweeps.
        let n = 8;
        let b1: f64 = -0.25;
        let p = (2.0 * b1).exp() / (1.0 + (2.0 * b1).exp());
        let params = ErgmParams::edge_only(n, b1).unwrap();
        let config = ChainConfig { seed: 12, burn_in_sweeps: 10, samples: 20_000, thinning_sweeps: 4, ..Default::default() };
        let records = run_chain(&params, &config, ChainKind::Unconditional).unwrap();
        let pairs = params.pair_count() as u64;
        let mut hist = vec![0u64; pairs as usize + 1];
        for r in &records {
            hist[r.edges as usize] += 1;
        }
        let binom = stats::Pmf::binomial(pairs, p);
        let mut emp_cdf = 0.0;
        let mut worst: f64 = 0.0;
        for k in 0..=pairs {
            emp_cdf += hist[k as usize] as f64 / records.len() as f64;
            worst = worst.max((emp_cdf - binom.cdf(k as i64)).abs());
        }
        let band = stats::dkw_epsilon(records.len(), 0.001);
        assert!(worst < band, "{worst} vs {band}");
    }
}
