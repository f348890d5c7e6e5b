//! Lumping functions: construction from clique partitions, loss
//! certification, thresholded (lossy) lumping and trajectory decoding.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{stationary, AdjacencyMatrix, StationaryDistribution, StochasticMatrix, TransitionMatrix};
use crate::entropy::{binary_entropy, neg_xlogx};
use crate::error::{Error, Result};
use crate::graph::{characteristic_graph_chain, epsilon_characteristic_graph, Graph};
use crate::jointsource::ZERO_ENTROPY;
use crate::partition::{solve, CliquePartition, Solver};
use crate::Limits;

/// Surjective map from `0..n_in` onto `0..n_out`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LumpingFunction {
    n_out: usize,
    map: Vec<usize>,
}

impl LumpingFunction {
    pub fn new(map: Vec<usize>, n_out: usize) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::Invalid("lumping has an empty domain".into()));
        }
        if n_out > map.len() {
            return Err(Error::Invalid(format!(
                "n_out = {n_out} exceeds n_in = {}",
                map.len()
            )));
        }
        let mut hit = vec![false; n_out];
        for (x, &y) in map.iter().enumerate() {
            if y >= n_out {
                return Err(Error::Invalid(format!("state {x} maps to {y}, outside 0..{n_out}")));
            }
            hit[y] = true;
        }
        if let Some(y) = hit.iter().position(|h| !h) {
            return Err(Error::Invalid(format!("output {y} has an empty preimage")));
        }
        Ok(Self { n_out, map })
    }

    /// State `x` maps to the index of its block.
    pub fn from_partition(partition: &CliquePartition) -> Self {
        Self {
            n_out: partition.size(),
            map: partition.block_of(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_out: n,
            map: (0..n).collect(),
        }
    }

    pub fn n_in(&self) -> usize {
        self.map.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_bijective(&self) -> bool {
        self.n_out == self.map.len()
    }

    /// All preimages, each in increasing state order.
    pub fn preimages(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.n_out];
        for (x, &y) in self.map.iter().enumerate() {
            pre[y].push(x);
        }
        pre
    }

    /// The lumping as a 0/1 channel.
    pub fn channel(&self) -> StochasticMatrix {
        StochasticMatrix::from_map(&self.map, self.n_out)
    }

    /// Isolated cliques on the preimages.
    pub fn confusion_graph(&self) -> Graph {
        let n = self.n_in();
        let mut g = Graph::empty(n);
        for block in self.preimages() {
            for (i, &u) in block.iter().enumerate() {
                for &v in &block[i + 1..] {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    fn check_domain(&self, n: usize) -> Result<()> {
        if self.n_in() != n {
            return Err(Error::Invalid(format!(
                "lumping is defined on {} states but the chain has {n}",
                self.n_in()
            )));
        }
        Ok(())
    }
}

/// `H(X_2 | Y_2, X_1)` in nats.
///
/// Per previous state `x`, with `R[x][y] = sum_{x' in g⁻¹(y)} P[x][x']`:
/// `-sum_y sum_{x' in g⁻¹(y)} P[x][x'] ln(P[x][x'] / R[x][y])`, weighted by `mu_x`.
pub fn conditional_entropy_given_lump_and_prev(p: &TransitionMatrix, g: &LumpingFunction) -> Result<f64> {
    g.check_domain(p.n())?;
    let mu = stationary(p)?;
    Ok(conditional_entropy_with(p, &mu, g))
}

fn conditional_entropy_with(p: &TransitionMatrix, mu: &StationaryDistribution, g: &LumpingFunction) -> f64 {
    let pre = g.preimages();
    (0..p.n())
        .map(|x| {
            let row = p.row(x);
            let h: f64 = pre
                .iter()
                .map(|block| {
                    let r: f64 = block.iter().map(|&v| row[v]).sum();
                    if r <= 0.0 {
                        0.0
                    } else {
                        r * block.iter().map(|&v| neg_xlogx(row[v] / r)).sum::<f64>()
                    }
                })
                .sum();
            mu[x] * h
        })
        .sum()
}

/// An edge of `G_g` that the characteristic graph lacks, with a state that
/// accesses both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub edge: (usize, usize),
    pub accessor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub lossless: bool,
    pub conditional_entropy: f64,
    pub violation: Option<Violation>,
}

/// Lossless iff every confusion-graph edge of `g` is a characteristic-graph edge.
pub fn certify_lossless(p: &TransitionMatrix, g: &LumpingFunction) -> Result<Certificate> {
    g.check_domain(p.n())?;
    let conditional_entropy = conditional_entropy_given_lump_and_prev(p, g)?;
    let violation = find_violation(&p.support(), g);
    debug_assert!(violation.is_some() || conditional_entropy <= ZERO_ENTROPY);
    Ok(Certificate {
        lossless: violation.is_none(),
        conditional_entropy,
        violation,
    })
}

/// Graph-only part of the certificate; needs nothing but the adjacency.
pub fn find_violation(a: &AdjacencyMatrix, g: &LumpingFunction) -> Option<Violation> {
    let chi = characteristic_graph_chain(a);
    let edge = g.confusion_graph().first_edge_not_in(&chi)?;
    let accessor = (0..a.n())
        .find(|&x| a.get(x, edge.0) && a.get(x, edge.1))
        .expect("a non-edge of the characteristic graph has a common accessor");
    Some(Violation { edge, accessor })
}

/// Maximum out-degree of the transition graph; no lossless lumping has fewer outputs.
pub fn dmax_lower_bound(a: &AdjacencyMatrix) -> usize {
    (0..a.n()).map(|x| a.out_degree(x)).max().unwrap_or(0)
}

/// Loss figures of a (possibly lossy) lumping, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    /// `H(X_2 | Y_2, X_1)`, an upper bound on the information loss rate.
    pub conditional_entropy: f64,
    /// `(N - M) ε (1 - ln ε)`; present when `ε < 1/e`.
    pub bound_first: Option<f64>,
    /// `N h_b(ε)`; present when `ε < 1/N`.
    pub bound_second: Option<f64>,
    pub epsilon: f64,
    pub lossless: bool,
}

impl LossReport {
    pub fn new(conditional_entropy: f64, epsilon: f64, n_in: usize, n_out: usize) -> Self {
        let bound_first = (epsilon < (-1.0f64).exp())
            .then(|| (n_in - n_out) as f64 * (epsilon + neg_xlogx(epsilon)));
        let bound_second = (epsilon < 1.0 / n_in as f64).then(|| n_in as f64 * binary_entropy(epsilon));
        Self {
            conditional_entropy,
            bound_first,
            bound_second,
            epsilon,
            lossless: conditional_entropy <= ZERO_ENTROPY,
        }
    }

    /// Checks `H <= first <= second` where the bounds apply, with `slack`.
    pub fn bounds_hold(&self, slack: f64) -> bool {
        let first_ok = self
            .bound_first
            .is_none_or(|b| self.conditional_entropy <= b + slack);
        let second_ok = match (self.bound_first, self.bound_second) {
            (Some(a), Some(b)) => a <= b + slack,
            (None, Some(b)) => self.conditional_entropy <= b + slack,
            _ => true,
        };
        first_ok && second_ok
    }
}

#[derive(Debug, Clone)]
pub struct LumpOutcome {
    pub lumping: LumpingFunction,
    pub report: LossReport,
    /// The ε-characteristic graph that was partitioned.
    pub graph: Graph,
    pub partition: CliquePartition,
    /// Whether the partition is provably minimum.
    pub exact: bool,
}

/// Partitions the ε-characteristic graph and reports the resulting loss.
/// `ε = 0` is the lossless pipeline.
pub fn lossy_lump(p: &TransitionMatrix, epsilon: f64, solver: Solver, limits: &Limits) -> Result<LumpOutcome> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Invalid(format!("epsilon {epsilon} outside [0, 1)")));
    }
    let graph = if epsilon == 0.0 {
        characteristic_graph_chain(&p.adjacency(limits.positivity))
    } else {
        epsilon_characteristic_graph(p, epsilon)?
    };
    let (partition, exact) = solve(&graph, solver, limits.exact_vertices)?;
    let lumping = LumpingFunction::from_partition(&partition);
    let h = conditional_entropy_given_lump_and_prev(p, &lumping)?;
    let report = LossReport::new(h, epsilon, p.n(), lumping.n_out());
    debug_assert!(report.bounds_hold(1e-12), "{report:?}");
    Ok(LumpOutcome {
        lumping,
        report,
        graph,
        partition,
        exact,
    })
}

/// Why a lumped sequence could not be decoded.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("observation {position}: no state of the lumped symbol is reachable from the previous state")]
    Impossible { position: usize },
    #[error("observation {position}: ambiguous, candidates {candidates:?}")]
    Ambiguous { position: usize, candidates: Vec<usize> },
    #[error("observation {position}: symbol {symbol} is not a lumped state")]
    UnknownSymbol { position: usize, symbol: usize },
    #[error("initial state {0} is not a chain state")]
    UnknownInitialState(usize),
}

/// Decodes `x_1, x_2, ...` from the initial state and lumped symbols
/// `y = (g(x_2), g(x_3), ...)`. Error positions index into `y`.
pub fn reconstruct(
    a: &AdjacencyMatrix,
    g: &LumpingFunction,
    x1: usize,
    y: &[usize],
) -> std::result::Result<Vec<usize>, DecodeError> {
    if x1 >= a.n() || x1 >= g.n_in() {
        return Err(DecodeError::UnknownInitialState(x1));
    }
    let pre = g.preimages();
    let mut path = Vec::with_capacity(y.len() + 1);
    path.push(x1);
    let mut prev = x1;
    for (position, &symbol) in y.iter().enumerate() {
        let block = pre
            .get(symbol)
            .ok_or(DecodeError::UnknownSymbol { position, symbol })?;
        let candidates: Vec<usize> = block.iter().copied().filter(|&x| a.get(prev, x)).collect();
        match candidates.as_slice() {
            [] => return Err(DecodeError::Impossible { position }),
            [x] => {
                path.push(*x);
                prev = *x;
            }
            _ => return Err(DecodeError::Ambiguous { position, candidates }),
        }
    }
    Ok(path)
}

/// Decoder that never fails: among the lumped symbol's preimage it picks the
/// state with the largest one-step probability from the previous decoded
/// state, lowest index on ties.
pub fn decode_max_probability(p: &TransitionMatrix, g: &LumpingFunction, x1: usize, y: &[usize]) -> Vec<usize> {
    let pre = g.preimages();
    let mut path = Vec::with_capacity(y.len() + 1);
    path.push(x1);
    let mut prev = x1;
    for &symbol in y {
        let mut best = pre[symbol][0];
        for &x in &pre[symbol][1..] {
            if p.get(prev, x) > p.get(prev, best) {
                best = x;
            }
        }
        path.push(best);
        prev = best;
    }
    path
}

/// Samples `X_1 ~ mu`, then `length - 1` steps of the chain.
pub fn simulate_chain(p: &TransitionMatrix, length: usize, seed: u64) -> Result<Vec<usize>> {
    let sampler = Sampler::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.run(length, &mut rng))
}

struct Sampler {
    initial: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
}

impl Sampler {
    fn new(p: &TransitionMatrix) -> Result<Self> {
        let mu = stationary(p)?;
        let initial = WeightedIndex::new(mu.as_slice()).map_err(|e| Error::Invalid(e.to_string()))?;
        let rows = (0..p.n())
            .map(|x| WeightedIndex::new(p.row(x)).map_err(|e| Error::Invalid(format!("row {x}: {e}"))))
            .collect::<Result<_>>()?;
        Ok(Self { initial, rows })
    }

    fn run(&self, length: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut path = Vec::with_capacity(length);
        if length == 0 {
            return path;
        }
        let mut x = self.initial.sample(rng);
        path.push(x);
        for _ in 1..length {
            x = self.rows[x].sample(rng);
            path.push(x);
        }
        path
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRate {
    pub errors: u64,
    /// Decoded positions; the known initial state is not counted.
    pub symbols: u64,
    pub rate: f64,
}

/// Monte Carlo symbol error rate of [`decode_max_probability`] on simulated
/// trajectories. Trial `t` draws from ChaCha stream `t` of `seed`.
pub fn error_propagation(
    p: &TransitionMatrix,
    g: &LumpingFunction,
    trials: u64,
    length: usize,
    seed: u64,
) -> Result<ErrorRate> {
    g.check_domain(p.n())?;
    let sampler = Sampler::new(p)?;
    let (mut errors, mut symbols) = (0u64, 0u64);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let path = sampler.run(length, &mut rng);
        let y: Vec<usize> = path[1..].iter().map(|&x| g.apply(x)).collect();
        let decoded = decode_max_probability(p, g, path[0], &y);
        errors += path.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64;
        symbols += y.len() as u64;
    }
    let rate = if symbols == 0 { 0.0 } else { errors as f64 / symbols as f64 };
    Ok(ErrorRate { errors, symbols, rate })
}
