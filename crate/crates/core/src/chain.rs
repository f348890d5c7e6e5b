//! Finite Markov chains: transition matrices, structure checks, stationary
//! analysis, entropy rates and K-fold blocking.

use nalgebra::{DMatrix, DVector};

use crate::bitset::VertexSet;
use crate::entropy::neg_xlogx;
use crate::error::{Error, Result};
use crate::graph::checked_power;
use crate::Limits;

/// Row sums must be within this distance of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Transitions above this probability count as possible.
pub const DEFAULT_POSITIVITY: f64 = 1e-12;

/// Largest chain solved by a direct linear system; larger chains use power iteration.
const DIRECT_SOLVE_MAX: usize = 512;

const POWER_ITERATION_CAP: usize = 200_000;

/// A dense row-stochastic matrix, e.g. a channel `W[x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::Invalid("matrix has no rows".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::MalformedRow {
                row: 0,
                reason: "row is empty".into(),
            });
        }
        let mut data = Vec::with_capacity(n_rows * cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::MalformedRow {
                    row: r,
                    reason: format!("expected {cols} entries, found {}", row.len()),
                });
            }
            let mut sum = 0.0;
            for (c, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::MalformedRow {
                        row: r,
                        reason: format!("entry {c} = {p} is not a probability"),
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::MalformedRow {
                    row: r,
                    reason: format!("row sums to {sum}, not 1"),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n_rows,
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Deterministic channel `W[x][g(x)] = 1`.
    pub fn from_map(map: &[usize], outputs: usize) -> Self {
        let mut data = vec![0.0; map.len() * outputs];
        for (x, &y) in map.iter().enumerate() {
            data[x * outputs + y] = 1.0;
        }
        Self {
            rows: map.len(),
            cols: outputs,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

/// Square row-stochastic transition matrix over states `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(StochasticMatrix);

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
            return Err(Error::MalformedRow {
                row: r,
                reason: format!("expected {n} entries in a square matrix, found {}", row.len()),
            });
        }
        StochasticMatrix::new(rows).map(Self)
    }

    pub fn n(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.0.get(from, to)
    }

    pub fn row(&self, from: usize) -> &[f64] {
        self.0.row(from)
    }

    pub fn as_stochastic(&self) -> &StochasticMatrix {
        &self.0
    }

    /// `A[x][x'] = 1` iff `P[x][x'] > threshold`.
    pub fn adjacency(&self, threshold: f64) -> AdjacencyMatrix {
        let n = self.n();
        let rows = (0..n)
            .map(|x| VertexSet::from_indices(n, (0..n).filter(|&y| self.get(x, y) > threshold)))
            .collect();
        AdjacencyMatrix { rows }
    }

    /// Adjacency at the default positivity threshold.
    pub fn support(&self) -> AdjacencyMatrix {
        self.adjacency(DEFAULT_POSITIVITY)
    }
}

/// Boolean transition structure of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    rows: Vec<VertexSet>,
}

impl AdjacencyMatrix {
    pub fn from_bits(bits: &[Vec<bool>]) -> Result<Self> {
        let n = bits.len();
        let mut rows = Vec::with_capacity(n);
        for (r, row) in bits.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedRow {
                    row: r,
                    reason: format!("expected {n} entries, found {}", row.len()),
                });
            }
            rows.push(VertexSet::from_indices(
                n,
                row.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i),
            ));
        }
        Ok(Self { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> bool {
        self.rows[from].contains(to)
    }

    pub fn successors(&self, from: usize) -> &VertexSet {
        &self.rows[from]
    }

    pub fn out_degree(&self, from: usize) -> usize {
        self.rows[from].len()
    }

    pub fn count_ones(&self) -> usize {
        self.rows.iter().map(VertexSet::len).sum()
    }

    /// For each state, the set of states that access it.
    pub fn predecessor_sets(&self) -> Vec<VertexSet> {
        let n = self.n();
        let mut cols = vec![VertexSet::empty(n); n];
        for (x, row) in self.rows.iter().enumerate() {
            for y in row.iter() {
                cols[y].insert(x);
            }
        }
        cols
    }

    fn transposed(&self) -> AdjacencyMatrix {
        AdjacencyMatrix {
            rows: self.predecessor_sets(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// gcd of all directed cycle lengths.
    pub period: usize,
}

/// Irreducibility and period of the transition graph.
pub fn validate_chain(p: &TransitionMatrix) -> StructureReport {
    structure(&p.support())
}

pub fn structure(a: &AdjacencyMatrix) -> StructureReport {
    let comps = strongly_connected_components(a);
    let irreducible = comps.iter().max().map_or(0, |&c| c + 1) == 1;
    let mut period = 0;
    for comp in 0..comps.iter().max().map_or(0, |&c| c + 1) {
        period = gcd(period, component_period(a, &comps, comp));
    }
    StructureReport {
        irreducible,
        aperiodic: period == 1,
        period,
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Kosaraju; returns a component id per vertex.
fn strongly_connected_components(a: &AdjacencyMatrix) -> Vec<usize> {
    let n = a.n();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![(start, a.successors(start).to_vec().into_iter())];
        while let Some((v, it)) = stack.last_mut() {
            match it.next() {
                Some(w) if !seen[w] => {
                    seen[w] = true;
                    let next = a.successors(w).to_vec().into_iter();
                    stack.push((w, next));
                }
                Some(_) => {}
                None => {
                    order.push(*v);
                    stack.pop();
                }
            }
        }
    }
    let t = a.transposed();
    let mut comp = vec![usize::MAX; n];
    let mut next_id = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = next_id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for w in t.successors(v).iter() {
                if comp[w] == usize::MAX {
                    comp[w] = next_id;
                    stack.push(w);
                }
            }
        }
        next_id += 1;
    }
    comp
}

/// gcd of `level(u) + 1 - level(v)` over edges inside one component; 0 if it has no cycle.
fn component_period(a: &AdjacencyMatrix, comps: &[usize], comp: usize) -> usize {
    let Some(root) = comps.iter().position(|&c| c == comp) else {
        return 0;
    };
    let n = a.n();
    let mut level = vec![usize::MAX; n];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g = 0usize;
    while let Some(u) = queue.pop_front() {
        for v in a.successors(u).iter().filter(|&v| comps[v] == comp) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                g = gcd(g, (level[u] + 1).abs_diff(level[v]));
            }
        }
    }
    g
}

/// Stationary distribution `mu` with `mu^T P = mu^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    mu: Vec<f64>,
}

impl StationaryDistribution {
    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.mu
    }

    /// `max_x |(mu^T P)_x - mu_x|`.
    pub fn residual(&self, p: &TransitionMatrix) -> f64 {
        let n = p.n();
        (0..n)
            .map(|y| {
                let flow: f64 = (0..n).map(|x| self.mu[x] * p.get(x, y)).sum();
                (flow - self.mu[y]).abs()
            })
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for StationaryDistribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.mu[i]
    }
}

pub fn stationary(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    if !validate_chain(p).irreducible {
        return Err(Error::NotIrreducible);
    }
    let n = p.n();
    let mut mu = if n <= DIRECT_SOLVE_MAX {
        solve_stationary(p)?
    } else {
        iterate_stationary(p)?
    };
    for m in mu.iter_mut() {
        *m = m.max(0.0);
    }
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= total);
    let out = StationaryDistribution { mu };
    let residual = out.residual(p);
    if residual > ROW_SUM_TOLERANCE {
        return Err(Error::Invalid(format!(
            "stationary residual {residual:e} exceeds {ROW_SUM_TOLERANCE:e}"
        )));
    }
    Ok(out)
}

/// `(P^T - I) mu = 0` with the last equation replaced by `sum(mu) = 1`.
fn solve_stationary(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = p.n();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] = p.get(c, r) - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..n {
        m[(n - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    m.lu()
        .solve(&b)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Invalid("singular stationary system".into()))
}

/// Lazy-chain power iteration, robust to periodicity.
fn iterate_stationary(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = p.n();
    let mut mu = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..POWER_ITERATION_CAP {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (x, &w) in mu.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (y, &pxy) in p.row(x).iter().enumerate() {
                next[y] += w * pxy;
            }
        }
        let mut delta: f64 = 0.0;
        for y in 0..n {
            let lazy = 0.5 * (mu[y] + next[y]);
            delta = delta.max((lazy - mu[y]).abs());
            mu[y] = lazy;
        }
        if delta < 1e-14 {
            return Ok(mu);
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        estimate: f64::NAN,
        gap: f64::NAN,
    })
}

/// `-sum_x mu_x sum_x' P[x][x'] ln P[x][x']`, in nats.
pub fn entropy_rate(p: &TransitionMatrix) -> Result<f64> {
    let mu = stationary(p)?;
    Ok(entropy_rate_with(p, &mu))
}

pub fn entropy_rate_with(p: &TransitionMatrix, mu: &StationaryDistribution) -> f64 {
    (0..p.n())
        .map(|x| mu[x] * p.row(x).iter().map(|&q| neg_xlogx(q)).sum::<f64>())
        .sum()
}

/// Perron root of a nonnegative adjacency matrix.
///
/// Iterates on `A + I` (primitive whenever `A` is irreducible) and brackets
/// the root between the Collatz–Wielandt min and max ratios until they agree
/// to relative tolerance `1e-10`.
pub fn spectral_radius(a: &AdjacencyMatrix) -> Result<f64> {
    const REL_TOL: f64 = 1e-10;
    let n = a.n();
    let mut v = vec![1.0f64; n];
    let mut w = vec![0.0f64; n];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..POWER_ITERATION_CAP {
        for x in 0..n {
            w[x] = v[x] + a.successors(x).iter().map(|y| v[y]).sum::<f64>();
        }
        lo = f64::INFINITY;
        hi = 0.0f64;
        for x in 0..n {
            let r = w[x] / v[x];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= REL_TOL * hi {
            return Ok(0.5 * (lo + hi) - 1.0);
        }
        let scale = w.iter().cloned().fold(0.0, f64::max);
        for x in 0..n {
            v[x] = w[x] / scale;
            if v[x] == 0.0 {
                v[x] = f64::MIN_POSITIVE;
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        estimate: 0.5 * (lo + hi) - 1.0,
        gap: hi - lo,
    })
}

/// The K-fold blocked chain: length-K words of the base chain.
///
/// Blocks are indexed by mixed-radix codes (first symbol most significant).
#[derive(Debug, Clone)]
pub struct BlockedChain {
    base: TransitionMatrix,
    adjacency: AdjacencyMatrix,
    block_len: usize,
    /// Realizable codes, ascending (= lexicographic order of the words).
    realizable: Vec<usize>,
}

pub fn block(p: &TransitionMatrix, k: usize, limits: &Limits) -> Result<BlockedChain> {
    if k == 0 {
        return Err(Error::Invalid("block length must be at least 1".into()));
    }
    let n = p.n();
    let total = match checked_power(n, k) {
        Some(t) if t <= limits.enumeration => t,
        _ => {
            return Err(Error::cap(
                "blocked alphabet",
                (n as u128).saturating_pow(k as u32),
                limits.enumeration,
            ))
        }
    };
    let mu = stationary(p)?;
    let adjacency = p.adjacency(limits.positivity);
    let mut realizable = Vec::new();
    // depth-first in increasing symbol order yields lexicographic output
    let mut stack: Vec<(usize, usize)> = (0..n)
        .rev()
        .filter(|&x| mu[x] > limits.positivity)
        .map(|x| (x, 1))
        .collect();
    while let Some((code, depth)) = stack.pop() {
        if depth == k {
            realizable.push(code);
            continue;
        }
        let last = code % n;
        let succ: Vec<usize> = adjacency.successors(last).to_vec();
        for &y in succ.iter().rev() {
            stack.push((code * n + y, depth + 1));
        }
    }
    debug_assert!(realizable.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(realizable.last().is_none_or(|&c| c < total));
    Ok(BlockedChain {
        base: p.clone(),
        adjacency,
        block_len: k,
        realizable,
    })
}

impl BlockedChain {
    pub fn base(&self) -> &TransitionMatrix {
        &self.base
    }

    pub fn base_adjacency(&self) -> &AdjacencyMatrix {
        &self.adjacency
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn n_states(&self) -> usize {
        self.base.n()
    }

    /// `N^K`, the size of the full blocked alphabet.
    pub fn n_blocks(&self) -> usize {
        self.n_states().pow(self.block_len as u32)
    }

    pub fn realizable(&self) -> &[usize] {
        &self.realizable
    }

    pub fn is_realizable(&self, code: usize) -> bool {
        self.realizable.binary_search(&code).is_ok()
    }

    pub fn word(&self, code: usize) -> Vec<usize> {
        crate::graph::decode_tuple(code, self.n_states(), self.block_len)
    }

    pub fn first(&self, code: usize) -> usize {
        code / self.n_states().pow(self.block_len as u32 - 1)
    }

    pub fn last(&self, code: usize) -> usize {
        code % self.n_states()
    }

    /// Block `from` can be followed by block `to`.
    pub fn accesses(&self, from: usize, to: usize) -> bool {
        self.is_realizable(from)
            && self.is_realizable(to)
            && self.adjacency.get(self.last(from), self.first(to))
    }
}
