//! Lumpings of K-symbol blocks and characteristic graphs of blocked sources
//! with side information.
//!
//! In the blocked chain every unrealizable word has an all-zero column, so it
//! is adjacent to every other word of the characteristic graph. Those words
//! form one clique that can be merged into any clique of a partition of the
//! realizable words; the clique partition number of the blocked graph is
//! therefore the one of the realizable-induced subgraph (plus one only when
//! nothing is realizable at all).

use crate::bitset::VertexSet;
use crate::chain::{block, spectral_radius, stationary, BlockedChain, StochasticMatrix, TransitionMatrix};
use crate::error::{Error, Result};
use crate::graph::{characteristic_graph_pair, checked_power, decode_tuple, disjoint_accessor_graph, Graph};
use crate::jointsource::JointDistribution;
use crate::partition::{clique_partition_exact_capped, clique_partition_greedy, Solver};
use crate::Limits;

/// Per pair of first symbols: no realizable block leads into both.
fn separated_first_symbols(b: &BlockedChain) -> Vec<VertexSet> {
    let n = b.n_states();
    let a = b.base_adjacency();
    let mut lasts = VertexSet::empty(n);
    for &code in b.realizable() {
        lasts.insert(b.last(code));
    }
    let accessors: Vec<VertexSet> = (0..n)
        .map(|f| {
            let mut s = VertexSet::from_indices(n, (0..n).filter(|&z| a.get(z, f)));
            s.intersect_with(&lasts);
            s
        })
        .collect();
    (0..n)
        .map(|f| VertexSet::from_indices(n, (0..n).filter(|&h| !accessors[f].intersects(&accessors[h]))))
        .collect()
}

fn graph_cap(vertices: usize, limits: &Limits, what: &'static str) -> Result<()> {
    if vertices > limits.graph_vertices {
        Err(Error::cap(what, vertices as u128, limits.graph_vertices))
    } else {
        Ok(())
    }
}

/// Characteristic graph of the blocked chain over all `N^K` words.
pub fn blocked_characteristic_graph(b: &BlockedChain, limits: &Limits) -> Result<Graph> {
    let total = b.n_blocks();
    graph_cap(total, limits, "blocked characteristic graph")?;
    let separated = separated_first_symbols(b);
    let mut g = Graph::empty(total);
    for u in 0..total {
        let ru = b.is_realizable(u);
        for v in u + 1..total {
            if !ru || !b.is_realizable(v) || separated[b.first(u)].contains(b.first(v)) {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Characteristic graph induced on the realizable words; vertex `i` is
/// `b.realizable()[i]`.
pub fn realizable_characteristic_graph(b: &BlockedChain, limits: &Limits) -> Result<Graph> {
    let words = b.realizable();
    graph_cap(words.len(), limits, "realizable characteristic graph")?;
    let separated = separated_first_symbols(b);
    let mut g = Graph::empty(words.len());
    for (i, &u) in words.iter().enumerate() {
        for (j, &v) in words.iter().enumerate().skip(i + 1) {
            if separated[b.first(u)].contains(b.first(v)) {
                g.add_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Size of the lumped alphabet for K-blocks against the entropy bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockAnalysis {
    pub k: usize,
    /// Clique partition size of the blocked characteristic graph.
    pub m_k: usize,
    /// Number of realizable words.
    pub s_k: usize,
    /// `ln(M_K) / K`.
    pub rate: f64,
    /// `ln λ` of the base adjacency.
    pub log_lambda: f64,
    /// `m_k` is a minimum rather than a greedy upper bound.
    pub exact: bool,
}

pub fn block_analysis(p: &TransitionMatrix, k: usize, solver: Solver, limits: &Limits) -> Result<BlockAnalysis> {
    let b = block(p, k, limits)?;
    let s_k = b.realizable().len();
    let has_unrealizable = s_k < b.n_blocks();
    let effective = s_k + usize::from(has_unrealizable);
    let use_exact = match solver {
        Solver::Exact if effective > limits.exact_vertices => {
            return Err(Error::CapExceeded {
                what: "exact solver",
                needed: effective as u128,
                cap: limits.exact_vertices,
                hint: "; use the greedy solver",
            })
        }
        Solver::Exact => true,
        Solver::Auto => effective <= limits.exact_vertices,
        Solver::Greedy => false,
    };
    let g = realizable_characteristic_graph(&b, limits)?;
    let gamma = if use_exact {
        clique_partition_exact_capped(&g, limits.exact_vertices)?.size()
    } else {
        clique_partition_greedy(&g).size()
    };
    let m_k = gamma + usize::from(s_k == 0 && has_unrealizable);
    let lambda = spectral_radius(&p.adjacency(limits.positivity))?;
    Ok(BlockAnalysis {
        k,
        m_k,
        s_k,
        rate: (m_k as f64).ln() / k as f64,
        log_lambda: lambda.ln(),
        exact: use_exact,
    })
}

/// A Markov source `X` observed by the decoder through a memoryless channel
/// `W: X -> Z`, analysed in blocks of `k` symbols.
#[derive(Debug, Clone)]
pub struct JointBlockSource {
    pub base: TransitionMatrix,
    pub channel: StochasticMatrix,
    pub k: usize,
}

impl JointBlockSource {
    pub fn new(base: TransitionMatrix, channel: StochasticMatrix, k: usize) -> Result<Self> {
        if channel.rows() != base.n() {
            return Err(Error::Invalid(format!(
                "channel has {} inputs but the chain has {} states",
                channel.rows(),
                base.n()
            )));
        }
        if k == 0 {
            return Err(Error::Invalid("block length must be at least 1".into()));
        }
        Ok(Self { base, channel, k })
    }

    /// Single-letter joint distribution `Q[x][z] = mu_x W[x][z]`.
    pub fn single_letter(&self) -> Result<JointDistribution> {
        let mu = stationary(&self.base)?;
        JointDistribution::from_marginal_and_channel(mu.as_slice(), &self.channel)
    }
}

/// Characteristic graph of `(X_1^K, Z_1^K)` evaluated pair by pair over every
/// side-information word `z`.
pub fn sideinfo_characteristic_graph_direct(j: &JointBlockSource, limits: &Limits) -> Result<Graph> {
    let (n, nz, k) = (j.base.n(), j.channel.cols(), j.k);
    let words = checked_power(n, k);
    let sides = checked_power(nz, k);
    let pairs = words.zip(sides).and_then(|(a, b)| a.checked_mul(b));
    let (words, sides) = match (words, sides, pairs) {
        (Some(a), Some(b), Some(ab)) if ab <= limits.enumeration => (a, b),
        _ => {
            return Err(Error::cap(
                "joint block support",
                ((n * nz) as u128).saturating_pow(k as u32),
                limits.enumeration,
            ))
        }
    };
    graph_cap(words, limits, "side-information graph")?;
    let b = block(&j.base, k, limits)?;
    let thr = limits.positivity;
    let supports: Vec<VertexSet> = (0..words)
        .map(|xc| {
            if !b.is_realizable(xc) {
                return VertexSet::empty(sides);
            }
            let xs = decode_tuple(xc, n, k);
            VertexSet::from_indices(
                sides,
                (0..sides).filter(|&zc| {
                    let zs = decode_tuple(zc, nz, k);
                    xs.iter().zip(&zs).all(|(&x, &z)| j.channel.get(x, z) > thr)
                }),
            )
        })
        .collect();
    Ok(disjoint_accessor_graph(&supports))
}

/// Same graph as [`sideinfo_characteristic_graph_direct`], assembled as the
/// K-fold co-normal product of the single-letter characteristic graph plus
/// every pair touching an unrealizable word.
pub fn sideinfo_characteristic_graph_formula(j: &JointBlockSource, limits: &Limits) -> Result<Graph> {
    let b = block(&j.base, j.k, limits)?;
    let mut g = sideinfo_conormal_part(j, limits)?;
    let total = g.len();
    for u in (0..total).filter(|&u| !b.is_realizable(u)) {
        for v in 0..total {
            if v != u {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// The co-normal product part alone.
pub fn sideinfo_conormal_part(j: &JointBlockSource, limits: &Limits) -> Result<Graph> {
    let single = characteristic_graph_pair(&j.single_letter()?, limits.positivity);
    single.conormal_product(j.k, limits.graph_vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::characteristic_graph_chain;
    use crate::partition::clique_partition_exact;
    use crate::testutil::cycle4_chain;

    /// Edges straight from the blocked access relation.
    fn brute_blocked_graph(b: &BlockedChain) -> Graph {
        let t = b.n_blocks();
        let mut g = Graph::empty(t);
        for u in 0..t {
            for v in u + 1..t {
                if (0..t).all(|x| !(b.accesses(x, u) && b.accesses(x, v))) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    #[test]
    fn k1_is_the_chain_graph() {
        let p = cycle4_chain();
        let b = block(&p, 1, &Limits::default()).unwrap();
        assert_eq!(
            blocked_characteristic_graph(&b, &Limits::default()).unwrap(),
            characteristic_graph_chain(&p.support())
        );
    }

    #[test]
    fn cycle4_k2_structure() {
        let limits = Limits::default();
        let b = block(&cycle4_chain(), 2, &limits).unwrap();
        let g = blocked_characteristic_graph(&b, &limits).unwrap();
        assert_eq!(g, brute_blocked_graph(&b));
        let unrealizable: Vec<usize> = (0..16).filter(|&c| !b.is_realizable(c)).collect();
        assert_eq!(unrealizable.len(), 8);
        for &u in &unrealizable {
            assert_eq!(g.degree(u), 15);
        }
        let restricted = realizable_characteristic_graph(&b, &limits).unwrap();
        assert_eq!(restricted, g.induced(b.realizable()));
    }

    #[test]
    fn cycle4_block_analysis() {
        let p = cycle4_chain();
        let limits = Limits::default();
        let a1 = block_analysis(&p, 1, Solver::Auto, &limits).unwrap();
        assert_eq!((a1.m_k, a1.s_k), (2, 4));
        let a2 = block_analysis(&p, 2, Solver::Auto, &limits).unwrap();
        assert_eq!((a2.m_k, a2.s_k), (4, 8));
        assert!(a2.exact);
        assert!((a2.log_lambda - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn realizable_reduction_matches_full_gamma() {
        let limits = Limits::default();
        let p = TransitionMatrix::new(vec![
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.3, 0.7],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        for k in 1..=2 {
            let b = block(&p, k, &limits).unwrap();
            let full = clique_partition_exact(&blocked_characteristic_graph(&b, &limits).unwrap())
                .unwrap()
                .size();
            let a = block_analysis(&p, k, Solver::Exact, &limits).unwrap();
            assert_eq!(a.m_k, full);
        }
    }

    #[test]
    fn exact_solver_cap_on_blocks() {
        let limits = Limits {
            exact_vertices: 8,
            ..Limits::default()
        };
        let p = cycle4_chain();
        assert!(block_analysis(&p, 2, Solver::Exact, &limits).is_err());
        let a = block_analysis(&p, 2, Solver::Auto, &limits).unwrap();
        assert!(!a.exact);
    }

    #[test]
    fn perfect_side_information() {
        let limits = Limits::default();
        let j = JointBlockSource::new(cycle4_chain(), StochasticMatrix::identity(4), 1).unwrap();
        assert_eq!(sideinfo_characteristic_graph_direct(&j, &limits).unwrap(), Graph::complete(4));
        assert_eq!(sideinfo_characteristic_graph_formula(&j, &limits).unwrap(), Graph::complete(4));
    }

    #[test]
    fn useless_side_information() {
        let limits = Limits::default();
        let w = StochasticMatrix::new(vec![vec![0.5, 0.5]; 4]).unwrap();
        let j = JointBlockSource::new(cycle4_chain(), w, 2).unwrap();
        let direct = sideinfo_characteristic_graph_direct(&j, &limits).unwrap();
        let b = block(&j.base, 2, &limits).unwrap();
        for (u, v) in direct.edges() {
            assert!(!b.is_realizable(u) || !b.is_realizable(v));
        }
        assert_eq!(direct, sideinfo_characteristic_graph_formula(&j, &limits).unwrap());
        // strict superset of the (empty) co-normal part
        assert_eq!(sideinfo_conormal_part(&j, &limits).unwrap().edge_count(), 0);
        assert!(direct.edge_count() > 0);
    }

    #[test]
    fn channel_dimension_checked() {
        assert!(JointBlockSource::new(cycle4_chain(), StochasticMatrix::identity(3), 1).is_err());
        assert!(JointBlockSource::new(cycle4_chain(), StochasticMatrix::identity(4), 0).is_err());
    }
}
