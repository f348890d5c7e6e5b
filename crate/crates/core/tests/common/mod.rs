#![allow(dead_code)]

use markov_lumping::{Graph, JointDistribution, TransitionMatrix};
use rand::Rng;

pub fn cycle4() -> TransitionMatrix {
    TransitionMatrix::new(vec![
        vec![0.5, 0.0, 0.5, 0.0],
        vec![0.0, 0.5, 0.0, 0.5],
        vec![0.0, 0.5, 0.5, 0.0],
        vec![0.5, 0.0, 0.0, 0.5],
    ])
    .unwrap()
}

pub fn two_state(eps: f64) -> TransitionMatrix {
    TransitionMatrix::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]).unwrap()
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= s);
}

/// Irreducible chain: a random Hamiltonian cycle plus extra edges with
/// probability `density`, each row capped at `max_degree` ones.
pub fn sparse_irreducible<R: Rng>(rng: &mut R, n: usize, density: f64, max_degree: usize) -> TransitionMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut support = vec![vec![false; n]; n];
    for i in 0..n {
        support[perm[i]][perm[(i + 1) % n]] = true;
    }
    for row in support.iter_mut() {
        for y in 0..n {
            if row.iter().filter(|&&b| b).count() >= max_degree {
                break;
            }
            if rng.gen_bool(density) {
                row[y] = true;
            }
        }
    }
    weights_on(rng, &support)
}

/// Random positive weights on a fixed support.
pub fn weights_on<R: Rng>(rng: &mut R, support: &[Vec<bool>]) -> TransitionMatrix {
    let rows = support
        .iter()
        .map(|s| {
            let mut r: Vec<f64> = s
                .iter()
                .map(|&b| if b { rng.gen_range(0.05..1.0) } else { 0.0 })
                .collect();
            normalize(&mut r);
            r
        })
        .collect();
    TransitionMatrix::new(rows).unwrap()
}

/// Irreducible chain mixing large and small (below `1/n`) transitions.
pub fn mixed_scale<R: Rng>(rng: &mut R, n: usize) -> TransitionMatrix {
    let base = sparse_irreducible(rng, n, 0.4, n);
    let rows = (0..n)
        .map(|x| {
            let mut r: Vec<f64> = base
                .row(x)
                .iter()
                .map(|&p| {
                    if p == 0.0 {
                        0.0
                    } else if rng.gen_bool(0.5) {
                        rng.gen_range(0.0005..0.2) / n as f64
                    } else {
                        p
                    }
                })
                .collect();
            normalize(&mut r);
            r
        })
        .collect();
    TransitionMatrix::new(rows).unwrap()
}

pub fn positive<R: Rng>(rng: &mut R, n: usize) -> TransitionMatrix {
    weights_on(rng, &vec![vec![true; n]; n])
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Joint distribution with the given support pattern (row-major bits) and
/// uniform magnitudes on it.
pub fn joint_with_support<R: Rng>(rng: &mut R, nx: usize, nz: usize, pattern: u64) -> JointDistribution {
    let mut cells: Vec<f64> = (0..nx * nz)
        .map(|i| if pattern >> i & 1 == 1 { rng.gen_range(f64::EPSILON..1.0) } else { 0.0 })
        .collect();
    normalize(&mut cells);
    JointDistribution::new(cells.chunks(nz).map(<[f64]>::to_vec).collect()).unwrap()
}

pub fn random_channel<R: Rng>(rng: &mut R, nx: usize, nz: usize, zero_prob: f64) -> markov_lumping::StochasticMatrix {
    let rows = (0..nx)
        .map(|_| {
            let keep = rng.gen_range(0..nz);
            let mut r: Vec<f64> = (0..nz)
                .map(|z| if z != keep && rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.05..1.0) })
                .collect();
            normalize(&mut r);
            r
        })
        .collect();
    markov_lumping::StochasticMatrix::new(rows).unwrap()
}
