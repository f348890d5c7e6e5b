//! Finite joint sources `(X, Z)` observed through a channel `X -> Y`.

use crate::chain::{stationary, StochasticMatrix, TransitionMatrix, ROW_SUM_TOLERANCE};
use crate::entropy::neg_xlogx;
use crate::error::{Error, Result};
use crate::graph::{characteristic_graph_pair, confusion_graph};

/// Entropies at or below this value count as zero.
pub const ZERO_ENTROPY: f64 = 1e-12;

/// Joint probability mass `Q[x][z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    nx: usize,
    nz: usize,
    q: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nx = rows.len();
        if nx == 0 {
            return Err(Error::Invalid("joint distribution has no rows".into()));
        }
        let nz = rows[0].len();
        if nz == 0 {
            return Err(Error::MalformedRow {
                row: 0,
                reason: "row is empty".into(),
            });
        }
        let mut q = Vec::with_capacity(nx * nz);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != nz {
                return Err(Error::MalformedRow {
                    row: r,
                    reason: format!("expected {nz} entries, found {}", row.len()),
                });
            }
            if let Some((c, v)) = row
                .iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite() || **v < 0.0)
            {
                return Err(Error::MalformedRow {
                    row: r,
                    reason: format!("entry {c} = {v} is not a probability"),
                });
            }
            q.extend(row);
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::Invalid(format!("joint mass sums to {total}, not 1")));
        }
        Ok(Self { nx, nz, q })
    }

    /// `Q[x][z] = P(X_n = x, X_{n-1} = z) = mu_z P[z][x]`.
    pub fn from_chain(p: &TransitionMatrix) -> Result<Self> {
        let mu = stationary(p)?;
        let n = p.n();
        let rows = (0..n)
            .map(|x| (0..n).map(|z| mu[z] * p.get(z, x)).collect())
            .collect();
        Self::new(rows)
    }

    /// `Q[x][z] = P(X = x) W[x][z]`.
    pub fn from_marginal_and_channel(px: &[f64], w: &StochasticMatrix) -> Result<Self> {
        if px.len() != w.rows() {
            return Err(Error::Invalid(format!(
                "marginal has {} entries but the channel has {} inputs",
                px.len(),
                w.rows()
            )));
        }
        let rows = (0..w.rows())
            .map(|x| w.row(x).iter().map(|&v| px[x] * v).collect())
            .collect();
        Self::new(rows)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    #[inline]
    pub fn get(&self, x: usize, z: usize) -> f64 {
        self.q[x * self.nz + z]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.nz).map(<[f64]>::to_vec).collect()
    }

    /// Distribution of `K` independent copies over `(X^K, Z^K)`, both indexed
    /// in mixed radix with the first copy most significant.
    pub fn iid_power(&self, k: usize) -> Result<Self> {
        let nx = crate::graph::checked_power(self.nx, k)
            .ok_or_else(|| Error::cap("iid power", u128::MAX, usize::MAX))?;
        let nz = crate::graph::checked_power(self.nz, k)
            .ok_or_else(|| Error::cap("iid power", u128::MAX, usize::MAX))?;
        let rows = (0..nx)
            .map(|xc| {
                let xs = crate::graph::decode_tuple(xc, self.nx, k);
                (0..nz)
                    .map(|zc| {
                        let zs = crate::graph::decode_tuple(zc, self.nz, k);
                        xs.iter().zip(&zs).map(|(&x, &z)| self.get(x, z)).product()
                    })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }
}

/// `H(X | Y, Z)` in nats for `P(x, y, z) = Q[x][z] W[x][y]`.
pub fn conditional_entropy_xyz(q: &JointDistribution, w: &StochasticMatrix) -> Result<f64> {
    if w.rows() != q.nx() {
        return Err(Error::Invalid(format!(
            "channel has {} inputs but the source alphabet has {}",
            w.rows(),
            q.nx()
        )));
    }
    let mut h = 0.0;
    for y in 0..w.cols() {
        for z in 0..q.nz() {
            let masses: Vec<f64> = (0..q.nx()).map(|x| q.get(x, z) * w.get(x, y)).collect();
            let pyz: f64 = masses.iter().sum();
            if pyz <= 0.0 {
                continue;
            }
            // sum_x p(x,y,z) ln(p(y,z) / p(x,y,z))
            h += masses.iter().map(|&m| pyz * neg_xlogx(m / pyz)).sum::<f64>();
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop1Check {
    /// Confusion-graph edges are all characteristic-graph edges.
    pub subset: bool,
    pub entropy: f64,
    /// `subset` agrees with `entropy <= ZERO_ENTROPY`.
    pub consistent: bool,
}

/// Compares the graph-inclusion test with the numerical conditional entropy.
pub fn check_prop1(q: &JointDistribution, w: &StochasticMatrix, threshold: f64) -> Result<Prop1Check> {
    let entropy = conditional_entropy_xyz(q, w)?;
    let subset = confusion_graph(w, threshold).is_edge_subset_of(&characteristic_graph_pair(q, threshold));
    Ok(Prop1Check {
        subset,
        entropy,
        consistent: subset == (entropy <= ZERO_ENTROPY),
    })
}

/// `H(X | Z)` in nats.
pub fn conditional_entropy_given_z(q: &JointDistribution) -> f64 {
    (0..q.nz())
        .map(|z| {
            let col: Vec<f64> = (0..q.nx()).map(|x| q.get(x, z)).collect();
            let pz: f64 = col.iter().sum();
            pz * crate::entropy::entropy_of(&col)
        })
        .sum()
}

/// `H(X)` in nats.
pub fn marginal_entropy_x(q: &JointDistribution) -> f64 {
    let px: Vec<f64> = (0..q.nx())
        .map(|x| (0..q.nz()).map(|z| q.get(x, z)).sum())
        .collect();
    crate::entropy::entropy_of(&px)
}
