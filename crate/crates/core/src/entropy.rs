//! Scalar entropy helpers. All quantities are in nats.

/// `-p ln p` with the convention `0 ln 0 = 0`.
pub fn neg_xlogx(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

/// Binary entropy `h_b(p) = -p ln p - (1-p) ln(1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    neg_xlogx(p) + neg_xlogx(1.0 - p)
}

/// Shannon entropy of a (not necessarily normalized) mass vector, normalized by its sum.
pub fn entropy_of(masses: &[f64]) -> f64 {
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    masses.iter().map(|&m| neg_xlogx(m / total)).sum()
}

pub const NATS_PER_BIT: f64 = std::f64::consts::LN_2;
