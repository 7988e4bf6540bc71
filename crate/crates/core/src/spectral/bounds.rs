use crate::{Error, Result};

/// Upper bound on the grounded algebraic connectivity after grounding `m`
/// of `n` nodes.
///
/// Without degree information this is `m * d_max / ((n - m) * d_min)`. When
/// the total degree of the grounded nodes is known (for a single grounded
/// node, its degree `d_1`) the tighter `sum / ((n - m) * d_min)` is returned.
pub fn grounded_connectivity_bound(
    n: usize,
    d_max: usize,
    d_min: usize,
    m: usize,
    grounded_degree_sum: Option<usize>,
) -> Result<f64> {
    if m == 0 || m >= n {
        return Err(Error::Parameter(format!(
            "need 0 < m < n, got m = {m}, n = {n}"
        )));
    }
    if d_min == 0 || d_max < d_min {
        return Err(Error::Parameter(format!(
            "need 1 <= d_min <= d_max, got {d_min}, {d_max}"
        )));
    }
    let numerator = grounded_degree_sum.unwrap_or(m * d_max) as f64;
    Ok(numerator / ((n - m) as f64 * d_min as f64))
}

/// Network sizes beyond which grounding provably hurts a `c'`-expander.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSizes {
    /// Beyond this size `lambda2 > lambda_bar_1`.
    pub connectivity: f64,
    /// Beyond this size `rho > rho_bar`.
    pub eigenratio: f64,
}

pub fn threshold_sizes(c_prime: f64, d_max: usize, d_min: usize) -> Result<ThresholdSizes> {
    if !(c_prime > 0.0 && c_prime < 2.0) {
        return Err(Error::Parameter(format!("need 0 < c' < 2, got {c_prime}")));
    }
    if d_min == 0 || d_max < d_min {
        return Err(Error::Parameter(format!(
            "need 1 <= d_min <= d_max, got {d_min}, {d_max}"
        )));
    }
    let ratio = d_max as f64 / d_min as f64;
    Ok(ThresholdSizes {
        connectivity: 1.0 + ratio / c_prime,
        eigenratio: 1.0 + 2.0 * ratio / (c_prime * c_prime),
    })
}
