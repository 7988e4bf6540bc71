use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::spectral;
use crate::{Error, Result};

/// Attempt budget shared by the regular sampler and the expander rejection loop.
pub const MAX_ATTEMPTS: usize = 1000;

/// Samples a connected simple `d`-regular graph on `n` nodes.
///
/// Stubs are paired at random; pairs that would form a loop or a repeated
/// edge go back into the pool and are re-paired (Steger–Wormald style).
/// A dead end, or a disconnected result, restarts the whole attempt.
pub fn generate_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_regular_with(n, d, &mut rng)
}

pub fn generate_regular_with<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    check_regular_params(n, d)?;
    for _ in 0..MAX_ATTEMPTS {
        if let Some(edges) = try_pairing(n, d, rng) {
            let g = Graph::new(n, edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(Error::Generation(format!(
        "no connected simple {d}-regular graph on {n} nodes after {MAX_ATTEMPTS} attempts"
    )))
}

fn check_regular_params(n: usize, d: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Parameter(format!("need n >= 3, got {n}")));
    }
    if d == 0 || d >= n {
        return Err(Error::Parameter(format!(
            "need 0 < d < n, got d = {d}, n = {n}"
        )));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::Parameter(format!("n*d = {} is odd", n * d)));
    }
    Ok(())
}

fn try_pairing<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Option<Vec<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (1..=n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                continue;
            }
            *leftover.entry(a).or_default() += 1;
            *leftover.entry(b).or_default() += 1;
        }
        if !can_still_pair(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .iter()
            .flat_map(|(&v, &count)| std::iter::repeat_n(v, count))
            .collect();
    }
    Some(edges.into_iter().collect())
}

fn can_still_pair(edges: &BTreeSet<(usize, usize)>, leftover: &BTreeMap<usize, usize>) -> bool {
    if leftover.is_empty() {
        return true;
    }
    let nodes: Vec<usize> = leftover.keys().copied().collect();
    nodes
        .iter()
        .enumerate()
        .any(|(k, &a)| nodes[k + 1..].iter().any(|&b| !edges.contains(&(a, b))))
}

/// A regular graph accepted by the expander rejection loop.
#[derive(Debug, Clone)]
pub struct Expander {
    pub graph: Graph,
    pub lambda2: f64,
    /// Number of sampled graphs discarded because `lambda2 < c'`.
    pub rejections: usize,
}

/// Rejection-samples [`generate_regular_with`] until the algebraic
/// connectivity reaches `c_prime`.
pub fn generate_expander(n: usize, d: usize, c_prime: f64, seed: u64) -> Result<Expander> {
    check_regular_params(n, d)?;
    if !(c_prime > 0.0 && c_prime < 2.0) {
        return Err(Error::Parameter(format!("need 0 < c' < 2, got {c_prime}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for rejections in 0..MAX_ATTEMPTS {
        let graph = generate_regular_with(n, d, &mut rng)?;
        let lambda2 = spectral::spectral_summary(&graph)?.lambda2;
        if lambda2 >= c_prime {
            return Ok(Expander {
                graph,
                lambda2,
                rejections,
            });
        }
        best = best.max(lambda2);
    }
    Err(Error::Generation(format!(
        "no {d}-regular graph on {n} nodes with lambda2 >= {c_prime} after {MAX_ATTEMPTS} samples (best lambda2 = {best:.6})"
    )))
}
