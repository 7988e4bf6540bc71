//! Agent dynamics, consensusability and the scalable gain design.
//!
//! Agents follow `x_i(k+1) = A x_i(k) + B u_i(k)` with a single input. The
//! consensus protocol applies `u_i = K sum_j alpha_ij (x_j - x_i)`, so the
//! network is stable on the disagreement subspace exactly when
//! `A - lambda B K` is Schur for every nonzero Laplacian eigenvalue.
//!
//! The graph-independent design picks `K = eps B'PA / (B'PB + R)` from a
//! solution `P` of the modified algebraic Riccati inequality
//!
//! ```text
//! P - A'PA + (1 - sigma^2) A'PB B'PA / (B'PB + R) > 0
//! ```
//!
//! which makes `A - lambda B K` Schur for every `lambda` in `[c', 2]`.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::Serialize;

use crate::spectral::symmetric_eigenvalues;
use crate::{Error, Result};

pub type Gain = RowDVector<f64>;

/// Eigenvalues within this distance of the unit circle count as marginal,
/// not unstable.
const UNIT_CIRCLE_TOL: f64 = 1e-7;
const SCHUR_TOL: f64 = 1e-12;
/// Points of the `[c', 2]` grid used to verify a design.
pub const VERIFY_GRID: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentDynamics {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl AgentDynamics {
    /// Checks shapes and controllability of `(A, B)`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Parameter(format!(
                "A is {}x{}, not square",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != a.nrows() {
            return Err(Error::Parameter(format!(
                "B has {} rows but A is {}x{}",
                b.len(),
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let mut ctrb = DMatrix::zeros(n, n);
        let mut col = b.clone();
        for k in 0..n {
            ctrb.set_column(k, &col);
            col = &a * col;
        }
        let scale = ctrb.amax().max(1.0);
        if ctrb.rank(1e-10 * scale) < n {
            return Err(Error::Parameter("(A, B) is not controllable".into()));
        }
        Ok(AgentDynamics { a, b })
    }

    /// Row-major `A` and column `B`.
    pub fn from_rows(a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let n = a.len();
        if n == 0 || a.iter().any(|row| row.len() != n) {
            return Err(Error::Parameter(
                "A must be a non-empty square row-major matrix".into(),
            ));
        }
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        Self::new(
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_column_slice(b),
        )
    }

    /// Discrete-time double integrator (position, velocity).
    pub fn double_integrator() -> Self {
        Self::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]], &[0.0, 1.0]).unwrap()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// `A - lambda B K`.
    pub fn closed_loop(&self, lambda: f64, k: &Gain) -> DMatrix<f64> {
        &self.a - (&self.b * k) * lambda
    }
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn is_schur(m: &DMatrix<f64>) -> bool {
    spectral_radius(m) < 1.0 - SCHUR_TOL
}

/// `1 / prod |lambda_u(A)|` over eigenvalues strictly outside the unit
/// circle; 1 when there are none.
pub fn sigma_tilde_of(dyn_: &AgentDynamics) -> f64 {
    let product: f64 = dyn_
        .a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .filter(|&r| r > 1.0 + UNIT_CIRCLE_TOL)
        .product();
    1.0 / product
}

/// `sigma_tilde - (1 - rho) / (1 + rho)`; positive iff consensusable.
pub fn consensusability_margin(sigma_tilde: f64, rho: f64) -> f64 {
    sigma_tilde - (1.0 - rho) / (1.0 + rho)
}

/// Smallest `c'` admitted by the design for the given instability.
pub fn min_c_prime(sigma_tilde: f64) -> f64 {
    2.0 * (1.0 - sigma_tilde) / (1.0 + sigma_tilde)
}

/// Admissible `sigma` range `[(2 - c')/(2 + c'), sigma_tilde)`.
pub fn sigma_window(c_prime: f64, sigma_tilde: f64) -> (f64, f64) {
    ((2.0 - c_prime) / (2.0 + c_prime), sigma_tilde)
}

/// Admissible `eps` range `[(1 - sigma)/c', (1 + sigma)/2]`.
pub fn epsilon_window(c_prime: f64, sigma: f64) -> (f64, f64) {
    ((1.0 - sigma) / c_prime, (1.0 + sigma) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MareOptions {
    /// Shift `q I` added to the Riccati equality; the inequality then holds
    /// with margin `q`.
    pub q: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MareOptions {
    fn default() -> Self {
        MareOptions {
            q: 0.1,
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MareSolution {
    pub p: DMatrix<f64>,
    pub iterations: usize,
    /// Smallest eigenvalue of the Riccati inequality left-hand side.
    pub margin: f64,
}

fn riccati_terms(dyn_: &AgentDynamics, p: &DMatrix<f64>, r: f64) -> (DVector<f64>, f64) {
    // (A'PB, B'PB + R)
    let pb = p * &dyn_.b;
    (dyn_.a.transpose() * &pb, dyn_.b.dot(&pb) + r)
}

/// Left-hand side of the modified Riccati inequality.
pub fn mari_lhs(dyn_: &AgentDynamics, p: &DMatrix<f64>, sigma: f64, r: f64) -> DMatrix<f64> {
    let (apb, denom) = riccati_terms(dyn_, p, r);
    let a = &dyn_.a;
    p - a.transpose() * p * a + (&apb * apb.transpose()) * ((1.0 - sigma * sigma) / denom)
}

pub fn mari_margin(dyn_: &AgentDynamics, p: &DMatrix<f64>, sigma: f64, r: f64) -> Result<f64> {
    let lhs = mari_lhs(dyn_, p, sigma, r);
    let sym = (&lhs + lhs.transpose()) * 0.5;
    Ok(symmetric_eigenvalues(&sym)?[0])
}

/// Fixed-point iteration on the shifted modified Riccati equality
/// `P = A'PA - (1 - sigma^2) A'PB B'PA / (B'PB + R) + q I`, from `P = I`.
pub fn solve_mare(
    dyn_: &AgentDynamics,
    sigma: f64,
    r: f64,
    opts: &MareOptions,
) -> Result<MareSolution> {
    let sigma_tilde = sigma_tilde_of(dyn_);
    if !(0.0..sigma_tilde).contains(&sigma) {
        return Err(Error::Parameter(format!(
            "sigma = {sigma} outside [0, sigma_tilde = {sigma_tilde})"
        )));
    }
    if r < 0.0 || !r.is_finite() {
        return Err(Error::Parameter(format!("R = {r} must be non-negative")));
    }
    if opts.q <= 0.0 {
        return Err(Error::Parameter(format!(
            "shift q = {} must be positive",
            opts.q
        )));
    }
    let n = dyn_.state_dim();
    let a = &dyn_.a;
    let shift = DMatrix::<f64>::identity(n, n) * opts.q;
    let mut p = DMatrix::<f64>::identity(n, n);
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let (apb, denom) = riccati_terms(dyn_, &p, r);
        let mut next = a.transpose() * &p * a
            - (&apb * apb.transpose()) * ((1.0 - sigma * sigma) / denom)
            + &shift;
        next = (&next + next.transpose()) * 0.5;
        residual = (&next - &p).amax();
        if !residual.is_finite() {
            return Err(Error::Solver(format!(
                "Riccati iteration diverged at step {it}"
            )));
        }
        p = next;
        if residual < opts.tol {
            let margin = mari_margin(dyn_, &p, sigma, r)?;
            let floor = 0.5 * opts.q;
            if margin < floor {
                return Err(Error::Solver(format!(
                    "Riccati inequality margin {margin:e} below {floor:e}"
                )));
            }
            return Ok(MareSolution {
                p,
                iterations: it,
                margin,
            });
        }
    }
    Err(Error::Solver(format!(
        "Riccati iteration did not converge in {} steps (last residual {residual:e})",
        opts.max_iter
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct GainDesign {
    #[serde(serialize_with = "ser_row")]
    pub k: Gain,
    #[serde(skip)]
    pub p: DMatrix<f64>,
    pub r: f64,
    pub sigma: f64,
    pub epsilon: f64,
    /// Lower end of the eigenvalue interval the gain is certified for.
    pub c_prime: f64,
    /// Upper end of that interval (2 for the scalable design).
    pub lambda_max: f64,
    pub sigma_tilde: f64,
    pub mari_margin: f64,
}

fn ser_row<S: serde::Serializer>(k: &Gain, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(k.iter())
}

impl GainDesign {
    /// Writes the gain as one CSV row: `k1..kn,sigma,epsilon,c_prime,r,sigma_tilde`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.k.len()).map(|i| format!("k{i}")).collect();
        header.extend(["sigma", "epsilon", "c_prime", "r", "sigma_tilde"].map(String::from));
        w.write_record(&header)?;
        let mut row: Vec<String> = self.k.iter().map(f64::to_string).collect();
        row.extend(
            [
                self.sigma,
                self.epsilon,
                self.c_prime,
                self.r,
                self.sigma_tilde,
            ]
            .map(|x| x.to_string()),
        );
        w.write_record(&row)?;
        w.flush()?;
        Ok(())
    }
}

/// Largest `rho(A - lambda B K)` over a uniform grid of `[lo, hi]`.
pub fn interval_radius(dyn_: &AgentDynamics, k: &Gain, lo: f64, hi: f64, points: usize) -> f64 {
    (0..points)
        .map(|i| {
            let t = if points == 1 {
                0.0
            } else {
                i as f64 / (points - 1) as f64
            };
            spectral_radius(&dyn_.closed_loop(lo + t * (hi - lo), k))
        })
        .fold(0.0, f64::max)
}

/// Graph-independent gain certified for every Laplacian eigenvalue in
/// `[c', 2]`. `sigma` and `epsilon` default to the midpoints of their windows.
pub fn design_gain(
    dyn_: &AgentDynamics,
    c_prime: f64,
    r: f64,
    sigma: Option<f64>,
    epsilon: Option<f64>,
    opts: &MareOptions,
) -> Result<GainDesign> {
    let sigma_tilde = sigma_tilde_of(dyn_);
    let c_lo = min_c_prime(sigma_tilde);
    if !(c_prime > c_lo && c_prime < 2.0) {
        return Err(Error::Design(format!(
            "c' = {c_prime} outside ({c_lo}, 2) required by sigma_tilde = {sigma_tilde}"
        )));
    }
    let (s_lo, s_hi) = sigma_window(c_prime, sigma_tilde);
    if s_lo >= s_hi {
        return Err(Error::Design(format!(
            "empty sigma window [{s_lo}, {s_hi})"
        )));
    }
    let sigma = match sigma {
        Some(s) if s < s_lo || s >= s_hi => {
            return Err(Error::Design(format!(
                "sigma = {s} outside [{s_lo}, {s_hi})"
            )));
        }
        Some(s) => s,
        None => 0.5 * (s_lo + s_hi),
    };
    let (e_lo, e_hi) = epsilon_window(c_prime, sigma);
    let epsilon = match epsilon {
        Some(e) if e < e_lo || e > e_hi => {
            return Err(Error::Design(format!(
                "epsilon = {e} outside [{e_lo}, {e_hi}]"
            )));
        }
        Some(e) => e,
        None => 0.5 * (e_lo + e_hi),
    };
    let sol = solve_mare(dyn_, sigma, r, opts)?;
    let (apb, denom) = riccati_terms(dyn_, &sol.p, r);
    let k = apb.transpose() * (epsilon / denom);
    let worst = interval_radius(dyn_, &k, c_prime, 2.0, VERIFY_GRID);
    if worst >= 1.0 - SCHUR_TOL {
        return Err(Error::Design(format!(
            "gain fails verification: max radius {worst} on [{c_prime}, 2]"
        )));
    }
    Ok(GainDesign {
        k,
        p: sol.p,
        r,
        sigma,
        epsilon,
        c_prime,
        lambda_max: 2.0,
        sigma_tilde,
        mari_margin: sol.margin,
    })
}

/// Graph-specific gain `K = 2/(lambda2 + lambdaN) B'PA / B'PB` with `P`
/// from the Riccati equality at `R = 0` and `sigma` midway in
/// `((1 - rho)/(1 + rho), sigma_tilde)`.
pub fn design_gain_eigen(
    dyn_: &AgentDynamics,
    lambda2: f64,
    lambda_n: f64,
    opts: &MareOptions,
) -> Result<GainDesign> {
    if !(lambda2 > 0.0 && lambda_n >= lambda2) {
        return Err(Error::Parameter(format!(
            "need 0 < lambda2 <= lambdaN, got {lambda2}, {lambda_n}"
        )));
    }
    let sigma_tilde = sigma_tilde_of(dyn_);
    let rho = lambda2 / lambda_n;
    let floor = (1.0 - rho) / (1.0 + rho);
    if consensusability_margin(sigma_tilde, rho) <= 0.0 {
        return Err(Error::Design(format!(
            "not consensusable: (1 - rho)/(1 + rho) = {floor} >= sigma_tilde = {sigma_tilde}"
        )));
    }
    let sigma = 0.5 * (floor + sigma_tilde);
    let sol = solve_mare(dyn_, sigma, 0.0, opts)?;
    let (apb, denom) = riccati_terms(dyn_, &sol.p, 0.0);
    let epsilon = 2.0 / (lambda2 + lambda_n);
    let k = apb.transpose() * (epsilon / denom);
    let worst = interval_radius(dyn_, &k, lambda2, lambda_n, VERIFY_GRID);
    if worst >= 1.0 - SCHUR_TOL {
        return Err(Error::Design(format!(
            "gain fails verification: max radius {worst} on [{lambda2}, {lambda_n}]"
        )));
    }
    Ok(GainDesign {
        k,
        p: sol.p,
        r: 0.0,
        sigma,
        epsilon,
        c_prime: lambda2,
        lambda_max: lambda_n,
        sigma_tilde,
        mari_margin: sol.margin,
    })
}

/// Worst `rho(A - lambda B K)` over a Laplacian spectrum. With
/// `exclude_zero` the first (smallest) eigenvalue is skipped, which is the
/// consensus mode of an ungrounded network.
pub fn closed_loop_radius(
    dyn_: &AgentDynamics,
    k: &Gain,
    laplacian_eigs: &[f64],
    exclude_zero: bool,
) -> f64 {
    let skip = usize::from(exclude_zero);
    laplacian_eigs
        .iter()
        .skip(skip)
        .map(|&l| spectral_radius(&dyn_.closed_loop(l, k)))
        .fold(0.0, f64::max)
}
