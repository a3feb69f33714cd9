use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::ModelInstance;
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::linalg::inverse_checked;

/// Outcome of the two spectral conditions for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// rho(beta C^-1 G).
    pub rho1: f64,
    /// rho(delta (MG)^T MG), or its cost-weighted analogue for heterogeneous costs.
    pub rho2: f64,
    pub a1_holds: bool,
    pub a2_holds: bool,
    pub margin1: f64,
    pub margin2: f64,
    /// Set when costs differ across agents and the cost-weighted conditions were used.
    pub generalized: bool,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.a1_holds && self.a2_holds
    }

    /// Label shown in reports: `A1`/`A2` or `generalized-A1`/`generalized-A2`.
    pub fn condition_names(&self) -> (&'static str, &'static str) {
        if self.generalized {
            ("generalized-A1", "generalized-A2")
        } else {
            ("A1", "A2")
        }
    }
}

/// Largest eigenvalue modulus of a square real matrix.
///
/// The support graph is split into strongly connected components first; the
/// spectrum is the union of the diagonal blocks' spectra, so acyclic parts
/// contribute their exact diagonal entries. Each cyclic block goes through a
/// real Schur decomposition, with power iteration as the fallback.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::numeric(format!("spectral radius of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    let mut support = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| support.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] != 0.0 {
                support.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut rho: f64 = 0.0;
    for scc in tarjan_scc(&support) {
        let idx: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        let block_rho = if idx.len() == 1 {
            m[(idx[0], idx[0])].abs()
        } else {
            let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
            block_radius(block)?
        };
        rho = rho.max(block_rho);
    }
    Ok(rho)
}

fn block_radius(block: DMatrix<f64>) -> Result<f64> {
    let n = block.nrows();
    let scale = crate::linalg::inf_norm(&block).max(f64::MIN_POSITIVE);
    // Francis steps can stall on spectra symmetric about the origin (bipartite
    // supports); a diagonal shift breaks the symmetry and is undone afterwards.
    for shift in [0.137, -0.291, 0.419, 0.0] {
        let s = shift * scale;
        let shifted = &block + DMatrix::identity(n, n) * s;
        if let Some(schur) = nalgebra::Schur::try_new(shifted, f64::EPSILON, 100 * n) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| (z - s).norm()).fold(0.0, f64::max));
        }
    }
    power_radius(&block)
}

/// Gelfand-style estimate `||A^k x||^(1/k)` from renormalized power steps.
fn power_radius(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut log_growth = Vec::with_capacity(TOLERANCES.power_iterations);
    let mut estimate = 0.0;
    for k in 1..=TOLERANCES.power_iterations {
        let y = a * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        log_growth.push(norm.ln());
        x = y / norm;
        if k >= 20 && k % 2 == 0 {
            // geometric mean over the second half damps periodic oscillation
            let half = &log_growth[k / 2..];
            let next = (half.iter().sum::<f64>() / half.len() as f64).exp();
            if (next - estimate).abs() <= TOLERANCES.spectral * next.max(f64::MIN_POSITIVE) {
                return Ok(next);
            }
            estimate = next;
        }
    }
    Err(Error::EigenNonConvergence { estimate })
}

/// Spectral radius of a symmetric matrix via its symmetric eigen decomposition.
pub fn symmetric_spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or(Error::EigenNonConvergence { estimate: f64::NAN })?;
    Ok(eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

/// Evaluates both spectral conditions.
///
/// A1 is checked on `beta C^-1 G`. A2 uses `delta (MG)^T MG` for a common
/// cost; with heterogeneous costs it uses `Q^T Q` with
/// `Q = beta C^-1/2 G B D^-1/2`, `B = (C - beta G)^-1`, `D = C^-1 + eta sigma2 I`,
/// which is the condition for the principal's first-order system to be
/// positive definite and coincides with the common-cost form.
pub fn check_assumptions(inst: &ModelInstance) -> Result<AssumptionReport> {
    let n = inst.n();
    let beta = inst.beta();
    let g = inst.g();
    let cinv = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / inst.cost(i) } else { 0.0 });
    let rho1 = spectral_radius(&(&cinv * g * beta))?;

    let generalized = inst.homogeneous_cost().is_none();
    let rho2 = if beta == 0.0 {
        0.0
    } else {
        match inst.homogeneous_cost() {
            Some(c) => {
                let lambda = beta / c;
                let delta = lambda * lambda / (1.0 + c * inst.params().risk());
                match inverse_checked(&(DMatrix::identity(n, n) - g * lambda), "I - lambda G") {
                    Ok(m) => {
                        let p = &m * g;
                        symmetric_spectral_radius(&(p.transpose() * &p * delta))?
                    }
                    Err(_) => f64::INFINITY,
                }
            }
            None => {
                let cmat = inst.cost_matrix();
                match inverse_checked(&(&cmat - g * beta), "C - beta G") {
                    Ok(b) => {
                        let risk = inst.params().risk();
                        let left = DMatrix::from_fn(n, n, |i, j| if i == j { inst.cost(i).powf(-0.5) } else { 0.0 });
                        let right = DMatrix::from_fn(n, n, |i, j| {
                            if i == j {
                                (1.0 / inst.cost(i) + risk).powf(-0.5)
                            } else {
                                0.0
                            }
                        });
                        let q = left * g * b * right * beta;
                        symmetric_spectral_radius(&(q.transpose() * &q))?
                    }
                    Err(_) => f64::INFINITY,
                }
            }
        }
    };
    Ok(AssumptionReport {
        rho1,
        rho2,
        a1_holds: rho1 < 1.0,
        a2_holds: rho2 < 1.0,
        margin1: 1.0 - rho1,
        margin2: 1.0 - rho2,
        generalized,
    })
}
