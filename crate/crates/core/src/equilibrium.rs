//! Effort game: influence matrix, centralities, Nash equilibrium and agent payoffs.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::TOLERANCES;
use crate::error::{Condition, Error, Result};
use crate::linalg::{col_sums, inverse_checked, row_sums, vec_inf_norm};
use crate::model::{spectral_radius, ModelInstance};
use crate::serde_util::{matrix_rows, vector};

/// Walk-counting matrices of the effort game.
///
/// `m` is `(I - beta C^-1 G)^-1`, which is `M = (I - lambda G)^-1` when costs are
/// common, and `b = (C - beta G)^-1 = M C^-1` maps pay coefficients to efforts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceSummary {
    #[serde(serialize_with = "matrix_rows")]
    pub m: DMatrix<f64>,
    #[serde(serialize_with = "matrix_rows")]
    pub b: DMatrix<f64>,
    /// Row sums of `m`.
    #[serde(serialize_with = "vector")]
    pub bonacich: DVector<f64>,
    /// Column sums of `m`: each agent's total influence.
    #[serde(serialize_with = "vector")]
    pub alpha: DVector<f64>,
    pub lambda: Option<f64>,
}

/// Linear contract: fixed pay `z` and performance coefficients `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contract {
    #[serde(serialize_with = "vector")]
    pub z: DVector<f64>,
    #[serde(serialize_with = "vector")]
    pub v: DVector<f64>,
}

/// Returns rho1 when the (cost-weighted) equilibrium condition holds.
pub(crate) fn require_a1(inst: &ModelInstance) -> Result<f64> {
    let rho1 = spectral_radius(&(cinv_matrix(inst) * inst.g() * inst.beta()))?;
    if rho1 < 1.0 {
        Ok(rho1)
    } else {
        Err(Error::Assumption { condition: Condition::A1, rho: rho1 })
    }
}

pub(crate) fn cinv_matrix(inst: &ModelInstance) -> DMatrix<f64> {
    let n = inst.n();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / inst.cost(i) } else { 0.0 })
}

/// `(I - beta C^-1 G)^-1` without the spectral gate.
pub(crate) fn influence_unchecked(inst: &ModelInstance) -> Result<InfluenceSummary> {
    let n = inst.n();
    let cinv = cinv_matrix(inst);
    let a = DMatrix::identity(n, n) - &cinv * inst.g() * inst.beta();
    let m = inverse_checked(&a, "I - beta C^-1 G")?;
    let b = &m * &cinv;
    Ok(InfluenceSummary { bonacich: row_sums(&m), alpha: col_sums(&m), m, b, lambda: inst.lambda() })
}

/// Influence matrix with Bonacich and influence vectors.
pub fn influence_matrix(inst: &ModelInstance) -> Result<InfluenceSummary> {
    require_a1(inst)?;
    let summary = influence_unchecked(inst)?;
    let min = summary.m.min();
    if min < -TOLERANCES.nonnegative {
        return Err(Error::numeric(format!("influence matrix has negative entry {min:e}")));
    }
    Ok(summary)
}

/// Solves `(C - beta G) a = v` and checks the best-response residual.
pub(crate) fn equilibrium_unchecked(inst: &ModelInstance, v: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != inst.n() {
        return Err(Error::numeric(format!("pay vector has length {}, expected {}", v.len(), inst.n())));
    }
    let k = inst.cost_matrix() - inst.g() * inst.beta();
    let a = crate::linalg::solve(&k, v, "C - beta G")?;
    let residual = vec_inf_norm(&(&k * &a - v));
    if !(residual <= TOLERANCES.solve_residual * vec_inf_norm(v).max(1.0)) {
        return Err(Error::numeric(format!("equilibrium residual {residual:e} exceeds tolerance")));
    }
    Ok(a)
}

/// The unique Nash equilibrium of the effort game for pay coefficients `v`.
pub fn nash_efforts(inst: &ModelInstance, v: &DVector<f64>) -> Result<DVector<f64>> {
    require_a1(inst)?;
    equilibrium_unchecked(inst, v)
}

/// Agent `i`'s best reply to the others' efforts, clamped at zero.
pub fn best_response(inst: &ModelInstance, i: usize, v_i: f64, others: &DVector<f64>) -> f64 {
    let peer: f64 = (0..inst.n()).map(|j| inst.g()[(i, j)] * others[j]).sum();
    ((v_i + inst.beta() * peer) / inst.cost(i)).max(0.0)
}

fn peer_term(inst: &ModelInstance, i: usize, a: &DVector<f64>) -> f64 {
    (0..inst.n()).map(|j| inst.g()[(i, j)] * a[j]).sum()
}

/// Certainty equivalent of agent `i` under `contract` at effort profile `a`.
pub fn certainty_equivalent(inst: &ModelInstance, i: usize, contract: &Contract, a: &DVector<f64>) -> f64 {
    let (z, v) = (contract.z[i], contract.v[i]);
    z + a[i] * (v + inst.beta() * peer_term(inst, i, a)) - 0.5 * inst.cost(i) * a[i] * a[i]
        - 0.5 * inst.params().risk() * v * v
}

/// CARA utility of agent `i` for a realized wage. Saturates to `-inf` on overflow.
pub fn cara_utility(inst: &ModelInstance, i: usize, wage: f64, a: &DVector<f64>) -> f64 {
    let x = wage - 0.5 * inst.cost(i) * a[i] * a[i] + inst.beta() * a[i] * peer_term(inst, i, a);
    let u = -(-inst.params().eta * x).exp();
    if u.is_infinite() {
        log::warn!("CARA utility overflowed for agent {} (wage {wage})", inst.labels()[i]);
        return f64::NEG_INFINITY;
    }
    u
}
