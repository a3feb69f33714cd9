//! The principal's problem: common-influence matrix, optimal pay, fixed pay and profit.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::TOLERANCES;
use crate::equilibrium::{
    certainty_equivalent, equilibrium_unchecked, influence_matrix, influence_unchecked, nash_efforts, Contract,
};
use crate::error::{Condition, Error, Result, StageExt, ValidationError};
use crate::linalg::{inverse_checked, max_asymmetry, symmetric_min_eigenvalue, symmetrize, vec_inf_norm};
use crate::model::{check_assumptions, symmetric_spectral_radius, AssumptionReport, ModelInstance};
use crate::serde_util::{matrix_rows, vector};

/// `W = [I - delta (MG)^T MG]^-1` together with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonInfluence {
    #[serde(serialize_with = "matrix_rows")]
    pub w: DMatrix<f64>,
    pub delta: f64,
    #[serde(serialize_with = "matrix_rows")]
    pub mg: DMatrix<f64>,
}

/// Single-agent contract without peer effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineContract {
    pub z: f64,
    pub v: f64,
    pub a: f64,
}

/// Which route produced the pay coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    /// `v = W alpha / (1 + c eta sigma2)`.
    CommonInfluence,
    /// Direct solve of the principal's first-order system (heterogeneous costs).
    FirstOrderSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractSolution {
    pub contract: Contract,
    #[serde(serialize_with = "vector")]
    pub efforts: DVector<f64>,
    pub profit: f64,
    #[serde(serialize_with = "vector")]
    pub ce: DVector<f64>,
    pub diagnostics: AssumptionReport,
    pub path: SolverPath,
    pub unsafe_mode: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Skip the spectral gates. Results outside the admissible region are
    /// reported but carry no optimality guarantee.
    pub unsafe_mode: bool,
}

/// Optimal contract of an isolated agent (or of any agent when `beta = 0`).
pub fn empty_baseline(inst: &ModelInstance, i: usize) -> BaselineContract {
    let c = inst.cost(i);
    let risk = inst.params().risk();
    let v = 1.0 / (1.0 + c * risk);
    let a = v / c;
    let z = inst.params().reservation[i] + 0.5 * risk * v * v - 0.5 * c * a * a;
    BaselineContract { z, v, a }
}

fn require_common_cost(inst: &ModelInstance, what: &str) -> Result<f64> {
    inst.homogeneous_cost().ok_or_else(|| {
        Error::from(ValidationError::Argument(format!("{what} requires a common cost of effort")))
    })
}

fn delta(inst: &ModelInstance, c: f64) -> f64 {
    let lambda = inst.beta() / c;
    lambda * lambda / (1.0 + c * inst.params().risk())
}

fn common_influence(inst: &ModelInstance, gated: bool) -> Result<CommonInfluence> {
    let c = require_common_cost(inst, "the common-influence matrix")?;
    let n = inst.n();
    let infl = if gated { influence_matrix(inst)? } else { influence_unchecked(inst)? };
    let mg = &infl.m * inst.g();
    let delta = delta(inst, c);
    let common = mg.transpose() * &mg * delta;
    if gated {
        let rho2 = symmetric_spectral_radius(&common)?;
        if rho2 >= 1.0 {
            return Err(Error::Assumption { condition: Condition::A2, rho: rho2 });
        }
    }
    let w = inverse_checked(&(DMatrix::identity(n, n) - common), "I - delta (MG)^T MG")?;
    let asym = max_asymmetry(&w);
    if asym > TOLERANCES.symmetry {
        return Err(Error::numeric(format!("W asymmetric by {asym:e}")));
    }
    Ok(CommonInfluence { w: symmetrize(&w), delta, mg })
}

/// The common-influence matrix. Requires a common cost and both spectral conditions.
pub fn w_matrix(inst: &ModelInstance) -> Result<CommonInfluence> {
    common_influence(inst, true)
}

/// Residual of the principal's first-order conditions written with `M`,
/// scaled by `k = c eta sigma2`: `[k I + M + M^T - M^T M] v - alpha`.
pub fn foc_residual(inst: &ModelInstance, v: &DVector<f64>) -> Result<f64> {
    let c = require_common_cost(inst, "the first-order residual")?;
    let n = inst.n();
    let infl = influence_unchecked(inst)?;
    let m = &infl.m;
    let k = c * inst.params().risk();
    let lhs = (DMatrix::identity(n, n) * k + m + m.transpose() - m.transpose() * m) * v;
    Ok(vec_inf_norm(&(lhs - &infl.alpha)))
}

fn closed_form_v(inst: &ModelInstance, gated: bool) -> Result<DVector<f64>> {
    let c = require_common_cost(inst, "the closed-form contract")?;
    let ci = common_influence(inst, gated)?;
    let alpha = crate::linalg::col_sums(&inverse_checked(
        &(DMatrix::identity(inst.n(), inst.n()) - inst.g() * (inst.beta() / c)),
        "I - lambda G",
    )?);
    let v = &ci.w * alpha / (1.0 + c * inst.params().risk());
    let residual = foc_residual(inst, &v)?;
    if residual > TOLERANCES.identity * vec_inf_norm(&v).max(1.0) {
        return Err(Error::consistency(format!("first-order residual {residual:e} at the closed-form contract")));
    }
    Ok(v)
}

/// Optimal performance pay for a common cost of effort.
pub fn optimal_v(inst: &ModelInstance) -> Result<DVector<f64>> {
    let v = closed_form_v(inst, true)?;
    if let Some(bad) = v.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::numeric(format!("optimal pay of agent {} is not positive", inst.labels()[bad])));
    }
    Ok(v)
}

/// The principal's first-order system `S v = B^T 1` with
/// `S = B + B^T - B^T C B + eta sigma2 I` and `B = (C - beta G)^-1`.
/// `S` is the negated Hessian of profit in `v`.
pub fn principal_system(inst: &ModelInstance) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = inst.n();
    let b = influence_unchecked(inst)?.b;
    let s = &b + b.transpose() - b.transpose() * inst.cost_matrix() * &b
        + DMatrix::identity(n, n) * inst.params().risk();
    let rhs = b.transpose() * DVector::from_element(n, 1.0);
    Ok((symmetrize(&s), rhs))
}

fn system_v(inst: &ModelInstance, gated: bool) -> Result<DVector<f64>> {
    if gated {
        crate::equilibrium::require_a1(inst)?;
    }
    let (s, rhs) = principal_system(inst)?;
    if gated {
        let min_eig = symmetric_min_eigenvalue(&s)?;
        if !(min_eig > 0.0) {
            return Err(Error::NotConcave { min_eigenvalue: min_eig });
        }
    }
    crate::linalg::solve(&s, &rhs, "principal first-order system")
}

/// Optimal performance pay with per-agent costs, from the principal's
/// first-order system. Errors when the objective is not strictly concave.
pub fn optimal_v_het(inst: &ModelInstance) -> Result<DVector<f64>> {
    system_v(inst, true)
}

/// Fixed pay that makes each participation constraint bind.
pub fn optimal_z(inst: &ModelInstance, v: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    let risk = inst.params().risk();
    DVector::from_fn(inst.n(), |i, _| {
        inst.params().reservation[i] + 0.5 * risk * v[i] * v[i] - 0.5 * inst.cost(i) * a[i] * a[i]
    })
}

/// Reduced objective at effort profile `a`.
fn reduced_profit(inst: &ModelInstance, v: &DVector<f64>, a: &DVector<f64>) -> f64 {
    let p = inst.params();
    let mut total = 0.0;
    for i in 0..inst.n() {
        total += a[i] * (1.0 - v[i]) - p.reservation[i] + 0.5 * p.cost[i] * a[i] * a[i] - 0.5 * p.risk() * v[i] * v[i];
    }
    total
}

/// Expected output minus expected wages, with fixed pay set so that each
/// agent's certainty equivalent equals its reservation wage.
fn direct_profit(inst: &ModelInstance, v: &DVector<f64>, a: &DVector<f64>) -> f64 {
    let bare = Contract { z: DVector::zeros(inst.n()), v: v.clone() };
    (0..inst.n())
        .map(|i| {
            let z = inst.params().reservation[i] - certainty_equivalent(inst, i, &bare, a);
            a[i] - z - v[i] * a[i]
        })
        .sum()
}

fn profit_checked(inst: &ModelInstance, v: &DVector<f64>, a: &DVector<f64>) -> Result<f64> {
    let reduced = reduced_profit(inst, v, a);
    let direct = direct_profit(inst, v, a);
    if (reduced - direct).abs() > TOLERANCES.identity * reduced.abs().max(1.0) {
        return Err(Error::consistency(format!("profit forms disagree: reduced {reduced}, direct {direct}")));
    }
    Ok(reduced)
}

/// Principal's expected profit when offering pay `v` (fixed pay chosen optimally).
pub fn principal_profit(inst: &ModelInstance, v: &DVector<f64>) -> Result<f64> {
    let a = nash_efforts(inst, v)?;
    profit_checked(inst, v, &a)
}

/// Profit without the spectral gate, for finite-difference probes.
pub(crate) fn profit_unchecked(inst: &ModelInstance, v: &DVector<f64>) -> Result<f64> {
    let a = equilibrium_unchecked(inst, v)?;
    profit_checked(inst, v, &a)
}

/// Optimal pay along whichever route the instance admits, without gates.
pub(crate) fn optimal_v_unchecked(inst: &ModelInstance) -> Result<DVector<f64>> {
    match inst.homogeneous_cost() {
        Some(_) => closed_form_v(inst, false),
        None => system_v(inst, false),
    }
}

/// Optimal contract, equilibrium efforts and profit.
pub fn solve(inst: &ModelInstance) -> Result<ContractSolution> {
    solve_with(inst, &SolveOptions::default())
}

pub fn solve_with(inst: &ModelInstance, opts: &SolveOptions) -> Result<ContractSolution> {
    let gated = !opts.unsafe_mode;
    let diagnostics = check_assumptions(inst).stage("check_assumptions")?;
    if gated && !diagnostics.a1_holds {
        return Err(Error::Assumption { condition: Condition::A1, rho: diagnostics.rho1 }.in_stage("check_assumptions"));
    }
    let (v, path) = match inst.homogeneous_cost() {
        Some(_) => {
            let v = if gated { optimal_v(inst) } else { closed_form_v(inst, false) };
            (v.stage("optimal_v")?, SolverPath::CommonInfluence)
        }
        None => (system_v(inst, gated).stage("optimal_v_het")?, SolverPath::FirstOrderSystem),
    };
    let a = if gated { nash_efforts(inst, &v) } else { equilibrium_unchecked(inst, &v) }.stage("nash_efforts")?;
    if gated {
        if let Some(bad) = a.iter().position(|&x| x < -TOLERANCES.nonnegative) {
            return Err(Error::numeric(format!("equilibrium effort of agent {} is negative", inst.labels()[bad]))
                .in_stage("nash_efforts"));
        }
    }
    let z = optimal_z(inst, &v, &a);
    let profit = profit_checked(inst, &v, &a).stage("principal_profit")?;
    let contract = Contract { z, v };
    let ce = DVector::from_fn(inst.n(), |i, _| certainty_equivalent(inst, i, &contract, &a));
    for i in 0..inst.n() {
        let wbar = inst.params().reservation[i];
        if (ce[i] - wbar).abs() > TOLERANCES.identity * wbar.abs().max(1.0) {
            return Err(Error::consistency(format!(
                "participation constraint of agent {} does not bind: CE {} vs reservation {wbar}",
                inst.labels()[i],
                ce[i]
            ))
            .in_stage("optimal_z"));
        }
    }
    Ok(ContractSolution { contract, efforts: a, profit, ce, diagnostics, path, unsafe_mode: opts.unsafe_mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EconParams, Network};

    fn inst(net: Network, beta: f64) -> ModelInstance {
        let n = net.n();
        ModelInstance::with_numbered_agents(net, EconParams::homogeneous(n, beta, 1.0, 1.0, 1.0)).unwrap()
    }

    fn fig1() -> ModelInstance {
        inst(Network::from_edges(3, &[(0, 1, 1.0), (2, 1, 1.0)]).unwrap(), 0.5)
    }

    fn fig2() -> ModelInstance {
        inst(Network::from_edges(5, &[(1, 0, 1.0), (1, 2, 1.0), (3, 2, 1.0), (3, 4, 1.0)]).unwrap(), 0.5)
    }

    fn path3() -> Network {
        Network::from_edges(3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)]).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn baseline_values() {
        let i = inst(Network::empty(1), 0.0);
        assert_eq!(empty_baseline(&i, 0), BaselineContract { z: 0.0, v: 0.5, a: 0.5 });

        let p = EconParams { beta: 0.0, cost: vec![2.0], eta: 1.0, sigma2: 0.5, reservation: vec![0.0] };
        let i = ModelInstance::with_numbered_agents(Network::empty(1), p).unwrap();
        assert_eq!(empty_baseline(&i, 0), BaselineContract { z: 0.0, v: 0.5, a: 0.25 });

        let p = EconParams { reservation: vec![3.0], ..EconParams::homogeneous(1, 0.0, 1.0, 1.0, 1.0) };
        let i = ModelInstance::with_numbered_agents(Network::empty(1), p).unwrap();
        assert_eq!(empty_baseline(&i, 0), BaselineContract { z: 3.0, v: 0.5, a: 0.5 });
    }

    #[test]
    fn fig1_w_is_diagonal() {
        let ci = w_matrix(&fig1()).unwrap();
        assert_eq!(ci.delta, 0.125);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0 / 3.0, 1.0]));
        assert!((ci.w - expected).amax() < 1e-15);
    }

    #[test]
    fn fig2_w_zero_pattern() {
        let w = w_matrix(&fig2()).unwrap().w;
        for k in [1, 3] {
            for l in 0..5 {
                if l != k {
                    assert_eq!(w[(k, l)], 0.0);
                    assert_eq!(w[(l, k)], 0.0);
                }
            }
            assert_eq!(w[(k, k)], 1.0);
        }
        assert!(w[(0, 2)] > 0.0 && w[(2, 4)] > 0.0 && w[(0, 4)] > 0.0);
    }

    #[test]
    fn beta_zero_w_is_identity() {
        let ci = w_matrix(&inst(path3(), 0.0)).unwrap();
        assert_eq!(ci.w, DMatrix::identity(3, 3));
    }

    #[test]
    fn fig1_optimal_v() {
        assert_close(optimal_v(&fig1()).unwrap().as_slice(), &[0.5, 4.0 / 3.0, 0.5], 1e-14);
    }

    #[test]
    fn empty_network_is_baseline() {
        let v = optimal_v(&inst(Network::empty(4), 0.7)).unwrap();
        assert_close(v.as_slice(), &[0.5; 4], 0.0);
    }

    #[test]
    fn isolated_agent_keeps_baseline() {
        let net = Network::from_edges(4, &[(0, 1, 1.0), (2, 1, 0.5)]).unwrap();
        let v = optimal_v(&inst(net, 0.4)).unwrap();
        assert_eq!(v[3], 0.5);
    }

    #[test]
    fn het_matches_closed_form_for_common_cost() {
        let v = optimal_v_het(&fig1()).unwrap();
        assert_close(v.as_slice(), &[0.5, 4.0 / 3.0, 0.5], 1e-12);
    }

    #[test]
    fn het_line_network() {
        let base = inst(path3(), 0.0).with_costs(vec![0.5, 1.0, 0.5]).unwrap();
        assert_close(optimal_v_het(&base).unwrap().as_slice(), &[2.0 / 3.0, 0.5, 2.0 / 3.0], 1e-14);
        let weak = optimal_v_het(&base.with_beta(0.05).unwrap()).unwrap();
        assert!(weak[0] > weak[1] && (weak[0] - weak[2]).abs() < 1e-12);
        let strong = optimal_v_het(&base.with_beta(0.25).unwrap()).unwrap();
        assert!(strong[1] > strong[0] && (strong[0] - strong[2]).abs() < 1e-12);
    }

    #[test]
    fn het_reports_non_concavity() {
        let base = inst(path3(), 0.3).with_costs(vec![0.5, 1.0, 0.5]).unwrap();
        match optimal_v_het(&base).unwrap_err() {
            Error::NotConcave { min_eigenvalue } => assert!(min_eigenvalue < 0.0),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn fixed_pay() {
        let v = DVector::from_vec(vec![0.5, 4.0 / 3.0, 0.5]);
        let a = DVector::from_vec(vec![7.0 / 6.0, 4.0 / 3.0, 7.0 / 6.0]);
        let z = optimal_z(&fig1(), &v, &a);
        let z1 = 0.5 * 0.25 - 0.5 * (7.0f64 / 6.0).powi(2);
        assert_close(z.as_slice(), &[z1, 0.0, z1], 1e-15);
        assert!((z1 + 0.5556).abs() < 1e-4);
        assert_eq!(optimal_z(&fig1(), &DVector::zeros(3), &DVector::zeros(3)), DVector::zeros(3));
        let b = empty_baseline(&fig1(), 0);
        let zb = optimal_z(&fig1(), &DVector::from_element(3, b.v), &DVector::from_element(3, b.a));
        assert_eq!(zb[0], b.z);
    }

    #[test]
    fn profit_values() {
        let v = DVector::from_vec(vec![0.5, 4.0 / 3.0, 0.5]);
        assert!((principal_profit(&fig1(), &v).unwrap() - 11.0 / 6.0).abs() < 1e-14);
        let empty = inst(Network::empty(3), 0.0);
        assert!((principal_profit(&empty, &DVector::from_element(3, 0.5)).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(principal_profit(&empty, &DVector::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn solve_fig1() {
        let s = solve(&fig1()).unwrap();
        assert_close(s.contract.v.as_slice(), &[0.5, 4.0 / 3.0, 0.5], 1e-14);
        assert_close(s.efforts.as_slice(), &[7.0 / 6.0, 4.0 / 3.0, 7.0 / 6.0], 1e-14);
        assert!((s.profit - 11.0 / 6.0).abs() < 1e-14);
        assert_close(s.ce.as_slice(), &[0.0; 3], 1e-14);
        assert_eq!(s.path, SolverPath::CommonInfluence);
    }

    #[test]
    fn solve_empty_network() {
        let i = inst(Network::empty(3), 0.3);
        let s = solve(&i).unwrap();
        let b = empty_baseline(&i, 0);
        for k in 0..3 {
            assert_eq!((s.contract.z[k], s.contract.v[k], s.efforts[k]), (b.z, b.v, b.a));
        }
    }

    #[test]
    fn solve_fig2_targets() {
        let s = solve(&fig2()).unwrap();
        let base = 0.5;
        assert_eq!(s.contract.v[1], base);
        assert_eq!(s.contract.v[3], base);
        for k in [0, 2, 4] {
            assert!(s.contract.v[k] > base);
        }
    }

    #[test]
    fn gates_and_unsafe_mode() {
        let strong = inst(path3(), 0.8);
        let err = solve(&strong).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().starts_with("check_assumptions: A1 violated"));

        // A1 holds but the principal's problem is not concave
        let loose = inst(path3(), 0.5);
        let err = solve(&loose).unwrap_err();
        assert!(matches!(err.root(), Error::Assumption { condition: Condition::A2, .. }), "{err}");
        let s = solve_with(&loose, &SolveOptions { unsafe_mode: true }).unwrap();
        assert!(s.unsafe_mode && !s.diagnostics.a2_holds);
    }

    #[test]
    fn w_matrix_needs_common_cost() {
        let het = fig1().with_costs(vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(w_matrix(&het).unwrap_err().exit_code(), 2);
    }
}
