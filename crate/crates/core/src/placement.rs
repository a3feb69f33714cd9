//! Peer-effect strength sweeps and assignment of heterogeneous agents to positions.

use rayon::prelude::*;
use serde::Serialize;

use crate::contracts::solve;
use crate::error::{Error, Result, ValidationError};
use crate::model::{check_assumptions, EconParams, ModelInstance, Network};

/// Largest number of agents for exhaustive placement search.
pub const MAX_PLACEMENT_AGENTS: usize = 9;

/// Profits within this distance count as tied.
pub const PROFIT_TIE: f64 = 1e-10;

/// Fraction of the feasible interval kept by default sweeps.
pub const SWEEP_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub profit: f64,
    pub margin1: f64,
    pub margin2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaSweep {
    pub grid: Vec<f64>,
    /// One row per feasible grid point, in grid order.
    pub rows: Vec<SweepRow>,
    /// Grid points where the contract is not admissible.
    pub infeasible: Vec<f64>,
}

/// A point where the pay of `overtaking` rises above the pay of `overtaken`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub overtaking: usize,
    pub overtaken: usize,
    /// Linear interpolation between the bracketing grid points.
    pub beta: f64,
}

fn admissible(inst: &ModelInstance, beta: f64) -> Result<bool> {
    let probe = inst.with_beta(beta)?;
    Ok(check_assumptions(&probe)?.holds())
}

/// Supremum of the feasible interval `[0, beta_max)` in the peer-effect strength,
/// located by bisection on both spectral conditions. Infinite when every
/// strength is admissible (no links).
pub fn feasible_beta_max(inst: &ModelInstance) -> Result<f64> {
    if inst.network().is_empty_network() {
        return Ok(f64::INFINITY);
    }
    if !admissible(inst, 0.0)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while admissible(inst, hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if admissible(inst, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Default sweep upper end: the feasible supremum less a safety margin.
pub fn default_beta_to(inst: &ModelInstance) -> Result<f64> {
    let max = feasible_beta_max(inst)?;
    Ok(if max.is_finite() { max * (1.0 - SWEEP_MARGIN) } else { 1.0 })
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps).map(|k| from + (to - from) * k as f64 / (steps - 1) as f64).collect(),
    }
}

fn check_grid(betas: &[f64]) -> Result<()> {
    if betas.is_empty() {
        return Err(ValidationError::Argument("empty peer-effect grid".into()).into());
    }
    if let Some(b) = betas.iter().find(|b| !b.is_finite() || **b < 0.0) {
        return Err(ValidationError::Argument(format!("grid value {b} is not a nonnegative number")).into());
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ValidationError::Argument("grid must be strictly increasing".into()).into());
    }
    Ok(())
}

fn is_inadmissible(e: &Error) -> bool {
    matches!(e.root(), Error::Assumption { .. } | Error::NotConcave { .. })
}

/// Solves at every grid point. Inadmissible points are listed, not errors.
pub fn beta_sweep(inst: &ModelInstance, betas: &[f64]) -> Result<BetaSweep> {
    check_grid(betas)?;
    let outcomes: Vec<Result<Option<SweepRow>>> = betas
        .par_iter()
        .map(|&beta| {
            let at = inst.with_beta(beta)?;
            match solve(&at) {
                Ok(s) => Ok(Some(SweepRow {
                    beta,
                    v: s.contract.v.as_slice().to_vec(),
                    a: s.efforts.as_slice().to_vec(),
                    profit: s.profit,
                    margin1: s.diagnostics.margin1,
                    margin2: s.diagnostics.margin2,
                })),
                Err(e) if is_inadmissible(&e) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut rows = Vec::new();
    let mut infeasible = Vec::new();
    for (beta, outcome) in betas.iter().zip(outcomes) {
        match outcome? {
            Some(row) => rows.push(row),
            None => infeasible.push(*beta),
        }
    }
    Ok(BetaSweep { grid: betas.to_vec(), rows, infeasible })
}

/// Sign changes of `v_k - v_l` between consecutive feasible rows, ignoring
/// differences within `tol`.
pub fn pay_crossings(sweep: &BetaSweep, tol: f64) -> Vec<Crossing> {
    let n = sweep.rows.first().map_or(0, |r| r.v.len());
    let mut out = Vec::new();
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            for w in sweep.rows.windows(2) {
                let d0 = w[0].v[k] - w[0].v[l];
                let d1 = w[1].v[k] - w[1].v[l];
                if d0 < -tol && d1 > tol {
                    let t = d0 / (d0 - d1);
                    out.push(Crossing { overtaking: k, overtaken: l, beta: w[0].beta + t * (w[1].beta - w[0].beta) });
                }
            }
        }
    }
    out.sort_by(|x, y| x.beta.total_cmp(&y.beta).then(x.overtaking.cmp(&y.overtaking)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    /// Cost of the agent placed at each position.
    pub costs: Vec<f64>,
    pub profit: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementResult {
    pub beta: f64,
    /// Distinct assignments in lexicographic order of their cost vectors.
    pub assignments: Vec<Assignment>,
    /// Indices into `assignments`, best first; feasible assignments only.
    pub ranking: Vec<usize>,
    pub best: Option<usize>,
    /// Number of groups of two or more feasible assignments with tied profit.
    pub tied_groups: usize,
    pub all_tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementCurves {
    pub betas: Vec<f64>,
    pub assignments: Vec<Vec<f64>>,
    /// `profit[a][b]`: assignment `a` at grid point `b`; `None` when inadmissible.
    pub profit: Vec<Vec<Option<f64>>>,
}

/// Rearranges `xs` into the next lexicographic permutation; false at the last.
fn next_permutation(xs: &mut [f64]) -> bool {
    let n = xs.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Every distinct arrangement of a cost multiset, in lexicographic order.
pub fn distinct_permutations(costs: &[f64]) -> Vec<Vec<f64>> {
    let mut xs = costs.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut out = vec![xs.clone()];
    while next_permutation(&mut xs) {
        out.push(xs.clone());
    }
    out
}

fn check_placement(net: &Network, costs: &[f64]) -> Result<()> {
    let n = net.n();
    if costs.len() != n {
        return Err(ValidationError::DimensionMismatch { field: "costs", expected: n, found: costs.len() }.into());
    }
    if n > MAX_PLACEMENT_AGENTS {
        return Err(ValidationError::Argument(format!(
            "exhaustive placement is limited to {MAX_PLACEMENT_AGENTS} agents; sweep named assignments instead"
        ))
        .into());
    }
    Ok(())
}

fn placed_profit(net: &Network, costs: &[f64], params: &EconParams, beta: f64) -> Result<Option<f64>> {
    let p = EconParams { beta, cost: costs.to_vec(), ..params.clone() };
    let inst = ModelInstance::with_numbered_agents(net.clone(), p)?;
    match solve(&inst) {
        Ok(s) => Ok(Some(s.profit)),
        Err(e) if is_inadmissible(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Profit of every distinct assignment of `costs` to positions at `beta`.
/// The cost field of `params` is ignored.
pub fn enumerate_placements(net: &Network, costs: &[f64], params: &EconParams, beta: f64) -> Result<PlacementResult> {
    check_placement(net, costs)?;
    let perms = distinct_permutations(costs);
    let profits: Vec<Result<Option<f64>>> =
        perms.par_iter().map(|c| placed_profit(net, c, params, beta)).collect();
    let mut assignments = Vec::with_capacity(perms.len());
    for (costs, profit) in perms.into_iter().zip(profits) {
        let profit = profit?;
        assignments.push(Assignment { costs, feasible: profit.is_some(), profit });
    }

    let mut ranking: Vec<usize> = (0..assignments.len()).filter(|&k| assignments[k].feasible).collect();
    let profit_of = |k: usize| assignments[k].profit.unwrap_or(f64::NEG_INFINITY);
    ranking.sort_by(|&x, &y| profit_of(y).total_cmp(&profit_of(x)));

    // runs of tied profits are listed in lexicographic order of their costs
    let mut tied_groups = 0;
    let mut k = 0;
    while k < ranking.len() {
        let mut end = k + 1;
        while end < ranking.len() && profit_of(ranking[end - 1]) - profit_of(ranking[end]) <= PROFIT_TIE {
            end += 1;
        }
        if end - k >= 2 {
            tied_groups += 1;
            ranking[k..end].sort_unstable();
        }
        k = end;
    }
    let best = ranking.first().copied();
    let all_tied = !ranking.is_empty()
        && profit_of(ranking[0]) - profit_of(*ranking.last().unwrap()) <= PROFIT_TIE;
    Ok(PlacementResult { beta, assignments, ranking, best, tied_groups, all_tied })
}

/// Profit curves of every distinct assignment over a peer-effect grid.
pub fn placement_curves(net: &Network, costs: &[f64], params: &EconParams, betas: &[f64]) -> Result<PlacementCurves> {
    check_placement(net, costs)?;
    check_grid(betas)?;
    let perms = distinct_permutations(costs);
    let profit: Result<Vec<Vec<Option<f64>>>> = perms
        .par_iter()
        .map(|c| betas.iter().map(|&b| placed_profit(net, c, params, b)).collect())
        .collect();
    Ok(PlacementCurves { betas: betas.to_vec(), assignments: perms, profit: profit? })
}
