//! Independent checks: numeric profit maximization, best-response iteration
//! and Monte Carlo simulation of outputs and utilities.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::contracts::principal_profit;
use crate::equilibrium::{best_response, cara_utility, require_a1, Contract};
use crate::error::{Error, Result, ValidationError};
use crate::linalg::{symmetric_min_eigenvalue, symmetrize, vec_inf_norm};
use crate::model::ModelInstance;
use crate::serde_util::vector;

pub const MAX_ITERATIONS: usize = 100_000;

/// Scaled gradient norm the maximizer must reach.
pub const GRADIENT_TOL: f64 = 1e-7;

/// Draws per independently seeded stream.
const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(serialize_with = "vector")]
    pub v_opt: DVector<f64>,
    pub profit_opt: f64,
    /// Gradient-ascent iterations before the polish.
    pub iterations: usize,
    /// Final `||grad||_inf / max(1, |profit|)`.
    pub convergence: f64,
}

fn gradient<F: Fn(&DVector<f64>) -> Result<f64>>(f: &F, v: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let mut g = DVector::zeros(v.len());
    let mut x = v.clone();
    for i in 0..v.len() {
        let xi = v[i];
        x[i] = xi + h;
        let up = f(&x)?;
        x[i] = xi - h;
        let down = f(&x)?;
        x[i] = xi;
        g[i] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

/// Second differences with a wide step: exact up to rounding for a quadratic.
fn hessian<F: Fn(&DVector<f64>) -> Result<f64>>(f: &F, v: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
    let n = v.len();
    let mut hess = DMatrix::zeros(n, n);
    let at = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut x = v.clone();
        x[di] += si * h;
        x[dj] += sj * h;
        f(&x)
    };
    for i in 0..n {
        for j in i..n {
            let val = (at(i, 1.0, j, 1.0)? - at(i, 1.0, j, -1.0)? - at(i, -1.0, j, 1.0)? + at(i, -1.0, j, -1.0)?)
                / (4.0 * h * h);
            hess[(i, j)] = val;
            hess[(j, i)] = val;
        }
    }
    Ok(hess)
}

/// Maximizes profit over pay coefficients using only profit evaluations:
/// gradient ascent with backtracking, then Newton steps with a
/// finite-difference Hessian.
pub fn maximize_profit_numeric(inst: &ModelInstance, v0: &DVector<f64>) -> Result<OracleResult> {
    if v0.len() != inst.n() {
        return Err(ValidationError::DimensionMismatch { field: "v0", expected: inst.n(), found: v0.len() }.into());
    }
    require_a1(inst)?;
    let f = |v: &DVector<f64>| principal_profit(inst, v);
    let h = 1e-6;
    let mut v = v0.clone();
    let mut fv = f(&v)?;
    let mut iterations = 0;
    let mut step: f64 = 1.0;
    loop {
        let g = gradient(&f, &v, h)?;
        let gnorm = vec_inf_norm(&g);
        if gnorm / fv.abs().max(1.0) <= 1e-5 || iterations >= MAX_ITERATIONS {
            break;
        }
        iterations += 1;
        step = (step * 2.0).min(1e6);
        loop {
            let cand = &v + &g * step;
            let fc = f(&cand)?;
            if fc >= fv + 1e-4 * step * g.norm_squared() {
                v = cand;
                fv = fc;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::numeric("line search failed to make progress"));
            }
        }
        if !fv.is_finite() || fv > 1e15 {
            return Err(Error::NotConcave { min_eigenvalue: f64::NAN });
        }
    }

    for _ in 0..3 {
        let hess = symmetrize(&hessian(&f, &v, 0.1)?);
        let max_eig = -symmetric_min_eigenvalue(&(-&hess))?;
        if !(max_eig < 0.0) {
            return Err(Error::NotConcave { min_eigenvalue: -max_eig });
        }
        let g = gradient(&f, &v, h)?;
        if vec_inf_norm(&g) / fv.abs().max(1.0) <= 1e-12 {
            break;
        }
        let delta = crate::linalg::solve(&hess, &g, "profit Hessian")?;
        v -= delta;
        fv = f(&v)?;
    }
    let convergence = vec_inf_norm(&gradient(&f, &v, h)?) / fv.abs().max(1.0);
    if !(convergence <= GRADIENT_TOL) {
        return Err(Error::numeric(format!("numeric maximizer stalled with scaled gradient {convergence:e}")));
    }
    Ok(OracleResult { v_opt: v, profit_opt: fv, iterations, convergence })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponseTrace {
    #[serde(serialize_with = "vector")]
    pub efforts: DVector<f64>,
    pub iterations: usize,
    /// Last `||a_{t+1} - a_t||_inf`.
    pub residual: f64,
    /// Per-step shrink factor of a perturbation of the equilibrium under
    /// repeated best responses; zero when perturbations die out exactly.
    pub contraction_ratio: f64,
}

/// Applications of the best-response map used to measure its contraction.
pub const PROBE_STEPS: usize = 2_000;

/// Synchronous best-response dynamics from zero effort.
pub fn iterate_best_response(inst: &ModelInstance, v: &DVector<f64>, tol: f64) -> Result<BestResponseTrace> {
    if v.len() != inst.n() {
        return Err(ValidationError::DimensionMismatch { field: "v", expected: inst.n(), found: v.len() }.into());
    }
    if !(tol > 0.0) {
        return Err(ValidationError::Argument(format!("tolerance must be positive, got {tol}")).into());
    }
    require_a1(inst)?;
    let n = inst.n();
    let respond = |a: &DVector<f64>| DVector::from_fn(n, |i, _| best_response(inst, i, v[i], a));
    let mut a = DVector::zeros(n);
    for t in 1..=MAX_ITERATIONS {
        let next = respond(&a);
        let d = vec_inf_norm(&(&next - &a));
        a = next;
        if d < tol {
            let contraction_ratio = contraction_ratio(&respond, &a);
            return Ok(BestResponseTrace { efforts: a, iterations: t, residual: d, contraction_ratio });
        }
    }
    Err(Error::numeric(format!("best-response iteration did not converge in {MAX_ITERATIONS} steps")))
}

/// Pushes a positive perturbation through the map again and again,
/// renormalizing each time, and averages the log shrink factor over the
/// second half. Long runs wash out the oscillation of periodic networks,
/// which a short converging sequence cannot.
fn contraction_ratio(respond: &impl Fn(&DVector<f64>) -> DVector<f64>, fixed: &DVector<f64>) -> f64 {
    let scale = vec_inf_norm(fixed).max(1.0);
    let base = respond(fixed);
    let mut x = DVector::from_element(fixed.len(), scale);
    let mut log_sum = 0.0;
    let mut counted = 0;
    for k in 0..PROBE_STEPS {
        let y = respond(&(fixed + &x)) - &base;
        let ny = vec_inf_norm(&y);
        if ny == 0.0 {
            return 0.0;
        }
        if k >= PROBE_STEPS / 2 {
            log_sum += (ny / vec_inf_norm(&x)).ln();
            counted += 1;
        }
        x = y * (scale / ny);
    }
    (log_sum / counted as f64).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub draws: usize,
    pub seed: u64,
    pub mean_utility: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Certainty equivalents implied by the mean utilities.
    pub implied_ce: Vec<f64>,
    pub mean_profit: f64,
    pub profit_std_err: f64,
}

#[derive(Clone)]
struct Moments {
    utility: Vec<f64>,
    utility_sq: Vec<f64>,
    profit: f64,
    profit_sq: f64,
}

impl Moments {
    fn zero(n: usize) -> Moments {
        Moments { utility: vec![0.0; n], utility_sq: vec![0.0; n], profit: 0.0, profit_sq: 0.0 }
    }

    fn merge(mut self, other: &Moments) -> Moments {
        for i in 0..self.utility.len() {
            self.utility[i] += other.utility[i];
            self.utility_sq[i] += other.utility_sq[i];
        }
        self.profit += other.profit;
        self.profit_sq += other.profit_sq;
        self
    }
}

fn std_err(sum: f64, sum_sq: f64, draws: usize) -> f64 {
    if draws < 2 {
        return 0.0;
    }
    let k = draws as f64;
    let mean = sum / k;
    let var = ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0);
    (var / k).sqrt()
}

/// Monte Carlo estimates of each agent's expected CARA utility and of the
/// principal's expected profit. Stream `k` of the generator handles draws
/// `k*CHUNK ..`, so results do not depend on the number of threads.
pub fn simulate_outputs(
    inst: &ModelInstance,
    contract: &Contract,
    a: &DVector<f64>,
    draws: usize,
    seed: u64,
) -> Result<SimulationSummary> {
    if draws == 0 {
        return Err(ValidationError::Argument("draws must be at least 1".into()).into());
    }
    let n = inst.n();
    if contract.v.len() != n || contract.z.len() != n || a.len() != n {
        return Err(ValidationError::Argument("contract and effort vectors must match the agent count".into()).into());
    }
    let normal = Normal::new(0.0, inst.params().sigma2.sqrt()).map_err(|e| Error::numeric(e.to_string()))?;
    let chunks = draws.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = CHUNK.min(draws - k * CHUNK);
            let mut m = Moments::zero(n);
            for _ in 0..count {
                let mut profit = 0.0;
                for i in 0..n {
                    let eps = normal.sample(&mut rng);
                    let output = a[i] + eps;
                    let wage = contract.z[i] + contract.v[i] * output;
                    let u = cara_utility(inst, i, wage, a);
                    m.utility[i] += u;
                    m.utility_sq[i] += u * u;
                    profit += output - wage;
                }
                m.profit += profit;
                m.profit_sq += profit * profit;
            }
            m
        })
        .collect();
    let total = partials.iter().fold(Moments::zero(n), |acc, m| acc.merge(m));
    let k = draws as f64;
    let eta = inst.params().eta;
    let mean_utility: Vec<f64> = total.utility.iter().map(|s| s / k).collect();
    Ok(SimulationSummary {
        draws,
        seed,
        std_err: (0..n).map(|i| std_err(total.utility[i], total.utility_sq[i], draws)).collect(),
        implied_ce: mean_utility.iter().map(|u| -(-u).ln() / eta).collect(),
        mean_utility,
        mean_profit: total.profit / k,
        profit_std_err: std_err(total.profit, total.profit_sq, draws),
    })
}
