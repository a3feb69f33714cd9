//! Comparative statics: analytic derivatives of pay and effort, finite-difference
//! cross-checks, the marginal network effect and sign classification.

use std::ops::{Div, Sub};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{default_step, TOLERANCES};
use crate::contracts::{optimal_v_unchecked, profit_unchecked, w_matrix};
use crate::equilibrium::{equilibrium_unchecked, influence_matrix};
use crate::error::{Condition, Error, Result, ValidationError};
use crate::linalg::{col_sums, unit};
use crate::model::{check_assumptions, has_in_link, weak_components, EconParams, ModelInstance, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    V,
    A,
    Profit,
}

/// Parameter being varied. `Cost` shifts every agent's cost by the same amount.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Parameter {
    Weight { i: usize, j: usize },
    Beta,
    Cost,
    Eta,
    Sigma2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Zero,
    WeakIncrease,
    StrictIncrease,
    WeakDecrease,
    StrictDecrease,
}

impl SignClass {
    pub fn of(x: f64) -> SignClass {
        if x.abs() < TOLERANCES.zero {
            SignClass::Zero
        } else if x > TOLERANCES.strict {
            SignClass::StrictIncrease
        } else if x < -TOLERANCES.strict {
            SignClass::StrictDecrease
        } else if x > 0.0 {
            SignClass::WeakIncrease
        } else {
            SignClass::WeakDecrease
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub target: Target,
    pub parameter: Parameter,
    /// `None` when only the finite difference is available.
    pub analytic: Option<Vec<f64>>,
    pub fd: Vec<f64>,
    pub step: f64,
    /// `max |analytic - fd| / max(1, |fd|)`.
    pub max_rel_err: Option<f64>,
    pub sign_class: Vec<SignClass>,
    pub fd_only: bool,
}

impl DerivativeReport {
    /// The best available value: analytic if present, else the finite difference.
    pub fn value(&self) -> &[f64] {
        self.analytic.as_deref().unwrap_or(&self.fd)
    }
}

/// Central difference `(f(x0+h) - f(x0-h)) / 2h`.
pub fn fd_derivative<T, F>(f: F, x0: f64, h: f64) -> Result<T>
where
    F: Fn(f64) -> Result<T>,
    T: Sub<Output = T> + Div<f64, Output = T>,
{
    if !(h > 0.0) {
        return Err(ValidationError::Argument(format!("finite-difference step must be positive, got {h}")).into());
    }
    let up = f(x0 + h)?;
    let down = f(x0 - h)?;
    Ok((up - down) / (2.0 * h))
}

fn base_value(inst: &ModelInstance, p: Parameter) -> f64 {
    let q = inst.params();
    match p {
        Parameter::Weight { i, j } => inst.g()[(i, j)],
        Parameter::Beta => q.beta,
        Parameter::Cost => q.cost[0],
        Parameter::Eta => q.eta,
        Parameter::Sigma2 => q.sigma2,
    }
}

/// Instance with parameter `p` set to `x`, unvalidated.
fn probe(inst: &ModelInstance, p: Parameter, x: f64) -> ModelInstance {
    let q = inst.params();
    match p {
        Parameter::Weight { i, j } => inst.probe_weight(i, j, x),
        Parameter::Beta => inst.probe_params(EconParams { beta: x, ..q.clone() }),
        Parameter::Cost => {
            let shift = x - q.cost[0];
            inst.probe_params(EconParams { cost: q.cost.iter().map(|c| c + shift).collect(), ..q.clone() })
        }
        Parameter::Eta => inst.probe_params(EconParams { eta: x, ..q.clone() }),
        Parameter::Sigma2 => inst.probe_params(EconParams { sigma2: x, ..q.clone() }),
    }
}

fn probe_admissible(inst: &ModelInstance) -> bool {
    let q = inst.params();
    q.cost.iter().all(|&c| c > 0.0) && q.eta > 0.0 && q.sigma2 > 0.0
        && check_assumptions(inst).map(|r| r.holds()).unwrap_or(false)
}

/// Default step, shrunk by decades (down to the floor) while a probe point
/// leaves the admissible region.
fn choose_step(inst: &ModelInstance, p: Parameter, x0: f64) -> f64 {
    let mut h = default_step(x0);
    while h > TOLERANCES.fd_step_floor {
        if probe_admissible(&probe(inst, p, x0 + h)) && probe_admissible(&probe(inst, p, x0 - h)) {
            return h;
        }
        h = (h / 10.0).max(TOLERANCES.fd_step_floor);
    }
    h
}

fn evaluate(inst: &ModelInstance, target: Target) -> Result<DVector<f64>> {
    let v = optimal_v_unchecked(inst)?;
    match target {
        Target::V => Ok(v),
        Target::A => equilibrium_unchecked(inst, &v),
        Target::Profit => Ok(DVector::from_element(1, profit_unchecked(inst, &v)?)),
    }
}

fn fd_at(inst: &ModelInstance, target: Target, p: Parameter, x0: f64, h: f64) -> Result<DVector<f64>> {
    fd_derivative(|x| evaluate(&probe(inst, p, x), target), x0, h)
}

fn require_assumptions(inst: &ModelInstance) -> Result<()> {
    let r = check_assumptions(inst)?;
    if !r.a1_holds {
        return Err(Error::Assumption { condition: Condition::A1, rho: r.rho1 });
    }
    if !r.a2_holds {
        return Err(Error::Assumption { condition: Condition::A2, rho: r.rho2 });
    }
    Ok(())
}


/// Quantities at the base point shared by every analytic derivative.
struct Base {
    m: DMatrix<f64>,
    g: DMatrix<f64>,
    p: DMatrix<f64>,
    w: DMatrix<f64>,
    alpha: DVector<f64>,
    v: DVector<f64>,
    c: f64,
    beta: f64,
    eta: f64,
    sigma2: f64,
    delta: f64,
    s: f64,
}

/// Derivatives of the building blocks along one parameter.
struct Blocks {
    dm: DMatrix<f64>,
    dg: DMatrix<f64>,
    ddelta: f64,
    ds: f64,
    dinv_c: f64,
}

impl Base {
    fn new(inst: &ModelInstance, c: f64) -> Result<Base> {
        let infl = influence_matrix(inst)?;
        let ci = w_matrix(inst)?;
        let q = inst.params();
        let s = 1.0 / (1.0 + c * q.risk());
        let v = &ci.w * &infl.alpha * s;
        Ok(Base {
            m: infl.m,
            g: inst.g().clone(),
            p: ci.mg,
            w: ci.w,
            alpha: infl.alpha,
            v,
            c,
            beta: q.beta,
            eta: q.eta,
            sigma2: q.sigma2,
            delta: ci.delta,
            s,
        })
    }

    fn blocks(&self, param: Parameter) -> Blocks {
        let n = self.m.nrows();
        let (c, beta) = (self.c, self.beta);
        let lambda = beta / c;
        let risk = self.eta * self.sigma2;
        let den = 1.0 + c * risk;
        let mgm = || &self.m * &self.g * &self.m;
        let still = |ddelta: f64, ds: f64| Blocks {
            dm: DMatrix::zeros(n, n),
            dg: DMatrix::zeros(n, n),
            ddelta,
            ds,
            dinv_c: 0.0,
        };
        match param {
            Parameter::Weight { i, j } => {
                let e = unit(n, i, j);
                Blocks { dm: &self.m * &e * &self.m * lambda, dg: e, ddelta: 0.0, ds: 0.0, dinv_c: 0.0 }
            }
            Parameter::Beta => Blocks {
                dm: mgm() / c,
                dg: DMatrix::zeros(n, n),
                ddelta: 2.0 * beta / (c * c * den),
                ds: 0.0,
                dinv_c: 0.0,
            },
            Parameter::Cost => Blocks {
                dm: mgm() * (-beta / (c * c)),
                dg: DMatrix::zeros(n, n),
                ddelta: -beta * beta * (2.0 * c + 3.0 * c * c * risk) / (c * c + c * c * c * risk).powi(2),
                ds: -risk / (den * den),
                dinv_c: -1.0 / (c * c),
            },
            Parameter::Eta => still(-lambda * lambda * c * self.sigma2 / (den * den), -c * self.sigma2 / (den * den)),
            Parameter::Sigma2 => still(-lambda * lambda * c * self.eta / (den * den), -c * self.eta / (den * den)),
        }
    }

    fn dw(&self, d: &Blocks) -> DMatrix<f64> {
        let dp = &d.dm * &self.g + &self.m * &d.dg;
        let dcommon =
            self.p.transpose() * &self.p * d.ddelta + (dp.transpose() * &self.p + self.p.transpose() * &dp) * self.delta;
        &self.w * dcommon * &self.w
    }

    /// Derivatives of `(v, a)` along one parameter.
    fn directional(&self, param: Parameter) -> (DVector<f64>, DVector<f64>) {
        let d = self.blocks(param);
        let dw = self.dw(&d);
        let dalpha = col_sums(&d.dm);
        let dv = &self.w * &self.alpha * d.ds + (dw * &self.alpha + &self.w * dalpha) * self.s;
        let da = &self.m * &self.v * d.dinv_c + (&d.dm * &self.v + &self.m * &dv) / self.c;
        (dv, da)
    }
}

#[cfg(test)]
/// Link-weight derivative of the common-influence matrix written term by term:
/// `delta W [E_ji M^T M G + lambda G^T M^T E_ji M^T M G + lambda G^T M^T M E_ij M G + G^T M^T M E_ij] W`.
pub(crate) fn dw_dg_expanded(inst: &ModelInstance, i: usize, j: usize) -> Result<DMatrix<f64>> {
    let c = inst
        .homogeneous_cost()
        .ok_or_else(|| Error::from(ValidationError::Argument("expanded form needs a common cost".into())))?;
    let b = Base::new(inst, c)?;
    let n = inst.n();
    let lambda = inst.beta() / c;
    let (m, g) = (&b.m, &b.g);
    let (mt, gt) = (m.transpose(), g.transpose());
    let eij = unit(n, i, j);
    let eji = unit(n, j, i);
    let inner = &eji * &mt * m * g
        + &gt * &mt * &eji * &mt * m * g * lambda
        + &gt * &mt * m * &eij * m * g * lambda
        + &gt * &mt * m * &eij;
    Ok(&b.w * inner * &b.w * b.delta)
}

#[cfg(test)]
pub(crate) fn dw_dg_generic(inst: &ModelInstance, i: usize, j: usize) -> Result<DMatrix<f64>> {
    let c = inst
        .homogeneous_cost()
        .ok_or_else(|| Error::from(ValidationError::Argument("needs a common cost".into())))?;
    let b = Base::new(inst, c)?;
    Ok(b.dw(&b.blocks(Parameter::Weight { i, j })))
}

fn check_parameter(inst: &ModelInstance, param: Parameter) -> Result<()> {
    if let Parameter::Weight { i, j } = param {
        let n = inst.n();
        if i >= n || j >= n {
            return Err(ValidationError::Argument(format!("link ({i}, {j}) outside a network of {n} agents")).into());
        }
        if i == j {
            return Err(ValidationError::SelfLoop(inst.labels()[i].clone()).into());
        }
    }
    Ok(())
}

/// Derivative of `target` with respect to `param` at the optimum, with an
/// analytic value for common costs (pay and effort) and a central difference
/// always. Analytic/fd disagreement beyond the flag tolerance is an error.
pub fn derivative(inst: &ModelInstance, target: Target, param: Parameter) -> Result<DerivativeReport> {
    check_parameter(inst, param)?;
    require_assumptions(inst)?;
    let x0 = base_value(inst, param);
    let step = choose_step(inst, param, x0);
    let fd = fd_at(inst, target, param, x0, step)?;

    let analytic = match (inst.homogeneous_cost(), target) {
        (Some(c), Target::V | Target::A) => {
            let (dv, da) = Base::new(inst, c)?.directional(param);
            Some(if target == Target::V { dv } else { da })
        }
        _ => None,
    };
    let max_rel_err = analytic.as_ref().map(|a| {
        a.iter().zip(fd.iter()).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
    });
    if let Some(err) = max_rel_err {
        if !(err <= TOLERANCES.fd_flag) {
            return Err(Error::consistency(format!(
                "analytic and finite-difference derivatives disagree (max relative error {err:e})"
            )));
        }
    }
    let value = analytic.as_ref().unwrap_or(&fd);
    let sign_class = value.iter().map(|&x| SignClass::of(x)).collect();
    Ok(DerivativeReport {
        target,
        parameter: param,
        fd_only: analytic.is_none(),
        analytic: analytic.map(|a| a.as_slice().to_vec()),
        fd: fd.as_slice().to_vec(),
        step,
        max_rel_err,
        sign_class,
    })
}

pub fn dv_dg(inst: &ModelInstance, i: usize, j: usize) -> Result<DerivativeReport> {
    derivative(inst, Target::V, Parameter::Weight { i, j })
}

pub fn da_dg(inst: &ModelInstance, i: usize, j: usize) -> Result<DerivativeReport> {
    derivative(inst, Target::A, Parameter::Weight { i, j })
}

pub fn dv_dbeta(inst: &ModelInstance) -> Result<DerivativeReport> {
    derivative(inst, Target::V, Parameter::Beta)
}

pub fn da_dbeta(inst: &ModelInstance) -> Result<DerivativeReport> {
    derivative(inst, Target::A, Parameter::Beta)
}

fn require_preference_param(which: Parameter) -> Result<()> {
    match which {
        Parameter::Cost | Parameter::Eta | Parameter::Sigma2 => Ok(()),
        other => Err(ValidationError::Argument(format!("{other:?} is not one of cost, eta, sigma2")).into()),
    }
}

/// Pay derivative with respect to cost, risk aversion or output variance.
pub fn dv_dparam(inst: &ModelInstance, which: Parameter) -> Result<DerivativeReport> {
    require_preference_param(which)?;
    derivative(inst, Target::V, which)
}

pub fn da_dparam(inst: &ModelInstance, which: Parameter) -> Result<DerivativeReport> {
    require_preference_param(which)?;
    derivative(inst, Target::A, which)
}

/// Profit derivative, by central difference only.
pub fn dprofit(inst: &ModelInstance, param: Parameter) -> Result<DerivativeReport> {
    derivative(inst, Target::Profit, param)
}

/// Slope of profit in the peer-effect strength at `beta = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalEffect {
    /// Published constant.
    pub kappa: f64,
    /// The published closed-form expansion, normalized to the same scale.
    pub kappa_expanded: f64,
    /// Constant implied by the envelope theorem: `1 / (c^2 (1 + c eta sigma2))`.
    pub kappa_envelope: f64,
    pub total_weight: f64,
    /// `kappa * total_weight`.
    pub analytic_slope: f64,
    pub envelope_slope: f64,
    pub fd_slope: f64,
    pub step: f64,
    /// Whether `analytic_slope` matches `fd_slope` to the marginal-effect tolerance.
    pub fd_consistent: bool,
}

/// The published constant `1/(c^2(1+k)) + (c-1)(1+k)/(c^3 k^2)` with `k = c eta sigma2`.
pub fn kappa(c: f64, eta: f64, sigma2: f64) -> f64 {
    let k = c * eta * sigma2;
    1.0 / (c * c * (1.0 + k)) + (c - 1.0) * (1.0 + k) / (c.powi(3) * k * k)
}

/// `(1+k)[c k^2 + (c-1)(1+k)^2] / (c^3 k^2)` times the squared isolated-agent pay `1/(1+k)^2`.
pub fn kappa_expanded(c: f64, eta: f64, sigma2: f64) -> f64 {
    let k = c * eta * sigma2;
    let v0 = 1.0 / (1.0 + k);
    (1.0 + k) * (c * k * k + (c - 1.0) * (1.0 + k).powi(2)) / (c.powi(3) * k * k) * v0 * v0
}

pub fn kappa_envelope(c: f64, eta: f64, sigma2: f64) -> f64 {
    1.0 / (c * c * (1.0 + c * eta * sigma2))
}

pub fn marginal_effect(inst: &ModelInstance) -> Result<MarginalEffect> {
    let c = inst
        .homogeneous_cost()
        .ok_or_else(|| Error::from(ValidationError::Argument("the marginal network effect needs a common cost".into())))?;
    let q = inst.params();
    let kappa = kappa(c, q.eta, q.sigma2);
    let kappa_expanded = kappa_expanded(c, q.eta, q.sigma2);
    if (kappa - kappa_expanded).abs() > TOLERANCES.kappa_forms * kappa.abs().max(1.0) {
        return Err(Error::consistency(format!("kappa forms disagree: {kappa} vs {kappa_expanded}")));
    }
    let kappa_envelope = kappa_envelope(c, q.eta, q.sigma2);
    let total_weight = inst.network().total_weight();
    let step = 1e-6;
    let at_zero = inst.probe_params(EconParams { beta: 0.0, ..q.clone() });
    let fd = fd_at(&at_zero, Target::Profit, Parameter::Beta, 0.0, step)?;
    let fd_slope = fd[0];
    let analytic_slope = kappa * total_weight;
    Ok(MarginalEffect {
        kappa,
        kappa_expanded,
        kappa_envelope,
        total_weight,
        analytic_slope,
        envelope_slope: kappa_envelope * total_weight,
        fd_slope,
        step,
        fd_consistent: (analytic_slope - fd_slope).abs() <= TOLERANCES.marginal_fd * fd_slope.abs().max(1.0),
    })
}

/// Graph-theoretic prediction of which agents respond to a marginal increase
/// of `g_ij`, on the network with that link present.
///
/// Pay strictly increases for `j` and for every agent weakly connected to `j`
/// that has an in-link; effort strictly increases for `i`, `j` and every agent
/// weakly connected to `j`. Everyone else is unaffected, as is everyone when
/// `beta = 0`.
pub fn predict_link_effect(inst: &ModelInstance, i: usize, j: usize) -> (Vec<SignClass>, Vec<SignClass>) {
    let n = inst.n();
    if inst.beta() == 0.0 {
        return (vec![SignClass::Zero; n], vec![SignClass::Zero; n]);
    }
    let mut g = inst.g().clone();
    if g[(i, j)] == 0.0 {
        g[(i, j)] = 1.0;
    }
    let augmented = Network::from_matrix_unchecked(g);
    let comp = weak_components(&augmented).into_iter().find(|c| c.contains(&j)).unwrap_or_default();
    let strict = |on: bool| if on { SignClass::StrictIncrease } else { SignClass::Zero };
    let v = (0..n).map(|k| strict(k == j || (comp.contains(&k) && has_in_link(&augmented, k)))).collect();
    let a = (0..n).map(|k| strict(k == i || k == j || comp.contains(&k))).collect();
    (v, a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AgentClass {
    pub predicted: SignClass,
    pub numeric: SignClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkClassification {
    pub v: Vec<AgentClass>,
    pub a: Vec<AgentClass>,
}

/// Prediction and numeric signs side by side; any disagreement is an error.
pub fn classify_link_effect(inst: &ModelInstance, i: usize, j: usize) -> Result<LinkClassification> {
    let dv = dv_dg(inst, i, j)?;
    let da = da_dg(inst, i, j)?;
    let (pv, pa) = predict_link_effect(inst, i, j);
    let pair = |pred: &[SignClass], num: &[SignClass]| -> Vec<AgentClass> {
        pred.iter().zip(num).map(|(&predicted, &numeric)| AgentClass { predicted, numeric }).collect()
    };
    let out = LinkClassification { v: pair(&pv, &dv.sign_class), a: pair(&pa, &da.sign_class) };
    let labels = inst.labels();
    let mut bad = Vec::new();
    for (name, row) in [("v", &out.v), ("a", &out.a)] {
        for (k, cls) in row.iter().enumerate() {
            if cls.predicted != cls.numeric {
                bad.push(format!("{name}[{}]: predicted {:?}, got {:?}", labels[k], cls.predicted, cls.numeric));
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::consistency(format!(
            "link {} -> {}: {}",
            labels[i],
            labels[j],
            bad.join("; ")
        )));
    }
    Ok(out)
}
