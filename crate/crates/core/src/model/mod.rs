//! Problem instances: the peer-effect network, economic parameters and agent labels.

mod graph;
mod io;
mod spectral;

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::ValidationError;

pub use graph::{has_any_link, has_in_link, in_degree, out_degree, weak_components};
pub use io::{parse_model, serialize_model};
pub use spectral::{check_assumptions, spectral_radius, symmetric_spectral_radius, AssumptionReport};

/// An agent as seen from the outside (label) and the inside (dense index).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AgentId {
    pub label: String,
    pub index: usize,
}

/// Weighted directed network; `g[(i, j)]` is how strongly `i`'s marginal benefit
/// responds to `j`'s effort.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    g: DMatrix<f64>,
}

impl Network {
    /// Validates non-negative finite weights and an empty diagonal.
    pub fn new(g: DMatrix<f64>) -> Result<Self, ValidationError> {
        let labels: Vec<String> = (0..g.nrows()).map(|i| (i + 1).to_string()).collect();
        Self::validated(g, &labels)
    }

    pub fn empty(n: usize) -> Self {
        Network { g: DMatrix::zeros(n, n) }
    }

    /// Builds a network from `(from, to, weight)` triples over 0-based indices.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, ValidationError> {
        let mut g = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(ValidationError::UnknownAgent(format!("{}", i.max(j) + 1)));
            }
            g[(i, j)] = w;
        }
        Self::new(g)
    }

    fn validated(g: DMatrix<f64>, labels: &[String]) -> Result<Self, ValidationError> {
        if g.nrows() != g.ncols() {
            return Err(ValidationError::DimensionMismatch {
                field: "network",
                expected: g.nrows(),
                found: g.ncols(),
            });
        }
        if g.nrows() != labels.len() {
            return Err(ValidationError::DimensionMismatch {
                field: "network",
                expected: labels.len(),
                found: g.nrows(),
            });
        }
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let w = g[(i, j)];
                if !w.is_finite() {
                    return Err(ValidationError::NonFinite { field: "weight", agent: Some(labels[i].clone()) });
                }
                if i == j && w != 0.0 {
                    return Err(ValidationError::SelfLoop(labels[i].clone()));
                }
                if w < 0.0 {
                    return Err(ValidationError::NegativeWeight {
                        from: labels[i].clone(),
                        to: labels[j].clone(),
                        weight: w,
                    });
                }
            }
        }
        Ok(Network { g })
    }

    /// Skips validation; used for finite-difference probes that may step below zero.
    pub(crate) fn from_matrix_unchecked(g: DMatrix<f64>) -> Self {
        Network { g }
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.g[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Sum of all link weights.
    pub fn total_weight(&self) -> f64 {
        self.g.sum()
    }

    pub fn transpose(&self) -> Network {
        Network { g: self.g.transpose() }
    }

    pub fn is_empty_network(&self) -> bool {
        self.g.iter().all(|&w| w == 0.0)
    }
}

/// Economic parameters. `cost` and `reservation` hold one entry per agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconParams {
    pub beta: f64,
    pub cost: Vec<f64>,
    pub eta: f64,
    pub sigma2: f64,
    pub reservation: Vec<f64>,
}

impl EconParams {
    /// Homogeneous cost and zero reservations for `n` agents.
    pub fn homogeneous(n: usize, beta: f64, cost: f64, eta: f64, sigma2: f64) -> Self {
        EconParams { beta, cost: vec![cost; n], eta, sigma2, reservation: vec![0.0; n] }
    }

    /// `eta * sigma2`, the risk-premium coefficient.
    pub fn risk(&self) -> f64 {
        self.eta * self.sigma2
    }
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    network: Network,
    params: EconParams,
    labels: Vec<String>,
}

impl ModelInstance {
    pub fn new(labels: Vec<String>, network: Network, params: EconParams) -> Result<Self, ValidationError> {
        let n = labels.len();
        if n == 0 {
            return Err(ValidationError::NoAgents);
        }
        let mut seen = HashSet::with_capacity(n);
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ValidationError::DuplicateLabel(l.clone()));
            }
        }
        let network = Network::validated(network.g, &labels)?;
        validate_params(&params, &labels)?;
        Ok(ModelInstance { network, params, labels })
    }

    /// Labels `1..=n`, matching 1-based agent numbering.
    pub fn with_numbered_agents(network: Network, params: EconParams) -> Result<Self, ValidationError> {
        let labels = (1..=network.n()).map(|i| i.to_string()).collect();
        Self::new(labels, network, params)
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<String>, network: Network, params: EconParams) -> Self {
        ModelInstance { network, params, labels }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn params(&self) -> &EconParams {
        &self.params
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.labels.iter().enumerate().map(|(index, label)| AgentId { label: label.clone(), index })
    }

    pub fn index_of(&self, label: &str) -> Result<usize, ValidationError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ValidationError::UnknownAgent(label.to_string()))
    }

    pub fn g(&self) -> &DMatrix<f64> {
        self.network.matrix()
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn cost(&self, i: usize) -> f64 {
        self.params.cost[i]
    }

    /// The common cost when every agent has the same one.
    pub fn homogeneous_cost(&self) -> Option<f64> {
        let c0 = self.params.cost[0];
        self.params.cost.iter().all(|&c| c == c0).then_some(c0)
    }

    pub fn cost_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.params.cost))
    }

    pub fn reservation(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.params.reservation)
    }

    /// `beta / c` for homogeneous costs.
    pub fn lambda(&self) -> Option<f64> {
        self.homogeneous_cost().map(|c| self.params.beta / c)
    }

    pub fn with_params(&self, params: EconParams) -> Result<Self, ValidationError> {
        Self::new(self.labels.clone(), self.network.clone(), params)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self, ValidationError> {
        self.with_params(EconParams { beta, ..self.params.clone() })
    }

    pub fn with_network(&self, network: Network) -> Result<Self, ValidationError> {
        Self::new(self.labels.clone(), network, self.params.clone())
    }

    pub fn with_costs(&self, cost: Vec<f64>) -> Result<Self, ValidationError> {
        self.with_params(EconParams { cost, ..self.params.clone() })
    }

    /// Copy with a modified parameter record and no validation. Only for
    /// finite-difference probes, which may leave the admissible region.
    pub(crate) fn probe_params(&self, params: EconParams) -> Self {
        Self::from_parts_unchecked(self.labels.clone(), self.network.clone(), params)
    }

    pub(crate) fn probe_weight(&self, i: usize, j: usize, w: f64) -> Self {
        let mut g = self.network.g.clone();
        g[(i, j)] = w;
        Self::from_parts_unchecked(self.labels.clone(), Network::from_matrix_unchecked(g), self.params.clone())
    }
}

fn validate_params(p: &EconParams, labels: &[String]) -> Result<(), ValidationError> {
    let n = labels.len();
    if p.cost.len() != n {
        return Err(ValidationError::DimensionMismatch { field: "cost", expected: n, found: p.cost.len() });
    }
    if p.reservation.len() != n {
        return Err(ValidationError::DimensionMismatch {
            field: "reservation",
            expected: n,
            found: p.reservation.len(),
        });
    }
    for (field, value) in [("beta", p.beta), ("eta", p.eta), ("sigma2", p.sigma2)] {
        if !value.is_finite() {
            return Err(ValidationError::NonFinite { field, agent: None });
        }
    }
    if p.beta < 0.0 {
        return Err(ValidationError::Negative { field: "beta", value: p.beta });
    }
    for (field, value) in [("eta", p.eta), ("sigma2", p.sigma2)] {
        if value <= 0.0 {
            return Err(ValidationError::NonPositive { field, value, agent: None });
        }
    }
    for (i, &c) in p.cost.iter().enumerate() {
        if !c.is_finite() {
            return Err(ValidationError::NonFinite { field: "cost", agent: Some(labels[i].clone()) });
        }
        if c <= 0.0 {
            return Err(ValidationError::NonPositive { field: "cost", value: c, agent: Some(labels[i].clone()) });
        }
    }
    for (i, &r) in p.reservation.iter().enumerate() {
        if !r.is_finite() {
            return Err(ValidationError::NonFinite { field: "reservation", agent: Some(labels[i].clone()) });
        }
    }
    Ok(())
}
