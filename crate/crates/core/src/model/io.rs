use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EconParams, ModelInstance, Network};
use crate::error::ValidationError;

/// On-disk model schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ModelFile {
    pub agents: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    pub beta: f64,
    pub cost: CostSpec,
    pub eta: f64,
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct EdgeRecord {
    pub from: String,
    pub to: String,
    pub w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum CostSpec {
    Common(f64),
    PerAgent(Vec<f64>),
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<ModelInstance, ValidationError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ValidationError::Json(e.to_string()))?;
    from_file(file)
}

pub(crate) fn from_file(file: ModelFile) -> Result<ModelInstance, ValidationError> {
    let n = file.agents.len();
    if n == 0 {
        return Err(ValidationError::NoAgents);
    }
    let mut index = HashMap::with_capacity(n);
    for (i, label) in file.agents.iter().enumerate() {
        if index.insert(label.as_str(), i).is_some() {
            return Err(ValidationError::DuplicateLabel(label.clone()));
        }
    }
    let lookup = |label: &str| index.get(label).copied().ok_or_else(|| ValidationError::UnknownAgent(label.to_string()));

    let mut g = DMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    for e in &file.edges {
        let (i, j) = (lookup(&e.from)?, lookup(&e.to)?);
        if i == j {
            return Err(ValidationError::SelfLoop(e.from.clone()));
        }
        if std::mem::replace(&mut seen[i * n + j], true) {
            return Err(ValidationError::DuplicateEdge { from: e.from.clone(), to: e.to.clone() });
        }
        g[(i, j)] = e.w;
    }

    let cost = match file.cost {
        CostSpec::Common(c) => vec![c; n],
        CostSpec::PerAgent(v) => v,
    };
    let reservation = file.reservation.unwrap_or_else(|| vec![0.0; n]);
    let params = EconParams { beta: file.beta, cost, eta: file.eta, sigma2: file.sigma2, reservation };
    ModelInstance::new(file.agents, Network::from_matrix_unchecked(g), params)
}

pub(crate) fn to_file(inst: &ModelInstance) -> ModelFile {
    let n = inst.n();
    let labels = inst.labels();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let w = inst.g()[(i, j)];
            if w != 0.0 {
                edges.push(EdgeRecord { from: labels[i].clone(), to: labels[j].clone(), w });
            }
        }
    }
    let p = inst.params();
    let cost = match inst.homogeneous_cost() {
        Some(c) => CostSpec::Common(c),
        None => CostSpec::PerAgent(p.cost.clone()),
    };
    ModelFile {
        agents: labels.to_vec(),
        edges,
        beta: p.beta,
        cost,
        eta: p.eta,
        sigma2: p.sigma2,
        reservation: Some(p.reservation.clone()),
    }
}

/// Writes an instance in the model-file schema.
pub fn serialize_model(inst: &ModelInstance) -> String {
    serde_json::to_string_pretty(&to_file(inst)).expect("model file serializes")
}
