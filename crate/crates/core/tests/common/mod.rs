#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use netcontract::model::{check_assumptions, spectral_radius};
use netcontract::{EconParams, ModelInstance, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load(name: &str) -> ModelInstance {
    netcontract::parse_model(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random weighted digraph without self-loops; weights in (0, 1].
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i != j && rng.random::<f64>() < density {
            1.0 - rng.random::<f64>()
        } else {
            0.0
        }
    })
}

pub fn fig1() -> ModelInstance {
    let g = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    homogeneous(g, 0.5, 1.0, 1.0, 1.0)
}

pub fn homogeneous(g: DMatrix<f64>, beta: f64, c: f64, eta: f64, sigma2: f64) -> ModelInstance {
    let n = g.nrows();
    let net = Network::new(g).unwrap();
    ModelInstance::with_numbered_agents(net, EconParams::homogeneous(n, beta, c, eta, sigma2)).unwrap()
}

/// Common-cost instance with rho1, rho2 <= `cap`.
pub fn random_instance(rng: &mut impl Rng, max_n: usize, cap: f64) -> ModelInstance {
    loop {
        let n = rng.random_range(2..=max_n);
        let density = rng.random_range(0.2..0.9);
        let g = random_graph(rng, n, density);
        if let Some(inst) = with_random_params(rng, g, cap) {
            return inst;
        }
    }
}

/// Random (beta, c, eta, sigma2, reservations) on a fixed graph, subject to the caps.
pub fn with_random_params(rng: &mut impl Rng, g: DMatrix<f64>, cap: f64) -> Option<ModelInstance> {
    let n = g.nrows();
    let c = rng.random_range(0.5..2.0);
    let eta = rng.random_range(0.5..2.0);
    let sigma2 = rng.random_range(0.5..2.0);
    let rho_g = spectral_radius(&g).unwrap();
    // acyclic graphs satisfy the radius caps at any strength; keep beta on the scale of c
    let scale = if rho_g > 1e-9 { c / rho_g } else { c / g.row_sum().max().max(1.0) };
    for _ in 0..20 {
        let beta = rng.random_range(0.05..1.0) * cap * scale;
        let mut params = EconParams::homogeneous(n, beta, c, eta, sigma2);
        params.reservation = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let inst = ModelInstance::with_numbered_agents(Network::new(g.clone()).unwrap(), params).unwrap();
        let report = check_assumptions(&inst).unwrap();
        if report.rho1 <= cap && report.rho2 <= cap {
            return Some(inst);
        }
    }
    None
}

/// Fixed, reproducible family of admissible instances.
pub fn instance_set(count: usize, seed: u64) -> Vec<ModelInstance> {
    let mut r = rng(seed);
    (0..count).map(|_| random_instance(&mut r, 6, 0.6)).collect()
}

/// (I - lambda G)^-1 by a plain dense inverse, independent of the library.
pub fn m_matrix(g: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let n = g.nrows();
    (DMatrix::identity(n, n) - g * lambda).try_inverse().unwrap()
}

pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn vmax_abs(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Central difference of a vector-valued function.
pub fn central<F: Fn(f64) -> DVector<f64>>(f: F, x: f64, h: f64) -> DVector<f64> {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

/// Weak components by union-find, for cross-checking the library.
pub fn components(g: &DMatrix<f64>) -> Vec<usize> {
    let n = g.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in 0..n {
            if g[(i, j)] != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Block-diagonal union of two graphs.
pub fn disjoint_union(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut g = DMatrix::zeros(na + nb, na + nb);
    g.view_mut((0, 0), (na, na)).copy_from(a);
    g.view_mut((na, na), (nb, nb)).copy_from(b);
    g
}
