mod common;

use nalgebra::{DMatrix, DVector};
use netcontract::contracts::{empty_baseline, optimal_v, optimal_v_het, principal_profit, w_matrix};
use netcontract::equilibrium::{best_response, certainty_equivalent, influence_matrix, nash_efforts, Contract};
use netcontract::model::{check_assumptions, has_any_link, has_in_link, spectral_radius, weak_components};
use netcontract::oracle::simulate_outputs;
use netcontract::placement::{beta_sweep, enumerate_placements, linspace};
use netcontract::statics::{self, Parameter};
use netcontract::{parse_model, serialize_model, solve, EconParams, ModelInstance, Network};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Random weighted digraph, weights in [0, 1], self-loops removed.
fn arb_graph(max_n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(prop_oneof![2 => Just(0.0), 3 => 0.0..=1.0f64], n * n).prop_map(move |w| {
            DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w[i * n + j] })
        })
    })
}

/// Admissible common-cost instance with rho1, rho2 <= 0.6.
fn arb_instance() -> impl Strategy<Value = ModelInstance> {
    (arb_graph(6), any::<u64>()).prop_filter_map("no admissible strength", |(g, seed)| {
        with_random_params(&mut rng(seed), g, 0.6)
    })
}

fn same_component(comps: &[Vec<usize>], a: usize, b: usize) -> bool {
    comps.iter().any(|c| c.contains(&a) && c.contains(&b))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn serialize_parse_round_trip(inst in arb_instance()) {
        let text = serialize_model(&inst);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(back.labels(), inst.labels());
        // bit-exact weights and parameters
        prop_assert_eq!(back.g(), inst.g());
        prop_assert_eq!(back.params(), inst.params());
    }

    #[test]
    fn weak_components_ignore_direction(g in arb_graph(7)) {
        let net = Network::new(g.clone()).unwrap();
        let mut a = weak_components(&net);
        let mut b = weak_components(&net.transpose());
        a.sort();
        b.sort();
        prop_assert_eq!(&a, &b);
        // agrees with a union-find labelling
        let labels = components(&g);
        for i in 0..g.nrows() {
            for j in 0..g.nrows() {
                prop_assert_eq!(labels[i] == labels[j], same_component(&a, i, j));
            }
        }
    }

    #[test]
    fn spectral_radius_is_homogeneous(g in arb_graph(6), s in 0.0..5.0f64) {
        let r = spectral_radius(&g).unwrap();
        let rs = spectral_radius(&(&g * s)).unwrap();
        prop_assert!((rs - s * r).abs() <= 1e-10 * (s * r).max(1.0), "{} vs {}", rs, s * r);
    }

    #[test]
    fn nilpotent_radius_is_zero(g in arb_graph(7), perm_seed in any::<u64>()) {
        let n = g.nrows();
        // strictly upper triangular, then relabelled
        let upper = DMatrix::from_fn(n, n, |i, j| if i < j { g[(i, j)] } else { 0.0 });
        let mut order: Vec<usize> = (0..n).collect();
        let mut r = rng(perm_seed);
        for k in (1..n).rev() {
            order.swap(k, r.random_range(0..=k));
        }
        let p = DMatrix::from_fn(n, n, |i, j| upper[(order[i], order[j])]);
        prop_assert!(spectral_radius(&p).unwrap() <= 1e-10);
    }

    #[test]
    fn influence_matrix_inverts(inst in arb_instance()) {
        let s = influence_matrix(&inst).unwrap();
        let n = inst.n();
        let lambda = s.lambda.unwrap();
        let resid = (DMatrix::identity(n, n) - inst.g() * lambda) * &s.m - DMatrix::identity(n, n);
        prop_assert!(inf_norm(&resid) <= 1e-10);
        prop_assert!(s.m.iter().all(|&x| x >= -1e-12));
        let alpha = DVector::from_fn(n, |j, _| s.m.column(j).sum());
        prop_assert!((alpha - &s.alpha).amax() <= 1e-12);
    }

    #[test]
    fn nash_efforts_are_a_best_response_fixed_point(inst in arb_instance(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = DVector::from_fn(inst.n(), |_, _| r.random_range(0.0..2.0));
        let a = nash_efforts(&inst, &v).unwrap();
        for i in 0..inst.n() {
            prop_assert!((best_response(&inst, i, v[i], &a) - a[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn raising_one_rate_raises_efforts(inst in arb_instance(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = inst.n();
        let v = DVector::from_fn(n, |_, _| r.random_range(0.0..2.0));
        let i = r.random_range(0..n);
        let mut v2 = v.clone();
        v2[i] += 0.1;
        let (a, b) = (nash_efforts(&inst, &v).unwrap(), nash_efforts(&inst, &v2).unwrap());
        prop_assert!((0..n).all(|j| b[j] - a[j] >= -1e-12));
        prop_assert!(b[i] - a[i] > 1e-9);
    }

    #[test]
    fn common_influence_structure(inst in arb_instance()) {
        let w = w_matrix(&inst).unwrap().w;
        let n = inst.n();
        let comps = weak_components(inst.network());
        for i in 0..n {
            prop_assert!(w[(i, i)] >= 1.0 - 1e-12);
            for j in 0..n {
                prop_assert!((w[(i, j)] - w[(j, i)]).abs() <= 1e-10);
                prop_assert!(w[(i, j)] >= -1e-12);
                if !same_component(&comps, i, j) {
                    prop_assert!(w[(i, j)].abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn first_order_system_matches_closed_form(inst in arb_instance()) {
        let v = optimal_v(&inst).unwrap();
        let v_het = optimal_v_het(&inst).unwrap();
        prop_assert!((v - v_het).amax() <= 1e-9);
    }

    #[test]
    fn network_never_lowers_pay(inst in arb_instance()) {
        let v = solve(&inst).unwrap().contract.v;
        for i in 0..inst.n() {
            prop_assert!(v[i] >= empty_baseline(&inst, i).v - 1e-12);
        }
    }

    #[test]
    fn optimum_beats_nearby_contracts(inst in arb_instance(), seed in any::<u64>()) {
        let v = optimal_v(&inst).unwrap();
        let best = principal_profit(&inst, &v).unwrap();
        let mut r = rng(seed);
        let n = inst.n();
        for _ in 0..200 {
            let dir = DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0));
            let eps = dir.normalize() * r.random_range(0.0..0.1);
            prop_assert!(principal_profit(&inst, &(&v + eps)).unwrap() <= best + 1e-12);
        }
    }

    #[test]
    fn pay_weakly_rises_with_any_link(inst in arb_instance(), pick in any::<(usize, usize)>()) {
        let n = inst.n();
        let i = pick.0 % n;
        let j = (i + 1 + pick.1 % (n - 1)) % n;
        let d = statics::dv_dg(&inst, i, j).unwrap();
        prop_assert!(d.analytic.unwrap().iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn strength_raises_pay_and_effort(inst in arb_instance()) {
        let dv = statics::dv_dbeta(&inst).unwrap().analytic.unwrap();
        let da = statics::da_dbeta(&inst).unwrap().analytic.unwrap();
        let net = inst.network();
        for k in 0..inst.n() {
            prop_assert!(dv[k] >= -1e-12 && da[k] >= -1e-12);
            prop_assert_eq!(dv[k] > 1e-9, has_in_link(net, k), "v[{}] = {:e}", k, dv[k]);
            prop_assert_eq!(da[k] > 1e-9, has_any_link(net, k), "a[{}] = {:e}", k, da[k]);
        }
    }

    #[test]
    fn cost_and_risk_lower_pay(inst in arb_instance()) {
        for p in [Parameter::Cost, Parameter::Eta, Parameter::Sigma2] {
            let dv = statics::dv_dparam(&inst, p).unwrap().analytic.unwrap();
            prop_assert!(dv.iter().all(|&x| x <= 1e-12), "{:?}: {:?}", p, dv);
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn cross_component_derivatives_vanish(
        ga in arb_graph(3),
        gb in arb_graph(3),
        seed in any::<u64>(),
    ) {
        let (na, nb) = (ga.nrows(), gb.nrows());
        let g = disjoint_union(&ga, &gb);
        let Some(inst) = with_random_params(&mut rng(seed), g, 0.6) else { return Ok(()) };
        for (i, j) in [(0, 1), (na, na + 1)] {
            let other: Vec<usize> = if i < na { (na..na + nb).collect() } else { (0..na).collect() };
            for d in [statics::dv_dg(&inst, i, j).unwrap(), statics::da_dg(&inst, i, j).unwrap()] {
                let an = d.analytic.unwrap();
                prop_assert!(other.iter().all(|&k| an[k].abs() <= 1e-12));
            }
        }
    }

    #[test]
    fn influence_derivatives_by_differences(inst in arb_instance(), pick in any::<(usize, usize)>()) {
        let n = inst.n();
        let c = inst.homogeneous_cost().unwrap();
        let lambda = inst.beta() / c;
        let m = influence_matrix(&inst).unwrap().m;
        let h = 1e-6;

        let i = pick.0 % n;
        let j = (i + 1 + pick.1 % (n - 1)) % n;
        let w = inst.g()[(i, j)];
        let at = |x: f64| {
            let mut g = inst.g().clone();
            g[(i, j)] = x;
            influence_matrix(&inst.with_network(Network::new(g).unwrap()).unwrap()).unwrap().m
        };
        let fd = (at(w + h) - at(w)) / h;
        let mut e = DMatrix::zeros(n, n);
        e[(i, j)] = 1.0;
        let analytic = &m * e * &m * lambda;
        prop_assert!((fd - analytic).amax() <= 1e-6 * m.amax().max(1.0));

        let b = inst.beta();
        let fd_beta = (influence_matrix(&inst.with_beta(b + h).unwrap()).unwrap().m
            - influence_matrix(&inst.with_beta(b - h).unwrap()).unwrap().m)
            / (2.0 * h);
        let analytic_beta = &m * inst.g() * &m / c;
        prop_assert!((fd_beta - analytic_beta).amax() <= 1e-6 * m.amax().max(1.0));
    }

    #[test]
    fn neumann_partial_sums_converge(g in arb_graph(6), c in 0.5..2.0f64) {
        // scale so that the norm bound applies: q = ||lambda G||_inf <= 0.5
        let norm = inf_norm(&g);
        prop_assume!(norm > 0.0);
        let beta = 0.5 * c / norm;
        let inst = homogeneous(g.clone(), beta, c, 1.0, 1.0);
        let m = influence_matrix(&inst).unwrap().m;
        let t = &g * (beta / c);
        let q = inf_norm(&t);
        let n = g.nrows();
        let mut sum = DMatrix::identity(n, n);
        let mut power = DMatrix::identity(n, n);
        for k in 1..=30 {
            power = &power * &t;
            sum += &power;
            let bound = q.powi(k + 1) / (1.0 - q);
            prop_assert!(inf_norm(&(&m - &sum)) <= bound + 1e-13, "k={} err={:e} bound={:e}", k, inf_norm(&(&m - &sum)), bound);
        }
        prop_assert!(check_assumptions(&inst).unwrap().rho1 <= 0.5 + 1e-12);
    }
}

#[test]
fn certainty_equivalent_without_peer_effects_ignores_network() {
    let mut r = rng(11);
    for _ in 0..50 {
        let n = r.random_range(2..=6);
        let g = random_graph(&mut r, n, 0.5);
        let inst = homogeneous(g, 0.0, r.random_range(0.5..2.0), 1.0, r.random_range(0.5..2.0));
        let bare = inst.with_network(Network::empty(n)).unwrap();
        let c = inst.homogeneous_cost().unwrap();
        let contract = Contract {
            z: DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0)),
            v: DVector::from_fn(n, |_, _| r.random_range(0.0..1.0)),
        };
        let a = &contract.v / c;
        for i in 0..n {
            assert_eq!(certainty_equivalent(&inst, i, &contract, &a), certainty_equivalent(&bare, i, &contract, &a));
        }
    }
}

/// Path 0-1-2-3-4 with both directions; reversal is an automorphism.
fn path_network(n: usize) -> Network {
    let mut edges = Vec::new();
    for k in 0..n - 1 {
        edges.push((k, k + 1, 1.0));
        edges.push((k + 1, k, 1.0));
    }
    Network::from_edges(n, &edges).unwrap()
}

#[test]
fn automorphic_assignments_earn_the_same() {
    let mut r = rng(12);
    for n in [3, 4, 5] {
        let net = path_network(n);
        let costs: Vec<f64> = (0..n).map(|_| r.random_range(0.8..1.5)).collect();
        let params = EconParams::homogeneous(n, 0.05, 1.0, 1.0, 1.0);
        let res = enumerate_placements(&net, &costs, &params, 0.05).unwrap();
        for a in &res.assignments {
            let mirrored: Vec<f64> = a.costs.iter().rev().copied().collect();
            let b = res.assignments.iter().find(|x| x.costs == mirrored).unwrap();
            let (pa, pb) = (a.profit.unwrap(), b.profit.unwrap());
            assert!((pa - pb).abs() <= 1e-10, "{:?}: {pa} vs {pb}", a.costs);
        }
    }

    // directed 4-cycle: rotation is an automorphism
    let net = Network::from_edges(4, &[(0, 1, 0.7), (1, 2, 0.7), (2, 3, 0.7), (3, 0, 0.7)]).unwrap();
    let costs = [0.9, 1.0, 1.2, 1.4];
    let params = EconParams::homogeneous(4, 0.2, 1.0, 1.0, 1.0);
    let res = enumerate_placements(&net, &costs, &params, 0.2).unwrap();
    for a in &res.assignments {
        let mut rotated = a.costs.clone();
        rotated.rotate_right(1);
        let b = res.assignments.iter().find(|x| x.costs == rotated).unwrap();
        assert!((a.profit.unwrap() - b.profit.unwrap()).abs() <= 1e-10);
    }
}

#[test]
fn placement_is_reproducible() {
    let costs = [0.5, 0.5, 1.0, 0.7];
    let net = path_network(4);
    let params = EconParams::homogeneous(4, 0.1, 1.0, 1.0, 1.0);
    let first = enumerate_placements(&net, &costs, &params, 0.1).unwrap();
    for _ in 0..5 {
        assert_eq!(enumerate_placements(&net, &costs, &params, 0.1).unwrap(), first);
    }
    // permuting the input multiset changes nothing
    let shuffled = [1.0, 0.7, 0.5, 0.5];
    assert_eq!(enumerate_placements(&net, &shuffled, &params, 0.1).unwrap(), first);
}

#[test]
fn sweep_has_no_jumps() {
    for name in ["line.json", "fig1.json", "fig2.json"] {
        let inst = load(name);
        let to = netcontract::placement::default_beta_to(&inst).unwrap();
        let sweep = beta_sweep(&inst, &linspace(0.0, to, 200)).unwrap();
        let rows = &sweep.rows;
        for k in 1..rows.len() - 1 {
            for i in 0..inst.n() {
                let step = (rows[k + 1].v[i] - rows[k].v[i]).abs();
                let prev = (rows[k].v[i] - rows[k - 1].v[i]).abs();
                // allowed: ten times the neighbouring slope, plus rounding
                assert!(step <= 10.0 * prev + 1e-12, "{name}: beta={} agent {i}", rows[k].beta);
            }
        }
    }
}

#[test]
fn simulation_is_bit_reproducible() {
    let inst = fig1();
    let sol = solve(&inst).unwrap();
    let a = simulate_outputs(&inst, &sol.contract, &sol.efforts, 150_000, 99).unwrap();
    let b = simulate_outputs(&inst, &sol.contract, &sol.efforts, 150_000, 99).unwrap();
    assert_eq!(a, b);
    let c = simulate_outputs(&inst, &sol.contract, &sol.efforts, 150_000, 100).unwrap();
    assert_ne!(a.mean_profit, c.mean_profit);
}

#[test]
fn simulated_certainty_equivalent_matches() {
    let inst = load("fig2.json");
    let sol = solve(&inst).unwrap();
    let sim = simulate_outputs(&inst, &sol.contract, &sol.efforts, 400_000, 5).unwrap();
    let eta = inst.params().eta;
    for i in 0..inst.n() {
        let se = sim.std_err[i] / (eta * sim.mean_utility[i].abs());
        assert!((sim.implied_ce[i] - sol.ce[i]).abs() <= 4.0 * se, "agent {i}");
    }
}

#[test]
fn kappa_forms_agree_on_grid() {
    for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for eta in [0.1, 1.0, 3.0] {
            for s2 in [0.1, 1.0, 3.0] {
                let (a, b) = (statics::kappa(c, eta, s2), statics::kappa_expanded(c, eta, s2));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "c={c} eta={eta} s2={s2}");
            }
        }
    }
}
