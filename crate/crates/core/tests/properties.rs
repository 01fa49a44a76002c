mod common;

use approx::relative_eq;
use common::*;
use fcir::gp::{condense, run_algorithm2, GpOptions, Protection};
use fcir::jpac::{run_jpac, JpacOptions};
use fcir::network::{
    cognitive_interference, is_sinr_feasible, powers_from_sinr, sinr_of, targets_for, total_interference,
};
use fcir::region::{build_fcir, pu_powers_from_interference, FcirDocument};
use fcir::tpc::{run_tpc, tpc_step, TpcOptions};
use fcir::{PowerVector, SinrVector};
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn sinr_round_trip(seed in any::<u64>(), pbs in 1usize..4, pus in 1usize..6, sus in 0usize..6) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, pbs, pus, 2, sus);
        let gamma = SinrVector(net.target_sinr().to_vec());
        if let Ok(p) = powers_from_sinr(&net, &gamma) {
            let back = sinr_of(&net, &p).unwrap();
            for (a, b) in back.iter().zip(gamma.iter()) {
                prop_assert!(relative_eq!(*a, *b, max_relative = 1e-9), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn scale_covariance(seed in any::<u64>(), factor in 1e-6f64..1e3) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 2, 3, 2, 3);
        let gamma = SinrVector(net.target_sinr().to_vec());
        let scaled = net.scaled(factor);
        match (powers_from_sinr(&net, &gamma), powers_from_sinr(&scaled, &gamma)) {
            (Ok(p), Ok(q)) => {
                for (a, b) in p.iter().zip(q.iter()) {
                    prop_assert!(relative_eq!(a * factor, *b, max_relative = 1e-9));
                }
                prop_assert_eq!(is_sinr_feasible(&net, &gamma), is_sinr_feasible(&scaled, &gamma));
                let back = sinr_of(&scaled, &q).unwrap();
                for (a, b) in back.iter().zip(gamma.iter()) {
                    prop_assert!(relative_eq!(*a, *b, max_relative = 1e-9));
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "feasibility changed under scaling"),
        }
    }

    #[test]
    fn interference_decomposes(seed in any::<u64>(), pus in 1usize..6, sus in 0usize..6) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 3, pus, 2, sus);
        let p = PowerVector((0..net.num_users()).map(|_| r.random_range(0.0..1.0)).collect());
        let sus: Vec<usize> = net.su_indices().collect();
        let total = total_interference(&net, &p);
        let cog = cognitive_interference(&net, &p, &sus);
        for m in 0..net.num_pbs() {
            let pu_part: f64 = net.pu_indices().filter(|&i| net.serving(i) != m).map(|i| p[i] * net.gain(m, i)).sum();
            prop_assert!(relative_eq!(total[m], cog[m] + pu_part, max_relative = 1e-12));
        }
    }

    #[test]
    fn feasibility_matches_positive_solution(seed in any::<u64>(), scale in 0.1f64..20.0) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 2, 3, 2, 3);
        let gamma: Vec<f64> = net.target_sinr().iter().map(|g| g * scale).collect();
        let scaled = net.with_targets(gamma.clone()).unwrap();
        let users: Vec<usize> = (0..net.num_users()).collect();
        let oracle = exact_powers(&scaled, &users, &vec![0.0; net.num_stations()]);
        let ours = powers_from_sinr(&net, &SinrVector(gamma));
        match (oracle, ours) {
            (Some(a), Ok(b)) => {
                for (x, y) in a.iter().zip(b.iter()) {
                    prop_assert!(relative_eq!(*x, *y, max_relative = 1e-6));
                }
            }
            (None, Err(_)) => {}
            (a, b) => {
                // only a spectral radius within the safety margin may disagree
                let near_edge = a.as_ref().map(|v| v.iter().cloned().fold(0.0, f64::max) > 1e6).unwrap_or(false);
                prop_assert!(near_edge, "oracle {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn fcir_matches_pu_power_equations(seed in any::<u64>(), pbs in 1usize..4, pus in 1usize..7) {
        let mut r = rng(seed);
        let net = random_primary(&mut r, pbs, pus);
        let Ok(fcir) = build_fcir(&net, net.pu_targets()) else {
            prop_assert!(!subset_feasible(&net, &[]));
            return Ok(());
        };
        let top: Vec<f64> = fcir.axis_intercepts().iter().map(|x| if x.is_finite() { *x } else { 1.0 }).collect();
        for _ in 0..20 {
            let i: Vec<f64> = top.iter().map(|t| r.random_range(0.0..1.5) * t).collect();
            let closed = pu_powers_from_interference(&net, net.pu_targets(), &i).unwrap();
            let direct = pu_powers_direct(&net, &i).unwrap();
            let margin = net.pu_indices().map(|j| (direct[j] / net.p_max()[j] - 1.0).abs()).fold(f64::INFINITY, f64::min);
            if margin < 1e-9 {
                continue;
            }
            let oracle = net.pu_indices().all(|j| direct[j] <= net.p_max()[j]);
            prop_assert_eq!(fcir.contains(&i), oracle);
            for j in net.pu_indices() {
                prop_assert!(relative_eq!(closed[j], direct[j], max_relative = 1e-9));
            }
        }
    }

    #[test]
    fn raising_a_target_shrinks_the_region(seed in any::<u64>(), pbs in 1usize..4, pus in 1usize..7, bump in 1.0f64..3.0) {
        let mut r = rng(seed);
        let net = random_primary(&mut r, pbs, pus);
        let k = r.random_range(0..pus);
        let mut gamma = net.pu_targets().to_vec();
        gamma[k] *= bump;
        let (Ok(before), Ok(after)) = (build_fcir(&net, net.pu_targets()), build_fcir(&net, &gamma)) else {
            return Ok(());
        };
        let top: Vec<f64> = before.axis_intercepts().iter().map(|x| if x.is_finite() { *x } else { 1.0 }).collect();
        for _ in 0..20 {
            let i: Vec<f64> = top.iter().map(|t| r.random_range(0.0..1.2) * t).collect();
            if after.contains(&i) {
                prop_assert!(before.contains(&i));
            }
        }
    }

    #[test]
    fn distance_and_slack_share_sign(seed in any::<u64>(), pbs in 1usize..4, pus in 1usize..7) {
        let mut r = rng(seed);
        let net = random_primary(&mut r, pbs, pus);
        let Ok(fcir) = build_fcir(&net, net.pu_targets()) else { return Ok(()) };
        let i: Vec<f64> = (0..pbs).map(|_| r.random_range(0.0..5.0)).collect();
        let dir: Vec<f64> = (0..pbs).map(|_| r.random_range(0.0..1.0)).collect();
        let rep = fcir.infeasibility_report(&i);
        for m in 0..pbs {
            if fcir.is_active_row(m) {
                prop_assert_eq!(rep.dist[m] > 0.0, rep.s_inf[m] > 0.0);
                // affine along a ray: midpoint value is the mean of the ends
                let at = |t: f64| -> Vec<f64> { i.iter().zip(&dir).map(|(a, d)| a + t * d).collect() };
                let d0 = fcir.signed_distance(m, &at(0.0));
                let d1 = fcir.signed_distance(m, &at(1.0));
                let dh = fcir.signed_distance(m, &at(0.5));
                prop_assert!((dh - (d0 + d1) / 2.0).abs() <= 1e-9 * (1.0 + d0.abs() + d1.abs()));
            }
        }
    }

    #[test]
    fn coupling_is_positive_for_full_cells(seed in any::<u64>(), pbs in 1usize..4) {
        let mut r = rng(seed);
        let net = random_primary(&mut r, pbs, pbs + 2);
        if (0..pbs).any(|m| net.users_of(m).count() == 0) {
            return Ok(());
        }
        if let Ok(fcir) = build_fcir(&net, net.pu_targets()) {
            prop_assert!(fcir.a().iter().all(|x| *x > 0.0));
        }
    }

    #[test]
    fn document_round_trip(seed in any::<u64>(), pbs in 1usize..4, pus in 1usize..7) {
        let mut r = rng(seed);
        let net = random_primary(&mut r, pbs, pus);
        if let Ok(fcir) = build_fcir(&net, net.pu_targets()) {
            let text = fcir.document().to_toml();
            let back = FcirDocument::from_toml(&text).unwrap().to_polyhedron().unwrap();
            prop_assert_eq!(back, fcir);
        }
    }

    #[test]
    fn condensation_is_tangent(gamma in proptest::collection::vec(1e-4f64..1e3, 1..8)) {
        let (lambda, c) = condense(&gamma).unwrap();
        let lhs: f64 = c * gamma.iter().zip(&lambda).map(|(g, l)| g.powf(*l)).product::<f64>();
        let rhs: f64 = gamma.iter().map(|g| 1.0 + g).product();
        prop_assert!(relative_eq!(lhs, rhs, max_relative = 1e-12));
        // lower bound away from the expansion point
        let moved: Vec<f64> = gamma.iter().map(|g| g * 1.7).collect();
        let lhs: f64 = c * moved.iter().zip(&lambda).map(|(g, l)| g.powf(*l)).product::<f64>();
        let rhs: f64 = moved.iter().map(|g| 1.0 + g).product();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn tpc_reaches_closed_form(seed in any::<u64>(), pus in 1usize..5, sus in 0usize..5) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 2, pus, 2, sus);
        let gamma = SinrVector(net.target_sinr().to_vec());
        let users: Vec<usize> = (0..net.num_users()).collect();
        let res = run_tpc(&net, &users, &PowerVector::zeros(net.num_users()), TpcOptions::default()).unwrap();
        prop_assert!(res.converged);
        if is_sinr_feasible(&net, &gamma) {
            let exact = powers_from_sinr(&net, &gamma).unwrap();
            for (a, b) in res.p_stationary.iter().zip(exact.iter()) {
                prop_assert!(relative_eq!(*a, *b, max_relative = 1e-7));
            }
        }
        for i in users {
            if !res.supported[i] {
                prop_assert_eq!(res.p_stationary[i], net.p_max()[i]);
            }
        }
    }

    #[test]
    fn tpc_is_monotone_from_zero(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 2, 3, 2, 3);
        let users: Vec<usize> = (0..net.num_users()).collect();
        let mut p = PowerVector::zeros(net.num_users());
        for _ in 0..200 {
            let next = tpc_step(&net, &p, &users);
            prop_assert!(next.iter().zip(p.iter()).all(|(a, b)| *a >= b * (1.0 - 1e-15)));
            p = next;
        }
    }

    #[test]
    fn jpac_certificate(seed in any::<u64>(), pus in 1usize..6, sus in 1usize..8) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 2, pus, 2, sus);
        if !subset_feasible(&net, &[]) {
            return Ok(());
        }
        let out = run_jpac(&net, JpacOptions::default()).unwrap();
        prop_assert!(out.phases <= net.num_su() + 1);
        prop_assert!(out.certified);
        prop_assert_eq!(out.pu_outage_ratio, 0.0);
        let fcir = build_fcir(&net, net.pu_targets()).unwrap();
        let i = cognitive_interference(&net, &out.p_final, &out.admitted);
        prop_assert!(fcir.contains(&i));
        prop_assert!(subset_feasible(&net, &out.admitted));
        let gamma = sinr_of(&net, &out.p_final).unwrap();
        for &k in &out.admitted {
            prop_assert!(gamma[k] >= net.target_sinr()[k] * (1.0 - 1e-6));
        }
    }

    #[test]
    fn removing_an_su_never_raises_interference(seed in any::<u64>(), sus in 2usize..7) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 2, 3, 2, sus);
        let all: Vec<usize> = net.su_indices().collect();
        if !subset_feasible(&net, &all) {
            return Ok(());
        }
        let k = all[r.random_range(0..all.len())];
        let rest: Vec<usize> = all.iter().copied().filter(|&i| i != k).collect();
        let full = powers_from_sinr(&net, &targets_for(&net, &all)).unwrap();
        let less = powers_from_sinr(&net, &targets_for(&net, &rest)).unwrap();
        let a = cognitive_interference(&net, &full, &all);
        let b = cognitive_interference(&net, &less, &rest);
        for m in 0..net.num_pbs() {
            prop_assert!(b[m] <= a[m] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gp_solution_is_protected(seed in any::<u64>(), sus in 1usize..4) {
        let mut r = rng(seed);
        let net = random_mixed(&mut r, 2, 3, 2, sus);
        if !is_sinr_feasible(&net, &SinrVector(net.target_sinr().to_vec())) {
            return Ok(());
        }
        let fcir = build_fcir(&net, net.pu_targets()).unwrap();
        let out = run_algorithm2(&net, &Protection::Polyhedron(fcir.clone()), GpOptions::default()).unwrap();
        for w in out.trace.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        let sus: Vec<usize> = net.su_indices().collect();
        let i = cognitive_interference(&net, &out.p_full, &sus);
        let slack = fcir.infeasibility_report(&i);
        for m in 0..net.num_pbs() {
            prop_assert!(slack.s_inf[m] <= 1e-9 * fcir.c()[m]);
        }
        let pu = pu_powers_from_interference(&net, net.pu_targets(), &i).unwrap();
        for j in net.pu_indices() {
            prop_assert!(pu[j] <= net.p_max()[j] * (1.0 + 1e-9));
        }
        let oracle = su_objective(&net, &out.last.p, true);
        prop_assert!(oracle.is_some());
        prop_assert!(relative_eq!(oracle.unwrap(), out.last.objective, max_relative = 1e-9));
    }
}

#[test]
fn removed_su_gets_exactly_zero_power() {
    // this draw once left a removed SU at a tiny negative power
    let mut r = rng(12827766304362133210);
    let net = random_mixed(&mut r, 2, 3, 2, 6);
    let all: Vec<usize> = net.su_indices().collect();
    for &k in &all {
        let rest: Vec<usize> = all.iter().copied().filter(|&i| i != k).collect();
        let p = powers_from_sinr(&net, &targets_for(&net, &rest)).unwrap();
        assert_eq!(p[k], 0.0);
    }
}

#[test]
fn empty_cell_interference_reaches_no_pu() {
    // this draw leaves PBS 1 without PUs; its column of A must be exactly e_1
    let mut r = rng(5878502168536401764);
    let net = random_primary(&mut r, 3, 5);
    assert_eq!(net.users_of(1).count(), 0);
    let fcir = build_fcir(&net, net.pu_targets()).unwrap();
    assert_eq!(fcir.a()[(0, 1)], 0.0);
    assert_eq!(fcir.a()[(2, 1)], 0.0);
    assert!(fcir.axis_intercepts()[1].is_infinite());
    let i = [0.1, 1e17, 0.1];
    let closed = pu_powers_from_interference(&net, net.pu_targets(), &i).unwrap();
    let direct = pu_powers_direct(&net, &i).unwrap();
    for j in net.pu_indices() {
        assert!(relative_eq!(closed[j], direct[j], max_relative = 1e-9));
    }
}
