use std::sync::Arc;

use fluxladder::engine::top_state;
use fluxladder::fock::{FockBasis, LatticeSpec, StateVector};
use fluxladder::observables::{bond_kinetic, current_correlation, rung_current};
use fluxladder::protocol::{
    apply_protocol, calibrate_bond_sign, estimate_bond_kinetic, estimate_current, estimate_current_correlation, measure_exact,
    measure_shots, MeasurementPlan,
};

const DELTA: f64 = 5.0;

fn top(ratio: f64, u: f64, n_max: u8) -> (LatticeSpec, StateVector) {
    let spec = LatticeSpec::from_ratio(6, 1.0, ratio, u, n_max).unwrap();
    let basis = Arc::new(FockBasis::build(6, 3, n_max).unwrap());
    let psi = top_state(&spec, &basis).unwrap().state;
    (spec, psi)
}

/// Absolute estimator errors for `G(0, 3)` and `𝒪_1`, with the interaction
/// `u` optionally present during the protocol.
fn bias(u: f64, n_max: u8, during_protocol: bool) -> (f64, f64) {
    let (spec, psi) = top(-1.22, u, n_max);
    let mut plan = MeasurementPlan::correlation(0, 3, &spec, 1, 0).unwrap();
    let mut bplan = MeasurementPlan::bond(&[1], &spec, DELTA, 1, 0).unwrap();
    if during_protocol {
        plan = plan.with_interaction(u);
        bplan = bplan.with_interaction(u);
    }
    let g_hat = estimate_current_correlation(&measure_exact(&psi, &plan).unwrap(), 0, 3).unwrap().value;
    let g = current_correlation(&psi, 0, 3, &spec).unwrap();
    let sign = calibrate_bond_sign(DELTA).unwrap();
    let o_hat = estimate_bond_kinetic(&measure_exact(&psi, &bplan).unwrap(), 1, sign).unwrap().value;
    let o = bond_kinetic(&psi, 1).unwrap();
    ((g_hat - g).abs(), (o_hat - o).abs())
}

#[test]
fn hard_core_estimators_are_exact() {
    let sign = calibrate_bond_sign(DELTA).unwrap();
    for ratio in [-2.0, -1.22, 0.98, 2.5] {
        let (spec, psi) = top(ratio, 0.0, 1);
        let cur = measure_exact(&psi, &MeasurementPlan::current(&[0, 2, 4], &spec, 1, 0).unwrap()).unwrap();
        for r in [0, 2, 4] {
            let exact = rung_current(&psi, r, &spec).unwrap();
            assert!((estimate_current(&cur, r).unwrap().value - exact).abs() < 1e-10);
        }
        for (i, j) in [(0, 2), (0, 4), (1, 3), (1, 4), (2, 4)] {
            let s = measure_exact(&psi, &MeasurementPlan::correlation(i, j, &spec, 1, 0).unwrap()).unwrap();
            let exact = current_correlation(&psi, i, j, &spec).unwrap();
            assert!((estimate_current_correlation(&s, i, j).unwrap().value - exact).abs() < 1e-10);
        }
        let b = measure_exact(&psi, &MeasurementPlan::bond(&[0, 2, 4], &spec, DELTA, 1, 0).unwrap()).unwrap();
        for r in [0, 2, 4] {
            let exact = bond_kinetic(&psi, r).unwrap();
            assert!((estimate_bond_kinetic(&b, r, sign).unwrap().value - exact).abs() < 1e-10);
        }
    }
}

#[test]
fn linear_rotations_carry_no_soft_core_bias() {
    let (g, o) = bias(-30.0, 4, false);
    assert!(g < 1e-10 && o < 1e-10, "{g} {o}");
}

#[test]
fn soft_core_bias_shrinks_with_interaction() {
    let sweep: Vec<(f64, (f64, f64))> = [-10.0, -30.0, -100.0, -300.0].iter().map(|&u| (u, bias(u, 4, true))).collect();
    for (u, (g, o)) in &sweep {
        println!("U/J = {u}: |G bias| = {g:.3e}, |O bias| = {o:.3e}");
    }
    let (_, (g30, o30)) = sweep[1];
    assert!(g30 > 1e-4 && g30 < 0.1, "{g30}");
    assert!(o30 > 1e-4 && o30 < 0.1, "{o30}");
    for w in sweep.windows(2) {
        assert!(w[1].1 .0 < w[0].1 .0 && w[1].1 .1 < w[0].1 .1);
    }
    let (g, o) = bias(-30.0, 1, true);
    assert!(g < 1e-10 && o < 1e-10);
}

#[test]
fn shot_estimates_bracket_exact_values() {
    let (spec, psi) = top(-1.22, 0.0, 1);
    let exact = current_correlation(&psi, 0, 3, &spec).unwrap();
    let mut within = 0;
    for seed in 0..20 {
        let plan = MeasurementPlan::correlation(0, 3, &spec, 20_000, seed).unwrap();
        let (table, sample) = measure_shots(&psi, &plan).unwrap();
        assert_eq!(table.total, 20_000);
        let e = estimate_current_correlation(&sample, 0, 3).unwrap();
        if (e.value - exact).abs() <= 3.0 * e.stderr {
            within += 1;
        }
    }
    assert!(within >= 18, "{within}/20 within 3 stderr");
}

#[test]
fn protocol_leaves_other_sites_alone() {
    let (spec, psi) = top(-1.22, -4.0, 2);
    let plan = MeasurementPlan::correlation(0, 3, &spec, 1, 0).unwrap().with_interaction(-4.0);
    let before = psi.populations();
    let after = apply_protocol(&psi, &plan).unwrap().populations();
    assert!((before[2] - after[2]).abs() < 1e-12);
    let pair_sum = |p: &[f64], a: usize| p[a] + p[a + 1];
    assert!((pair_sum(&before, 0) - pair_sum(&after, 0)).abs() < 1e-12);
    assert!((pair_sum(&before, 3) - pair_sum(&after, 3)).abs() < 1e-12);
}
