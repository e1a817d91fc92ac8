use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use fluxladder::engine::{eigenvalues, evolve, top_state, Propagator};
use fluxladder::fock::{FockBasis, LatticeSpec, OccupationBasis, StateVector};
use fluxladder::hamiltonian::{apply_staggered_gauge, assemble, negate_map};
use fluxladder::observables::{correlation_map, current_correlation, ObservableReport};
use fluxladder::operator::{hop_operator, number_operator};
use fluxladder::protocol::{sample, MeasurementPlan};
use fluxladder::{Complex64, C1};
use proptest::prelude::*;

fn spec_strategy(max_sites: usize) -> impl Strategy<Value = LatticeSpec> {
    (3..=max_sites, 1u8..=2).prop_flat_map(|(n, n_max)| {
        (
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(0.2..2.0f64, n - 1),
            prop::collection::vec(0.2..2.0f64, n - 2),
            0.0..(2.0 * PI),
        )
            .prop_map(move |(omega, u, jr, jl, flux)| LatticeSpec::new(omega, u, jr, jl, flux, n_max).unwrap())
    })
}

fn basis_for(spec: &LatticeSpec) -> Arc<FockBasis> {
    let total = (spec.n_sites / 2).max(1);
    Arc::new(FockBasis::build(spec.n_sites, total, spec.n_max).unwrap())
}

fn random_state(basis: &Arc<FockBasis>, seed: &[f64]) -> StateVector {
    let amps = (0..basis.len())
        .map(|k| Complex64::new(seed[(2 * k) % seed.len()] - 0.5, seed[(2 * k + 1) % seed.len()] - 0.5))
        .collect();
    let mut s = StateVector::new(basis.clone(), amps).unwrap();
    s.normalize().unwrap();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn sign_trick_negates_spectrum(spec in spec_strategy(6)) {
        let basis = basis_for(&spec);
        let mut minus: Vec<f64> = eigenvalues(&assemble(&spec, &*basis).unwrap()).unwrap().iter().map(|e| -e).collect();
        minus.sort_by(f64::total_cmp);
        let mapped = eigenvalues(&assemble(&negate_map(&spec), &*basis).unwrap()).unwrap();
        for (a, b) in minus.iter().zip(&mapped) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn gauge_maps_eigenvectors(spec in spec_strategy(5)) {
        // G (-H) G = H(negated); the top state of H is G applied to the ground state of the negated model
        let basis = basis_for(&spec);
        let top = top_state(&spec, &basis).unwrap();
        prop_assume!(!top.degenerate);
        let h = assemble(&spec, &*basis).unwrap();
        let e = h.expectation(&top.state).unwrap().re;
        prop_assert!((e - top.energy).abs() < 1e-9 * (1.0 + e.abs()));
        let emax = *eigenvalues(&h).unwrap().last().unwrap();
        prop_assert!((emax - top.energy).abs() < 1e-9 * (1.0 + emax.abs()));
        let back = apply_staggered_gauge(&apply_staggered_gauge(&top.state));
        prop_assert!((back.inner(&top.state).unwrap() - C1).norm() < 1e-12);
    }

    #[test]
    fn hop_adjointness(spec in spec_strategy(5), i in 0usize..5, j in 0usize..5) {
        let basis = basis_for(&spec);
        let (i, j) = (i % spec.n_sites, j % spec.n_sites);
        prop_assume!(i != j);
        let a = hop_operator(&*basis, i, j, C1);
        let b = hop_operator(&*basis, j, i, C1);
        prop_assert!(a.adjoint().sub(&b).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn index_round_trip(n in 2usize..7, n_max in 1u8..4, fill in 0usize..7) {
        let total = fill.min(n * n_max as usize);
        let basis = FockBasis::build(n, total, n_max).unwrap();
        for k in 0..basis.len() {
            prop_assert_eq!(basis.index_of(basis.occupations(k)), Some(k));
        }
    }

    #[test]
    fn evolution_is_unitary_and_composes(spec in spec_strategy(5), t1 in 0.0..3.0f64, t2 in 0.0..3.0f64, seed in prop::collection::vec(0.0..1.0f64, 8)) {
        let basis = basis_for(&spec);
        let h = assemble(&spec, &*basis).unwrap();
        let psi = random_state(&basis, &seed);
        let a = evolve(&evolve(&psi, &h, t1).unwrap(), &h, t2).unwrap();
        let b = evolve(&psi, &h, t1 + t2).unwrap();
        prop_assert!((a.norm() - 1.0).abs() < 1e-10);
        prop_assert!((1.0 - a.inner(&b).unwrap().norm()).abs() < 1e-9);
        let e0 = h.expectation(&psi).unwrap().re;
        let e1 = h.expectation(&b).unwrap().re;
        prop_assert!((e0 - e1).abs() < 1e-9 * (1.0 + e0.abs()));
    }

    #[test]
    fn particle_number_is_conserved(spec in spec_strategy(5), t in 0.0..4.0f64, seed in prop::collection::vec(0.0..1.0f64, 6)) {
        let basis = basis_for(&spec);
        let h = assemble(&spec, &*basis).unwrap();
        let psi = evolve(&random_state(&basis, &seed), &h, t).unwrap();
        let n: f64 = (0..spec.n_sites).map(|j| number_operator(&*basis, j).expectation(&psi).unwrap().re).sum();
        prop_assert!((n - basis.total() as f64).abs() < 1e-10);
    }

    #[test]
    fn correlation_is_symmetric(spec in spec_strategy(6), seed in prop::collection::vec(0.0..1.0f64, 10)) {
        prop_assume!(spec.n_sites >= 4);
        let basis = basis_for(&spec);
        let psi = random_state(&basis, &seed);
        for (&(i, j), &g) in &correlation_map(&psi, &spec).unwrap() {
            let back = current_correlation(&psi, j, i, &spec).unwrap();
            prop_assert!((g - back).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), shots in 1u64..500) {
        let spec = LatticeSpec::from_ratio(4, 1.0, -1.5, 0.0, 1).unwrap();
        let basis = Arc::new(FockBasis::build(4, 2, 1).unwrap());
        let psi = top_state(&spec, &basis).unwrap().state;
        let plan = MeasurementPlan::current(&[0, 2], &spec, shots, seed).unwrap();
        let a = sample(&psi, &plan).unwrap();
        let b = sample(&psi, &plan).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
        prop_assert_eq!(a.total, shots);
    }
}

#[test]
fn reflection_maps_observables() {
    let spec = LatticeSpec::from_ratio(6, 1.0, -1.4, -3.0, 2).unwrap();
    let basis = Arc::new(FockBasis::build(6, 3, 2).unwrap());
    let a = ObservableReport::exact(&top_state(&spec, &basis).unwrap().state, &spec).unwrap();
    let b = ObservableReport::exact(&top_state(&spec.reflected(), &basis).unwrap().state, &spec.reflected()).unwrap();
    let r = spec.n_rungs();
    for (k, o) in a.bond_o.iter().enumerate() {
        assert_abs_diff_eq!(*o, b.bond_o[r - 1 - k], epsilon = 1e-9);
    }
    for e in &a.g_matrix {
        assert_abs_diff_eq!(e.value, b.g(r - 1 - e.rung_j, r - 1 - e.rung_i).unwrap(), epsilon = 1e-9);
    }
}

#[test]
fn propagator_matches_krylov() {
    let spec = LatticeSpec::from_ratio(5, 1.0, 0.8, -2.0, 2).unwrap();
    let basis = Arc::new(FockBasis::build(5, 2, 2).unwrap());
    let h = assemble(&spec, &*basis).unwrap();
    let psi = StateVector::basis_state(basis.clone(), &[1, 0, 0, 1, 0]).unwrap();
    let dense = Propagator::new(&h).unwrap().evolve(&psi, 2.5).unwrap();
    let krylov = fluxladder::engine::krylov_evolve(&psi, &h, 2.5, Default::default()).unwrap();
    assert!(1.0 - dense.inner(&krylov).unwrap().norm() < 1e-10);
}
