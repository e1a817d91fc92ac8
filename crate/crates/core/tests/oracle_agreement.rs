use std::sync::Arc;

use fluxladder::engine::{eigenvalues, evolve_ramp, ground_state, top_state, Integrator, RampOptions, RampSchedule, RampShape};
use fluxladder::fock::{FockBasis, LatticeSpec, MultiSectorBasis, OccupationBasis, StateVector};
use fluxladder::golden::GoldenSet;
use fluxladder::hamiltonian::assemble;
use fluxladder::mhz_to_rad;
use fluxladder::noise::{lindblad_evolve, DensityMatrix, NoiseModel};
use fluxladder::observables::ObservableReport;
use fluxladder_oracle::golden as og;
use fluxladder_oracle::Space;
use proptest::prelude::*;

fn golden(name: &str) -> GoldenSet {
    GoldenSet::read(format!("{}/../oracle/golden/{name}.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn check(set: &GoldenSet, name: &str, hash: &str, actual: &[f64]) {
    let g = set.get(name).unwrap();
    assert_eq!(g.spec_hash, hash, "{name}: lattice parameters drifted");
    let dev = g.deviation(actual).unwrap();
    assert!(dev <= g.tolerance, "{name}: deviation {dev:e} above {:e}", g.tolerance);
}

#[test]
fn sweep_matches_frozen_oracle() {
    let set = golden("sweep");
    let basis = Arc::new(FockBasis::build(og::N_SITES, og::N_PARTICLES, 1).unwrap());
    let mut ratios: Vec<f64> = og::PHASE_RATIOS.iter().chain(&og::BOND_RATIOS).copied().collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    for ratio in ratios {
        let spec = og::sweep_spec(ratio);
        let hash = spec.content_hash();
        let key = |w: &str| format!("ratio={ratio}/{w}");
        let top = top_state(&spec, &basis).unwrap();
        let report = ObservableReport::exact(&top.state, &spec).unwrap();
        check(&set, &key("top_energy"), &hash, &[top.energy]);
        let h = assemble(&spec, &*basis).unwrap();
        check(&set, &key("ground_energy"), &hash, &[ground_state(&h, &basis).unwrap().energy]);
        check(&set, &key("chiral_order"), &hash, &[report.chiral_c]);
        check(&set, &key("bond_order"), &hash, &[report.bond_order]);
        check(&set, &key("bonds"), &hash, &report.bond_o);
        let g: Vec<f64> = report.g_matrix.iter().map(|e| e.value).collect();
        check(&set, &key("correlations"), &hash, &g);
        if ratio == og::RAMP_RATIO {
            let flat = |k: usize| report.one_body.iter().flatten().map(|c| c[k]).collect::<Vec<_>>();
            check(&set, &key("one_body_re"), &hash, &flat(0));
            check(&set, &key("one_body_im"), &hash, &flat(1));
        }
    }
}

#[test]
fn lindblad_matches_frozen_reference() {
    let set = golden("lindblad");
    let (spec, [t1, t2r], t) = og::lindblad_case();
    let space = og::lindblad_space();
    let basis = Arc::new(MultiSectorBasis::build(3, 1, 1).unwrap());
    let h = assemble(&spec, &*basis).unwrap();
    let model = NoiseModel::uniform(3, t1, t2r).unwrap();
    let start = StateVector::basis_state(basis.clone(), &[1, 0, 0]).unwrap();
    let rho = lindblad_evolve(&DensityMatrix::pure(&start), &h, &model, t, 0.05).unwrap();
    let n = space.dim();
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for (r, a) in space.states.iter().enumerate() {
        for (c, b) in space.states.iter().enumerate() {
            let x = rho.matrix()[(basis.index_of(a).unwrap(), basis.index_of(b).unwrap())];
            re[r * n + c] = x.re;
            im[r * n + c] = x.im;
        }
    }
    let hash = spec.content_hash();
    check(&set, "lindblad/rho_re", &hash, &re);
    check(&set, "lindblad/rho_im", &hash, &im);
}

#[test]
fn ramp_matches_frozen_oracle() {
    let set = golden("ramp");
    let spec = og::ramp_spec();
    let basis = Arc::new(FockBasis::build(og::N_SITES, og::N_PARTICLES, spec.n_max).unwrap());
    let target = top_state(&spec, &basis).unwrap();
    let schedule = RampSchedule::staged(
        og::N_SITES,
        &og::RAMP_EXCITED,
        mhz_to_rad(og::RAMP_SPACING_MHZ),
        mhz_to_rad(og::RAMP_PARK_MHZ),
        og::RAMP_SETTLE,
        og::RAMP_DURATION,
        RampShape::Linear,
    )
    .unwrap();
    let opts = RampOptions { dt: 0.1e-9, integrator: Integrator::CommutatorFree4 };
    let out = evolve_ramp(&schedule, &spec, &basis, opts, Some(&target.state)).unwrap();
    check(&set, "ramp_fidelity/300ns", &spec.content_hash(), &[out.fidelity.unwrap()]);
}

fn small_spec() -> impl Strategy<Value = LatticeSpec> {
    (3usize..=5, 1u8..=2).prop_flat_map(|(n, n_max)| {
        (
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(-4.0..4.0f64, n),
            prop::collection::vec(0.3..1.5f64, n - 1),
            prop::collection::vec(0.3..1.5f64, n - 2),
            prop::sample::select(vec![0.0, std::f64::consts::PI, 0.7]),
        )
            .prop_map(move |(o, u, jr, jl, f)| LatticeSpec::new(o, u, jr, jl, f, n_max).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectra_match_brute_force(spec in small_spec()) {
        let total = spec.n_sites / 2;
        let basis = FockBasis::build(spec.n_sites, total, spec.n_max).unwrap();
        let ours = eigenvalues(&assemble(&spec, &basis).unwrap()).unwrap();
        let space = Space::new(spec.n_sites, total, spec.n_max);
        let (theirs, _) = fluxladder_oracle::hermitian_eigen(&fluxladder_oracle::hamiltonian(&spec, &space));
        prop_assert_eq!(ours.len(), theirs.len());
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn top_state_observables_match_brute_force(spec in small_spec()) {
        prop_assume!(spec.n_sites >= 4);
        let total = spec.n_sites / 2;
        let basis = Arc::new(FockBasis::build(spec.n_sites, total, spec.n_max).unwrap());
        let top = top_state(&spec, &basis).unwrap();
        prop_assume!(top.gap.map_or(false, |g| g > 1e-3));
        let report = ObservableReport::exact(&top.state, &spec).unwrap();
        let space = Space::new(spec.n_sites, total, spec.n_max);
        let (_, psi) = fluxladder_oracle::top_state(&spec, &space);
        let obs = fluxladder_oracle::observables(&spec, &space, &psi);
        let jbar = spec.mean_rung();
        for (a, b) in report.currents.iter().zip(&obs.currents) {
            prop_assert!((a * jbar - b).abs() < 1e-8);
        }
        for (a, b) in report.bond_o.iter().zip(&obs.bonds) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        for ((i, j), g) in &obs.correlations {
            prop_assert!((report.g(*i, *j).unwrap() * jbar * jbar - g).abs() < 1e-8);
        }
        prop_assert!((report.chiral_c * jbar * jbar - obs.chiral).abs() < 1e-8);
    }
}
