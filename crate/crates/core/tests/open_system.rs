use std::sync::Arc;

use fluxladder::fock::{MultiSectorBasis, StateVector};
use fluxladder::hamiltonian::{assemble, bond_operator, current_operator};
use fluxladder::noise::{ensemble_expectation, lindblad_evolve, trajectory_evolve, DensityMatrix, NoiseModel};
use fluxladder::operator::{number_operator, SparseOperator};
use fluxladder_oracle::golden::lindblad_case;

#[test]
fn trajectories_reproduce_master_equation() {
    let (spec, [t1, t2r], t) = lindblad_case();
    let basis = Arc::new(MultiSectorBasis::build(3, 1, 1).unwrap());
    let h = assemble(&spec, &*basis).unwrap();
    let model = NoiseModel::uniform(3, t1, t2r).unwrap();
    let start = StateVector::basis_state(basis.clone(), &[1, 0, 0]).unwrap();
    let rho = lindblad_evolve(&DensityMatrix::pure(&start), &h, &model, t, 0.05).unwrap();
    let ens = trajectory_evolve(&start, &h, &model, t, 0.01, 4000, 11).unwrap();
    let mut ops: Vec<SparseOperator> = (0..3).map(|j| number_operator(&*basis, j)).collect();
    for r in 0..2 {
        ops.push(current_operator(r, &spec, &*basis).unwrap());
        ops.push(bond_operator(r, &*basis).unwrap());
    }
    for op in &ops {
        let exact = rho.trace_with(op).unwrap().re;
        let (mean, se) = ensemble_expectation(&ens, op).unwrap();
        assert!((mean - exact).abs() <= 3.0 * se.max(1e-12), "{mean} vs {exact} (se {se})");
    }
}

#[test]
fn master_equation_keeps_density_matrix_physical() {
    let (spec, [t1, t2r], _) = lindblad_case();
    let basis = Arc::new(MultiSectorBasis::build(3, 2, 1).unwrap());
    let h = assemble(&spec, &*basis).unwrap();
    let model = NoiseModel::uniform(3, t1, t2r).unwrap();
    let mut rho = DensityMatrix::pure(&StateVector::basis_state(basis.clone(), &[1, 0, 1]).unwrap());
    for _ in 0..5 {
        rho = lindblad_evolve(&rho, &h, &model, 1.0, 0.05).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-8);
        assert!(rho.hermitian_deviation() < 1e-10);
        assert!(rho.min_eigenvalue() > -1e-8);
    }
}

#[test]
fn single_site_ensemble_decay() {
    let basis = Arc::new(MultiSectorBasis::build(1, 1, 1).unwrap());
    let s = StateVector::basis_state(basis.clone(), &[1]).unwrap();
    let model = NoiseModel::new(vec![1.0], vec![2.0]).unwrap();
    let ens = trajectory_evolve(&s, &SparseOperator::zeros(2), &model, 0.7, 0.01, 10_000, 5).unwrap();
    let (mean, se) = ensemble_expectation(&ens, &number_operator(&*basis, 0)).unwrap();
    assert!((mean - (-0.7f64).exp()).abs() <= 3.0 * se, "{mean} (se {se})");
}
