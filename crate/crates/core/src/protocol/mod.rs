//! Measurement emulation: pair isolation, beamsplitter and idle rotations,
//! projective sampling and the population-based estimators.
//!
//! A current readout evolves each selected rung under its own isolated
//! beamsplitter for `t_BS = π/(4J)`, after which `J (n_j - n_{j+1})`
//! reproduces the rung current exactly for hard-core bosons. A bond readout
//! first idles the detuned pair for `π/(4|Δ|)`, turning the real coherence
//! into an imaginary one.

mod calibration;
mod estimators;
mod plan;
mod sampling;

use crate::fock::{OccupationBasis, StateVector};
use crate::Result;

pub use calibration::{calibrate_bond_sign, calibrate_tbs, fit_sinusoid, fit_tbs_from_trace, swap_trace};
pub use estimators::{estimate_bond_kinetic, estimate_current, estimate_current_correlation, Estimate, OutcomeSample};
pub use plan::{apply_protocol, protocol_stages, IdleStep, MeasurementPlan, PlanKind, ReadoutMode};
pub use sampling::{sample, sample_probabilities, ShotTable};

/// Infinite-shot outcomes of `plan` on `state`.
pub fn measure_exact<B: OccupationBasis>(state: &StateVector<B>, plan: &MeasurementPlan) -> Result<OutcomeSample> {
    let rotated = apply_protocol(state, plan)?;
    OutcomeSample::exact(&**rotated.basis(), &rotated.probabilities(), plan)
}

/// Sampled outcomes of `plan` on `state`, with the raw table.
pub fn measure_shots<B: OccupationBasis>(
    state: &StateVector<B>,
    plan: &MeasurementPlan,
) -> Result<(ShotTable, OutcomeSample)> {
    let rotated = apply_protocol(state, plan)?;
    let table = sample(&rotated, plan)?;
    let outcomes = OutcomeSample::from_table(&table)?;
    Ok((table, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{FockBasis, LatticeSpec};
    use crate::{Complex64, Error, C1};
    use std::sync::Arc;

    fn pair() -> (Arc<FockBasis>, LatticeSpec) {
        let spec = LatticeSpec::new(vec![0.0; 2], vec![0.0; 2], vec![1.0], vec![], 0.0, 1).unwrap();
        (Arc::new(FockBasis::build(2, 1, 1).unwrap()), spec)
    }

    fn sup(basis: &Arc<FockBasis>, phase: Complex64) -> StateVector {
        StateVector::superposition(basis.clone(), &[(&[1u8, 0][..], C1), (&[0u8, 1][..], phase)]).unwrap()
    }

    #[test]
    fn current_state_maps_to_a_pole() {
        let (basis, spec) = pair();
        let plan = MeasurementPlan::current(&[0], &spec, 100, 1).unwrap();
        let pops = apply_protocol(&sup(&basis, Complex64::new(0.0, 1.0)), &plan).unwrap().populations();
        assert!((pops[0] - pops[1]).abs() > 1.0 - 1e-12, "{pops:?}");
        let pops = apply_protocol(&sup(&basis, C1), &plan).unwrap().populations();
        assert!((pops[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn current_estimator_is_exact_for_two_sites() {
        let (basis, spec) = pair();
        let plan = MeasurementPlan::current(&[0], &spec, 100, 1).unwrap();
        for phase in [0.0, 0.3, 1.2, 2.5, -0.7] {
            let s = sup(&basis, Complex64::from_polar(1.0, phase));
            let exact = crate::observables::rung_current(&s, 0, &spec).unwrap();
            let est = estimate_current(&measure_exact(&s, &plan).unwrap(), 0).unwrap();
            assert!((est.value - exact).abs() < 1e-12, "{phase}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn bond_estimator_on_reference_states() {
        let (basis, spec) = pair();
        for delta in [2.0, -3.0] {
            let sign = calibrate_bond_sign(delta).unwrap();
            assert_eq!(sign, -delta.signum());
            let plan = MeasurementPlan::bond(&[0], &spec, delta, 100, 1).unwrap();
            let real = estimate_bond_kinetic(&measure_exact(&sup(&basis, C1), &plan).unwrap(), 0, sign).unwrap();
            assert!((real.value - 1.0).abs() < 1e-12);
            let imag = sup(&basis, Complex64::new(0.0, 1.0));
            let est = estimate_bond_kinetic(&measure_exact(&imag, &plan).unwrap(), 0, sign).unwrap();
            assert!(est.value.abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_complete() {
        let (basis, spec) = pair();
        let plan = MeasurementPlan::current(&[0], &spec, 1000, 42).unwrap();
        let s = sup(&basis, C1);
        let a = sample(&s, &plan).unwrap();
        let b = sample(&s, &plan).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<u64>(), 1000);
        let other = sample(&s, &plan.clone().with_seed(43)).unwrap();
        assert_ne!(a.counts, other.counts);
        let back = ShotTable::from_csv(&a.to_csv(), plan).unwrap();
        assert_eq!(back.counts, a.counts);
    }

    #[test]
    fn basis_state_gives_one_outcome() {
        let (basis, spec) = pair();
        let plan = MeasurementPlan::current(&[0], &spec, 500, 3).unwrap();
        let t = sample(&StateVector::basis_state(basis, &[0, 1]).unwrap(), &plan).unwrap();
        assert_eq!(t.counts.len(), 1);
        assert_eq!(t.counts["01"], 500);
    }

    #[test]
    fn binary_readout_clips() {
        let spec = LatticeSpec::new(vec![0.0; 2], vec![0.0; 2], vec![1.0], vec![], 0.0, 2).unwrap();
        let basis = Arc::new(FockBasis::build(2, 2, 2).unwrap());
        let plan = MeasurementPlan::current(&[0], &spec, 50, 3).unwrap().with_readout(ReadoutMode::Binary);
        let t = sample(&StateVector::basis_state(basis, &[2, 0]).unwrap(), &plan).unwrap();
        assert_eq!(t.counts["10"], 50);
    }

    #[test]
    fn overlapping_rungs_are_rejected() {
        let spec = LatticeSpec::uniform(5, 1.0, 1.0, 0.0, 0.0, 1).unwrap();
        assert!(matches!(
            MeasurementPlan::correlation(1, 2, &spec, 10, 0),
            Err(Error::NonMeasurablePair(1, 2))
        ));
        assert!(MeasurementPlan::correlation(0, 2, &spec, 10, 0).is_ok());
    }

    #[test]
    fn analytic_tbs() {
        let j = crate::mhz_to_rad(6.1);
        let t = calibrate_tbs(j).unwrap();
        assert!((t * 1e9 - 20.49).abs() < 0.005);
        assert!((calibrate_tbs(2.0 * j).unwrap() - t / 2.0).abs() < 1e-20);
        assert!(calibrate_tbs(0.0).is_err());
    }

    #[test]
    fn fitted_tbs_matches_analytic() {
        let j = crate::mhz_to_rad(6.1);
        let times: Vec<f64> = (0..121).map(|k| k as f64 * 1e-9).collect();
        let trace = swap_trace(j, &times).unwrap();
        let fit = fit_tbs_from_trace(&times, &trace).unwrap();
        let exact = calibrate_tbs(j).unwrap();
        assert!(((fit - exact) / exact).abs() < 1e-3, "{fit} vs {exact}");
    }

    #[test]
    fn short_trace_is_rejected() {
        let times: Vec<f64> = (0..20).map(|k| k as f64 * 0.01).collect();
        let trace = swap_trace(1.0, &times).unwrap();
        assert!(fit_tbs_from_trace(&times, &trace).is_err());
    }
}
