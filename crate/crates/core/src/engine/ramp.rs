//! Time-dependent state preparation by detuning ramps.
//!
//! Site frequencies follow `ω_j(t) = ω_j + δ_j(t)` where the detunings
//! `δ_j(t)` are piecewise functions described by a [`RampSchedule`];
//! couplings stay fixed. The evolution is integrated with piecewise-constant
//! exponentials, each applied through the Krylov propagator.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::krylov::{expm_krylov, KrylovOptions};
use crate::fock::{FockBasis, LatticeSpec, OccupationBasis, StateVector};
use crate::hamiltonian::assemble;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    /// Jumps to the end value at the start of the segment.
    Step,
    #[default]
    Linear,
    /// Raised-cosine interpolation, zero slope at both ends.
    Cosine,
}

impl RampShape {
    fn profile(self, s: f64) -> f64 {
        match self {
            RampShape::Step => 1.0,
            RampShape::Linear => s,
            RampShape::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSegment {
    pub duration: f64,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub shape: RampShape,
}

impl RampSegment {
    /// Detunings at fraction `s ∈ [0, 1]` of the segment.
    pub fn detunings_at(&self, s: f64) -> Vec<f64> {
        let p = self.shape.profile(s);
        self.start.iter().zip(&self.end).map(|(a, b)| a + (b - a) * p).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub initial: Vec<u8>,
    pub segments: Vec<RampSegment>,
}

impl RampSchedule {
    /// Two-stage preparation: the `excited` sites start as single bosons at
    /// detunings `0, spacing, 2·spacing, …` (in list order) and are brought
    /// onto resonance within `settle`; the remaining sites wait at `park` and
    /// are then ramped onto resonance over `ramp`.
    pub fn staged(
        n_sites: usize,
        excited: &[usize],
        spacing: f64,
        park: f64,
        settle: f64,
        ramp: f64,
        shape: RampShape,
    ) -> Result<Self> {
        let mut initial = vec![0u8; n_sites];
        let mut spaced = vec![park; n_sites];
        for (k, &site) in excited.iter().enumerate() {
            if site >= n_sites {
                return Err(Error::param(format!("excited site {site} out of range")));
            }
            if initial[site] == 1 {
                return Err(Error::param(format!("site {site} listed twice")));
            }
            initial[site] = 1;
            spaced[site] = spacing * k as f64;
        }
        let parked: Vec<f64> = initial.iter().map(|&n| if n == 1 { 0.0 } else { park }).collect();
        let schedule = RampSchedule {
            initial,
            segments: vec![
                RampSegment { duration: settle, start: spaced, end: parked.clone(), shape: RampShape::Linear },
                RampSegment { duration: ramp, start: parked, end: vec![0.0; n_sites], shape },
            ],
        };
        schedule.validate(n_sites)?;
        Ok(schedule)
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.initial.len() != n_sites {
            return Err(Error::param(format!("initial occupations need {n_sites} entries")));
        }
        for (k, seg) in self.segments.iter().enumerate() {
            if !(seg.duration > 0.0) || !seg.duration.is_finite() {
                return Err(Error::param(format!("segment {k} has non-positive duration")));
            }
            if seg.start.len() != n_sites || seg.end.len() != n_sites {
                return Err(Error::param(format!("segment {k} needs {n_sites} detunings")));
            }
            if seg.start.iter().chain(&seg.end).any(|d| !d.is_finite()) {
                return Err(Error::param(format!("segment {k} has non-finite detunings")));
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Same schedule with every segment duration multiplied by `factor`.
    pub fn stretched(&self, factor: f64) -> RampSchedule {
        let mut s = self.clone();
        s.segments.iter_mut().for_each(|seg| seg.duration *= factor);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Second order: one exponential at the step midpoint.
    #[default]
    Midpoint,
    /// Fourth-order commutator-free product of two exponentials at the
    /// Gauss-Legendre nodes.
    CommutatorFree4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampOptions {
    pub dt: f64,
    pub integrator: Integrator,
}

impl Default for RampOptions {
    fn default() -> Self {
        RampOptions { dt: 0.1e-9, integrator: Integrator::Midpoint }
    }
}

#[derive(Debug, Clone)]
pub struct RampOutcome {
    pub state: StateVector,
    /// `|⟨ψ_final|ψ_target⟩|²` when a target was supplied.
    pub fidelity: Option<f64>,
    pub steps: usize,
}

/// Prepares the Fock state `schedule.initial` and integrates the ramp.
pub fn evolve_ramp(
    schedule: &RampSchedule,
    spec: &LatticeSpec,
    basis: &Arc<FockBasis>,
    opts: RampOptions,
    target: Option<&StateVector>,
) -> Result<RampOutcome> {
    schedule.validate(spec.n_sites)?;
    let total: usize = schedule.initial.iter().map(|&n| n as usize).sum();
    if total != basis.total() {
        return Err(Error::param(format!(
            "initial occupations hold {total} bosons, basis expects {}",
            basis.total()
        )));
    }
    if !(opts.dt > 0.0) {
        return Err(Error::StepSize("dt must be positive".into()));
    }
    if let Some(shortest) = schedule.segments.iter().map(|s| s.duration).reduce(f64::min) {
        if opts.dt > shortest {
            return Err(Error::StepSize(format!("dt = {:e} exceeds the shortest segment {:e}", opts.dt, shortest)));
        }
    }

    let h0 = assemble(spec, &**basis)?;
    let h0_norm = h0.norm_bound();
    let occupations: Vec<Vec<f64>> = (0..basis.len())
        .map(|k| basis.occupations(k).iter().map(|&n| n as f64).collect())
        .collect();
    let diag_for = |detunings: &[f64]| -> Vec<f64> {
        occupations
            .iter()
            .map(|occ| occ.iter().zip(detunings).map(|(n, d)| n * d).sum())
            .collect()
    };
    let step = |amps: &[Complex64], h_scale: f64, diag: &[f64], dt: f64| -> Result<Vec<Complex64>> {
        let dmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        expm_krylov(
            |x, y| {
                h0.apply(x, y);
                for ((yk, xk), d) in y.iter_mut().zip(x).zip(diag) {
                    *yk = *yk * h_scale + xk * d;
                }
            },
            amps,
            dt,
            h0_norm * h_scale + dmax,
            KrylovOptions::default(),
        )
    };

    let mut state = StateVector::basis_state(basis.clone(), &schedule.initial)?;
    let mut amps = state.amplitudes().to_vec();
    let mut steps = 0;
    let (c1, c2) = (0.5 - 3f64.sqrt() / 6.0, 0.5 + 3f64.sqrt() / 6.0);
    let (a1, a2) = ((3.0 - 2.0 * 3f64.sqrt()) / 12.0, (3.0 + 2.0 * 3f64.sqrt()) / 12.0);
    for seg in &schedule.segments {
        let n = (seg.duration / opts.dt).ceil().max(1.0) as usize;
        let dt = seg.duration / n as f64;
        for k in 0..n {
            match opts.integrator {
                Integrator::Midpoint => {
                    let s = (k as f64 + 0.5) / n as f64;
                    amps = step(&amps, 1.0, &diag_for(&seg.detunings_at(s)), dt)?;
                }
                Integrator::CommutatorFree4 => {
                    let d1 = diag_for(&seg.detunings_at((k as f64 + c1) / n as f64));
                    let d2 = diag_for(&seg.detunings_at((k as f64 + c2) / n as f64));
                    // exp(-i dt (a1 H1 + a2 H2)) exp(-i dt (a2 H1 + a1 H2)); a1 + a2 = 1/2
                    let mix = |wa: f64, wb: f64| -> Vec<f64> {
                        d1.iter().zip(&d2).map(|(x, y)| (wa * x + wb * y) * 2.0).collect()
                    };
                    amps = step(&amps, 1.0, &mix(a2, a1), 0.5 * dt)?;
                    amps = step(&amps, 1.0, &mix(a1, a2), 0.5 * dt)?;
                }
            }
            steps += 1;
        }
    }
    state = state.with_amplitudes(amps)?;
    let fidelity = match target {
        Some(t) => Some(t.inner(&state)?.norm_sqr()),
        None => None,
    };
    Ok(RampOutcome { state, fidelity, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::top_state;

    fn spec() -> LatticeSpec {
        LatticeSpec::uniform(4, 1.0, 0.8, -20.0, 0.0, 2).unwrap()
    }

    #[test]
    fn empty_schedule_returns_initial_state() {
        let basis = Arc::new(FockBasis::build(4, 2, 2).unwrap());
        let sched = RampSchedule { initial: vec![1, 0, 0, 1], segments: vec![] };
        let out = evolve_ramp(&sched, &spec(), &basis, RampOptions::default(), None).unwrap();
        let k = basis.index_of(&[1, 0, 0, 1]).unwrap();
        assert_eq!(out.state.amplitudes()[k], Complex64::new(1.0, 0.0));
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn dt_longer_than_segment_is_rejected() {
        let basis = Arc::new(FockBasis::build(4, 2, 2).unwrap());
        let sched = RampSchedule::staged(4, &[0, 3], 1.0, -10.0, 0.05, 20.0, RampShape::Linear).unwrap();
        let opts = RampOptions { dt: 0.1, integrator: Integrator::Midpoint };
        assert!(matches!(evolve_ramp(&sched, &spec(), &basis, opts, None), Err(Error::StepSize(_))));
    }

    #[test]
    fn wrong_particle_number_is_rejected() {
        let basis = Arc::new(FockBasis::build(4, 1, 2).unwrap());
        let sched = RampSchedule { initial: vec![1, 0, 0, 1], segments: vec![] };
        assert!(evolve_ramp(&sched, &spec(), &basis, RampOptions::default(), None).is_err());
    }

    #[test]
    fn integrators_converge_to_each_other() {
        let basis = Arc::new(FockBasis::build(4, 2, 2).unwrap());
        let sched = RampSchedule::staged(4, &[0, 3], 0.5, -8.0, 0.1, 15.0, RampShape::Cosine).unwrap();
        let target = top_state(&spec(), &basis).unwrap().state;
        let run = |dt, integrator| {
            evolve_ramp(&sched, &spec(), &basis, RampOptions { dt, integrator }, Some(&target))
                .unwrap()
                .fidelity
                .unwrap()
        };
        let cf4 = run(0.01, Integrator::CommutatorFree4);
        let mid = run(0.005, Integrator::Midpoint);
        assert!((cf4 - mid).abs() < 1e-5, "{cf4} vs {mid}");
        assert!(cf4 > 0.0 && cf4 <= 1.0 + 1e-12);
    }

    #[test]
    fn cosine_profile_endpoints() {
        let seg = RampSegment { duration: 1.0, start: vec![2.0], end: vec![0.0], shape: RampShape::Cosine };
        assert_eq!(seg.detunings_at(0.0), vec![2.0]);
        assert!(seg.detunings_at(1.0)[0].abs() < 1e-15);
        assert!((seg.detunings_at(0.5)[0] - 1.0).abs() < 1e-15);
    }
}
