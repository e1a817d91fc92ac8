use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{JumpOperator, NoiseModel};
use crate::engine::{expm_krylov, KrylovOptions, Propagator, DENSE_EVOLVE_LIMIT};
use crate::fock::{MultiSectorBasis, OccupationBasis, StateVector};
use crate::observables::QuantumState;
use crate::operator::SparseOperator;
use crate::{Complex64, Error, Result};

/// Largest tolerated jump probability within one step.
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;

enum Unitary<'a> {
    Dense(Propagator),
    Krylov(&'a SparseOperator),
}

impl Unitary<'_> {
    fn apply(&self, x: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        match self {
            Unitary::Dense(p) => Ok(p.apply(x, t)),
            Unitary::Krylov(h) => expm_krylov(|a, b| h.apply(a, b), x, t, h.norm_bound(), KrylovOptions::default()),
        }
    }
}

struct NonHermitian<'a> {
    unitary: Unitary<'a>,
    /// `½ Σ_k L_k† L_k` (diagonal).
    k_half: Vec<f64>,
    jumps: Vec<JumpOperator>,
}

impl NonHermitian<'_> {
    /// Strang-split `exp(-i H_eff t)` with `H_eff = H - i K`.
    fn propagate(&self, x: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        let damp = |v: &mut [Complex64]| {
            v.iter_mut().zip(&self.k_half).for_each(|(a, k)| *a *= (-k * 0.5 * t).exp());
        };
        let mut v = x.to_vec();
        damp(&mut v);
        let mut v = self.unitary.apply(&v, t)?;
        damp(&mut v);
        Ok(v)
    }
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

/// Quantum-jump unraveling of the master equation.
///
/// Each trajectory draws a waiting threshold `r`, evolves under the
/// non-Hermitian `H_eff` in steps of `dt` until `‖ψ‖² < r`, locates the
/// crossing by log-linear interpolation within the step and applies a jump
/// chosen with weights `‖L_k ψ‖²`. Trajectory `k` uses ChaCha stream `k`
/// of `seed`, so results do not depend on the thread count.
pub fn trajectory_evolve(
    state: &StateVector<MultiSectorBasis>,
    h: &SparseOperator,
    model: &NoiseModel,
    t: f64,
    dt: f64,
    n_traj: usize,
    seed: u64,
) -> Result<Vec<StateVector<MultiSectorBasis>>> {
    h.check_dim(state.len())?;
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermitian_deviation()));
    }
    if !(dt > 0.0) || t < 0.0 {
        return Err(Error::StepSize("dt must be positive and t non-negative".into()));
    }
    let jumps = model.jump_operators(&**state.basis())?;
    let dim = state.len();
    let mut k_half = vec![0.0; dim];
    for j in &jumps {
        k_half.iter_mut().zip(j.ldag_l(dim)).for_each(|(k, d)| *k += 0.5 * d);
    }
    let unitary = if dim <= DENSE_EVOLVE_LIMIT { Unitary::Dense(Propagator::new(h)?) } else { Unitary::Krylov(h) };
    let heff = NonHermitian { unitary, k_half, jumps };
    let mut start = state.amplitudes().to_vec();
    let n0 = norm_sqr(&start).sqrt();
    start.iter_mut().for_each(|a| *a /= n0);

    (0..n_traj)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let amps = run_trajectory(&heff, &start, t, dt, &mut rng)?;
            state.with_amplitudes(amps)
        })
        .collect()
}

fn run_trajectory(heff: &NonHermitian, start: &[Complex64], t: f64, dt: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
    let mut psi = start.to_vec();
    let mut threshold: f64 = rng.random();
    let mut elapsed = 0.0;
    while t - elapsed > t * 1e-14 {
        let step = dt.min(t - elapsed);
        let before = norm_sqr(&psi);
        let next = heff.propagate(&psi, step)?;
        let after = norm_sqr(&next);
        if heff.jumps.is_empty() {
            psi = next;
            elapsed += step;
            continue;
        }
        if 1.0 - after / before > MAX_JUMP_PROBABILITY {
            return Err(Error::StepSize(format!(
                "jump probability {:.3} per step exceeds {MAX_JUMP_PROBABILITY}, reduce dt",
                1.0 - after / before
            )));
        }
        if after >= threshold {
            psi = next;
            elapsed += step;
            continue;
        }
        // ‖ψ(s)‖² ≈ before · (after/before)^{s/step}
        let frac = ((threshold / before).ln() / (after / before).ln()).clamp(0.0, 1.0);
        let tau = frac * step;
        let at_jump = heff.propagate(&psi, tau)?;
        let mut candidates: Vec<Vec<Complex64>> = heff.jumps.iter().map(|j| j.apply(&at_jump)).collect();
        let weights: Vec<f64> = candidates.iter().map(|c| norm_sqr(c)).collect();
        let total: f64 = weights.iter().sum();
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = candidates.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        psi = candidates.swap_remove(chosen);
        let n = norm_sqr(&psi).sqrt();
        if n == 0.0 {
            return Err(Error::StepSize("jump produced a zero state".into()));
        }
        psi.iter_mut().for_each(|a| *a /= n);
        threshold = rng.random();
        elapsed += tau;
    }
    let n = norm_sqr(&psi).sqrt();
    psi.iter_mut().for_each(|a| *a /= n);
    Ok(psi)
}

/// Ensemble mean of `⟨O⟩` and its standard error.
pub fn ensemble_expectation(states: &[StateVector<MultiSectorBasis>], op: &SparseOperator) -> Result<(f64, f64)> {
    if states.is_empty() {
        return Err(Error::param("empty ensemble"));
    }
    let values = states.iter().map(|s| s.expect(op).map(|v| v.re)).collect::<Result<Vec<_>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / n).sqrt()))
}

/// Ensemble mean of the site populations.
pub fn ensemble_populations(states: &[StateVector<MultiSectorBasis>]) -> Vec<f64> {
    let n_sites = states.first().map(|s| s.basis().n_sites()).unwrap_or(0);
    let mut out = vec![0.0; n_sites];
    for s in states {
        out.iter_mut().zip(s.populations()).for_each(|(o, p)| *o += p);
    }
    out.iter_mut().for_each(|o| *o /= states.len().max(1) as f64);
    out
}
