use std::f64::consts::PI;
use std::sync::Arc;

use super::estimators::OutcomeSample;
use super::plan::{apply_protocol, IdleStep, MeasurementPlan, PlanKind, ReadoutMode};
use crate::engine::Propagator;
use crate::fock::{FockBasis, StateVector};
use crate::hamiltonian::{assemble_pair, PairHamiltonianSpec};
use crate::{Error, Result, C1};

/// Beamsplitter time `π/(4J)`.
pub fn calibrate_tbs(j: f64) -> Result<f64> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::param(format!("coupling must be positive, got {j}")));
    }
    Ok(PI / (4.0 * j))
}

/// Population of the first site of an isolated pair started in `|10⟩` and
/// evolved under the beamsplitter of strength `j`, at each of `times`.
pub fn swap_trace(j: f64, times: &[f64]) -> Result<Vec<f64>> {
    let basis = Arc::new(FockBasis::build(2, 1, 1)?);
    let h = assemble_pair(&PairHamiltonianSpec::beamsplitter(0, j)?, &*basis)?;
    let prop = Propagator::new(&h)?;
    let start = StateVector::basis_state(basis, &[1, 0])?;
    times
        .iter()
        .map(|&t| Ok(prop.evolve(&start, t)?.populations()[0]))
        .collect()
}

/// Least-squares fit of `c₀ + c₁ cos ωt + c₂ sin ωt`: returns the fitted
/// `ω` and the RMS residual. The linear coefficients are solved exactly
/// for each trial `ω`; `ω` is located on a grid and refined by golden
/// section.
pub fn fit_sinusoid(times: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if times.len() != values.len() || times.len() < 5 {
        return Err(Error::Fit("need at least 5 samples with matching times".into()));
    }
    let (t0, t1) = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let span = t1 - t0;
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min_dt = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !min_dt.is_finite() {
        return Err(Error::Fit("times must span a positive interval".into()));
    }
    // log grid from well below one half-oscillation per span up to Nyquist
    let (w_lo, w_hi) = (0.05 * PI / span, PI / min_dt);
    let n_grid = 4000;
    let grid = |k: usize| w_lo * (w_hi / w_lo).powf(k as f64 / (n_grid - 1) as f64);
    let (mut best_k, mut best_r) = (0, f64::INFINITY);
    for k in 0..n_grid {
        let r = residual(times, values, grid(k));
        if r < best_r {
            best_k = k;
            best_r = r;
        }
    }
    let (mut a, mut b) = (grid(best_k.saturating_sub(1)), grid((best_k + 1).min(n_grid - 1)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (residual(times, values, c), residual(times, values, d));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = residual(times, values, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = residual(times, values, d);
        }
    }
    let w = 0.5 * (a + b);
    let (ss, _) = linear_fit(times, values, w);
    let rms = (ss / times.len() as f64).sqrt();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if rms > 0.05 * scale || !rms.is_finite() {
        return Err(Error::Fit(format!("sinusoid fit did not converge (rms residual {rms:e})")));
    }
    if w * span < PI {
        return Err(Error::Fit("trace covers less than half an oscillation".into()));
    }
    Ok((w, rms))
}

fn residual(times: &[f64], values: &[f64], w: f64) -> f64 {
    linear_fit(times, values, w).0
}

/// Sum of squared residuals and coefficients of the best fit at fixed `ω`.
fn linear_fit(times: &[f64], values: &[f64], w: f64) -> (f64, [f64; 3]) {
    // normal equations for the 3 linear coefficients
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (&t, &y) in times.iter().zip(values) {
        let row = [1.0, (w * t).cos(), (w * t).sin()];
        for r in 0..3 {
            aty[r] += row[r] * y;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let Some(coef) = solve3(ata, aty) else {
        return (f64::INFINITY, [0.0; 3]);
    };
    let ss = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| (y - coef[0] - coef[1] * (w * t).cos() - coef[2] * (w * t).sin()).powi(2))
        .sum();
    (ss, coef)
}

fn solve3(m: [[f64; 3]; 3], v: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    let norm = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if d.abs() <= 1e-13 * norm.powi(3) {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for r in 0..3 {
            mk[r][k] = v[r];
        }
        *o = det(&mk) / d;
    }
    Some(out)
}

/// Beamsplitter time from a swap trace: the quarter period `π/(2ω)` of the
/// population oscillation.
pub fn fit_tbs_from_trace(times: &[f64], populations: &[f64]) -> Result<f64> {
    let (w, _) = fit_sinusoid(times, populations)?;
    Ok(PI / (2.0 * w))
}

/// Sign that makes the bond estimator return `+1` on `(|10⟩ + |01⟩)/√2`
/// for an idle detuning `delta`.
pub fn calibrate_bond_sign(delta: f64) -> Result<f64> {
    let basis = Arc::new(FockBasis::build(2, 1, 1)?);
    let reference = StateVector::superposition(basis.clone(), &[(&[1u8, 0][..], C1), (&[0u8, 1][..], C1)])?;
    let plan = MeasurementPlan {
        kind: PlanKind::BondKinetic,
        rungs: vec![0],
        couplings: vec![1.0],
        t_bs: vec![calibrate_tbs(1.0)?],
        idle: Some(IdleStep::quarter_turn(delta)?),
        shots: 1,
        seed: 0,
        readout: ReadoutMode::Occupancy,
        interaction: None,
    };
    let rotated = apply_protocol(&reference, &plan)?;
    let sample = OutcomeSample::exact(&*basis, &rotated.probabilities(), &plan)?;
    let raw = super::estimate_bond_kinetic(&sample, 0, 1.0)?.value;
    if raw.abs() < 0.5 {
        return Err(Error::Fit(format!("bond calibration gave an ambiguous imbalance {raw}")));
    }
    Ok(raw.signum())
}
