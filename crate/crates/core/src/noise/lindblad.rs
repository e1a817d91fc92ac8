use nalgebra::DMatrix;

use super::density::DensityMatrix;
use super::model::{JumpOperator, NoiseModel};
use crate::fock::OccupationBasis;
use crate::operator::SparseOperator;
use crate::{Complex64, Error, Result, C0};

/// Step-size control of the Dormand–Prince integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest tolerated change of the trace over the whole run.
    pub max_trace_drift: f64,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions { rtol: 1e-10, atol: 1e-12, max_steps: 1_000_000, max_trace_drift: 1e-6 }
    }
}

/// Right-hand side `-i[H, ρ] + Σ_k (L_k ρ L_k† - ½{L_k† L_k, ρ})`.
struct Liouvillian<'a> {
    h: &'a SparseOperator,
    jumps: Vec<JumpOperator>,
    /// `½ Σ_k L_k† L_k` (diagonal).
    k_half: Vec<f64>,
}

impl<'a> Liouvillian<'a> {
    fn new(h: &'a SparseOperator, model: &NoiseModel, basis: &impl OccupationBasis) -> Result<Self> {
        let jumps = model.jump_operators(basis)?;
        let dim = basis.len();
        let mut k_half = vec![0.0; dim];
        for j in &jumps {
            k_half.iter_mut().zip(j.ldag_l(dim)).for_each(|(k, d)| *k += 0.5 * d);
        }
        Ok(Liouvillian { h, jumps, k_half })
    }

    fn apply(&self, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n = rho.nrows();
        let mi = Complex64::new(0.0, -1.0);
        out.fill(C0);
        for (r, c, v) in self.h.triplets() {
            // -i H ρ: row r gains v ρ[c, :]; +i ρ H: column c gains ρ[:, r] v
            for col in 0..n {
                out[(r, col)] += mi * v * rho[(c, col)];
            }
            for row in 0..n {
                out[(row, c)] -= mi * rho[(row, r)] * v;
            }
        }
        for col in 0..n {
            for row in 0..n {
                out[(row, col)] -= rho[(row, col)] * (self.k_half[row] + self.k_half[col]);
            }
        }
        for jump in &self.jumps {
            match jump {
                JumpOperator::Lowering { op, .. } => {
                    let t: Vec<(usize, usize, Complex64)> = op.triplets().collect();
                    for &(r2, c2, v2) in &t {
                        let v2c = v2.conj();
                        for &(r1, c1, v1) in &t {
                            out[(r1, r2)] += v1 * rho[(c1, c2)] * v2c;
                        }
                    }
                }
                JumpOperator::Dephasing { diag, .. } => {
                    for col in 0..n {
                        if diag[col] == 0.0 {
                            continue;
                        }
                        for row in 0..n {
                            out[(row, col)] += rho[(row, col)] * (diag[row] * diag[col]);
                        }
                    }
                }
            }
        }
    }
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the master equation for time `t` under the time-independent
/// `h`, starting with step `dt`. The trace is checked, not renormalized.
pub fn lindblad_evolve(rho: &DensityMatrix, h: &SparseOperator, model: &NoiseModel, t: f64, dt: f64) -> Result<DensityMatrix> {
    lindblad_evolve_with(rho, h, model, t, dt, LindbladOptions::default())
}

pub fn lindblad_evolve_with(
    rho: &DensityMatrix,
    h: &SparseOperator,
    model: &NoiseModel,
    t: f64,
    dt: f64,
    opts: LindbladOptions,
) -> Result<DensityMatrix> {
    h.check_dim(rho.dim())?;
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.hermitian_deviation()));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::param("evolution time must be non-negative"));
    }
    if !(dt > 0.0) {
        return Err(Error::StepSize("dt must be positive".into()));
    }
    let lv = Liouvillian::new(h, model, &**rho.basis_ref())?;
    let n = rho.dim();
    let trace0 = rho.trace();
    let mut y = rho.matrix().clone();
    let mut k: Vec<DMatrix<Complex64>> = (0..7).map(|_| DMatrix::from_element(n, n, C0)).collect();
    let mut stage = DMatrix::from_element(n, n, C0);
    let mut done = 0.0;
    let mut step = dt.min(t);
    let mut steps = 0;
    lv.apply(&y, &mut k[0]);

    while t - done > t * 1e-14 {
        if steps >= opts.max_steps {
            return Err(Error::StepSize(format!("exceeded {} steps at t = {done:e}", opts.max_steps)));
        }
        step = step.min(t - done);
        for s in 1..7 {
            stage.copy_from(&y);
            for (p, a) in A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    stage.zip_apply(&k[p], |x, kp| *x += kp * (a * step));
                }
            }
            lv.apply(&stage, &mut k[s]);
        }
        // stage now holds the 5th-order solution (row 7 of A equals B5)
        let mut err = 0.0f64;
        for idx in 0..n * n {
            let e: Complex64 = (0..7).map(|s| k[s][idx] * ((B5[s] - B4[s]) * step)).sum();
            let scale = opts.atol + opts.rtol * y[idx].norm().max(stage[idx].norm());
            err = err.max(e.norm() / scale);
        }
        steps += 1;
        if err <= 1.0 {
            done += step;
            std::mem::swap(&mut y, &mut stage);
            k.swap(0, 6);
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            step *= grow;
        } else {
            step *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if step < t * 1e-14 {
                return Err(Error::StepSize(format!("step size underflow at t = {done:e}")));
            }
        }
    }
    let drift = (y.trace() - trace0).norm();
    if drift > opts.max_trace_drift {
        return Err(Error::TraceDrift { drift });
    }
    DensityMatrix::new(rho.basis_ref().clone(), y)
}

/// Runs a sequence of piecewise-constant Hamiltonians `(H_k, t_k)` with the
/// same noise acting throughout.
pub fn lindblad_stages(
    rho: &DensityMatrix,
    stages: &[(SparseOperator, f64)],
    model: &NoiseModel,
    dt: f64,
) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    for (h, t) in stages {
        out = lindblad_evolve(&out, h, model, *t, dt.min(*t))?;
    }
    Ok(out)
}
