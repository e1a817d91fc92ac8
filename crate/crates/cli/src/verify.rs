//! Verification suite: numbered acceptance checks `C1`..`C10` followed by
//! module invariants `I*`. Tolerances and runtime budgets are fixed here.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use fluxladder::engine::{
    eigenvalues, evolve, evolve_ramp, ground_state, top_state, Integrator, RampOptions, RampSchedule, RampShape,
};
use fluxladder::fock::{FockBasis, LatticeSpec, MultiSectorBasis, OccupationBasis, StateVector};
use fluxladder::golden::GoldenSet;
use fluxladder::hamiltonian::{assemble, bond_operator, current_operator, negate_map};
use fluxladder::mhz_to_rad;
use fluxladder::noise::{ensemble_expectation, lindblad_evolve, trajectory_evolve, DensityMatrix, NoiseModel};
use fluxladder::observables::{bond_kinetic, current_correlation, measurable_pairs, rung_current, ObservableReport};
use fluxladder::operator::{number_operator, SparseOperator};
use fluxladder::protocol::{
    calibrate_bond_sign, calibrate_tbs, estimate_bond_kinetic, estimate_current, estimate_current_correlation, fit_tbs_from_trace,
    measure_exact, measure_shots, swap_trace, MeasurementPlan,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::sweep::sweep_golden;

pub const RAMP_GOLDEN: &str = include_str!("../../oracle/golden/ramp.json");
pub const LINDBLAD_GOLDEN: &str = include_str!("../../oracle/golden/lindblad.json");

/// Coupling ratios of the chiral/Meissner sweep.
pub const PHASE_RATIOS: [f64; 6] = [-3.56, -2.02, -1.22, 0.98, 1.96, 3.53];
/// Coupling ratios of the bond-order sweep.
pub const BOND_RATIOS: [f64; 6] = [-3.56, -2.02, -1.22, 0.98, 2.04, 2.85];

const N_SITES: usize = 8;
const N_PARTICLES: usize = 4;
const EXACT_TOL: f64 = 1e-10;
const BOND_DELTA: f64 = 5.0;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub elapsed_s: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {} {} ({:.2} s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_s,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
    pub elapsed_s: f64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn text(&self) -> String {
        let mut s: String = self.checks.iter().map(|c| c.line() + "\n").collect();
        s.push_str(&format!("SUMMARY passed={} failed={}\n", self.passed, self.failed));
        s
    }
}

/// Outcome of one check body: pass flag and a one-line detail.
type Outcome = Result<(bool, String)>;

fn run_check(id: &str, name: &str, budget: Option<Duration>, body: impl FnOnce() -> Outcome) -> CheckResult {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e:#}")),
    };
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            detail = format!("{detail}; over the {} s budget", b.as_secs());
        }
    }
    CheckResult { id: id.into(), name: name.into(), pass, elapsed_s: elapsed.as_secs_f64(), detail }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

/// Hard-core unit-coupling lattice of the sweeps.
pub fn sweep_spec(ratio: f64) -> Result<LatticeSpec> {
    Ok(LatticeSpec::from_ratio(N_SITES, 1.0, ratio, 0.0, 1)?)
}

fn sweep_basis() -> Result<Arc<FockBasis>> {
    Ok(Arc::new(FockBasis::build(N_SITES, N_PARTICLES, 1)?))
}

fn all_ratios() -> Vec<f64> {
    let mut r: Vec<f64> = PHASE_RATIOS.iter().chain(&BOND_RATIOS).copied().collect();
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

fn exact_reports(ratios: &[f64]) -> Result<Vec<(f64, ObservableReport)>> {
    let basis = sweep_basis()?;
    ratios
        .iter()
        .map(|&r| {
            let spec = sweep_spec(r)?;
            let top = top_state(&spec, &basis)?;
            Ok((r, ObservableReport::exact(&top.state, &spec)?))
        })
        .collect()
}

fn golden_value(set: &GoldenSet, name: &str, spec: &LatticeSpec) -> Result<Vec<f64>> {
    let g = set.get(name)?;
    ensure!(g.spec_hash == spec.content_hash(), "{name}: lattice parameters differ from the frozen ones");
    Ok(g.value.as_slice().to_vec())
}

fn check_golden(set: &GoldenSet, name: &str, spec: &LatticeSpec, actual: &[f64]) -> Result<(bool, f64)> {
    golden_value(set, name, spec)?;
    let g = set.get(name)?;
    let dev = g.deviation(actual)?;
    Ok((dev <= g.tolerance, dev))
}

fn c1_estimator_exactness() -> Outcome {
    let basis = sweep_basis()?;
    let sign = calibrate_bond_sign(BOND_DELTA)?;
    let mut worst = 0.0f64;
    for &ratio in &PHASE_RATIOS {
        let spec = sweep_spec(ratio)?;
        let psi = top_state(&spec, &basis)?.state;
        for group in [vec![0, 2, 4, 6], vec![1, 3, 5]] {
            let cur = measure_exact(&psi, &MeasurementPlan::current(&group, &spec, 1, 0)?)?;
            let bond = measure_exact(&psi, &MeasurementPlan::bond(&group, &spec, BOND_DELTA, 1, 0)?)?;
            for &r in &group {
                worst = worst.max((estimate_current(&cur, r)?.value - rung_current(&psi, r, &spec)?).abs());
                worst = worst.max((estimate_bond_kinetic(&bond, r, sign)?.value - bond_kinetic(&psi, r)?).abs());
            }
        }
        for (i, j) in measurable_pairs(spec.n_rungs()) {
            let s = measure_exact(&psi, &MeasurementPlan::correlation(i, j, &spec, 1, 0)?)?;
            worst = worst.max((estimate_current_correlation(&s, i, j)?.value - current_correlation(&psi, i, j, &spec)?).abs());
        }
    }
    Ok((worst <= EXACT_TOL, format!("max |estimate - exact| = {worst:.2e} over 6 ratios (tol {EXACT_TOL:.0e})")))
}

fn random_spec(rng: &mut ChaCha8Rng) -> Result<(LatticeSpec, usize)> {
    let n = rng.random_range(3..=6usize);
    let n_max = rng.random_range(1..=2u8);
    let omega = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let u = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let jr = (0..n - 1).map(|_| rng.random_range(0.2..1.5)).collect();
    let jl = (0..n - 2).map(|_| rng.random_range(0.2..1.5)).collect();
    let flux = rng.random_range(0.0..2.0 * PI);
    let total = rng.random_range(1..=n);
    Ok((LatticeSpec::new(omega, u, jr, jl, flux, n_max)?, total))
}

fn c2_sign_trick() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5167);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (spec, total) = random_spec(&mut rng)?;
        let basis = FockBasis::build(spec.n_sites, total, spec.n_max)?;
        let mut neg: Vec<f64> = eigenvalues(&assemble(&spec, &basis)?)?.iter().map(|e| -e).collect();
        neg.sort_by(f64::total_cmp);
        let flipped = eigenvalues(&assemble(&negate_map(&spec), &basis)?)?;
        ensure!(neg.len() == flipped.len(), "spectrum sizes differ");
        worst = neg.iter().zip(&flipped).fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok((worst <= EXACT_TOL, format!("max spectral deviation {worst:.2e} over 50 random lattices, N <= 6")))
}

fn c3_vanishing_currents() -> Outcome {
    let basis = sweep_basis()?;
    let mut worst = 0.0f64;
    for r in all_ratios() {
        let spec = sweep_spec(r)?;
        let top = top_state(&spec, &basis)?.state;
        let ground = ground_state(&assemble(&spec, &*basis)?, &basis)?.state;
        for psi in [&top, &ground] {
            for k in 0..spec.n_rungs() {
                worst = worst.max(rung_current(psi, k, &spec)?.abs());
            }
        }
    }
    Ok((worst <= EXACT_TOL, format!("max |<J_j>| = {worst:.2e} over top and ground states at 8 ratios")))
}

fn c4_chiral_signs(golden: &GoldenSet) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (r, rep) in exact_reports(&PHASE_RATIOS)? {
        let g: Vec<f64> = rep.g_matrix.iter().map(|e| e.value).collect();
        ensure!(g.len() == 15, "expected 15 pairs, got {}", g.len());
        if r < 0.0 {
            let positive = g.iter().filter(|&&v| v > 0.0).count();
            ok &= positive == 15;
            notes.push(format!("{r}: {positive}/15 positive"));
        } else {
            let frozen = golden_value(golden, &format!("ratio={r}/correlations"), &sweep_spec(r)?)?;
            let agree = g.iter().zip(&frozen).filter(|(a, b)| a.signum() == b.signum()).count();
            let alternating = rep.g_matrix.iter().any(|e| e.value < 0.0) && rep.g_matrix.iter().any(|e| e.value > 0.0);
            ok &= agree == 15 && alternating;
            notes.push(format!("{r}: {agree}/15 signs match oracle"));
        }
    }
    Ok((ok, notes.join(", ")))
}

fn c5_hierarchy(golden: &GoldenSet) -> Outcome {
    let reps = exact_reports(&[-1.22, 0.98])?;
    let (c_pi, c_zero) = (reps[0].1.chiral_c, reps[1].1.chiral_c);
    let ratio = c_pi.abs() / c_zero.abs();
    let (frozen_ok, dev) = check_golden(golden, "chiral_ratio/-1.22:0.98", &sweep_spec(-1.22)?, &[ratio])?;
    let mut ok = ratio >= 10.0 && frozen_ok;
    for (r, rep) in &reps {
        ok &= check_golden(golden, &format!("ratio={r}/chiral_order"), &sweep_spec(*r)?, &[rep.chiral_c])?.0;
    }
    Ok((ok, format!("|C(-1.22)|/|C(0.98)| = {ratio:.4} (>= 10; oracle deviation {dev:.2e}, 1% tolerance)")))
}

fn c6_bond_order(golden: &GoldenSet) -> Outcome {
    let reps = exact_reports(&BOND_RATIOS)?;
    let mut ok = true;
    for (r, rep) in &reps {
        let b = &rep.bond_o;
        let pattern = if *r < 0.0 {
            b.windows(2).all(|w| w[0] * w[1] < 0.0)
        } else {
            b.iter().all(|&x| x > 0.0) || b.iter().all(|&x| x < 0.0)
        };
        ok &= pattern;
        ok &= check_golden(golden, &format!("ratio={r}/bond_order"), &sweep_spec(*r)?, &[rep.bond_order])?.0;
    }
    let (r_max, o_max) = reps
        .iter()
        .map(|(r, rep)| (*r, rep.bond_order.abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .context("empty sweep")?;
    ok &= r_max == -1.22;
    Ok((ok, format!("sign patterns hold: {ok}; max |O_BO| = {o_max:.4} at ratio {r_max}")))
}

fn c7_shot_scaling() -> Outcome {
    let (i, j) = (0, 6);
    let spec = sweep_spec(-1.22)?;
    let psi = top_state(&spec, &sweep_basis()?)?.state;
    let exact = current_correlation(&psi, i, j, &spec)?;
    let mut ratios = Vec::new();
    let mut means = [0.0f64; 2];
    let mut errs = [0.0f64; 2];
    let seeds = 20u64;
    for seed in 0..seeds {
        let mut se = [0.0; 2];
        for (k, shots) in [1_000u64, 100_000].into_iter().enumerate() {
            let plan = MeasurementPlan::correlation(i, j, &spec, shots, 1000 + 2 * seed + k as u64)?;
            let e = estimate_current_correlation(&measure_shots(&psi, &plan)?.1, i, j)?;
            means[k] += e.value / seeds as f64;
            errs[k] += e.stderr / seeds as f64;
            se[k] = e.stderr;
        }
        ratios.push(se[0] / se[1]);
    }
    let in_band = ratios.iter().filter(|r| (8.0..=12.0).contains(*r)).count();
    let unbiased = (0..2).all(|k| (means[k] - exact).abs() <= 3.0 * errs[k] / (seeds as f64).sqrt());
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    Ok((
        in_band == ratios.len() && unbiased,
        format!(
            "stderr ratio 1e3/1e5 in [{lo:.2}, {hi:.2}] ({in_band}/20 within 10 +- 20%); seed means {:.5}, {:.5} vs exact {exact:.5}",
            means[0], means[1]
        ),
    ))
}

fn c8_beamsplitter() -> Outcome {
    let mut worst = 0.0f64;
    for j in [1.0, mhz_to_rad(6.1)] {
        let t_bs = calibrate_tbs(j)?;
        let times: Vec<f64> = (0..=120).map(|k| 8.0 * t_bs * k as f64 / 120.0).collect();
        let fitted = fit_tbs_from_trace(&times, &swap_trace(j, &times)?)?;
        worst = worst.max((fitted / t_bs - 1.0).abs());
    }
    let device_ns = calibrate_tbs(mhz_to_rad(6.1))? * 1e9;
    let ok = worst <= 5e-3 && (device_ns - 20.49).abs() < 5e-3;
    Ok((ok, format!("fit relative error {worst:.2e} (tol 5e-3); t_BS(6.1 MHz) = {device_ns:.4} ns")))
}

fn lindblad_case() -> Result<(LatticeSpec, f64, f64, f64)> {
    Ok((LatticeSpec::uniform(3, 1.0, 0.5, 0.0, PI, 1)?, 20.0, 15.0, 5.0))
}

fn c9_open_system() -> Outcome {
    let (spec, t1, t2r, t) = lindblad_case()?;
    // trace drift on a two-excitation state
    let two = Arc::new(MultiSectorBasis::build(3, 2, 1)?);
    let model = NoiseModel::uniform(3, t1, t2r)?;
    let h2 = assemble(&spec, &*two)?;
    let mut rho = DensityMatrix::pure(&StateVector::basis_state(two.clone(), &[1, 0, 1])?);
    let mut drift = 0.0f64;
    for _ in 0..5 {
        rho = lindblad_evolve(&rho, &h2, &model, 1.0, 0.05)?;
        drift = drift.max((rho.trace().re - 1.0).abs());
    }
    // single-site amplitude damping
    let one = Arc::new(MultiSectorBasis::build(1, 1, 1)?);
    let excited = DensityMatrix::pure(&StateVector::basis_state(one.clone(), &[1])?);
    let damped = lindblad_evolve(&excited, &SparseOperator::zeros(one.len()), &NoiseModel::new(vec![1.0], vec![2.0])?, 0.7, 0.01)?;
    let decay_err = (damped.populations()[0] - (-0.7f64).exp()).abs();
    // trajectories against the master equation
    let basis = Arc::new(MultiSectorBasis::build(3, 1, 1)?);
    let h = assemble(&spec, &*basis)?;
    let start = StateVector::basis_state(basis.clone(), &[1, 0, 0])?;
    let reference = lindblad_evolve(&DensityMatrix::pure(&start), &h, &model, t, 0.05)?;
    let ens = trajectory_evolve(&start, &h, &model, t, 0.01, 10_000, 29)?;
    let mut ops: Vec<SparseOperator> = (0..3).map(|s| number_operator(&*basis, s)).collect();
    for r in 0..2 {
        ops.push(current_operator(r, &spec, &*basis)?);
        ops.push(bond_operator(r, &*basis)?);
    }
    let mut worst_sigma = 0.0f64;
    for op in &ops {
        let exact = reference.trace_with(op)?.re;
        let (mean, se) = ensemble_expectation(&ens, op)?;
        worst_sigma = worst_sigma.max((mean - exact).abs() / se.max(1e-12));
    }
    // frozen reference matrix
    let golden = GoldenSet::parse(LINDBLAD_GOLDEN)?;
    let order: [[u8; 3]; 4] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for a in &order {
        for b in &order {
            let x = reference.matrix()[(basis.index_of(a).context("state")?, basis.index_of(b).context("state")?)];
            re.push(x.re);
            im.push(x.im);
        }
    }
    let (ok_re, dev_re) = check_golden(&golden, "lindblad/rho_re", &spec, &re)?;
    let (ok_im, dev_im) = check_golden(&golden, "lindblad/rho_im", &spec, &im)?;
    let ok = drift <= 1e-8 && decay_err <= 1e-6 && worst_sigma <= 3.0 && ok_re && ok_im;
    Ok((
        ok,
        format!(
            "trace drift {drift:.1e}; T1 decay error {decay_err:.1e}; 1e4 trajectories within {worst_sigma:.2} sigma; reference deviation {:.1e}",
            dev_re.max(dev_im)
        ),
    ))
}

/// Lattice, schedule and target state of the device-scale ramp.
pub struct RampCase {
    pub spec: LatticeSpec,
    pub basis: Arc<FockBasis>,
    pub target: StateVector,
}

impl RampCase {
    pub fn new() -> Result<Self> {
        let spec = LatticeSpec::from_ratio(N_SITES, mhz_to_rad(6.1), -1.22, mhz_to_rad(-186.1), 2)?;
        let basis = Arc::new(FockBasis::build(N_SITES, N_PARTICLES, 2)?);
        let target = top_state(&spec, &basis)?.state;
        Ok(RampCase { spec, basis, target })
    }

    pub fn schedule(duration: f64) -> Result<RampSchedule> {
        Ok(RampSchedule::staged(N_SITES, &[0, 3, 7, 4], mhz_to_rad(50.0), mhz_to_rad(-150.0), 0.3e-9, duration, RampShape::Linear)?)
    }

    pub fn fidelity(&self, duration: f64, dt: f64) -> Result<f64> {
        let opts = RampOptions { dt, integrator: Integrator::CommutatorFree4 };
        let out = evolve_ramp(&Self::schedule(duration)?, &self.spec, &self.basis, opts, Some(&self.target))?;
        out.fidelity.context("ramp returned no fidelity")
    }
}

fn c10_ramp() -> Outcome {
    let case = RampCase::new()?;
    let golden = GoldenSet::parse(RAMP_GOLDEN)?;
    let coarse = case.fidelity(300e-9, 0.1e-9)?;
    let fine = case.fidelity(300e-9, 0.05e-9)?;
    let slow = case.fidelity(600e-9, 0.1e-9)?;
    let (ok_c, dev_c) = check_golden(&golden, "ramp_fidelity/300ns", &case.spec, &[coarse])?;
    let (ok_f, dev_f) = check_golden(&golden, "ramp_fidelity/300ns", &case.spec, &[fine])?;
    Ok((
        ok_c && ok_f && slow > coarse,
        format!("F(300 ns) = {coarse:.9} (dt 0.1 ns, dev {dev_c:.1e}), {fine:.9} (dt 0.05 ns, dev {dev_f:.1e}); F(600 ns) = {slow:.6}"),
    ))
}

fn i_golden_sweep(golden: &GoldenSet) -> Outcome {
    let basis = sweep_basis()?;
    let mut failed = Vec::new();
    let mut worst = 0.0f64;
    for r in all_ratios() {
        let spec = sweep_spec(r)?;
        let top = top_state(&spec, &basis)?;
        let rep = ObservableReport::exact(&top.state, &spec)?;
        let ground = ground_state(&assemble(&spec, &*basis)?, &basis)?.energy;
        let g: Vec<f64> = rep.g_matrix.iter().map(|e| e.value).collect();
        for (what, actual) in [
            ("top_energy", vec![top.energy]),
            ("ground_energy", vec![ground]),
            ("bonds", rep.bond_o.clone()),
            ("correlations", g),
        ] {
            let (ok, dev) = check_golden(golden, &format!("ratio={r}/{what}"), &spec, &actual)?;
            worst = worst.max(dev);
            if !ok {
                failed.push(format!("{r}/{what}"));
            }
        }
    }
    Ok((failed.is_empty(), format!("32 frozen oracle values, max deviation {worst:.1e}; failures: {failed:?}")))
}

fn i_unitarity() -> Outcome {
    let spec = sweep_spec(-1.22)?;
    let basis = sweep_basis()?;
    let h = assemble(&spec, &*basis)?;
    let psi = StateVector::basis_state(basis.clone(), &[1, 0, 0, 1, 1, 0, 0, 1])?;
    let a = evolve(&evolve(&psi, &h, 0.7)?, &h, 0.6)?;
    let b = evolve(&psi, &h, 1.3)?;
    let norm_err = (a.norm() - 1.0).abs();
    let compose_err = (1.0 - a.inner(&b)?.norm()).abs();
    let n_err = (a.populations().iter().sum::<f64>() - N_PARTICLES as f64).abs();
    Ok((
        h.is_hermitian() && norm_err < 1e-10 && compose_err < 1e-10 && n_err < 1e-10,
        format!("norm error {norm_err:.1e}; composition error {compose_err:.1e}; particle number error {n_err:.1e}"),
    ))
}

fn i_zero_noise() -> Outcome {
    let (spec, _, _, t) = lindblad_case()?;
    let basis = Arc::new(MultiSectorBasis::build(3, 1, 1)?);
    let h = assemble(&spec, &*basis)?;
    let start = StateVector::basis_state(basis.clone(), &[1, 0, 0])?;
    let unitary = evolve(&start, &h, t)?;
    let model = NoiseModel::noiseless(3);
    let rho = lindblad_evolve(&DensityMatrix::pure(&start), &h, &model, t, 0.05)?;
    let f_rho = rho.fidelity_with(&unitary)?;
    let ens = trajectory_evolve(&start, &h, &model, t, 0.05, 4, 1)?;
    let f_traj = ens.iter().map(|s| s.inner(&unitary).map(|c| c.norm_sqr())).collect::<fluxladder::Result<Vec<_>>>()?;
    let worst = f_traj.iter().copied().fold(f_rho, f64::min);
    Ok((worst >= 1.0 - 1e-8, format!("min fidelity with unitary evolution {worst:.12}")))
}

fn i_density_physical() -> Outcome {
    let (spec, t1, t2r, _) = lindblad_case()?;
    let basis = Arc::new(MultiSectorBasis::build(3, 2, 1)?);
    let h = assemble(&spec, &*basis)?;
    let model = NoiseModel::uniform(3, t1, t2r)?;
    let mut rho = DensityMatrix::pure(&StateVector::basis_state(basis.clone(), &[1, 1, 0])?);
    let (mut herm, mut min_eig) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        rho = lindblad_evolve(&rho, &h, &model, 1.0, 0.05)?;
        herm = herm.max(rho.hermitian_deviation());
        min_eig = min_eig.min(rho.min_eigenvalue());
    }
    Ok((herm <= 1e-10 && min_eig >= -1e-8, format!("hermiticity deviation {herm:.1e}; min eigenvalue {min_eig:.1e}")))
}

fn i_noise_model_guard() -> Outcome {
    let rejected = NoiseModel::uniform(3, 10.0, 25.0).is_err() && NoiseModel::uniform(3, -1.0, 1.0).is_err();
    let accepted = NoiseModel::uniform(3, 10.0, 20.0).is_ok();
    Ok((rejected && accepted, "T2R > 2 T1 and T1 <= 0 rejected, T2R = 2 T1 accepted".into()))
}

fn i_measurability_guard() -> Outcome {
    let spec = sweep_spec(-1.22)?;
    let overlapping = MeasurementPlan::correlation(2, 3, &spec, 10, 0).is_err();
    let shared = MeasurementPlan::current(&[1, 2], &spec, 10, 0).is_err();
    Ok((overlapping && shared, "plans sharing a site are rejected".into()))
}

fn i_sampling_determinism() -> Outcome {
    let spec = sweep_spec(-1.22)?;
    let psi = top_state(&spec, &sweep_basis()?)?.state;
    let plan = MeasurementPlan::correlation(1, 5, &spec, 5_000, 17)?;
    let (a, _) = measure_shots(&psi, &plan)?;
    let (b, _) = measure_shots(&psi, &plan)?;
    let (c, _) = measure_shots(&psi, &plan.clone().with_seed(18))?;
    Ok((a == b && a != c && a.total == 5_000, "identical seed gives identical counts, new seed differs".into()))
}

/// Runs the configuration check (when a config is given) and the full suite.
pub fn run(config: Option<&ExperimentConfig>) -> VerifyReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    if let Some(cfg) = config {
        checks.push(run_check("CFG", "configuration", None, || {
            cfg.validate()?;
            Ok((true, format!("{} ratios, {} plan blocks, hash {}", cfg.ratios.len(), cfg.plans.len(), &cfg.hash()[..12])))
        }));
    }
    let golden = sweep_golden();
    checks.push(run_check("C1", "hard-core estimator exactness", secs(10), c1_estimator_exactness));
    checks.push(run_check("C2", "sign-trick spectral identity", secs(30), c2_sign_trick));
    checks.push(run_check("C3", "vanishing mean currents", None, c3_vanishing_currents));
    checks.push(run_check("C4", "chiral-phase correlation signs", None, || c4_chiral_signs(&golden)));
    checks.push(run_check("C5", "order-parameter hierarchy", None, || c5_hierarchy(&golden)));
    checks.push(run_check("C6", "bond order", None, || c6_bond_order(&golden)));
    checks.push(run_check("C7", "shot-noise scaling", None, c7_shot_scaling));
    checks.push(run_check("C8", "beamsplitter calibration", None, c8_beamsplitter));
    checks.push(run_check("C9", "open-system checks", secs(120), c9_open_system));
    checks.push(run_check("C10", "ramp preparation", None, c10_ramp));
    checks.push(run_check("I1", "frozen oracle sweep values", None, || i_golden_sweep(&golden)));
    checks.push(run_check("I2", "unitary evolution", None, i_unitarity));
    checks.push(run_check("I3", "zero-noise limit", None, i_zero_noise));
    checks.push(run_check("I4", "density matrix stays physical", None, i_density_physical));
    checks.push(run_check("I5", "noise model invariants", None, i_noise_model_guard));
    checks.push(run_check("I6", "measurable plans only", None, i_measurability_guard));
    checks.push(run_check("I7", "seeded sampling determinism", None, i_sampling_determinism));
    let passed = checks.iter().filter(|c| c.pass).count();
    VerifyReport { failed: checks.len() - passed, passed, checks, elapsed_s: start.elapsed().as_secs_f64() }
}
