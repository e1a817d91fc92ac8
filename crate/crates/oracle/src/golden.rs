//! Golden-value generation from the brute-force reference.

use std::f64::consts::PI;

use fluxladder::fock::LatticeSpec;
use fluxladder::golden::{GoldenSet, GoldenValue};

use crate::{hamiltonian, hermitian_eigen, mhz, observables, overlap_sqr, rk4_lindblad, rk4_ramp, top_state, LinearRamp, Mat, Space};

/// Coupling ratios of the chiral/Meissner sweep.
pub const PHASE_RATIOS: [f64; 6] = [-3.56, -2.02, -1.22, 0.98, 1.96, 3.53];
/// Coupling ratios of the bond-order sweep.
pub const BOND_RATIOS: [f64; 6] = [-3.56, -2.02, -1.22, 0.98, 2.04, 2.85];

pub const N_SITES: usize = 8;
pub const N_PARTICLES: usize = 4;

/// Relative tolerance on order parameters.
pub const ORDER_RTOL: f64 = 0.01;

/// Hard-core sweep lattice with unit rung coupling.
pub fn sweep_spec(ratio: f64) -> LatticeSpec {
    LatticeSpec::from_ratio(N_SITES, 1.0, ratio, 0.0, 1).expect("valid sweep spec")
}

/// Device-scale lattice for the ramp: `J/2π = 6.1 MHz`, `U/2π = -186.1 MHz`,
/// two bosons per site at most.
pub fn ramp_spec() -> LatticeSpec {
    LatticeSpec::from_ratio(N_SITES, mhz(6.1), RAMP_RATIO, mhz(-186.1), 2).expect("valid ramp spec")
}

pub const RAMP_RATIO: f64 = -1.22;
pub const RAMP_EXCITED: [usize; 4] = [0, 3, 7, 4];
pub const RAMP_SPACING_MHZ: f64 = 50.0;
pub const RAMP_PARK_MHZ: f64 = -150.0;
pub const RAMP_SETTLE: f64 = 0.3e-9;
pub const RAMP_DURATION: f64 = 300e-9;

/// Settle segment from spaced detunings to the parked configuration, then a
/// linear ramp of every site onto resonance.
pub fn ramp_schedule(duration: f64) -> (Vec<u8>, LinearRamp) {
    let mut initial = vec![0u8; N_SITES];
    let park = mhz(RAMP_PARK_MHZ);
    let mut spaced = vec![park; N_SITES];
    for (k, &s) in RAMP_EXCITED.iter().enumerate() {
        initial[s] = 1;
        spaced[s] = mhz(RAMP_SPACING_MHZ) * k as f64;
    }
    let parked: Vec<f64> = initial.iter().map(|&n| if n == 1 { 0.0 } else { park }).collect();
    let ramp = LinearRamp {
        segments: vec![(RAMP_SETTLE, spaced, parked.clone()), (duration, parked, vec![0.0; N_SITES])],
    };
    (initial, ramp)
}

/// Lattice, noise times and duration of the open-system reference.
pub fn lindblad_case() -> (LatticeSpec, [f64; 2], f64) {
    let spec = LatticeSpec::uniform(3, 1.0, 0.5, 0.0, PI, 1).expect("valid spec");
    (spec, [20.0, 15.0], 5.0)
}

/// Space of the open-system reference: sectors 0 and 1 of 3 hard-core sites.
pub fn lindblad_space() -> Space {
    Space::with_totals(3, &[0, 1], 1)
}

/// Density matrix of the open-system reference, started in `|100⟩`, in the
/// order of [`lindblad_space`].
pub fn lindblad_reference(steps: usize) -> Mat {
    let (spec, [t1, t2r], t) = lindblad_case();
    let space = lindblad_space();
    let h = hamiltonian(&spec, &space);
    let gamma_phi = 1.0 / t2r - 1.0 / (2.0 * t1);
    let mut jumps = Vec::new();
    for j in 0..3 {
        let mut l = Mat::zeros(space.dim());
        l.add_scaled(&space.lower(j), (1.0 / t1).sqrt().into());
        jumps.push(l);
        let mut d = Mat::zeros(space.dim());
        d.add_scaled(&space.number(j), (2.0 * gamma_phi).sqrt().into());
        jumps.push(d);
    }
    let mut rho = Mat::zeros(space.dim());
    let k = space.find(&[1, 0, 0]).expect("start state");
    rho.data[k][k] = 1.0.into();
    rk4_lindblad(&h, &jumps, &rho, t, steps)
}

fn key(ratio: f64, what: &str) -> String {
    format!("ratio={ratio}/{what}")
}

/// Hard-core spectra and top-state observables over both sweeps.
pub fn sweep_golden() -> GoldenSet {
    let mut set = GoldenSet::default();
    let space = Space::new(N_SITES, N_PARTICLES, 1);
    let mut ratios: Vec<f64> = PHASE_RATIOS.iter().chain(&BOND_RATIOS).copied().collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let mut chiral = std::collections::BTreeMap::new();
    for &ratio in &ratios {
        let spec = sweep_spec(ratio);
        let hash = spec.content_hash();
        let (vals, vecs) = hermitian_eigen(&hamiltonian(&spec, &space));
        let top = vecs.last().expect("nonempty spectrum");
        let obs = observables(&spec, &space, top);
        let prov = "oracle: dense Jacobi diagonalization, largest eigenvalue";
        set.push(GoldenValue::scalar(&key(ratio, "top_energy"), &hash, vals[vals.len() - 1], 1e-9, prov));
        set.push(GoldenValue::scalar(&key(ratio, "ground_energy"), &hash, vals[0], 1e-9, "oracle: dense Jacobi diagonalization"));
        set.push(GoldenValue::scalar(&key(ratio, "chiral_order"), &hash, obs.chiral, ORDER_RTOL * obs.chiral.abs(), prov));
        set.push(GoldenValue::scalar(&key(ratio, "bond_order"), &hash, obs.bond_order, ORDER_RTOL * obs.bond_order.abs(), prov));
        set.push(GoldenValue::vector(&key(ratio, "bonds"), &hash, obs.bonds.clone(), 1e-9, prov));
        set.push(GoldenValue::vector(
            &key(ratio, "correlations"),
            &hash,
            obs.correlations.iter().map(|(_, g)| *g).collect(),
            1e-9,
            prov,
        ));
        if ratio == RAMP_RATIO {
            let flat = |f: fn(&num_complex::Complex64) -> f64| obs.one_body.iter().flatten().map(f).collect::<Vec<_>>();
            set.push(GoldenValue::vector(&key(ratio, "one_body_re"), &hash, flat(|c| c.re), 1e-9, prov));
            set.push(GoldenValue::vector(&key(ratio, "one_body_im"), &hash, flat(|c| c.im), 1e-9, prov));
        }
        chiral.insert(ratio.to_bits(), obs.chiral);
    }
    let ratio = chiral[&(-1.22f64).to_bits()] / chiral[&0.98f64.to_bits()];
    set.push(GoldenValue::scalar(
        "chiral_ratio/-1.22:0.98",
        &sweep_spec(-1.22).content_hash(),
        ratio,
        ORDER_RTOL * ratio.abs(),
        "oracle: ratio of dense top-state chiral orders",
    ));
    set
}

/// Ramp fidelity against the directly diagonalized top state.
pub fn ramp_golden(steps_per_ns: f64) -> GoldenSet {
    let spec = ramp_spec();
    let space = Space::new(N_SITES, N_PARTICLES, spec.n_max);
    let (_, target) = top_state(&spec, &space);
    let (initial, ramp) = ramp_schedule(RAMP_DURATION);
    let psi = rk4_ramp(&spec, &space, &initial, &ramp, steps_per_ns);
    let fidelity = overlap_sqr(&target, &psi);
    let mut set = GoldenSet::default();
    set.push(GoldenValue::scalar(
        "ramp_fidelity/300ns",
        &spec.content_hash(),
        fidelity,
        1e-6,
        "oracle: continuous-time RK4 at 1 ps against dense top state",
    ));
    set
}

pub fn lindblad_golden(steps: usize) -> GoldenSet {
    let (spec, _, _) = lindblad_case();
    let rho = lindblad_reference(steps);
    let prov = "oracle: fixed-step RK4 master equation";
    let mut set = GoldenSet::default();
    let hash = spec.content_hash();
    set.push(GoldenValue::vector("lindblad/rho_re", &hash, rho.data.iter().flatten().map(|c| c.re).collect(), 1e-8, prov));
    set.push(GoldenValue::vector("lindblad/rho_im", &hash, rho.data.iter().flatten().map(|c| c.im).collect(), 1e-8, prov));
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lindblad_reference_is_converged() {
        let a = lindblad_reference(4000);
        let b = lindblad_reference(8000);
        let dev = a.data.iter().flatten().zip(b.data.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-11, "{dev}");
        let tr: f64 = (0..a.dim()).map(|k| a.data[k][k].re).sum();
        assert!((tr - 1.0).abs() < 1e-12);
    }
}
