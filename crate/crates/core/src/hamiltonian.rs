//! Ladder Hamiltonian, sign-flip mapping and protocol Hamiltonians.
//!
//! The ladder Hamiltonian reads (ħ = 1)
//!
//! ```text
//! H = Σ_j ω_j n_j + U_j/2 n_j (n_j - 1)
//!   - Σ_j J_j (a†_j a_{j+1} + h.c.)
//!   + Σ_j J̃_j (e^{iφ} a†_j a_{j+2} + h.c.)
//! ```
//!
//! Negating it is equivalent, up to the staggered gauge
//! `a_j -> (-1)^j a_j`, to shifting the flux by π and flipping the signs of
//! `U` and `ω`: the gauge flips every rung hopping and leaves the legs alone.
//! [`negate_map`] returns the mapped parameters and [`staggered_gauge`]
//! carries states between the two pictures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fock::{LatticeSpec, OccupationBasis, StateVector};
use crate::operator::{add_hop_pair, hop_pair_operator, SparseOperator, TripletBuilder};
use crate::{Complex64, Error, Result};

/// `e^{iφ}`, exact for multiples of π/2.
pub fn peierls_phase(flux: f64) -> Complex64 {
    let r = flux.rem_euclid(2.0 * PI);
    let quarter = r / (PI / 2.0);
    if quarter == quarter.round() {
        return match quarter as i64 % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, r)
}

fn check_basis<B: OccupationBasis + ?Sized>(spec: &LatticeSpec, basis: &B) -> Result<()> {
    spec.validate()?;
    if basis.n_sites() != spec.n_sites {
        return Err(Error::Dimension { expected: spec.n_sites, got: basis.n_sites() });
    }
    if basis.n_max() != spec.n_max {
        return Err(Error::BasisMismatch(format!(
            "basis cutoff {} differs from lattice cutoff {}",
            basis.n_max(),
            spec.n_max
        )));
    }
    Ok(())
}

/// Onsite part `Σ_j ω_j n_j + U_j/2 n_j (n_j - 1)` for each basis state.
pub fn onsite_energies<B: OccupationBasis + ?Sized>(spec: &LatticeSpec, basis: &B) -> Vec<f64> {
    (0..basis.len())
        .map(|k| {
            basis
                .occupations(k)
                .iter()
                .enumerate()
                .map(|(j, &n)| {
                    let n = n as f64;
                    spec.omega[j] * n + 0.5 * spec.u[j] * n * (n - 1.0)
                })
                .sum()
        })
        .collect()
}

/// Hopping part of the ladder Hamiltonian (rungs and legs only).
pub fn assemble_hopping<B: OccupationBasis + ?Sized>(spec: &LatticeSpec, basis: &B) -> Result<SparseOperator> {
    check_basis(spec, basis)?;
    let mut b = TripletBuilder::new(basis.len());
    add_hopping(&mut b, spec, basis);
    Ok(b.build(true))
}

fn add_hopping<B: OccupationBasis + ?Sized>(b: &mut TripletBuilder, spec: &LatticeSpec, basis: &B) {
    for (j, &jr) in spec.j_rung.iter().enumerate() {
        add_hop_pair(b, basis, j, j + 1, Complex64::new(-jr, 0.0));
    }
    let phase = peierls_phase(spec.flux);
    for (j, &jl) in spec.j_leg.iter().enumerate() {
        add_hop_pair(b, basis, j, j + 2, phase * jl);
    }
}

/// Full ladder Hamiltonian on `basis`.
pub fn assemble<B: OccupationBasis + ?Sized>(spec: &LatticeSpec, basis: &B) -> Result<SparseOperator> {
    check_basis(spec, basis)?;
    let mut b = TripletBuilder::new(basis.len());
    for (k, e) in onsite_energies(spec, basis).into_iter().enumerate() {
        b.add(k, k, Complex64::new(e, 0.0));
    }
    add_hopping(&mut b, spec, basis);
    Ok(b.build(true))
}

/// Parameters whose Hamiltonian is unitarily equivalent to `-H(spec)`:
/// `U -> -U`, `ω -> -ω`, `φ -> φ + π (mod 2π)`, coupling magnitudes kept.
pub fn negate_map(spec: &LatticeSpec) -> LatticeSpec {
    LatticeSpec {
        n_sites: spec.n_sites,
        omega: spec.omega.iter().map(|w| -w).collect(),
        u: spec.u.iter().map(|u| -u).collect(),
        j_rung: spec.j_rung.clone(),
        j_leg: spec.j_leg.clone(),
        flux: (spec.flux + PI).rem_euclid(2.0 * PI),
        n_max: spec.n_max,
    }
}

/// Diagonal of the staggered gauge `G = (-1)^{Σ_j j n_j}`, with
/// `G H(negate_map(s)) G = -H(s)`.
pub fn staggered_gauge<B: OccupationBasis + ?Sized>(basis: &B) -> Vec<f64> {
    (0..basis.len())
        .map(|k| {
            let odd: usize = basis
                .occupations(k)
                .iter()
                .enumerate()
                .filter(|(j, _)| j % 2 == 1)
                .map(|(_, &n)| n as usize)
                .sum();
            if odd % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// Applies the staggered gauge to a state (an involution).
pub fn apply_staggered_gauge<B: OccupationBasis>(state: &StateVector<B>) -> StateVector<B> {
    let signs = staggered_gauge(&**state.basis());
    let amps = state.amplitudes().iter().zip(&signs).map(|(a, s)| a * *s).collect();
    state.with_amplitudes(amps).expect("same dimension")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Beamsplitter,
    Idle,
}

/// Two-site Hamiltonian acting on an isolated rung.
///
/// * beamsplitter: `-J (a†_j a_{j+1} + h.c.)`, the rung term of the ladder
///   Hamiltonian restricted to one pair; at `t = π/(4J)` it generates
///   `√iSWAP` on the single-excitation manifold.
/// * idle: `Δ (n_j - n_{j+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairHamiltonianSpec {
    pub kind: PairKind,
    pub pair: (usize, usize),
    pub strength: f64,
}

impl PairHamiltonianSpec {
    pub fn new(kind: PairKind, pair: (usize, usize), strength: f64) -> Result<Self> {
        let s = PairHamiltonianSpec { kind, pair, strength };
        s.validate()?;
        Ok(s)
    }

    pub fn beamsplitter(rung: usize, j: f64) -> Result<Self> {
        PairHamiltonianSpec::new(PairKind::Beamsplitter, (rung, rung + 1), j)
    }

    pub fn idle(rung: usize, delta: f64) -> Result<Self> {
        PairHamiltonianSpec::new(PairKind::Idle, (rung, rung + 1), delta)
    }

    pub fn validate(&self) -> Result<()> {
        let (i, j) = self.pair;
        if j != i + 1 {
            return Err(Error::param(format!("pair ({i}, {j}) is not a rung")));
        }
        if self.strength == 0.0 || !self.strength.is_finite() {
            return Err(Error::param("pair strength must be finite and nonzero"));
        }
        Ok(())
    }
}

pub fn assemble_pair<B: OccupationBasis + ?Sized>(spec: &PairHamiltonianSpec, basis: &B) -> Result<SparseOperator> {
    spec.validate()?;
    let (i, j) = spec.pair;
    if j >= basis.n_sites() {
        return Err(Error::param(format!("pair ({i}, {j}) outside {} sites", basis.n_sites())));
    }
    Ok(match spec.kind {
        PairKind::Beamsplitter => hop_pair_operator(basis, i, j, Complex64::new(-spec.strength, 0.0)),
        PairKind::Idle => {
            let diag: Vec<f64> = (0..basis.len())
                .map(|k| {
                    let occ = basis.occupations(k);
                    spec.strength * (occ[i] as f64 - occ[j] as f64)
                })
                .collect();
            SparseOperator::diagonal(&diag)
        }
    })
}

fn check_rung<B: OccupationBasis + ?Sized>(rung: usize, basis: &B) -> Result<()> {
    if rung + 1 >= basis.n_sites() {
        return Err(Error::param(format!("rung {rung} out of range for {} sites", basis.n_sites())));
    }
    Ok(())
}

/// Rung current `𝒥_j = i J_j (a†_j a_{j+1} - a†_{j+1} a_j)`.
pub fn current_operator<B: OccupationBasis + ?Sized>(
    rung: usize,
    spec: &LatticeSpec,
    basis: &B,
) -> Result<SparseOperator> {
    check_rung(rung, basis)?;
    let j = *spec
        .j_rung
        .get(rung)
        .ok_or_else(|| Error::param(format!("rung {rung} has no coupling")))?;
    Ok(hop_pair_operator(basis, rung, rung + 1, Complex64::new(0.0, j)))
}

/// Bond kinetic operator `B_j = a†_j a_{j+1} + a†_{j+1} a_j`.
pub fn bond_operator<B: OccupationBasis + ?Sized>(rung: usize, basis: &B) -> Result<SparseOperator> {
    check_rung(rung, basis)?;
    Ok(hop_pair_operator(basis, rung, rung + 1, Complex64::new(1.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;
    use crate::operator::total_number_operator;
    use std::sync::Arc;

    #[test]
    fn phases_are_exact_on_axes() {
        assert_eq!(peierls_phase(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(peierls_phase(PI), Complex64::new(-1.0, 0.0));
        assert_eq!(peierls_phase(2.0 * PI), Complex64::new(1.0, 0.0));
        assert_eq!(peierls_phase(-PI / 2.0), Complex64::new(0.0, -1.0));
        assert!((peierls_phase(0.3) - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn commutes_with_total_number() {
        let spec = LatticeSpec::uniform(5, 1.0, 0.7, -3.0, 0.4, 2).unwrap();
        let basis = crate::fock::MultiSectorBasis::build(5, 3, 2).unwrap();
        let h = assemble(&spec, &basis).unwrap();
        let n = total_number_operator(&basis);
        let comm = h.matmul(&n).unwrap().sub(&n.matmul(&h).unwrap()).unwrap();
        assert_eq!(comm.max_abs(), 0.0);
    }

    #[test]
    fn exactly_hermitian() {
        let spec = LatticeSpec::uniform(6, 1.0, 1.3, -2.0, 1.1, 3).unwrap();
        let basis = FockBasis::build(6, 3, 3).unwrap();
        let h = assemble(&spec, &basis).unwrap();
        assert!(h.is_hermitian());
        assert_eq!(h.hermitian_deviation(), 0.0);
    }

    #[test]
    fn two_site_matrix() {
        let spec = LatticeSpec::uniform(2, 1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let basis = FockBasis::build(2, 1, 1).unwrap();
        let h = assemble(&spec, &basis).unwrap().to_dense();
        assert_eq!(h[(0, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(h[(0, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let spec = LatticeSpec::uniform(3, 1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let basis = FockBasis::build(4, 1, 1).unwrap();
        assert!(matches!(assemble(&spec, &basis), Err(Error::Dimension { .. })));
    }

    #[test]
    fn negate_map_examples() {
        let spec = LatticeSpec::uniform(4, 1.0, 1.0, -5.0, 0.0, 2).unwrap();
        let m = negate_map(&spec);
        assert_eq!(m.flux, PI);
        assert!(m.u.iter().all(|&u| u == 5.0));
        assert_eq!(negate_map(&m).flux, 0.0);
        assert_eq!(negate_map(&m), spec);
    }

    #[test]
    fn gauge_maps_negated_hamiltonian() {
        let mut spec = LatticeSpec::uniform(5, 1.0, 0.8, -4.0, 0.3, 2).unwrap();
        spec.omega = vec![0.1, -0.4, 0.2, 0.0, 0.7];
        let basis = FockBasis::build(5, 3, 2).unwrap();
        let h = assemble(&spec, &basis).unwrap().to_dense();
        let hm = assemble(&negate_map(&spec), &basis).unwrap().to_dense();
        let g = staggered_gauge(&basis);
        for r in 0..basis.len() {
            for c in 0..basis.len() {
                let lhs = hm[(r, c)] * g[r] * g[c];
                assert!((lhs + h[(r, c)]).norm() < 1e-14, "({r},{c})");
            }
        }
    }

    #[test]
    fn pair_hamiltonians() {
        let basis = Arc::new(FockBasis::build(2, 1, 1).unwrap());
        let bs = assemble_pair(&PairHamiltonianSpec::beamsplitter(0, 2.0).unwrap(), &*basis).unwrap();
        assert_eq!(bs.get(0, 1), Complex64::new(-2.0, 0.0));
        let idle = assemble_pair(&PairHamiltonianSpec::idle(0, 0.5).unwrap(), &*basis).unwrap();
        let s = StateVector::basis_state(basis.clone(), &[1, 0]).unwrap();
        let out = idle.apply_state(&s).unwrap();
        assert_eq!(out.amplitudes()[0], Complex64::new(0.5, 0.0));
        assert!(PairHamiltonianSpec::new(PairKind::Beamsplitter, (0, 2), 1.0).is_err());
        assert!(PairHamiltonianSpec::idle(0, 0.0).is_err());
    }

    #[test]
    fn current_and_bond_examples() {
        let basis = Arc::new(FockBasis::build(2, 1, 1).unwrap());
        let spec = LatticeSpec::uniform(2, 1.0, 1.0, 0.0, 0.0, 1).unwrap();
        let cur = current_operator(0, &spec, &*basis).unwrap();
        let bond = bond_operator(0, &*basis).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let real = StateVector::superposition(basis.clone(), &[(&[1, 0], one), (&[0, 1], one)]).unwrap();
        let twisted =
            StateVector::superposition(basis.clone(), &[(&[1, 0], one), (&[0, 1], Complex64::new(0.0, 1.0))]).unwrap();
        assert!(cur.expectation(&real).unwrap().norm() < 1e-15);
        assert!((cur.expectation(&twisted).unwrap().re + 1.0).abs() < 1e-15);
        assert!((bond.expectation(&real).unwrap().re - 1.0).abs() < 1e-15);
        assert!(cur.is_hermitian() && bond.is_hermitian());
        assert!(current_operator(1, &spec, &*basis).is_err());
    }
}
