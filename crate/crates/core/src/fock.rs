//! Lattice parameterization, fixed-number Fock bases and state vectors.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Complex64, Error, Result, C0};

/// Parameters of the ladder Hamiltonian.
///
/// Rung couplings `j_rung[j]` connect sites `j` and `j + 1`; leg couplings
/// `j_leg[j]` connect sites `j` and `j + 2` and carry the Peierls phase
/// `flux`. Both coupling lists hold strictly positive magnitudes; the sign of
/// the physical leg coupling lives entirely in `flux` (0 for a positive leg
/// coupling, π for a negative one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub omega: Vec<f64>,
    pub u: Vec<f64>,
    pub j_rung: Vec<f64>,
    pub j_leg: Vec<f64>,
    pub flux: f64,
    pub n_max: u8,
}

impl LatticeSpec {
    pub fn new(
        omega: Vec<f64>,
        u: Vec<f64>,
        j_rung: Vec<f64>,
        j_leg: Vec<f64>,
        flux: f64,
        n_max: u8,
    ) -> Result<Self> {
        let spec = LatticeSpec {
            n_sites: omega.len(),
            omega,
            u,
            j_rung,
            j_leg,
            flux,
            n_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Homogeneous ladder with zero site frequencies.
    pub fn uniform(n_sites: usize, j_rung: f64, j_leg: f64, u: f64, flux: f64, n_max: u8) -> Result<Self> {
        LatticeSpec::new(
            vec![0.0; n_sites],
            vec![u; n_sites],
            vec![j_rung; n_sites.saturating_sub(1)],
            vec![j_leg; n_sites.saturating_sub(2)],
            flux,
            n_max,
        )
    }

    /// Homogeneous ladder parameterized by the signed leg-to-rung ratio
    /// `J_∥/J`: the flux is π for negative ratios and 0 for positive ones.
    pub fn from_ratio(n_sites: usize, j_rung: f64, ratio: f64, u: f64, n_max: u8) -> Result<Self> {
        if !ratio.is_finite() || ratio == 0.0 {
            return Err(Error::param(format!("coupling ratio must be finite and nonzero, got {ratio}")));
        }
        let flux = if ratio < 0.0 { PI } else { 0.0 };
        LatticeSpec::uniform(n_sites, j_rung, ratio.abs() * j_rung, u, flux, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        if n < 2 {
            return Err(Error::param(format!("ladder needs at least 2 sites, got {n}")));
        }
        if self.omega.len() != n || self.u.len() != n {
            return Err(Error::param(format!(
                "omega and u need {n} entries, got {} and {}",
                self.omega.len(),
                self.u.len()
            )));
        }
        if self.j_rung.len() != n - 1 {
            return Err(Error::param(format!("j_rung needs {} entries, got {}", n - 1, self.j_rung.len())));
        }
        if self.j_leg.len() != n - 2 {
            return Err(Error::param(format!("j_leg needs {} entries, got {}", n - 2, self.j_leg.len())));
        }
        if let Some(j) = self.j_rung.iter().chain(&self.j_leg).find(|j| !(**j > 0.0) || !j.is_finite()) {
            return Err(Error::param(format!("couplings must be positive and finite, got {j}")));
        }
        if self.omega.iter().chain(&self.u).any(|x| !x.is_finite()) || !self.flux.is_finite() {
            return Err(Error::param("frequencies, interactions and flux must be finite"));
        }
        if self.n_max == 0 {
            return Err(Error::param("n_max must be at least 1"));
        }
        Ok(())
    }

    pub fn n_rungs(&self) -> usize {
        self.n_sites - 1
    }

    pub fn mean_rung(&self) -> f64 {
        self.j_rung.iter().sum::<f64>() / self.j_rung.len() as f64
    }

    /// Mirror image `j -> N - 1 - j`.
    pub fn reflected(&self) -> LatticeSpec {
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        LatticeSpec {
            n_sites: self.n_sites,
            omega: rev(&self.omega),
            u: rev(&self.u),
            j_rung: rev(&self.j_rung),
            j_leg: rev(&self.j_leg),
            // a†_j a_{j+2} e^{iφ} maps onto a†_{j'+2} a_{j'} e^{iφ}: the
            // mirrored leg carries the conjugate phase.
            flux: -self.flux,
            n_max: self.n_max,
        }
    }

    /// Hex SHA-256 over the canonical JSON encoding.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("lattice spec serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// Common interface of occupation-number bases.
pub trait OccupationBasis: Send + Sync {
    fn n_sites(&self) -> usize;
    fn n_max(&self) -> u8;
    fn len(&self) -> usize;
    fn occupations(&self, k: usize) -> &[u8];
    fn index_of(&self, occ: &[u8]) -> Option<usize>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same set of states in the same order.
    fn same_as(&self, other: &Self) -> bool;
}

/// All occupation tuples of `n_sites` sites holding exactly `total` bosons
/// with at most `n_max` per site, in lexicographically descending order.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_sites: usize,
    total: usize,
    n_max: u8,
    flat: Vec<u8>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockBasis {
    pub fn build(n_sites: usize, total: usize, n_max: u8) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::param("basis needs at least one site"));
        }
        if n_max == 0 || n_max > 9 {
            return Err(Error::param(format!("n_max must lie in 1..=9, got {n_max}")));
        }
        if total > n_sites * n_max as usize {
            return Err(Error::param(format!(
                "{total} bosons do not fit on {n_sites} sites with cutoff {n_max}"
            )));
        }
        let mut flat = Vec::new();
        let mut current = vec![0u8; n_sites];
        enumerate(&mut current, 0, total, n_max, &mut flat);
        let index = flat
            .chunks(n_sites)
            .enumerate()
            .map(|(k, occ)| (occ.to_vec(), k))
            .collect();
        Ok(FockBasis { n_sites, total, n_max, flat, index })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> {
        self.flat.chunks(self.n_sites)
    }
}

fn enumerate(current: &mut [u8], site: usize, remaining: usize, n_max: u8, out: &mut Vec<u8>) {
    let n = current.len();
    if site == n - 1 {
        if remaining <= n_max as usize {
            current[site] = remaining as u8;
            out.extend_from_slice(current);
        }
        return;
    }
    let capacity_after = (n - site - 1) * n_max as usize;
    let hi = remaining.min(n_max as usize);
    let lo = remaining.saturating_sub(capacity_after);
    for occ in (lo..=hi).rev() {
        current[site] = occ as u8;
        enumerate(current, site + 1, remaining - occ, n_max, out);
    }
}

impl OccupationBasis for FockBasis {
    fn n_sites(&self) -> usize {
        self.n_sites
    }
    fn n_max(&self) -> u8 {
        self.n_max
    }
    fn len(&self) -> usize {
        self.flat.len() / self.n_sites
    }
    fn occupations(&self, k: usize) -> &[u8] {
        &self.flat[k * self.n_sites..(k + 1) * self.n_sites]
    }
    fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }
    fn same_as(&self, other: &Self) -> bool {
        self.n_sites == other.n_sites && self.total == other.total && self.n_max == other.n_max
    }
}

/// Direct sum of the fixed-number bases for totals `0..=max_total`, needed
/// whenever loss couples neighbouring number sectors.
#[derive(Debug, Clone)]
pub struct MultiSectorBasis {
    sectors: Vec<FockBasis>,
    offsets: Vec<usize>,
    dim: usize,
}

impl MultiSectorBasis {
    pub fn build(n_sites: usize, max_total: usize, n_max: u8) -> Result<Self> {
        let sectors = (0..=max_total)
            .map(|total| FockBasis::build(n_sites, total, n_max))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(sectors.len());
        let mut dim = 0;
        for s in &sectors {
            offsets.push(dim);
            dim += s.len();
        }
        Ok(MultiSectorBasis { sectors, offsets, dim })
    }

    pub fn sectors(&self) -> &[FockBasis] {
        &self.sectors
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn max_total(&self) -> usize {
        self.sectors.len() - 1
    }

    /// Position of sector-local index `k` of the sector holding `total` bosons.
    pub fn global_index(&self, total: usize, k: usize) -> usize {
        self.offsets[total] + k
    }

    /// Embeds a fixed-number state into this basis.
    pub fn embed(self: &Arc<Self>, state: &StateVector<FockBasis>) -> Result<StateVector<MultiSectorBasis>> {
        let b = state.basis();
        if b.n_sites() != self.n_sites() || b.n_max() != self.n_max() || b.total() > self.max_total() {
            return Err(Error::BasisMismatch("state does not fit in the multi-sector basis".into()));
        }
        let mut amps = vec![C0; self.dim];
        let off = self.offsets[b.total()];
        amps[off..off + b.len()].copy_from_slice(state.amplitudes());
        StateVector::new(self.clone(), amps)
    }
}

impl OccupationBasis for MultiSectorBasis {
    fn n_sites(&self) -> usize {
        self.sectors[0].n_sites
    }
    fn n_max(&self) -> u8 {
        self.sectors[0].n_max
    }
    fn len(&self) -> usize {
        self.dim
    }
    fn occupations(&self, k: usize) -> &[u8] {
        let s = self.offsets.partition_point(|&o| o <= k) - 1;
        self.sectors[s].occupations(k - self.offsets[s])
    }
    fn index_of(&self, occ: &[u8]) -> Option<usize> {
        let total: usize = occ.iter().map(|&n| n as usize).sum();
        let sector = self.sectors.get(total)?;
        sector.index_of(occ).map(|k| self.offsets[total] + k)
    }
    fn same_as(&self, other: &Self) -> bool {
        self.sectors.len() == other.sectors.len() && self.sectors[0].same_as(&other.sectors[0])
    }
}

/// Dense complex amplitudes over a shared basis.
#[derive(Debug)]
pub struct StateVector<B: OccupationBasis = FockBasis> {
    basis: Arc<B>,
    amps: Vec<Complex64>,
}

impl<B: OccupationBasis> Clone for StateVector<B> {
    fn clone(&self) -> Self {
        StateVector { basis: self.basis.clone(), amps: self.amps.clone() }
    }
}

impl<B: OccupationBasis> StateVector<B> {
    pub fn new(basis: Arc<B>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.len() {
            return Err(Error::Dimension { expected: basis.len(), got: amps.len() });
        }
        Ok(StateVector { basis, amps })
    }

    pub fn zeros(basis: Arc<B>) -> Self {
        let amps = vec![C0; basis.len()];
        StateVector { basis, amps }
    }

    /// The Fock state `|occ⟩`.
    pub fn basis_state(basis: Arc<B>, occ: &[u8]) -> Result<Self> {
        let k = basis
            .index_of(occ)
            .ok_or_else(|| Error::param(format!("occupation {} not in basis", occupation_string(occ))))?;
        let mut s = StateVector::zeros(basis);
        s.amps[k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Normalized superposition `Σ c_k |occ_k⟩`.
    pub fn superposition(basis: Arc<B>, terms: &[(&[u8], Complex64)]) -> Result<Self> {
        let mut s = StateVector::zeros(basis);
        for (occ, c) in terms {
            let k = s
                .basis
                .index_of(occ)
                .ok_or_else(|| Error::param(format!("occupation {} not in basis", occupation_string(occ))))?;
            s.amps[k] += *c;
        }
        s.normalize()?;
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<B> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn with_amplitudes(&self, amps: Vec<Complex64>) -> Result<Self> {
        StateVector::new(self.basis.clone(), amps)
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::param("cannot normalize a zero or non-finite state"));
        }
        let inv = 1.0 / n;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis.same_as(&other.basis) {
            Ok(())
        } else {
            Err(Error::BasisMismatch("states live in different bases".into()))
        }
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_basis(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `amplitude · a†_i a_j |self⟩`, unnormalized. Moves that would push a
    /// site above the cutoff annihilate the component.
    pub fn apply_hop(&self, i: usize, j: usize, amplitude: Complex64) -> Result<Self> {
        let n = self.basis.n_sites();
        if i >= n || j >= n {
            return Err(Error::param(format!("site out of range: ({i}, {j}) on {n} sites")));
        }
        if i == j {
            return Err(Error::param("hop needs two distinct sites"));
        }
        let mut out = vec![C0; self.amps.len()];
        let mut buf = vec![0u8; n];
        for (k, a) in self.amps.iter().enumerate() {
            if *a == C0 {
                continue;
            }
            if let Some((target, elem)) = hop_element(&*self.basis, k, i, j, &mut buf) {
                out[target] += amplitude * elem * a;
            }
        }
        Ok(StateVector { basis: self.basis.clone(), amps: out })
    }

    /// Site populations `⟨n_j⟩`.
    pub fn populations(&self) -> Vec<f64> {
        let n = self.basis.n_sites();
        let mut pops = vec![0.0; n];
        for (k, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (site, &occ) in self.basis.occupations(k).iter().enumerate() {
                pops[site] += p * occ as f64;
            }
        }
        pops
    }

    /// Born probabilities `|ψ_k|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Removes the global phase: the largest-magnitude amplitude becomes real
    /// and positive (ties resolved by lowest index).
    pub fn fix_phase(&mut self) {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (k, a) in self.amps.iter().enumerate() {
            let m = a.norm_sqr();
            if m > best_mag * (1.0 + 1e-12) {
                best = k;
                best_mag = m;
            }
        }
        if best_mag > 0.0 {
            let a = self.amps[best];
            let phase = a.conj() / a.norm();
            self.amps.iter_mut().for_each(|x| *x *= phase);
        }
    }
}

/// Matrix element of `a†_i a_j` acting on basis state `k`: the index of the
/// image state and the bosonic factor `√(n_j (n_i + 1))`, or `None` when the
/// move is forbidden.
pub(crate) fn hop_element<B: OccupationBasis + ?Sized>(
    basis: &B,
    k: usize,
    i: usize,
    j: usize,
    buf: &mut [u8],
) -> Option<(usize, f64)> {
    let occ = basis.occupations(k);
    let (ni, nj) = (occ[i], occ[j]);
    if nj == 0 || ni >= basis.n_max() {
        return None;
    }
    buf.copy_from_slice(occ);
    buf[i] += 1;
    buf[j] -= 1;
    let target = basis.index_of(buf)?;
    Some((target, ((nj as f64) * (ni as f64 + 1.0)).sqrt()))
}

/// Digit string of an occupation tuple, site 0 first (e.g. `"10010011"`).
pub fn occupation_string(occ: &[u8]) -> String {
    occ.iter().map(|&n| char::from(b'0' + n)).collect()
}

pub fn parse_occupation_string(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            c.to_digit(10)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Format(format!("invalid occupation string {s:?}")))
        })
        .collect()
}

/// Wrapper that prints an occupation tuple as its digit string.
pub struct Occupation<'a>(pub &'a [u8]);

impl fmt::Display for Occupation<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&occupation_string(self.0))
    }
}
