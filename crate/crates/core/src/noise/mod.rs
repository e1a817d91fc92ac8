//! Open-system dynamics: amplitude damping `√γ₁ a_j` and pure dephasing
//! `√(2γ_φ) n_j` per site, integrated either as a dense master equation or
//! as an ensemble of quantum-jump trajectories.
//!
//! Loss changes the particle number, so everything here works on a
//! [`MultiSectorBasis`](crate::fock::MultiSectorBasis).

mod density;
mod lindblad;
mod model;
mod trajectory;

pub use density::DensityMatrix;
pub use lindblad::{lindblad_evolve, lindblad_evolve_with, lindblad_stages, LindbladOptions};
pub use model::{JumpOperator, NoiseModel};
pub use trajectory::{ensemble_expectation, ensemble_populations, trajectory_evolve, MAX_JUMP_PROBABILITY};
