//! Eigensolvers and unitary dynamics.

mod eigen;
mod evolve;
mod krylov;
mod ramp;

pub use eigen::{
    dense_spectrum, eigenvalues, ground_state, ground_state_with, top_state, top_state_with, Eigenstate, LanczosOptions, Solver,
    DENSE_LIMIT,
};
pub use evolve::{evolve, evolve_diagonal, krylov_evolve, Propagator, DENSE_EVOLVE_LIMIT};
pub use krylov::{expm_krylov, KrylovOptions};
pub use ramp::{evolve_ramp, Integrator, RampOptions, RampOutcome, RampSchedule, RampSegment, RampShape};
