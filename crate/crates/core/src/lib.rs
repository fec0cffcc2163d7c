//! Bi-Hamiltonian structure of the Pais-Uhlenbeck oscillator.

pub mod dynamics;
pub mod error;
pub mod hierarchy;
pub mod model;
pub mod numkit;
pub mod sampling;
pub mod symmetry;
pub mod transform;

pub use error::{PuError, Result};
pub use model::{PhaseState, PoissonTensor, PuParams, QuadHamiltonian};
