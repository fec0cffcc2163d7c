//! Classical solutions, fixed-step integration, conservation monitoring and
//! interaction terms.

pub mod discovery;
pub mod integrate;
pub mod interaction;
pub mod potential;
pub mod solution;

pub use discovery::{structure_discovery, DiscoveredStructure, Discovery};
pub use integrate::{conservation_report, integrate, Field, Trajectory};
pub use interaction::{
    interaction_compatibility, interaction_transform_constraint, two_route_error, CompatibilityReport,
    InteractionTransform,
};
pub use potential::{Potential, PotentialArg, PotentialShape};
pub use solution::{eval_solution, Amplitudes, ClassicalSolution, Regime};
