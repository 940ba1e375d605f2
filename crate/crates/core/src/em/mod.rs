//! Coupled-dipole model of the waveguide-fed panel.

pub mod coupling;
pub mod dipole;
pub mod dump;
pub mod excitation;
pub mod geometry;
pub mod green;
pub mod operating;
pub mod passivity;
pub mod polarizability;

pub use coupling::{build_coupling_matrix, build_coupling_matrix_serial, CouplingMatrix};
pub use dipole::{
    contraction, neumann_error_bound, residual_norm, solve_dipoles_exact, solve_dipoles_neumann, DipoleSolution, SolveKind,
    DEFAULT_CONDITION_CAP,
};
pub use excitation::{excitation_envelope, excitation_vector, ExcitationVector};
pub use geometry::PanelGeometry;
pub use green::{green_fs, green_total, green_wg};
pub use operating::OperatingPoint;
pub use passivity::{audit_array, max_strength, passivity_limit, power_audit, PowerAudit};
pub use polarizability::{polarizability_lorentzian, LorentzianParams, PolarizabilityVector};
