//! Fisher information over target positions and reflections, and the
//! position error bound.
//!
//! Location parameters are ordered `[x_1, y_1, z_1, ..., x_U, y_U, z_U,
//! Re b_1, Im b_1, ..., Re b_U, Im b_U]`.

mod derivatives;
mod fim;
mod oracle;
mod peb;

pub use derivatives::{derivative_terms, derivative_terms_with, DerivativeForm, RankOneSum};
pub use fim::{fim_linear_in_m, location_fim, FimBlocks, FimFactor};
pub use oracle::{channel_param_count, chain_rule_fim_oracle, finite_difference_fim, ORACLE_MAX_PARAMS};
pub use peb::{effective_fim, peb, PebValue, PIVOT_TOLERANCE};
