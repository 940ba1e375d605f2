//! Bistatic sensing model: targets, receive array, focusing vectors,
//! round-trip channel and pilot simulation.

mod focusing;
mod response;
mod rx;
mod scenario;
mod target;

pub use focusing::{
    rx_focusing_jacobian, rx_focusing_vector, tx_focusing_jacobian, tx_focusing_vector, FocusGeometry, FocusingVector,
};
pub use response::{mean_response, round_trip_channel, simulate_received};
pub use rx::{check_unitary, dft_codebook, random_dft_combiner, RxArray, UNITARY_TOLERANCE};
pub use scenario::Scenario;
pub use target::Target;
