//! Average fidelity of n-qubit quantum channels.
//!
//! The average over Haar-random pure inputs of `tr(Uρ₀U† · M(ρ₀))` is
//! evaluated in closed form on the Pauli polarization basis
//! ([`fidelity::average_fidelity`]), cross-checked by a seeded Monte-Carlo
//! estimator ([`fidelity::mc_average_fidelity`]), and turned into a finite
//! pure-state measurement scheme ([`decomposition::build_protocol`]).

pub mod channels;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod fidelity;
pub mod io;
pub mod matrix;
pub mod pauli;
pub mod rng;
pub mod states;

pub use channels::{Channel, ChannelKind};
pub use decomposition::{ProtocolSpec, PureStateCombination};
pub use error::{Error, Result};
pub use fidelity::{FidelityReport, Method};
pub use matrix::{hs_inner, kron, ComplexMatrix};
pub use pauli::{basis_element, pauli_product, PauliString};
pub use states::{DensityMatrix, PolarizationVector};
