//! Exact-numerics laboratory for the minimal two-qubit quantum energy
//! teleportation (QET) protocol.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: fixed-size complex matrices and kets (dimension 2 and 4),
//!   a complex Jacobi eigensolver, propagators and SU(2) rotations.
//! - [`model`]: the minimal model's Hamiltonians, its entangled ground state
//!   and the closed-form protocol energies.
//! - [`protocol`]: Alice's projective measurement, diffusion under the full
//!   Hamiltonian, Bob's outcome-conditioned unitary and the search for the
//!   operation that extracts the most energy.
//! - [`locc`]: the protocol run as two party state machines joined by a
//!   classical channel, in process or over a byte stream.
//! - [`audit`]: energy-time uncertainty audits of the minimal model and of
//!   the trapped-ion output formula.
//! - [`cli`]: the `qet` command-line front end.
//!
//! All quantities use natural units with ħ = 1, so an energy-time product is
//! a pure number and the observability threshold is exactly 1.

pub mod audit;
pub mod cli;
pub mod error;
pub mod export;
pub mod linalg;
pub mod locc;
pub mod model;
pub mod optimize;
pub mod protocol;
pub mod tolerances;

pub use error::{QetError, Result};
pub use model::ModelParams;
