//! Simulation of entanglement transfer through finite spin-1/2 Heisenberg
//! chains.
//!
//! One half of a singlet is appended to the end of a chain prepared in its
//! ground (or thermal) state, the joint system is evolved unitarily or under
//! site-local depolarizing noise, and the two-qubit state shared between the
//! spectator spin and the far end of the chain is characterised by its
//! concurrence, purity, Werner parameter and average transfer fidelity.
//!
//! Sites are labelled in logical order `0', 0, 1, ..., N_ch`, stored at
//! indices `0, 1, 2, ..., N_ch + 1`. Bit `k` of a basis index holds the spin
//! of site `k`, and bit value 1 is the state `|1>` (sigma-z eigenvalue -1).
//!
//! Units: hbar = k_B = 1, times in 1/|J|, temperatures in |J|.

pub mod error;
pub mod evolve;
pub mod experiments;
pub mod hilbert;
mod linalg;
pub mod measures;
pub mod model;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
