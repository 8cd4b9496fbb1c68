//! Brute-force references for the closed-form Ising results.

mod fock;
mod spin_chain;
pub mod verify;

pub use fock::{fock_mode_oracle, pair_hamiltonian, FockModeReference};
pub use spin_chain::{spin_chain_hamiltonian, SpinChainOracle};
