//! Fixtures shared by the benchmarks.

use tpmwork::oracle::spin_chain_hamiltonian;
use tpmwork::tpm::{KrausSet, Step, TrajectoryProtocol};
use tpmwork::{c, CMatrix, Tolerances};

/// Ising ring quenched from `h = 0.5` to `h = 1.5`, with a `σ^z` measurement of
/// site `m mod sites` after each of `measurements` unit-time evolutions.
pub fn quench_protocol(sites: usize, measurements: usize) -> TrajectoryProtocol {
    let hi = spin_chain_hamiltonian(1.0, c(0.5, 0.0), sites).expect("valid ring");
    let hf = spin_chain_hamiltonian(1.0, c(1.5, 0.0), sites).expect("valid ring");
    let dim = hi.nrows();
    let tol = Tolerances::default();
    let mut steps = Vec::new();
    for m in 0..measurements {
        steps.push(Step::Evolve { generator: hf.clone(), duration: 1.0 });
        let site = m % sites;
        let sz = CMatrix::from_fn(dim, dim, |r, s| {
            if r == s {
                c(if r >> site & 1 == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        steps.push(Step::Measure { time: m as f64 + 1.0, kraus: KrausSet::projective(&sz, &tol).expect("Hermitian") });
    }
    steps.push(Step::Evolve { generator: hf.clone(), duration: 1.0 });
    TrajectoryProtocol::new(&hi, &hf, 1.0, 0.0, measurements as f64 + 1.0, steps, tol).expect("valid protocol")
}
