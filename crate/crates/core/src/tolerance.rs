use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by validation and post-processing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub hermitian: f64,
    pub unitary: f64,
    pub kraus_completeness: f64,
    pub normalization: f64,
    pub eigenvalue_merge: f64,
    pub record_cap: usize,
    pub probability_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            unitary: 1e-10,
            kraus_completeness: 1e-10,
            normalization: 1e-10,
            eigenvalue_merge: 1e-9,
            record_cap: 1_000_000,
            probability_floor: 1e-300,
        }
    }
}
