//! JSON description of a user-defined measurement protocol.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use tpmwork::tpm::{reset_channel, KrausSet, Step, TrajectoryProtocol};
use tpmwork::{c, CMatrix, Tolerances};

/// Matrix entry: a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix(pub Vec<Vec<Entry>>);

impl Matrix {
    pub fn to_cmatrix(&self) -> Result<CMatrix> {
        let n = self.0.len();
        if n == 0 {
            bail!("empty matrix");
        }
        if let Some((i, row)) = self.0.iter().enumerate().find(|(_, r)| r.len() != n) {
            bail!("row {i} has {} entries, expected {n}", row.len());
        }
        Ok(CMatrix::from_fn(n, n, |i, j| match self.0[i][j] {
            Entry::Real(x) => c(x, 0.0),
            Entry::Complex([re, im]) => c(re, im),
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Measurement {
    /// Eigenprojectors of a Hermitian observable.
    Projective(Matrix),
    /// `|target><r|` for every basis state `r`.
    Reset(usize),
    /// Explicit Kraus operators.
    Kraus(Vec<Matrix>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSpec {
    Unitary(Matrix),
    Evolve { generator: Matrix, duration: f64 },
    Measure { time: f64, kraus: Measurement },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSpec {
    pub beta: f64,
    pub h_initial: Matrix,
    pub h_final: Matrix,
    pub t_initial: f64,
    pub t_final: f64,
    pub steps: Vec<StepSpec>,
    pub tolerances: Tolerances,
}

impl Default for ProtocolSpec {
    /// Qubit quenched from `σ_z` to `σ_z + σ_x/2` with a `σ_x` measurement half way.
    fn default() -> Self {
        let z = Matrix(vec![vec![Entry::Real(1.0), Entry::Real(0.0)], vec![Entry::Real(0.0), Entry::Real(-1.0)]]);
        let x = Matrix(vec![vec![Entry::Real(0.0), Entry::Real(1.0)], vec![Entry::Real(1.0), Entry::Real(0.0)]]);
        let hf = Matrix(vec![vec![Entry::Real(1.0), Entry::Real(0.5)], vec![Entry::Real(0.5), Entry::Real(-1.0)]]);
        Self {
            beta: 1.0,
            h_initial: z,
            h_final: hf.clone(),
            t_initial: 0.0,
            t_final: 1.0,
            steps: vec![
                StepSpec::Evolve { generator: hf.clone(), duration: 0.5 },
                StepSpec::Measure { time: 0.5, kraus: Measurement::Projective(x) },
                StepSpec::Evolve { generator: hf, duration: 0.5 },
            ],
            tolerances: Tolerances::default(),
        }
    }
}

impl ProtocolSpec {
    pub fn build(&self) -> Result<TrajectoryProtocol> {
        let hi = self.h_initial.to_cmatrix()?;
        let dim = hi.nrows();
        let tol = &self.tolerances;
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate() {
            let step = match s {
                StepSpec::Unitary(m) => Step::Unitary(m.to_cmatrix()?),
                StepSpec::Evolve { generator, duration } => {
                    Step::Evolve { generator: generator.to_cmatrix()?, duration: *duration }
                }
                StepSpec::Measure { time, kraus } => {
                    let kraus = match kraus {
                        Measurement::Projective(m) => KrausSet::projective(&m.to_cmatrix()?, tol)?,
                        Measurement::Reset(target) => reset_channel(dim, *target)?,
                        Measurement::Kraus(ops) => KrausSet::new(
                            ops.iter().map(Matrix::to_cmatrix).collect::<Result<_>>()?,
                            tol.kraus_completeness,
                        )?,
                    };
                    Step::Measure { time: *time, kraus }
                }
            };
            log::debug!("step {i}: {s:?}");
            steps.push(step);
        }
        Ok(TrajectoryProtocol::new(
            &hi,
            &self.h_final.to_cmatrix()?,
            self.beta,
            self.t_initial,
            self.t_final,
            steps,
            *tol,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_protocol_builds() {
        let p = ProtocolSpec::default().build().unwrap();
        assert_eq!(p.dim(), 2);
        assert!(p.is_unital());
    }

    #[test]
    fn entries_accept_real_and_complex() {
        let m: Matrix = serde_json::from_str("[[1, [0, -1]], [[0, 1], 2.5]]").unwrap();
        let c = m.to_cmatrix().unwrap();
        assert_eq!(c[(0, 1)], tpmwork::c(0.0, -1.0));
        assert_eq!(c[(1, 1)], tpmwork::c(2.5, 0.0));
        let ragged: Matrix = serde_json::from_str("[[1, 2], [3]]").unwrap();
        assert!(ragged.to_cmatrix().is_err());
    }

    #[test]
    fn step_schema() {
        let s: Vec<StepSpec> = serde_json::from_str(
            r#"[{"evolve": {"generator": [[1]], "duration": 0.1}},
                {"measure": {"time": 0.2, "kraus": {"reset": 0}}},
                {"unitary": [[1]]}]"#,
        )
        .unwrap();
        assert!(matches!(s[1], StepSpec::Measure { kraus: Measurement::Reset(0), .. }));
    }
}
