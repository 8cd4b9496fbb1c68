//! Work statistics of quantum systems under two-point measurement schemes,
//! including continuously monitored dynamics and the monitored transverse-field
//! Ising chain.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod efficacy;
pub mod error;
pub mod figures;
pub mod ising;
pub mod noclick;
pub mod operator;
pub mod oracle;
pub mod tolerance;
pub mod tpm;

pub use error::{Error, Result};
pub use operator::{c, mat_exp, thermal_state, trace_form, CMatrix, CVector, HermitianEigen, ThermalState, C64};
pub use tolerance::Tolerances;

pub use efficacy::{total_efficacy, TotalEfficacy};
pub use ising::{work_densities, Grid, IsingParams, Metric, ModeCoefficients, WorkDensities};
pub use noclick::{modified_jarzynski, EfficacyReport, JumpModel};
pub use tpm::{
    generating_function, jarzynski_report, work_distribution, JarzynskiReport, KrausSet, MeasurementRecord, Step,
    TrajectoryProtocol, WorkDistribution,
};
