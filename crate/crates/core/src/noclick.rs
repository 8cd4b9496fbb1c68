//! Continuously monitored dynamics postselected on the no-click trajectory.
//!
//! A model is a Hamiltonian `H` with jump operators `c_j`. Over a step `dt` the
//! monitored evolution is the Kraus pair `M_0 = 1 - (R/2 + iH) dt`,
//! `M_j = sqrt(dt) c_j` with `R = Σ c_j† c_j`, and the no-click record evolves
//! with `H_eff = H - iR/2`.

use crate::error::{Error, Result};
use crate::operator::{
    c, ensure_dim, ensure_hermitian, hermiticity_defect, mat_exp, max_abs, thermal_from_eigen, CMatrix, CVector,
    HermitianEigen, C64, I,
};
use crate::tolerance::Tolerances;
use crate::tpm::{transition_atoms, KrausSet, WorkDistribution};

#[derive(Clone, Debug)]
pub struct JumpModel {
    h: CMatrix,
    jumps: Vec<CMatrix>,
    rate: CMatrix,
}

impl JumpModel {
    pub fn new(h: CMatrix, jumps: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let d = ensure_hermitian(&h, tol.hermitian)?;
        let mut rate = CMatrix::zeros(d, d);
        for j in &jumps {
            ensure_dim(j, d)?;
            rate += j.adjoint() * j;
        }
        Ok(Self { h, jumps, rate })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    /// `R = Σ c† c`.
    pub fn rate_operator(&self) -> &CMatrix {
        &self.rate
    }

    /// `H_eff = H - iR/2`.
    pub fn effective_hamiltonian(&self) -> CMatrix {
        &self.h - &self.rate * c(0.0, 0.5)
    }

    /// First-order Kraus set for one step; completeness holds to `O(dt^2)`.
    pub fn kraus_step(&self, dt: f64) -> Result<KrausSet> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step {dt} must be positive")));
        }
        let d = self.dim();
        let a = &self.rate * c(0.5, 0.0) + &self.h * I;
        let m0 = CMatrix::identity(d, d) - &a * c(dt, 0.0);
        let mut ops = vec![m0];
        ops.extend(self.jumps.iter().map(|j| j * c(dt.sqrt(), 0.0)));
        // exact defect is (R/2 - iH)(R/2 + iH) dt^2
        let bound = d as f64 * max_abs(&a).powi(2) * dt * dt * (1.0 + 1e-9) + 1e-14;
        KrausSet::new(ops, bound)
    }

    /// `exp(-i H_eff t)`.
    pub fn noclick_propagator(&self, t: f64) -> Result<CMatrix> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidInput(format!("duration {t} must be non-negative")));
        }
        mat_exp(&self.effective_hamiltonian(), c(0.0, -t))
    }
}

fn check_state(rho: &CMatrix, d: usize, tol: &Tolerances) -> Result<()> {
    ensure_dim(rho, d)?;
    let deviation = hermiticity_defect(rho);
    if deviation > tol.hermitian {
        return Err(Error::NotHermitian { deviation });
    }
    let tr = rho.trace();
    if (tr - c(1.0, 0.0)).norm() > tol.normalization {
        return Err(Error::InvalidInput(format!("state has trace {tr}, expected 1")));
    }
    Ok(())
}

struct Setup {
    hi: HermitianEigen,
    hf: HermitianEigen,
    prop: CMatrix,
}

fn setup(model: &JumpModel, h_i: &CMatrix, h_f: &CMatrix, t: f64, tol: &Tolerances) -> Result<Setup> {
    let d = model.dim();
    ensure_dim(h_i, d)?;
    ensure_dim(h_f, d)?;
    Ok(Setup {
        hi: HermitianEigen::new(h_i, tol.hermitian)?,
        hf: HermitianEigen::new(h_f, tol.hermitian)?,
        prop: model.noclick_propagator(t)?,
    })
}

fn noclick_probability(prop: &CMatrix, rho: &CMatrix, tol: &Tolerances) -> Result<f64> {
    let probability = (prop.adjoint() * prop * rho).trace().re;
    if !(probability >= tol.probability_floor) {
        return Err(Error::DegenerateTrajectory { probability });
    }
    Ok(probability)
}

/// `Tr[e^{iH†t} e^{-iH_f u} e^{-iHt} e^{iH_i u} ρ_i] / Tr[e^{iH†t} e^{-iHt} ρ_i]`.
pub fn noclick_generating_function(
    model: &JumpModel,
    h_i: &CMatrix,
    h_f: &CMatrix,
    rho_i: &CMatrix,
    t: f64,
    u: C64,
    tol: &Tolerances,
) -> Result<C64> {
    let s = setup(model, h_i, h_f, t, tol)?;
    check_state(rho_i, model.dim(), tol)?;
    let p = noclick_probability(&s.prop, rho_i, tol)?;
    let num = (s.prop.adjoint() * s.hf.propagator(u) * &s.prop * s.hi.propagator(-u) * rho_i).trace();
    Ok(num / p)
}

/// Postselected work distribution for a thermal initial state of `H_i`.
pub fn noclick_work_distribution(
    model: &JumpModel,
    h_i: &CMatrix,
    h_f: &CMatrix,
    beta: f64,
    t: f64,
    tol: &Tolerances,
) -> Result<WorkDistribution> {
    let s = setup(model, h_i, h_f, t, tol)?;
    let rho = thermal_from_eigen(&s.hi, beta).rho;
    let p = noclick_probability(&s.prop, &rho, tol)?;
    let flux = (s.hf.vectors.adjoint() * &s.prop * &s.hi.vectors).map(|z| c(z.norm_sqr(), 0.0));
    let raw = transition_atoms(&s.hi, &s.hf, beta, &flux, p);
    Ok(WorkDistribution::from_atoms(raw, tol.eigenvalue_merge))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EfficacyReport {
    /// `⟨e^{-β(W - ΔF)}⟩` over the no-click work distribution.
    pub lhs: f64,
    /// `Tr[e^{-iHt} e^{iH†t} ρ_f] / Tr[e^{iH†t} e^{-iHt} ρ_i]`, `ρ_f` thermal in `H_f` at the same β.
    pub efficacy: f64,
    pub noclick_probability: f64,
    pub log_partition_ratio: f64,
}

pub fn modified_jarzynski(
    model: &JumpModel,
    h_i: &CMatrix,
    h_f: &CMatrix,
    beta: f64,
    t: f64,
    tol: &Tolerances,
) -> Result<EfficacyReport> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidInput(format!("inverse temperature {beta} must be finite and >= 0")));
    }
    let dist = noclick_work_distribution(model, h_i, h_f, beta, t, tol)?;
    let s = setup(model, h_i, h_f, t, tol)?;
    let ti = thermal_from_eigen(&s.hi, beta);
    let tf = thermal_from_eigen(&s.hf, beta);
    let p = noclick_probability(&s.prop, &ti.rho, tol)?;
    let forward = (&s.prop * s.prop.adjoint() * &tf.rho).trace().re;
    let log_ratio = tf.log_partition - ti.log_partition;
    Ok(EfficacyReport {
        lhs: dist.exponential_average(beta) * (-log_ratio).exp(),
        efficacy: forward / p,
        noclick_probability: p,
        log_partition_ratio: log_ratio,
    })
}

/// Generating function read out from an ancilla coherence, `⟨σ_x⟩ + i⟨σ_y⟩`.
///
/// `psi0` must be an eigenstate of `H_i`; its controlled evolution reduces to a phase.
pub fn ramsey_generating_function(
    model: &JumpModel,
    h_i: &CMatrix,
    h_f: &CMatrix,
    psi0: &CVector,
    t: f64,
    u: f64,
    tol: &Tolerances,
) -> Result<C64> {
    let d = model.dim();
    if psi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi0.len() });
    }
    let s = setup(model, h_i, h_f, t, tol)?;
    let norm = psi0.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidInput("initial state has zero norm".into()));
    }
    let psi = psi0.unscale(norm);
    let e0 = (psi.adjoint() * h_i * &psi)[(0, 0)].re;
    let residual = (h_i * &psi - &psi * c(e0, 0.0)).norm();
    if residual > tol.normalization.max(1e-8) {
        return Err(Error::NotEigenstate { residual });
    }

    // joint index: ancilla * d + system
    let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut joint = CVector::zeros(2 * d);
    for i in 0..d {
        joint[i] = psi[i] * amp;
        joint[d + i] = psi[i] * amp * (I * e0 * u).exp();
    }
    let evolve = |v: &mut CVector, m: &CMatrix, branches: &[usize]| {
        for &b in branches {
            let part = m * v.rows(b * d, d);
            v.rows_mut(b * d, d).copy_from(&part);
        }
    };
    evolve(&mut joint, &s.prop, &[0, 1]);
    evolve(&mut joint, &s.hf.propagator(c(u, 0.0)), &[1]);

    let p = joint.norm_squared();
    if !(p >= tol.probability_floor) {
        return Err(Error::DegenerateTrajectory { probability: p });
    }
    let b0 = joint.rows(0, d);
    let b1 = joint.rows(d, d);
    let rho10 = b0.dotc(&b1) / p;
    let sx = 2.0 * rho10.re;
    let sy = 2.0 * rho10.im;
    Ok(c(sx, sy))
}
