use crate::error::{Error, Result};
use crate::ising::IsingParams;
use crate::noclick::{noclick_generating_function, JumpModel};
use crate::operator::{c, pure_state, CMatrix, CVector, HermitianEigen, C64};
use crate::tolerance::Tolerances;

/// `-J Σ σ^z_j σ^z_{j+1} - h Σ σ^x_j` on a ring, with complex `h` allowed.
pub fn spin_chain_hamiltonian(j: f64, h: C64, sites: usize) -> Result<CMatrix> {
    if !(2..=12).contains(&sites) {
        return Err(Error::InvalidInput(format!("spin chain of {sites} sites is outside 2..=12")));
    }
    let dim = 1usize << sites;
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let spin = |i: usize| if s >> (i % sites) & 1 == 0 { 1.0 } else { -1.0 };
        let zz: f64 = (0..sites).map(|i| spin(i) * spin(i + 1)).sum();
        m[(s, s)] += c(-j * zz, 0.0);
        for i in 0..sites {
            m[(s ^ (1 << i), s)] -= h;
        }
    }
    Ok(m)
}

/// Exact no-click dynamics of a short ring monitored by `c_j = sqrt(γ) (1 + σ^x_j)/2`,
/// whose effective Hamiltonian is the chain with `h -> h + iγ/4` up to a constant.
pub struct SpinChainOracle {
    params: IsingParams,
    model: JumpModel,
    h_initial: CMatrix,
    ground: CVector,
    tol: Tolerances,
}

impl SpinChainOracle {
    pub fn new(params: &IsingParams, sites: usize) -> Result<Self> {
        params.validate()?;
        let tol = Tolerances::default();
        let h_initial = spin_chain_hamiltonian(params.j, c(params.h, 0.0), sites)?;
        let dim = h_initial.nrows();
        let mut jumps = Vec::with_capacity(sites);
        for i in 0..sites {
            let mut m = CMatrix::identity(dim, dim) * c(0.5, 0.0);
            for s in 0..dim {
                m[(s ^ (1 << i), s)] += c(0.5, 0.0);
            }
            jumps.push(m * c(params.gamma.sqrt(), 0.0));
        }
        let model = JumpModel::new(h_initial.clone(), jumps, &tol)?;
        let eig = HermitianEigen::new(&h_initial, tol.hermitian)?;
        if eig.values[1] - eig.values[0] < 1e-9 {
            return Err(Error::InvalidInput("spin chain ground state is degenerate".into()));
        }
        let ground = eig.vectors.column(0).into_owned();
        Ok(Self { params: *params, model, h_initial, ground, tol })
    }

    pub fn model(&self) -> &JumpModel {
        &self.model
    }

    pub fn ground_state(&self) -> &CVector {
        &self.ground
    }

    /// Postselected `⟨e^{-iWu}⟩` with `H_i = H_f` and the ground state as initial state.
    pub fn generating_function(&self, u: f64) -> Result<C64> {
        noclick_generating_function(
            &self.model,
            &self.h_initial,
            &self.h_initial,
            &pure_state(&self.ground)?,
            self.params.t,
            c(u, 0.0),
            &self.tol,
        )
    }

    /// `(⟨W⟩, Var W)` from central differences of `ln G(u)` with Richardson extrapolation.
    pub fn moments(&self, step: f64) -> Result<(f64, f64)> {
        let lg = |u: f64| -> Result<C64> { Ok(self.generating_function(u)?.ln()) };
        let (p1, m1, p2, m2) = (lg(step)?, lg(-step)?, lg(2.0 * step)?, lg(-2.0 * step)?);
        let l0 = lg(0.0)?;
        let d1 = |a: C64, b: C64, h: f64| (a - b) / (2.0 * h);
        let d2 = |a: C64, b: C64, h: f64| (a - 2.0 * l0 + b) / (h * h);
        let first = (4.0 * d1(p1, m1, step) - d1(p2, m2, 2.0 * step)) / 3.0;
        let second = (4.0 * d2(p1, m1, step) - d2(p2, m2, 2.0 * step)) / 3.0;
        // G(u) = ⟨e^{-iWu}⟩: ⟨W⟩ = i ∂ ln G, Var W = -∂² ln G
        Ok(((c(0.0, 1.0) * first).re, -second.re))
    }
}
