use crate::error::{Error, Result};
use crate::ising::{IsingParams, Metric};
use crate::operator::{c, kron, mat_exp, CMatrix, CVector, HermitianEigen, C64};

/// Pair Hamiltonian `A (n_k - c_{-k} c_{-k}†) + b* c_k† c_{-k}† + b c_{-k} c_k` on the
/// four-dimensional Fock space of modes `k, -k`, with `A = a + i κ`.
pub fn pair_hamiltonian(params: &IsingParams, k: f64, kappa: f64) -> CMatrix {
    let annihilate = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    let parity = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    let id = CMatrix::identity(2, 2);
    let ck = kron(&annihilate, &id);
    let cmk = kron(&parity, &annihilate);
    let a = c(2.0 * (params.h - params.j * k.cos()), kappa);
    let b = c(0.0, 2.0 * params.j * k.sin());
    &ck.adjoint() * &ck * a - &cmk * cmk.adjoint() * a + ck.adjoint() * cmk.adjoint() * b.conj() + &cmk * &ck * b
}

/// Work moments and efficacy of one pair, computed by exponentiating the Fock-space
/// operators and diagonalising the even-parity block numerically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockModeReference {
    pub mean_physical: f64,
    pub variance_physical: f64,
    pub mean_biorthogonal: f64,
    pub variance_biorthogonal: f64,
    /// Ratio of squared right-eigenbasis coordinate norms after backward and forward propagation.
    pub efficacy: f64,
    /// Same ratio with ordinary norms.
    pub efficacy_physical: f64,
}

impl FockModeReference {
    pub fn mean(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Physical => self.mean_physical,
            Metric::Biorthogonal => self.mean_biorthogonal,
        }
    }

    pub fn variance(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Physical => self.variance_physical,
            Metric::Biorthogonal => self.variance_biorthogonal,
        }
    }
}

// even-parity basis states |00> and |11> in the product ordering
const EVEN: [usize; 2] = [0, 3];

fn even_block(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| m[(EVEN[i], EVEN[j])])
}

fn even_part(v: &CVector) -> CVector {
    CVector::from_vec(vec![v[EVEN[0]], v[EVEN[1]]])
}

/// Unit-norm right eigenvectors of a 2x2 matrix, as columns.
fn right_eigenvectors(m: &CMatrix) -> Result<CMatrix> {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let mut cols = Vec::new();
    for lam in [(tr - disc) * 0.5, (tr + disc) * 0.5] {
        let v1 = CVector::from_vec(vec![m[(0, 1)], lam - m[(0, 0)]]);
        let v2 = CVector::from_vec(vec![lam - m[(1, 1)], m[(1, 0)]]);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("degenerate 2x2 block".into()));
        }
        cols.push(v.unscale(n));
    }
    let r = CMatrix::from_columns(&cols);
    if r.determinant().norm() < 1e-12 {
        return Err(Error::InvalidInput("2x2 block is not diagonalisable".into()));
    }
    Ok(r)
}

pub fn fock_mode_oracle(params: &IsingParams, k: f64) -> Result<FockModeReference> {
    params.validate()?;
    let hi = pair_hamiltonian(params, k, 0.0);
    let heff = pair_hamiltonian(params, k, 0.5 * params.gamma);
    let eig = HermitianEigen::new(&hi, 1e-10)?;
    let e0 = eig.ground_energy();
    if eig.values[1] - e0 < 1e-8 {
        log::warn!("pair ground state at k = {k} is degenerate to within {:e}", eig.values[1] - e0);
    }
    let psi0: CVector = eig.vectors.column(0).into_owned();
    let odd_weight = psi0[1].norm_sqr() + psi0[2].norm_sqr();
    if odd_weight > 1e-20 {
        return Err(Error::InvalidInput(format!("pair ground state leaks into odd parity ({odd_weight:e})")));
    }

    let fwd = mat_exp(&heff, c(0.0, -params.t))? * &psi0;
    let bwd = mat_exp(&heff.adjoint(), c(0.0, params.t))? * &psi0;
    let norm = fwd.norm_squared();
    let expect = |op: &CMatrix, v: &CVector| -> C64 { v.dotc(&(op * v)) };
    let m1 = expect(&hi, &fwd).re / norm;
    let m2 = expect(&(&hi * &hi), &fwd).re / norm;

    let r = right_eigenvectors(&even_block(&heff))?;
    let rinv = r.clone().try_inverse().ok_or_else(|| Error::InvalidInput("singular eigenbasis".into()))?;
    let coords = &rinv * even_part(&fwd);
    let g = &rinv * even_block(&hi) * &r;
    let cn = coords.norm_squared();
    let mean_h = coords.dotc(&(&g * &coords)).re / cn;
    let spread = (&g * &coords - &coords * c(mean_h, 0.0)).norm_squared() / cn;
    let back_coords = &rinv * even_part(&bwd);

    Ok(FockModeReference {
        mean_physical: m1 - e0,
        variance_physical: m2 - m1 * m1,
        mean_biorthogonal: mean_h - e0,
        variance_biorthogonal: spread,
        efficacy: back_coords.norm_squared() / cn,
        efficacy_physical: bwd.norm_squared() / norm,
    })
}
