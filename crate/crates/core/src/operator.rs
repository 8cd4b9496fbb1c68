//! Dense complex operators on finite-dimensional Hilbert spaces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput(format!("operator is {}x{}, expected square", a.nrows(), a.ncols())));
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidInput("operator has dimension zero".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("operator has non-finite entries".into()));
    }
    Ok(a.nrows())
}

pub fn ensure_dim(a: &CMatrix, dim: usize) -> Result<()> {
    let d = ensure_square(a)?;
    if d != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: d });
    }
    Ok(())
}

/// Largest entry of `A - A†`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn ensure_hermitian(a: &CMatrix, tol: f64) -> Result<usize> {
    let d = ensure_square(a)?;
    let deviation = hermiticity_defect(a);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(d)
}

/// Largest entry of `U†U - 1`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    max_abs(&(g - CMatrix::identity(u.nrows(), u.ncols())))
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// `exp(s A)` by Padé approximation with scaling and squaring.
pub fn mat_exp(a: &CMatrix, s: C64) -> Result<CMatrix> {
    ensure_square(a)?;
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::InvalidInput("non-finite exponent scale".into()));
    }
    Ok((a * s).exp())
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix, tol: f64) -> Result<Self> {
        ensure_hermitian(h, tol)?;
        // symmetrise so the solver sees an exactly Hermitian input
        let hs = (h + h.adjoint()) * c(0.5, 0.0);
        let eig = hs.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `f(H) = V diag(f(E)) V†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let fe = f(e);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fe;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H u)` for complex `u`.
    pub fn propagator(&self, u: C64) -> CMatrix {
        self.apply_fn(|e| (-I * e * u).exp())
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }
}

/// Gibbs state `exp(-βH)/Z` together with `ln Z`.
#[derive(Clone, Debug)]
pub struct ThermalState {
    pub rho: CMatrix,
    pub log_partition: f64,
}

pub fn thermal_state(h: &CMatrix, beta: f64, tol: f64) -> Result<ThermalState> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidInput(format!("inverse temperature {beta} must be finite and >= 0")));
    }
    let eig = HermitianEigen::new(h, tol)?;
    Ok(thermal_from_eigen(&eig, beta))
}

pub(crate) fn thermal_from_eigen(eig: &HermitianEigen, beta: f64) -> ThermalState {
    let e0 = eig.ground_energy();
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z_shift: f64 = weights.iter().sum();
    let rho = eig.apply_fn(|e| c((-beta * (e - e0)).exp() / z_shift, 0.0));
    ThermalState { rho, log_partition: z_shift.ln() - beta * e0 }
}

/// `Tr[A_1 A_2 ... A_n]`.
pub fn trace_form(ops: &[&CMatrix]) -> Result<C64> {
    let Some((first, rest)) = ops.split_first() else {
        return Err(Error::InvalidInput("empty operator product".into()));
    };
    let d = ensure_square(first)?;
    let mut acc = (*first).clone();
    for op in rest {
        ensure_dim(op, d)?;
        acc *= *op;
    }
    Ok(acc.trace())
}

/// Projector `|ψ><ψ|` of the normalised vector.
pub fn pure_state(psi: &CVector) -> Result<CMatrix> {
    let n = psi.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidInput("state vector has zero or non-finite norm".into()));
    }
    let v = psi.unscale(n);
    Ok(&v * v.adjoint())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub mod pauli {
    use super::{c, CMatrix};

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }
    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }
    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn exp_matches_constructed_eigendecomposition() {
        let mut r = rng(7);
        for n in [2usize, 4, 8] {
            for _ in 0..10 {
                let v = random_matrix(&mut r, n) + CMatrix::identity(n, n) * c(2.0, 0.0);
                let lam: Vec<C64> = (0..n).map(|_| c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0))).collect();
                let vinv = v.clone().try_inverse().unwrap();
                let a = &v * CMatrix::from_diagonal(&CVector::from_vec(lam.clone())) * &vinv;
                let s = c(0.7, -0.3);
                let expect =
                    &v * CMatrix::from_diagonal(&CVector::from_iterator(n, lam.iter().map(|l| (l * s).exp()))) * &vinv;
                let got = mat_exp(&a, s).unwrap();
                let rel = max_abs(&(&got - &expect)) / max_abs(&expect);
                assert!(rel < 1e-12, "n={n} rel={rel:e}");
            }
        }
    }

    #[test]
    fn exp_of_hermitian_generator_is_unitary() {
        let mut r = rng(11);
        for n in [2usize, 8, 32] {
            let h = random_hermitian(&mut r, n) * c(10.0, 0.0);
            let u = mat_exp(&h, -I).unwrap();
            assert!(unitarity_defect(&u) < 1e-12);
        }
    }

    #[test]
    fn exp_agrees_with_spectral_route() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 6);
        let eig = HermitianEigen::new(&h, 1e-12).unwrap();
        let t = 2.3;
        let a = mat_exp(&h, c(0.0, -t)).unwrap();
        let b = eig.propagator(c(t, 0.0));
        assert!(max_abs(&(a - b)) < 1e-12);
    }

    #[test]
    fn rejects_non_square() {
        let a = CMatrix::zeros(2, 3);
        assert!(matches!(mat_exp(&a, c(1.0, 0.0)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn thermal_state_of_qubit() {
        let h = pauli::z();
        let th = thermal_state(&h, 0.5, 1e-12).unwrap();
        let z = 2.0 * (0.5f64).cosh();
        assert!((th.log_partition - z.ln()).abs() < 1e-14);
        assert!((th.rho[(0, 0)].re - (-0.5f64).exp() / z).abs() < 1e-14);
        assert!((th.rho[(1, 1)].re - (0.5f64).exp() / z).abs() < 1e-14);
    }

    #[test]
    fn thermal_state_survives_large_beta() {
        let h = pauli::z() * c(1e3, 0.0);
        let th = thermal_state(&h, 50.0, 1e-12).unwrap();
        assert!(th.rho.iter().all(|z| z.re.is_finite()));
        assert!((th.log_partition - 5e4).abs() < 1e-9);
    }

    #[test]
    fn thermal_state_rejects_non_hermitian() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(thermal_state(&h, 1.0, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn trace_form_checks_dimensions() {
        let a = CMatrix::identity(2, 2);
        let b = CMatrix::identity(3, 3);
        assert!(matches!(trace_form(&[&a, &b]), Err(Error::DimensionMismatch { .. })));
        assert_eq!(trace_form(&[&a, &a]).unwrap(), c(2.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn thermal_state_is_normalised_and_positive(seed in 0u64..10_000, n in 1usize..7, beta in 0.0f64..20.0) {
            let mut r = rng(seed);
            let h = random_hermitian(&mut r, n) * c(3.0, 0.0);
            let th = thermal_state(&h, beta, 1e-10).unwrap();
            prop_assert!((th.rho.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(hermiticity_defect(&th.rho) < 1e-12);
            let ev = HermitianEigen::new(&th.rho, 1e-10).unwrap();
            prop_assert!(ev.values[0] > -1e-12);
        }

        #[test]
        fn trace_is_cyclic(seed in 0u64..10_000, n in 1usize..6) {
            let mut r = rng(seed);
            let a = random_matrix(&mut r, n);
            let b = random_matrix(&mut r, n);
            let c3 = random_matrix(&mut r, n);
            let x = trace_form(&[&a, &b, &c3]).unwrap();
            let y = trace_form(&[&c3, &a, &b]).unwrap();
            prop_assert!((x - y).norm() < 1e-10);
        }

        #[test]
        fn exp_composes(seed in 0u64..10_000, n in 1usize..6, s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let mut r = rng(seed);
            let a = random_matrix(&mut r, n);
            let lhs = mat_exp(&a, c(s + t, 0.0)).unwrap();
            let rhs = mat_exp(&a, c(s, 0.0)).unwrap() * mat_exp(&a, c(t, 0.0)).unwrap();
            prop_assert!(max_abs(&(lhs - &rhs)) < 1e-10 * (1.0 + max_abs(&rhs)));
        }
    }
}
