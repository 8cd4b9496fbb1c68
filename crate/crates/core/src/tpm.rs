//! Two-point-measurement work statistics with intermediate generalised
//! measurements, by exhaustive enumeration of measurement records.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{
    c, ensure_dim, ensure_hermitian, ensure_square, mat_exp, max_abs, thermal_from_eigen, unitarity_defect, CMatrix,
    HermitianEigen, ThermalState, C64, I,
};
use crate::tolerance::Tolerances;

/// Kraus operators `{M_r}` with `Σ M_r† M_r = 1`.
#[derive(Clone, Debug)]
pub struct KrausSet {
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidInput("empty Kraus set".into()))?;
        let d = ensure_square(first)?;
        for m in &ops {
            ensure_dim(m, d)?;
        }
        let set = Self { ops };
        let deviation = set.completeness_defect();
        if deviation > tol {
            return Err(Error::IncompleteKraus { deviation });
        }
        Ok(set)
    }

    /// Projective measurement onto the eigenspaces of a Hermitian observable.
    pub fn projective(observable: &CMatrix, tol: &Tolerances) -> Result<Self> {
        let eig = HermitianEigen::new(observable, tol.hermitian)?;
        let mut ops = Vec::new();
        let mut start = 0;
        while start < eig.dim() {
            let mut end = start + 1;
            while end < eig.dim() && eig.values[end] - eig.values[end - 1] <= tol.eigenvalue_merge {
                end += 1;
            }
            let block = eig.vectors.columns(start, end - start);
            ops.push(block * block.adjoint());
            start = end;
        }
        Self::new(ops, tol.kraus_completeness)
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let sum = self.ops.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m.adjoint() * m);
        max_abs(&(sum - CMatrix::identity(d, d)))
    }

    /// Largest entry of `Σ M_r M_r† - 1`.
    pub fn unitality_defect(&self) -> f64 {
        let d = self.dim();
        let sum = self.ops.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * m.adjoint());
        max_abs(&(sum - CMatrix::identity(d, d)))
    }
}

/// Reset channel `M_r = |target><r|`.
pub fn reset_channel(dim: usize, target: usize) -> Result<KrausSet> {
    if dim == 0 {
        return Err(Error::InvalidInput("reset channel of dimension zero".into()));
    }
    if target >= dim {
        return Err(Error::LabelOutOfRange { label: target, size: dim });
    }
    let ops = (0..dim)
        .map(|r| {
            let mut m = CMatrix::zeros(dim, dim);
            m[(target, r)] = c(1.0, 0.0);
            m
        })
        .collect();
    KrausSet::new(ops, 0.0)
}

#[derive(Clone, Debug)]
pub enum Step {
    Unitary(CMatrix),
    Evolve { generator: CMatrix, duration: f64 },
    Measure { time: f64, kraus: KrausSet },
}

#[derive(Clone, Debug)]
enum Compiled {
    Unitary(CMatrix),
    Measure(usize),
}

/// A driven protocol between energy measurements of `H_i` at `t_i` and `H_f` at `t_f`.
#[derive(Clone, Debug)]
pub struct TrajectoryProtocol {
    beta: f64,
    h_initial: HermitianEigen,
    h_final: HermitianEigen,
    initial: ThermalState,
    measurements: Vec<KrausSet>,
    compiled: Vec<Compiled>,
    tol: Tolerances,
}

impl TrajectoryProtocol {
    pub fn new(
        h_initial: &CMatrix,
        h_final: &CMatrix,
        beta: f64,
        t_initial: f64,
        t_final: f64,
        steps: Vec<Step>,
        tol: Tolerances,
    ) -> Result<Self> {
        let d = ensure_hermitian(h_initial, tol.hermitian)?;
        ensure_dim(h_final, d)?;
        ensure_hermitian(h_final, tol.hermitian)?;
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidInput(format!("inverse temperature {beta} must be finite and >= 0")));
        }
        if !(t_initial.is_finite() && t_final.is_finite() && t_initial <= t_final) {
            return Err(Error::InvalidInput(format!("times t_i = {t_initial}, t_f = {t_final} are not ordered")));
        }
        let mut clock = t_initial;
        let mut last_measurement = f64::NEG_INFINITY;
        let mut measurements = Vec::new();
        let mut compiled = Vec::new();
        for step in steps {
            match step {
                Step::Unitary(u) => {
                    ensure_dim(&u, d)?;
                    let deviation = unitarity_defect(&u);
                    if deviation > tol.unitary {
                        return Err(Error::NotUnitary { deviation });
                    }
                    compiled.push(Compiled::Unitary(u));
                }
                Step::Evolve { generator, duration } => {
                    ensure_dim(&generator, d)?;
                    ensure_hermitian(&generator, tol.hermitian)?;
                    if !(duration.is_finite() && duration >= 0.0) {
                        return Err(Error::InvalidInput(format!("evolution duration {duration} is negative")));
                    }
                    clock += duration;
                    compiled.push(Compiled::Unitary(mat_exp(&generator, -I * duration)?));
                }
                Step::Measure { time, kraus } => {
                    if kraus.dim() != d {
                        return Err(Error::DimensionMismatch { expected: d, found: kraus.dim() });
                    }
                    if !(time > t_initial && time < t_final && time > last_measurement && time >= clock) {
                        return Err(Error::InvalidInput(format!(
                            "measurement at t = {time} breaks the ordering t_i < t_1 < ... < t_N < t_f"
                        )));
                    }
                    last_measurement = time;
                    clock = time;
                    compiled.push(Compiled::Measure(measurements.len()));
                    measurements.push(kraus);
                }
            }
        }
        if clock > t_final {
            return Err(Error::InvalidInput(format!("evolution runs to t = {clock}, past t_f = {t_final}")));
        }
        let h_initial = HermitianEigen::new(h_initial, tol.hermitian)?;
        let h_final = HermitianEigen::new(h_final, tol.hermitian)?;
        let initial = thermal_from_eigen(&h_initial, beta);
        Ok(Self { beta, h_initial, h_final, initial, measurements, compiled, tol })
    }

    pub fn dim(&self) -> usize {
        self.h_initial.dim()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn initial_state(&self) -> &ThermalState {
        &self.initial
    }

    pub fn measurements(&self) -> &[KrausSet] {
        &self.measurements
    }

    pub fn record_count(&self) -> u128 {
        self.measurements.iter().map(|k| k.len() as u128).product()
    }

    pub fn is_unital(&self) -> bool {
        self.unitality_defect() <= self.tol.kraus_completeness
    }

    pub fn unitality_defect(&self) -> f64 {
        self.measurements.iter().map(KrausSet::unitality_defect).fold(0.0, f64::max)
    }

    /// `ln(Z_f / Z_i)` at the protocol temperature.
    pub fn log_partition_ratio(&self) -> f64 {
        thermal_from_eigen(&self.h_final, self.beta).log_partition - self.initial.log_partition
    }

    fn check_record(&self, record: &MeasurementRecord) -> Result<()> {
        if record.0.len() != self.measurements.len() {
            return Err(Error::InvalidInput(format!(
                "record has {} labels, protocol has {} measurements",
                record.0.len(),
                self.measurements.len()
            )));
        }
        for (&r, k) in record.0.iter().zip(&self.measurements) {
            if r >= k.len() {
                return Err(Error::LabelOutOfRange { label: r, size: k.len() });
            }
        }
        Ok(())
    }

    fn operator_unchecked(&self, labels: &[usize]) -> CMatrix {
        let d = self.dim();
        let mut t = CMatrix::identity(d, d);
        for seg in &self.compiled {
            t = match seg {
                Compiled::Unitary(u) => u * t,
                Compiled::Measure(j) => &self.measurements[*j].ops()[labels[*j]] * t,
            };
        }
        t
    }

    fn for_each_record<A, F>(&self, zero: A, f: F) -> Result<A>
    where
        A: Clone + Send + Sync + std::ops::Add<Output = A>,
        F: Fn(&CMatrix) -> A + Sync,
    {
        let count = self.record_count();
        let cap = self.tol.record_cap;
        if count > cap as u128 {
            return Err(Error::ResourceLimit { count, cap });
        }
        let count = count as usize;
        let sizes: Vec<usize> = self.measurements.iter().map(KrausSet::len).collect();
        const CHUNK: usize = 256;
        let partials: Vec<A> = (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let mut acc = zero.clone();
                let mut labels = vec![0usize; sizes.len()];
                for index in chunk * CHUNK..((chunk + 1) * CHUNK).min(count) {
                    let mut rest = index;
                    for (slot, &n) in labels.iter_mut().zip(&sizes).rev() {
                        *slot = rest % n;
                        rest /= n;
                    }
                    acc = acc + f(&self.operator_unchecked(&labels));
                }
                acc
            })
            .collect();
        Ok(partials.into_iter().fold(zero, |a, b| a + b))
    }

    fn weighted_initial(&self, u: C64) -> CMatrix {
        // e^{i H_i u} ρ_i, with ρ_i diagonal in the same eigenbasis
        let e0 = self.h_initial.ground_energy();
        let z: f64 = self.h_initial.values.iter().map(|&e| (-self.beta * (e - e0)).exp()).sum();
        self.h_initial.apply_fn(|e| (I * e * u).exp() * (-self.beta * (e - e0)).exp() / z)
    }
}

/// Outcome labels `(r_1, ..., r_N)`, one per intermediate measurement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MeasurementRecord(pub Vec<usize>);

/// `T = U_N M_{r_N} ... M_{r_1} U_1` for one record.
pub fn record_operator(protocol: &TrajectoryProtocol, record: &MeasurementRecord) -> Result<CMatrix> {
    protocol.check_record(record)?;
    Ok(protocol.operator_unchecked(&record.0))
}

/// Discrete work distribution as sorted `(w, p)` atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkDistribution {
    pub atoms: Vec<(f64, f64)>,
}

impl WorkDistribution {
    /// Builds from unsorted atoms, merging work values closer than `merge_tol`.
    pub fn from_atoms(mut raw: Vec<(f64, f64)>, merge_tol: f64) -> Self {
        raw.retain(|&(_, p)| p != 0.0);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut anchor = f64::NEG_INFINITY;
        let mut weighted = 0.0;
        for (w, p) in raw {
            match atoms.last_mut() {
                Some(last) if w - anchor <= merge_tol => {
                    weighted += w * p;
                    last.1 += p;
                    last.0 = weighted / last.1;
                }
                _ => {
                    anchor = w;
                    weighted = w * p;
                    atoms.push((w, p));
                }
            }
        }
        Self { atoms }
    }

    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn moment(&self, n: i32) -> f64 {
        self.atoms.iter().map(|&(w, p)| p * w.powi(n)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|&(w, p)| p * (w - m).powi(2)).sum()
    }

    /// `Σ p e^{-i w u}`.
    pub fn characteristic(&self, u: C64) -> C64 {
        self.atoms.iter().map(|&(w, p)| (-I * w * u).exp() * p).sum()
    }

    /// `⟨e^{-βW}⟩`.
    pub fn exponential_average(&self, beta: f64) -> f64 {
        self.atoms.iter().map(|&(w, p)| p * (-beta * w).exp()).sum()
    }
}

#[derive(Clone)]
struct Transition(CMatrix);

impl std::ops::Add for Transition {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Transition(self.0 + rhs.0)
    }
}

pub(crate) fn transition_atoms(
    h_initial: &HermitianEigen,
    h_final: &HermitianEigen,
    beta: f64,
    flux: &CMatrix,
    norm: f64,
) -> Vec<(f64, f64)> {
    let e0 = h_initial.ground_energy();
    let z: f64 = h_initial.values.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    let mut raw = Vec::with_capacity(flux.len());
    for (a, &ei) in h_initial.values.iter().enumerate() {
        let pa = (-beta * (ei - e0)).exp() / z;
        for (b, &ef) in h_final.values.iter().enumerate() {
            raw.push((ef - ei, pa * flux[(b, a)].re / norm));
        }
    }
    raw
}

/// Joint distribution of `W = E_m^f - E_n^i` summed over all records.
pub fn work_distribution(protocol: &TrajectoryProtocol) -> Result<WorkDistribution> {
    let vi = &protocol.h_initial.vectors;
    let vf_adj = protocol.h_final.vectors.adjoint();
    let d = protocol.dim();
    let flux = protocol
        .for_each_record(Transition(CMatrix::zeros(d, d)), |t| {
            Transition((&vf_adj * t * vi).map(|z| c(z.norm_sqr(), 0.0)))
        })?
        .0;
    let raw = transition_atoms(&protocol.h_initial, &protocol.h_final, protocol.beta, &flux, 1.0);
    Ok(WorkDistribution::from_atoms(raw, protocol.tol.eigenvalue_merge))
}

#[derive(Clone, Copy)]
struct Sum(C64);

impl std::ops::Add for Sum {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Sum(self.0 + rhs.0)
    }
}

/// `G(u) = Σ_r Tr[T_r† e^{-i H_f u} T_r e^{i H_i u} ρ_i]`.
pub fn generating_function(protocol: &TrajectoryProtocol, u: C64) -> Result<C64> {
    let right = protocol.weighted_initial(u);
    let left = protocol.h_final.propagator(u);
    let total = protocol.for_each_record(Sum(c(0.0, 0.0)), |t| Sum((t.adjoint() * &left * t * &right).trace()))?;
    Ok(total.0)
}

/// Generating function conditioned on a single record, normalised by its probability.
pub fn postselected_generating_function(
    protocol: &TrajectoryProtocol,
    record: &MeasurementRecord,
    u: C64,
) -> Result<C64> {
    let t = record_operator(protocol, record)?;
    let probability = (t.adjoint() * &t * &protocol.initial.rho).trace().re;
    if !(probability > protocol.tol.probability_floor) {
        return Err(Error::DegenerateRecord { probability });
    }
    let left = protocol.h_final.propagator(u);
    let right = protocol.weighted_initial(u);
    Ok((t.adjoint() * left * &t * right).trace() / probability)
}

/// Work distribution conditioned on a single record.
pub fn postselected_work_distribution(
    protocol: &TrajectoryProtocol,
    record: &MeasurementRecord,
) -> Result<WorkDistribution> {
    let t = record_operator(protocol, record)?;
    let probability = (t.adjoint() * &t * &protocol.initial.rho).trace().re;
    if !(probability > protocol.tol.probability_floor) {
        return Err(Error::DegenerateRecord { probability });
    }
    let flux = (protocol.h_final.vectors.adjoint() * &t * &protocol.h_initial.vectors).map(|z| c(z.norm_sqr(), 0.0));
    let raw = transition_atoms(&protocol.h_initial, &protocol.h_final, protocol.beta, &flux, probability);
    Ok(WorkDistribution::from_atoms(raw, protocol.tol.eigenvalue_merge))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct JarzynskiReport {
    /// `⟨e^{-βW}⟩` from the work distribution.
    pub lhs: f64,
    /// `Z_f / Z_i`.
    pub rhs: f64,
    pub unital: bool,
    pub unitality_defect: f64,
}

impl JarzynskiReport {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs()
    }
}

pub fn jarzynski_report(protocol: &TrajectoryProtocol) -> Result<JarzynskiReport> {
    let dist = work_distribution(protocol)?;
    Ok(JarzynskiReport {
        lhs: dist.exponential_average(protocol.beta),
        rhs: protocol.log_partition_ratio().exp(),
        unital: protocol.is_unital(),
        unitality_defect: protocol.unitality_defect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;
    use crate::operator::testing::*;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn qubit_protocol(steps: Vec<Step>) -> TrajectoryProtocol {
        let hi = pauli::z();
        let hf = pauli::z() * c(2.0, 0.0) + pauli::x() * c(0.5, 0.0);
        TrajectoryProtocol::new(&hi, &hf, 0.7, 0.0, 3.0, steps, tol()).unwrap()
    }

    fn random_protocol(seed: u64, d: usize, unital: bool, n_meas: usize) -> TrajectoryProtocol {
        let mut r = rng(seed);
        let hi = random_hermitian(&mut r, d);
        let hf = random_hermitian(&mut r, d) * c(1.5, 0.0);
        let mut steps = vec![Step::Evolve { generator: random_hermitian(&mut r, d), duration: 0.4 }];
        for j in 0..n_meas {
            let kraus = if unital {
                KrausSet::projective(&random_hermitian(&mut r, d), &tol()).unwrap()
            } else {
                reset_channel(d, 0).unwrap()
            };
            steps.push(Step::Measure { time: 1.0 + j as f64, kraus });
            steps.push(Step::Unitary(mat_exp(&random_hermitian(&mut r, d), -I).unwrap()));
        }
        TrajectoryProtocol::new(&hi, &hf, 0.9, 0.0, 10.0, steps, tol()).unwrap()
    }

    #[test]
    fn no_measurement_protocol_matches_direct_formula() {
        let mut r = rng(5);
        let g = random_hermitian(&mut r, 2);
        let p = qubit_protocol(vec![Step::Evolve { generator: g.clone(), duration: 1.3 }]);
        let u = mat_exp(&g, -I * 1.3).unwrap();
        let hi = HermitianEigen::new(&pauli::z(), 1e-12).unwrap();
        let hf = HermitianEigen::new(&(pauli::z() * c(2.0, 0.0) + pauli::x() * c(0.5, 0.0)), 1e-12).unwrap();
        let rho = thermal_from_eigen(&hi, 0.7).rho;
        let s = c(0.37, 0.0);
        let direct = (u.adjoint() * hf.propagator(s) * &u * hi.propagator(-s) * rho).trace();
        assert!((generating_function(&p, s).unwrap() - direct).norm() < 1e-13);
    }

    #[test]
    fn unitary_protocol_satisfies_jarzynski() {
        let p = random_protocol(1, 4, true, 0);
        let rep = jarzynski_report(&p).unwrap();
        assert!(rep.unital);
        assert!(rep.relative_gap() < 1e-12);
    }

    #[test]
    fn reset_protocol_breaks_jarzynski() {
        let p = random_protocol(2, 3, false, 1);
        let rep = jarzynski_report(&p).unwrap();
        assert!(!rep.unital);
        assert!(rep.relative_gap() > 1e-3, "gap {}", rep.relative_gap());
    }

    #[test]
    fn reset_channel_is_complete_but_not_unital() {
        let k = reset_channel(3, 0).unwrap();
        assert_eq!(k.len(), 3);
        assert!(k.completeness_defect() == 0.0);
        assert!((k.unitality_defect() - 2.0).abs() < 1e-15);
        assert!(matches!(reset_channel(3, 3), Err(Error::LabelOutOfRange { .. })));
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let m = CMatrix::identity(2, 2) * c(0.9, 0.0);
        assert!(matches!(KrausSet::new(vec![m], 1e-10), Err(Error::IncompleteKraus { .. })));
    }

    #[test]
    fn measurement_times_must_increase() {
        let k = KrausSet::projective(&pauli::x(), &tol()).unwrap();
        let steps = vec![Step::Measure { time: 2.0, kraus: k.clone() }, Step::Measure { time: 1.0, kraus: k }];
        let res = TrajectoryProtocol::new(&pauli::z(), &pauli::z(), 1.0, 0.0, 3.0, steps, tol());
        assert!(matches!(res, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn record_cap_is_enforced() {
        let k = KrausSet::projective(&pauli::x(), &tol()).unwrap();
        let steps = (0..8).map(|j| Step::Measure { time: 1.0 + j as f64 * 0.1, kraus: k.clone() }).collect();
        let t = Tolerances { record_cap: 100, ..tol() };
        let p = TrajectoryProtocol::new(&pauli::z(), &pauli::z(), 1.0, 0.0, 3.0, steps, t).unwrap();
        assert_eq!(p.record_count(), 256);
        assert!(matches!(work_distribution(&p), Err(Error::ResourceLimit { count: 256, cap: 100 })));
    }

    #[test]
    fn record_labels_are_checked() {
        let k = KrausSet::projective(&pauli::x(), &tol()).unwrap();
        let p = qubit_protocol(vec![Step::Measure { time: 1.0, kraus: k }]);
        assert!(matches!(
            record_operator(&p, &MeasurementRecord(vec![2])),
            Err(Error::LabelOutOfRange { label: 2, size: 2 })
        ));
        assert!(record_operator(&p, &MeasurementRecord(vec![])).is_err());
    }

    #[test]
    fn degenerate_record_is_reported() {
        let mut proj = CMatrix::zeros(2, 2);
        proj[(0, 0)] = c(1.0, 0.0);
        let mut other = CMatrix::zeros(2, 2);
        other[(1, 1)] = c(1.0, 0.0);
        let k = KrausSet::new(vec![proj, other], 1e-12).unwrap();
        // beta large enough that the excited state of σz is never occupied
        let p = TrajectoryProtocol::new(
            &pauli::z(),
            &pauli::z(),
            1e4,
            0.0,
            2.0,
            vec![Step::Measure { time: 1.0, kraus: k }],
            tol(),
        )
        .unwrap();
        assert!(matches!(
            postselected_generating_function(&p, &MeasurementRecord(vec![0]), c(0.1, 0.0)),
            Err(Error::DegenerateRecord { .. })
        ));
    }

    #[test]
    fn degenerate_levels_merge() {
        let d = WorkDistribution::from_atoms(vec![(1.0, 0.25), (1.0 + 1e-12, 0.25), (0.0, 0.5)], 1e-9);
        assert_eq!(d.atoms.len(), 2);
        assert!((d.atoms[1].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projective_kraus_merges_degenerate_eigenvalues() {
        let h = CMatrix::from_diagonal(&crate::CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]));
        let k = KrausSet::projective(&h, &tol()).unwrap();
        assert_eq!(k.len(), 2);
        assert!(k.unitality_defect() < 1e-12);
    }

    #[test]
    fn channel_moments_match_enumeration() {
        // density-matrix propagation of the TPM-dephased state through the channel
        let mut r = rng(42);
        let d = 4;
        let hi = random_hermitian(&mut r, d);
        let hf = random_hermitian(&mut r, d);
        let a = random_matrix(&mut r, d);
        let jump = a.clone() * c(0.3, 0.0);
        let g = jump.adjoint() * &jump;
        let eig = HermitianEigen::new(&(CMatrix::identity(d, d) - &g), 1e-10).unwrap();
        let m0 = eig.apply_fn(|x| c(x.max(0.0).sqrt(), 0.0));
        let kraus = KrausSet::new(vec![m0, jump], 1e-10).unwrap();
        let u1 = mat_exp(&random_hermitian(&mut r, d), -I).unwrap();
        let u2 = mat_exp(&random_hermitian(&mut r, d), -I).unwrap();
        let beta = 0.8;
        let p = TrajectoryProtocol::new(
            &hi,
            &hf,
            beta,
            0.0,
            2.0,
            vec![
                Step::Unitary(u1.clone()),
                Step::Measure { time: 1.0, kraus: kraus.clone() },
                Step::Unitary(u2.clone()),
            ],
            tol(),
        )
        .unwrap();
        let dist = work_distribution(&p).unwrap();

        let ei = HermitianEigen::new(&hi, 1e-10).unwrap();
        let ef = HermitianEigen::new(&hf, 1e-10).unwrap();
        let rho = thermal_from_eigen(&ei, beta).rho;
        let mut evolved = &u1 * &rho * u1.adjoint();
        evolved = kraus.ops().iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * &evolved * m.adjoint());
        evolved = &u2 * evolved * u2.adjoint();
        let ef1 = ef.apply_fn(|e| c(e, 0.0));
        let ef2 = ef.apply_fn(|e| c(e * e, 0.0));
        let ei1 = ei.apply_fn(|e| c(e, 0.0));
        let ei2 = ei.apply_fn(|e| c(e * e, 0.0));
        // the initial state commutes with H_i, so first moments separate
        let mean = (&ef1 * &evolved).trace().re - (&ei1 * &rho).trace().re;
        assert!((dist.mean() - mean).abs() < 1e-12);

        // second moment needs the cross term Σ_n p_n E_n <E_f>_n
        let mut cross = 0.0;
        for (n, &en) in ei.values.iter().enumerate() {
            let v = ei.vectors.column(n);
            let pn = (v.adjoint() * &rho * v)[(0, 0)].re;
            let proj = v * v.adjoint();
            let mut s = &u1 * proj * u1.adjoint();
            s = kraus.ops().iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * &s * m.adjoint());
            s = &u2 * s * u2.adjoint();
            cross += pn * en * (&ef1 * s).trace().re;
        }
        let second = (&ef2 * &evolved).trace().re - 2.0 * cross + (&ei2 * &rho).trace().re;
        assert!((dist.moment(2) - second).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn distribution_is_normalised(seed in 0u64..5000, d in 2usize..5, unital: bool, n in 0usize..3) {
            let p = random_protocol(seed, d, unital, n);
            let dist = work_distribution(&p).unwrap();
            prop_assert!((dist.total_probability() - 1.0).abs() < 1e-12);
            prop_assert!(dist.atoms.iter().all(|a| a.1 >= -1e-15));
        }

        #[test]
        fn generating_function_is_fourier_of_distribution(seed in 0u64..5000, d in 2usize..5, unital: bool, u in -3.0f64..3.0) {
            let p = random_protocol(seed, d, unital, 2);
            let dist = work_distribution(&p).unwrap();
            let g = generating_function(&p, c(u, 0.0)).unwrap();
            prop_assert!((g - dist.characteristic(c(u, 0.0))).norm() < 1e-12);
            prop_assert!((generating_function(&p, c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        }

        #[test]
        fn unital_protocols_satisfy_jarzynski(seed in 0u64..5000, d in 2usize..5, n in 0usize..3) {
            let p = random_protocol(seed, d, true, n);
            let rep = jarzynski_report(&p).unwrap();
            prop_assert!(rep.unital);
            prop_assert!(rep.relative_gap() < 1e-10);
            let g = generating_function(&p, c(0.0, -p.beta())).unwrap();
            prop_assert!((g.re - rep.rhs).abs() < 1e-10 * rep.rhs);
        }
    }
}
