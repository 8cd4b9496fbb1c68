use crate::error::Result;
use crate::operator::{c, C64, I};

use super::{Grid, IsingParams, Metric, ModeCoefficients};

/// Work statistics of one `(k, -k)` pair, measured from the initial ground energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMoments {
    pub mean: f64,
    pub variance: f64,
}

pub fn mode_moments(params: &IsingParams, k: f64, metric: Metric) -> Result<ModeMoments> {
    let m = ModeCoefficients::new(params, k)?;
    Ok(moments_of(&m, params.t, metric))
}

pub(crate) fn moments_of(m: &ModeCoefficients, t: f64, metric: Metric) -> ModeMoments {
    match metric {
        Metric::Physical => {
            // the pair is either left in the ground state or lifted by 2 ε_i
            let p = m.excitation_probability(t);
            let gap = 2.0 * m.eps_i;
            ModeMoments { mean: gap * p, variance: gap * gap * p * (1.0 - p) }
        }
        Metric::Biorthogonal => {
            // final Hamiltonian in the right eigenbasis: [[E, iδ], [-iδ, 2β + E]],
            // acting on the coordinates (1, iα_t)
            let at = m.alpha_t(t);
            let w = at.norm_sqr();
            let (e, d, b) = (m.e0_gamma, m.delta, m.beta);
            let mean_h = (e.re * (1.0 + w) + 2.0 * b.re * w - 2.0 * d.re * at.re) / (1.0 + w);
            // spread of the coordinates around the mean: |(G - mean) c|^2 / |c|^2
            let g0 = e - d * at - mean_h;
            let g1 = (2.0 * b + e - mean_h) * at - d;
            let variance = (g0.norm_sqr() + g1.norm_sqr()) / (1.0 + w);
            ModeMoments { mean: mean_h + m.eps_i, variance }
        }
    }
}

/// `⟨e^{-iWu}⟩` for one pair under the physical metric.
pub fn mode_generating_function(params: &IsingParams, k: f64, u: f64) -> Result<C64> {
    let m = ModeCoefficients::new(params, k)?;
    let p = m.excitation_probability(params.t);
    Ok(c(1.0 - p, 0.0) + p * (-2.0 * I * m.eps_i * u).exp())
}

/// Product of pair generating functions over the even-parity momenta of a ring of `sites` spins.
pub fn chain_generating_function(params: &IsingParams, sites: usize, u: f64) -> Result<C64> {
    params.validate()?;
    Grid::Finite { sites }
        .modes()?
        .iter()
        .try_fold(c(1.0, 0.0), |acc, &(k, _)| Ok(acc * mode_generating_function(params, k, u)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkDensities {
    pub mean: f64,
    pub variance: f64,
}

pub fn work_densities(params: &IsingParams, grid: &Grid, metric: Metric) -> Result<WorkDensities> {
    params.validate()?;
    let [mean, variance] = grid.density(&params.breakpoints(), |k| {
        let m = moments_of(&ModeCoefficients::new(params, k)?, params.t, metric);
        Ok([m.mean, m.variance])
    })?;
    Ok(WorkDensities { mean, variance })
}

/// `⟨w⟩ = ⟨W⟩ / L`.
pub fn average_work_density(params: &IsingParams, grid: &Grid, metric: Metric) -> Result<f64> {
    Ok(work_densities(params, grid, metric)?.mean)
}

/// `⟨Δw^2⟩ = Var(W) / L`.
pub fn work_variance_density(params: &IsingParams, grid: &Grid, metric: Metric) -> Result<f64> {
    Ok(work_densities(params, grid, metric)?.variance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(h: f64, gamma: f64, t: f64) -> IsingParams {
        IsingParams::new(1.0, h, gamma, t).unwrap()
    }

    // expectation c† A c / c† B c for 2x2 matrices
    fn quad(a: [[C64; 2]; 2], v: [C64; 2]) -> C64 {
        let av = [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]];
        v[0].conj() * av[0] + v[1].conj() * av[1]
    }

    fn mul(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
        let mut r = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        r
    }

    #[test]
    fn hermitian_limit_gives_zero_work() {
        for metric in [Metric::Physical, Metric::Biorthogonal] {
            let d = work_densities(&params(0.8, 0.0, 3.0), &Grid::continuum(128), metric).unwrap();
            assert!(d.mean.abs() < 1e-14 && d.variance.abs() < 1e-14);
        }
    }

    #[test]
    fn zero_time_gives_zero_work() {
        for metric in [Metric::Physical, Metric::Biorthogonal] {
            let d = work_densities(&params(0.8, 3.0, 0.0), &Grid::continuum(128), metric).unwrap();
            assert!(d.mean.abs() < 1e-13 && d.variance.abs() < 1e-13, "{metric:?} {d:?}");
        }
    }

    #[test]
    fn chain_generating_function_is_normalised() {
        let g = chain_generating_function(&params(0.6, 1.5, 1.0), 8, 0.0).unwrap();
        assert!((g - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn finite_chain_approaches_continuum() {
        let p = params(0.5, 2.0, 1.0);
        let cont = average_work_density(&p, &Grid::continuum(512), Metric::Physical).unwrap();
        let fin = average_work_density(&p, &Grid::Finite { sites: 4000 }, Metric::Physical).unwrap();
        assert!((cont - fin).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn physical_moments_match_gram_weighted_route(k in 0.05f64..3.1, h in 0.0f64..3.0, gamma in 0.0f64..8.0, t in 0.0f64..5.0) {
            let m = ModeCoefficients::new(&params(h, gamma, t), k).unwrap();
            let g = [[m.e0_gamma, I * m.delta], [-I * m.delta, 2.0 * m.beta + m.e0_gamma]];
            let gram = [[c(m.p, 0.0), -I * m.q], [-I * m.q, c(m.p, 0.0)]];
            let v = [c(1.0, 0.0), I * m.alpha_t(t)];
            let norm = quad(gram, v).re;
            let mean = quad(mul(gram, g), v).re / norm + m.eps_i;
            let second = quad(mul(gram, mul(g, g)), v).re / norm;
            let var = second - (mean - m.eps_i).powi(2);
            let mm = moments_of(&m, t, Metric::Physical);
            let scale = 1.0 + m.eps_i * m.eps_i;
            prop_assert!((mm.mean - mean).abs() < 1e-9 * scale, "{} {}", mm.mean, mean);
            prop_assert!((mm.variance - var).abs() < 1e-9 * scale, "{} {}", mm.variance, var);
        }

        #[test]
        fn moments_are_sane(k in 0.05f64..3.1, h in 0.0f64..3.0, gamma in 0.0f64..8.0, t in 0.0f64..50.0) {
            let p = params(h, gamma, t);
            for metric in [Metric::Physical, Metric::Biorthogonal] {
                let mm = mode_moments(&p, k, metric).unwrap();
                prop_assert!(mm.variance >= 0.0);
                prop_assert!(mm.mean.is_finite());
            }
            let phys = mode_moments(&p, k, Metric::Physical).unwrap();
            let gap = 2.0 * ModeCoefficients::new(&p, k).unwrap().eps_i;
            prop_assert!(phys.mean >= 0.0 && phys.mean <= gap * (1.0 + 1e-12));
        }

        #[test]
        fn generating_function_moments(k in 0.05f64..3.1, h in 0.0f64..3.0, gamma in 0.0f64..8.0, t in 0.0f64..5.0) {
            let p = params(h, gamma, t);
            let step = 1e-4;
            let gf = |u| mode_generating_function(&p, k, u).unwrap().ln();
            let d1 = I * (gf(step) - gf(-step)) / (2.0 * step);
            let mm = mode_moments(&p, k, Metric::Physical).unwrap();
            prop_assert!((d1.re - mm.mean).abs() < 1e-6 * (1.0 + mm.mean.abs()));
        }
    }
}
