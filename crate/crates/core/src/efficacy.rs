//! Efficacy of the monitored Ising chain with `H_i = H_f`.
//!
//! Per pair, the efficacy is the ratio of squared coordinate norms, in the
//! unit-norm right eigenbasis of the no-click generator, of the ground state
//! propagated with `e^{iH_eff† t}` and with `e^{-iH_eff t}`. In closed form
//! `γ^{(k)} = e^{4Q²Γt/D} (|C_0|² + |C_1|²) / (1 + |α|² e^{4Γt})` with
//! `(C_0, C_1) = e^{i h̄ t} (1, iα)` and `h̄ = χ̄ (1 - σ_z) - ξ̄ σ_y`.

use serde::Serialize;

use crate::error::Result;
use crate::ising::{Grid, IsingParams, ModeCoefficients};
use crate::operator::{C64, I};

/// Amplitudes of the backward-propagated ground state and of its dual row vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeAmplitudes {
    pub c0: C64,
    pub c1: C64,
    pub d0: C64,
    pub d1: C64,
}

/// `sin(Ωt)/Ω`, regular at `Ω = 0`.
fn sinc(omega: C64, t: f64) -> C64 {
    let z = omega * t;
    if z.norm() < 1e-6 {
        t * (1.0 - z * z / 6.0)
    } else {
        z.sin() / omega
    }
}

pub fn mode_amplitudes(params: &IsingParams, k: f64) -> Result<ModeAmplitudes> {
    let m = ModeCoefficients::new(params, k)?;
    Ok(amplitudes_of(&m, params.t))
}

fn amplitudes_of(m: &ModeCoefficients, t: f64) -> ModeAmplitudes {
    let a = m.alpha;
    let (chb, xib, omb) = (m.chi_bar, m.xi_bar, m.omega_bar);
    let fwd = (I * chb * t).exp();
    let (cb, sb) = ((omb * t).cos(), sinc(omb, t));
    let c0 = fwd * (cb - I * (chb + a * xib) * sb);
    let c1 = fwd * (I * a * cb + (xib - a * chb) * sb);

    let (ch, xi, om) = (m.chi, m.xi, m.omega);
    let bwd = (-I * ch * t).exp();
    let (cs, ss) = ((om * t).cos(), sinc(om, t));
    let ac = a.conj();
    let d0 = bwd * (cs + I * (ch - ac * xi) * ss);
    let d1 = bwd * (-I * ac * cs - (xi + ac * ch) * ss);
    ModeAmplitudes { c0, c1, d0, d1 }
}

/// `ln γ^{(k)}_t`, evaluated without overflow at long times.
pub fn log_mode_efficacy(params: &IsingParams, k: f64) -> Result<f64> {
    let m = ModeCoefficients::new(params, k)?;
    Ok(log_efficacy_of(&m, params.t))
}

pub fn mode_efficacy(params: &IsingParams, k: f64) -> Result<f64> {
    Ok(log_mode_efficacy(params, k)?.exp())
}

fn log_efficacy_of(m: &ModeCoefficients, t: f64) -> f64 {
    let gamma = m.decay();
    let a = m.alpha;
    let (chb, xib) = (m.chi_bar, m.xi_bar);
    // branch of Ω̄ with Im <= 0, so e^{-2iΩ̄t} stays bounded
    let omb = if m.omega_bar.im > 0.0 { -m.omega_bar } else { m.omega_bar };
    let small = (-2.0 * I * omb * t).exp();
    // cos(Ω̄t) and sin(Ω̄t)/Ω̄ with the growing factor e^{iΩ̄t} removed
    let cr = (1.0 + small) * 0.5;
    let sr =
        if (omb * t).norm() < 1e-6 { sinc(omb, t) * (-I * omb * t).exp() } else { (1.0 - small) / (2.0 * I * omb) };
    let c0 = cr - I * (chb + a * xib) * sr;
    let c1 = I * a * cr + (xib - a * chb) * sr;
    let log_growth = -2.0 * t * (chb.im + omb.im);
    let prefactor = 4.0 * (m.q * m.q).re * gamma * t / m.d;
    let forward = (1.0 + a.norm_sqr() * (4.0 * gamma * t).exp()).ln();
    prefactor + log_growth + (c0.norm_sqr() + c1.norm_sqr()).ln() - forward
}

/// `(1/L) ln γ_t`.
pub fn log_efficacy_density(params: &IsingParams, grid: &Grid) -> Result<f64> {
    params.validate()?;
    let [v] =
        grid.density(&params.breakpoints(), |k| Ok([log_efficacy_of(&ModeCoefficients::new(params, k)?, params.t)]))?;
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TotalEfficacy {
    pub sites: usize,
    pub log: f64,
    /// `γ_t` itself when `|ln γ_t| <= 700`.
    pub value: Option<f64>,
}

/// Efficacy of a chain of `sites` spins; with a continuum grid the density is scaled by `sites`.
pub fn total_efficacy(params: &IsingParams, grid: &Grid, sites: usize) -> Result<TotalEfficacy> {
    let log = sites as f64 * log_efficacy_density(params, grid)?;
    let value = (log.abs() <= 700.0).then(|| log.exp());
    Ok(TotalEfficacy { sites, log, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{c, mat_exp, CMatrix, CVector};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(h: f64, gamma: f64, t: f64) -> IsingParams {
        IsingParams::new(1.0, h, gamma, t).unwrap()
    }

    fn direct_ratio(m: &ModeCoefficients, t: f64) -> f64 {
        let amp = amplitudes_of(m, t);
        let w = m.alpha.norm_sqr() * (4.0 * m.decay() * t).exp();
        (4.0 * (m.q * m.q).re * m.decay() * t / m.d).exp() * (amp.c0.norm_sqr() + amp.c1.norm_sqr()) / (1.0 + w)
    }

    #[test]
    fn amplitudes_match_numeric_exponential() {
        // h = 0.5, γ = 2, k = π/3, t = 1
        let p = params(0.5, 2.0, 1.0);
        let m = ModeCoefficients::new(&p, PI / 3.0).unwrap();
        let amp = mode_amplitudes(&p, PI / 3.0).unwrap();
        let r = CMatrix::from_row_slice(2, 2, &[m.u_nc, -I * m.v_nc, -I * m.v_nc, m.u_nc]);
        let blk = m.noclick_block(p.gamma);
        let h = CMatrix::from_row_slice(2, 2, &[blk[0][0], blk[0][1], blk[1][0], blk[1][1]]);
        let back = mat_exp(&h.adjoint(), c(0.0, p.t)).unwrap();
        let rinv = r.clone().try_inverse().unwrap();
        let v = &rinv * back * &r * CVector::from_vec(vec![c(1.0, 0.0), I * m.alpha]);
        // h̄ carries the scalar part χ̄ that the traceless block lacks
        let phase = (I * m.chi_bar * p.t).exp();
        assert!((phase * v[0] - amp.c0).norm() < 1e-12, "{} {}", phase * v[0], amp.c0);
        assert!((phase * v[1] - amp.c1).norm() < 1e-12, "{} {}", phase * v[1], amp.c1);
    }

    #[test]
    fn efficacy_is_one_at_start_and_without_monitoring() {
        for k in [0.3, 1.2, 2.9] {
            assert!((mode_efficacy(&params(0.5, 3.0, 0.0), k).unwrap() - 1.0).abs() < 1e-13);
            assert!((mode_efficacy(&params(0.5, 0.0, 4.0), k).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn long_times_stay_finite() {
        let p = params(0.5, 5.0, 5000.0);
        for k in [0.01, 1.0, 3.1] {
            assert!(log_mode_efficacy(&p, k).unwrap().is_finite());
        }
        let tot = total_efficacy(&p, &Grid::continuum(256), 10_000).unwrap();
        assert!(tot.log.is_finite());
    }

    #[test]
    fn total_scales_with_sites() {
        let p = params(0.5, 2.0, 1.0);
        let a = total_efficacy(&p, &Grid::Finite { sites: 20 }, 20).unwrap();
        let direct: f64 =
            Grid::Finite { sites: 20 }.modes().unwrap().iter().map(|&(k, _)| log_mode_efficacy(&p, k).unwrap()).sum();
        assert!((a.log - direct).abs() < 1e-12);
        assert!((a.value.unwrap() - direct.exp()).abs() < 1e-12 * direct.exp());
    }

    proptest! {
        #[test]
        fn dual_amplitudes_are_conjugate(k in 0.05f64..3.1, h in 0.0f64..3.0, gamma in 0.0f64..8.0, t in 0.0f64..5.0) {
            let a = mode_amplitudes(&params(h, gamma, t), k).unwrap();
            let scale = 1.0 + a.c0.norm() + a.c1.norm();
            prop_assert!((a.d0 - a.c0.conj()).norm() < 1e-10 * scale);
            prop_assert!((a.d1 - a.c1.conj()).norm() < 1e-10 * scale);
        }

        #[test]
        fn log_form_matches_direct_form(k in 0.05f64..3.1, h in 0.0f64..3.0, gamma in 0.0f64..8.0, t in 0.0f64..5.0) {
            let p = params(h, gamma, t);
            let m = ModeCoefficients::new(&p, k).unwrap();
            let direct = direct_ratio(&m, t);
            let log = log_mode_efficacy(&p, k).unwrap();
            prop_assert!((log - direct.ln()).abs() < 1e-9, "{} {}", log, direct.ln());
        }
    }
}
