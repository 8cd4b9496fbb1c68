use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operator::{c, C64, I};

use super::IsingParams;

const SINGULAR: f64 = 1e-14;

/// Bogoliubov data for the `(k, -k)` pair.
///
/// The even-parity block in the basis `(|0>, c_k† c_{-k}† |0>)` is
/// `[[-a, b], [b*, a]]` with `a = 2(h - J cos k)`, `b = 2iJ sin k`; the no-click
/// generator replaces `a` by `a + iγ/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub k: f64,
    pub a: f64,
    pub b: C64,
    pub eps_i: f64,
    /// Complex quasiparticle energy of the no-click generator, `Im <= 0`.
    pub eps_eff: C64,
    pub u_i: f64,
    pub v_i: C64,
    pub u_nc: C64,
    pub v_nc: C64,
    pub x: C64,
    pub y: C64,
    pub alpha: C64,
    pub det: C64,
    pub beta: C64,
    pub delta: C64,
    pub e0_gamma: C64,
    pub p: f64,
    /// Purely imaginary.
    pub q: C64,
    pub d: f64,
    pub chi: C64,
    pub xi: C64,
    pub chi_bar: C64,
    pub xi_bar: C64,
    pub omega: C64,
    pub omega_bar: C64,
}

/// `b / (a + ε)`, rewritten as `(ε - a) / b*` (using `ε² = a² + |b|²`) where that avoids cancellation.
fn rotation_ratio(a: C64, eps: C64, b: C64, k: f64) -> Result<C64> {
    let (plus, minus) = (a + eps, eps - a);
    let (num, den) = if plus.norm() >= minus.norm() { (b, plus) } else { (minus, b.conj()) };
    if den.norm() < SINGULAR {
        return Err(Error::SingularMode { k, magnitude: den.norm() });
    }
    Ok(num / den)
}

impl ModeCoefficients {
    pub fn new(params: &IsingParams, k: f64) -> Result<Self> {
        if !(k > 0.0 && k < PI) {
            return Err(Error::MomentumOutOfDomain { k });
        }
        let IsingParams { j, h, gamma, .. } = *params;
        let a = 2.0 * (h - j * k.cos());
        let b = c(0.0, 2.0 * j * k.sin());
        let b2 = b.norm_sqr();

        let eps_i = (a * a + b2).sqrt();
        let ri = rotation_ratio(c(a, 0.0), c(eps_i, 0.0), b, k)?;
        let u_i = 1.0 / (1.0 + ri.norm_sqr()).sqrt();
        let v_i = I * ri * u_i;

        let (eps_eff, u_nc, v_nc) = if gamma == 0.0 {
            (c(eps_i, 0.0), c(u_i, 0.0), v_i)
        } else {
            let a_nc = c(a, 0.5 * gamma);
            let mut eps_eff = (a_nc * a_nc + b2).sqrt();
            if eps_eff.im > 0.0 {
                eps_eff = -eps_eff;
            }
            let rnc = rotation_ratio(a_nc, eps_eff, b, k)?;
            let u_nc = c(1.0 / (1.0 + rnc.norm_sqr()).sqrt(), 0.0);
            (eps_eff, u_nc, I * rnc * u_nc)
        };

        let x = u_i * u_nc + v_i * v_nc;
        let y = u_i * v_nc - v_i * u_nc;
        let det = u_nc * u_nc + v_nc * v_nc;
        let alpha = y / x;
        let beta = eps_i * (x * x - y * y) / det;
        let delta = 2.0 * eps_i * x * y / det;
        let e0_gamma = -eps_i + 2.0 * eps_i * y * y / det;

        let p = u_nc.norm_sqr() + v_nc.norm_sqr();
        let q = u_nc.conj() * v_nc - u_nc * v_nc.conj();
        let d = det.norm_sqr();
        let chi = eps_eff * (p * p - q * q) / d;
        let xi = 2.0 * eps_eff * p * q / d;
        let chi_bar = chi.conj();
        let xi_bar = -xi.conj();
        let omega = (chi * chi + xi * xi).sqrt();
        let omega_bar = (chi_bar * chi_bar + xi_bar * xi_bar).sqrt();

        Ok(Self {
            k,
            a,
            b,
            eps_i,
            eps_eff,
            u_i,
            v_i,
            u_nc,
            v_nc,
            x,
            y,
            alpha,
            det,
            beta,
            delta,
            e0_gamma,
            p,
            q,
            d,
            chi,
            xi,
            chi_bar,
            xi_bar,
            omega,
            omega_bar,
        })
    }

    /// `Re ε_eff`.
    pub fn lambda(&self) -> f64 {
        self.eps_eff.re
    }

    /// `Im ε_eff`, never positive.
    pub fn decay(&self) -> f64 {
        self.eps_eff.im
    }

    /// `α e^{-2i ε_eff t}`, the pair amplitude of the evolved ground state.
    pub fn alpha_t(&self, t: f64) -> C64 {
        self.alpha * (-2.0 * I * self.eps_eff * t).exp()
    }

    /// Probability that the pair is excited after the no-click evolution.
    pub fn excitation_probability(&self, t: f64) -> f64 {
        // written without α so that X -> 0 stays finite
        let phase = (-2.0 * I * self.eps_eff * t).exp();
        let excited = (self.x * self.y * (phase - 1.0)).norm_sqr();
        let ground = (self.x * self.x + self.y * self.y * phase).norm_sqr();
        excited / (excited + ground)
    }

    /// No-click block `[[-(a + iγ/2), b], [b*, a + iγ/2]]`.
    pub fn noclick_block(&self, gamma: f64) -> [[C64; 2]; 2] {
        let an = c(self.a, 0.5 * gamma);
        [[-an, self.b], [self.b.conj(), an]]
    }

    /// Initial block `[[-a, b], [b*, a]]`.
    pub fn initial_block(&self) -> [[C64; 2]; 2] {
        [[c(-self.a, 0.0), self.b], [self.b.conj(), c(self.a, 0.0)]]
    }
}
