//! Monitored transverse-field Ising chain, mode by mode.
//!
//! `H = -J Σ σ^z_j σ^z_{j+1} - h Σ σ^x_j` on a ring; the no-click dynamics is
//! generated by the same form with `h -> h + iγ/4`. In the even-parity sector the
//! chain splits into independent `(k, -k)` pairs with `k = (2n - 1)π/L`.
//! Densities are per site: `(1/L) Σ_pairs`, which becomes `(1/2π) ∫_0^π dk`.

mod mode;
pub mod quadrature;
mod work;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mode::ModeCoefficients;
pub(crate) use work::moments_of;
pub use work::{
    average_work_density, chain_generating_function, mode_generating_function, mode_moments, work_densities,
    work_variance_density, ModeMoments, WorkDensities,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub j: f64,
    pub h: f64,
    pub gamma: f64,
    pub t: f64,
}

impl IsingParams {
    pub fn new(j: f64, h: f64, gamma: f64, t: f64) -> Result<Self> {
        let p = Self { j, h, gamma, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j.is_finite() && self.j != 0.0) {
            return Err(Error::InvalidInput(format!("coupling J = {} must be finite and nonzero", self.j)));
        }
        if !self.h.is_finite() {
            return Err(Error::InvalidInput(format!("field h = {} must be finite", self.h)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidInput(format!("monitoring rate γ = {} must be >= 0", self.gamma)));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::InvalidInput(format!("time t = {} must be >= 0", self.t)));
        }
        Ok(())
    }

    /// Momenta where the no-click integrands are sharpest: `cos k = h/J`, where the
    /// damping is weakest, and the mode whose gap `ε_k` equals `γ/2`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (j, h, g) = (self.j, self.h, self.gamma);
        let mut out = Vec::new();
        if (h / j).abs() < 1.0 {
            out.push((h / j).acos());
        }
        if h != 0.0 && g > 0.0 {
            let ck = (h * h + j * j - g * g / 16.0) / (2.0 * h * j);
            if ck.abs() < 1.0 {
                out.push(ck.acos());
            }
        }
        out
    }
}

/// Inner product used to turn the evolved no-click state into expectation values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Ordinary Hilbert-space expectation of the normalised state.
    #[default]
    Physical,
    /// Euclidean metric on coordinates in the unit-norm right eigenbasis of the
    /// no-click generator, with the final Hamiltonian symmetrised in that basis.
    Biorthogonal,
}

/// Momentum sampling for densities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Grid {
    /// Ring of `sites` spins, even parity, `k = (2n - 1)π/L`.
    Finite { sites: usize },
    /// Gauss-Legendre rule on `(0, π)`; the rule with half the nodes provides an
    /// error estimate that must not exceed `tolerance` (skipped when zero).
    Continuum {
        nodes: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
}

const GRADING_LEVELS: i32 = 10;
const MIN_PANEL_NODES: usize = 16;

fn default_tolerance() -> f64 {
    1e-8
}

impl Grid {
    pub fn continuum(nodes: usize) -> Self {
        Grid::Continuum { nodes, tolerance: default_tolerance() }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Grid::Finite { sites } if sites < 2 || sites % 2 == 1 => {
                Err(Error::InvalidInput(format!("chain length {sites} must be even and >= 2")))
            }
            Grid::Continuum { nodes, tolerance } if nodes < 2 || !(tolerance >= 0.0) => Err(Error::InvalidInput(
                format!("continuum grid needs >= 2 nodes and a non-negative tolerance (got {nodes}, {tolerance})"),
            )),
            _ => Ok(()),
        }
    }

    /// Momenta with weights such that `Σ w f(k)` is the per-site density.
    pub fn modes(&self) -> Result<Vec<(f64, f64)>> {
        self.modes_split(&[])
    }

    /// As [`Grid::modes`], with the continuum rule split into panels at `breaks`
    /// and nodes shared out in proportion to panel length.
    pub fn modes_split(&self, breaks: &[f64]) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        Ok(match *self {
            Grid::Finite { sites } => {
                let l = sites as f64;
                (1..=sites / 2).map(|n| ((2 * n - 1) as f64 * PI / l, 1.0 / l)).collect()
            }
            Grid::Continuum { nodes, .. } => panel_rule(&panels(nodes, breaks), 1),
        })
    }

    /// Evaluates the densities of several per-pair quantities at once.
    pub fn density<const N: usize>(
        &self,
        breaks: &[f64],
        f: impl Fn(f64) -> Result<[f64; N]> + Sync,
    ) -> Result<[f64; N]> {
        let sum = |modes: &[(f64, f64)]| -> Result<[f64; N]> {
            // evaluated in parallel, summed in grid order
            let values: Vec<[f64; N]> = modes.par_iter().map(|&(k, _)| f(k)).collect::<Result<_>>()?;
            let mut acc = [0.0; N];
            for (&(_, w), v) in modes.iter().zip(&values) {
                for i in 0..N {
                    acc[i] += w * v[i];
                }
            }
            Ok(acc)
        };
        let fine = sum(&self.modes_split(breaks)?)?;
        if let Grid::Continuum { nodes, tolerance } = *self {
            if tolerance > 0.0 {
                let coarse = sum(&panel_rule(&panels(nodes, breaks), 2))?;
                let estimate = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                log::trace!("quadrature estimate {estimate:e} with {nodes} nodes");
                if !(estimate <= tolerance) {
                    return Err(Error::Accuracy { estimate, tolerance });
                }
            }
        }
        Ok(fine)
    }
}

/// Panels `(a, b, nodes)` covering `(0, π)`. Geometric grading towards both ends
/// resolves the boundary layers that open up at `k -> 0, π` under strong monitoring.
fn panels(nodes: usize, breaks: &[f64]) -> Vec<(f64, f64, usize)> {
    let mut edges = vec![0.0, PI];
    for j in 1..=GRADING_LEVELS {
        let d = PI * 0.25f64.powi(j);
        edges.extend([d, PI - d]);
    }
    for &b in breaks.iter().filter(|&&b| b > 0.0 && b < PI) {
        edges.push(b);
        for j in 2..=GRADING_LEVELS {
            let d = PI * 0.25f64.powi(j);
            edges.extend([b - d, b + d].into_iter().filter(|&e| e > 0.0 && e < PI));
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    edges
        .windows(2)
        .map(|w| (w[0], w[1], ((nodes as f64 * (w[1] - w[0]) / PI).round() as usize).max(MIN_PANEL_NODES)))
        .collect()
}

/// Composite rule with `nodes / divisor` points per panel.
fn panel_rule(panels: &[(f64, f64, usize)], divisor: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b, n) in panels {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        out.extend(rule(n / divisor).iter().map(|&(x, wt)| (mid + half * x, half * wt / (2.0 * PI))));
    }
    out
}

type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss-Legendre rule on `[-1, 1]`, cached.
fn rule(nodes: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(&nodes) {
        return r.clone();
    }
    let r = Arc::new(quadrature::gauss_legendre_on(nodes, -1.0, 1.0));
    cache.lock().unwrap().insert(nodes, r.clone());
    r
}
