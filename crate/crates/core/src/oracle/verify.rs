use rayon::prelude::*;
use serde::Serialize;

use crate::efficacy::{log_efficacy_density, mode_efficacy};
use crate::error::Result;
use crate::ising::{chain_generating_function, mode_moments, work_densities, Grid, IsingParams, Metric};

use super::{fock_mode_oracle, SpinChainOracle};

/// Largest discrepancy found by one family of comparisons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// Standard `(h, γ, t)` grid of the closed-form comparisons.
pub fn standard_grid() -> Vec<IsingParams> {
    let mut out = Vec::new();
    for h in [0.3, 0.5, 0.9] {
        for gamma in [0.5, 2.0, 5.0] {
            for t in [0.3, 1.0, 3.0] {
                out.push(IsingParams { j: 1.0, h, gamma, t });
            }
        }
    }
    out
}

const PAIR_SITES: usize = 16;
const CHAIN_SITES: usize = 6;

fn max_of(errors: impl IntoIterator<Item = f64>) -> f64 {
    errors.into_iter().fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Per-pair closed forms against the Fock-space oracle on the standard grid, both
/// mode by mode and after summing over the pairs of a 16-site ring.
pub fn closed_form_checks(metric: Metric) -> Result<Vec<Check>> {
    let grid = Grid::Finite { sites: PAIR_SITES };
    let modes = grid.modes()?;
    let points = standard_grid();
    let rows: Vec<[f64; 5]> = points
        .par_iter()
        .map(|p| -> Result<[f64; 5]> {
            let (mut mean, mut var, mut eff) = (0.0f64, 0.0f64, 0.0f64);
            let (mut dens_m, mut dens_v) = (0.0, 0.0);
            for &(k, w) in &modes {
                let r = fock_mode_oracle(p, k)?;
                let m = mode_moments(p, k, metric)?;
                mean = mean.max((m.mean - r.mean(metric)).abs());
                var = var.max((m.variance - r.variance(metric)).abs());
                let e = mode_efficacy(p, k)?;
                eff = eff.max((e - r.efficacy).abs() / e.max(1.0));
                dens_m += w * r.mean(metric);
                dens_v += w * r.variance(metric);
            }
            let d = work_densities(p, &grid, metric)?;
            Ok([mean, var, eff, (d.mean - dens_m).abs(), (d.variance - dens_v).abs()])
        })
        .collect::<Result<_>>()?;
    let label = match metric {
        Metric::Physical => "physical",
        Metric::Biorthogonal => "biorthogonal",
    };
    let n = points.len() * modes.len();
    let col = |i: usize| max_of(rows.iter().map(|r| r[i]));
    Ok(vec![
        Check { name: format!("pair mean work ({label})"), cases: n, max_error: col(0), tolerance: 1e-8 },
        Check { name: format!("pair work variance ({label})"), cases: n, max_error: col(1), tolerance: 1e-8 },
        Check { name: "pair efficacy".into(), cases: n, max_error: col(2), tolerance: 1e-8 },
        Check { name: format!("mean work density ({label})"), cases: points.len(), max_error: col(3), tolerance: 1e-8 },
        Check {
            name: format!("work variance density ({label})"),
            cases: points.len(),
            max_error: col(4),
            tolerance: 1e-8,
        },
    ])
}

/// `ln γ_t` vanishes without monitoring.
pub fn unmonitored_efficacy_check() -> Result<Check> {
    let mut errors = Vec::new();
    for t in [0.0, 0.5, 1.0, 3.0, 10.0, 100.0] {
        for h in [0.3, 0.5, 1.5] {
            let p = IsingParams::new(1.0, h, 0.0, t)?;
            errors.push(log_efficacy_density(&p, &Grid::continuum(256))?.abs());
        }
    }
    Ok(Check { name: "efficacy at γ = 0".into(), cases: errors.len(), max_error: max_of(errors), tolerance: 1e-12 })
}

/// Parameter points of the spin-chain comparison.
pub fn chain_points() -> [IsingParams; 3] {
    [
        IsingParams { j: 1.0, h: 0.5, gamma: 2.0, t: 1.0 },
        IsingParams { j: 1.0, h: 0.3, gamma: 0.5, t: 3.0 },
        IsingParams { j: 1.0, h: 1.4, gamma: 5.0, t: 0.3 },
    ]
}

pub const CHAIN_U: [f64; 5] = [-0.9, -0.2, 0.4, 1.1, 2.5];

/// Exact six-site chain against the product of pair generating functions, and its
/// numerically differentiated moments against the summed pair moments.
pub fn spin_chain_checks() -> Result<Vec<Check>> {
    let rows: Vec<(f64, f64)> = chain_points()
        .par_iter()
        .map(|p| -> Result<(f64, f64)> {
            let oracle = SpinChainOracle::new(p, CHAIN_SITES)?;
            let mut gf: f64 = 0.0;
            for u in CHAIN_U {
                gf = gf.max((oracle.generating_function(u)? - chain_generating_function(p, CHAIN_SITES, u)?).norm());
            }
            let (mean, var) = oracle.moments(1e-4)?;
            let (mut am, mut av) = (0.0, 0.0);
            for (k, _) in (Grid::Finite { sites: CHAIN_SITES }).modes()? {
                let m = mode_moments(p, k, Metric::Physical)?;
                am += m.mean;
                av += m.variance;
            }
            Ok((gf, (mean - am).abs().max((var - av).abs())))
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        Check {
            name: format!("{CHAIN_SITES}-site chain generating function"),
            cases: rows.len() * CHAIN_U.len(),
            max_error: max_of(rows.iter().map(|r| r.0)),
            tolerance: 1e-6,
        },
        Check {
            name: format!("{CHAIN_SITES}-site chain work moments"),
            cases: rows.len(),
            max_error: max_of(rows.iter().map(|r| r.1)),
            tolerance: 1e-4,
        },
    ])
}

/// Every oracle comparison, in a fixed order.
pub fn cross_check() -> Result<Vec<Check>> {
    let mut out = closed_form_checks(Metric::Physical)?;
    let mut bi = closed_form_checks(Metric::Biorthogonal)?;
    bi.retain(|c| c.name != "pair efficacy");
    out.extend(bi);
    out.push(unmonitored_efficacy_check()?);
    out.extend(spin_chain_checks()?);
    Ok(out)
}
