//! Parameter sweeps of the monitored Ising chain: work density against the
//! monitoring rate or the field, and the efficacy against time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::efficacy::total_efficacy;
use crate::error::{Error, Result};
use crate::ising::{moments_of, work_densities, Grid, IsingParams, Metric, ModeCoefficients};

/// `start, start + step, ...` up to `stop` inclusive, without accumulating rounding.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::InvalidInput(format!("bad sweep [{start}, {stop}] with step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaSweep {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: Vec<f64>,
    pub t: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_step: f64,
    pub grid: Grid,
    pub metric: Metric,
    /// Kink search starts here, past the jump at `γ -> 0+`.
    pub kink_gamma_min: f64,
}

impl GammaSweep {
    /// Transient sweep: `t = 1`, `γ ∈ [0, 10]`.
    pub fn transient() -> Self {
        Self {
            j: 1.0,
            h: vec![0.5, 1.0, 1.5],
            t: 1.0,
            gamma_min: 0.0,
            gamma_max: 10.0,
            gamma_step: 0.05,
            grid: Grid::continuum(512),
            metric: Metric::Biorthogonal,
            kink_gamma_min: 0.1,
        }
    }

    /// Long-time sweep at `t = 5000` on a fine grid.
    pub fn long_time() -> Self {
        Self {
            j: 1.0,
            h: vec![0.3, 0.6, 0.9],
            t: 5000.0,
            gamma_min: 0.0,
            gamma_max: 6.0,
            gamma_step: 0.02,
            // at t = 5000 the half-rule estimate overstates the error by two orders of magnitude
            grid: Grid::Continuum { nodes: 2048, tolerance: 1e-6 },
            metric: Metric::Biorthogonal,
            kink_gamma_min: 0.1,
        }
    }
}

impl Default for GammaSweep {
    fn default() -> Self {
        Self::transient()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSweep {
    #[serde(rename = "J")]
    pub j: f64,
    pub gamma: Vec<f64>,
    pub t: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h_step: f64,
    pub grid: Grid,
    pub metric: Metric,
}

impl Default for FieldSweep {
    fn default() -> Self {
        Self {
            j: 1.0,
            gamma: vec![1.0, 2.0, 5.0],
            t: 1.0,
            h_min: 0.0,
            h_max: 8.0,
            h_step: 0.05,
            grid: Grid::continuum(512),
            metric: Metric::Biorthogonal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficacySweep {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    pub gamma: Vec<f64>,
    pub t_max: f64,
    pub t_step: f64,
    /// Chain length `L` multiplying the continuum density of `ln γ_t`.
    pub sites: usize,
    pub grid: Grid,
}

impl Default for EfficacySweep {
    fn default() -> Self {
        Self {
            j: 1.0,
            h: 0.5,
            gamma: vec![0.0, 2.0, 5.0],
            t_max: 10.0,
            t_step: 0.05,
            sites: 100,
            grid: Grid::continuum(1024),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorkPoint {
    pub h: f64,
    pub gamma: f64,
    pub t: f64,
    pub avg_w: f64,
    pub var_w: f64,
}

fn work_point(j: f64, h: f64, gamma: f64, t: f64, grid: &Grid, metric: Metric) -> Result<WorkPoint> {
    let d = work_densities(&IsingParams::new(j, h, gamma, t)?, grid, metric)?;
    Ok(WorkPoint { h, gamma, t, avg_w: d.mean, var_w: d.variance })
}

/// Rows ordered by `h`, then `γ`.
pub fn sweep_gamma(cfg: &GammaSweep) -> Result<Vec<WorkPoint>> {
    let gammas = uniform_grid(cfg.gamma_min, cfg.gamma_max, cfg.gamma_step)?;
    let points: Vec<(f64, f64)> = cfg.h.iter().flat_map(|&h| gammas.iter().map(move |&g| (h, g))).collect();
    points.par_iter().map(|&(h, g)| work_point(cfg.j, h, g, cfg.t, &cfg.grid, cfg.metric)).collect()
}

/// Mean work only, ordered by `h`, then `γ`; the variance is not resolved at long times.
pub fn sweep_gamma_mean(cfg: &GammaSweep) -> Result<Vec<WorkPoint>> {
    let gammas = uniform_grid(cfg.gamma_min, cfg.gamma_max, cfg.gamma_step)?;
    let points: Vec<(f64, f64)> = cfg.h.iter().flat_map(|&h| gammas.iter().map(move |&g| (h, g))).collect();
    points
        .par_iter()
        .map(|&(h, gamma)| {
            let p = IsingParams::new(cfg.j, h, gamma, cfg.t)?;
            let [avg_w] = cfg.grid.density(&p.breakpoints(), |k| {
                Ok([moments_of(&ModeCoefficients::new(&p, k)?, p.t, cfg.metric).mean])
            })?;
            Ok(WorkPoint { h, gamma, t: cfg.t, avg_w, var_w: f64::NAN })
        })
        .collect()
}

/// Rows ordered by `γ`, then `h`.
pub fn sweep_field(cfg: &FieldSweep) -> Result<Vec<WorkPoint>> {
    let fields = uniform_grid(cfg.h_min, cfg.h_max, cfg.h_step)?;
    let points: Vec<(f64, f64)> = cfg.gamma.iter().flat_map(|&g| fields.iter().map(move |&h| (g, h))).collect();
    points.par_iter().map(|&(g, h)| work_point(cfg.j, h, g, cfg.t, &cfg.grid, cfg.metric)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EfficacyPoint {
    pub gamma: f64,
    pub t: f64,
    pub log_gamma_t: f64,
    pub gamma_t: Option<f64>,
}

/// Rows ordered by `γ`, then `t`.
pub fn sweep_efficacy(cfg: &EfficacySweep) -> Result<Vec<EfficacyPoint>> {
    let times = uniform_grid(0.0, cfg.t_max, cfg.t_step)?;
    let points: Vec<(f64, f64)> = cfg.gamma.iter().flat_map(|&g| times.iter().map(move |&t| (g, t))).collect();
    points
        .par_iter()
        .map(|&(gamma, t)| {
            let e = total_efficacy(&IsingParams::new(cfg.j, cfg.h, gamma, t)?, &cfg.grid, cfg.sites)?;
            Ok(EfficacyPoint { gamma, t, log_gamma_t: e.log, gamma_t: e.value })
        })
        .collect()
}

/// `4 sqrt(J² - h²)`, the monitoring rate at which the no-click gap opens for every mode.
pub fn critical_rate(j: f64, h: f64) -> Option<f64> {
    (h.abs() < j.abs()).then(|| 4.0 * (j * j - h * h).sqrt())
}

/// Location of the largest `|d²y/dx²|` (central differences) among interior points with `x >= x_min`.
pub fn locate_kink(x: &[f64], y: &[f64], x_min: f64) -> Option<f64> {
    (1..x.len().saturating_sub(1))
        .filter(|&i| x[i - 1] >= x_min)
        .map(|i| {
            let h = 0.5 * (x[i + 1] - x[i - 1]);
            (i, ((y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h)).abs())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| x[i])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Kink {
    pub h: f64,
    pub gamma_kink: Option<f64>,
    pub gamma_c: Option<f64>,
}

/// One kink per field value of a `γ` sweep.
pub fn kinks(cfg: &GammaSweep, rows: &[WorkPoint]) -> Vec<Kink> {
    cfg.h
        .iter()
        .map(|&h| {
            let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.h == h).map(|r| (r.gamma, r.avg_w)).unzip();
            Kink { h, gamma_kink: locate_kink(&x, &y, cfg.kink_gamma_min), gamma_c: critical_rate(cfg.j, h) }
        })
        .collect()
}
