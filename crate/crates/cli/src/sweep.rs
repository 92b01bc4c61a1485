//! Dispersion sweeps over frequency and number density.

use coherent_core::{
    fluid_sphere_tmatrix, DispersionResult, FluidSphere, HostMedium, Method, MixtureSpec, ModalSystem, QuadOptions,
    SolverOptions, TMatrixSet, WaveModel,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, TMatrixSource};
use crate::error::CliResult;

/// CSV column order; fixed.
pub const COLUMNS: [&str; 10] = [
    "omega",
    "n0",
    "method",
    "wave",
    "re_xi",
    "im_xi",
    "phase_velocity",
    "attenuation",
    "residual",
    "warnings",
];

/// One (frequency, density, method, wave) result. Failed evaluations keep
/// their row with NaN values and the reason in `warnings`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// rad/s
    pub omega: f64,
    /// 1/m^3
    pub n0: f64,
    pub method: Method,
    pub wave: String,
    pub re_xi: f64,
    pub im_xi: f64,
    /// m/s
    pub phase_velocity: f64,
    /// 1/m
    pub attenuation: f64,
    /// `|det|` at the root; determinant method only.
    pub residual: Option<f64>,
    pub warnings: Vec<String>,
}

impl SweepRow {
    fn failed(omega: f64, n0: f64, method: Method, wave: &str, reason: &str) -> Self {
        SweepRow {
            omega,
            n0,
            method,
            wave: wave.to_string(),
            re_xi: f64::NAN,
            im_xi: f64::NAN,
            phase_velocity: f64::NAN,
            attenuation: f64::NAN,
            residual: None,
            warnings: vec![format!("failed: {reason}")],
        }
    }

    pub fn is_failure(&self) -> bool {
        self.re_xi.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.is_failure()).count()
    }
}

pub fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tolerances.root,
        max_iter: cfg.tolerances.max_iterations,
        quad: QuadOptions::relative(cfg.tolerances.quadrature),
        ..Default::default()
    }
}

struct Context {
    host: HostMedium,
    base: MixtureSpec,
    tmatrices: Option<Vec<TMatrixSet>>,
    opts: SolverOptions,
}

impl Context {
    fn tmatrix(&self, cfg: &RunConfig, index: usize, omega: f64) -> coherent_core::Result<TMatrixSet> {
        match (&cfg.tmatrix, &self.tmatrices) {
            (TMatrixSource::Files { .. }, Some(t)) => Ok(t[index].clone()),
            (TMatrixSource::Demo { density_ratio, speed_ratio, n_max }, _) => {
                let speed = match &self.host.waves()[0].model {
                    WaveModel::SpeedAttenuation { speed, .. } => *speed,
                    WaveModel::Tabulated { .. } => unreachable!("rejected by validation"),
                };
                let sphere = FluidSphere {
                    density: density_ratio * cfg.host.density,
                    speed: speed_ratio * speed,
                };
                fluid_sphere_tmatrix(&self.host, cfg.host.density, sphere, cfg.mixture.radius_a, omega, *n_max)
            }
            _ => unreachable!("T-matrix files are preloaded"),
        }
    }

    fn point(&self, cfg: &RunConfig, index: usize, omega: f64, n0: f64) -> Vec<SweepRow> {
        let system = || -> coherent_core::Result<ModalSystem> {
            let ks = self.host.wavenumbers(omega)?;
            let t = self.tmatrix(cfg, index, omega)?;
            let mix = self.base.with_number_density(n0)?;
            match cfg.n_max {
                Some(n) => ModalSystem::with_truncation(ks, &t, mix, n),
                None => ModalSystem::new(ks, &t, mix),
            }
        };
        let labels = self.host.labels();
        let system = match system() {
            Ok(s) => s,
            Err(e) => {
                let reason = e.to_string();
                return cfg
                    .methods
                    .iter()
                    .flat_map(|&m| labels.iter().map(move |l| (m, l)))
                    .map(|(m, l)| SweepRow::failed(omega, n0, m, l, &reason))
                    .collect();
            }
        };
        let result = DispersionResult::compute(&system, omega, &cfg.methods, &self.opts);
        result
            .outcomes
            .into_iter()
            .map(|o| match o.result {
                Ok(r) => SweepRow {
                    omega,
                    n0,
                    method: o.method,
                    wave: labels[o.wave].clone(),
                    re_xi: r.xi.re,
                    im_xi: r.xi.im,
                    phase_velocity: r.phase_velocity(omega),
                    attenuation: r.attenuation(),
                    residual: r.residual,
                    warnings: r.warnings,
                },
                Err(reason) => SweepRow::failed(omega, n0, o.method, &labels[o.wave], &reason),
            })
            .collect()
    }
}

/// Evaluate every requested method at every (omega, n0) point. Points run in
/// parallel; rows come back ordered by frequency, then density, then method
/// in configuration order, then wave.
pub fn run_dispersion(cfg: &RunConfig) -> CliResult<SweepOutput> {
    cfg.validate()?;
    let ctx = Context {
        host: cfg.host_medium()?,
        base: cfg.base_mixture()?,
        tmatrices: cfg.preload_tmatrices()?,
        opts: solver_options(cfg),
    };
    let n0s = cfg.number_densities()?;
    let points: Vec<(usize, f64, f64)> = cfg
        .omegas()
        .into_iter()
        .enumerate()
        .flat_map(|(i, w)| n0s.iter().map(move |&n| (i, w, n)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&(i, w, n0)| ctx.point(cfg, i, w, n0))
        .collect();
    Ok(SweepOutput {
        rows: rows.into_iter().flatten().collect(),
    })
}
