//! Run configuration, read from TOML. All quantities are SI: lengths in m,
//! number density in 1/m^3, angular frequency in rad/s, speeds in m/s,
//! attenuation in 1/m.
//!
//! ```toml
//! methods = ["asymptotic_o2", "determinant"]
//!
//! [[host.waves]]
//! label = "c"
//! model = { kind = "speed_attenuation", speed = 1500.0, attenuation = 0.0 }
//!
//! [mixture]
//! volume_fraction = 0.05
//! radius_a = 1e-3
//! hole_b = 2.1e-3
//!
//! [tmatrix]
//! kind = "demo"
//! density_ratio = 2.0
//! speed_ratio = 1.5
//!
//! [sweep]
//! omega = { start = 1e5, stop = 1e6, count = 10 }
//! ```

use std::path::{Path, PathBuf};

use coherent_core::{load_tmatrix, HostMedium, HostWave, Method, MixtureSpec, TMatrixSet, WaveModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub methods: Vec<Method>,
    /// Overrides the automatic truncation order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub host: HostConfig,
    pub mixture: MixtureConfig,
    pub tmatrix: TMatrixSource,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostConfig {
    /// kg/m^3, used by the demo sphere model only.
    #[serde(default = "default_density")]
    pub density: f64,
    pub waves: Vec<HostWave>,
}

fn default_density() -> f64 {
    1.0
}

/// Exactly one of `n0` and `volume_fraction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_fraction: Option<f64>,
    pub radius_a: f64,
    pub hole_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TMatrixSource {
    /// One JSON file per swept frequency, in sweep order.
    Files { paths: Vec<PathBuf> },
    /// Fluid sphere in a single-wave fluid host; ratios are relative to the host.
    Demo {
        density_ratio: f64,
        speed_ratio: f64,
        #[serde(default = "default_demo_order")]
        n_max: usize,
    },
}

fn default_demo_order() -> usize {
    30
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    List(Vec<f64>),
    Range(OmegaRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub omega: OmegaSpec,
    /// Number densities to sweep; defaults to the mixture value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub root: f64,
    pub max_iterations: usize,
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            max_iterations: 50,
            quadrature: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

impl OmegaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OmegaSpec::List(v) => v.clone(),
            OmegaSpec::Range(r) if r.count == 1 => vec![r.start],
            OmegaSpec::Range(r) => (0..r.count)
                .map(|i| r.start + (r.stop - r.start) * i as f64 / (r.count - 1) as f64)
                .collect(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Read `path`; relative T-matrix paths are taken relative to its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let TMatrixSource::Files { paths } = &mut cfg.tmatrix {
            let base = path.parent().unwrap_or(Path::new("."));
            for p in paths.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        self.host_medium()?;
        self.base_mixture()?;
        let omegas = self.sweep.omega.values();
        if omegas.is_empty() {
            return bad("frequency sweep is empty".into());
        }
        if let OmegaSpec::Range(r) = &self.sweep.omega {
            if r.count == 0 {
                return bad("frequency range count must be positive".into());
            }
        }
        if omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return bad("angular frequencies must be positive".into());
        }
        if let Some(n0s) = &self.sweep.n0 {
            if n0s.is_empty() {
                return bad("number-density sweep is empty".into());
            }
            for &n0 in n0s {
                self.base_mixture()?
                    .with_number_density(n0)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
        match &self.tmatrix {
            TMatrixSource::Files { paths } => {
                if paths.len() != omegas.len() {
                    return bad(format!(
                        "{} T-matrix files for {} frequencies",
                        paths.len(),
                        omegas.len()
                    ));
                }
            }
            TMatrixSource::Demo {
                density_ratio,
                speed_ratio,
                ..
            } => {
                if self.host.waves.len() != 1 {
                    return bad("the demo sphere needs a single-wave host".into());
                }
                if !matches!(self.host.waves[0].model, WaveModel::SpeedAttenuation { .. }) {
                    return bad("the demo sphere needs a speed/attenuation host model".into());
                }
                if !(*density_ratio > 0.0 && *speed_ratio > 0.0) {
                    return bad("demo density and speed ratios must be positive".into());
                }
            }
        }
        if !(self.tolerances.root > 0.0 && self.tolerances.quadrature > 0.0 && self.tolerances.max_iterations > 0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    pub fn host_medium(&self) -> CliResult<HostMedium> {
        HostMedium::new(self.host.waves.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn base_mixture(&self) -> CliResult<MixtureSpec> {
        let m = &self.mixture;
        let spec = match (m.n0, m.volume_fraction) {
            (Some(n0), None) => MixtureSpec::new(n0, m.radius_a, m.hole_b),
            (None, Some(phi)) => MixtureSpec::from_volume_fraction(phi, m.radius_a, m.hole_b),
            _ => return Err(CliError::Config("give exactly one of mixture.n0 and mixture.volume_fraction".into())),
        };
        spec.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.sweep.omega.values()
    }

    pub fn number_densities(&self) -> CliResult<Vec<f64>> {
        Ok(match &self.sweep.n0 {
            Some(v) => v.clone(),
            None => vec![self.base_mixture()?.n0()],
        })
    }

    /// Load every T-matrix file up front so that malformed input is a
    /// configuration error rather than a per-point failure.
    pub fn preload_tmatrices(&self) -> CliResult<Option<Vec<TMatrixSet>>> {
        let TMatrixSource::Files { paths } = &self.tmatrix else {
            return Ok(None);
        };
        let p = self.host.waves.len();
        let mut out = Vec::with_capacity(paths.len());
        for path in paths {
            let t = load_tmatrix(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if t.p() != p {
                return Err(CliError::Config(format!(
                    "{}: T-matrix has P = {} but the host has {p} waves",
                    path.display(),
                    t.p()
                )));
            }
            out.push(t);
        }
        Ok(Some(out))
    }
}
