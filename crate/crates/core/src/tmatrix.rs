//! Modal transition coefficients, host media and mixture parameters.
//!
//! `T_n^{qp}` converts a regular incident wave of type `p` and order `n`
//! into an outgoing wave of type `q`:
//!
//! ```text
//! T^{qp} [ j_n(k_p r) P_n(cos t) ] = T_n^{qp} h_n^(1)(k_p r) P_n(cos t)
//! ```
//!
//! Wave types are indexed from zero in code (`c = 0`, `s = 1`, `th = 2`).
//! No reciprocity relation between `T^{qp}` and `T^{pq}` is assumed or
//! enforced.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{spherical_h1n_with_derivative, spherical_jn_with_derivative};

/// Canonical wave ordering.
pub const WAVE_LABELS: [&str; 3] = ["c", "s", "th"];

/// Entries above this magnitude at the last order flag a set as under-truncated.
pub const DEFAULT_DECAY_FLOOR: f64 = 1e-14;

fn validate_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() || labels.len() > 3 {
        return Err(Error::Validation(format!(
            "number of wave types must be 1, 2 or 3, got {}",
            labels.len()
        )));
    }
    let mut last = None;
    for l in labels {
        let Some(pos) = WAVE_LABELS.iter().position(|w| w == l) else {
            return Err(Error::Validation(format!(
                "unknown wave label {l:?}; expected one of c, s, th"
            )));
        };
        if last.is_some_and(|prev| pos <= prev) {
            return Err(Error::Validation(format!(
                "wave labels {labels:?} must be distinct and ordered c, s, th"
            )));
        }
        last = Some(pos);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TMatrixSet {
    labels: Vec<String>,
    radius_a: f64,
    omega: Option<f64>,
    /// `orders[n][q * P + p] = T_n^{qp}`
    orders: Vec<Vec<Complex64>>,
    decay_floor: f64,
}

impl TMatrixSet {
    /// Build from `orders[n][q][p] = T_n^{qp}`.
    pub fn new(
        labels: Vec<String>,
        radius_a: f64,
        omega: Option<f64>,
        orders: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<Self> {
        validate_labels(&labels)?;
        let p = labels.len();
        if !(radius_a.is_finite() && radius_a > 0.0) {
            return Err(Error::Validation(format!("radius_a must be positive, got {radius_a}")));
        }
        if orders.is_empty() {
            return Err(Error::Validation("at least one order (n = 0) is required".into()));
        }
        let mut flat = Vec::with_capacity(orders.len());
        for (n, m) in orders.into_iter().enumerate() {
            if m.len() != p || m.iter().any(|row| row.len() != p) {
                let cols: Vec<usize> = m.iter().map(Vec::len).collect();
                return Err(Error::Validation(format!(
                    "order n={n}: expected a {p}x{p} matrix, found {} rows with lengths {cols:?}",
                    m.len()
                )));
            }
            let row: Vec<Complex64> = m.into_iter().flatten().collect();
            if let Some(i) = row.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::Validation(format!(
                    "order n={n}: non-finite entry T^({},{})",
                    i / p + 1,
                    i % p + 1
                )));
            }
            flat.push(row);
        }
        Ok(TMatrixSet {
            labels,
            radius_a,
            omega,
            orders: flat,
            decay_floor: DEFAULT_DECAY_FLOOR,
        })
    }

    /// A set with every coefficient zero.
    pub fn zero(labels: Vec<String>, radius_a: f64, n_max: usize) -> Result<Self> {
        let p = labels.len();
        let orders = vec![vec![vec![Complex64::new(0.0, 0.0); p]; p]; n_max + 1];
        Self::new(labels, radius_a, None, orders)
    }

    pub fn with_decay_floor(mut self, floor: f64) -> Self {
        self.decay_floor = floor;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn radius_a(&self) -> f64 {
        self.radius_a
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }

    pub fn n_max(&self) -> usize {
        self.orders.len() - 1
    }

    /// `T_n^{qp}`: incident type `p`, scattered type `q`. Zero above `n_max`.
    #[inline]
    pub fn get(&self, n: usize, q: usize, p: usize) -> Complex64 {
        match self.orders.get(n) {
            Some(m) => m[q * self.p() + p],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Largest `|T_n^{qp}|` over all wave pairs at order `n`.
    pub fn order_magnitude(&self, n: usize) -> f64 {
        self.orders[n].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when the last stored order still exceeds the decay floor.
    pub fn is_under_truncated(&self) -> bool {
        self.order_magnitude(self.n_max()) > self.decay_floor
    }

    /// Smallest truncation keeping every order with some `|T_n^{qp}| >= threshold`,
    /// capped at `cap`.
    pub fn significant_order(&self, threshold: f64, cap: usize) -> usize {
        let last = (0..=self.n_max())
            .rev()
            .find(|&n| self.order_magnitude(n) >= threshold)
            .unwrap_or(0);
        last.min(cap)
    }

    /// Copy restricted to orders `0..=n_max` (zero-padded if longer).
    pub fn truncated(&self, n_max: usize) -> Self {
        let p = self.p();
        let mut orders: Vec<Vec<Complex64>> = self.orders.iter().take(n_max + 1).cloned().collect();
        orders.resize(n_max + 1, vec![Complex64::new(0.0, 0.0); p * p]);
        TMatrixSet {
            orders,
            ..self.clone()
        }
    }

    /// The single-wave set `T^{pp}` for wave `p`.
    pub fn diagonal_block(&self, p: usize) -> Self {
        let orders = self.orders.iter().map(|m| vec![m[p * self.p() + p]]).collect();
        TMatrixSet {
            labels: vec![self.labels[p].clone()],
            orders,
            ..self.clone()
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: TMatrixFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("T-matrix file: {e}")))?;
        file.into_set()
    }

    /// Serialize with native signs, tagged `convention: "paper"`.
    pub fn to_json_string(&self) -> String {
        let p = self.p();
        let orders = self
            .orders
            .iter()
            .map(|m| {
                (0..p)
                    .map(|q| (0..p).map(|pp| [m[q * p + pp].re, m[q * p + pp].im]).collect())
                    .collect()
            })
            .collect();
        let file = TMatrixFile {
            p,
            labels: self.labels.clone(),
            radius_a: self.radius_a,
            omega: self.omega,
            convention: Convention::Paper,
            orders,
        };
        serde_json::to_string_pretty(&file).expect("T-matrix serialization cannot fail")
    }
}

/// Sign convention of a T-matrix file. `linton-martin` coefficients are the
/// negatives of the native ones (`Z_n = -T_n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Paper,
    LintonMartin,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TMatrixFile {
    #[serde(rename = "P")]
    p: usize,
    labels: Vec<String>,
    radius_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    convention: Convention,
    /// `orders[n][q][p] = [re, im]`
    orders: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TMatrixFile {
    fn into_set(self) -> Result<TMatrixSet> {
        if self.labels.len() != self.p {
            return Err(Error::Validation(format!(
                "P = {} but {} labels given",
                self.p,
                self.labels.len()
            )));
        }
        let sign = match self.convention {
            Convention::Paper => 1.0,
            Convention::LintonMartin => -1.0,
        };
        let orders = self
            .orders
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .map(|row| row.into_iter().map(|[re, im]| Complex64::new(sign * re, sign * im)).collect())
                    .collect()
            })
            .collect();
        TMatrixSet::new(self.labels, self.radius_a, self.omega, orders)
    }
}

pub fn load_tmatrix(path: impl AsRef<Path>) -> Result<TMatrixSet> {
    let text = std::fs::read_to_string(path)?;
    TMatrixSet::from_json_str(&text)
}

pub fn save_tmatrix(t: &TMatrixSet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, t.to_json_string())?;
    Ok(())
}

/// True iff every off-diagonal `|T_n^{qp}|`, `q != p`, is at most `tol`.
pub fn is_decoupled(t: &TMatrixSet, tol: f64) -> bool {
    let p = t.p();
    (0..=t.n_max()).all(|n| {
        (0..p).all(|q| (0..p).all(|pp| q == pp || t.get(n, q, pp).norm() <= tol))
    })
}

/// How a host wave's wavenumber depends on angular frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveModel {
    /// `k = omega / speed + i attenuation`
    SpeedAttenuation { speed: f64, attenuation: f64 },
    /// Piecewise-linear in `(Re k, Im k)` between strictly increasing
    /// `omega` samples; no extrapolation.
    Tabulated { omega: Vec<f64>, k: Vec<Complex64> },
}

impl WaveModel {
    fn validate(&self) -> Result<()> {
        match self {
            WaveModel::SpeedAttenuation { speed, attenuation } => {
                if !(speed.is_finite() && *speed > 0.0) {
                    return Err(Error::Validation(format!("wave speed must be positive, got {speed}")));
                }
                if !(attenuation.is_finite() && *attenuation >= 0.0) {
                    return Err(Error::Validation(format!(
                        "attenuation must be non-negative (Im k >= 0), got {attenuation}"
                    )));
                }
            }
            WaveModel::Tabulated { omega, k } => {
                if omega.is_empty() || omega.len() != k.len() {
                    return Err(Error::Validation(
                        "tabulated wavenumbers need matching, non-empty omega and k lists".into(),
                    ));
                }
                if omega.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Validation("tabulated omega must be strictly increasing".into()));
                }
                if let Some(bad) = k.iter().find(|k| k.im < 0.0 || !k.re.is_finite() || !k.im.is_finite()) {
                    return Err(Error::Validation(format!(
                        "tabulated wavenumber {bad} violates Im k >= 0"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn wavenumber(&self, omega: f64) -> Result<Complex64> {
        match self {
            WaveModel::SpeedAttenuation { speed, attenuation } => {
                Ok(Complex64::new(omega / speed, *attenuation))
            }
            WaveModel::Tabulated { omega: w, k } => {
                let (first, last) = (w[0], w[w.len() - 1]);
                if omega < first || omega > last {
                    return Err(Error::Domain(format!(
                        "omega = {omega} outside tabulated range [{first}, {last}]"
                    )));
                }
                let i = w.partition_point(|&x| x <= omega);
                if i == w.len() {
                    return Ok(k[w.len() - 1]);
                }
                if i == 0 {
                    return Ok(k[0]);
                }
                let t = (omega - w[i - 1]) / (w[i] - w[i - 1]);
                Ok(k[i - 1] * (1.0 - t) + k[i] * t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostWave {
    pub label: String,
    pub model: WaveModel,
}

/// The bulk waves a host supports, ordered c, s, th.
#[derive(Debug, Clone, PartialEq)]
pub struct HostMedium {
    waves: Vec<HostWave>,
}

impl HostMedium {
    pub fn new(waves: Vec<HostWave>) -> Result<Self> {
        let labels: Vec<String> = waves.iter().map(|w| w.label.clone()).collect();
        validate_labels(&labels)?;
        for w in &waves {
            w.model.validate()?;
        }
        Ok(HostMedium { waves })
    }

    /// Lossless single-wave fluid with sound speed `speed`.
    pub fn fluid(speed: f64) -> Result<Self> {
        Self::new(vec![HostWave {
            label: "c".into(),
            model: WaveModel::SpeedAttenuation {
                speed,
                attenuation: 0.0,
            },
        }])
    }

    pub fn p(&self) -> usize {
        self.waves.len()
    }

    pub fn waves(&self) -> &[HostWave] {
        &self.waves
    }

    pub fn labels(&self) -> Vec<String> {
        self.waves.iter().map(|w| w.label.clone()).collect()
    }

    pub fn wavenumbers(&self, omega: f64) -> Result<Vec<Complex64>> {
        self.waves.iter().map(|w| w.model.wavenumber(omega)).collect()
    }
}

/// Number density, sphere radius and hole-correction radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    n0: f64,
    radius_a: f64,
    hole_b: f64,
}

impl MixtureSpec {
    pub fn new(n0: f64, radius_a: f64, hole_b: f64) -> Result<Self> {
        if !(n0.is_finite() && n0 >= 0.0) {
            return Err(Error::Validation(format!("number density must be >= 0, got {n0}")));
        }
        if !(radius_a.is_finite() && radius_a > 0.0) {
            return Err(Error::Validation(format!("sphere radius must be positive, got {radius_a}")));
        }
        if !(hole_b.is_finite() && hole_b > 2.0 * radius_a) {
            return Err(Error::Validation(format!(
                "hole radius b = {hole_b} must exceed 2a = {}",
                2.0 * radius_a
            )));
        }
        Ok(MixtureSpec { n0, radius_a, hole_b })
    }

    pub fn from_volume_fraction(phi: f64, radius_a: f64, hole_b: f64) -> Result<Self> {
        if !(phi.is_finite() && (0.0..1.0).contains(&phi)) {
            return Err(Error::Validation(format!("volume fraction must lie in [0, 1), got {phi}")));
        }
        let n0 = phi / (4.0 / 3.0 * std::f64::consts::PI * radius_a.powi(3));
        Self::new(n0, radius_a, hole_b)
    }

    pub fn with_number_density(&self, n0: f64) -> Result<Self> {
        Self::new(n0, self.radius_a, self.hole_b)
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn radius_a(&self) -> f64 {
        self.radius_a
    }

    pub fn hole_b(&self) -> f64 {
        self.hole_b
    }

    /// `-4 i n0`
    pub fn epsilon(&self) -> Complex64 {
        Complex64::new(0.0, -4.0 * self.n0)
    }

    pub fn volume_fraction(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius_a.powi(3) * self.n0
    }
}

/// Material of a homogeneous inviscid fluid sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidSphere {
    /// kg/m^3
    pub density: f64,
    /// m/s
    pub speed: f64,
}

/// Coefficients `T_n` (`n = 0..=n_max`) of a fluid sphere in a single-wave
/// fluid host, from continuity of pressure and normal velocity at `r = a`.
pub fn fluid_sphere_tmatrix(
    host: &HostMedium,
    host_density: f64,
    sphere: FluidSphere,
    radius_a: f64,
    omega: f64,
    n_max: usize,
) -> Result<TMatrixSet> {
    if host.p() != 1 {
        return Err(Error::Validation(format!(
            "fluid-sphere model needs a single-wave host, got P = {}",
            host.p()
        )));
    }
    for (name, v) in [
        ("host density", host_density),
        ("sphere density", sphere.density),
        ("sphere speed", sphere.speed),
        ("radius", radius_a),
        ("omega", omega),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Validation(format!("{name} must be positive, got {v}")));
        }
    }
    let k = host.wavenumbers(omega)?[0];
    let k1 = Complex64::new(omega / sphere.speed, 0.0);
    let (x, x1) = (k * radius_a, k1 * radius_a);
    let (j, jd) = spherical_jn_with_derivative(n_max, x)?;
    let (h, hd) = spherical_h1n_with_derivative(n_max, x)?;
    let (ji, jid) = spherical_jn_with_derivative(n_max, x1)?;
    let outer = k / host_density;
    let inner = k1 / sphere.density;

    let mut orders = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let num = inner * j[n] * jid[n] - outer * jd[n] * ji[n];
        let a1 = inner * h[n] * jid[n];
        let a2 = outer * hd[n] * ji[n];
        let den = a1 - a2;
        if den.norm() <= 1e-14 * a1.norm().max(a2.norm()) || den.norm() == 0.0 {
            return Err(Error::Conditioning(format!(
                "boundary system for order n={n} is singular (|det| = {:e})",
                den.norm()
            )));
        }
        orders.push(vec![vec![-num / den]]);
    }
    Ok(TMatrixSet::new(host.labels(), radius_a, Some(omega), orders)?)
}
