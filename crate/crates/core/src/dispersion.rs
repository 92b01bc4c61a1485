//! Effective wavenumbers `xi_p`, one per host wave.
//!
//! With `y_p = xi^2 - k_p^2` and `eps = -4 i n0` the coherent wavenumbers are
//! the roots of `det(y_q delta_qp - eps M_qp(xi)) = 0`. Besides the root
//! solver this module provides the second-order expansions
//!
//! ```text
//! xi_p^2 = k_p^2 + eps M_pp^(0) + eps^2 [ M_pp^(1)(k_p) + sum_{q!=p} M_pq^(0) M_qp^(0) / (k_p^2 - k_q^2) ]
//! ```
//!
//! its `k b -> 0` form, and the far-field route for the fastest wave.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield::{self, CouplingForm};
use crate::modal::{ModalSystem, Regime};
use crate::quadrature::QuadOptions;
use crate::tmatrix::is_decoupled;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Volume fraction above which results carry a dilute-regime warning.
pub const DILUTE_LIMIT: f64 = 0.1;
/// `|k_p| b` above which the low-frequency formula carries a warning.
pub const LOWFREQ_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AsymptoticO2,
    LowfreqO2,
    LloydBerry,
    Determinant,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::AsymptoticO2,
        Method::LowfreqO2,
        Method::LloydBerry,
        Method::Determinant,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::AsymptoticO2 => "asymptotic_o2",
            Method::LowfreqO2 => "lowfreq_o2",
            Method::LloydBerry => "lloyd_berry",
            Method::Determinant => "determinant",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveWavenumber {
    /// 0-based host wave index.
    pub wave: usize,
    pub label: String,
    pub xi: Complex64,
    pub xi_squared: Complex64,
    pub method: Method,
    /// Order in the number density (0 for the determinant root).
    pub order: u32,
    pub n_max: usize,
    /// `|det D|` at the root, determinant method only.
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub warnings: Vec<String>,
}

impl EffectiveWavenumber {
    fn new(system: &ModalSystem, p: usize, xi_squared: Complex64, method: Method, order: u32) -> Self {
        EffectiveWavenumber {
            wave: p,
            label: system.tmatrix().labels()[p].clone(),
            xi: xi_from_square(xi_squared, system.ks()[p]),
            xi_squared,
            method,
            order,
            n_max: system.n_max(),
            residual: None,
            iterations: None,
            warnings: base_warnings(system),
        }
    }

    pub fn phase_velocity(&self, omega: f64) -> f64 {
        omega / self.xi.re
    }

    pub fn attenuation(&self) -> f64 {
        self.xi.im
    }
}

/// Square root of `xi_sq` with `Im xi >= 0` (and `Re xi > 0` when real).
/// Returns `k_p` itself when `xi_sq == k_p^2` and `k_p` satisfies the rule.
pub fn xi_from_square(xi_sq: Complex64, k_p: Complex64) -> Complex64 {
    let admissible = |z: Complex64| z.im > 0.0 || (z.im == 0.0 && z.re > 0.0);
    if xi_sq == k_p * k_p && admissible(k_p) {
        return k_p;
    }
    let r = xi_sq.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Branch used inside the root solver: the root continuous from `k_p`.
fn xi_near(s: Complex64, k_p: Complex64) -> Complex64 {
    if s == k_p * k_p {
        return k_p;
    }
    k_p * (s / (k_p * k_p)).sqrt()
}

fn base_warnings(system: &ModalSystem) -> Vec<String> {
    let mut w = system.warnings().to_vec();
    let phi = system.mixture().volume_fraction();
    if phi > DILUTE_LIMIT {
        w.push(format!("volume fraction {phi:.4} exceeds dilute limit {DILUTE_LIMIT}"));
    }
    w
}

/// Second-order expansion at general frequency.
pub fn wavenumber_asymptotic_o2(p: usize, system: &ModalSystem) -> Result<EffectiveWavenumber> {
    let ks = system.ks();
    let kp = ks[p];
    let y1 = system.m_order0(p, p);
    let mut y2 = system.m_order1_diag(p, Regime::General)?;
    for q in 0..system.p() {
        if q == p || !system.coupled(q, p) {
            continue;
        }
        system.check_distinct(q, p)?;
        y2 += system.m_order0(p, q) * system.m_order0(q, p) / (kp * kp - ks[q] * ks[q]);
    }
    let eps = system.epsilon();
    let xi_sq = kp * kp + eps * y1 + eps * eps * y2;
    Ok(EffectiveWavenumber::new(system, p, xi_sq, Method::AsymptoticO2, 2))
}

/// Coefficients `(c1, c2)` of `xi^2 = k^2 + c1 n0 + c2 n0^2` in the `k b -> 0`
/// limit, directly in terms of T-matrix sums:
///
/// ```text
/// c1 = -4 i pi / k sum (2n+1) T_n^{pp}
/// c2 = -8 pi^2 / k^4 sum_{n,nu,l} (2n+1)(2nu+1) G(nu,n,l) { l T_n^{pp} T_nu^{pp}
///      + sum_{q!=p} 2 k^3 / (k_q (k^2 - k_q^2)) (k/k_q)^l T_n^{qp} T_nu^{pq} }
/// ```
pub fn lowfreq_coefficients(p: usize, system: &ModalSystem) -> Result<(Complex64, Complex64)> {
    let ks = system.ks();
    let k = ks[p];
    let t = system.tmatrix();
    let gaunt = system.gaunt();
    let n_max = system.n_max();

    let first: Complex64 = (0..=n_max).map(|n| t.get(n, p, p) * (2 * n + 1) as f64).sum();
    let mut second = Complex64::new(0.0, 0.0);
    for n in 0..=n_max {
        let a = t.get(n, p, p) * (2 * n + 1) as f64;
        if a.norm() == 0.0 {
            continue;
        }
        for nu in 0..=n_max {
            let b = t.get(nu, p, p) * (2 * nu + 1) as f64;
            let lg: f64 = gaunt.terms(n, nu).map(|(l, g)| l as f64 * g).sum();
            second += a * b * lg;
        }
    }
    for q in 0..system.p() {
        if q == p || !system.coupled(q, p) {
            continue;
        }
        system.check_distinct(q, p)?;
        let kq = ks[q];
        let kappa = k / kq;
        let weight = 2.0 * k.powu(3) / (kq * (k * k - kq * kq));
        let powers: Vec<Complex64> = (0..=2 * n_max).map(|l| kappa.powu(l as u32)).collect();
        let mut s = Complex64::new(0.0, 0.0);
        for n in 0..=n_max {
            let a = t.get(n, q, p) * (2 * n + 1) as f64;
            if a.norm() == 0.0 {
                continue;
            }
            for nu in 0..=n_max {
                let b = t.get(nu, p, q) * (2 * nu + 1) as f64;
                let g: Complex64 = gaunt.terms(n, nu).map(|(l, g)| powers[l] * g).sum();
                s += a * b * g;
            }
        }
        second += weight * s;
    }
    Ok((-4.0 * I * PI / k * first, -8.0 * PI * PI / k.powu(4) * second))
}

/// Second-order `k b -> 0` expansion; see [`lowfreq_coefficients`].
pub fn wavenumber_lowfreq_o2(p: usize, system: &ModalSystem) -> Result<EffectiveWavenumber> {
    let k = system.ks()[p];
    let n0 = system.mixture().n0();
    let (c1, c2) = lowfreq_coefficients(p, system)?;
    let xi_sq = k * k + (c1 * n0 + c2 * (n0 * n0));
    let mut out = EffectiveWavenumber::new(system, p, xi_sq, Method::LowfreqO2, 2);
    let kb = k.norm() * system.mixture().hole_b();
    if kb > LOWFREQ_LIMIT {
        out.warnings.push(format!("|k| b = {kb:.4} exceeds low-frequency limit {LOWFREQ_LIMIT}"));
    }
    Ok(out)
}

/// Far-field route `xi^2 = k_p^2 + delta_1 n0 + (delta_2 + delta_2^(c)) n0^2`.
///
/// Wave `p` must be faster than every wave it couples to; otherwise a regime
/// error is returned and the low-frequency expansion should be used instead.
pub fn wavenumber_lloyd_berry(p: usize, system: &ModalSystem, quad: QuadOptions) -> Result<EffectiveWavenumber> {
    let t = system.tmatrix();
    let ks = system.ks();
    let k = ks[p];
    let n0 = system.mixture().n0();
    let dc = farfield::delta2_coupling(t, p, ks, CouplingForm::Integral, system.gaunt(), quad)?;
    let d1 = farfield::delta1(t, p, k);
    let d2 = farfield::delta2(t, p, k, 0.0, quad)?;
    let xi_sq = k * k + d1 * n0 + (d2 + dc) * (n0 * n0);
    Ok(EffectiveWavenumber::new(system, p, xi_sq, Method::LloydBerry, 2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when `|step| / |k_p^2|` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Central-difference step relative to `|k_p^2|`.
    pub diff_step: f64,
    /// Roots closer than this (relative) are reported as a collision.
    pub collision_tol: f64,
    pub quad: QuadOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 50,
            diff_step: 1e-6,
            collision_tol: 1e-8,
            quad: farfield::default_quadrature(),
        }
    }
}

fn det3(m: &[Vec<Complex64>]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `det(y_q delta_qp - eps M_qp(xi))` at `xi^2 = s`, on the branch through `k_p`.
pub fn determinant(system: &ModalSystem, p: usize, s: Complex64) -> Result<Complex64> {
    let ks = system.ks();
    let eps = system.epsilon();
    let m = system.m_full_matrix_sq(xi_near(s, ks[p]), s)?;
    let np = system.p();
    let d: Vec<Vec<Complex64>> = (0..np)
        .map(|q| {
            (0..np)
                .map(|r| {
                    let diag = if q == r { s - ks[q] * ks[q] } else { Complex64::new(0.0, 0.0) };
                    diag - eps * m[q][r]
                })
                .collect()
        })
        .collect();
    Ok(match np {
        1 => d[0][0],
        2 => d[0][0] * d[1][1] - d[0][1] * d[1][0],
        3 => det3(&d),
        _ => nalgebra::DMatrix::from_fn(np, np, |i, j| d[i][j]).determinant(),
    })
}

struct Root {
    s: Complex64,
    residual: f64,
    iterations: usize,
    muller: bool,
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn find_root(system: &ModalSystem, p: usize, seed: Complex64, opts: &SolverOptions) -> Result<Root> {
    let kp = system.ks()[p];
    let scale = (kp * kp).norm();
    let h = opts.diff_step * scale;
    let f = |s: Complex64| determinant(system, p, s);

    let mut s = seed;
    let mut g = f(s)?;
    if g.norm() == 0.0 {
        return Ok(Root {
            s,
            residual: 0.0,
            iterations: 0,
            muller: false,
        });
    }
    let mut last_step = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let gp = (f(s + h)? - f(s - h)?) / (2.0 * h);
        let step = g / gp;
        if !finite(step) {
            return muller(system, p, s, opts, it);
        }
        last_step = step.norm() / scale;
        // backtrack while the residual grows
        let mut lambda = 1.0;
        let mut next = s - step;
        let mut g_next = f(next)?;
        while g_next.norm() > g.norm() && lambda > 1.0 / 64.0 && last_step >= opts.tol {
            lambda *= 0.5;
            next = s - step * lambda;
            g_next = f(next)?;
        }
        if g_next.norm() > g.norm() && last_step >= opts.tol {
            return muller(system, p, s, opts, it);
        }
        s = next;
        g = g_next;
        if last_step < opts.tol || g.norm() == 0.0 {
            return Ok(Root {
                s,
                residual: g.norm(),
                iterations: it,
                muller: false,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_step,
    })
}

fn muller(system: &ModalSystem, p: usize, start: Complex64, opts: &SolverOptions, used: usize) -> Result<Root> {
    let kp = system.ks()[p];
    let scale = (kp * kp).norm();
    let f = |s: Complex64| determinant(system, p, s);
    let d = 1e-4 * scale;
    let (mut x0, mut x1, mut x2) = (start - d, start + d, start);
    let (mut f0, mut f1, mut f2) = (f(x0)?, f(x1)?, f(x2)?);
    let mut last_step = f64::INFINITY;
    for it in used..=opts.max_iter {
        let (h1, h2) = (x1 - x0, x2 - x1);
        let (d1, d2) = ((f1 - f0) / h1, (f2 - f1) / h2);
        let a = (d2 - d1) / (h2 + h1);
        let b = a * h2 + d2;
        let disc = (b * b - 4.0 * a * f2).sqrt();
        let den = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        let dx = -2.0 * f2 / den;
        if !finite(dx) {
            break;
        }
        let x3 = x2 + dx;
        last_step = dx.norm() / scale;
        let f3 = f(x3)?;
        (x0, x1, x2) = (x1, x2, x3);
        (f0, f1, f2) = (f1, f2, f3);
        if last_step < opts.tol || f3.norm() == 0.0 {
            return Ok(Root {
                s: x3,
                residual: f3.norm(),
                iterations: it,
                muller: true,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_step,
    })
}

/// Root of the full truncated determinant nearest `seed` (a trial `xi^2`;
/// defaults to the second-order expansion, or `k_p^2` if that fails).
///
/// Decoupled T-matrices are solved on the single-wave block of `p`.
pub fn solve_determinant(
    p: usize,
    system: &ModalSystem,
    seed: Option<Complex64>,
    opts: &SolverOptions,
) -> Result<EffectiveWavenumber> {
    if system.p() > 1 && is_decoupled(system.tmatrix(), 0.0) {
        let sub = system.diagonal_subsystem(p);
        let mut r = solve_determinant(0, &sub, seed, opts)?;
        r.wave = p;
        r.label = system.tmatrix().labels()[p].clone();
        r.warnings = base_warnings(system);
        return Ok(r);
    }
    let kp = system.ks()[p];
    let seed = match seed {
        Some(s) => s,
        None => wavenumber_asymptotic_o2(p, system)
            .map(|r| r.xi_squared)
            .unwrap_or(kp * kp),
    };
    let root = find_root(system, p, seed, opts)?;
    let mut out = EffectiveWavenumber::new(system, p, root.s, Method::Determinant, 0);
    out.residual = Some(root.residual);
    out.iterations = Some(root.iterations);
    if root.muller {
        out.warnings.push("Newton stagnated; root polished by Muller iteration".into());
    }
    let inner = xi_near(root.s, kp);
    if (inner - out.xi).norm() > 1e-8 * out.xi.norm() {
        out.warnings
            .push(format!("root {} lies off the attenuated branch continued from k_p", inner));
    }
    Ok(out)
}

/// Determinant roots for every wave, flagging pairs that converged together.
pub fn solve_determinant_all(system: &ModalSystem, opts: &SolverOptions) -> Vec<Result<EffectiveWavenumber>> {
    let mut roots: Vec<Result<EffectiveWavenumber>> =
        (0..system.p()).map(|p| solve_determinant(p, system, None, opts)).collect();
    let values: Vec<Option<Complex64>> = roots.iter().map(|r| r.as_ref().ok().map(|e| e.xi_squared)).collect();
    for i in 0..values.len() {
        for j in 0..values.len() {
            if i == j {
                continue;
            }
            if let (Some(a), Some(b)) = (values[i], values[j]) {
                if (a - b).norm() <= opts.collision_tol * a.norm().max(b.norm()) {
                    if let Ok(r) = roots[i].as_mut() {
                        r.warnings
                            .push(format!("root collision: waves {} and {} converged to the same root", i + 1, j + 1));
                    }
                }
            }
        }
    }
    roots
}

/// One attempted (method, wave) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub wave: usize,
    pub result: std::result::Result<EffectiveWavenumber, String>,
}

/// All requested methods for all waves at one frequency and concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub omega: f64,
    pub n0: f64,
    pub radius_a: f64,
    pub hole_b: f64,
    pub n_max: usize,
    pub outcomes: Vec<MethodOutcome>,
}

impl DispersionResult {
    pub fn compute(system: &ModalSystem, omega: f64, methods: &[Method], opts: &SolverOptions) -> Self {
        let mut outcomes = Vec::new();
        for &method in methods {
            let results: Vec<Result<EffectiveWavenumber>> = match method {
                Method::Determinant => solve_determinant_all(system, opts),
                _ => (0..system.p())
                    .map(|p| match method {
                        Method::AsymptoticO2 => wavenumber_asymptotic_o2(p, system),
                        Method::LowfreqO2 => wavenumber_lowfreq_o2(p, system),
                        _ => wavenumber_lloyd_berry(p, system, opts.quad),
                    })
                    .collect(),
            };
            for (wave, r) in results.into_iter().enumerate() {
                outcomes.push(MethodOutcome {
                    method,
                    wave,
                    result: r.map_err(|e| e.to_string()),
                });
            }
        }
        let mix = system.mixture();
        DispersionResult {
            omega,
            n0: mix.n0(),
            radius_a: mix.radius_a(),
            hole_b: mix.hole_b(),
            n_max: system.n_max(),
            outcomes,
        }
    }
}
