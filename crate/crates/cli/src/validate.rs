//! Identity checks runnable from the command line. Each check reports the
//! measured quantity next to its bound; a suite fails if any check does.

use std::f64::consts::PI;

use coherent_core::farfield::default_quadrature;
use coherent_core::specfun::{legendre_pn, spherical_h1n_with_derivative, spherical_jn_array, spherical_jn_with_derivative};
use coherent_core::{
    delta1, delta2, delta2_coupling, gaunt0, integrate, lowfreq_coefficients, s_kappa_integral, s_kappa_series,
    solve_determinant, wavenumber_asymptotic_o2, wavenumber_lloyd_berry, wavenumber_lowfreq_o2, Complex64,
    CouplingForm, EffectiveWavenumber, GauntTable, ModalSystem, QuadOptions, SolverOptions, TMatrixSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Seed for every randomized check; reports are reproducible.
pub const SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Gaunt,
    Bessel,
    SIdentity,
    Decoupling,
    AsymptoticScaling,
    LloydBerryP1,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Gaunt,
        Suite::Bessel,
        Suite::SIdentity,
        Suite::Decoupling,
        Suite::AsymptoticScaling,
        Suite::LloydBerryP1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Gaunt => "gaunt",
            Suite::Bessel => "bessel",
            Suite::SIdentity => "s_identity",
            Suite::Decoupling => "decoupling",
            Suite::AsymptoticScaling => "asymptotic_scaling",
            Suite::LloydBerryP1 => "lloyd_berry_p1",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// pass iff measured <= tolerance
    AtMost,
    /// pass iff measured >= tolerance
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn new(suite: Suite, name: &str, measured: f64, tolerance: f64, bound: Bound) -> Self {
        let passed = match bound {
            Bound::AtMost => measured <= tolerance,
            Bound::AtLeast => measured >= tolerance,
        };
        Check {
            suite: suite.name().into(),
            name: name.into(),
            measured,
            tolerance,
            bound,
            passed,
            detail: None,
        }
    }

    fn failed(suite: Suite, name: &str, reason: String) -> Self {
        Check {
            suite: suite.name().into(),
            name: name.into(),
            measured: f64::NAN,
            tolerance: f64::NAN,
            bound: Bound::AtMost,
            passed: false,
            detail: Some(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub passed: bool,
    pub tolerance_scale: f64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let op = match c.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            out.push_str(&format!(
                "{} {}/{}: {:.3e} {op} {:.3e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.measured,
                c.tolerance
            ));
            if let Some(d) = &c.detail {
                out.push_str(&format!(" ({d})"));
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

pub type GauntFn = fn(usize, usize, usize) -> f64;

/// Runs suites with a pluggable Gaunt routine and a common multiplier on
/// every upper-bound tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Validator {
    pub gaunt: GauntFn,
    pub tolerance_scale: f64,
}

impl Default for Validator {
    fn default() -> Self {
        Validator {
            gaunt: gaunt0,
            tolerance_scale: 1.0,
        }
    }
}

impl Validator {
    pub fn run(&self, suite: Suite) -> Report {
        let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
        let mut checks = Vec::new();
        for s in suites {
            let raw = match s {
                Suite::Gaunt => gaunt_checks(self.gaunt),
                Suite::Bessel => bessel_checks(),
                Suite::SIdentity => s_identity_checks(),
                Suite::Decoupling => decoupling_checks(),
                Suite::AsymptoticScaling => asymptotic_scaling_checks(),
                Suite::LloydBerryP1 => lloyd_berry_checks(),
                Suite::All => unreachable!(),
            };
            checks.extend(raw.into_iter().map(|c| self.rescale(c)));
        }
        Report {
            passed: checks.iter().all(|c| c.passed),
            tolerance_scale: self.tolerance_scale,
            checks,
        }
    }

    fn rescale(&self, mut c: Check) -> Check {
        if c.bound == Bound::AtMost && c.tolerance.is_finite() {
            c.tolerance *= self.tolerance_scale;
            c.passed = c.measured <= c.tolerance;
        }
        c
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Gaunt checks for `n, nu <= 25`: unit sum over `l`, exact zeros off the
/// parity/triangle support, exact symmetry, and agreement with a direct
/// triple-Legendre quadrature for `n, nu <= 8`.
pub fn gaunt_checks(gaunt: GauntFn) -> Vec<Check> {
    const N: usize = 25;
    let (mut sum_err, mut zero_err, mut sym_err) = (0.0f64, 0.0f64, 0.0f64);
    for n in 0..=N {
        for nu in 0..=N {
            let mut sum = 0.0;
            for l in 0..=2 * N + 1 {
                let g = gaunt(n, nu, l);
                let inside = l >= n.abs_diff(nu) && l <= n + nu && (n + nu + l) % 2 == 0;
                if inside {
                    sum += g;
                } else {
                    zero_err = zero_err.max(g.abs());
                }
                sym_err = sym_err.max((g - gaunt(nu, n, l)).abs());
            }
            sum_err = sum_err.max((sum - 1.0).abs());
        }
    }
    let mut quad_err = 0.0f64;
    let opts = QuadOptions::relative(1e-14);
    for n in 0..=8usize {
        for nu in 0..=8 {
            for l in (n.abs_diff(nu)..=n + nu).step_by(2) {
                let f = |t: f64| {
                    let x = t.cos();
                    let v = legendre_pn(n, x).unwrap() * legendre_pn(nu, x).unwrap() * legendre_pn(l, x).unwrap();
                    Complex64::new(v * t.sin(), 0.0)
                };
                let oracle = match integrate(f, 0.0, PI, opts) {
                    Ok(r) => r.value.re * (2 * l + 1) as f64 / 2.0,
                    Err(e) => return vec![Check::failed(Suite::Gaunt, "quadrature oracle", e.to_string())],
                };
                quad_err = quad_err.max((gaunt(n, nu, l) - oracle).abs());
            }
        }
    }
    vec![
        Check::new(Suite::Gaunt, "sum rule: sum_l G(n,nu,l) = 1", sum_err, 1e-12, Bound::AtMost),
        Check::new(Suite::Gaunt, "parity and triangle zeros", zero_err, 0.0, Bound::AtMost),
        Check::new(Suite::Gaunt, "symmetry in (n, nu)", sym_err, 0.0, Bound::AtMost),
        Check::new(Suite::Gaunt, "triple-Legendre quadrature", quad_err, 1e-12, Bound::AtMost),
    ]
}

/// 100 points `z = r e^{i phi}` with `r` log-spaced on [0.1, 50] and
/// `phi` on [0, pi].
pub fn bessel_grid() -> Vec<Complex64> {
    let mut z = Vec::with_capacity(100);
    for i in 0..10 {
        let r = 0.1 * (500f64).powf(i as f64 / 9.0);
        for j in 0..10 {
            z.push(Complex64::from_polar(r, PI * j as f64 / 9.0));
        }
    }
    z
}

/// Largest `|j_n h_n' - j_n' h_n - i/z^2| |z^2|` over the grid and `n <= 20`.
pub fn wronskian_defect() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for z in bessel_grid() {
        let (j, jd) = spherical_jn_with_derivative(20, z).map_err(|e| e.to_string())?;
        let (h, hd) = spherical_h1n_with_derivative(20, z).map_err(|e| e.to_string())?;
        let target = Complex64::i() / (z * z);
        for n in 0..=20 {
            let w = j[n] * hd[n] - jd[n] * h[n];
            worst = worst.max(((w - target) * z * z).norm());
        }
    }
    Ok(worst)
}

fn bessel_checks() -> Vec<Check> {
    let mut out = vec![match wronskian_defect() {
        Ok(w) => Check::new(Suite::Bessel, "Wronskian", w, 1e-10, Bound::AtMost),
        Err(e) => Check::failed(Suite::Bessel, "Wronskian", e),
    }];
    // three-term recurrence across the |z| = n switchover, scaled by the
    // largest term so that zeros of j_n do not inflate the measure
    let mut worst = 0.0f64;
    for z in bessel_grid() {
        let j = match spherical_jn_array(41, z) {
            Ok(j) => j,
            Err(e) => return vec![out.remove(0), Check::failed(Suite::Bessel, "recurrence", e.to_string())],
        };
        for n in 1..=40 {
            let mid = j[n] * (2 * n + 1) as f64 / z;
            let scale = j[n - 1].norm() + j[n + 1].norm() + mid.norm();
            worst = worst.max((j[n - 1] + j[n + 1] - mid).norm() / scale);
        }
    }
    out.push(Check::new(Suite::Bessel, "three-term recurrence", worst, 1e-12, Bound::AtMost));
    out
}

/// Reference cases shared by the checks and the benchmarks of the command line.
pub mod fixtures {
    use super::*;
    use coherent_core::{fluid_sphere_tmatrix, FluidSphere, HostMedium, MixtureSpec, WAVE_LABELS};

    pub fn labels(p: usize) -> Vec<String> {
        WAVE_LABELS[..p].iter().map(|s| s.to_string()).collect()
    }

    /// Fluid sphere (density 2, speed 1.5 relative to the host) of unit
    /// radius at `k a = ka`, hole radius 2.1.
    pub fn demo_sphere(ka: f64, phi: f64) -> ModalSystem {
        let host = HostMedium::fluid(1.0).expect("valid host");
        let t = fluid_sphere_tmatrix(&host, 1.0, FluidSphere { density: 2.0, speed: 1.5 }, 1.0, ka, 30)
            .expect("regular sphere");
        let mix = MixtureSpec::from_volume_fraction(phi, 1.0, 2.1).expect("valid mixture");
        ModalSystem::new(vec![Complex64::new(ka, 0.0)], &t, mix).expect("valid system")
    }

    /// Three-wave set with geometric decay; off-diagonal entries zero when
    /// `coupled` is false.
    pub fn synthetic3(coupled: bool) -> TMatrixSet {
        let orders = (0..=3)
            .map(|n| {
                let decay = 0.3f64.powi(n);
                (0..3)
                    .map(|q| {
                        (0..3)
                            .map(|p| {
                                if !coupled && q != p {
                                    return Complex64::new(0.0, 0.0);
                                }
                                let s = (q * 3 + p + 1) as f64;
                                Complex64::new(0.05 * decay * (0.7 + 0.1 * s).sin(), 0.04 * decay * (0.3 * s).cos().abs())
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TMatrixSet::new(labels(3), 0.2, None, orders).expect("consistent dimensions")
    }

    /// Compressional, shear and thermal wavenumbers in increasing magnitude.
    pub fn ks3() -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.01), Complex64::new(2.5, 0.4), Complex64::new(4.0, 3.0)]
    }

    pub fn system3(t: &TMatrixSet, n0: f64) -> ModalSystem {
        let mix = MixtureSpec::new(n0, 0.2, 0.5).expect("valid mixture");
        ModalSystem::with_truncation(ks3(), t, mix, 3).expect("valid system")
    }

    /// Random three-wave set, entries uniform in the unit square times
    /// `0.1 * decay^n`.
    pub fn random3(rng: &mut ChaCha8Rng, n_max: usize, coupled: bool) -> TMatrixSet {
        let decay: f64 = rng.gen_range(0.05..0.5);
        let orders = (0..=n_max)
            .map(|n| {
                let s = 0.1 * decay.powi(n as i32);
                (0..3)
                    .map(|q| {
                        (0..3)
                            .map(|p| {
                                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s;
                                if coupled || q == p { v } else { Complex64::new(0.0, 0.0) }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TMatrixSet::new(labels(3), 0.1, None, orders).expect("consistent dimensions")
    }

    /// Random two-wave set with geometric decay.
    pub fn random_pair(rng: &mut ChaCha8Rng, n_max: usize) -> TMatrixSet {
        let decay: f64 = rng.gen_range(0.05..0.5);
        let orders = (0..=n_max)
            .map(|n| {
                let s = 0.1 * decay.powi(n as i32);
                (0..2)
                    .map(|_| {
                        (0..2)
                            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TMatrixSet::new(labels(2), 0.1, None, orders).expect("consistent dimensions")
    }
}

/// Largest relative series/integral mismatch of the coupling sum over 50
/// random pairs and `kappa` in {0.1, 0.5, 0.9} x {1, e^{i pi/4}}.
pub fn s_series_integral_defect() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let gaunt = GauntTable::new(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let t = fixtures::random_pair(&mut rng, 6);
        for r in [0.1, 0.5, 0.9] {
            for phase in [0.0, PI / 4.0] {
                let kappa = Complex64::from_polar(r, phase);
                let s = s_kappa_series(&t, 1, 0, kappa, &gaunt).value;
                let i = s_kappa_integral(&t, 1, 0, kappa, default_quadrature()).map_err(|e| e.to_string())?;
                worst = worst.max(rel(i, s));
            }
        }
    }
    Ok(worst)
}

/// Largest relative mismatch between the two forms of the coupling
/// correction on random coupled three-wave sets, fastest wave first.
pub fn coupling_forms_defect() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let gaunt = GauntTable::new(5);
    let mut worst = 0.0f64;
    let mut sets = vec![fixtures::synthetic3(true)];
    sets.extend((0..10).map(|_| fixtures::random3(&mut rng, 5, true)));
    for t in &sets {
        let s = delta2_coupling(t, 0, &fixtures::ks3(), CouplingForm::Series, &gaunt, default_quadrature())
            .map_err(|e| e.to_string())?;
        let i = delta2_coupling(t, 0, &fixtures::ks3(), CouplingForm::Integral, &gaunt, default_quadrature())
            .map_err(|e| e.to_string())?;
        worst = worst.max(rel(i, s));
    }
    Ok(worst)
}

/// Largest `|delta_2^(c)|` (both forms) for block-diagonal sets.
pub fn decoupled_coupling_magnitude() -> Result<f64, String> {
    let gaunt = GauntTable::new(3);
    let t = fixtures::synthetic3(false);
    let mut worst = 0.0f64;
    for form in [CouplingForm::Series, CouplingForm::Integral] {
        let d = delta2_coupling(&t, 0, &fixtures::ks3(), form, &gaunt, default_quadrature()).map_err(|e| e.to_string())?;
        worst = worst.max(d.norm());
    }
    Ok(worst)
}

fn s_identity_checks() -> Vec<Check> {
    let s = Suite::SIdentity;
    vec![
        match s_series_integral_defect() {
            Ok(v) => Check::new(s, "S(kappa) series = integral", v, 1e-8, Bound::AtMost),
            Err(e) => Check::failed(s, "S(kappa) series = integral", e),
        },
        match coupling_forms_defect() {
            Ok(v) => Check::new(s, "coupling correction, series form = integral form", v, 1e-8, Bound::AtMost),
            Err(e) => Check::failed(s, "coupling correction, series form = integral form", e),
        },
        match decoupled_coupling_magnitude() {
            Ok(v) => Check::new(s, "coupling correction vanishes without conversion", v, 0.0, Bound::AtMost),
            Err(e) => Check::failed(s, "coupling correction vanishes without conversion", e),
        },
    ]
}

type MethodFn = fn(usize, &ModalSystem) -> coherent_core::Result<EffectiveWavenumber>;

fn all_methods() -> [(&'static str, MethodFn); 4] {
    [
        ("asymptotic_o2", wavenumber_asymptotic_o2),
        ("lowfreq_o2", wavenumber_lowfreq_o2),
        ("lloyd_berry", |p, s| wavenumber_lloyd_berry(p, s, default_quadrature())),
        ("determinant", |p, s| solve_determinant(p, s, None, &SolverOptions::default())),
    ]
}

/// Largest relative difference between each method on a block-diagonal
/// three-wave system and the same method on each single-wave block.
pub fn decoupling_defect() -> Result<f64, String> {
    let sys = fixtures::system3(&fixtures::synthetic3(false), 0.3);
    let mut worst = 0.0f64;
    for p in 0..3 {
        let sub = sys.diagonal_subsystem(p);
        for (name, f) in all_methods() {
            let a = f(p, &sys).map_err(|e| format!("{name}, wave {}: {e}", p + 1))?;
            let b = f(0, &sub).map_err(|e| format!("{name}, single wave {}: {e}", p + 1))?;
            worst = worst.max(rel(a.xi, b.xi));
        }
    }
    Ok(worst)
}

fn decoupling_checks() -> Vec<Check> {
    vec![match decoupling_defect() {
        Ok(v) => Check::new(Suite::Decoupling, "block-diagonal = per-wave", v, 1e-10, Bound::AtMost),
        Err(e) => Check::failed(Suite::Decoupling, "block-diagonal = per-wave", e),
    }]
}

/// Log-log slope of `|xi^2_det - xi^2_asym|` against the number density,
/// from densities `base * {1, 1/2, 1/4, 1/8}`.
pub fn defect_slope(base: &ModalSystem, p: usize, n0: f64) -> Result<(f64, Vec<f64>), String> {
    let mut defects = Vec::new();
    for f in [1.0, 0.5, 0.25, 0.125] {
        let s = base.with_number_density(n0 * f).map_err(|e| e.to_string())?;
        let a = wavenumber_asymptotic_o2(p, &s).map_err(|e| e.to_string())?.xi_squared;
        let d = solve_determinant(p, &s, None, &SolverOptions::default()).map_err(|e| e.to_string())?.xi_squared;
        defects.push((a - d).norm());
    }
    let slope = (defects[0] / defects[3]).ln() / 8f64.ln();
    Ok((slope, defects))
}

/// Smallest defect slope over the single-wave sphere and every wave of the
/// coupled three-wave case.
pub fn scaling_slopes() -> Result<(f64, f64), String> {
    let sphere = fixtures::demo_sphere(0.8, 0.08);
    let (single, _) = defect_slope(&sphere, 0, sphere.mixture().n0())?;
    let coupled = fixtures::system3(&fixtures::synthetic3(true), 0.05);
    let mut worst = f64::INFINITY;
    for p in 0..3 {
        worst = worst.min(defect_slope(&coupled, p, 0.05)?.0);
    }
    Ok((single, worst))
}

/// Relative difference of the second-order corrections `xi^2 - k^2` from the
/// general and low-frequency formulas at `|k| b` of order 1e-4.
pub fn lowfreq_limit_defect() -> Result<f64, String> {
    use coherent_core::MixtureSpec;
    let ks = vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 1.0), Complex64::new(7.0, 6.0)];
    let mix = MixtureSpec::new(1e8, 4e-5, 1e-4).map_err(|e| e.to_string())?;
    let sys = ModalSystem::with_truncation(ks, &fixtures::synthetic3(true), mix, 3).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for p in 0..3 {
        let k = sys.ks()[p];
        let a = wavenumber_asymptotic_o2(p, &sys).map_err(|e| e.to_string())?.xi_squared - k * k;
        let l = wavenumber_lowfreq_o2(p, &sys).map_err(|e| e.to_string())?.xi_squared - k * k;
        worst = worst.max(rel(a, l));
    }
    Ok(worst)
}

fn asymptotic_scaling_checks() -> Vec<Check> {
    let s = Suite::AsymptoticScaling;
    let mut out = match scaling_slopes() {
        Ok((single, coupled)) => vec![
            Check::new(s, "determinant defect slope, single wave", single, 2.7, Bound::AtLeast),
            Check::new(s, "determinant defect slope, coupled three waves", coupled, 2.7, Bound::AtLeast),
        ],
        Err(e) => vec![Check::failed(s, "determinant defect slope", e)],
    };
    out.push(match lowfreq_limit_defect() {
        Ok(v) => Check::new(s, "general formula -> low-frequency formula", v, 1e-5, Bound::AtMost),
        Err(e) => Check::failed(s, "general formula -> low-frequency formula", e),
    });
    out
}

/// Relative mismatch of the first- and second-order density coefficients
/// from the far-field integrals and from the modal series, for the demo
/// sphere at `k a` in {0.05, 0.1, 0.3}.
pub fn lloyd_berry_defects() -> Result<(f64, f64), String> {
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for ka in [0.05, 0.1, 0.3] {
        let sys = fixtures::demo_sphere(ka, 0.05);
        let k = sys.ks()[0];
        let (c1, c2) = lowfreq_coefficients(0, &sys).map_err(|e| e.to_string())?;
        let d1 = delta1(sys.tmatrix(), 0, k);
        let d2 = delta2(sys.tmatrix(), 0, k, 0.0, default_quadrature()).map_err(|e| e.to_string())?;
        e1 = e1.max(rel(d1, c1));
        e2 = e2.max(rel(d2, c2));
    }
    Ok((e1, e2))
}

fn lloyd_berry_checks() -> Vec<Check> {
    let s = Suite::LloydBerryP1;
    match lloyd_berry_defects() {
        Ok((e1, e2)) => vec![
            Check::new(s, "first-order coefficient", e1, 1e-8, Bound::AtMost),
            Check::new(s, "second-order coefficient", e2, 1e-8, Bound::AtMost),
        ],
        Err(e) => vec![Check::failed(s, "far-field coefficients", e)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flipped(n: usize, nu: usize, l: usize) -> f64 {
        -gaunt0(n, nu, l)
    }

    #[test]
    fn gaunt_suite_passes() {
        let r = Validator::default().run(Suite::Gaunt);
        assert!(r.passed, "{}", r.render_text());
    }

    #[test]
    fn sign_flip_breaks_sum_rule() {
        let v = Validator {
            gaunt: flipped,
            ..Default::default()
        };
        let r = v.run(Suite::Gaunt);
        assert!(!r.passed);
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert!(failed.iter().any(|n| n.contains("sum rule")), "{failed:?}");
    }

    #[test]
    fn zero_tolerance_fails() {
        let v = Validator {
            tolerance_scale: 0.0,
            ..Default::default()
        };
        let r = v.run(Suite::Bessel);
        assert!(!r.passed);
    }

    #[test]
    fn grid_spans_range() {
        let g = bessel_grid();
        assert_eq!(g.len(), 100);
        let (lo, hi) = g.iter().fold((f64::MAX, 0.0f64), |(a, b), z| (a.min(z.norm()), b.max(z.norm())));
        assert!((lo - 0.1).abs() < 1e-15 && (hi - 50.0).abs() < 1e-12);
    }
}
