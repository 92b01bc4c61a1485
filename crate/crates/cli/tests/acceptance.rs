//! One line per acceptance criterion; exits non-zero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use coherent_cli::output::csv_string;
use coherent_cli::validate::{
    coupling_forms_defect, decoupled_coupling_magnitude, decoupling_defect, gaunt_checks, lloyd_berry_defects,
    lowfreq_limit_defect, s_series_integral_defect, scaling_slopes, wronskian_defect,
};
use coherent_cli::{run_dispersion, RunConfig};
use coherent_core::{gaunt0, n_ell, save_tmatrix, Complex64, TMatrixSet, WAVE_LABELS};

struct Outcome {
    passed: bool,
    summary: String,
}

fn at_most(label: &str, v: f64, tol: f64) -> (bool, String) {
    (v <= tol, format!("{label} {v:.3e} <= {tol:.0e}"))
}

fn join(parts: Vec<(bool, String)>) -> Outcome {
    Outcome {
        passed: parts.iter().all(|p| p.0),
        summary: parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; "),
    }
}

fn failed(e: String) -> Outcome {
    Outcome {
        passed: false,
        summary: format!("error: {e}"),
    }
}

fn gaunt_rules() -> Outcome {
    let checks = gaunt_checks(gaunt0);
    join(
        checks
            .iter()
            .filter(|c| c.name.starts_with("sum rule") || c.name.starts_with("parity"))
            .map(|c| at_most(&c.name, c.measured, c.tolerance))
            .collect(),
    )
}

fn wronskian() -> Outcome {
    match wronskian_defect() {
        Ok(v) => join(vec![at_most("max |W - i/z^2| |z^2|", v, 1e-10)]),
        Err(e) => failed(e),
    }
}

fn n_ell_limit() -> Outcome {
    let b = 1.3;
    let kps = [
        Complex64::new(0.4, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(2.5, 0.0),
        Complex64::new(7.0, 0.0),
        Complex64::new(1.0, 0.01),
        Complex64::new(3.0, 0.5),
        Complex64::new(0.8, 0.8),
        Complex64::new(4.0, 3.0),
        Complex64::new(0.3, 1.2),
        Complex64::new(9.0, 0.2),
    ];
    let (mut worst, mut mirrored) = (0.0f64, 0.0f64);
    for kp in kps {
        for l in 0..=20 {
            match n_ell(l, kp, kp, b) {
                Ok(v) => {
                    let target = Complex64::i() / (kp * b);
                    worst = worst.max((v - target).norm());
                    mirrored = mirrored.max((v + target).norm());
                }
                Err(e) => return failed(e.to_string()),
            }
        }
    }
    let mut out = join(vec![at_most("max |N_l(k_p) - i/(k_p b)|", worst, 1e-10)]);
    // the Wronskian gives N_l(k_p) = -i/(k_p b); shown for diagnosis
    out.summary.push_str(&format!(" (max |N_l(k_p) + i/(k_p b)| = {mirrored:.3e})"));
    out
}

fn s_identity() -> Outcome {
    match s_series_integral_defect() {
        Ok(v) => join(vec![at_most("max relative series/integral mismatch", v, 1e-8)]),
        Err(e) => failed(e),
    }
}

fn lloyd_berry() -> Outcome {
    match lloyd_berry_defects() {
        Ok((e1, e2)) => join(vec![
            at_most("delta_1 relative", e1, 1e-8),
            at_most("delta_2 relative", e2, 1e-8),
        ]),
        Err(e) => failed(e),
    }
}

fn coupling() -> Outcome {
    match (coupling_forms_defect(), decoupled_coupling_magnitude()) {
        (Ok(v), Ok(z)) => join(vec![
            at_most("series/integral relative", v, 1e-8),
            (z == 0.0, format!("decoupled |delta_2^c| = {z:e}")),
        ]),
        (Err(e), _) | (_, Err(e)) => failed(e),
    }
}

fn scaling() -> Outcome {
    match scaling_slopes() {
        Ok((single, coupled)) => join(vec![
            (single >= 2.7, format!("P=1 slope {single:.3} >= 2.7")),
            (coupled >= 2.7, format!("P=3 slope {coupled:.3} >= 2.7")),
        ]),
        Err(e) => failed(e),
    }
}

fn decoupling() -> Outcome {
    match decoupling_defect() {
        Ok(v) => join(vec![at_most("max relative difference", v, 1e-10)]),
        Err(e) => failed(e),
    }
}

fn regime() -> Outcome {
    match lowfreq_limit_defect() {
        Ok(v) => join(vec![at_most("relative difference at kb ~ 1e-4", v, 1e-5)]),
        Err(e) => failed(e),
    }
}

const THREE_WAVE: &str = r#"
methods = ["asymptotic_o2", "lowfreq_o2", "lloyd_berry", "determinant"]

[[host.waves]]
label = "c"
model = { kind = "speed_attenuation", speed = 1500.0, attenuation = 0.01 }

[[host.waves]]
label = "s"
model = { kind = "speed_attenuation", speed = 300.0, attenuation = 5.0 }

[[host.waves]]
label = "th"
model = { kind = "speed_attenuation", speed = 50.0, attenuation = 60.0 }

[mixture]
n0 = 1e7
radius_a = 1e-4
hole_b = 2.1e-4

[tmatrix]
kind = "files"
paths = ["t0.json", "t1.json"]

[sweep]
omega = [1e4, 3e4]
"#;

const SPHERE: &str = r#"
methods = ["asymptotic_o2", "lowfreq_o2", "lloyd_berry", "determinant"]

[host]
density = 1000.0

[[host.waves]]
label = "c"
model = { kind = "speed_attenuation", speed = 1500.0, attenuation = 0.0 }

[mixture]
n0 = 1e6
radius_a = 1e-3
hole_b = 2.1e-3

[tmatrix]
kind = "demo"
density_ratio = 2.0
speed_ratio = 1.5

[sweep]
omega = { start = 1e5, stop = 6e5, count = 4 }
n0 = [0.0]
"#;

fn exact_host(cfg: &RunConfig) -> Result<(bool, usize), String> {
    let out = run_dispersion(cfg).map_err(|e| e.to_string())?;
    let host = cfg.host_medium().map_err(|e| e.to_string())?;
    let mut ok = !out.rows.is_empty();
    for r in &out.rows {
        let p = host.labels().iter().position(|l| *l == r.wave).ok_or("unknown wave label")?;
        let k = host.wavenumbers(r.omega).map_err(|e| e.to_string())?[p];
        ok &= r.re_xi == k.re && r.im_xi == k.im;
    }
    Ok((ok, out.rows.len()))
}

fn zero_scatterers(dir: &Path) -> Result<Outcome, String> {
    let zero = TMatrixSet::zero(WAVE_LABELS.iter().map(|s| s.to_string()).collect(), 1e-4, 4)
        .map_err(|e| e.to_string())?;
    for name in ["t0.json", "t1.json"] {
        save_tmatrix(&zero, dir.join(name)).map_err(|e| e.to_string())?;
    }
    let cfg_path = dir.join("run.toml");
    std::fs::write(&cfg_path, THREE_WAVE).map_err(|e| e.to_string())?;
    let three = RunConfig::load(&cfg_path).map_err(|e| e.to_string())?;
    let sphere = RunConfig::parse(SPHERE).map_err(|e| e.to_string())?;
    let (t_zero, n1) = exact_host(&three)?;
    let (n_zero, n2) = exact_host(&sphere)?;

    let mut reruns = sphere.clone();
    reruns.sweep.n0 = Some(vec![1e6, 5e6]);
    let first = csv_string(&run_dispersion(&reruns).map_err(|e| e.to_string())?);
    let identical = (0..3).all(|_| run_dispersion(&reruns).map(|o| csv_string(&o) == first).unwrap_or(false));
    Ok(join(vec![
        (t_zero, format!("T = 0: {n1} rows with xi == k")),
        (n_zero, format!("n0 = 0: {n2} rows with xi == k")),
        (identical, "rerun CSV byte-identical".into()),
    ]))
}

fn determinism() -> Outcome {
    match tempfile::tempdir() {
        Ok(dir) => zero_scatterers(dir.path()).unwrap_or_else(failed),
        Err(e) => failed(e.to_string()),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("Gaunt sum rule and parity zeros", gaunt_rules, 1),
        ("Bessel Wronskian", wronskian, 1),
        ("N_l limit at xi = k_p", n_ell_limit, 1),
        ("S(kappa) series = integral", s_identity, 10),
        ("Lloyd-Berry single-wave equivalence", lloyd_berry, 10),
        ("coupling term, both forms", coupling, 10),
        ("asymptotic vs determinant scaling", scaling, 30),
        ("decoupling", decoupling, 10),
        ("general -> low-frequency regime", regime, 10),
        ("zero scatterers and determinism", determinism, 5),
    ];
    let mut all = true;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let passed = outcome.passed && in_time;
        all &= passed;
        println!(
            "criterion {:>2} {} {name}: {} [{:.3} s of {budget} s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            outcome.summary,
            elapsed.as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
