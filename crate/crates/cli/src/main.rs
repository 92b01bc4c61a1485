use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coherent_core::{
    farfield_f, fluid_sphere_tmatrix, is_decoupled, load_tmatrix, save_tmatrix, FluidSphere, GauntTable, HostMedium,
};
use coherent_cli::output::{write_csv, write_json};
use coherent_cli::validate::{Suite, Validator};
use coherent_cli::{run_dispersion, CliError, CliResult, RunConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "coherent-k", version, about = "Effective wavenumbers of coherent waves in particulate media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gaunt coefficients G(n, nu, l) for m = 0 and their sum over l.
    Gaunt {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        nu: usize,
        /// Print only l <= L.
        #[arg(long)]
        max_l: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Inspect or generate T-matrix files.
    Tmatrix {
        #[command(subcommand)]
        action: TmatrixAction,
    },
    /// Far-field pattern f^{qp}(theta) on [0, pi] as CSV.
    Farfield {
        #[arg(long)]
        tmatrix: PathBuf,
        /// 1-based wave indices `q,p`.
        #[arg(long, default_value = "1,1")]
        pair: String,
        #[arg(long, default_value_t = 181)]
        samples: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Effective wavenumbers over the sweep of a TOML run configuration.
    Disperse {
        #[arg(long)]
        config: PathBuf,
        /// CSV output; stdout when neither this nor the config names a file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the identity checks; exit status 1 if any fails.
    Validate {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Multiplies every upper-bound tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

#[derive(Subcommand)]
enum TmatrixAction {
    /// Summary of a T-matrix file.
    Inspect { file: PathBuf },
    /// Fluid sphere in a unit fluid host at size parameter `k a`.
    DemoFluidSphere {
        /// Sphere density relative to the host.
        #[arg(long)]
        density: f64,
        /// Sphere sound speed relative to the host.
        #[arg(long)]
        speed: f64,
        #[arg(long)]
        ka: f64,
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn gaunt(n: usize, nu: usize, max_l: Option<usize>, as_json: bool) -> CliResult<()> {
    let table = GauntTable::new(n.max(nu));
    let terms: Vec<(usize, f64)> = table
        .terms(n, nu)
        .filter(|&(l, g)| g != 0.0 && max_l.is_none_or(|m| l <= m))
        .collect();
    let sum: f64 = terms.iter().map(|t| t.1).sum();
    let mut out = io::stdout().lock();
    if as_json {
        let terms: Vec<_> = terms.iter().map(|&(l, g)| json!({ "l": l, "g": g })).collect();
        writeln!(out, "{}", json!({ "n": n, "nu": nu, "terms": terms, "sum": sum }))?;
    } else {
        for (l, g) in terms {
            writeln!(out, "l={l} {g:.17e}")?;
        }
        writeln!(out, "sum {sum:.17e}")?;
    }
    Ok(())
}

fn inspect(file: &Path) -> CliResult<()> {
    let t = load_tmatrix(file).map_err(|e| CliError::Config(format!("{}: {e}", file.display())))?;
    let mut out = io::stdout().lock();
    writeln!(out, "P = {} ({})", t.p(), t.labels().join(", "))?;
    writeln!(out, "radius_a = {}", t.radius_a())?;
    if let Some(w) = t.omega() {
        writeln!(out, "omega = {w}")?;
    }
    writeln!(out, "n_max = {}", t.n_max())?;
    writeln!(out, "decoupled = {}", is_decoupled(&t, 0.0))?;
    writeln!(out, "under_truncated = {}", t.is_under_truncated())?;
    for n in 0..=t.n_max() {
        writeln!(out, "n={n} max|T| = {:.6e}", t.order_magnitude(n))?;
    }
    Ok(())
}

fn demo_sphere(density: f64, speed: f64, ka: f64, n_max: usize, out: &Path) -> CliResult<()> {
    let host = HostMedium::fluid(1.0).map_err(|e| CliError::Config(e.to_string()))?;
    let t = fluid_sphere_tmatrix(&host, 1.0, FluidSphere { density, speed }, 1.0, ka, n_max)
        .map_err(|e| CliError::Config(e.to_string()))?;
    save_tmatrix(&t, out).map_err(|e| CliError::Runtime(e.to_string()))?;
    if t.is_under_truncated() {
        eprintln!("warning: coefficients have not decayed by n = {n_max}");
    }
    Ok(())
}

fn farfield(file: &Path, pair: &str, samples: usize, out: Option<&Path>) -> CliResult<()> {
    let t = load_tmatrix(file).map_err(|e| CliError::Config(format!("{}: {e}", file.display())))?;
    let idx: Vec<usize> = pair
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("--pair expects q,p, got {pair:?}")))?;
    let (q, p) = match idx[..] {
        [q, p] if (1..=t.p()).contains(&q) && (1..=t.p()).contains(&p) => (q - 1, p - 1),
        _ => return Err(CliError::Config(format!("--pair must be two indices in 1..={}", t.p()))),
    };
    if samples < 2 {
        return Err(CliError::Config("--samples must be at least 2".into()));
    }
    let mut wr = csv::Writer::from_writer(sink(out)?);
    wr.write_record(["theta", "re_f", "im_f"])?;
    for i in 0..samples {
        let theta = std::f64::consts::PI * i as f64 / (samples - 1) as f64;
        let f = farfield_f(&t, q, p, theta);
        wr.write_record([theta.to_string(), f.re.to_string(), f.im.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

fn disperse(config: &Path, out: Option<PathBuf>, json_out: Option<PathBuf>) -> CliResult<()> {
    let cfg = RunConfig::load(config)?;
    let result = run_dispersion(&cfg)?;
    let csv_path = out.or_else(|| cfg.output.csv.clone());
    write_csv(&result, sink(csv_path.as_deref())?)?;
    if let Some(p) = json_out.or_else(|| cfg.output.json.clone()) {
        write_json(&result, create(&p)?)?;
    }
    let failed = result.failures();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed; see the warnings column", result.rows.len());
    }
    Ok(())
}

fn validate(suite: Suite, json_out: Option<PathBuf>, scale: f64) -> CliResult<()> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(CliError::Config("--tolerance-scale must be finite and non-negative".into()));
    }
    let report = Validator {
        tolerance_scale: scale,
        ..Default::default()
    }
    .run(suite);
    print!("{}", report.render_text());
    if let Some(p) = json_out {
        serde_json::to_writer_pretty(create(&p)?, &report)?;
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}/{}", c.suite, c.name))
            .collect();
        Err(CliError::Validation(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gaunt { n, nu, max_l, json } => gaunt(n, nu, max_l, json),
        Command::Tmatrix { action } => match action {
            TmatrixAction::Inspect { file } => inspect(&file),
            TmatrixAction::DemoFluidSphere {
                density,
                speed,
                ka,
                n_max,
                out,
            } => demo_sphere(density, speed, ka, n_max, &out),
        },
        Command::Farfield {
            tmatrix,
            pair,
            samples,
            out,
        } => farfield(&tmatrix, &pair, samples, out.as_deref()),
        Command::Disperse { config, out, json } => disperse(&config, out, json),
        Command::Validate {
            suite,
            json,
            tolerance_scale,
        } => validate(suite, json, tolerance_scale),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("coherent-k: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
