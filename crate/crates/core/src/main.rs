use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use levyfluct::concentration::ConcentrationProfile;
use levyfluct::fluctuation::FluctuationModel;
use levyfluct::harness::{Experiment, ExperimentConfig, Gates, Grid, PRESETS, REGISTRY};
use levyfluct::montecarlo::{exit_time_with, simulate_extrema, Sampler};
use levyfluct::LevyError;

#[derive(Parser)]
#[command(name = "levyfluct", version, about = "Fluctuation theory numerics for one-dimensional Lévy processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the configured process.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Tabulate an analytic object as CSV.
    Compute {
        what: Quantity,
        config: PathBuf,
        /// `lo:hi:n` (log-spaced) or `a,b,c`; defaults to the matching config grid.
        #[arg(long)]
        grid: Option<String>,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimates as CSV.
    Simulate {
        what: Simulation,
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run claims and write result.json plus per-claim CSV.
    Verify {
        config: PathBuf,
        /// Comma-separated claim ids, replacing the config's list.
        #[arg(long, value_delimiter = ',')]
        claims: Option<Vec<String>>,
        /// Output directory, replacing the config's.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarise a result directory written by `verify`.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum ModelAction {
    /// Family, triplet summary and gates.
    Show { config: PathBuf },
    /// Preset names and claim ids.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    H,
    B,
    Psi,
    Kappa,
    #[value(name = "V", alias = "v")]
    V,
}

#[derive(Clone, Copy, ValueEnum)]
enum Simulation {
    Exit,
    Supcdf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<LevyError> for Failure {
    fn from(e: LevyError) -> Self {
        match e {
            LevyError::Config(m) => Failure::Usage(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// `println!` that stops quietly when the reader has gone away.
macro_rules! say {
    ($($arg:tt)*) => {{
        let mut out = std::io::stdout().lock();
        if let Err(e) = writeln!(out, $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            return Err(e.into());
        }
    }};
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Model { action } => match action {
            ModelAction::Show { config } => show(&config),
            ModelAction::List => {
                say!("presets:");
                for p in PRESETS {
                    say!("  {p}");
                }
                say!("claims:");
                for c in &REGISTRY {
                    say!("  {:<18} {}", c.id, c.summary);
                }
                Ok(0)
            }
        },
        Command::Compute { what, config, grid, out } => compute(what, &config, grid.as_deref(), out.as_deref()),
        Command::Simulate { what, config, out } => simulate(what, &config, out.as_deref()),
        Command::Verify { config, claims, out } => verify(&config, claims, out),
        Command::Report { dir } => report(&dir),
    }
}

fn show(path: &Path) -> Outcome {
    let cfg = ExperimentConfig::load(path)?;
    let spec = cfg.process.build()?;
    let gates = Gates::evaluate(&spec)?;
    let t = spec.triplet();
    let summary = serde_json::json!({
        "label": spec.label,
        "family": spec.family(),
        "sigma": t.sigma,
        "gamma": t.gamma,
        "components": spec.measure().components(),
        "mean": spec.mean_x1(),
        "stable_positivity": spec.stable_positivity(),
        "gates": gates,
    });
    say!("{}", serde_json::to_string_pretty(&summary).map_err(|e| Failure::Runtime(e.to_string()))?);
    Ok(0)
}

fn emit(header: &[&str], rows: &[Vec<f64>], out: Option<&Path>) -> Outcome {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        _ => Failure::Runtime(e.to_string()),
    };
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(err)?;
    }
    match w.flush() {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        r => r?,
    }
    Ok(0)
}

fn compute(what: Quantity, path: &Path, grid: Option<&str>, out: Option<&Path>) -> Outcome {
    let cfg = ExperimentConfig::load(path)?;
    let spec = cfg.process.build()?;
    let g = &cfg.grids;
    let pts = match grid {
        Some(s) => Grid::parse(s)?.points(),
        None => match what {
            Quantity::H | Quantity::B | Quantity::V => g.r.points(),
            Quantity::Psi => g.xi.points(),
            Quantity::Kappa => g.z.points(),
        },
    };
    if pts.is_empty() {
        return Err(Failure::Usage("empty grid".into()));
    }
    match what {
        Quantity::H | Quantity::B => {
            let rows = ConcentrationProfile::new(&spec).table(&pts)?;
            if matches!(what, Quantity::H) {
                let rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.r, r.h, r.b_r, r.sup_re_psi]).collect();
                emit(&["r", "h", "b_r", "sup_re_psi"], &rows, out)
            } else {
                let rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.r, r.b_r]).collect();
                emit(&["r", "b_r"], &rows, out)
            }
        }
        Quantity::Psi => {
            let rows: Vec<Vec<f64>> = pts
                .iter()
                .map(|&xi| {
                    let p = spec.psi(xi);
                    vec![xi, p.re, p.im]
                })
                .collect();
            emit(&["xi", "re_psi", "im_psi"], &rows, out)
        }
        Quantity::Kappa => {
            let m = FluctuationModel::build(&spec)?;
            let dual = m.ladder.dual();
            let mut rows = Vec::new();
            for &z in &pts {
                rows.push(vec![
                    z,
                    m.ladder.kappa_time(z)?,
                    dual.kappa_time(z)?,
                    m.ladder.kappa_space(z)?,
                    dual.kappa_space(z)?,
                ]);
            }
            emit(&["arg", "kappa_time", "kappa_hat_time", "kappa_space", "kappa_hat_space"], &rows, out)
        }
        Quantity::V => {
            let m = FluctuationModel::build(&spec)?;
            let rows: Vec<Vec<f64>> = pts.iter().map(|&x| vec![x, m.v.eval(x), m.v_hat.eval(x)]).collect();
            emit(&["x", "V", "V_hat"], &rows, out)
        }
    }
}

fn simulate(what: Simulation, path: &Path, out: Option<&Path>) -> Outcome {
    let cfg = ExperimentConfig::load(path)?;
    let spec = cfg.process.build()?;
    cfg.plan.validate(Some(cfg.width)).map_err(|e| Failure::Usage(e.to_string()))?;
    match what {
        Simulation::Exit => {
            let s = Sampler::new(&spec, cfg.plan.eps)?;
            let mut rows = Vec::new();
            for x in cfg.starts() {
                let e = exit_time_with(&s, &spec, x, cfg.width, &cfg.plan)?;
                let flag = if e.biased_low { 1.0 } else { 0.0 };
                rows.push(vec![x, e.mean, e.std_error, e.censored_fraction, flag]);
            }
            emit(&["x", "mean", "std_error", "censored_fraction", "biased_low"], &rows, out)
        }
        Simulation::Supcdf => {
            let ts = cfg.grids.t.points();
            let ex = simulate_extrema(&spec, &ts, &cfg.plan)?;
            let mut rows = Vec::new();
            for &t in &ts {
                for x in cfg.grids.level.points() {
                    let (s, i) = (ex.sup_cdf(t, x)?, ex.inf_cdf(t, x)?);
                    rows.push(vec![t, x, s.mean, s.std_error, i.mean, i.std_error]);
                }
            }
            emit(&["t", "x", "sup_cdf", "sup_std_error", "inf_cdf", "inf_std_error"], &rows, out)
        }
    }
}

fn verify(path: &Path, claims: Option<Vec<String>>, out: Option<PathBuf>) -> Outcome {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(c) = claims {
        cfg.claims = c.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(o) = out {
        cfg.output = o;
    }
    let e = Experiment::run(&cfg)?;
    e.write(&cfg.output)?;
    for line in e.lines() {
        say!("{line}");
    }
    say!("results in {}", cfg.output.display());
    Ok(e.exit_code() as u8)
}

fn report(dir: &Path) -> Outcome {
    let path = dir.join("result.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let num = |x: &serde_json::Value| x.as_f64().map_or("-".to_string(), |f| format!("{f:.4e}"));
    say!("process: {}", v["process"].as_str().unwrap_or("?"));
    let t = &v["totals"];
    say!("pass {}  fail {}  skipped {}", t["pass"], t["fail"], t["skipped"]);
    for c in v["claims"].as_array().into_iter().flatten() {
        let verdict = c["verdict"].as_str().unwrap_or("?").to_uppercase();
        say!("{verdict:7} {}", c["id"].as_str().unwrap_or("?"));
        if let Some(r) = c["reason"].as_str() {
            say!("        {r}");
        }
        for r in c["reports"].as_array().into_iter().flatten() {
            say!(
                "        {:<28} ratio [{}, {}] {}",
                r["id"].as_str().unwrap_or("?"),
                num(&r["min_ratio"]),
                num(&r["max_ratio"]),
                r["verdict"].as_str().unwrap_or("?"),
            );
        }
    }
    Ok(if t["fail"].as_u64().unwrap_or(0) > 0 { 1 } else { 0 })
}
