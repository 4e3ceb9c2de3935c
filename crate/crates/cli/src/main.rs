mod config;
mod failure;
mod output;
mod pipeline;
mod presets;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use pointscat::geometry::{trilaterate4, trilaterate_least_squares, SphereObservation, TrilaterationOptions};
use pointscat::measurement::MeasurementSet;
use pointscat::Point;

use config::ExperimentConfig;
use failure::Failure;
use pipeline::{invert, report, simulate_measurements, InversionSpec};

/// Locate point sources and scatterers from multi-frequency data at a few sensors.
#[derive(Parser)]
#[command(name = "pointscat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, add noise, invert, and write every artifact.
    Run {
        /// Config file, or `preset:NAME`.
        config: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides `noise.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write `measurements.json` only.
    Simulate {
        config: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Invert a measurement file. The true objects in the config are never read.
    Invert {
        config: String,
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Locate a point from its distances to sensors.
    Trilaterate {
        /// Sensor positions `x,y,z;x,y,z;...`.
        #[arg(long, allow_hyphen_values = true)]
        centers: String,
        /// Distances `r1,r2,...`, one per sensor.
        #[arg(long, allow_hyphen_values = true)]
        radii: String,
        #[arg(long)]
        tol_geo: Option<f64>,
        /// Algebraic least squares instead of the four-step scheme.
        #[arg(long)]
        least_squares: bool,
    },
    /// Print a built-in config, or list them.
    Preset {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

fn load_config(arg: &str) -> Result<(ExperimentConfig, PathBuf), Failure> {
    if let Some(name) = arg.strip_prefix("preset:") {
        let cfg = presets::preset(name).ok_or_else(|| {
            Failure::Validation(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))
        })?;
        return Ok((cfg, PathBuf::from(".")));
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let cfg = config::parse(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn set_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn write_inversion(
    dir: &Path,
    spec: &InversionSpec,
    inv: &pipeline::Inversion,
    text: &str,
) -> Result<(), Failure> {
    if let Some(field) = &inv.field {
        let mut csv = Vec::new();
        field
            .write_csv(&mut csv)
            .map_err(|e| Failure::Io(format!("indicator.csv: {e}")))?;
        output::write(&dir.join("indicator.csv"), &csv)?;
        output::write(&dir.join("indicator.json"), output::compact(&field.to_json_value()).as_bytes())?;
    }
    output::write(&dir.join("result.json"), output::pretty(&inv.to_json(spec)).as_bytes())?;
    output::write(&dir.join("report.txt"), text.as_bytes())?;
    Ok(())
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Validation(format!("{what}: {t:?} is not a number")))
        })
        .collect()
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out, seed, threads } => {
            set_threads(threads)?;
            let (cfg, base) = load_config(&config)?;
            let truth = cfg.truth(&base)?;
            let m = simulate_measurements(&cfg, &base, seed.unwrap_or(cfg.noise.seed))?;
            let spec = InversionSpec::from_config(&cfg)?;
            let inv = invert(&spec, &m)?;
            let dir = output::run_dir(&out, &cfg.name)?;
            output::write(&dir.join("measurements.json"), output::compact(&m.to_json_value()).as_bytes())?;
            let text = report(&spec, &m, &inv, Some(&truth));
            write_inversion(&dir, &spec, &inv, &text)?;
            print!("{text}");
            println!("artifacts: {}", dir.display());
        }
        Command::Simulate { config, out, seed, threads } => {
            set_threads(threads)?;
            let (cfg, base) = load_config(&config)?;
            let m = simulate_measurements(&cfg, &base, seed.unwrap_or(cfg.noise.seed))?;
            let dir = output::run_dir(&out, &cfg.name)?;
            let path = dir.join("measurements.json");
            output::write(&path, output::compact(&m.to_json_value()).as_bytes())?;
            println!("{}", path.display());
        }
        Command::Invert { config, measurements, out, threads } => {
            set_threads(threads)?;
            let (cfg, _) = load_config(&config)?;
            let text = std::fs::read_to_string(&measurements)
                .map_err(|e| Failure::Validation(format!("{}: {e}", measurements.display())))?;
            let m = MeasurementSet::from_json(&text)
                .map_err(|e| Failure::Validation(format!("{}: {e}", measurements.display())))?;
            let spec = InversionSpec::from_config(&cfg)?;
            let inv = invert(&spec, &m)?;
            let dir = output::run_dir(&out, &cfg.name)?;
            let text = report(&spec, &m, &inv, None);
            write_inversion(&dir, &spec, &inv, &text)?;
            print!("{text}");
            println!("artifacts: {}", dir.display());
        }
        Command::Trilaterate { centers, radii, tol_geo, least_squares } => {
            let centers: Vec<Point> = centers
                .split(';')
                .map(|c| {
                    Point::from_slice(&parse_list(c, "--centers")?)
                        .map_err(|e| Failure::Validation(format!("--centers: {e}")))
                })
                .collect::<Result<_, _>>()?;
            let radii = parse_list(&radii, "--radii")?;
            if centers.len() != radii.len() {
                return Err(Failure::Validation(format!(
                    "--radii: {} distances for {} centers",
                    radii.len(),
                    centers.len()
                )));
            }
            let obs: Vec<SphereObservation> = centers
                .iter()
                .zip(&radii)
                .map(|(c, r)| SphereObservation::new(*c, *r))
                .collect::<Result<_, _>>()?;
            let z = if least_squares {
                trilaterate_least_squares(&obs)?
            } else {
                let four: &[SphereObservation; 4] = obs.as_slice().try_into().map_err(|_| {
                    Failure::Validation(format!(
                        "--centers: the four-step scheme needs exactly 4 sensors, got {}",
                        obs.len()
                    ))
                })?;
                let mut opts = TrilaterationOptions::default();
                if let Some(t) = tol_geo {
                    opts.tol_geo = t;
                }
                trilaterate4(four, opts)?
            };
            print!("{}", output::pretty(&json!({ "location": z })));
        }
        Command::Preset { name, list } => match (name, list) {
            (_, true) => {
                for n in presets::NAMES {
                    println!("{n}");
                }
            }
            (Some(n), false) => {
                let cfg = presets::preset(&n).ok_or_else(|| {
                    Failure::Validation(format!("unknown preset {n:?}; known: {}", presets::NAMES.join(", ")))
                })?;
                print!("{}", output::pretty(&cfg));
            }
            (None, false) => return Err(Failure::Validation("give a preset name or --list".into())),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e {
                Failure::Validation(_) => "validation error",
                Failure::Pipeline { .. } => "pipeline error",
                Failure::Io(_) => "i/o error",
            };
            eprintln!("pointscat: {kind}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
