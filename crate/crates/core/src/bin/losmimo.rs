//! Command-line front end: scenario runs, figure presets and design rules.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use losmimo::experiments::{parse_length, run_figure, run_scenario, write_csv_atomic, ScenarioConfig, DEFAULT_LAMBDA0, DEFAULT_RANGE};
use losmimo::{medium_optimal_spacing, solve_thickness, ArrayConfig, ConfigError, Error};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "losmimo", version, about = "Conditioning of LOS MIMO ULA links with dielectric phase shifting")]
struct Cli {
    /// Accepted for compatibility; every computation is deterministic.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its CSV.
    Run {
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a figure preset (fig2a, fig2b, fig3, fig4a, fig4b).
    Figure {
        name: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed-form spacing and thickness rules.
    #[command(subcommand)]
    Design(DesignCommand),
}

#[derive(Args)]
struct OutputArgs {
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `section.key=value`, may be repeated.
    #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct LinkArgs {
    /// Antennas per array (V = min of both counts when they differ).
    #[arg(long, short = 'n', default_value_t = 2)]
    n: usize,
    /// Receive antennas; defaults to `n`.
    #[arg(long)]
    m: Option<usize>,
    /// Link range (meters, or `<x> lambda0`).
    #[arg(long, default_value_t = DEFAULT_RANGE.to_string())]
    range: String,
    /// Free-space wavelength in meters.
    #[arg(long, default_value_t = DEFAULT_LAMBDA0)]
    lambda0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_t: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_r: f64,
    #[arg(long, default_value_t = 1.0)]
    sqrt_eps_r: f64,
}

#[derive(Subcommand)]
enum DesignCommand {
    /// Spacing product that makes the link orthogonal for a slab of given thickness.
    Spacing {
        #[command(flatten)]
        link: LinkArgs,
        /// Slab thickness (meters, or `<x> lambda0`).
        #[arg(long, default_value = "0")]
        thickness: String,
    },
    /// Slab thickness that makes the link orthogonal for a given spacing.
    Thickness {
        #[command(flatten)]
        link: LinkArgs,
        /// Symmetric spacing d = d_t = d_r (meters, or `<x> lambda0`).
        #[arg(long, conflicts_with = "d_product", required_unless_present = "d_product")]
        spacing: Option<String>,
        /// Spacing product d_t * d_r in m^2.
        #[arg(long)]
        d_product: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_OTHER
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                Error::Config(ConfigError::new(format!("cannot read {}: {e}", config.display())))
            })?;
            let cfg = ScenarioConfig::parse_with_overrides(&text, &out.overrides)?;
            let table = run_scenario(&cfg)?;
            let path = out.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| {
                let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
                PathBuf::from(format!("{stem}.csv"))
            });
            finish(&path, &table, &cfg)
        }
        Command::Figure { name, out } => {
            let (cfg, table) = run_figure(&name, &out.overrides)?;
            let path = out
                .out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
            finish(&path, &table, &cfg)
        }
        Command::Design(d) => design(d),
    }
}

fn finish(path: &Path, table: &losmimo::experiments::ResultTable, cfg: &ScenarioConfig) -> Result<(), Error> {
    write_csv_atomic(path, table, cfg, true)?;
    println!("wrote {} rows to {}", table.rows.len(), path.display());
    Ok(())
}

fn length(key: &str, value: &str, lambda0: f64) -> Result<f64, Error> {
    parse_length(value, lambda0).map_err(|m| Error::Config(ConfigError::new(m).with_key(key)))
}

fn template(link: &LinkArgs) -> Result<ArrayConfig, Error> {
    if !(link.lambda0.is_finite() && link.lambda0 > 0.0) {
        return Err(Error::Config(ConfigError::new("lambda0 must be positive").with_key("lambda0")));
    }
    let range = length("range", &link.range, link.lambda0)?;
    Ok(ArrayConfig::new(link.n, link.m.unwrap_or(link.n), range, link.lambda0).with_tilts(link.theta_t, link.theta_r))
}

fn design(cmd: DesignCommand) -> Result<(), Error> {
    match cmd {
        DesignCommand::Spacing { link, thickness } => {
            let tpl = template(&link)?;
            let t = length("thickness", &thickness, link.lambda0)?;
            let sol = medium_optimal_spacing(&tpl, t, link.sqrt_eps_r)?;
            println!("d_product = {:?}", sol.d_product);
            println!("d = {:?}", sol.d_symmetric);
            println!("d_lambda0 = {:?}", sol.d_symmetric / link.lambda0);
        }
        DesignCommand::Thickness {
            link,
            spacing,
            d_product,
        } => {
            let tpl = template(&link)?;
            let target = match (spacing, d_product) {
                (Some(s), _) => {
                    let d = length("spacing", &s, link.lambda0)?;
                    d * d
                }
                (None, Some(p)) => p,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            let t = solve_thickness(&tpl, target, link.sqrt_eps_r)?;
            println!("thickness = {t:?}");
            println!("thickness_lambda0 = {:?}", t / link.lambda0);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NoConvergence { sweeps: 100 }), 3);
        assert_eq!(exit_code(&Error::NegativeEigenvalue { value: -1.0, max: 1.0 }), 3);
        assert_eq!(exit_code(&Error::Config(ConfigError::new("x"))), 2);
        assert_eq!(exit_code(&Error::Infeasible("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
