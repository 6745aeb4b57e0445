use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use evse_scaling::gap::{GasBaseline, ParityParams};
use evse_scaling::glm::{Family, FitOptions};
use evse_scaling::pipeline::{
    self, parse_alpha_grid, parse_power, parse_power_list, DatasetChoice, FitRequest,
    MeanFieldRequest, PipelineError, FITTABLE,
};
use evse_scaling::synthetic::{PowerLawSpec, SnapshotSpec};

const USAGE_EXIT: u8 = 64;

#[derive(Parser)]
#[command(
    name = "evse-scaling",
    version,
    about = "Power-law scaling fits and charging infrastructure gap forecasts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Join population, gasoline, station and county-polygon inputs into counties.csv.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit scaling models and their null counterparts.
    Fit(FitArgs),
    /// Score fits by RMSD, McFadden R², likelihood ratio and BIC.
    Compare {
        /// Directory holding fits/ (defaults to --out).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        dataset: DatasetArg,
    },
    /// Per-county charging station gap against the gasoline scaling law.
    Gap {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        parity: ParityArgs,
        #[arg(long, value_enum, default_value = "fitted")]
        baseline: BaselineArg,
    },
    /// Mean-field speed vs charge-fraction curves.
    Meanfield {
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated powers, e.g. `1.92kW,400kW`.
        #[arg(long)]
        power_levels: Option<String>,
        /// A point count for the open grid k/(n+1), or comma-separated fractions.
        #[arg(long)]
        alpha_grid: Option<String>,
    },
    /// Run ingest, fit, compare, gap and meanfield in sequence.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        parity: ParityArgs,
    },
    /// Write a seeded synthetic raw snapshot in the ingest input formats.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        counties: usize,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Directory holding counties.csv (defaults to --out).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "both")]
    dataset: DatasetArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rows in the synthetic dataset.
    #[arg(long, default_value_t = 3000)]
    rows: usize,
    #[arg(long, default_value_t = 60)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

#[derive(Args)]
struct ParityArgs {
    /// Charger power per port, e.g. `400kW` or `11500`.
    #[arg(long, value_parser = power_arg, default_value = "400kW")]
    p_evse: f64,
    #[arg(long, default_value_t = 12)]
    pumps_per_station: u32,
    #[arg(long, default_value_t = 12)]
    ports_per_station: u32,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    consumption_ratio: f64,
}

impl ParityArgs {
    fn params(&self) -> ParityParams {
        ParityParams {
            p_evse_w: self.p_evse,
            pumps_per_station: self.pumps_per_station,
            ports_per_station: self.ports_per_station,
            consumption_ratio: self.consumption_ratio,
            ..Default::default()
        }
    }
}

fn power_arg(s: &str) -> Result<f64, String> {
    parse_power(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Poisson,
    Nb,
    Linear,
    Quadratic,
    Loglog,
    All,
}

impl FamilyArg {
    fn families(self) -> Vec<Family> {
        match self {
            FamilyArg::Poisson => vec![Family::PowerLawPoisson],
            FamilyArg::Nb => vec![Family::PowerLawNegBin],
            FamilyArg::Linear => vec![Family::GaussianLinear],
            FamilyArg::Quadratic => vec![Family::GaussianQuadratic],
            FamilyArg::Loglog => vec![Family::LogLogOls],
            FamilyArg::All => FITTABLE.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Evse,
    Gasoline,
    Both,
    Synthetic,
}

impl DatasetArg {
    fn choices(self) -> Vec<DatasetChoice> {
        match self {
            DatasetArg::Evse => vec![DatasetChoice::Evse],
            DatasetArg::Gasoline => vec![DatasetChoice::Gasoline],
            DatasetArg::Both => vec![DatasetChoice::Evse, DatasetChoice::Gasoline],
            DatasetArg::Synthetic => vec![DatasetChoice::Synthetic],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Fitted,
    Observed,
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest { input, out } => {
            let s = pipeline::run_ingest(&input, &out)?;
            println!(
                "{} counties; {} stations matched, {} unmatched, {} rejected",
                s.counties, s.stations_matched, s.stations_unmatched, s.stations_rejected
            );
        }
        Command::Fit(args) => {
            let input = args.input.unwrap_or_else(|| args.out.clone());
            let req = FitRequest {
                families: args.family.families(),
                datasets: args.dataset.choices(),
                options: FitOptions {
                    max_iterations: args.max_iterations,
                    tolerance: args.tolerance,
                    ..Default::default()
                },
                seed: args.seed,
                synthetic: PowerLawSpec {
                    rows: args.rows,
                    ..Default::default()
                },
            };
            req.options.validate().map_err(PipelineError::from)?;
            for fit in pipeline::run_fit(&input, &args.out, &req)? {
                let params: Vec<String> = fit
                    .params
                    .iter()
                    .map(|p| format!("{} = {}", p.name, p.value))
                    .collect();
                println!("{} {}: {}", fit.dataset, fit.family, params.join(", "));
            }
        }
        Command::Compare {
            input,
            out,
            dataset,
        } => {
            let input = input.unwrap_or_else(|| out.clone());
            for choice in dataset.choices() {
                let result = pipeline::run_compare(&input, &out, choice.label())?;
                print!("{}", evse_scaling::stats::render_table(&result.comparison));
            }
        }
        Command::Gap {
            input,
            out,
            parity,
            baseline,
        } => {
            let input = input.unwrap_or_else(|| out.clone());
            let baseline = match baseline {
                BaselineArg::Fitted => GasBaseline::Fitted,
                BaselineArg::Observed => GasBaseline::Observed,
            };
            let s = pipeline::run_gap(&input, &out, &parity.params(), baseline)?;
            println!(
                "parity ratio {:.4}; {} of {} counties at parity; total gap {:.1} stations",
                s.parity_ratio, s.counties_at_parity, s.counties, s.total_gap
            );
        }
        Command::Meanfield {
            out,
            power_levels,
            alpha_grid,
        } => {
            let mut req = MeanFieldRequest::default();
            if let Some(p) = power_levels {
                req.power_levels_w = parse_power_list(&p)?;
            }
            if let Some(a) = alpha_grid {
                req.alpha_grid = parse_alpha_grid(&a)?;
            }
            let rows = pipeline::run_meanfield(&out, &req)?;
            println!("{rows} rows");
        }
        Command::Report { input, out, parity } => {
            pipeline::run_report(&input, &out, &parity.params(), &FitOptions::default())?;
            println!("report written to {}", out.display());
        }
        Command::Synth {
            out,
            seed,
            counties,
        } => {
            let spec = SnapshotSpec {
                counties,
                ..Default::default()
            };
            pipeline::write_synthetic_snapshot(&out, &spec, seed)?;
            println!("snapshot written to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE_EXIT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
