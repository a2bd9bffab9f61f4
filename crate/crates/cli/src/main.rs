use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use fogsim_cli::config::{self, Evaluator, ExperimentSpec};
use fogsim_cli::emit;
use fogsim_cli::runner;
use fogsim_cli::HarnessError;
use fogsim_core::sim::Placement;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fogsim",
    about = "Cache-aided fog network experiments: analytic curves and Monte Carlo sweeps",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form expressions over the grid
    Analytic(RunArgs),
    /// Run the Monte Carlo estimators over the grid
    Simulate(RunArgs),
    /// Run both engines and report the deviations
    Compare(RunArgs),
    /// Run a built-in sweep preset (fig1, fig2, fig3)
    Figure {
        /// Preset name
        name: String,
        #[command(flatten)]
        args: OverrideArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file; defaults to a single point at the
    /// reference parameters
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct OverrideArgs {
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Trials-per-point override
    #[arg(long)]
    trials: Option<u64>,
    /// CSV output path override
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// SVG output path override
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Sampling window radius in meters
    #[arg(long)]
    window_radius: Option<f64>,
    /// Cache placement model
    #[arg(long, value_enum)]
    placement: Option<PlacementArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    Thinning,
    Identical,
}

impl OverrideArgs {
    fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(seed) = self.seed {
            spec.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            spec.trials_per_point = trials;
        }
        if let Some(csv) = &self.out_csv {
            spec.out_csv = csv.clone();
        }
        if let Some(svg) = &self.out_svg {
            spec.out_svg = Some(svg.clone());
        }
        if let Some(r) = self.window_radius {
            spec.sim.window_radius_m = r;
        }
        if let Some(p) = self.placement {
            spec.sim.placement = match p {
                PlacementArg::Thinning => Placement::Thinning,
                PlacementArg::Identical => Placement::Identical,
            };
        }
    }
}

fn load_spec(id: &str, args: &RunArgs) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = match &args.config {
        Some(path) => config::parse_config(path)?,
        None => ExperimentSpec::single_point(id),
    };
    args.overrides.apply(&mut spec);
    Ok(spec)
}

fn finish(spec: &ExperimentSpec, report: bool) -> Result<(), HarnessError> {
    spec.validate()?;
    let table = runner::run_experiment(spec)?;
    emit::emit_csv(&table, &spec.out_csv)?;
    if let Some(svg) = &spec.out_svg {
        emit::emit_svg(spec, &table, svg)?;
    }

    if report {
        print!("{}", runner::deviation_report(spec, &table));
    } else {
        let ok = table.rows.iter().filter(|r| r.is_ok()).count();
        println!(
            "{}: {} rows ({} ok), csv {}{}",
            spec.experiment_id,
            table.rows.len(),
            ok,
            spec.out_csv.display(),
            spec.out_svg
                .as_ref()
                .map(|p| format!(", svg {}", p.display()))
                .unwrap_or_default()
        );
        for row in &table.rows {
            if !row.is_ok() {
                println!(
                    "  failed point {}={} {} ({}): {}",
                    spec.swept_parameter.name(),
                    row.sweep_value,
                    row.mode.label(),
                    row.evaluator.label(),
                    row.status
                );
            }
        }
    }

    if !table.rows.is_empty() && table.rows.iter().all(|r| !r.is_ok()) {
        let first = &table.rows[0].status;
        return Err(HarnessError::Numerical(format!(
            "every grid point failed; first failure: {first}"
        )));
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Analytic(args) => {
            let mut spec = load_spec("analytic", &args)?;
            spec.evaluators = vec![Evaluator::Analytic];
            finish(&spec, false)
        }
        Command::Simulate(args) => {
            let mut spec = load_spec("simulate", &args)?;
            spec.evaluators = vec![Evaluator::MonteCarlo];
            finish(&spec, false)
        }
        Command::Compare(args) => {
            let mut spec = load_spec("compare", &args)?;
            spec.evaluators = Evaluator::ALL.to_vec();
            finish(&spec, true)
        }
        Command::Figure { name, args } => {
            let mut spec = runner::figure_preset(&name)?;
            args.apply(&mut spec);
            finish(&spec, false)
        }
    }
}

fn main() {
    // Usage mistakes are config-class failures; exit code 2 is reserved
    // for numerical trouble, so clap's default exit status is not used.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    if let Err(e) = execute(cli.command) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
