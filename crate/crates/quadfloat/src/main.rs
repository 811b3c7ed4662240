use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quadfloat::commands::{self, ManualStep};
use quadfloat::config::{Config, Overrides, ScenarioKind};
use quadfloat::report::Channel;
use quadfloat::{exit, CliError, EXIT_CODE_HELP};
use quadfloat_core::hydro::RestoringMode;

#[derive(Parser)]
#[command(name = "quadfloat", version, about = "Surface-mode simulator for a floating quadrotor", after_help = EXIT_CODE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// TOML config with vehicle, sim, controller, tuning and scenario sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// impulse, y_step, psi_staircase or custom.
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    duration: Option<f64>,
    /// Reserved. The dynamics are deterministic and do not use it.
    #[arg(long)]
    seed: Option<u64>,
    /// linear or nonlinear.
    #[arg(long)]
    restoring: Option<RestoringMode>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            scenario: self.scenario,
            dt: self.dt,
            duration: self.duration,
            restoring: self.restoring,
        }
    }

    fn config(&self) -> Result<Config, CliError> {
        Config::load_or_default(self.config.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check vehicle parameters.
    #[command(after_help = EXIT_CODE_HELP)]
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario; writes trajectory.csv and metrics.json.
    #[command(after_help = EXIT_CODE_HELP)]
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Gains from a tuning.json; overrides the controller section.
        #[arg(long)]
        gains: Option<PathBuf>,
    },
    /// Search PI gains; writes tuning.json.
    #[command(after_help = EXIT_CODE_HELP)]
    Tune {
        #[command(flatten)]
        common: Common,
    },
    /// Recompute step metrics from a trajectory CSV; writes metrics.json.
    #[command(after_help = EXIT_CODE_HELP)]
    Metrics {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV.
        #[arg(long)]
        input: PathBuf,
        /// Channel for a single explicit step (x, y or psi). Needs --to.
        #[arg(long, requires = "to")]
        channel: Option<Channel>,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, requires = "channel")]
        to: Option<f64>,
        /// Another metrics.json to tabulate against.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { common } => {
            let text = commands::validate(&common.config()?)?;
            print!("{text}");
            println!("vehicle parameters ok");
        }
        Command::Simulate { common, gains } => {
            let gains = gains.as_deref().map(commands::load_gains).transpose()?;
            let res = commands::simulate(&common.config()?, &common.overrides(), gains, &common.out)?;
            println!(
                "{} samples, max |phi| {:.4} rad, max |theta| {:.4} rad",
                res.report.samples, res.report.max_abs_phi, res.report.max_abs_theta
            );
            if let Some(t) = res.report.capsize_warning_s {
                eprintln!("warning: roll or pitch passed the angle limit at t = {t} s");
            }
            for s in &res.report.steps {
                let rise = s.metrics.rise_time_s.map_or("not reached".to_string(), |r| format!("{r:.4} s"));
                println!(
                    "{:?} step {}: rise {rise}, peak {:.4} at {:.4} s, settling {}{:.4} s",
                    s.channel,
                    s.index + 1,
                    s.metrics.peak_value,
                    s.metrics.peak_time_s,
                    if s.metrics.settled { "" } else { "(unsettled) " },
                    s.metrics.settling_time_s
                );
            }
        }
        Command::Tune { common } => {
            let file = commands::tune(&common.config()?, &common.overrides(), &common.out)?;
            let g = file.gains;
            println!("x:   kp {} ki {}", g.x.kp, g.x.ki);
            println!("y:   kp {} ki {}", g.y.kp, g.y.ki);
            println!("psi: kp {} ki {}", g.psi.kp, g.psi.ki);
        }
        Command::Metrics {
            common,
            input,
            channel,
            t0,
            from,
            to,
            compare,
        } => {
            let manual = channel.zip(to).map(|(channel, to)| ManualStep { channel, t0, from, to });
            let (report, table) = commands::metrics(
                &common.config()?,
                &common.overrides(),
                &input,
                manual,
                compare.as_deref(),
                &common.out,
            )?;
            println!("{} steps", report.steps.len());
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(CliError::ValidationFailed(report)) => {
            print!("{report}");
            eprintln!("error: vehicle parameters failed validation");
            ExitCode::from(exit::VALIDATION_FAILED as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
