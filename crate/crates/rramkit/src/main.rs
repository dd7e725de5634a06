use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rram_core::designflow::Sequential;
use rram_core::primitives::Orientation;
use rramkit::commands::{self, CommandOutput, CrossbarArgs, OrientationChoice};
use rramkit::config::parse_mode;
use rramkit::exec::Parallel;
use rramkit::{CliError, CliResult};

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 verification failed, 2 config or input error, 3 numeric error.

Waveform text files start with the header `voltage_V,duration_s` followed by one
`voltage,duration` line per constant segment. A line `#read <k>` marks the next
segment as the sample point of a read taken after k programming pulses; other
lines starting with `#` are comments.

Config keys are documented in docs/config.md.";

#[derive(Parser)]
#[command(name = "rramkit", version, about = "Memristor device, cell and crossbar simulation", after_help = AFTER_HELP)]
struct Cli {
    /// Directory for CSV outputs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for independent sweeps; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Both,
    #[value(alias = "s2r")]
    SourceToRram,
    #[value(alias = "d2r")]
    DrainToRram,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply the configured waveform to one device; writes trace.csv and reads.csv.
    Simulate { config: PathBuf },
    /// Pulse-count, width or amplitude characterization; writes characterize_<mode>.csv.
    Characterize {
        config: PathBuf,
        /// pulses, width or amplitude; overrides [waveform] mode.
        #[arg(long)]
        mode: Option<String>,
    },
    /// 1T1R operating points for both polarities; CSV on stdout and dcop.csv.
    Dcop {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        orientation: OrientationArg,
    },
    /// Read, program or IR-drop report on a crossbar array.
    Crossbar {
        /// Array config; defaults to a passive array of 1 kOhm cells.
        config: Option<PathBuf>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        /// Read cell ROW COL.
        #[arg(long, num_args = 2, value_names = ["ROW", "COL"])]
        read: Option<Vec<usize>>,
        /// Program cell ROW COL with the [waveform] pulse.
        #[arg(long, num_args = 2, value_names = ["ROW", "COL"])]
        program: Option<Vec<usize>>,
        /// Delivered voltage at the far-corner cell.
        #[arg(long)]
        ir_drop: bool,
    },
    /// NAND design-flow verification; exit 1 when the design fails.
    Verify { config: PathBuf },
}

fn pair(v: Option<Vec<usize>>) -> Option<(usize, usize)> {
    v.map(|v| (v[0], v[1]))
}

fn run(cli: Cli) -> CliResult<CommandOutput> {
    let out = cli.out.as_path();
    let pool = || Parallel::new(cli.jobs).map_err(|e| CliError::config(format!("thread pool: {e}")));
    match cli.cmd {
        Cmd::Simulate { config } => commands::simulate(&config, out),
        Cmd::Characterize { config, mode } => {
            let mode = mode.as_deref().map(parse_mode).transpose()?;
            if cli.jobs > 1 {
                commands::characterize(&config, mode, out, &pool()?)
            } else {
                commands::characterize(&config, mode, out, &Sequential)
            }
        }
        Cmd::Dcop { config, orientation } => {
            let which = match orientation {
                OrientationArg::Both => OrientationChoice::Both,
                OrientationArg::SourceToRram => OrientationChoice::One(Orientation::SourceToRram),
                OrientationArg::DrainToRram => OrientationChoice::One(Orientation::DrainToRram),
            };
            commands::dcop(&config, which, out)
        }
        Cmd::Crossbar {
            config,
            rows,
            cols,
            read,
            program,
            ir_drop,
        } => {
            let args = CrossbarArgs {
                rows,
                cols,
                read: pair(read),
                program: pair(program),
                ir_drop,
            };
            commands::crossbar(config.as_deref(), &args, out)
        }
        Cmd::Verify { config } => {
            if cli.jobs > 1 {
                commands::verify(&config, out, &pool()?)
            } else {
                commands::verify(&config, out, &Sequential)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            print!("{}", o.stdout);
            for n in &o.notes {
                eprintln!("{n}");
            }
            ExitCode::from(o.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
