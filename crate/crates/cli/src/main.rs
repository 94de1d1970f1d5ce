use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biofilm::run::{build, inspect, load_config, simulate, RunError, RunOptions};
use biofilm::verify::{run_suites, table, Suite};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biofilm", version, about = "Two-phase biofilm spread on a moving 2D slice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the time slabs of a configuration and export the fields.
    Simulate {
        config: PathBuf,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Final slab time, overriding `time.t_end`.
        #[arg(long)]
        until: Option<f64>,
    },
    /// Run a verification suite and print a pass/fail table.
    Verify {
        /// geometry, fem, mechanics, shape-derivative, transport,
        /// concentration, moving-diffusion, coupled or all.
        suite: String,
    },
    /// Print the normalized configuration and derived quantities.
    Inspect { config: PathBuf },
}

fn base_dir(config: &Path) -> PathBuf {
    config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn fail(err: RunError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, out, until } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let opts = RunOptions { out, until };
            match simulate(&cfg, &base_dir(&config), &opts, &mut io::stdout()) {
                Ok(run) => {
                    println!(
                        "{} slabs, report {}, {} field files",
                        run.slabs.len(),
                        run.report.display(),
                        run.files.len()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify { suite } => {
            let Some(suites) = Suite::parse(&suite) else {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                eprintln!("error: unknown suite `{suite}`; choose one of {}, all", names.join(", "));
                return ExitCode::from(2);
            };
            let reports = run_suites(&suites, |r| println!("{}", r.line()));
            println!();
            print!("{}", table(&reports));
            if reports.iter().any(|r| r.is_fatal()) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Inspect { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let setup = match build(&cfg, &base_dir(&config)) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let info = inspect(&setup);
            print!("{}", cfg.normalized());
            println!();
            println!("# t_max = {}", info.t_max);
            println!("# slabs = {}", cfg.slab_times(cfg.time.t_end).len());
            println!("# diameter = {}", info.diameter);
            println!("# min triangle quality = {}", info.min_quality);
            println!("# degree-2 nodes = {}", info.dofs_p2);
            println!("# coercivity margin at rest = {}", info.rest_margin);
            if cfg.time.t_end > info.t_max {
                println!("# warning: t_end exceeds t_max");
            }
            ExitCode::SUCCESS
        }
    }
}
