use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use latwalk::run::{check, run, theory_table};
use latwalk::scenario::{parse, ModelKind, ScenarioSpec};

mod catalog;

/// Discrete-spacetime random-walk scenario runner.
#[derive(Parser)]
#[command(name = "latwalk", version)]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "LATWALK_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV artifacts.
    Run {
        /// Scenario file, or the name of a bundled scenario.
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        np: Option<u64>,
        #[arg(long)]
        nt: Option<u64>,
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a scenario without running it.
    Validate { config: String },
    /// List the bundled scenarios.
    ListScenarios,
    /// Print the oracle position pmf of a scenario as `node,theory`.
    PrintTheory {
        config: String,
        #[arg(long)]
        nt: Option<u64>,
    },
}

fn load(config: &str) -> Result<ScenarioSpec> {
    let path = Path::new(config);
    let src = if path.exists() {
        fs::read_to_string(path).with_context(|| format!("reading {config}"))?
    } else if let Some(s) = catalog::lookup(config) {
        s.to_string()
    } else {
        bail!("{config}: no such file or bundled scenario");
    };
    Ok(parse(&src)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            seed,
            np,
            nt,
            model,
            out,
        } => {
            let mut spec = load(&config)?;
            if let Some(v) = seed {
                spec.seed = v;
            }
            if let Some(v) = np {
                spec.n_p = v;
            }
            if let Some(v) = nt {
                spec.n_t = v;
            }
            if let Some(v) = model {
                spec.model = v;
            }
            let result = run(&spec)?;
            for f in result.write(&out)? {
                println!("{}", f.display());
            }
            print!("{}", result.summary.render());
        }
        Command::Validate { config } => {
            let spec = load(&config)?;
            check(&spec)?;
            println!("{}: ok ({})", spec.name, spec.hash());
        }
        Command::ListScenarios => {
            for (name, src) in catalog::CATALOG {
                let spec = parse(src)?;
                println!("{name:<18} {:<10} {}", spec.model.to_string(), spec.description);
            }
        }
        Command::PrintTheory { config, nt } => {
            let mut spec = load(&config)?;
            if let Some(v) = nt {
                spec.n_t = v;
            }
            match theory_table(&spec)? {
                Some(rows) => {
                    println!("node,theory");
                    for (x, p) in rows {
                        println!("{x},{p:e}");
                    }
                }
                None => bail!("{}: no closed-form position pmf for this scenario", spec.name),
            }
        }
    }
    Ok(())
}
