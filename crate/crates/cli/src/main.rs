mod config;
mod output;
mod plots;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{ConfigError, ExperimentConfig, FigureId, FigureSpec, Task};

/// Topology of photon-mediated emitter lattices: invariants, symmetry
/// classes and finite-lattice figure recipes.
#[derive(Debug, Parser)]
#[command(name = "mediatopo", version)]
struct Args {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured task.
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// Figure recipe with default parameters; overrides the configured figure.
    #[arg(long, value_enum)]
    figure: Option<FigureId>,
    /// Output directory [default: config `output`, else `out`].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Brillouin-zone points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Recorded in the metadata; no computation is randomized.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn config_error(e: ConfigError) -> ExitCode {
    let report = json!({ "error": { "kind": "config", "message": e.0 } });
    eprintln!("{report}");
    ExitCode::from(2)
}

fn domain_error(e: mediatopo::Error) -> ExitCode {
    let report = json!({
        "error": { "kind": "domain", "module": e.module(), "code": e.code(), "message": e.to_string() }
    });
    eprintln!("{report}");
    ExitCode::from(1)
}

fn load(args: &Args) -> Result<ExperimentConfig, ConfigError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(t) = args.task {
        config.task = Some(t);
    }
    if let Some(id) = args.figure {
        if config.figure.as_ref().map(FigureSpec::id) != Some(id) {
            config.figure = Some(FigureSpec::default_for(id));
        }
        config.task.get_or_insert(Task::Figure);
    }
    if let Some(m) = args.grid {
        config.grid = Some(m);
    }
    config.validate()?;
    Ok(config)
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(value) = std::env::var("TOPO_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError(format!("TOPO_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = init_threads() {
        return config_error(e);
    }
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if config.task == Some(Task::ListModels) {
        let catalog = serde_json::to_string_pretty(&mediatopo::models::catalog()).expect("catalog serializes");
        say(&catalog);
        return ExitCode::SUCCESS;
    }
    let dir = args.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let config = match run::resolve(config) {
        Ok(c) => c,
        Err(e) => return domain_error(e),
    };
    let outcome = match run::execute(&config) {
        Ok(o) => o,
        Err(e) => return domain_error(e),
    };
    for line in &outcome.summary {
        say(line);
    }
    let failed = config.task == Some(Task::Table1)
        && outcome.results["rows"].as_array().is_some_and(|rows| rows.iter().any(|r| r["pass"] != true));
    if let Err(e) = output::write_all(&dir, &config, args.seed, outcome) {
        let report = json!({ "error": { "kind": "io", "module": "cli", "message": e.to_string() } });
        eprintln!("{report}");
        return ExitCode::from(1);
    }
    say(&format!("wrote {}", dir.display()));
    if failed {
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
