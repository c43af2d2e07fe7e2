//! `lab`: batch front end for the arraylab experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arraylab::experiments::{run, ExperimentConfig, Verb};
use arraylab::ExperimentError;
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerbArg {
    Build,
    Spectrum,
    Certify,
    Collapse,
    Scan,
    Walk,
    TorusReport,
}

impl From<VerbArg> for Verb {
    fn from(v: VerbArg) -> Self {
        match v {
            VerbArg::Build => Verb::Build,
            VerbArg::Spectrum => Verb::Spectrum,
            VerbArg::Certify => Verb::Certify,
            VerbArg::Collapse => Verb::Collapse,
            VerbArg::Scan => Verb::Scan,
            VerbArg::Walk => Verb::Walk,
            VerbArg::TorusReport => Verb::TorusReport,
        }
    }
}

/// Spectral experiments on arrays of circles and random walks on F2.
///
/// Exit codes: 0 success, 1 failed assertions, 2 bad configuration or
/// document, 3 I/O, 4 graph construction, 5 eigensolver, 6 bounds, 7 walks.
#[derive(Debug, Parser)]
#[command(name = "lab", version)]
struct Cli {
    verb: VerbArg,
    /// Experiment configuration (JSON). Without it the verb's defaults apply.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scan a single depth.
    #[arg(long = "h")]
    depth: Option<u32>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Residual tolerance of the iterative solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for walks, collapse test functions and the solver start vector.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall times in the result documents.
    #[arg(long)]
    timings: bool,
    /// Caps the worker pool.
    #[arg(long, env = "LAB_THREADS")]
    threads: Option<usize>,
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, PathBuf), ExperimentError> {
    let verb = Verb::from(cli.verb);
    let (mut cfg, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
                path: path.clone(),
                source,
            })?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if cfg.verb != verb {
                return Err(ExperimentError::Config(format!(
                    "config is for verb {}, not {}",
                    cfg.verb.name(),
                    verb.name()
                )));
            }
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, base)
        }
        None => (ExperimentConfig::new(verb), PathBuf::from(".")),
    };
    if let Some(h) = cli.depth {
        cfg.scan.only_depth(h);
    }
    if cli.k_min.is_some() || cli.k_max.is_some() {
        cfg.scan.set_k(cli.k_min, cli.k_max);
    }
    if let Some(tol) = cli.tol {
        cfg.solver.tol = tol;
    }
    if let Some(seed) = cli.seed {
        cfg.walk.seed = seed;
        cfg.collapse.seed = seed;
        cfg.solver.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.timings = cli.timings;
    cfg.validate()?;
    Ok((cfg, base))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = load(&cli).and_then(|(cfg, base)| {
        let outcome = run(&cfg, &base)?;
        outcome.write_to(&cfg.output_dir)?;
        Ok((cfg, outcome))
    });
    match result {
        Ok((cfg, outcome)) => {
            for a in &outcome.artifacts {
                println!("{}", cfg.output_dir.join(&a.name).display());
            }
            for f in &outcome.failures {
                eprintln!("FAIL {f}");
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
