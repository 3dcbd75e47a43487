use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use featrend::config::parse_features;
use featrend::{create, io_err, load_history, scan, summary, trends, CliError, RunConfig, Warning};
use featrend_core::history::write_history;
use featrend_miner::{mine, MineOptions};

#[derive(Parser)]
#[command(name = "featrend", version, about = "Kotlin feature usage and evolution trends")]
struct Cli {
    /// key = value configuration file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print only warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count features in a directory or a single file.
    Scan {
        path: PathBuf,
        /// Comma-separated feature kinds to report (default: all 26).
        #[arg(long)]
        features: Option<String>,
        /// Normalized usage CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-file counts CSV.
        #[arg(long)]
        per_file: Option<PathBuf>,
    },
    /// Mine the first-parent history of a git repository into JSON.
    History {
        repo: PathBuf,
        /// Branch to mine (default: the checked-out branch).
        #[arg(long)]
        branch: Option<String>,
        /// History JSON (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-analyze every file at every commit instead of reusing results per blob.
        #[arg(long)]
        no_cache: bool,
        #[arg(long)]
        features: Option<String>,
        /// Repository name recorded in the output (default: directory name).
        #[arg(long)]
        repo_id: Option<String>,
    },
    /// Fit and classify each feature's evolution.
    Trends {
        #[arg(required = true)]
        histories: Vec<PathBuf>,
        /// R² slack within which a simpler model is preferred.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value = "trends.csv")]
        out: PathBuf,
        /// Directory for one SVG per (repository, feature) fit.
        #[arg(long)]
        plots: Option<PathBuf>,
        #[arg(long)]
        features: Option<String>,
    },
    /// Adoption, normalized usage, introduction moments and the trend table.
    Summarize {
        #[arg(required = true)]
        histories: Vec<PathBuf>,
        /// CSV written by `featrend trends`.
        #[arg(long)]
        trends: PathBuf,
        /// Report directory (default: report).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        features: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(warnings) if warnings.is_empty() => ExitCode::SUCCESS,
        Ok(warnings) => {
            for w in warnings {
                eprintln!("{w}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn info(quiet: bool, msg: impl FnOnce() -> String) {
    if !quiet {
        eprintln!("{}", msg());
    }
}

fn run(cli: Cli) -> Result<Vec<Warning>, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::PathNotFound(path.clone()),
            _ => CliError::Io { path: path.clone(), source: e },
        })?;
        config.apply_file(&text)?;
    }
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }
    let set_features = |config: &mut RunConfig, f: &Option<String>| -> Result<(), CliError> {
        if let Some(list) = f {
            config.features = parse_features(list)?;
        }
        Ok(())
    };
    let quiet = cli.quiet;

    match cli.command {
        Command::Scan { path, features, out, per_file } => {
            set_features(&mut config, &features)?;
            start(&config)?;
            let report = scan::scan(&path, &config)?;
            match &out {
                Some(p) => write_with(p, |w| scan::write_usage(&report.usage, w))?,
                None => scan::write_usage(&report.usage, std::io::stdout().lock())?,
            }
            if let Some(p) = &per_file {
                write_with(p, |w| scan::write_per_file(&report.files, w))?;
            }
            info(quiet, || format!("scanned {} Kotlin files", report.files.len() + report.warnings.len()));
            Ok(report.warnings)
        }
        Command::History { repo, branch, out, no_cache, features, repo_id } => {
            set_features(&mut config, &features)?;
            if branch.is_some() {
                config.branch = branch;
            }
            start(&config)?;
            if !repo.exists() {
                return Err(CliError::PathNotFound(repo));
            }
            let options = MineOptions { detect: config.detect_config(), use_cache: !no_cache, repo_id };
            let history = mine(&repo, config.branch.as_deref(), &options)?;
            let write = |w: &mut dyn Write| write_history(&history, w);
            match &out {
                Some(p) => {
                    let mut f = create(p)?;
                    write(&mut f).map_err(|e| history_err(p, e))?;
                    f.flush().map_err(io_err(p))?;
                }
                None => write(&mut std::io::stdout().lock()).map_err(|e| history_err(Path::new("-"), e))?,
            }
            info(quiet, || format!("mined {} commits of {}", history.commits.len(), history.repo_id));
            Ok(history
                .commits
                .iter()
                .flat_map(|c| c.warnings.iter().map(move |w| Warning { source: format!("{}:{}", &c.id[..12.min(c.id.len())], w.path), message: w.message.clone() }))
                .collect())
        }
        Command::Trends { histories, delta, out, plots, features } => {
            set_features(&mut config, &features)?;
            if let Some(d) = delta {
                config.delta = d;
            }
            if plots.is_some() {
                config.plots = plots;
            }
            config.validate()?;
            start(&config)?;
            let mut warnings = Vec::new();
            let mut loaded = Vec::new();
            for path in &histories {
                match load_history(path) {
                    Ok(h) => loaded.push(h),
                    Err(e @ CliError::History { .. }) => {
                        warnings.push(Warning { source: path.display().to_string(), message: format!("skipped: {e}") })
                    }
                    Err(e) => return Err(e),
                }
            }
            if loaded.is_empty() {
                return Err(CliError::InputMismatch("no readable history files".into()));
            }
            let records = trends::compute(&loaded, &config);
            write_with(&out, |w| trends::write_trends(&records, w))?;
            if let Some(dir) = &config.plots {
                trends::write_plots(&records, dir)?;
            }
            info(quiet, || format!("wrote {} trend rows to {}", records.len(), out.display()));
            Ok(warnings)
        }
        Command::Summarize { histories, trends: trends_path, out_dir, features } => {
            set_features(&mut config, &features)?;
            start(&config)?;
            let loaded = histories.iter().map(|p| load_history(p)).collect::<Result<Vec<_>, _>>()?;
            let file = std::fs::File::open(&trends_path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => CliError::PathNotFound(trends_path.clone()),
                _ => CliError::Io { path: trends_path.clone(), source: e },
            })?;
            let labels = trends::read_trends(file)?;
            let dir = out_dir.or(config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("report"));
            let warnings = summary::summarize(&loaded, &labels, &config, &dir)?;
            info(quiet, || format!("wrote report bundle to {}", dir.display()));
            Ok(warnings)
        }
    }
}

fn history_err(path: &Path, source: featrend_core::history::HistoryError) -> CliError {
    CliError::History { path: path.to_path_buf(), source }
}

fn start(config: &RunConfig) -> Result<(), CliError> {
    config.validate()?;
    if let Some(n) = config.jobs {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn write_with(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<(), CliError>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(io_err(path))
}
