use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use synthdomain::chart::charts;
use synthdomain::domain::{direct_domain, dp_domain, ExtractionConfig};
use synthdomain::dp::{BudgetLedger, PrivacyBudget, RandomStream};
use synthdomain::experiment::{
    run_experiment, Cell, CellResult, ExperimentConfig, GridSpec, Progress, ResultFile, RunOptions,
};
use synthdomain::mia::{select_target, TargetMode};
use synthdomain::table::load_csv;

const OUTPUT_ENV: &str = "SYNTHDOMAIN_OUTPUT_DIR";
const DEFAULT_OUTPUT: &str = "results";

#[derive(Parser)]
#[command(name = "synthdomain", version, about = "Domain-extraction leakage experiments for DP synthetic data")]
struct Cli {
    /// Worker threads for shadow runs (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of an experiment config and plot the results.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Run the Cartesian grid of a base config and a grid spec.
    Sweep {
        config: PathBuf,
        grid: PathBuf,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Render charts from result files.
    Plot {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the chosen target record and its outside flags.
    SelectTarget {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value = "outside")]
        mode: Mode,
    },
    /// Print per-column bounds under each domain strategy.
    ExtractDomain {
        #[command(flatten)]
        data: DataArgs,
        /// Budget for DP extraction (split evenly across columns).
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write one of the figure presets as a config file.
    Preset {
        #[arg(value_parser = ["figure1", "figure2", "figure3", "figure4"])]
        name: String,
        /// Dataset path recorded in the config.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Output directory (overrides the config and the environment).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the number of shadow runs per world.
    #[arg(long)]
    runs: Option<usize>,
    /// Stop after computing this many new cells.
    #[arg(long, hide = true)]
    max_cells: Option<usize>,
}

#[derive(clap::Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = ";")]
    delimiter: char,
    /// Columns to drop (repeatable).
    #[arg(long = "drop", default_values_t = ["quality".to_string()])]
    drop_columns: Vec<String>,
}

impl DataArgs {
    fn load(&self) -> Result<synthdomain::table::Table> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        Ok(load_csv(&self.data, self.delimiter as u8, &self.drop_columns)?)
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Outside,
    Inside,
}

impl From<Mode> for TargetMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Outside => TargetMode::Outside,
            Mode::Inside => TargetMode::Inside,
        }
    }
}

struct Log;

fn describe(cell: &Cell) -> String {
    format!(
        "{} / {} / {} eps=({}, {})",
        cell.generator.name(),
        cell.discretizer.name(),
        cell.strategy.name(),
        cell.eps_pre,
        cell.eps_model
    )
}

impl Progress for Log {
    fn cell_started(&mut self, index: usize, total: usize, cell: &Cell) {
        eprintln!("[{}/{total}] running {}", index + 1, describe(cell));
    }

    fn cell_skipped(&mut self, index: usize, total: usize, cell: &Cell) {
        eprintln!("[{}/{total}] skipping completed {}", index + 1, describe(cell));
    }

    fn cell_finished(&mut self, index: usize, total: usize, result: &CellResult) {
        match (&result.auc, &result.error) {
            (Some(auc), _) => eprintln!("[{}/{total}] auc {auc:.4}", index + 1),
            (_, Some(err)) => eprintln!("[{}/{total}] FAILED: {err}", index + 1),
            _ => {}
        }
    }
}

fn output_dir(flag: Option<PathBuf>, config: Option<&PathBuf>) -> PathBuf {
    flag.or_else(|| config.cloned())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    cfg.resolve_dataset(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

fn write_charts(results: &[CellResult], dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut paths = Vec::new();
    for chart in charts(results)? {
        let path = dir.join(format!("{prefix}-{}.svg", chart.file_stem()));
        fs::write(&path, &chart.svg).with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
    }
    Ok(paths)
}

fn execute(mut cfg: ExperimentConfig, opts: RunArgs) -> Result<bool> {
    if let Some(runs) = opts.runs {
        cfg.n_runs = runs;
    }
    let dir = output_dir(opts.out_dir, cfg.output_dir.as_ref());
    let out = dir.join(format!("{}.json", cfg.name));
    let run_opts = RunOptions {
        max_new_cells: opts.max_cells,
    };
    let (file, summary) = run_experiment(&cfg, &out, &run_opts, &mut Log)?;
    eprintln!(
        "{} computed, {} skipped, {} failed, {} remaining; results in {}",
        summary.computed,
        summary.skipped,
        summary.failed,
        summary.remaining,
        out.display()
    );
    if file.cells.iter().any(|c| c.auc.is_some()) {
        for p in write_charts(&file.cells, &dir, &cfg.name)? {
            eprintln!("chart {}", p.display());
        }
    }
    Ok(!file.cells.iter().any(CellResult::failed))
}

fn dispatch(cli: Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Run { config, opts } => execute(load_config(&config)?, opts),
        Command::Sweep { config, grid, opts } => {
            let base = load_config(&config)?;
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let spec: GridSpec =
                serde_json::from_str(&text).with_context(|| format!("parsing grid {}", grid.display()))?;
            execute(spec.apply(&base), opts)
        }
        Command::Plot { results, out_dir } => {
            let mut cells = Vec::new();
            let mut prefix = None;
            for p in &results {
                let file = ResultFile::load(p).with_context(|| format!("loading {}", p.display()))?;
                prefix.get_or_insert(file.config.name.clone());
                cells.extend(file.cells);
            }
            let dir = output_dir(out_dir, None);
            for p in write_charts(&cells, &dir, prefix.as_deref().unwrap_or("results"))? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Command::SelectTarget { data, mode } => {
            let table = data.load()?;
            let sel = select_target(&table, mode.into())?;
            let named: Vec<_> = table
                .names()
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    json!({
                        "column": name,
                        "value": sel.values[c],
                        "remaining_min": sel.remaining_range[c].0,
                        "remaining_max": sel.remaining_range[c].1,
                        "outside": sel.outside[c],
                    })
                })
                .collect();
            let out = json!({
                "index": sel.index,
                "mode": sel.mode,
                "mean_distance": sel.mean_distance,
                "columns": named,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::ExtractDomain { data, eps, seed } => {
            let table = data.load()?;
            let mut direct_ledger = BudgetLedger::new(PrivacyBudget::split(0.0, 0.0, 0.0, false)?);
            let direct = direct_domain(&table, &mut direct_ledger);
            let mut dp_ledger = BudgetLedger::new(PrivacyBudget {
                eps_extract: eps,
                eps_disc: 0.0,
                eps_model: 0.0,
                delta: 0.0,
            });
            let dp = dp_domain(
                &table,
                eps,
                &ExtractionConfig::default(),
                &mut dp_ledger,
                &mut RandomStream::from_seed(seed),
            )?;
            let columns: Vec<_> = table
                .names()
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    json!({
                        "column": name,
                        "direct": [direct.bounds[c].lo, direct.bounds[c].hi],
                        "dp": [dp.bounds[c].lo, dp.bounds[c].hi],
                    })
                })
                .collect();
            let out = json!({
                "provided": "configured bounds, or the full dataset's range (equal to direct on the full data)",
                "dp_eps": eps,
                "seed": seed,
                "columns": columns,
                "ledgers": { "direct": direct_ledger, "dp": dp_ledger },
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Preset {
            name,
            data,
            runs,
            seed,
            out,
        } => {
            let mut cfg = ExperimentConfig::preset(&name, data)?;
            if let Some(r) = runs {
                cfg.n_runs = r;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.validate()?;
            let text = serde_json::to_string_pretty(&cfg)? + "\n";
            match out {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
