//! Thin command-line front end over the library. The examples/
//! directory is the richer interface; this binary exists for scripted
//! use and file output.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lu25d::acceptance;
use lu25d::engine::{self, Collective, EngineConfig};
use lu25d::grid::{GridConfig, GridPreset};
use lu25d::harness::{self, report_for_run, SweepSpec};
use lu25d::matrix::{random_matrix, residual_norm};
use lu25d::model::{self, CostModelParams};

#[derive(Parser)]
#[command(name = "lu25d", version, about = "2.5D LU communication simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Flat,
    TwoLayer,
    Cube,
}

impl From<Preset> for GridPreset {
    fn from(p: Preset) -> Self {
        match p {
            Preset::Flat => GridPreset::SquareFlat,
            Preset::TwoLayer => GridPreset::SquareTwoLayer,
            Preset::Cube => GridPreset::Cube,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CollectiveArg {
    Rsag,
    Binomial,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    n: usize,
    /// Panel width; defaults to the widest admissible v <= 8.
    #[arg(long)]
    v: Option<usize>,
    /// Grid as PXxPYxPZ, e.g. 4x4x2.
    #[arg(long)]
    grid: GridConfig,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = CollectiveArg::Rsag)]
    collective: CollectiveArg,
}

impl RunArgs {
    fn config(&self) -> lu25d::Result<EngineConfig> {
        let v = match self.v {
            Some(v) => v,
            None => EngineConfig::default_panel_width(self.n, self.grid).ok_or_else(|| {
                lu25d::Error::InvalidConfig(format!(
                    "no admissible panel width for n={} on {}",
                    self.n, self.grid
                ))
            })?,
        };
        let mut cfg = EngineConfig::new(self.n, v, self.grid, self.seed);
        cfg.collective = match self.collective {
            CollectiveArg::Rsag => Collective::Rsag,
            CollectiveArg::Binomial => Collective::Binomial,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one factorization and report per-phase costs.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Dump the raw superstep ledger instead of the phase summary.
        #[arg(long)]
        ledger: bool,
    },
    /// Evaluate every closed-form cost formula for one configuration.
    Model {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        v: u64,
        #[arg(long)]
        p: usize,
        #[arg(long, value_enum, default_value_t = Preset::Flat)]
        preset: Preset,
        /// Per-processor memory in words; defaults to n^2*c/(2p).
        #[arg(long)]
        m: Option<f64>,
        /// Maximal computational intensity; required for the lower bound.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a sweep described by a JSON spec file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the acceptance checks; exit nonzero on any failure.
    Verify,
    /// Pivot-origin histogram and chi-square for one run.
    PivotStats {
        #[command(flatten)]
        run: RunArgs,
    },
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout()),
    })
}

fn real_main() -> lu25d::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { run, out, format, ledger } => {
            let cfg = run.config()?;
            let a = random_matrix(cfg.n, cfg.seed)?;
            let res = engine::run(&cfg, &a)?;
            let residual = residual_norm(&a, &res.factors)?;
            let w = open_out(&out)?;
            if ledger {
                res.ledger.write_csv(w)?;
            } else {
                let rep = report_for_run(&res, cfg.seed, residual);
                match format {
                    Format::Csv => harness::write_report_csv(std::slice::from_ref(&rep), w)?,
                    Format::Json => serde_json::to_writer_pretty(w, &rep)?,
                }
            }
            eprintln!(
                "n={} v={} grid={} seed={} collective={}: critical path {} words, residual {:.3e}",
                cfg.n,
                cfg.v,
                cfg.grid,
                cfg.seed,
                cfg.collective.label(),
                res.ledger.critical_path_cost(None),
                residual
            );
        }
        Command::Model { n, v, p, preset, m, rho, kappa, out, format } => {
            let grid = GridConfig::make_grid(p, preset.into())?;
            let mut params =
                CostModelParams::new(n, v, grid.pz() as u64, grid.p1() as u64);
            if let Some(m) = m {
                params = params.with_m(m);
            }
            if let Some(rho) = rho {
                params = params.with_rho(rho);
            }
            let rows = model::model_table(&params, kappa);
            let w = open_out(&out)?;
            match format {
                Format::Csv => model::write_model_csv(&rows, w)?,
                Format::Json => serde_json::to_writer_pretty(w, &rows)?,
            }
        }
        Command::Sweep { spec, out, format } => {
            let spec: SweepSpec = serde_json::from_reader(File::open(spec)?)?;
            let result = harness::run_sweep(&spec)?;
            for (grid, reason) in &result.skipped {
                eprintln!("skipped {grid}: {reason}");
            }
            let w = open_out(&out)?;
            match format {
                Format::Csv => harness::write_report_csv(&result.reports, w)?,
                Format::Json => harness::write_report_json(&result, w)?,
            }
        }
        Command::Verify => {
            let outcomes = acceptance::run_all();
            let mut ok = true;
            for o in &outcomes {
                let status = if o.passed { "PASS" } else { "FAIL" };
                println!("[{status}] {:2}. {} — {}", o.id, o.name, o.detail);
                ok &= o.passed;
            }
            return Ok(ok);
        }
        Command::PivotStats { run } => {
            let cfg = run.config()?;
            let a = random_matrix(cfg.n, cfg.seed)?;
            let res = engine::run(&cfg, &a)?;
            let (hist, chi) = harness::pivot_uniformity(&res);
            println!(
                "pivot origins over the {}x{} face (layers aggregated), n={}",
                cfg.grid.px(),
                cfg.grid.py(),
                cfg.n
            );
            for row in &hist {
                let cells: Vec<String> = row.iter().map(|c| format!("{c:6}")).collect();
                println!("  {}", cells.join(" "));
            }
            let expected = cfg.n as f64 / cfg.grid.p1() as f64;
            println!("expected per cell: {expected:.2}, chi-square: {chi:.3}");
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
