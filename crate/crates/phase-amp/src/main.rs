//! Command-line interface for the continuum-state solver.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phase_amp::amplitude::AmplitudeMethod;
use phase_amp::cli::{
    benchmark_csv, peak_csv, run_benchmark, run_find_peak, run_scan_alpha, run_solve, scan_csv,
    solve_rows_csv, write_json, GridSpec, RunConfig,
};
use phase_amp::error::{Error, Result};
use phase_amp::potentials::PotentialKind;

#[derive(Parser)]
#[command(
    name = "phase-amp",
    version,
    about = "Energy-normalized regular and irregular continuum radial wavefunctions \
             via a phase-amplitude spectral-element solver"
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for scans and benchmarks (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Linear third-order amplitude equation.
    Linear17,
    /// Nonlinear second-order amplitude equation.
    Nonlinear16,
}

impl From<MethodArg> for AmplitudeMethod {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::Linear17 => AmplitudeMethod::LinearThirdOrder,
            MethodArg::Nonlinear16 => AmplitudeMethod::NonlinearSecondOrder,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Potential: free | coulomb | scp | hulthen | ecscp.
    #[arg(long)]
    potential: String,

    /// Charge Z.
    #[arg(long = "Z", default_value_t = 1.0)]
    z: f64,

    /// Screening parameter α (screened potentials).
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,

    /// Momentum k = √(2E).
    #[arg(long, default_value_t = 1.0)]
    k: f64,

    /// Matching radius below the first node of the regular solution.
    #[arg(long = "r-min", default_value_t = 0.001)]
    r_min: f64,

    /// Collocated coefficients per element (N − ν).
    #[arg(long, default_value_t = 12)]
    order: usize,

    /// Which amplitude equation to integrate.
    #[arg(long, value_enum, default_value = "linear17")]
    method: MethodArg,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Output path (default: standard output).
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate S, C, Y and Φ over a radial grid.
    Solve {
        #[command(flatten)]
        common: CommonArgs,

        /// Angular momentum l.
        #[arg(long, default_value_t = 0)]
        l: u32,

        /// Radial grid lo:hi:count[:log].
        #[arg(long, default_value = "0.001:300:1025")]
        grid: GridSpec,
    },
    /// Pointwise scaled errors of S and C against the built-in reference
    /// solutions, for l = 0..=l_max.
    Benchmark {
        #[command(flatten)]
        common: CommonArgs,

        /// Largest angular momentum to test.
        #[arg(long = "l-max", default_value_t = 4)]
        l_max: u32,

        /// Radial grid lo:hi:count[:log].
        #[arg(long, default_value = "0.001:300:1025")]
        grid: GridSpec,
    },
    /// Density at the origin, Ψ₀(0) and Ψ₀²(0), over a screening scan.
    ScanAlpha {
        #[command(flatten)]
        common: CommonArgs,

        /// Screening grid lo:hi:count[:log].
        #[arg(long = "alpha-grid", default_value = "0.01:100:1025:log")]
        alpha_grid: GridSpec,
    },
    /// Locate the single interior maximum of Ψ₀(0) in a bracket.
    FindPeak {
        #[command(flatten)]
        common: CommonArgs,

        /// Bracket lo:hi (the grid count is ignored).
        #[arg(long = "alpha-grid", default_value = "0.5:4:2")]
        alpha_grid: GridSpec,
    },
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    if let Some(jobs) = args.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn open_output(path: &Option<std::path::PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn run_config(common: &CommonArgs, l: u32, grid: GridSpec) -> Result<RunConfig> {
    Ok(RunConfig {
        potential: PotentialKind::from_tag(&common.potential, common.z, common.alpha)?,
        k: common.k,
        l,
        r_min: common.r_min,
        order: common.order,
        method: common.method.into(),
        grid,
    })
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Solve { common, l, grid } => {
            let cfg = run_config(&common, l, grid)?;
            let rows = run_solve(&cfg)?;
            let mut out = open_output(&common.output)?;
            match common.format {
                FormatArg::Csv => solve_rows_csv(&mut out, &rows)?,
                FormatArg::Json => write_json(&mut out, &rows)?,
            }
            out.flush().map_err(Error::Io)?;
            Ok(())
        }
        Command::Benchmark {
            common,
            l_max,
            grid,
        } => {
            let cfg = run_config(&common, 0, grid)?;
            let (rows, summaries) = run_benchmark(&cfg, l_max)?;
            let mut out = open_output(&common.output)?;
            match common.format {
                FormatArg::Csv => benchmark_csv(&mut out, &rows, &summaries)?,
                FormatArg::Json => write_json(&mut out, &rows)?,
            }
            out.flush().map_err(Error::Io)?;
            Ok(())
        }
        Command::ScanAlpha { common, alpha_grid } => {
            let records = run_scan_alpha(
                &common.potential,
                common.z,
                &alpha_grid.points(),
                common.k,
                common.r_min,
                common.method.into(),
                common.order,
            )?;
            let mut out = open_output(&common.output)?;
            match common.format {
                FormatArg::Csv => scan_csv(&mut out, &records)?,
                FormatArg::Json => write_json(&mut out, &records)?,
            }
            out.flush().map_err(Error::Io)?;
            Ok(())
        }
        Command::FindPeak { common, alpha_grid } => {
            let peak = run_find_peak(
                &common.potential,
                common.z,
                (alpha_grid.lo, alpha_grid.hi),
                common.k,
                common.r_min,
                common.method.into(),
                common.order,
            )?;
            let mut out = open_output(&common.output)?;
            match common.format {
                FormatArg::Csv => peak_csv(&mut out, &peak)?,
                FormatArg::Json => write_json(&mut out, std::slice::from_ref(&peak))?,
            }
            out.flush().map_err(Error::Io)?;
            Ok(())
        }
    }
}
