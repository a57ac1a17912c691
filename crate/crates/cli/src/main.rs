//! `srnlsd` — serial-dependence testing from the command line.
//!
//! Exit codes: 0 the null is not rejected, 3 rejected, 1 runtime error,
//! 2 usage error.

mod csv_in;
mod heatmap;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use srnlsd::montecarlo::{
    fig1_grids, fig2_grids, rows_from_csv, rows_to_csv, run_size_experiment, Axis2, ExperimentGrid,
    Scale, SizeGrid, SizeRow,
};
use srnlsd::{run_test, MeanCorrection, Shrinkage, TestConfig, TransformSpec};

#[derive(Parser)]
#[command(
    name = "srnlsd",
    version,
    about = "Portmanteau tests for (non)linear serial dependence, with Ledoit–Wolf shrinkage \
             of the lag-0 covariance for high-dimensional panels"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test a CSV of observations (rows = time, columns = variables)
    Test(TestArgs),
    /// Run an empirical-size Monte Carlo grid and write a long-format CSV
    Simulate(SimulateArgs),
    /// Render a size-grid CSV as an SVG heatmap
    Plot(PlotArgs),
}

#[derive(Args)]
struct TestArgs {
    /// Input CSV; a non-numeric first row is treated as a header
    input: PathBuf,
    /// Maximum lag H of the null hypothesis
    #[arg(long = "lags", default_value_t = 1)]
    lags: usize,
    /// Comma-separated transform list (pow:E, spow:E, abs, log); must start
    /// with the identity pow:1
    #[arg(long, default_value = "pow:1,pow:2")]
    transforms: String,
    /// lag-0 covariance treatment: lw (Ledoit–Wolf shrinkage) or none
    #[arg(long, default_value = "lw")]
    shrinkage: String,
    /// significance level in (0, 1)
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// autocovariance mean correction: as-written or grand-mean
    #[arg(long = "mean-correction", default_value = "as-written")]
    mean_correction: String,
    /// print the one-line TSV form instead of JSON
    #[arg(long)]
    tsv: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Named preset: fig1 (grow N at K=2) or fig2 (grow K at N=2)
    #[arg(long, conflicts_with_all = ["vary", "t_values", "axis2_values", "fixed", "df_values"])]
    preset: Option<String>,
    /// Grid size for presets: desk or full
    #[arg(long, default_value = "desk")]
    scale: String,
    /// Master seed; the output is a pure function of the grid and this seed
    #[arg(long)]
    seed: u64,
    /// Output CSV path
    #[arg(long, default_value = "size_grid.csv")]
    out: PathBuf,
    /// Worker threads (0 = all cores); the results do not depend on this
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Override the preset replication count
    #[arg(long)]
    replications: Option<usize>,
    /// Custom grid: sample sizes, e.g. 100,300,1000
    #[arg(long = "t-values", value_delimiter = ',')]
    t_values: Option<Vec<usize>>,
    /// Custom grid: which dimension the second axis varies (n or k)
    #[arg(long)]
    vary: Option<String>,
    /// Custom grid: values of the varying dimension
    #[arg(long = "axis2-values", value_delimiter = ',')]
    axis2_values: Option<Vec<usize>>,
    /// Custom grid: the held-fixed other dimension (K when varying N, N when
    /// varying K)
    #[arg(long, default_value_t = 2)]
    fixed: usize,
    /// Custom grid: Student-t degrees of freedom, e.g. 4,7,10
    #[arg(long = "df-values", value_delimiter = ',')]
    df_values: Option<Vec<f64>>,
    #[arg(long = "lags", default_value_t = 1)]
    lags: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct PlotArgs {
    /// Size-grid CSV produced by `srnlsd simulate`
    input: PathBuf,
    /// Output SVG path
    #[arg(long, default_value = "size_grid.svg")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Test(args) => cmd_test(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Plot(args) => cmd_plot(args),
    }
}

fn cmd_test(args: TestArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let series = csv_in::parse_series_csv(&text)
        .with_context(|| format!("parsing {}", args.input.display()))?;

    let config = TestConfig {
        max_lag: args.lags,
        spec: TransformSpec::parse(&args.transforms)?,
        shrinkage: args.shrinkage.parse::<Shrinkage>()?,
        alpha: args.alpha,
        mean_correction: args.mean_correction.parse::<MeanCorrection>()?,
    };
    let report = run_test(&series, &config)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if args.tsv {
        println!("{}", srnlsd::TestReport::tsv_header());
        println!("{}", report.to_tsv());
    } else {
        println!("{}", report.to_json());
    }
    Ok(if report.reject { 3 } else { 0 })
}

fn build_grids(args: &SimulateArgs) -> Result<Vec<ExperimentGrid>> {
    let scale: Scale = args.scale.parse()?;
    let mut grids = match args.preset.as_deref() {
        Some("fig1") => fig1_grids(scale, args.seed),
        Some("fig2") => fig2_grids(scale, args.seed),
        Some(other) => bail!("unknown preset '{other}' (expected fig1 or fig2)"),
        None => {
            let t_values = args
                .t_values
                .clone()
                .ok_or_else(|| anyhow::anyhow!("--t-values is required without --preset"))?;
            let values = args
                .axis2_values
                .clone()
                .ok_or_else(|| anyhow::anyhow!("--axis2-values is required without --preset"))?;
            let vary = args
                .vary
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--vary n|k is required without --preset"))?;
            let axis2 = match vary.to_ascii_lowercase().as_str() {
                "n" => Axis2::VaryN {
                    values,
                    k_fixed: args.fixed,
                },
                "k" => Axis2::VaryK {
                    values,
                    n_fixed: args.fixed,
                },
                other => bail!("--vary must be n or k, got '{other}'"),
            };
            let dfs = args.df_values.clone().unwrap_or_else(|| vec![4.0, 10.0]);
            dfs.into_iter()
                .map(|df| ExperimentGrid {
                    t_values: t_values.clone(),
                    axis2: axis2.clone(),
                    df,
                    max_lag: args.lags,
                    replications: 500,
                    alpha: args.alpha,
                    master_seed: args.seed,
                })
                .collect()
        }
    };
    if let Some(reps) = args.replications {
        for g in &mut grids {
            g.replications = reps;
        }
    }
    Ok(grids)
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8> {
    let grids = build_grids(&args)?;

    let run_all =
        || -> Result<Vec<SizeGrid>> { grids.iter().map(|g| Ok(run_size_experiment(g)?)).collect() };
    let results = if args.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build()
            .context("building worker pool")?;
        pool.install(run_all)?
    } else {
        run_all()?
    };

    let rows: Vec<SizeRow> = results.iter().flat_map(|g| g.to_rows()).collect();
    fs::write(&args.out, rows_to_csv(&rows))
        .with_context(|| format!("writing {}", args.out.display()))?;

    for grid in &results {
        print_summary(grid);
    }
    let elapsed: f64 = results.iter().map(|g| g.elapsed_seconds).sum();
    println!(
        "wrote {} rate rows to {} ({elapsed:.1}s)",
        rows.len(),
        args.out.display()
    );
    Ok(0)
}

fn print_summary(grid: &SizeGrid) {
    let axis = grid.grid.axis2.name();
    println!(
        "df = {}, {} replications, alpha = {}, H = {} (cells: nlsd/srnlsd)",
        grid.grid.df, grid.grid.replications, grid.grid.alpha, grid.grid.max_lag
    );
    let fmt_rate = |r: Option<f64>| match r {
        Some(v) => format!("{v:.3}"),
        None => "n/a".to_string(),
    };
    print!("{:>8} |", format!("T \\ {axis}"));
    for a in grid.grid.axis2.values() {
        print!(" {a:>11} |");
    }
    println!();
    for (ti, &t) in grid.grid.t_values.iter().enumerate() {
        print!("{t:>8} |");
        for ai in 0..grid.grid.axis2.values().len() {
            print!(
                " {:>11} |",
                format!(
                    "{}/{}",
                    fmt_rate(grid.rates_nlsd[ti][ai]),
                    fmt_rate(grid.rates_srnlsd[ti][ai])
                )
            );
        }
        println!();
    }
}

fn cmd_plot(args: PlotArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let rows = rows_from_csv(&text)?;
    let svg = heatmap::render_heatmap(&rows)?;
    fs::write(&args.out, svg).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(0)
}
