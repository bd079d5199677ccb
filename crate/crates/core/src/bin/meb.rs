//! Command-line front end: dataset generation, single queries, PAC
//! validation and precision/speedup comparisons.
//!
//! Exit status is 0 on success, 1 when a validation cell fails and 2 on
//! usage or I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mebandit::data::{gen_adversarial, gen_vectors, DatasetSpec, Distribution};
use mebandit::exec::mix_seed;
use mebandit::experiment::{
    run_compare, run_query, run_validate, CompareConfig, Method, ValidateConfig,
};
use mebandit::io::{
    read_dataset, read_query, write_curve, write_curve_to, write_dataset, write_results,
    write_results_to,
};
use mebandit::mips::{ObjectiveKind, SearchParams};
use mebandit::{Execution, Result};

#[derive(Parser)]
#[command(
    name = "meb",
    version,
    about = "Median elimination bandits for top-K inner product search"
)]
struct Cli {
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Answer one top-K query with median elimination.
    Query(QueryArgs),
    /// Check the (1 - delta)-percentile suboptimality on adversarial instances.
    Validate(ValidateArgs),
    /// Sweep methods and record precision against speedup.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    dist: Distribution,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Vector dimension, or reward-list length for adversarial instances.
    #[arg(long, default_value_t = 10_000)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; `.csv` writes CSV, anything else the binary format.
    /// Adversarial instances are written as JSON.
    #[arg(long)]
    out: PathBuf,
    /// Also draw this many query vectors from the same distribution.
    #[arg(long, default_value_t = 0)]
    queries: usize,
    /// Where to write the queries (required with --queries).
    #[arg(long)]
    queries_out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    query: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Tolerance on the per-coordinate mean scale (q.v / N). Multiply by N
    /// for the inner-product scale.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "inner-product")]
    objective: ObjectiveKind,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 5000)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6")]
    epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1,0.2,0.3")]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Results file (JSON lines).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall times; the output is then no longer reproducible byte for byte.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    data: PathBuf,
    /// Query vectors, one per row. Without it, queries are drawn from --dist.
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    num_queries: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    dist: Distribution,
    #[arg(long, value_delimiter = ',', default_value = "me,lsh,naive")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Median elimination tolerances, per-coordinate mean scale.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    deltas: Vec<f64>,
    /// LSH bits per hash (AND width).
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,6,8,12,16,20")]
    lsh_bits: Vec<usize>,
    /// LSH table counts (OR width).
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50")]
    lsh_tables: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn gen(args: GenArgs, execution: Execution) -> Result<()> {
    let spec = DatasetSpec::new(args.dist, args.n, args.dim, args.seed);
    if args.dist == Distribution::Adversarial {
        let inst = gen_adversarial(&spec)?;
        let arms: Vec<_> = inst
            .arms
            .iter()
            .zip(&inst.true_means)
            .enumerate()
            .map(|(i, (a, r))| serde_json::json!({"arm": i, "drawn_mean": r, "list_mean": a.ones as f64 / a.len as f64, "ones": a.ones, "len": a.len}))
            .collect();
        let text = serde_json::to_string(&arms)?;
        std::fs::write(&args.out, text).map_err(|e| io_error(&args.out, e))?;
    } else {
        write_dataset(&args.out, &gen_vectors(&spec, execution)?)?;
    }
    eprintln!("wrote {}", args.out.display());
    if args.queries > 0 {
        let Some(path) = args.queries_out else {
            return Err(mebandit::Error::Config(
                "--queries needs --queries-out".into(),
            ));
        };
        let qspec = DatasetSpec::new(
            args.dist,
            args.queries,
            args.dim,
            mix_seed(args.seed, u64::MAX),
        );
        write_dataset(&path, &gen_vectors(&qspec, execution)?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> mebandit::Error {
    mebandit::Error::Io {
        path: path.into(),
        source: e,
    }
}

fn query(args: QueryArgs, execution: Execution) -> Result<()> {
    let vectors = read_dataset(&args.data)?;
    let query = read_query(&args.query, vectors.dim())?;
    let params =
        SearchParams::new(args.k, args.epsilon, args.delta, args.seed).with_execution(execution);
    let report = run_query(&vectors, &query, args.objective, &params)?;
    if args.format == Some(Format::Json) {
        println!("{}", serde_json::to_string(&report)?);
        return Ok(());
    }
    if report.degenerate {
        println!(
            "warning: zero-width reward range, returning the first {} ids",
            args.k
        );
    }
    println!("rank\tid\testimated_score");
    for (rank, (id, score)) in report.ids.iter().zip(&report.estimated_scores).enumerate() {
        let score = score.map_or_else(|| "-".to_string(), |s| format!("{s:.6}"));
        println!("{}\t{id}\t{score}", rank + 1);
    }
    println!(
        "pulls_total={} ops_naive={} speedup_ops={:.3} rounds={}",
        report.pulls_total, report.ops_naive, report.speedup_ops, report.rounds
    );
    Ok(())
}

fn validate(args: ValidateArgs, execution: Execution) -> Result<bool> {
    let config = ValidateConfig {
        n: args.n,
        dim: args.dim,
        runs: args.runs,
        k: args.k,
        epsilons: args.epsilons,
        deltas: args.deltas,
        seed: args.seed,
        execution,
        timing: args.timing,
    };
    let report = run_validate(&config)?;
    match &args.out {
        Some(path) => write_results(path, &report.records())?,
        None => write_results_to(std::io::stdout().lock(), &report.records())?,
    }
    let mut err = std::io::stderr().lock();
    for c in &report.cells {
        let _ = writeln!(
            err,
            "{} eps={:<5} delta={:<5} percentile={:.4} failure_rate={:.3} max_pulls={}",
            if c.pass { "PASS" } else { "FAIL" },
            c.epsilon,
            c.delta,
            c.percentile_suboptimality,
            c.failure_rate,
            c.max_arm_pulls
        );
    }
    Ok(report.all_pass())
}

fn compare(args: CompareArgs, execution: Execution) -> Result<()> {
    let vectors = read_dataset(&args.data)?;
    let queries = match &args.query {
        Some(path) => read_dataset(path)?,
        None => {
            let spec = DatasetSpec::new(
                args.dist,
                args.num_queries,
                vectors.dim(),
                mix_seed(args.seed, u64::MAX),
            );
            gen_vectors(&spec, execution)?
        }
    };
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>>>()?;
    let defaults = CompareConfig::default();
    let config = CompareConfig {
        methods,
        k: args.k,
        epsilons: args.epsilons.unwrap_or(defaults.epsilons),
        deltas: args.deltas,
        lsh_bits: args.lsh_bits,
        lsh_tables: args.lsh_tables,
        seed: args.seed,
        execution,
    };
    let report = run_compare(&vectors, &queries, &config)?;
    match (args.format, &args.out) {
        (Format::Csv, Some(path)) => write_curve(path, &report.curve()),
        (Format::Csv, None) => write_curve_to(std::io::stdout().lock(), &report.curve()),
        (Format::Json, Some(path)) => write_results(path, &report.records()),
        (Format::Json, None) => write_results_to(std::io::stdout().lock(), &report.records()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let outcome = match cli.command {
        Command::Gen(a) => gen(a, execution).map(|_| true),
        Command::Query(a) => query(a, execution).map(|_| true),
        Command::Validate(a) => validate(a, execution),
        Command::Compare(a) => compare(a, execution).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
