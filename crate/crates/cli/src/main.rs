use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use critspace::counting::bott_h;
use critspace::harness::{
    als_json, bigint_json, cmd_count, cmd_critspace, cmd_demo_wtensor, cmd_remark224, cmd_verify,
    complex_json, solve_json, DemoConfig, Report, RunConfig, Tolerances,
};
use critspace::io::{parse_format, read_tensor};
use critspace::pairing::pair_ell;
use critspace::solver::{als_critical_rank_k, solve_critical_rank_one, AlsConfig, TrackerConfig};
use critspace::tensor::random_tensor;
use critspace::{Error, Tensor};
use serde_json::{json, Value};

/// Critical spaces and critical rank-one tensors of partially symmetric
/// tensors.
///
/// Formats are written `2x2x4`, `S3C2`, `S3(2)x3`, …. Exit status is 0 when
/// every assertion passes, 1 when one fails and 2 on bad input.
#[derive(Parser)]
#[command(name = "critspace", version)]
struct Cli {
    /// Write the JSON output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for path tracking.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Tols {
    /// Relative singular value threshold for numerical ranks.
    #[arg(long, default_value_t = 1e-8)]
    tol_rank: f64,
    /// Membership residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol_member: f64,
}

impl Tols {
    fn get(&self) -> Tolerances {
        Tolerances {
            rank: self.tol_rank,
            membership: self.tol_member,
            ..Tolerances::default()
        }
    }
}

/// A tensor from a file, or a random real one of the given format.
#[derive(Args)]
struct Input {
    /// Tensor file (JSON).
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Input {
    fn tensor(&self) -> Result<Tensor, Error> {
        match (&self.f, &self.format) {
            (Some(p), _) => read_tensor(p),
            (None, Some(s)) => Ok(random_tensor(&parse_format(s)?, self.seed, true)),
            (None, None) => Err(Error::InvalidInput("need --f or --format".into())),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every check on a random real tensor of the format.
    Verify {
        #[arg(long)]
        format: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// ALS restarts per rank.
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[command(flatten)]
        tols: Tols,
    },
    /// The 2x2x4 experiment.
    Remark224 {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tols: Tols,
    },
    /// Number of complex critical rank-one tensors of a generic tensor.
    Count {
        #[arg(long)]
        format: String,
    },
    /// `dim H^q(P^n, Ω^r(k))`.
    Bott {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        r: u32,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
    /// The pairing `[f|g]_ℓ` as an antisymmetric matrix.
    Pair {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        /// Factor, counted from 1.
        #[arg(long)]
        ell: usize,
    },
    /// The critical space of a tensor.
    Critspace {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        tols: Tols,
    },
    /// All critical rank-one tensors by homotopy continuation.
    Solve {
        #[command(flatten)]
        input: Input,
    },
    /// A real critical point of rank at most k by alternating least squares.
    Approx {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Rank-2 ALS on the W tensor, whose terms diverge.
    DemoWtensor {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
    },
}

enum Outcome {
    Value(Value),
    Report(Box<Report>),
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let run_cfg = |restarts: usize, tols: &Tols| RunConfig {
        tolerances: tols.get(),
        als_restarts: restarts,
        threads: cli.threads,
    };
    Ok(match &cli.cmd {
        Cmd::Verify {
            format,
            seed,
            restarts,
            tols,
        } => Outcome::Report(Box::new(cmd_verify(&parse_format(format)?, *seed, &run_cfg(*restarts, tols)))),
        Cmd::Remark224 { seed, tols } => Outcome::Report(Box::new(cmd_remark224(*seed, &run_cfg(1, tols)))),
        Cmd::Count { format } => Outcome::Value(cmd_count(&parse_format(format)?)),
        Cmd::Bott { n, q, r, k } => {
            if r > n || q > n {
                return Err(Error::InvalidInput("need q ≤ n and r ≤ n".into()));
            }
            Outcome::Value(json!({"n": n, "q": q, "r": r, "k": k, "h": bigint_json(&bott_h(*n, *q, *r, *k))}))
        }
        Cmd::Pair { f, g, ell } => {
            let (f, g) = (read_tensor(f)?, read_tensor(g)?);
            if *ell == 0 {
                return Err(Error::InvalidInput("--ell counts from 1".into()));
            }
            let m = pair_ell(&f, &g, ell - 1)?.to_matrix();
            let rows: Vec<Value> = (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| complex_json(m.get(i, j))).collect())
                .collect();
            Outcome::Value(json!({"ell": ell, "matrix": rows}))
        }
        Cmd::Critspace { input, tols } => Outcome::Value(cmd_critspace(&input.tensor()?, &tols.get())?),
        Cmd::Solve { input } => {
            let f = input.tensor()?;
            let cfg = TrackerConfig {
                seed: input.seed,
                threads: cli.threads,
                ..TrackerConfig::default()
            };
            let mut v = solve_json(&solve_critical_rank_one(&f, &cfg)?);
            v["format"] = json!(f.format().to_string());
            Outcome::Value(v)
        }
        Cmd::Approx { input, k, restarts } => {
            let cfg = AlsConfig {
                seed: input.seed,
                restarts: *restarts,
                ..AlsConfig::default()
            };
            let mut v = als_json(&als_critical_rank_k(&input.tensor()?, *k, &cfg)?);
            v["k"] = json!(k);
            Outcome::Value(v)
        }
        Cmd::DemoWtensor { seed, restarts } => {
            let demo = DemoConfig {
                seed: *seed,
                restarts: *restarts,
                ..DemoConfig::default()
            };
            Outcome::Report(Box::new(cmd_demo_wtensor(&demo, &Tolerances::default())))
        }
    })
}

fn emit(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        let (text, passed) = match outcome {
            Outcome::Value(v) => (serde_json::to_string_pretty(&v).expect("serializable"), true),
            Outcome::Report(r) => (r.to_json(), r.passed),
        };
        emit(&cli, &text).map(|_| passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
