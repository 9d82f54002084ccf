use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mfconn::harness::{
    run_connectivity, run_dropout_compare, run_dropout_eval, run_dropout_sweep, run_oracle_convergence, run_train,
    RunConfig, Task,
};
use mfconn::Error;

#[derive(Parser)]
#[command(name = "mfconn", version, about = "Mean-field SGD, dropout stability and connecting paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration (defaults apply to missing fields).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set widths=[100,200]` or
    /// `--set connect.seed_b=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as `--set out_dir=...`).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    threads: Option<usize>,
    /// Single width (sets both `widths=[N]` and `connect.width`).
    #[arg(long)]
    n: Option<usize>,
    /// Single seed (same as `--set seeds=[S]`).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    /// `square` or `xent`.
    #[arg(long)]
    loss: Option<String>,
    /// `theory` or `experiment`.
    #[arg(long)]
    mask: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one network per (width, seed) and save checkpoints.
    Train(Common),
    /// Evaluate saved checkpoints and their dropout sub-networks.
    DropoutEval {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        checkpoints: Vec<PathBuf>,
    },
    /// Train two networks and profile loss and error along the connecting path.
    Connect(Common),
    /// Dropout gap against width over all (width, seed) cells.
    Sweep(Common),
    /// Full against dropout network during training.
    Compare(Common),
    /// Compare SGD with the integrated ideal-particle dynamics.
    Oracle(Common),
    /// Print the effective configuration as TOML.
    Config(Common),
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut overrides = common.overrides.clone();
    if let Some(out) = &common.out {
        overrides.push(format!("out_dir={}", toml::Value::String(out.display().to_string())));
    }
    if let Some(t) = common.threads {
        overrides.push(format!("threads={t}"));
    }
    if let Some(n) = common.n {
        overrides.push(format!("widths=[{n}]"));
        overrides.push(format!("connect.width={n}"));
    }
    if let Some(s) = common.seed {
        overrides.push(format!("seeds=[{s}]"));
    }
    if let Some(a) = common.alpha0 {
        overrides.push(format!("alpha0={a:?}"));
    }
    if let Some(k) = common.k0 {
        overrides.push(format!("k0={k:?}"));
    }
    if let Some(l) = &common.loss {
        overrides.push(format!("loss={}", toml::Value::String(l.clone())));
    }
    if let Some(m) = &common.mask {
        overrides.push(format!("mask={}", toml::Value::String(m.clone())));
    }
    match &common.config {
        Some(path) => RunConfig::load(path, &overrides),
        None => RunConfig::from_toml_with("", &overrides),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Config(c) => {
            print!("{}", load(&c)?.to_toml_string());
        }
        Command::Train(c) => {
            let cfg = load(&c)?;
            let res = run_train(&cfg, &Task::load(&cfg)?)?;
            for r in &res.rows {
                println!("N={} seed={} steps={} eval_loss={:.6} eval_error={:.4}", r.n, r.seed, r.steps, r.eval_loss, r.eval_error);
            }
        }
        Command::DropoutEval { common, checkpoints } => {
            let cfg = load(&common)?;
            for r in run_dropout_eval(&cfg, &Task::load(&cfg)?, &checkpoints)? {
                println!("{}: loss {:.6} -> {:.6}, error {:.4} -> {:.4}, eps_d {:.3e}", r.checkpoint, r.eval_loss, r.dropout_loss, r.eval_error, r.dropout_error, r.eps_d);
            }
        }
        Command::Connect(c) => {
            let cfg = load(&c)?;
            let r = run_connectivity(&cfg, &Task::load(&cfg)?)?.row;
            println!(
                "segments={} loss_a={:.6} loss_b={:.6} path_max_loss={:.6} bound={:.6} path_max_error={:.4}",
                r.segments, r.loss_a, r.loss_b, r.path_max_loss, r.loss_bound, r.path_max_error
            );
        }
        Command::Sweep(c) => {
            let cfg = load(&c)?;
            let res = run_dropout_sweep(&cfg, &Task::load(&cfg)?)?;
            for s in res.summary() {
                println!("N={} mean_eps_d={:.4e} std={:.2e} mean_dropout_error={:.4}", s.n, s.mean_eps_d, s.std_eps_d, s.mean_dropout_error);
            }
            if let Some(slope) = res.fit().slope {
                println!("log-log slope {slope:.3}");
            }
        }
        Command::Compare(c) => {
            let cfg = load(&c)?;
            let (_, summary) = run_dropout_compare(&cfg, &Task::load(&cfg)?)?;
            let last = summary.iter().filter(|s| !summary.iter().any(|o| o.n == s.n && o.step > s.step));
            for s in last {
                println!("N={} final error {:.4}±{:.4}, dropout {:.4}±{:.4}", s.n, s.mean_error, s.std_error, s.mean_dropout_error, s.std_dropout_error);
            }
        }
        Command::Oracle(c) => {
            let cfg = load(&c)?;
            let res = run_oracle_convergence(&cfg, &Task::load(&cfg)?)?;
            for s in &res.summary {
                println!("N={} mean_gap={:.4e} std={:.2e}", s.n, s.mean_gap, s.std_gap);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
