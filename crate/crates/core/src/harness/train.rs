use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::evaluate;
use crate::sgd::TracePoint;

use super::checkpoint::Checkpoint;
use super::config::RunConfig;
use super::model::{train_model, Model};
use super::table::{read_rows, run_cells, write_rows};
use super::task::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRow {
    pub n: usize,
    pub seed: u64,
    pub steps: usize,
    pub horizon: f64,
    /// Mean batch loss over the last logging window.
    pub train_loss: Option<f64>,
    pub eval_loss: f64,
    pub eval_error: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub rows: Vec<TrainRow>,
    pub models: Vec<Model>,
    pub traces: Vec<Vec<TracePoint>>,
}

pub fn checkpoint_path(out: &Path, n: usize, seed: u64) -> PathBuf {
    out.join("checkpoints").join(format!("n{n}_s{seed}.json"))
}

/// Every `(N, seed)` cell of the config, width-major.
pub fn cells(cfg: &RunConfig) -> Vec<(usize, u64)> {
    cfg.widths.iter().flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s))).collect()
}

/// Train one network per `(N, seed)` and write `train.csv`, a trace per
/// cell and (if enabled) the final checkpoints under `out_dir`.
pub fn run_train(cfg: &RunConfig, task: &Task) -> Result<TrainResult> {
    let cells = cells(cfg);
    let out = run_cells(cfg.threads, &cells, |&(n, seed)| {
        let start = Instant::now();
        let init = Model::init(cfg, task, n, seed, cfg.init)?;
        let mut stream = task.train_stream(seed)?;
        let trained = train_model(cfg, task, &init, &mut stream, &[], |_, _| Ok(()))?;
        let m = evaluate(&trained.model, task.eval(), cfg.loss)?;
        log::info!("trained N={n} seed={seed}: eval loss {:.6}, error {:.4}", m.loss, m.error);
        let row = TrainRow {
            n,
            seed,
            steps: trained.steps,
            horizon: trained.steps as f64 * cfg.alpha(n),
            train_loss: trained.trace.last().map(|p| p.batch_loss),
            eval_loss: m.loss,
            eval_error: m.error,
            wall_time: start.elapsed().as_secs_f64(),
        };
        Ok((row, trained))
    })?;
    let mut result = TrainResult { rows: Vec::new(), models: Vec::new(), traces: Vec::new() };
    for (row, trained) in out {
        if cfg.save_checkpoints {
            let path = checkpoint_path(&cfg.out_dir, row.n, row.seed);
            write_dir(&path)?;
            trained.model.to_checkpoint(cfg, row.seed, row.steps as u64).save(&path)?;
        }
        let trace_path = cfg.out_dir.join("traces").join(format!("n{}_s{}.csv", row.n, row.seed));
        write_rows(&trace_path, &trained.trace)?;
        result.rows.push(row);
        result.models.push(trained.model);
        result.traces.push(trained.trace);
    }
    write_rows(&cfg.out_dir.join("train.csv"), &result.rows)?;
    Ok(result)
}

pub(crate) fn write_dir(file: &Path) -> Result<()> {
    if let Some(dir) = file.parent() {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropoutEvalRow {
    pub checkpoint: String,
    pub n: usize,
    pub seed: u64,
    pub step: u64,
    pub fraction: f64,
    pub eval_loss: f64,
    pub eval_error: f64,
    pub dropout_loss: f64,
    pub dropout_error: f64,
    pub eps_d: f64,
}

/// Evaluate saved networks and their dropout sub-networks on the task's
/// evaluation set; writes `dropout_eval.csv`.
pub fn run_dropout_eval(cfg: &RunConfig, task: &Task, checkpoints: &[PathBuf]) -> Result<Vec<DropoutEvalRow>> {
    let rows = run_cells(cfg.threads, checkpoints, |path| {
        let ck = Checkpoint::load(path)?;
        let model = Model::from_checkpoint(&ck)?;
        let m = model.dropout_metrics(cfg, task.eval())?;
        Ok(DropoutEvalRow {
            checkpoint: path.display().to_string(),
            n: model.width(),
            seed: ck.seed,
            step: ck.step,
            fraction: cfg.dropout_fraction,
            eval_loss: m.full.loss,
            eval_error: m.full.error,
            dropout_loss: m.dropout.loss,
            dropout_error: m.dropout.error,
            eps_d: m.eps_d(),
        })
    })?;
    write_rows(&cfg.out_dir.join("dropout_eval.csv"), &rows)?;
    Ok(rows)
}

pub fn load_train_rows(out: &Path) -> Result<Vec<TrainRow>> {
    read_rows(&out.join("train.csv"))
}
