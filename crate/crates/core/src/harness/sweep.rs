use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::config::RunConfig;
use super::model::{train_model, DropoutMetrics, Model};
use super::table::{log_log_fit, mean_std, read_rows, run_cells, write_rows};
use super::task::Task;
use super::train::{cells, checkpoint_path, write_dir};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub steps: usize,
    pub horizon: f64,
    pub train_loss: Option<f64>,
    pub eval_loss: f64,
    pub eval_error: f64,
    pub dropout_loss: f64,
    pub dropout_error: f64,
    pub eps_d: f64,
    pub wall_time: f64,
}

/// Dropout error at a fraction of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub n: usize,
    pub seed: u64,
    pub fraction: f64,
    pub step: usize,
    pub t: f64,
    pub eval_loss: f64,
    pub eval_error: f64,
    pub dropout_loss: f64,
    pub dropout_error: f64,
    pub eps_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummaryRow {
    pub n: usize,
    pub seeds: usize,
    pub mean_eps_d: f64,
    pub std_eps_d: f64,
    pub mean_eval_loss: f64,
    pub mean_eval_error: f64,
    pub mean_dropout_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub snapshots: Vec<SnapshotRow>,
}

impl SweepResult {
    /// Per-width means and population standard deviations, in width order
    /// of first appearance.
    pub fn summary(&self) -> Vec<SweepSummaryRow> {
        let mut widths: Vec<usize> = Vec::new();
        for r in &self.rows {
            if !widths.contains(&r.n) {
                widths.push(r.n);
            }
        }
        widths
            .into_iter()
            .map(|n| {
                let rs: Vec<&SweepRow> = self.rows.iter().filter(|r| r.n == n).collect();
                let col = |f: fn(&SweepRow) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
                let (mean_eps_d, std_eps_d) = mean_std(&col(|r| r.eps_d));
                SweepSummaryRow {
                    n,
                    seeds: rs.len(),
                    mean_eps_d,
                    std_eps_d,
                    mean_eval_loss: mean_std(&col(|r| r.eval_loss)).0,
                    mean_eval_error: mean_std(&col(|r| r.eval_error)).0,
                    mean_dropout_error: mean_std(&col(|r| r.dropout_error)).0,
                }
            })
            .collect()
    }

    /// Log-log slope of the seed-mean `ε_D` against `N`.
    pub fn fit(&self) -> SweepFit {
        let s = self.summary();
        let xs: Vec<f64> = s.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = s.iter().map(|r| r.mean_eps_d).collect();
        match log_log_fit(&xs, &ys) {
            Some((slope, intercept)) => SweepFit { slope: Some(slope), intercept: Some(intercept) },
            None => SweepFit { slope: None, intercept: None },
        }
    }

    pub fn save(&self, out: &Path) -> Result<()> {
        write_rows(&out.join("sweep.csv"), &self.rows)?;
        write_rows(&out.join("sweep_snapshots.csv"), &self.snapshots)?;
        write_rows(&out.join("sweep_summary.csv"), &self.summary())?;
        write_rows(&out.join("sweep_fit.csv"), &[self.fit()])
    }

    pub fn load(out: &Path) -> Result<Self> {
        Ok(Self { rows: read_rows(&out.join("sweep.csv"))?, snapshots: read_rows(&out.join("sweep_snapshots.csv"))? })
    }
}

/// Step index closest to `fraction` of `steps`.
fn snapshot_step(fraction: f64, steps: usize) -> usize {
    ((fraction * steps as f64).round() as usize).min(steps)
}

/// Train every `(N, seed)` cell and measure the dropout gap at the end and
/// at the configured snapshot fractions. Writes the sweep CSVs (and final
/// checkpoints if enabled) into `out_dir`.
pub fn run_dropout_sweep(cfg: &RunConfig, task: &Task) -> Result<SweepResult> {
    let cells = cells(cfg);
    let per_cell = run_cells(cfg.threads, &cells, |&(n, seed)| {
        let start = Instant::now();
        let init = Model::init(cfg, task, n, seed, cfg.init)?;
        let steps = cfg.steps(n, cfg.epoch_len(task.train_size()));
        let at: Vec<usize> = cfg.snapshots.iter().map(|&f| snapshot_step(f, steps)).collect();
        let mut seen: Vec<(usize, DropoutMetrics)> = Vec::new();
        let mut stream = task.train_stream(seed)?;
        let trained = train_model(cfg, task, &init, &mut stream, &at, |k, m| {
            seen.push((k, m.dropout_metrics(cfg, task.eval())?));
            Ok(())
        })?;
        let snaps = cfg
            .snapshots
            .iter()
            .zip(&at)
            .map(|(&fraction, &step)| {
                let m = seen.iter().find(|(k, _)| *k == step).expect("every snapshot step is observed").1;
                SnapshotRow {
                    n,
                    seed,
                    fraction,
                    step,
                    t: step as f64 * cfg.alpha(n),
                    eval_loss: m.full.loss,
                    eval_error: m.full.error,
                    dropout_loss: m.dropout.loss,
                    dropout_error: m.dropout.error,
                    eps_d: m.eps_d(),
                }
            })
            .collect::<Vec<_>>();
        let m = trained.model.dropout_metrics(cfg, task.eval())?;
        log::info!("sweep N={n} seed={seed}: eps_d {:.3e}, error {:.4} -> {:.4}", m.eps_d(), m.full.error, m.dropout.error);
        let row = SweepRow {
            n,
            seed,
            steps,
            horizon: steps as f64 * cfg.alpha(n),
            train_loss: trained.trace.last().map(|p| p.batch_loss),
            eval_loss: m.full.loss,
            eval_error: m.full.error,
            dropout_loss: m.dropout.loss,
            dropout_error: m.dropout.error,
            eps_d: m.eps_d(),
            wall_time: start.elapsed().as_secs_f64(),
        };
        if cfg.save_checkpoints {
            let path = checkpoint_path(&cfg.out_dir, n, seed);
            write_dir(&path)?;
            trained.model.to_checkpoint(cfg, seed, steps as u64).save(&path)?;
        }
        Ok((row, snaps))
    })?;
    let mut result = SweepResult { rows: Vec::new(), snapshots: Vec::new() };
    for (row, snaps) in per_cell {
        result.rows.push(row);
        result.snapshots.extend(snaps);
    }
    result.save(&cfg.out_dir)?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: usize,
    pub seed: u64,
    pub step: usize,
    pub t: f64,
    pub loss: f64,
    pub error: f64,
    pub dropout_loss: f64,
    pub dropout_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummaryRow {
    pub n: usize,
    pub step: usize,
    pub t: f64,
    pub mean_loss: f64,
    pub std_loss: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_dropout_loss: f64,
    pub std_dropout_loss: f64,
    pub mean_dropout_error: f64,
    pub std_dropout_error: f64,
}

/// Full versus dropout network along training, at `log_points + 1` evenly
/// spaced steps. Writes `compare.csv` and `compare_summary.csv` (mean and
/// population std over seeds).
pub fn run_dropout_compare(cfg: &RunConfig, task: &Task) -> Result<(Vec<CompareRow>, Vec<CompareSummaryRow>)> {
    let cells = cells(cfg);
    let per_cell = run_cells(cfg.threads, &cells, |&(n, seed)| {
        let init = Model::init(cfg, task, n, seed, cfg.init)?;
        let steps = cfg.steps(n, cfg.epoch_len(task.train_size()));
        let points = cfg.log_points.max(1);
        let mut at: Vec<usize> = (0..=points).map(|j| j * steps / points).collect();
        at.dedup();
        let mut rows = Vec::new();
        let mut stream = task.train_stream(seed)?;
        train_model(cfg, task, &init, &mut stream, &at, |k, m| {
            let d = m.dropout_metrics(cfg, task.eval())?;
            rows.push(CompareRow {
                n,
                seed,
                step: k,
                t: k as f64 * cfg.alpha(n),
                loss: d.full.loss,
                error: d.full.error,
                dropout_loss: d.dropout.loss,
                dropout_error: d.dropout.error,
            });
            Ok(())
        })?;
        Ok(rows)
    })?;
    let rows: Vec<CompareRow> = per_cell.into_iter().flatten().collect();
    let mut summary = Vec::new();
    for &n in &cfg.widths {
        let first = cfg.seeds[0];
        for r0 in rows.iter().filter(|r| r.n == n && r.seed == first) {
            let group: Vec<&CompareRow> = rows.iter().filter(|r| r.n == n && r.step == r0.step).collect();
            let stat = |f: fn(&CompareRow) -> f64| mean_std(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (mean_loss, std_loss) = stat(|r| r.loss);
            let (mean_error, std_error) = stat(|r| r.error);
            let (mean_dropout_loss, std_dropout_loss) = stat(|r| r.dropout_loss);
            let (mean_dropout_error, std_dropout_error) = stat(|r| r.dropout_error);
            summary.push(CompareSummaryRow {
                n,
                step: r0.step,
                t: r0.t,
                mean_loss,
                std_loss,
                mean_error,
                std_error,
                mean_dropout_loss,
                std_dropout_loss,
                mean_dropout_error,
                std_dropout_error,
            });
        }
    }
    write_rows(&cfg.out_dir.join("compare.csv"), &rows)?;
    write_rows(&cfg.out_dir.join("compare_summary.csv"), &summary)?;
    Ok((rows, summary))
}
