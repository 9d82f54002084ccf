use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::evaluate;
use crate::multilayer::{build_path_ml, dropout_ml, nested_half_patterns};
use crate::path::{profile_error, profile_loss, PathProfile};
use crate::two_layer::build_path2;

use super::config::{ModelKind, RunConfig};
use super::model::{train_model, Model};
use super::table::write_rows;
use super::task::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectRow {
    pub width: usize,
    pub seed_a: u64,
    pub seed_b: u64,
    pub segments: usize,
    pub loss_a: f64,
    pub loss_b: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    /// `max(L_A, L_B) + max(ε_A, ε_B)`.
    pub loss_bound: f64,
    pub path_max_loss: f64,
    pub eps_c: f64,
    pub error_a: f64,
    pub error_b: f64,
    /// Worst classification error among the dropout sub-networks the path
    /// passes through.
    pub dropout_error_a: f64,
    pub dropout_error_b: f64,
    pub path_max_error: f64,
    pub wall_time: f64,
}

impl ConnectRow {
    /// Largest increase of the error from an endpoint to its dropout
    /// sub-networks.
    pub fn dropout_error_change(&self) -> f64 {
        (self.dropout_error_a - self.error_a).max(self.dropout_error_b - self.error_b).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ConnectResult {
    pub row: ConnectRow,
    pub loss: PathProfile,
    pub error: PathProfile,
}

/// Worst error among the sub-networks visited by the path from `m`.
fn dropout_vertex_error(cfg: &RunConfig, task: &Task, m: &Model) -> Result<f64> {
    match m {
        Model::TwoLayer(_) => Ok(evaluate(&m.dropout(0.5)?, task.eval(), cfg.loss)?.error),
        Model::Multilayer(p) => {
            let mut worst: f64 = 0.0;
            for pat in nested_half_patterns(p)? {
                worst = worst.max(evaluate(&dropout_ml(p, &pat)?, task.eval(), cfg.loss)?.error);
            }
            Ok(worst)
        }
    }
}

/// Build the connecting path between two trained networks and profile loss
/// and error along it on the evaluation set.
pub fn connect_models(cfg: &RunConfig, task: &Task, a: &Model, b: &Model, seeds: (u64, u64)) -> Result<ConnectResult> {
    let start = Instant::now();
    let ds = task.eval();
    let (loss, error, segments) = match (a, b) {
        (Model::TwoLayer(p), Model::TwoLayer(q)) => {
            let path = build_path2(p, q)?;
            (
                profile_loss(&path, ds, cfg.loss, cfg.connect.loss_points)?,
                profile_error(&path, ds, cfg.connect.error_points)?,
                path.segments(),
            )
        }
        (Model::Multilayer(p), Model::Multilayer(q)) => {
            let path = build_path_ml(p, q)?;
            (
                profile_loss(&path, ds, cfg.loss, cfg.connect.loss_points)?,
                profile_error(&path, ds, cfg.connect.error_points)?,
                path.segments(),
            )
        }
        _ => return Err(Error::InvalidArgument("cannot connect networks of different families".into())),
    };
    let ma = evaluate(a, ds, cfg.loss)?;
    let mb = evaluate(b, ds, cfg.loss)?;
    let eps_a = a.path_epsilon(cfg, ds)?;
    let eps_b = b.path_epsilon(cfg, ds)?;
    let row = ConnectRow {
        width: a.width(),
        seed_a: seeds.0,
        seed_b: seeds.1,
        segments,
        loss_a: ma.loss,
        loss_b: mb.loss,
        eps_a,
        eps_b,
        loss_bound: ma.loss.max(mb.loss) + eps_a.max(eps_b),
        path_max_loss: loss.max(),
        eps_c: loss.eps_c(),
        error_a: ma.error,
        error_b: mb.error,
        dropout_error_a: dropout_vertex_error(cfg, task, a)?,
        dropout_error_b: dropout_vertex_error(cfg, task, b)?,
        path_max_error: error.max(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(ConnectResult { row, loss, error })
}

/// Train two networks of width `connect.width` from `connect.seed_a` and
/// `connect.seed_b`, connect them, and write `path_loss.csv`,
/// `path_error.csv`, `connect.csv` and both endpoint checkpoints.
pub fn run_connectivity(cfg: &RunConfig, task: &Task) -> Result<ConnectResult> {
    let c = &cfg.connect;
    if cfg.model == ModelKind::Multilayer && c.init_b.is_some() {
        return Err(Error::config("connect.init_b", "only applies to two-layer models"));
    }
    let train = |seed: u64, init| -> Result<Model> {
        let m0 = Model::init(cfg, task, c.width, seed, init)?;
        let mut stream = task.train_stream(seed)?;
        Ok(train_model(cfg, task, &m0, &mut stream, &[], |_, _| Ok(()))?.model)
    };
    let a = train(c.seed_a, cfg.init)?;
    let b = train(c.seed_b, c.init_b.unwrap_or(cfg.init))?;
    let out = connect_models(cfg, task, &a, &b, (c.seed_a, c.seed_b))?;
    log::info!(
        "path over {} segments: max loss {:.6} (bound {:.6}), max error {:.4}",
        out.row.segments,
        out.row.path_max_loss,
        out.row.loss_bound,
        out.row.path_max_error
    );
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    out.loss.save_csv(&cfg.out_dir.join("path_loss.csv"))?;
    out.error.save_csv(&cfg.out_dir.join("path_error.csv"))?;
    write_rows(&cfg.out_dir.join("connect.csv"), std::slice::from_ref(&out.row))?;
    let steps = |m: &Model| cfg.steps(m.width(), cfg.epoch_len(task.train_size())) as u64;
    let dir = cfg.out_dir.join("checkpoints");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    a.to_checkpoint(cfg, c.seed_a, steps(&a)).save(&dir.join("connect_a.json"))?;
    b.to_checkpoint(cfg, c.seed_b, steps(&b)).save(&dir.join("connect_b.json"))?;
    Ok(out)
}
