use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::meanfield::{integrate_ideal, limit_loss, OracleConfig, ParticleEnsemble};
use crate::model::empirical_loss;
use crate::sgd::Xi;

use super::checkpoint::{Checkpoint, CheckpointModel};
use super::config::{oracle_seed, ModelKind, RunConfig};
use super::model::{train_model, Model};
use super::table::{mean_std, run_cells, write_rows};
use super::task::Task;
use super::train::cells;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n: usize,
    pub seed: u64,
    pub particles: usize,
    pub horizon: f64,
    pub sgd_loss: f64,
    pub limit_loss: f64,
    /// `|L(θ_N) − L̄(ρ_T)|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummaryRow {
    pub n: usize,
    pub mean_gap: f64,
    pub std_gap: f64,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub rows: Vec<OracleRow>,
    pub summary: Vec<OracleSummaryRow>,
    /// Loss of the integrated ensemble, one per seed.
    pub limit_losses: Vec<f64>,
}

/// Particle count and Euler settings the config resolves to.
pub fn oracle_config(cfg: &RunConfig, task: &Task) -> (usize, OracleConfig) {
    let m = cfg.oracle.particles.unwrap_or_else(|| cfg.widths.iter().copied().max().unwrap_or(1));
    let epoch = cfg.epoch_len(task.train_size());
    let horizon = cfg.k0 * cfg.alpha0 * epoch as f64 / cfg.batch as f64;
    let oc = OracleConfig {
        dt: cfg.oracle.dt.unwrap_or(cfg.alpha0 / m as f64),
        horizon,
        mc_batch: cfg.oracle.mc_batch,
        xi: Xi::constant(cfg.xi),
    };
    (m, oc)
}

/// Integrate the ideal-particle dynamics from each seed's initialization
/// and compare its loss with SGD at every width. Writes `oracle.csv`,
/// `oracle_summary.csv` and one ensemble checkpoint per seed.
pub fn run_oracle_convergence(cfg: &RunConfig, task: &Task) -> Result<OracleResult> {
    if cfg.model != ModelKind::TwoLayer {
        return Err(Error::config("model", "the ideal-particle oracle is defined for two-layer models"));
    }
    if cfg.loss != LossKind::Square {
        return Err(Error::config("loss", "the ideal-particle oracle uses the square loss"));
    }
    let (m, oc) = oracle_config(cfg, task);
    oc.validate()?;
    let ensembles = run_cells(cfg.threads, &cfg.seeds, |&seed| {
        let start = Instant::now();
        let init = match Model::init(cfg, task, m, seed, cfg.init)? {
            Model::TwoLayer(p) => ParticleEnsemble::from_params(&p),
            Model::Multilayer(_) => unreachable!("checked above"),
        };
        let mut stream = task.stream_with(oracle_seed(seed))?;
        let ens = integrate_ideal(&init, &mut stream, &oc)?;
        let l = limit_loss(&ens, task.eval())?;
        log::info!("oracle seed={seed}: M={m}, T={:.3}, loss {l:.6} ({:.1}s)", ens.t, start.elapsed().as_secs_f64());
        Ok((ens, l))
    })?;
    let cells = cells(cfg);
    let sgd = run_cells(cfg.threads, &cells, |&(n, seed)| {
        let init = Model::init(cfg, task, n, seed, cfg.init)?;
        let mut stream = task.train_stream(seed)?;
        let trained = train_model(cfg, task, &init, &mut stream, &[], |_, _| Ok(()))?;
        empirical_loss(&trained.model, task.eval(), cfg.loss)
    })?;
    let mut rows = Vec::with_capacity(cells.len());
    for (&(n, seed), sgd_loss) in cells.iter().zip(sgd) {
        let si = cfg.seeds.iter().position(|&s| s == seed).expect("cell seeds come from the config");
        let limit = ensembles[si].1;
        rows.push(OracleRow {
            n,
            seed,
            particles: m,
            horizon: oc.steps() as f64 * oc.dt,
            sgd_loss,
            limit_loss: limit,
            gap: (sgd_loss - limit).abs(),
        });
    }
    let summary = cfg
        .widths
        .iter()
        .map(|&n| {
            let gaps: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.gap).collect();
            let (mean_gap, std_gap) = mean_std(&gaps);
            OracleSummaryRow { n, mean_gap, std_gap }
        })
        .collect::<Vec<_>>();
    write_rows(&cfg.out_dir.join("oracle.csv"), &rows)?;
    write_rows(&cfg.out_dir.join("oracle_summary.csv"), &summary)?;
    if cfg.save_checkpoints {
        let dir = cfg.out_dir.join("checkpoints");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (&seed, (ens, _)) in cfg.seeds.iter().zip(&ensembles) {
            let ck = Checkpoint {
                model: CheckpointModel::Ensemble(ens.clone()),
                seed,
                step: oc.steps() as u64,
                input_bias: cfg.bias,
                mask: None,
            };
            ck.save(&dir.join(format!("ensemble_s{seed}.json")))?;
        }
    }
    Ok(OracleResult { rows, summary, limit_losses: ensembles.into_iter().map(|(_, l)| l).collect() })
}
