//! Experiment drivers: configuration, data tasks, checkpoints and the
//! train / sweep / connect / compare / oracle runs behind the CLI.

pub mod checkpoint;
pub mod config;
pub mod connect;
pub mod model;
pub mod oracle;
pub mod sweep;
pub mod table;
pub mod task;
pub mod train;

pub use checkpoint::{Checkpoint, CheckpointModel, CHECKPOINT_VERSION};
pub use config::{ModelKind, RunConfig, TaskKind};
pub use connect::{connect_models, run_connectivity, ConnectResult, ConnectRow};
pub use model::{train_model, DropoutMetrics, Model, Trained};
pub use oracle::{run_oracle_convergence, OracleResult, OracleRow};
pub use sweep::{run_dropout_compare, run_dropout_sweep, SweepResult, SweepRow};
pub use task::Task;
pub use train::{run_dropout_eval, run_train, TrainResult, TrainRow};
