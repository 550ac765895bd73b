//! Experiment runner: JSON configs, per-seed training sessions on disk,
//! evaluation summaries and comparison tables.
//!
//! Layout written by [`run_train`]:
//!
//! ```text
//! out/seed_<s>/manifest.json
//! out/seed_<s>/agent_<i>.json
//! out/seed_<s>/trace.csv
//! ```
//!
//! [`run_incremental`] writes one such directory per transition, named
//! `increment_<from>_to_<to>` or `decrement_<from>_to_<to>`, whose manifest
//! links to its parent. Every CSV begins with a `# config_hash=<hex>` line.

mod compare;
mod config;
mod eval;
mod io;
mod plan;
mod session;

pub use compare::{compare, AverageRatio, ComparisonRow, ComparisonTable, COMPARISON_FILE, RATIOS_FILE, TABLE_FILE};
pub use config::{ExperimentConfig, IncrementalConfig, PolicyKind, DEFAULT_EVAL_HORIZON, LONG_EVAL_HORIZON};
pub use eval::{
    eval_env_seed, evaluate_agents, evaluate_baseline, read_utilities_csv, rollout, run_eval, EvalSummary, SeedSummary,
    Stats, UtilityColumn, SUMMARY_FILE, UTILITIES_FILE,
};
pub use io::{csv_reader, read_hash_header, sha256_hex, write_atomic, HASH_PREFIX};
pub use plan::{ScenarioNode, ScenarioPlan};
pub use session::{
    agent_file, check_compatible, load_manifest, load_session, plan_transitions, resolve_sessions, run_incremental,
    run_train, seed_dir, trace_bytes, train_cell, AgentCheckpoint, ParentLink, Session, SessionKind, SessionManifest,
    MANIFEST_FILE, TAIL_FRACTION, TRACE_FILE,
};
