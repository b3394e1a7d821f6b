//! The `saris` command line.
//!
//! Exit status: 0 on success, 1 for user errors (bad arguments, unreadable
//! or malformed input), 2 for internal failures.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Duration;
use clap::{Args, Parser, Subcommand};
use rand::rngs::OsRng;
use rand::RngCore;
use saris_core::c45::{cross_validate, evaluate, parse_tree, train, write_tree, TrainConfig, TrainingSet};
use saris_core::dataset::{derive_all, export_csv, parse_csv, DeriveConfig};
use saris_core::storage::EntityKind;
use saris_core::{seed, Store, StoreError};

use crate::api::{router_with_static, AppState};
use crate::config::{FileConfig, ServeConfig, ServeOverrides};
use crate::session::SessionManager;

#[derive(Debug, Parser)]
#[command(
    name = "saris",
    version,
    about = "Student annual review service and success predictor"
)]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, env = "SARIS_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Write the derived dataset CSV from a store file.
    Export(ExportArgs),
    /// Train a decision tree on a dataset CSV and print the model.
    Train(TrainArgs),
    /// Classify one feature vector with a saved model.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "SARIS_HOST")]
    pub host: Option<String>,
    /// Port to listen on; 0 picks a free port.
    #[arg(long, env = "SARIS_PORT")]
    pub port: Option<u16>,
    /// Store file; omitted means an in-memory store.
    #[arg(long, env = "SARIS_STORE")]
    pub store: Option<PathBuf>,
    /// Directory of seed CSV files, loaded into an empty store.
    #[arg(long, env = "SARIS_SEED_DIR")]
    pub seed_dir: Option<PathBuf>,
    /// Serve static files from this directory for non-API paths.
    #[arg(long, env = "SARIS_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
    #[arg(long, env = "SARIS_SESSION_TTL_HOURS")]
    pub session_ttl_hours: Option<i64>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, env = "SARIS_STORE")]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV as produced by `export`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub no_prune: bool,
    #[arg(long, env = "SARIS_MIN_LEAF")]
    pub min_leaf: Option<usize>,
    #[arg(long, env = "SARIS_CONFIDENCE")]
    pub confidence: Option<f64>,
    /// Write the model here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also report stratified k-fold cross-validation.
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated counts, e.g. `2,0,0`.
    #[arg(long)]
    pub features: String,
}

#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

fn user(message: impl ToString) -> CliError {
    CliError::User(message.to_string())
}

fn internal(message: impl ToString) -> CliError {
    CliError::Internal(message.to_string())
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| user(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| internal(format!("cannot write {}: {e}", path.display())))
}

fn store_error(e: StoreError) -> CliError {
    match e {
        StoreError::Io(_) => internal(e),
        _ => user(e),
    }
}

fn open_existing_store(path: &Path) -> Result<Store, CliError> {
    if !path.exists() {
        return Err(user(format!("store {} does not exist", path.display())));
    }
    Store::open(path).map_err(store_error)
}

fn salt() -> Vec<u8> {
    let mut bytes = vec![0u8; 16];
    OsRng.fill_bytes(&mut bytes);
    bytes
}

fn export(args: ExportArgs, file: &FileConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let path = args
        .store
        .or_else(|| file.store.clone())
        .ok_or_else(|| user("no store given (use --store, SARIS_STORE or the config file)"))?;
    let store = open_existing_store(&path)?;
    let rows = derive_all(&store.snapshot(), &DeriveConfig::default()).map_err(user)?;
    write_output(&args.out, &export_csv(&rows))?;
    writeln!(out, "wrote {} rows to {}", rows.len(), args.out.display()).map_err(internal)
}

fn train_cmd(args: TrainArgs, file: &FileConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        min_leaf: args.min_leaf.or(file.train.min_leaf).unwrap_or(defaults.min_leaf),
        confidence_factor: args
            .confidence
            .or(file.train.confidence)
            .unwrap_or(defaults.confidence_factor),
        pruning: !args.no_prune && file.train.prune.unwrap_or(defaults.pruning),
    };
    config.check().map_err(user)?;
    let rows = parse_csv(&read_input(&args.data)?).map_err(|e| user(format!("{}: {e}", args.data.display())))?;
    let set = TrainingSet::from_dataset(&rows);
    let tree = train(&set, &config).map_err(user)?;
    let metrics = evaluate(&tree, &set).map_err(internal)?;
    let text = write_tree(&tree);
    match &args.out {
        Some(path) => write_output(path, &text)?,
        None => out.write_all(text.as_bytes()).map_err(internal)?,
    }
    writeln!(
        err,
        "rows {}, nodes {}, leaves {}, training accuracy {:.3}",
        set.len(),
        tree.node_count(),
        tree.leaf_count(),
        metrics.accuracy
    )
    .map_err(internal)?;
    if let Some(k) = args.folds {
        let cv = cross_validate(&set, &config, k, args.seed).map_err(user)?;
        writeln!(err, "{k}-fold cross-validation accuracy {:.3}", cv.accuracy).map_err(internal)?;
    }
    Ok(())
}

fn predict_cmd(args: PredictArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = String::from_utf8(read_input(&args.model)?).map_err(|_| user("model file is not UTF-8"))?;
    let tree = parse_tree(&text).map_err(|e| user(format!("{}: {e}", args.model.display())))?;
    let features = args
        .features
        .split(',')
        .map(|f| f.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| {
            user(format!(
                "features must be non-negative integers, got `{}`",
                args.features
            ))
        })?;
    let p = tree.predict(&features).map_err(user)?;
    writeln!(out, "{} {:.3}", p.label, p.confidence).map_err(internal)
}

fn serve(args: ServeArgs, file: &FileConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let config = ServeConfig::resolve(
        ServeOverrides {
            host: args.host,
            port: args.port,
            store: args.store,
            seed_dir: args.seed_dir,
            static_dir: args.static_dir,
            session_ttl_hours: args.session_ttl_hours,
        },
        file,
    )
    .map_err(user)?;
    let store = match &config.store {
        Some(path) => Store::open(path).map_err(store_error)?,
        None => Store::in_memory(),
    };
    if let Some(dir) = &config.seed_dir {
        let tables = store.snapshot();
        let empty = tables.count(EntityKind::Student) == 0 && tables.count(EntityKind::Account) == 0;
        if empty {
            let txn = seed::load_dir(dir, salt).map_err(user)?;
            store.apply(txn).map_err(user)?;
        }
    }
    let state = Arc::new(AppState::new(
        Arc::new(store),
        SessionManager::new(Duration::hours(config.session_ttl_hours)),
    ));
    let app = router_with_static(state, config.static_dir.clone());
    let addr: SocketAddr = format!("{}:{}", config.host, config.port)
        .parse()
        .map_err(|e| user(format!("bad listen address: {e}")))?;

    let runtime = tokio::runtime::Runtime::new().map_err(internal)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| user(format!("cannot listen on {addr}: {e}")))?;
        let bound = listener.local_addr().map_err(internal)?;
        writeln!(out, "listening on http://{bound}").map_err(internal)?;
        out.flush().map_err(internal)?;
        tracing::info!(%bound, "serving");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(internal)
    })
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = FileConfig::load_optional(cli.config.as_deref())
        .map_err(CliError::User)
        .and_then(|file| match cli.command {
            Command::Serve(a) => serve(a, &file, out),
            Command::Export(a) => export(a, &file, out),
            Command::Train(a) => train_cmd(a, &file, out, err),
            Command::Predict(a) => predict_cmd(a, out),
        });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let message = match &e {
                CliError::User(m) | CliError::Internal(m) => m,
            };
            let _ = writeln!(err, "error: {message}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    tracing_subscriber::fmt().with_writer(io::stderr).init();
    run(std::env::args_os(), &mut io::stdout(), &mut io::stderr())
}
