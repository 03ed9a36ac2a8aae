use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;

use rdr_core::dataset::read_manifest;
use rdr_grading::{serve, shard_sessions, GradingConfig, GradingState, DEFAULT_INSTRUCTIONS};

use crate::error::CliError;

pub struct ServeArgs {
    pub manifest: PathBuf,
    pub images: PathBuf,
    pub grades: PathBuf,
    pub host: String,
    pub port: u16,
    pub grader: String,
    pub session: String,
    pub shards: usize,
    pub instructions: Option<PathBuf>,
}

pub fn run(args: ServeArgs) -> Result<(), CliError> {
    let manifest = read_manifest(&args.manifest)?;
    let instructions = match &args.instructions {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        None => DEFAULT_INSTRUCTIONS.to_string(),
    };
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CliError::usage(format!("bad address {}:{}: {e}", args.host, args.port)))?;
    let state = GradingState::open(
        &manifest,
        GradingConfig {
            image_dir: args.images,
            grades_path: args.grades,
            instructions,
            sessions: shard_sessions(&manifest, &args.session, &args.grader, args.shards),
        },
    )?;
    for id in state.session_ids() {
        println!("session {id}: GET http://{addr}/session/{id}/next");
    }
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::data(e.to_string()))?;
    rt.block_on(serve(state, addr))
        .map_err(|e| CliError::data(format!("grading backend: {e}")))
}
