use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use wkb_core::cli::{self, exit_code, parse_config};
use wkb_core::WkbError;

/// Time-dependent WKB runs from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "wkb", version)]
struct Args {
    /// Run configuration (JSON). Not needed with --check.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-verify an existing output directory from its stored fields.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    verbose: bool,
}

fn fail(err: &WkbError, stage: &str) -> ExitCode {
    let code = exit_code(err);
    let line = json!({
        "status": "error",
        "stage": stage,
        "reason": cli::error_class(err),
        "exit_code": code,
        "message": err.to_string(),
    });
    eprintln!("{line}");
    ExitCode::from(code as u8)
}

fn init_threads() -> Result<(), WkbError> {
    let Ok(raw) = std::env::var("WKB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        WkbError::Config(vec![format!(
            "WKB_THREADS: expected a positive integer, got {raw:?}"
        )])
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| WkbError::Config(vec![format!("WKB_THREADS: {e}")]))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = init_threads() {
        return fail(&e, "startup");
    }

    if args.check {
        let out = match (&args.out, &args.config) {
            (Some(out), _) => out.clone(),
            (None, Some(path)) => {
                match std::fs::read_to_string(path)
                    .map_err(WkbError::from)
                    .and_then(|t| parse_config(&t))
                {
                    Ok(cfg) => cli::output_dir(&cfg, None),
                    Err(e) => return fail(&e, "config"),
                }
            }
            (None, None) => PathBuf::from("wkb-out"),
        };
        return match cli::check(&out) {
            Ok(summary) => {
                println!(
                    "{}",
                    json!({"status": "ok", "check": out.display().to_string(), "summary": summary})
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e, "check"),
        };
    }

    let Some(path) = &args.config else {
        return fail(
            &WkbError::Config(vec!["--config is required".into()]),
            "config",
        );
    };
    let cfg = match std::fs::read_to_string(path)
        .map_err(|e| WkbError::Io(format!("{}: {e}", path.display())))
        .and_then(|t| parse_config(&t))
    {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e, "config"),
    };
    let out = cli::output_dir(&cfg, args.out.as_deref());
    let manifest = cli::run(&cfg, &out, args.verbose);
    match &manifest.failure {
        None => {
            println!(
                "{}",
                json!({"status": "ok", "out": out.display().to_string(), "files": manifest.files.len()})
            );
            ExitCode::SUCCESS
        }
        Some(f) => {
            let line = json!({
                "status": "error",
                "stage": f.stage,
                "reason": f.reason,
                "exit_code": f.exit_code,
                "message": f.message,
            });
            eprintln!("{line}");
            ExitCode::from(f.exit_code as u8)
        }
    }
}
