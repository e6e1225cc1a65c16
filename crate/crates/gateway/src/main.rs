use clap::Parser;
use miniscope_gateway::config::load_config;
use miniscope_gateway::headless::{run_headless, Outputs};
use miniscope_gateway::server::{serve, ServeOptions};
use miniscope_core::{Scope, ScopeConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Virtual NUC-140 oscilloscope: replay scripts headlessly or serve the
/// control panel over WebSocket.
#[derive(Parser, Debug)]
#[command(name = "miniscope", version)]
struct Cli {
    /// Session config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Script of timed actions (JSON lines).
    #[arg(long)]
    script: Option<PathBuf>,
    /// Serve the WebSocket protocol on this port instead of running headless.
    #[arg(long)]
    serve: Option<u16>,
    /// Write the last capture as CSV.
    #[arg(long)]
    export_csv: Option<PathBuf>,
    /// Write the framebuffer as a PBM (P4) image.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Total master-clock ticks to simulate.
    #[arg(long)]
    ticks: Option<u64>,
    /// Permit adc_n below 3.
    #[arg(long)]
    allow_unsafe_adc_n: bool,
    /// Serve pacing as a fraction of real time.
    #[arg(long, default_value_t = 0.01)]
    speed: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.serve {
        Some(port) => serve_main(&cli, port),
        None => {
            let outputs = Outputs { csv: cli.export_csv.clone(), snapshot: cli.snapshot.clone(), ticks: cli.ticks };
            match run_headless(cli.config.as_deref(), cli.script.as_deref(), cli.allow_unsafe_adc_n, &outputs) {
                Ok(run) => {
                    eprintln!("ran to tick {} ({} loop iterations)", run.scope.now(), run.scope.loops_run());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn serve_main(cli: &Cli, port: u16) -> ExitCode {
    let config = match &cli.config {
        Some(p) => load_config(p, cli.allow_unsafe_adc_n),
        None => Ok(ScopeConfig { allow_unsafe_adc_n: cli.allow_unsafe_adc_n, ..ScopeConfig::default() }),
    };
    let scope = match config.map_err(|e| e.to_string()).and_then(|c| Scope::new(&c).map_err(|e| e.to_string())) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if !(cli.speed.is_finite() && cli.speed > 0.0) {
        eprintln!("error: --speed must be > 0");
        return ExitCode::FAILURE;
    }
    let opts = ServeOptions::paced(&scope, cli.speed);
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    let result = rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        eprintln!("serving ws://{}/ws", listener.local_addr()?);
        serve(listener, scope, opts).await
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
