//! `retrace` command line. Exit codes: 0 ok, 1 internal failure, 2 input
//! error, 3 provider error, 4 validation error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use retrace_core::annotator::{ProviderConfig, API_KEY_ENV};
use retrace_core::layout::{self, export_svg_with, ExpansionState, LayoutError, Palette, View, Viewport};
use retrace_core::model::{decode_structured, validate};
use retrace_core::separator::separate;
use retrace_core::stats::compute_stats;
use retrace_core::StructuredTrace;

use crate::service::{ingest, trace_warnings, Backend, PipelineError, Service, ServiceError, Stage, SubmitOptions};
use crate::store::TraceStore;
use crate::transport::HttpTransport;

#[derive(Debug, Parser)]
#[command(name = "retrace", version, about = "Structure and visualize reasoning traces")]
pub struct Cli {
    /// Directory holding stored traces.
    #[arg(long, global = true, env = "RETRACE_DATA_DIR", default_value = "retrace-data")]
    pub data_dir: PathBuf,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a raw trace or provider response into steps.
    Separate {
        #[command(flatten)]
        input: RawInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separate, annotate and validate; print the structured document.
    Annotate {
        #[command(flatten)]
        input: RawInput,
        #[arg(long, default_value = "heuristic")]
        backend: Backend,
        #[command(flatten)]
        provider: ProviderArgs,
        /// Also store the result in the data directory and print its id.
        #[arg(long)]
        store: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase distribution of a structured trace.
    Stats {
        #[command(flatten)]
        source: TraceSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render tree JSON for one view.
    Layout {
        #[command(flatten)]
        source: TraceSource,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG export of one view.
    Export {
        #[command(flatten)]
        source: TraceSource,
        #[command(flatten)]
        view: ViewArgs,
        /// Four comma-separated #rrggbb colours, one per phase.
        #[arg(long)]
        palette: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Directory with the browser UI bundle, served at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
}

#[derive(Debug, Args)]
pub struct RawInput {
    /// Trace file, or `-` for stdin.
    #[arg(long, default_value = "-")]
    pub input: String,
    /// Path of the reasoning text in a provider response; "" reads the
    /// input as plain text. Omitted: JSON objects use the default paths.
    #[arg(long)]
    pub field_path: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TraceSource {
    /// Structured document file, or `-` for stdin.
    #[arg(long)]
    pub input: Option<String>,
    /// Id of a stored trace.
    #[arg(long)]
    pub id: Option<String>,
}

#[derive(Debug, Args)]
pub struct ViewArgs {
    #[arg(long, default_value = "spacefill")]
    pub view: View,
    #[arg(long, default_value_t = 1200.0)]
    pub width: f64,
    #[arg(long, default_value_t = 800.0)]
    pub height: f64,
    /// Phase ordinal (0-3) to expand.
    #[arg(long)]
    pub expand_phase: Option<usize>,
    /// Subphase id to expand, e.g. subphase_3; needs its phase expanded.
    #[arg(long)]
    pub expand_subphase: Option<String>,
}

#[derive(Debug, Args)]
pub struct ProviderArgs {
    /// Chat-completions endpoint for the llm backend.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub max_retries: Option<u32>,
}

impl ProviderArgs {
    fn config(&self) -> ProviderConfig {
        let mut cfg = ProviderConfig::from_env();
        if let Some(e) = &self.endpoint {
            cfg.endpoint = e.clone();
        }
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        if let Some(r) = self.max_retries {
            cfg.max_retries = r;
        }
        cfg
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    fn validation(message: impl Into<String>) -> Self {
        CliError { code: 4, message: message.into() }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = match (e.stage, e.code) {
            (Stage::Separator, _) | (Stage::Annotator, "InvalidConfig") => 2,
            (Stage::Annotator, "ProviderError") => 3,
            _ => 4,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<ServiceError> for CliError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Pipeline(p) => p.into(),
            ServiceError::Storage(m) => CliError { code: 1, message: m },
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<LayoutError> for CliError {
    fn from(e: LayoutError) -> Self {
        CliError::input(e.to_string())
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let data_dir = cli.data_dir;
    match cli.command {
        Command::Separate { input, out } => {
            let raw = ingest(&read_input(&input.input)?, input.field_path.as_deref()).map_err(PipelineError::from)?;
            let stepped = separate(&raw).map_err(PipelineError::from)?;
            warn_all(&trace_warnings(&stepped));
            write_output(out.as_deref(), &pretty(&stepped))
        }
        Command::Annotate { input, backend, provider, store, out } => {
            let body = read_input(&input.input)?;
            let svc = build_service(&data_dir, backend, &provider, None)?;
            let opts = SubmitOptions { backend, field_path: input.field_path };
            if store {
                let submitted = svc.submit(&body, &opts)?;
                let record = svc.get(&submitted.trace_id)?;
                eprintln!("stored {}", submitted.trace_id);
                write_output(out.as_deref(), &record.document)
            } else {
                let (structured, warnings) = svc.run_pipeline(&body, &opts)?;
                warn_all(&warnings);
                write_output(out.as_deref(), &retrace_core::model::encode_structured(&structured))
            }
        }
        Command::Stats { source, out } => {
            let t = load(&data_dir, &source)?;
            write_output(out.as_deref(), &pretty(&compute_stats(&t)))
        }
        Command::Layout { source, view, out } => {
            let t = load(&data_dir, &source)?;
            let (v, state, vp) = view.resolve()?;
            write_output(out.as_deref(), &pretty(&layout::layout(v, &t, &state, vp)?))
        }
        Command::Export { source, view, palette, out } => {
            let t = load(&data_dir, &source)?;
            let (v, state, vp) = view.resolve()?;
            let palette = match palette {
                Some(p) => Palette::parse(&p).map_err(CliError::input)?,
                None => Palette::default(),
            };
            write_output(out.as_deref(), &export_svg_with(&layout::layout(v, &t, &state, vp)?, &palette))
        }
        Command::Serve { addr, ui_dir, provider } => {
            let svc = build_service(&data_dir, Backend::Llm, &provider, ui_dir)?;
            serve(Arc::new(svc), &addr)
        }
    }
}

impl ViewArgs {
    fn resolve(&self) -> Result<(View, ExpansionState, Viewport), CliError> {
        let vp = Viewport::new(self.width, self.height)?;
        let state =
            ExpansionState { expanded_phase: self.expand_phase, expanded_subphase: self.expand_subphase.clone() };
        Ok((self.view, state, vp))
    }
}

fn build_service(
    data_dir: &Path,
    backend: Backend,
    provider: &ProviderArgs,
    ui_dir: Option<PathBuf>,
) -> Result<Service, CliError> {
    let store = TraceStore::open(data_dir).map_err(|e| CliError { code: 1, message: e.to_string() })?;
    let mut svc = Service::new(store).with_ui_dir(ui_dir);
    if backend == Backend::Llm {
        let cfg = provider.config();
        if cfg.credential.is_none() {
            log::warn!("{API_KEY_ENV} is not set; the llm backend is unavailable");
        } else {
            let transport = HttpTransport::new().map_err(|e| CliError { code: 3, message: e.0 })?;
            svc = svc.with_llm(cfg, Arc::new(transport));
        }
    }
    Ok(svc)
}

fn serve(svc: Arc<Service>, addr: &str) -> Result<(), CliError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError { code: 1, message: format!("cannot start runtime: {e}") })?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::input(format!("cannot bind {addr}: {e}")))?;
        log::warn!("listening on http://{addr}");
        axum::serve(listener, crate::http::router(svc))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError { code: 1, message: format!("server failed: {e}") })
    })
}

/// Reads a structured document (validating it against its own steps, when
/// present) or a stored trace.
fn load(data_dir: &Path, source: &TraceSource) -> Result<StructuredTrace, CliError> {
    if let Some(id) = &source.id {
        let store = TraceStore::open(data_dir).map_err(|e| CliError { code: 1, message: e.to_string() })?;
        return Ok(Service::new(store).get(id)?.structured);
    }
    let text = read_input(source.input.as_deref().unwrap_or("-"))?;
    let t = decode_structured(&text).map_err(|e| CliError::input(e.to_string()))?;
    if let Some(stepped) = &t.source {
        let report = validate(&t, stepped).map_err(|e| CliError::validation(e.to_string()))?;
        if !report.ok {
            return Err(CliError::validation(format!("document fails validation: {report}")));
        }
    }
    Ok(t)
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| CliError::input(format!("reading stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::input(format!("reading {path}: {e}")))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let result = match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| CliError { code: 1, message: format!("writing output: {e}") })
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        log::warn!("{w}");
    }
}
