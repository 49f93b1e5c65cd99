use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reekit_core::ingest::{parse_csv, ImportOptions, ImportReport};
use reekit_core::lambda::{fit_dataset, write_lambda_csv, FitConfig, DEFAULT_DEGREE_COUNT};
use reekit_core::metrics::{metric_report, write_metrics_csv, MetricConfig, PriceTable};
use reekit_core::viz::{build_payload, export_svg, SvgOptions, VizKind, VizRequest};
use reekit_core::{builtin_reference, resolve_reference, Dataset, Element, ErrorCode, FitError};

#[derive(Parser)]
#[command(name = "reekit", version, about = "Lambda fitting, metrics and charts for rare-earth element data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit lambda coefficients to every sample and write the lambda CSV.
    Fit {
        input: PathBuf,
        /// Builtin standard name or a reference CSV path.
        #[arg(long, default_value = "chondrite")]
        standard: String,
        #[arg(long, default_value_t = DEFAULT_DEGREE_COUNT)]
        degree: usize,
        /// Comma-separated elements left out of the fit, e.g. Ce,Eu.
        #[arg(long)]
        exclude: Option<String>,
        /// Output path, `-` for stdout.
        #[arg(short = 'o', long = "output", default_value = "-")]
        output: PathBuf,
    },
    /// Render one of the six chart kinds as SVG.
    Plot {
        input: PathBuf,
        /// spider, scatter2d, scatter3d, splom, density_contour or violin.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        color_by: Option<String>,
        #[arg(short = 'o', long = "output", default_value = "-")]
        output: PathBuf,
    },
    /// Write per-sample TREO, ratios and optional basket value.
    Metrics {
        input: PathBuf,
        /// CSV with columns element,usd_per_kg_oxide.
        #[arg(long)]
        prices: Option<PathBuf>,
        #[arg(short = 'o', long = "output", default_value = "-")]
        output: PathBuf,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "REEKIT_DATA_DIR", default_value = "reekit-data")]
        data_dir: PathBuf,
    },
}

/// A failure carrying its exit status.
struct Failure {
    status: u8,
    message: String,
}

impl Failure {
    /// Bad input, bad flags or an unreadable file.
    fn usage(message: impl Into<String>) -> Self {
        Self { status: 2, message: message.into() }
    }

    fn coded<E: ErrorCode + std::fmt::Display>(err: E) -> Self {
        Self::usage(format!("{}: {err}", err.code()))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit { input, standard, degree, exclude, output } => {
            fit(&input, &standard, degree, exclude.as_deref(), &output)
        }
        Command::Plot { input, kind, color_by, output } => plot(&input, &kind, color_by, &output),
        Command::Metrics { input, prices, output } => metrics(&input, prices.as_deref(), &output),
        Command::Serve { port, data_dir } => serve(port, data_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.status)
        }
    }
}

fn load(input: &Path) -> Result<Dataset, Failure> {
    let bytes = std::fs::read(input).map_err(|e| Failure::usage(format!("cannot read {}: {e}", input.display())))?;
    let opts = ImportOptions {
        source_name: input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        ..ImportOptions::default()
    };
    let (ds, report) = parse_csv(&bytes, &opts).map_err(Failure::coded)?;
    print_report(&report);
    Ok(ds)
}

fn print_report(report: &ImportReport) {
    let elements: Vec<&str> = report.detected_elements.iter().map(|e| e.symbol()).collect();
    eprintln!(
        "imported {} of {} rows ({} rejected); elements: {}; categories: {}",
        report.rows_accepted,
        report.input_rows(),
        report.rows_rejected.len(),
        elements.join(","),
        if report.detected_categories.is_empty() { "none".to_string() } else { report.detected_categories.join(",") },
    );
    for r in &report.rows_rejected {
        eprintln!("  row {}: {} ({})", r.row, r.code, r.reason);
    }
    for note in &report.notes {
        eprintln!("  note: {note}");
    }
}

fn write_output(output: &Path, bytes: &[u8]) -> Outcome {
    let result = if output.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes).and_then(|_| out.flush())
    } else {
        std::fs::write(output, bytes)
    };
    result.map_err(|e| Failure { status: 1, message: format!("cannot write {}: {e}", output.display()) })
}

fn fit(input: &Path, standard: &str, degree: usize, exclude: Option<&str>, output: &Path) -> Outcome {
    let config = FitConfig {
        standard: resolve_reference(standard).map_err(Failure::coded)?,
        exclusions: match exclude {
            Some(list) => Element::parse_list(list).map_err(Failure::coded)?,
            None => Default::default(),
        },
        degree_count: degree,
        ..FitConfig::default()
    };
    reekit_core::lambda::build_basis(&config.radii, degree).map_err(Failure::coded)?;
    let ds = load(input)?;
    let fit = match fit_dataset(&ds, &config) {
        Err(FitError::EmptyDataset) => return Err(Failure { status: 3, message: "no rows could be fitted".into() }),
        other => other.map_err(Failure::coded)?,
    };
    for e in &fit.errors {
        eprintln!("  not fitted: {} ({}: {})", e.sample_id, e.code, e.message);
    }
    if fit.lambdas.is_empty() {
        return Err(Failure { status: 3, message: "no rows could be fitted".into() });
    }
    eprintln!("fitted {} samples", fit.lambdas.len());
    write_output(output, write_lambda_csv(&fit, degree).as_bytes())
}

fn plot(input: &Path, kind: &str, color_by: Option<String>, output: &Path) -> Outcome {
    let kind: VizKind = kind.parse().map_err(Failure::coded)?;
    let ds = load(input)?;
    if let Some(c) = &color_by {
        ds.require_category(c).map_err(Failure::coded)?;
    }
    let config = FitConfig::default();
    let fit = fit_dataset(&ds, &config).map_err(Failure::coded)?;
    let request = VizRequest { color_by, ..VizRequest::default() };
    let payload = build_payload(kind, &ds, &fit, &config.standard, &config.radii, &request).map_err(Failure::coded)?;
    let svg = export_svg(&payload, &SvgOptions::default()).map_err(Failure::coded)?;
    write_output(output, &svg)
}

fn metrics(input: &Path, prices: Option<&Path>, output: &Path) -> Outcome {
    let prices = match prices {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            Some(PriceTable::from_csv_str(&text).map_err(Failure::coded)?)
        }
        None => None,
    };
    let ds = load(input)?;
    let config = MetricConfig::new(builtin_reference("chondrite").map_err(Failure::coded)?);
    let reports: Vec<_> = ds.patterns.iter().map(|p| metric_report(p, &config, prices.as_ref())).collect();
    write_output(output, write_metrics_csv(&reports, &config).as_bytes())
}

fn serve(port: u16, data_dir: PathBuf) -> Outcome {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure { status: 1, message: e.to_string() })?;
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    runtime
        .block_on(reekit_service::serve(addr, data_dir))
        .map_err(|e| Failure { status: 1, message: format!("service stopped: {e}") })
}
