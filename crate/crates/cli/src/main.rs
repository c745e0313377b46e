use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtgeom::field::{self, FieldError, TensorField};
use dtgeom::linalg::SymMatrix;
use dtgeom::metrics::{swelling_profile, GeodesicSpec, MetricKind};
use dtgeom::verify::{
    run_all_with, search_extrapolation_counterexamples, CampaignOptions, EnsembleSpec, PropertyId, RankMode,
    VerificationReport, DEFAULT_EXTRAPOLATION_P,
};

/// Interpolate covariance tensors along square-root geodesics and check the
/// determinant inequalities behind them.
#[derive(Parser)]
#[command(name = "dtgeom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point at weight p on the path between two single-tensor files.
    Interp {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "procrustes")]
        metric: MetricKind,
        /// Weight of A: p = 1 gives A, p = 0 gives B.
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Refine a tensor field by an integer factor along every axis.
    Upsample {
        input: PathBuf,
        #[arg(long, default_value = "procrustes")]
        metric: MetricKind,
        #[arg(long)]
        factor: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Table of det(D(p))^(1/3) along the path between two tensors.
    Swelling {
        a: PathBuf,
        b: PathBuf,
        /// Repeat to add columns [default: euclidean-root and procrustes].
        #[arg(long)]
        metric: Vec<MetricKind>,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run property campaigns and write their reports.
    Verify {
        #[command(flatten)]
        ensemble: Ensemble,
        /// Matrix dimension [default: every dimension from 2 to 6].
        #[arg(long)]
        dim: Option<usize>,
        /// Repeat to restrict the campaign [default: all properties].
        #[arg(long)]
        property: Vec<PropertyId>,
        #[arg(long, default_value_t = RankMode::Mixed)]
        rank_mode: RankMode,
        #[arg(long, hide = true)]
        invert_main_theorem: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Look for extrapolation weights where either metric swells more.
    SearchExtrapolation {
        #[command(flatten)]
        ensemble: Ensemble,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Repeat for several weights; each must lie outside [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = RankMode::Full)]
        rank_mode: RankMode,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Ensemble {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Numeric(#[from] dtgeom::Error),
    #[error("{0}")]
    Encode(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Interp {
            a,
            b,
            metric,
            p,
            output,
        } => {
            let spec = GeodesicSpec::new(metric, field::load_tensor(a)?, field::load_tensor(b)?)?;
            let d = dtgeom::metrics::path_point(&spec, p)?;
            let text = match output.format {
                Format::Json => field::tensor_to_json(&d),
                Format::Csv => csv_text(&COMPONENTS, [components_row(&d)])?,
            };
            emit(&output, &text)?;
        }
        Command::Upsample {
            input,
            metric,
            factor,
            output,
        } => {
            let f = TensorField::load(input)?.upsample(factor, metric)?;
            let text = match output.format {
                Format::Json => f.to_json(),
                Format::Csv => field_csv(&f)?,
            };
            emit(&output, &text)?;
        }
        Command::Swelling {
            a,
            b,
            metric,
            steps,
            output,
        } => {
            let metrics = if metric.is_empty() {
                vec![MetricKind::EuclideanRoot, MetricKind::Procrustes]
            } else {
                metric
            };
            let text = swelling(
                &field::load_tensor(a)?,
                &field::load_tensor(b)?,
                &metrics,
                steps,
                output.format,
            )?;
            emit(&output, &text)?;
        }
        Command::Verify {
            ensemble,
            dim,
            property,
            rank_mode,
            invert_main_theorem,
            output,
        } => {
            let properties = if property.is_empty() {
                PropertyId::ALL.to_vec()
            } else {
                property
            };
            let opts = CampaignOptions {
                invert_main_theorem,
                ..Default::default()
            };
            let dims: Vec<usize> = dim.map_or_else(|| (2..=6).collect(), |d| vec![d]);
            let mut reports = Vec::new();
            for d in dims {
                let spec = EnsembleSpec::new(d, ensemble.trials, ensemble.seed, rank_mode)?;
                reports.extend(run_all_with(&spec, &properties, &opts)?);
            }
            emit(&output, &reports_text(&reports, output.format)?)?;
            return Ok(verdict(&reports));
        }
        Command::SearchExtrapolation {
            ensemble,
            dim,
            p,
            rank_mode,
            output,
        } => {
            let p = if p.is_empty() {
                DEFAULT_EXTRAPOLATION_P.to_vec()
            } else {
                p
            };
            let spec = EnsembleSpec::new(dim, ensemble.trials, ensemble.seed, rank_mode)?;
            let report = search_extrapolation_counterexamples(&spec, &p)?;
            let reports = [report];
            emit(&output, &reports_text(&reports, output.format)?)?;
            return Ok(verdict(&reports));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verdict(reports: &[VerificationReport]) -> ExitCode {
    let failed: Vec<&VerificationReport> = reports.iter().filter(|r| !r.passed()).collect();
    for r in &failed {
        eprintln!(
            "{} (dim {}): {} failure(s), worst margin {:?} at trial {:?}",
            r.property, r.dim, r.failures, r.worst_margin, r.worst_trial
        );
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

const COMPONENTS: [&str; 6] = ["xx", "xy", "xz", "yy", "yz", "zz"];

/// 17 significant digits, enough to recover every `f64`.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn components_row(t: &SymMatrix) -> Vec<String> {
    field::to_components(t).iter().map(|&x| full(x)).collect()
}

fn csv_text<H, R, I>(header: &[H], rows: R) -> Result<String, Failure>
where
    H: AsRef<str>,
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::Encode(format!("csv encoding failed: {e}"));
    w.write_record(header.iter().map(AsRef::as_ref)).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Encode(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn field_csv(f: &TensorField) -> Result<String, Failure> {
    let header = ["x", "y", "z"].into_iter().chain(COMPONENTS);
    let header: Vec<&str> = header.collect();
    let rows = f.tensors().iter().enumerate().map(|(i, t)| {
        let [x, y, z] = f.voxel(i).0;
        [x, y, z]
            .iter()
            .map(|v| v.to_string())
            .chain(components_row(t))
            .collect::<Vec<_>>()
    });
    csv_text(&header, rows)
}

fn swelling(
    a: &SymMatrix,
    b: &SymMatrix,
    metrics: &[MetricKind],
    steps: usize,
    format: Format,
) -> Result<String, Failure> {
    let mut columns = Vec::with_capacity(metrics.len());
    for &m in metrics {
        let spec = GeodesicSpec::new(m, a.clone(), b.clone())?;
        columns.push(swelling_profile(&spec, steps)?);
    }
    let ps: Vec<f64> = columns[0].iter().map(|&(p, _)| p).collect();
    let pick = |k: MetricKind| metrics.iter().position(|&m| m == k);
    // p values where the Procrustes column exceeds the Euclidean-root one
    let exceeding: Option<Vec<f64>> =
        pick(MetricKind::Procrustes)
            .zip(pick(MetricKind::EuclideanRoot))
            .map(|(s, h)| {
                let scale = columns[h].iter().fold(0.0f64, |acc, &(_, v)| acc.max(v));
                ps.iter()
                    .enumerate()
                    .filter(|&(k, _)| columns[s][k].1 > columns[h][k].1 * (1.0 + 1e-9) + 1e-12 * scale)
                    .map(|(_, &p)| p)
                    .collect()
            });
    match format {
        Format::Json => {
            let rows: Vec<serde_json::Value> = ps
                .iter()
                .enumerate()
                .map(|(k, &p)| {
                    let mut row = serde_json::Map::new();
                    row.insert("p".into(), p.into());
                    for (m, col) in metrics.iter().zip(&columns) {
                        row.insert(m.name().into(), col[k].1.into());
                    }
                    row.into()
                })
                .collect();
            let doc = serde_json::json!({ "rows": rows, "procrustes_exceeds_euclidean_root": exceeding });
            Ok(format!("{doc}\n"))
        }
        Format::Csv => {
            let header: Vec<&str> = std::iter::once("p").chain(metrics.iter().map(|m| m.name())).collect();
            let rows = ps.iter().enumerate().map(|(k, &p)| {
                std::iter::once(full(p))
                    .chain(columns.iter().map(|c| full(c[k].1)))
                    .collect::<Vec<_>>()
            });
            let mut text = csv_text(&header, rows)?;
            if let Some(list) = exceeding {
                let listed = if list.is_empty() {
                    "none".to_string()
                } else {
                    list.iter().map(|&p| full(p)).collect::<Vec<_>>().join(" ")
                };
                text.push_str(&format!("# procrustes above euclidean-root at p: {listed}\n"));
            }
            Ok(text)
        }
    }
}

fn reports_text(reports: &[VerificationReport], format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(reports).map_err(|e| Failure::Encode(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let header = [
                "property",
                "dim",
                "rank_mode",
                "seed",
                "trials_run",
                "failures",
                "near_misses",
                "skipped",
                "errors",
                "tolerance",
                "worst_margin",
                "worst_trial",
                "elapsed_ms",
            ];
            let opt = |x: Option<String>| x.unwrap_or_default();
            let rows = reports.iter().map(|r| {
                vec![
                    r.property.to_string(),
                    r.dim.to_string(),
                    r.rank_mode.to_string(),
                    r.seed.to_string(),
                    r.trials_run.to_string(),
                    r.failures.to_string(),
                    r.near_misses.to_string(),
                    r.skipped.to_string(),
                    r.errors.to_string(),
                    full(r.tolerance),
                    opt(r.worst_margin.map(full)),
                    opt(r.worst_trial.map(|t| t.to_string())),
                    full(r.elapsed_ms),
                ]
            });
            csv_text(&header, rows)
        }
    }
}

fn emit(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| Failure::Io {
                path: "standard output".into(),
                source,
            })
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| Failure::Io {
        path: path.display().to_string(),
        source,
    })
}
