//! Command-line front end: validation, signatures, shells, the
//! approximation pipeline, verification, and SVG plots for polyhedron
//! documents.
//!
//! Exit codes: 0 success, 1 validation or verification failure, 2 usage
//! error. Failures print a machine-readable JSON error block on stderr.
//! All randomness flows from `--seed` (or the document's schedule), so
//! identical invocations produce identical files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use impoly::doc::{self, LoadedDocument, ScheduleBlock};
use impoly::forms::{gram_matrix, signature};
use impoly::pipeline::{isometric_embed, pl_isometry, Mode, PipelineRequest};
use impoly::svg::render_plot;
use impoly::verify::{default_slack, verify_closeness, verify_embedding, verify_isometry};

#[derive(Parser)]
#[command(name = "impoly", version, about = "Indefinite metric polyhedra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Embed,
    Isometry,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Embed => Mode::Embed,
            ModeArg::Isometry => Mode::Isometry,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a document's structure and invariants
    Validate { file: PathBuf },
    /// Print the signature of the quadratic form on every simplex
    Signature { file: PathBuf },
    /// Print the shell decomposition about a vertex
    Shells {
        file: PathBuf,
        #[arg(long)]
        vertex: usize,
    },
    /// Approximate the document's map by an exact piecewise-linear isometry
    Approximate {
        file: PathBuf,
        #[arg(long)]
        mode: ModeArg,
        /// Accuracy per shell: a scalar or a comma-separated list
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Base vertex of the shells (defaults to the document schedule)
        #[arg(long)]
        vertex: Option<usize>,
        /// Margin of the dominating form
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification oracles on a produced document
    Verify {
        file: PathBuf,
        /// Document carrying the prescribed metric (and the original map)
        #[arg(long)]
        against: PathBuf,
        /// Whether the embedding verdict gates the exit code
        #[arg(long, value_enum, default_value_t = ModeArg::Embed)]
        mode: ModeArg,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Project the map onto two coordinates and emit SVG
    Plot {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Coordinate pair "i,j"
        #[arg(long, default_value = "0,1")]
        project: String,
        /// Reference document drawn dashed
        #[arg(long)]
        against: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            kind,
            message: message.into(),
        }
    }
}

impl From<doc::DocError> for Failure {
    fn from(e: doc::DocError) -> Self {
        Failure::new(1, "document", e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "{}",
                json!({ "error": { "kind": f.kind, "message": f.message } })
            );
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => {
            let loaded = doc::load(&file)?;
            println!(
                "{}",
                json!({
                    "ok": true,
                    "vertices": loaded.complex.vertex_count(),
                    "simplices": loaded.complex.simplex_set().len(),
                    "dimension": loaded.complex.dimension(),
                    "metric": loaded.metric.is_some(),
                    "map": loaded.map.is_some(),
                })
            );
            Ok(())
        }
        Command::Signature { file } => cmd_signature(&file),
        Command::Shells { file, vertex } => cmd_shells(&file, vertex),
        Command::Approximate {
            file,
            mode,
            eps,
            seed,
            vertex,
            margin,
            out,
        } => cmd_approximate(&file, mode.into(), eps, seed, vertex, margin, &out),
        Command::Verify {
            file,
            against,
            mode,
            eps,
            samples,
        } => cmd_verify(&file, &against, mode.into(), eps, samples),
        Command::Plot {
            file,
            out,
            project,
            against,
        } => cmd_plot(&file, &out, &project, against.as_deref()),
    }
}

fn parse_eps(text: &str) -> Result<Vec<f64>, Failure> {
    let eps: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::new(2, "usage", format!("cannot parse --eps {text:?}")))?;
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Failure::new(
            2,
            "usage",
            "--eps must be a positive scalar or list",
        ));
    }
    Ok(eps)
}

fn dense_vertex(loaded: &LoadedDocument, label: usize) -> Result<usize, Failure> {
    loaded
        .dense_of(label)
        .ok_or_else(|| Failure::new(1, "document", format!("unknown vertex {label}")))
}

fn cmd_signature(file: &Path) -> Result<(), Failure> {
    let loaded = doc::load(file)?;
    let metric = loaded.require_metric()?;
    let mut rows = Vec::new();
    for s in loaded.complex.simplices().filter(|s| s.dim() >= 1) {
        let form = gram_matrix(s.vertices(), metric)
            .map_err(|e| Failure::new(1, "document", e.to_string()))?;
        let (plus, zero, minus) = signature(&form, form.default_tol());
        rows.push(json!({
            "simplex": s.vertices().iter().map(|&v| loaded.label(v)).collect::<Vec<_>>(),
            "dimension": s.dim(),
            "signature": { "plus": plus, "zero": zero, "minus": minus },
        }));
    }
    println!("{}", serde_json::to_string_pretty(&rows).unwrap());
    Ok(())
}

fn cmd_shells(file: &Path, vertex: usize) -> Result<(), Failure> {
    let loaded = doc::load(file)?;
    let base = dense_vertex(&loaded, vertex)?;
    let shells = loaded
        .complex
        .shell_decomposition(base)
        .map_err(|e| Failure::new(1, "document", e.to_string()))?;
    let rows: Vec<_> = shells
        .shells()
        .iter()
        .enumerate()
        .map(|(k, shell)| {
            json!({
                "shell": k + 1,
                "simplices": shell
                    .iter()
                    .map(|s| s.vertices().iter().map(|&v| loaded.label(v)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&rows).unwrap());
    Ok(())
}

fn cmd_approximate(
    file: &Path,
    mode: Mode,
    eps: Option<String>,
    seed: Option<u64>,
    vertex: Option<usize>,
    margin: f64,
    out: &Path,
) -> Result<(), Failure> {
    let loaded = doc::load(file)?;
    let metric = loaded.require_metric()?;
    let map = loaded.require_map()?;
    let schedule = loaded.schedule();
    let eps = match eps {
        Some(text) => parse_eps(&text)?,
        None => schedule
            .map(|s| s.eps.clone())
            .ok_or_else(|| Failure::new(2, "usage", "no --eps and no schedule block"))?,
    };
    let seed = seed.or(schedule.map(|s| s.seed)).unwrap_or(0);
    let base_label = vertex
        .or(schedule.map(|s| s.base_vertex))
        .unwrap_or(loaded.labels[0]);
    let base = dense_vertex(&loaded, base_label)?;

    let mut req = PipelineRequest::new(metric, map, base, &eps, mode, seed);
    req.h_margin = margin;
    let result = match mode {
        Mode::Embed => isometric_embed(req),
        Mode::Isometry => pl_isometry(req),
    }
    .map_err(|e| Failure::new(1, "pipeline", e.to_string()))?;

    let achieved = result.map.induced_edge_energies();
    let schedule_out = ScheduleBlock {
        base_vertex: base,
        eps: eps.clone(),
        seed,
    };
    let document = doc::document_from_parts(
        &result.map.complex,
        Some(&achieved),
        Some(&result.map),
        Some(schedule_out),
        Some((&result.carrier, &loaded.labels)),
    );
    doc::save(&document, out)?;
    println!(
        "{}",
        json!({
            "ok": true,
            "out": out.display().to_string(),
            "attempts": result.attempts,
            "report": result.report,
        })
    );
    Ok(())
}

fn cmd_verify(
    file: &Path,
    against: &Path,
    mode: Mode,
    eps: Option<String>,
    samples: usize,
) -> Result<(), Failure> {
    let produced = doc::load(file)?;
    let reference = doc::load(against)?;
    let h = produced.require_map()?;
    let g = reference.require_metric()?;
    let carrier = produced.carrier_onto(&reference)?;

    let isometry = verify_isometry(h, g, &carrier, 1e-9);
    let embedding = verify_embedding(h, default_slack(h));

    let closeness = match (&reference.map, reference.schedule()) {
        (Some(f), schedule) => {
            let eps = match (&eps, schedule) {
                (Some(text), _) => Some(parse_eps(text)?),
                (None, Some(s)) => Some(s.eps.clone()),
                (None, None) => None,
            };
            match eps {
                Some(eps) => {
                    let base = schedule.map(|s| s.base_vertex).unwrap_or(reference.labels[0]);
                    let base = dense_vertex(&reference, base)?;
                    let shells = reference
                        .complex
                        .shell_decomposition(base)
                        .map_err(|e| Failure::new(1, "document", e.to_string()))?;
                    Some(
                        verify_closeness(f, h, &carrier, &shells, &eps, samples.max(2))
                            .map_err(|e| Failure::new(1, "verification", e.to_string()))?,
                    )
                }
                None => None,
            }
        }
        _ => None,
    };

    let pass = isometry.pass
        && closeness.as_ref().map_or(true, |c| c.pass)
        && (mode == Mode::Isometry || embedding.pass);
    println!(
        "{}",
        json!({
            "pass": pass,
            "isometry": isometry,
            "embedding": embedding,
            "closeness": closeness,
        })
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::new(1, "verification", "one or more oracles failed"))
    }
}

fn cmd_plot(
    file: &Path,
    out: &Path,
    project: &str,
    against: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = doc::load(file)?;
    let map = loaded.require_map()?;
    let coords: Vec<usize> = project
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::new(2, "usage", format!("cannot parse --project {project:?}")))?;
    if coords.len() != 2 || coords[0] == coords[1] {
        return Err(Failure::new(
            2,
            "usage",
            "--project needs two distinct coordinates i,j",
        ));
    }
    let dim = map.signature.dim();
    if coords.iter().any(|&c| c >= dim) {
        return Err(Failure::new(
            1,
            "document",
            format!("projection coordinates out of range for dimension {dim}"),
        ));
    }
    let reference = match against {
        Some(path) => Some(doc::load(path)?),
        None => None,
    };
    let reference_map = reference.as_ref().and_then(|r| r.map.as_ref());
    if let Some(r) = reference_map {
        if r.signature.dim() <= *coords.iter().max().unwrap() {
            return Err(Failure::new(
                1,
                "document",
                "reference map has too few coordinates for the projection",
            ));
        }
    }
    let svg = render_plot(map, reference_map, (coords[0], coords[1]));
    std::fs::write(out, svg)
        .map_err(|e| Failure::new(1, "io", format!("cannot write {}: {e}", out.display())))?;
    println!("{}", json!({ "ok": true, "out": out.display().to_string() }));
    Ok(())
}
