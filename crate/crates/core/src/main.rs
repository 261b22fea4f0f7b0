use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use breptok::constraints::{detect_constraints, DEFAULT_AXIS_TOL_DEG, DEFAULT_HULL_TOL};
use breptok::corpus::{gen_corpus, gen_plate_corpus};
use breptok::document::{BRepDocument, Labels, SCHEMA_VERSION};
use breptok::geometry::{Aabb, Point3};
use breptok::latent::MomentCodec;
use breptok::metrics::{
    compute_cov_mmd_jsd, novel_unique, sample_indexed, valid_percentage, MetricsReport,
    DEFAULT_SAMPLES,
};
use breptok::pipeline::{
    detokenize, roundtrip, tokenize, TokenizeOptions, DEFAULT_MAX_EDGES, DEFAULT_MAX_FACES,
};
use breptok::tokens::format::{read_tokens, write_binary, write_text};
use breptok::tokens::vocab::{manifest, VOCAB_SIZE, VOCAB_VERSION};
use breptok::tokens::{
    encode_autocomplete_prefix, parse_stream, user_subgraph, ComplexityClass, DecodeMode, Token,
    TokenKind,
};
use breptok::topology::{BRepGraph, WindowStride};
use breptok::validity::{check_validity, DEFAULT_GAP_TOL};
use breptok::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_FORMAT: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Tokenize, decode, validate and generate B-Rep solids.
///
/// Exit codes: 0 success, 1 validation failure, 2 parse or format error,
/// 3 usage error. BREPTOK_THREADS sets the worker count.
#[derive(Parser)]
#[command(name = "breptok", disable_version_flag = true)]
struct Cli {
    /// Print the tool, schema and vocabulary versions.
    #[arg(short = 'V', long)]
    version: bool,

    /// Report format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Uncond,
    Autocomplete,
}

impl From<Mode> for DecodeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Uncond => DecodeMode::Unconditional,
            Mode::Autocomplete => DecodeMode::Autocomplete,
        }
    }
}

#[derive(Args)]
struct StrideArg {
    /// Levels the reference window advances by per BFT level.
    #[arg(long = "window-stride", default_value = "1")]
    stride: WindowStride,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_FACES)]
    max_faces: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_EDGES)]
    max_edges: usize,
    /// Tokenize solids of any size.
    #[arg(long)]
    no_limit: bool,
}

impl LimitArgs {
    fn limits(&self) -> Option<(usize, usize)> {
        (!self.no_limit).then_some((self.max_faces, self.max_edges))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode a B-Rep document as a token stream.
    Tokenize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        meta: Option<ComplexityClass>,
        #[command(flatten)]
        stride: StrideArg,
        #[command(flatten)]
        limits: LimitArgs,
        /// Write one decimal id per line instead of the binary format.
        #[arg(long)]
        text: bool,
    },
    /// Decode a token stream into a B-Rep document in the unit-cube frame.
    Detokenize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Uncond)]
        mode: Mode,
        #[command(flatten)]
        stride: StrideArg,
    },
    /// Tokenize and parse back; fails unless topology and placement survive.
    Roundtrip {
        input: PathBuf,
        #[command(flatten)]
        stride: StrideArg,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Watertightness proxy report.
    Validate {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
        gap_tol: f64,
    },
    /// Hull planes and bolt holes.
    DetectConstraints {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_HULL_TOL)]
        hull_tol: f64,
        #[arg(long, default_value_t = DEFAULT_AXIS_TOL_DEG)]
        axis_tol_deg: f64,
    },
    /// Conditioning prefix holding the chosen faces as level 0.
    AutocompletePrefix {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        faces: Vec<usize>,
        /// x0,y0,z0,x1,y1,z1
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        domain_box: Vec<f64>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        meta: Option<ComplexityClass>,
        #[command(flatten)]
        stride: StrideArg,
        #[arg(long)]
        text: bool,
    },
    /// COV / MMD / JSD / novel / unique / valid over directories of documents.
    Metrics {
        #[arg(long)]
        gen: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
        gap_tol: f64,
    },
    /// Token counts by kind, levels, faces, edges and complexity class.
    Stats {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Uncond)]
        mode: Mode,
        #[command(flatten)]
        stride: StrideArg,
    },
    /// Write a labeled synthetic corpus, one document per file.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plates with one to six bolt holes instead of the stratified mix.
        #[arg(long)]
        plates: bool,
    },
    /// Print the vocabulary layout.
    Vocab,
}

/// Result of a command: `Ok(false)` is a validation failure.
type Outcome = Result<bool, Error>;

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(value).expect("reports serialize")
        ),
        Format::Text => print!("{}", text(value)),
    }
}

fn read_graph(path: &Path) -> Result<(BRepDocument, BRepGraph), Error> {
    let doc = BRepDocument::read(path)?;
    let g = doc.to_graph()?;
    Ok((doc, g))
}

fn write_stream(path: &Path, tokens: &[u16], text: bool) -> Result<(), Error> {
    if text {
        fs::write(path, write_text(tokens))?;
    } else {
        fs::write(path, write_binary(tokens))?;
    }
    info!("wrote {} tokens to {}", tokens.len(), path.display());
    Ok(())
}

fn json_documents(dir: &Path) -> Result<Vec<BRepGraph>, Error> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .par_iter()
        .map(|p| {
            BRepDocument::read(p)
                .and_then(|d| d.to_graph())
                .map_err(|e| Error::Format(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn clouds(graphs: &[BRepGraph], n: usize, seed: u64) -> Result<Vec<Vec<Point3>>, Error> {
    graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| sample_indexed(&g.normalized()?.0, n, seed, i as u64))
        .collect()
}

#[derive(Serialize)]
struct Stats {
    tokens: usize,
    by_kind: Vec<(String, usize)>,
    levels: usize,
    level_sizes: Vec<usize>,
    faces: usize,
    edges: usize,
    meta: Option<ComplexityClass>,
    complexity: ComplexityClass,
}

fn run(cli: Cli) -> Outcome {
    let codec = MomentCodec::new();
    let format = cli.format;
    let Some(command) = cli.command else {
        return Err(Error::Contract("no subcommand given; see --help".into()));
    };
    match command {
        Command::Tokenize {
            input,
            output,
            meta,
            stride,
            limits,
            text,
        } => {
            let (_, g) = read_graph(&input)?;
            let opts = TokenizeOptions {
                meta,
                stride: stride.stride,
                limits: limits.limits(),
            };
            let t = tokenize(&g, &codec, &opts)?;
            write_stream(&output, &t.stream, text)?;
            Ok(true)
        }
        Command::Detokenize {
            input,
            output,
            mode,
            stride,
        } => {
            let tokens = read_tokens(&fs::read(&input)?)?;
            let d = detokenize(&tokens, &codec, mode.into(), stride.stride)?;
            if !d.dangling.is_empty() {
                warn!("{} edges keep an unassigned face", d.dangling.len());
            }
            let labels = d.decoded.meta.map(|c| Labels {
                complexity: Some(c),
                ..Default::default()
            });
            BRepDocument::from_graph(&d.graph, labels).write(&output)?;
            info!(
                "wrote {} faces / {} edges to {}",
                d.graph.face_count(),
                d.graph.edge_count(),
                output.display()
            );
            Ok(true)
        }
        Command::Roundtrip {
            input,
            stride,
            limits,
        } => {
            let (_, g) = read_graph(&input)?;
            let opts = TokenizeOptions {
                meta: None,
                stride: stride.stride,
                limits: limits.limits(),
            };
            let r = roundtrip(&g, &codec, &opts)?;
            #[derive(Serialize)]
            struct Report {
                passed: bool,
                tokens: usize,
                faces: usize,
                edges: usize,
                levels: usize,
                topology_ok: bool,
                max_placement_error: f64,
            }
            let report = Report {
                passed: r.passed(),
                tokens: r.tokens,
                faces: r.faces,
                edges: r.edges,
                levels: r.levels,
                topology_ok: r.topology_ok,
                max_placement_error: r.max_placement_error,
            };
            emit(format, &report, |r| {
                format!(
                    "passed: {}\ntokens: {}\nfaces: {}\nedges: {}\nlevels: {}\ntopology_ok: {}\nmax_placement_error: {:e}\n",
                    r.passed, r.tokens, r.faces, r.edges, r.levels, r.topology_ok, r.max_placement_error
                )
            });
            Ok(report.passed)
        }
        Command::Validate { input, gap_tol } => {
            let (_, g) = read_graph(&input)?;
            let r = check_validity(&g, gap_tol);
            emit(format, &r, |r| {
                let mut s = format!("is_manifold_closed: {}\n", r.is_manifold_closed);
                for v in &r.edge_incidence_violations {
                    s += &format!("incidence: edge {} has {} valid faces\n", v.edge, v.incident_faces);
                }
                for v in &r.geometric_gap_violations {
                    s += &format!("gap: edge {} to face {} is {:.6}\n", v.edge, v.face, v.max_gap);
                }
                for e in &r.dangling_edges {
                    s += &format!("dangling: edge {e}\n");
                }
                s
            });
            Ok(r.is_manifold_closed)
        }
        Command::DetectConstraints {
            input,
            hull_tol,
            axis_tol_deg,
        } => {
            let (_, g) = read_graph(&input)?;
            let c = detect_constraints(&g, hull_tol, axis_tol_deg);
            if let Some(w) = &c.bolt_holes.warning {
                warn!("{w}");
            }
            emit(format, &c, |c| {
                format!(
                    "hull_planes: {:?}\nbolt_holes: {:?}\n",
                    c.hull_planes, c.bolt_holes.faces
                )
            });
            Ok(true)
        }
        Command::AutocompletePrefix {
            input,
            faces,
            domain_box,
            output,
            meta,
            stride,
            text,
        } => {
            if domain_box.len() != 6 {
                return Err(Error::Contract(format!(
                    "--domain-box takes 6 values, got {}",
                    domain_box.len()
                )));
            }
            let (_, g) = read_graph(&input)?;
            let b = Aabb::new(
                [domain_box[0], domain_box[1], domain_box[2]],
                [domain_box[3], domain_box[4], domain_box[5]],
            )?;
            let user = user_subgraph(&g, &faces)?;
            let prefix = encode_autocomplete_prefix(&user, &b, &codec, stride.stride, meta)?;
            write_stream(&output, &prefix, text)?;
            Ok(true)
        }
        Command::Metrics {
            gen,
            reference,
            train,
            seed,
            samples,
            gap_tol,
        } => {
            let gen_graphs = json_documents(&gen)?;
            let ref_graphs = json_documents(&reference)?;
            if gen_graphs.is_empty() || ref_graphs.is_empty() {
                return Err(Error::Contract("metric directories must hold documents".into()));
            }
            let scores = compute_cov_mmd_jsd(
                &clouds(&gen_graphs, samples, seed)?,
                &clouds(&ref_graphs, samples, seed)?,
            )?;
            let train_graphs = train.as_deref().map(json_documents).transpose()?;
            let (novel, unique) = novel_unique(&gen_graphs, train_graphs.as_deref().unwrap_or(&[]));
            let report = MetricsReport {
                cov: scores.cov,
                mmd: scores.mmd,
                jsd: scores.jsd,
                novel: train_graphs.map(|_| novel),
                unique,
                valid: valid_percentage(&gen_graphs, gap_tol),
            };
            emit(format, &report, |r| {
                let novel = r.novel.map_or("n/a".to_string(), |v| format!("{v:.2}"));
                format!(
                    "cov: {:.2}\nmmd: {:.4}\njsd: {:.4}\nnovel: {novel}\nunique: {:.2}\nvalid: {:.2}\n",
                    r.cov, r.mmd, r.jsd, r.unique, r.valid
                )
            });
            Ok(true)
        }
        Command::Stats {
            input,
            mode,
            stride,
        } => {
            let tokens = read_tokens(&fs::read(&input)?)?;
            let d = parse_stream(&tokens, mode.into(), stride.stride)?;
            let by_kind = TokenKind::ALL
                .iter()
                .map(|k| {
                    let n = tokens
                        .iter()
                        .filter(|&&id| Token::from_id(id).map(|t| t.kind()) == Some(*k))
                        .count();
                    (k.name().to_string(), n)
                })
                .collect();
            let stats = Stats {
                tokens: tokens.len(),
                by_kind,
                levels: d.levels.len(),
                level_sizes: d.levels.iter().map(Vec::len).collect(),
                faces: d.faces.len(),
                edges: d.edges.len(),
                meta: d.meta,
                complexity: ComplexityClass::from_face_count(d.faces.len()),
            };
            emit(format, &stats, |s| {
                let mut out = format!(
                    "tokens: {}\nfaces: {}\nedges: {}\nlevels: {} {:?}\ncomplexity: {}\n",
                    s.tokens, s.faces, s.edges, s.levels, s.level_sizes, s.complexity
                );
                if let Some(m) = s.meta {
                    out += &format!("meta: {m}\n");
                }
                for (k, n) in &s.by_kind {
                    out += &format!("{k}: {n}\n");
                }
                out
            });
            Ok(true)
        }
        Command::GenCorpus {
            out,
            count,
            seed,
            plates,
        } => {
            let docs = if plates {
                gen_plate_corpus(count, seed)?
            } else {
                gen_corpus(count, seed)?
            };
            fs::create_dir_all(&out)?;
            docs.par_iter().enumerate().try_for_each(|(i, d)| {
                d.write(&out.join(format!("solid_{i:05}.json")))
            })?;
            info!("wrote {} documents to {}", docs.len(), out.display());
            Ok(true)
        }
        Command::Vocab => {
            print!("{}", manifest());
            Ok(true)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_FORMAT,
        e if e.is_format_error() => EXIT_FORMAT,
        Error::Contract(_) => EXIT_USAGE,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if cli.version {
        println!(
            "breptok {} (schema {SCHEMA_VERSION}, vocabulary {VOCAB_VERSION}, {VOCAB_SIZE} tokens)",
            env!("CARGO_PKG_VERSION")
        );
        return ExitCode::SUCCESS;
    }
    if let Some(n) = std::env::var("BREPTOK_THREADS").ok().and_then(|v| v.parse().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            warn!("could not size the thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
