//! Command-line frontend. Every output starts with a provenance header and
//! depends only on the arguments, so repeated runs are byte-identical.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebraic::{LatticePoint, NumberField};
use crate::error::{Result, SpectraError};
use crate::golden::{walk, write_walk_csv, Cocycle};
use crate::measure_analysis::{dimension_report, exact_rowsum_identity, table1_pipeline, TABLE1_POLYNOMIALS};
use crate::projective::{contraction_constants, find_mixing_word, non_expansion};
use crate::spectrum::{check_condition1, code_of, compute_delta, enumerate_patch, Condition1Verdict};
use crate::transition::{build_digit_matrices, build_lambda_r, spectral_radius, MeasureModel, TransitionMatrix};

/// Exit status for a verdict that could not be certified either way.
pub const EXIT_UNDETERMINED: i32 = 4;
/// Environment variable capping the worker threads of `table1`.
pub const THREADS_VAR: &str = "SPECTRA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "spectra", version, about = "Spectra of hyperbolic algebraic integers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Numerical tolerance for iterative solvers.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    MatrixMarket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    /// The digit matrices A_{-1}, A_0, A_1 on Δ.
    Digit,
    /// Λ_R on the patch of radius R.
    Lambda,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots, classification, λ and μ(0).
    Analyze {
        polynomial: String,
        #[command(flatten)]
        common: Common,
    },
    /// The patch X̄(β) ∩ B_β(R).
    Spectrum {
        polynomial: String,
        #[arg(long = "radius", short = 'R', default_value_t = 1.0)]
        r: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// The difference set Δ.
    Delta {
        polynomial: String,
        #[command(flatten)]
        common: Common,
    },
    /// Transition matrices in Matrix Market format. With several matrices the
    /// output path is used as a prefix.
    Matrices {
        polynomial: String,
        #[arg(long, value_enum, default_value_t = MatrixKind::Digit)]
        kind: MatrixKind,
        #[arg(long = "radius", short = 'R', default_value_t = 1.0)]
        r: f64,
        #[command(flatten)]
        common: Common,
    },
    /// μ(x) and the local vector for a digit word or a lattice point.
    Measure {
        polynomial: String,
        /// Comma-separated digits in {-1,0,1}, most significant first.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "point")]
        word: Option<String>,
        /// Comma-separated lattice coordinates in the basis 1, β, ….
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Dimension bound, W1 and the row-sum identity for a Pisot number.
    Wasserstein {
        polynomial: String,
        #[command(flatten)]
        common: Common,
    },
    /// The dimension table for the built-in list of Pisot numbers.
    Table1 {
        /// Report W1 on I_β itself instead of on [-1, 1].
        #[arg(long)]
        native: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Cut-and-project Condition 1.
    Condition1 {
        polynomial: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Mixing word with contraction constants.
    MixingWord {
        polynomial: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// The odometer walk on X(φ).
    GoldenWalk {
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Spectrum { .. } => "spectrum",
            Command::Delta { .. } => "delta",
            Command::Matrices { .. } => "matrices",
            Command::Measure { .. } => "measure",
            Command::Wasserstein { .. } => "wasserstein",
            Command::Table1 { .. } => "table1",
            Command::Condition1 { .. } => "condition1",
            Command::MixingWord { .. } => "mixing-word",
            Command::GoldenWalk { .. } => "golden-walk",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Analyze { common, .. }
            | Command::Spectrum { common, .. }
            | Command::Delta { common, .. }
            | Command::Matrices { common, .. }
            | Command::Measure { common, .. }
            | Command::Wasserstein { common, .. }
            | Command::Table1 { common, .. }
            | Command::Condition1 { common, .. }
            | Command::MixingWord { common, .. }
            | Command::GoldenWalk { common, .. } => common,
        }
    }
}

/// Key/value pairs written at the top of every output.
fn provenance(cmd: &Command, polynomial: Option<&NumberField>, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut p = vec![
        ("tool".to_string(), "spectra".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), cmd.name().to_string()),
    ];
    if let Some(f) = polynomial {
        p.push(("polynomial".into(), f.minpoly().to_text()));
    }
    p.push(("tolerance".into(), format!("{:e}", cmd.common().tol)));
    p.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    p
}

fn header_lines(prov: &[(String, String)]) -> Vec<String> {
    prov.iter().map(|(k, v)| format!("{k}: {v}")).collect()
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, prov: &[(String, String)], result: impl Serialize) -> Result<()> {
    let prov: serde_json::Map<String, Value> =
        prov.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let mut w = open(path)?;
    serde_json::to_writer_pretty(&mut w, &json!({ "provenance": prov, "result": result }))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn parse_list(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| SpectraError::InvalidArgument(format!("bad integer `{s}`"))))
        .collect()
}

fn threads() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| SpectraError::InvalidArgument(format!("{THREADS_VAR} must be a positive integer"))),
        Err(_) => Ok(0),
    }
}

/// Executes a parsed command and returns the process exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    let cmd = &cli.command;
    let common = cmd.common();
    let out = common.out.as_deref();
    let tol = common.tol;
    match cmd {
        Command::Analyze { polynomial, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let patch = enumerate_patch(&f, 1.0)?;
            let lambda = spectral_radius(&build_lambda_r(&patch), tol)?;
            let model = MeasureModel::new(&f, tol)?;
            let roots: Vec<(f64, f64)> = f.roots().iter().map(|z| (z.re, z.im)).collect();
            let result = json!({
                "classification": f.classification(),
                "beta": f.beta(),
                "roots": roots,
                "n_expanding": f.n_expanding(),
                "n_contracting": f.n_contracting(),
                "lambda": lambda,
                "lambda_delta": model.spectral.lambda,
                "mu0": model.spectral.mu0,
                "delta_size": model.delta.len(),
                "patch_size": patch.len(),
            });
            write_json(out, &provenance(cmd, Some(&f), &[]), result)?;
        }
        Command::Spectrum { polynomial, r, format, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let patch = enumerate_patch(&f, *r)?;
            let prov = provenance(cmd, Some(&f), &[("R", r.to_string())]);
            let export = patch.export();
            match format {
                Format::Json => write_json(out, &prov, &export)?,
                Format::Csv => {
                    let mut w = open(out)?;
                    for line in header_lines(&prov) {
                        writeln!(w, "# {line}")?;
                    }
                    let mut c = csv::Writer::from_writer(w);
                    c.write_record(["index", "coords", "value", "t_minus", "t_zero", "t_plus"])?;
                    for (i, p) in export.points.iter().enumerate() {
                        let coords: Vec<String> = p.iter().map(i64::to_string).collect();
                        let e = |k: usize| export.edges[i][k].map_or(String::new(), |j| j.to_string());
                        c.write_record([
                            i.to_string(),
                            coords.join(" "),
                            format!("{:.17e}", export.values[i]),
                            e(0),
                            e(1),
                            e(2),
                        ])?;
                    }
                    c.flush()?;
                }
                Format::MatrixMarket => {
                    let mut w = open(out)?;
                    build_lambda_r(&patch).write_matrix_market(&mut w, &header_lines(&prov))?;
                    w.flush()?;
                }
            }
        }
        Command::Delta { polynomial, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let delta = compute_delta(&f)?;
            let elements: Vec<Value> =
                delta.elements().iter().map(|p| json!({ "coords": p.coords(), "value": f.value(p) })).collect();
            let result = json!({ "size": delta.len(), "elements": elements });
            write_json(out, &provenance(cmd, Some(&f), &[]), result)?;
        }
        Command::Matrices { polynomial, kind, r, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let mats: Vec<(String, TransitionMatrix)> = match kind {
                MatrixKind::Digit => {
                    let d = build_digit_matrices(&compute_delta(&f)?)?;
                    d.iter().map(|(c, m)| (format!("A_{c}"), m.clone())).collect()
                }
                MatrixKind::Lambda => vec![("Lambda_R".into(), build_lambda_r(&enumerate_patch(&f, *r)?))],
            };
            for (name, m) in &mats {
                let prov = provenance(cmd, Some(&f), &[("matrix", name.clone()), ("R", r.to_string())]);
                let path = match (out, mats.len()) {
                    (Some(p), n) if n > 1 => Some(PathBuf::from(format!("{}.{name}.mtx", p.display()))),
                    (p, _) => p.map(Path::to_path_buf),
                };
                let mut w = open(path.as_deref())?;
                m.write_matrix_market(&mut w, &header_lines(&prov))?;
                w.flush()?;
            }
        }
        Command::Measure { polynomial, word, point, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let model = MeasureModel::new(&f, tol)?;
            let (word, point) = match (word, point) {
                (Some(w), _) => {
                    let w = parse_list(w)?;
                    (w.clone(), crate::spectrum::point_of_code(&f, &w)?)
                }
                (None, Some(p)) => {
                    let p = LatticePoint(parse_list(p)?);
                    if p.coords().len() != f.degree() {
                        return Err(SpectraError::InvalidArgument("point has the wrong dimension".into()));
                    }
                    match code_of(&f, &p)? {
                        Some(w) => (w, p),
                        None => {
                            let result = json!({ "point": p.coords(), "in_spectrum": false, "mu": 0.0 });
                            write_json(out, &provenance(cmd, Some(&f), &[]), result)?;
                            return Ok(0);
                        }
                    }
                }
                (None, None) => return Err(SpectraError::InvalidArgument("give --word or --point".into())),
            };
            let v = model.local_vector(&word)?;
            let result = json!({
                "point": point.coords(),
                "in_spectrum": true,
                "word": word,
                "mu": v[0],
                "local_vector": v,
                "lambda": model.spectral.lambda,
            });
            write_json(out, &provenance(cmd, Some(&f), &[]), result)?;
        }
        Command::Wasserstein { polynomial, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let report = dimension_report(&f, tol)?;
            let identity = exact_rowsum_identity(&f, tol)?;
            let result = json!({ "report": report, "rowsum_identity": identity });
            write_json(out, &provenance(cmd, Some(&f), &[("w1_scale", "[-1,1]".into())]), result)?;
        }
        Command::Table1 { native, .. } => {
            let n = threads()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SpectraError::InvalidArgument(e.to_string()))?;
            let rows = pool.install(|| table1_pipeline(&TABLE1_POLYNOMIALS, tol));
            let scale = if *native { "I_beta" } else { "[-1,1]" };
            let prov = provenance(cmd, None, &[("w1_scale", scale.into())]);
            let mut w = open(out)?;
            for line in header_lines(&prov) {
                writeln!(w, "# {line}")?;
            }
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["polynomial", "beta", "lambda", "bound", "w1", "matrix_size", "entropy_lb"])?;
            let mut first_error = None;
            for (p, row) in TABLE1_POLYNOMIALS.iter().zip(rows) {
                match row {
                    Ok(r) => c.write_record([
                        r.polynomial.clone(),
                        format!("{:.15}", r.beta),
                        format!("{:.15}", r.lambda),
                        format!("{:.15}", r.bound),
                        format!("{:.15}", if *native { r.w1_native } else { r.w1 }),
                        r.matrix_size.to_string(),
                        format!("{:.15}", r.entropy_lb),
                    ])?,
                    Err(e) => {
                        c.write_record(std::iter::once(p.to_string()).chain(std::iter::repeat_n(String::new(), 6)))?;
                        first_error.get_or_insert(e);
                    }
                }
            }
            c.flush()?;
            if let Some(e) = first_error {
                return Err(e);
            }
        }
        Command::Condition1 { polynomial, depth, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let report = check_condition1(&f, *depth)?;
            write_json(out, &provenance(cmd, Some(&f), &[("depth", depth.to_string())]), &report)?;
            if matches!(report.verdict, Condition1Verdict::Undetermined(_)) {
                return Ok(EXIT_UNDETERMINED);
            }
        }
        Command::MixingWord { polynomial, trials, seed, .. } => {
            let f = NumberField::from_text(polynomial)?;
            let delta = compute_delta(&f)?;
            let mats = build_digit_matrices(&delta)?;
            let mw = find_mixing_word(&mats, &delta)?;
            let cc = contraction_constants(&mw, *trials, *seed)?;
            let ne = non_expansion(&mats, *trials, *seed)?;
            let result = json!({
                "word": mw.word,
                "I": mw.zero_rows,
                "J": mw.zero_cols,
                "C1_emp": cc.c1,
                "C2_emp": cc.c2,
                "C2_birkhoff": cc.c2_birkhoff,
                "single_digit_non_expansion": ne,
            });
            let extra = [("seed", seed.to_string()), ("trials", trials.to_string())];
            write_json(out, &provenance(cmd, Some(&f), &extra), result)?;
        }
        Command::GoldenWalk { steps, .. } => {
            let cocycle = Cocycle::new(tol)?;
            let states = walk(&cocycle, *steps)?;
            let f = cocycle.model().field().clone();
            let prov = provenance(cmd, Some(&f), &[("steps", steps.to_string()), ("z", "ln(mu(x)/mu(0))".into())]);
            let mut w = open(out)?;
            write_walk_csv(&mut w, &states, cocycle.mu0(), &header_lines(&prov))?;
            w.flush()?;
        }
    }
    Ok(0)
}

/// Machine-readable error report for standard error.
pub fn error_json(e: &SpectraError) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() } })
}
