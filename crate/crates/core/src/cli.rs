//! The batch command line. [`run`] parses arguments, executes one verb and
//! returns the process exit code; the binary is a thin wrapper around it.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::alternation::{
    amalgamate, canonical_finest, is_valid_approximation, random_alternating, validate_alternating,
    validate_class_constraint, validate_class_constraint_finite, validate_rep_pattern, ConstraintSeq, Partition,
};
use crate::coding::CodingContext;
use crate::eqrel::{EqRelStream, FiniteEqRel};
use crate::error::{Error, Result};
use crate::harness::{axiom_probe, miniature_dual_ramsey, pigeonhole_probe, Axiom, ExtensionPredicate, PigeonholeParams, ProbeVerdict};
use crate::ordinal::{phi, project_k, transfer, validate_ordinal_space, Bijection, Cnf, OrdinalEqRel, Target};
use crate::words::{
    lv_hj_bounded_search, verify_monochromatic, Alphabet, BuiltinColouring, CertificateFile, LetterSet, SearchOptions,
    SearchOutcome, SemigroupMode, Word,
};

/// Exit code for a verified result or a found certificate.
pub const EXIT_OK: i32 = 0;
/// Exit code for an internal invariant failure.
pub const EXIT_INTERNAL: i32 = 1;
/// Exit code for a search that ran out of budget.
pub const EXIT_EXHAUSTED: i32 = 2;
/// Exit code for an input that failed validation.
pub const EXIT_VALIDATION: i32 = 3;
/// Exit code for malformed or out-of-range input.
pub const EXIT_BAD_INPUT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "eqrel-ramsey", version, about = "Alternating equivalence relations, word codings and Hales-Jewett search")]
pub struct Cli {
    #[command(flatten)]
    pub output: Output,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Add wall-clock time to the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct Space {
    /// `mod:l`, `dyadic` or `periodic:a,b,..`.
    #[arg(long, default_value = "mod:2")]
    pub partition: String,
    /// `all`, `geq` or `f-geq:<bijection>`.
    #[arg(long, default_value = "all")]
    pub constraint: String,
    /// Ordinal `β` for `f-geq` bijections.
    #[arg(long, default_value = "w")]
    pub beta: String,
    /// The relation on ω: `canonical`, `random:<seed>[:<keep>]`, or a
    /// representative array glued to the canonical tail.
    #[arg(long, default_value = "canonical")]
    pub relation: String,
}

#[derive(Args, Debug, Clone)]
pub struct CertInput {
    /// Certificate file with `w0`, `X`, `alphabet` and `mode`.
    #[arg(long, conflicts_with_all = ["w0", "x"])]
    pub cert: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub w0: String,
    /// A left-variable word; repeat for `x_0, x_1, ...`.
    #[arg(long = "x")]
    pub x: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OrdinalArgs {
    /// `w*l`, or a limit ordinal `α >= w^2` such as `w^2`.
    #[arg(long)]
    pub target: Option<String>,
    /// Bijection `ω → α/ω`: `id`, `swap:<i>:<j>` or `file:<path>`.
    #[arg(long, default_value = "id")]
    pub bijection: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check alternation and the class constraint on a prefix.
    Validate {
        #[command(flatten)]
        space: Space,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Check a finite approximation instead of the relation.
        #[arg(long)]
        approx: Option<String>,
    },
    /// Code an end-extension of `r_n(E)` as a word.
    Encode {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        n: usize,
        /// The end-extension as a representative array.
        extension: String,
    },
    /// Decode a word into an end-extension of `r_n(E)`.
    Decode {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        n: usize,
        word: String,
    },
    /// Expand a certificate into scalar words.
    Expand {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        cert: CertInput,
    },
    /// Build the coarsening read off a certificate.
    BuildF {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        cert: CertInput,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Bounded left-variable Hales-Jewett search for a word colouring.
    HjSearch {
        /// Scalar alphabet `{0, .., k-1}`.
        #[arg(long, default_value_t = 2, conflicts_with = "tuples")]
        letters: u32,
        /// Tuple alphabet `base:arity`.
        #[arg(long)]
        tuples: Option<String>,
        /// `const:c`, `len-mod:m`, `first-letter` or `letter-count:λ:m`.
        #[arg(long)]
        colouring: String,
        /// Number of variable words.
        #[arg(long, default_value_t = 2)]
        words: usize,
        /// Bound on `|w0| + Σ|x_i|`.
        #[arg(long, default_value_t = 8)]
        budget: usize,
        /// Require `w0` itself to share the colour.
        #[arg(long)]
        include_base: bool,
        #[arg(long, default_value_t = 50_000_000)]
        node_limit: u64,
        /// Write the certificate file here when one is found.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Pigeonhole probe: search, build F, check every reachable end-extension.
    Pigeonhole {
        #[command(flatten)]
        space: Space,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// `all`, `first-join-zero`, `len-parity` or `clopen:<depth>:<colours>:<seed>`.
        #[arg(long, default_value = "clopen:4:2:0")]
        predicate: String,
        #[arg(long, default_value_t = 2)]
        words: usize,
        #[arg(long, default_value_t = 10)]
        budget: usize,
        #[arg(long, default_value_t = 5_000_000)]
        node_limit: u64,
    },
    /// Finite dual Ramsey check over colourings of `k`-class relations.
    Miniature {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        r: u32,
        /// Classes of the sought relation; defaults to `k + 1`.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Colourings drawn when the space is too large to enumerate.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Bounded falsification attempts for one axiom.
    Axioms {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        axiom: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        corpus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Carry a relation on ω to the ordinal and report its minimal representatives.
    Transfer {
        #[command(flatten)]
        space: Space,
        #[command(flatten)]
        ordinal: OrdinalArgs,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Merge every class from the `k`-th on into the first.
    Project {
        #[command(flatten)]
        space: Space,
        #[command(flatten)]
        ordinal: OrdinalArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Check both membership conditions of the ordinal space.
    ValidateOrdinal {
        #[command(flatten)]
        space: Space,
        #[command(flatten)]
        ordinal: OrdinalArgs,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// `β` with `ω·β = α`.
    DivideOmega { alpha: String },
}

/// The verb's report plus the exit code it implies.
struct Outcome {
    report: Value,
    code: i32,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, code: EXIT_OK }
    }
}

/// Maps a library error to an exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) => EXIT_VALIDATION,
        Error::LimitExceeded(_) => EXIT_EXHAUSTED,
        Error::Invariant(_) => EXIT_INTERNAL,
        Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::NotCanonical { .. }
        | Error::JoinNotBackward { .. }
        | Error::NotEndExtension(_)
        | Error::LetterOutsideAlphabet(_)
        | Error::Overflow(_) => EXIT_BAD_INPUT,
    }
}

/// Runs the command line and returns the exit code. Reports go to `stdout`
/// (or `--out`), errors to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let Cli { output, command } = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let start = Instant::now();
    let outcome = match execute(command) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let mut report = outcome.report;
    if output.timing {
        if let Value::Object(m) = &mut report {
            m.insert("wall_ms".into(), json!(start.elapsed().as_millis() as u64));
        }
    }
    let rendered = render(&report, output.format);
    let written = match &output.out {
        Some(path) => std::fs::write(path, rendered.as_bytes()).map_err(|e| e.to_string()),
        None => stdout.write_all(rendered.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return EXIT_BAD_INPUT;
    }
    outcome.code
}

/// Text rendering: one `key: value` line per top-level field, with nested
/// values as compact JSON.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Text => match report {
            Value::Object(m) => m
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k}: {s}\n"),
                    other => format!("{k}: {other}\n"),
                })
                .collect(),
            other => format!("{other}\n"),
        },
    }
}

fn parse_partition(s: &str) -> Result<Partition> {
    s.parse()
}

fn parse_constraint(space: &Space) -> Result<ConstraintSeq> {
    let beta: Cnf = space.beta.parse()?;
    ConstraintSeq::parse_with(&space.constraint, |id| Bijection::from_spec(id, beta))
}

/// A relation on ω from its command-line spec.
pub fn parse_relation(spec: &str, p: &Partition, c: &ConstraintSeq) -> Result<EqRelStream> {
    let spec = spec.trim();
    if spec == "canonical" {
        return canonical_finest(p, c);
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let mut parts = rest.split(':');
        let seed = parts
            .next()
            .and_then(|t| t.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("bad seed in {spec:?}")))?;
        let keep = match parts.next() {
            Some(t) => t.parse::<f64>().map_err(|_| Error::Parse(format!("bad keep probability in {spec:?}")))?,
            None => 0.5,
        };
        return random_alternating(p, c, seed, keep);
    }
    let head: FiniteEqRel = spec.strip_prefix("prefix:").unwrap_or(spec).parse()?;
    let base = canonical_finest(p, c)?;
    let glued = amalgamate(&head, &base, p)?;
    Ok(glued)
}

struct SpaceCtx {
    p: Partition,
    c: ConstraintSeq,
    e: EqRelStream,
}

fn space_ctx(space: &Space) -> Result<SpaceCtx> {
    let p = parse_partition(&space.partition)?;
    let c = parse_constraint(space)?;
    let e = parse_relation(&space.relation, &p, &c)?;
    Ok(SpaceCtx { p, c, e })
}

fn coding_ctx(space: &Space, n: usize) -> Result<CodingContext> {
    let s = space_ctx(space)?;
    CodingContext::new(s.e, s.p, s.c, n)
}

fn read_cert(cert: &CertInput) -> Result<(Word, Vec<Word>)> {
    match &cert.cert {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            let file: CertificateFile =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("certificate file: {e}")))?;
            Ok((file.w0, file.xs))
        }
        None => {
            let w0: Word = cert.w0.parse()?;
            let xs = cert.x.iter().map(|s| s.parse()).collect::<Result<Vec<Word>>>()?;
            Ok((w0, xs))
        }
    }
}

fn parse_target(ord: &OrdinalArgs, p: &Partition) -> Result<Target> {
    let spec = match &ord.target {
        Some(t) => t.trim().to_string(),
        None => match p.block_count() {
            Some(l) => format!("w*{l}"),
            None => return Err(Error::InvalidInput("the dyadic partition needs --target <alpha>".into())),
        },
    };
    if let Some(l) = spec.strip_prefix("w*").and_then(|t| t.parse::<usize>().ok()) {
        return Ok(Target::OmegaTimes(l));
    }
    let alpha: Cnf = spec.parse()?;
    let beta = alpha.divide_by_omega()?;
    Target::alpha_with(alpha, Bijection::from_spec(&ord.bijection, beta)?)
}

fn ordinal_view(r: &OrdinalEqRel, depth: usize) -> Result<Value> {
    let reps = r.backing().reps(depth);
    let images: Vec<String> = reps.iter().map(|&x| phi(x, r.partition(), r.target()).to_string()).collect();
    let verdict = match validate_ordinal_space(r, depth) {
        Ok(()) => json!("ok"),
        Err(v) => serde_json::to_value(&v).unwrap_or(Value::Null),
    };
    Ok(json!({
        "target": r.target().to_string(),
        "partition": r.partition().to_string(),
        "depth": depth,
        "reps": reps,
        "rep_images": images,
        "membership": verdict,
    }))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::Validate { space, depth, approx } => {
            let p = parse_partition(&space.partition)?;
            let c = parse_constraint(&space)?;
            if let Some(text) = approx {
                let a: FiniteEqRel = text.parse()?;
                let ok = is_valid_approximation(&a, &p, &c);
                let alt = validate_rep_pattern(&a.reps(), &p);
                let cls = validate_class_constraint_finite(&a, &p, &c);
                return Ok(Outcome {
                    report: json!({
                        "approximation": a.to_string(),
                        "partition": p.to_string(),
                        "constraint": c.to_string(),
                        "alternating": alt.map_or_else(|v| to_value(&v), |()| json!("ok")),
                        "class_constraint": cls.map_or_else(|v| to_value(&v), |()| json!("ok")),
                        "next_rep_in_block": p.block_of(a.domain_size()) == p.pattern_block(a.len()),
                        "valid": ok,
                    }),
                    code: if ok { EXIT_OK } else { EXIT_VALIDATION },
                });
            }
            let e = parse_relation(&space.relation, &p, &c)?;
            let alt = validate_alternating(&e, &p, depth);
            let cls = validate_class_constraint(&e, &p, &c, depth);
            let ok = alt.is_ok() && cls.is_ok();
            Ok(Outcome {
                report: json!({
                    "relation": space.relation,
                    "partition": p.to_string(),
                    "constraint": c.to_string(),
                    "depth": depth,
                    "reps": e.reps(depth),
                    "alternating": alt.map_or_else(|v| to_value(&v), |()| json!("ok")),
                    "class_constraint": cls.map_or_else(|v| to_value(&v), |()| json!("ok")),
                }),
                code: if ok { EXIT_OK } else { EXIT_VALIDATION },
            })
        }
        Command::Encode { space, n, extension } => {
            let ctx = coding_ctx(&space, n)?;
            let b: FiniteEqRel = extension.parse()?;
            let w = ctx.encode_extension(&b)?;
            Ok(Outcome::ok(json!({"n": n, "extension": b.to_string(), "word": w.to_string(), "length": w.len()})))
        }
        Command::Decode { space, n, word } => {
            let ctx = coding_ctx(&space, n)?;
            let w: Word = word.parse()?;
            let b = ctx.decode_word(&w)?;
            Ok(Outcome::ok(json!({"n": n, "word": w.to_string(), "extension": b.to_string(), "classes": b.len()})))
        }
        Command::Expand { space, n, cert } => {
            let ctx = coding_ctx(&space, n)?;
            let (w0, xs) = read_cert(&cert)?;
            let exp = ctx.expand_certificate(&w0, &xs)?;
            Ok(Outcome::ok(json!({
                "n": n,
                "w0": w0.to_string(),
                "X": xs.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "u0": exp.u0.to_string(),
                "ys": exp.ys.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "var_offsets": exp.var_offsets,
            })))
        }
        Command::BuildF { space, n, cert, depth } => {
            let ctx = coding_ctx(&space, n)?;
            let (w0, xs) = read_cert(&cert)?;
            let exp = ctx.expand_certificate(&w0, &xs)?;
            let f = ctx.build_f(&exp)?;
            let alt = validate_alternating(&f, ctx.partition(), depth);
            let cls = validate_class_constraint(&f, ctx.partition(), ctx.constraint(), depth);
            let ok = alt.is_ok() && cls.is_ok() && f.approx(n).as_ref() == Some(ctx.a());
            let exts = ctx.f_extensions(&f, xs.len())?;
            Ok(Outcome {
                report: json!({
                    "n": n,
                    "provenance": to_value(f.provenance()),
                    "reps": f.reps(depth),
                    "prefix": f.approx(depth).map(|a| a.to_string()),
                    "alternating": alt.map_or_else(|v| to_value(&v), |()| json!("ok")),
                    "class_constraint": cls.map_or_else(|v| to_value(&v), |()| json!("ok")),
                    "extends_a": f.approx(n).as_ref() == Some(ctx.a()),
                    "end_extensions": exts.iter().map(|x| x.b.to_string()).collect::<Vec<_>>(),
                }),
                code: if ok { EXIT_OK } else { EXIT_VALIDATION },
            })
        }
        Command::HjSearch { letters, tuples, colouring, words, budget, include_base, node_limit, cert_out } => {
            let set = match tuples {
                Some(t) => {
                    let (b, a) = t
                        .split_once(':')
                        .and_then(|(b, a)| Some((b.parse::<u32>().ok()?, a.parse::<usize>().ok()?)))
                        .ok_or_else(|| Error::Parse(format!("bad tuple alphabet {t:?}; expected base:arity")))?;
                    LetterSet::Tuples { base: b, arity: a }
                }
                None => LetterSet::scalars(letters),
            };
            let alphabet = Alphabet::Finite(set);
            let col: BuiltinColouring = colouring.parse()?;
            let opts = SearchOptions { include_base, node_limit, ..SearchOptions::default() };
            let outcome = lv_hj_bounded_search(&alphabet, &col, words, budget, &opts)?;
            let mut report = json!({
                "alphabet": to_value(&alphabet),
                "colouring": col.to_string(),
                "words": words,
                "budget": budget,
                "include_base": include_base,
            });
            let code = match &outcome {
                SearchOutcome::Found { certificate, stats } => {
                    let v = verify_monochromatic(
                        &certificate.w0,
                        &certificate.xs,
                        &alphabet,
                        &col,
                        SemigroupMode::Plain,
                        budget,
                        include_base,
                    )?;
                    report["outcome"] = json!("found");
                    report["w0"] = json!(certificate.w0.to_string());
                    report["X"] = json!(certificate.xs.iter().map(ToString::to_string).collect::<Vec<_>>());
                    report["colour"] = json!(certificate.colour);
                    report["verification"] = to_value(&v);
                    report["search"] = to_value(stats);
                    if let Some(path) = cert_out {
                        let file = CertificateFile {
                            w0: certificate.w0.clone(),
                            xs: certificate.xs.clone(),
                            alphabet: alphabet.clone(),
                            mode: SemigroupMode::Plain,
                        };
                        let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Invariant(e.to_string()))?;
                        std::fs::write(&path, text)
                            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
                    }
                    if v.is_ok() {
                        EXIT_OK
                    } else {
                        EXIT_VALIDATION
                    }
                }
                SearchOutcome::Exhausted { stats } => {
                    report["outcome"] = json!("exhausted");
                    report["search"] = to_value(stats);
                    EXIT_EXHAUSTED
                }
            };
            Ok(Outcome { report, code })
        }
        Command::Pigeonhole { space, n, predicate, words, budget, node_limit } => {
            let ctx = coding_ctx(&space, n)?;
            let pred: ExtensionPredicate = predicate.parse()?;
            let r = pigeonhole_probe(&ctx, &pred, &PigeonholeParams { words, budget, node_limit })?;
            let code = match r.verdict {
                ProbeVerdict::Certified => EXIT_OK,
                ProbeVerdict::Exhausted => EXIT_EXHAUSTED,
                ProbeVerdict::CheckFailed => EXIT_VALIDATION,
            };
            Ok(Outcome { report: to_value(&r), code })
        }
        Command::Miniature { m, k, r, t, seed, samples } => {
            let rep = miniature_dual_ramsey(m, k, r, t.unwrap_or(k + 1), seed, samples)?;
            Ok(Outcome::ok(to_value(&rep)))
        }
        Command::Axioms { space, axiom, depth, corpus, seed } => {
            let p = parse_partition(&space.partition)?;
            let c = parse_constraint(&space)?;
            let ax: Axiom = axiom.parse()?;
            let rep = axiom_probe(&p, &c, ax, depth, corpus, seed)?;
            let code = if rep.counterexamples.is_empty() { EXIT_OK } else { EXIT_VALIDATION };
            Ok(Outcome { report: to_value(&rep), code })
        }
        Command::Transfer { space, ordinal, depth } => {
            let p = parse_partition(&space.partition)?;
            let target = parse_target(&ordinal, &p)?;
            let c = target.constraint();
            let e = parse_relation(&space.relation, &p, &c)?;
            let r = transfer(&e, &p, &target, depth)?;
            let view = ordinal_view(&r, depth)?;
            let code = if view["membership"] == json!("ok") { EXIT_OK } else { EXIT_VALIDATION };
            Ok(Outcome { report: view, code })
        }
        Command::Project { space, ordinal, k, depth } => {
            let p = parse_partition(&space.partition)?;
            let target = parse_target(&ordinal, &p)?;
            let c = target.constraint();
            let e = parse_relation(&space.relation, &p, &c)?;
            let r = transfer(&e, &p, &target, depth)?;
            let projected = project_k(&r, k)?;
            let mut view = ordinal_view(&projected, k.min(depth))?;
            view["k"] = json!(k);
            view["classes"] = json!(projected.backing().class_count());
            Ok(Outcome::ok(view))
        }
        Command::ValidateOrdinal { space, ordinal, depth } => {
            let p = parse_partition(&space.partition)?;
            let target = parse_target(&ordinal, &p)?;
            let c = target.constraint();
            let e = parse_relation(&space.relation, &p, &c)?;
            let r = OrdinalEqRel::from_backing(e, p, target)?;
            let view = ordinal_view(&r, depth)?;
            let code = if view["membership"] == json!("ok") { EXIT_OK } else { EXIT_VALIDATION };
            Ok(Outcome { report: view, code })
        }
        Command::DivideOmega { alpha } => {
            let a: Cnf = alpha.parse()?;
            let b = a.divide_by_omega()?;
            Ok(Outcome::ok(json!({"alpha": a.to_string(), "beta": b.to_string()})))
        }
    }
}
