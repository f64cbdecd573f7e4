//! Experiment drivers: the pigeonhole probe, miniature dual Ramsey runs and
//! bounded axiom probes. Every report is a plain serialisable value that
//! depends only on its inputs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::alternation::{
    canonical_finest, random_alternating, validate_alternating, validate_class_constraint, amalgamate,
    is_valid_approximation, ConstraintSeq, Partition,
};
use crate::coding::{CodingContext, Expansion};
use crate::eqrel::{
    coarsen, coarsenings, is_coarsening, leq_fin, set_partitions, Depth, EqRelStream, FiniteEqRel, JoinSpec,
};
use crate::error::{Error, Result};
use crate::rng::{self, hash_words};
use rand::{Rng as _, RngCore};
use crate::words::{
    lv_hj_bounded_search, verify_monochromatic, SearchOptions, SearchOutcome, SearchStats, SemigroupMode,
    Verification, Word,
};

/// A colouring of finite approximations that only looks at the first `depth`
/// elements of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClopenColouring {
    pub depth: usize,
    pub colours: u32,
    pub seed: u64,
}

impl ClopenColouring {
    pub fn new(depth: usize, colours: u32, seed: u64) -> Result<Self> {
        if colours == 0 {
            return Err(Error::InvalidInput("a colouring needs at least one colour".into()));
        }
        Ok(ClopenColouring { depth, colours, seed })
    }

    pub fn colour(&self, b: &FiniteEqRel) -> u32 {
        let cut = self.depth.min(b.domain_size());
        let head = b.assign()[..cut].iter().map(|&r| r as u64);
        let h = hash_words(self.seed, std::iter::once(cut as u64).chain(head));
        (h % u64::from(self.colours)) as u32
    }
}

/// A partition of the depth-`(n+1)` approximations into colour classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionPredicate {
    /// Everything has colour 0.
    All,
    /// Colour 0 when `p_{n+1}(E)` (if joined at all) is joined to `p_0`.
    FirstJoinZero,
    /// Parity of the number of letters coding the extension.
    LengthParity,
    Clopen(ClopenColouring),
}

impl ExtensionPredicate {
    pub fn colour(&self, ctx: &CodingContext, b: &FiniteEqRel) -> u32 {
        match self {
            ExtensionPredicate::All => 0,
            ExtensionPredicate::FirstJoinZero => {
                let Some(p) = ctx.e().rep(ctx.n() + 1) else { return 1 };
                u32::from(p < b.domain_size() && b.rep_of(p) != 0)
            }
            ExtensionPredicate::LengthParity => {
                let m = ctx.e().rep_index(b.domain_size()).unwrap_or(0);
                let joined = m.saturating_sub(ctx.n() + 1);
                ((joined / ctx.block_width()) % 2) as u32
            }
            ExtensionPredicate::Clopen(c) => c.colour(b),
        }
    }
}

impl FromStr for ExtensionPredicate {
    type Err = Error;

    /// `all`, `first-join-zero`, `len-parity` or `clopen:<depth>:<colours>:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.parse::<u64>().map_err(|_| Error::Parse(format!("bad number in predicate {s:?}")));
        match parts.as_slice() {
            ["all"] => Ok(ExtensionPredicate::All),
            ["first-join-zero"] => Ok(ExtensionPredicate::FirstJoinZero),
            ["len-parity"] => Ok(ExtensionPredicate::LengthParity),
            ["clopen", d, r, seed] => Ok(ExtensionPredicate::Clopen(ClopenColouring::new(
                num(d)? as usize,
                u32::try_from(num(r)?).map_err(|_| Error::Parse("too many colours".into()))?,
                num(seed)?,
            )?)),
            _ => Err(Error::Parse(format!(
                "unknown predicate {s:?}; expected all, first-join-zero, len-parity or clopen:d:r:seed"
            ))),
        }
    }
}

impl fmt::Display for ExtensionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionPredicate::All => f.write_str("all"),
            ExtensionPredicate::FirstJoinZero => f.write_str("first-join-zero"),
            ExtensionPredicate::LengthParity => f.write_str("len-parity"),
            ExtensionPredicate::Clopen(c) => write!(f, "clopen:{}:{}:{}", c.depth, c.colours, c.seed),
        }
    }
}

/// Parameters of one pigeonhole probe.
#[derive(Clone, Debug, Serialize)]
pub struct PigeonholeParams {
    /// Number of variable words in the certificate.
    pub words: usize,
    /// Bound on `|w0| + Σ|x_i|`.
    pub budget: usize,
    pub node_limit: u64,
}

impl Default for PigeonholeParams {
    fn default() -> Self {
        PigeonholeParams { words: 2, budget: 10, node_limit: 5_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    /// A certificate was found and every check passed.
    Certified,
    /// No certificate within the budget.
    Exhausted,
    /// A certificate was found but a check failed.
    CheckFailed,
}

#[derive(Clone, Debug, Serialize)]
pub struct PigeonholeReport {
    pub n: usize,
    pub partition: String,
    pub constraint: String,
    pub predicate: String,
    pub params: PigeonholeParams,
    pub verdict: ProbeVerdict,
    pub colour: Option<u32>,
    pub w0: Option<Word>,
    #[serde(rename = "X")]
    pub xs: Option<Vec<Word>>,
    pub expansion: Option<Expansion>,
    pub search: SearchStats,
    pub translate_checked: u64,
    pub extensions_checked: usize,
    pub failures: Vec<String>,
}

/// Searches for `(w0, X)` whose translate is monochromatic for the induced
/// word colouring, builds `F`, and checks the conclusion on every end-extension
/// of `a` in `F` that the certificate reaches.
pub fn pigeonhole_probe(
    ctx: &CodingContext,
    predicate: &ExtensionPredicate,
    params: &PigeonholeParams,
) -> Result<PigeonholeReport> {
    let k = params.words;
    let mode = if ctx.is_finite() { SemigroupMode::Plain } else { SemigroupMode::Graded };
    let alphabet = ctx.alphabet(k)?;
    let word_colour = |w: &Word| ctx.decode_word(w).map_or(u32::MAX, |b| predicate.colour(ctx, &b));
    let opts = SearchOptions {
        mode,
        include_base: true,
        max_vars_per_word: (!ctx.is_finite()).then_some(1),
        node_limit: params.node_limit,
        ..SearchOptions::default()
    };
    let mut report = PigeonholeReport {
        n: ctx.n(),
        partition: ctx.partition().to_string(),
        constraint: ctx.constraint().to_string(),
        predicate: predicate.to_string(),
        params: params.clone(),
        verdict: ProbeVerdict::Exhausted,
        colour: None,
        w0: None,
        xs: None,
        expansion: None,
        search: SearchStats::default(),
        translate_checked: 0,
        extensions_checked: 0,
        failures: Vec::new(),
    };
    let cert = match lv_hj_bounded_search(&alphabet, &word_colour, k, params.budget, &opts)? {
        SearchOutcome::Exhausted { stats } => {
            report.search = stats;
            return Ok(report);
        }
        SearchOutcome::Found { certificate, stats } => {
            report.search = stats;
            certificate
        }
    };
    report.colour = Some(cert.colour);
    report.w0 = Some(cert.w0.clone());
    report.xs = Some(cert.xs.clone());
    let mut failures = Vec::new();

    match verify_monochromatic(&cert.w0, &cert.xs, &alphabet, &word_colour, mode, params.budget, true)? {
        Verification::Ok { checked, .. } => report.translate_checked = checked,
        Verification::Counterexample { word, colour, expected } => {
            failures.push(format!("verifier: {word} has colour {colour}, expected {expected}"));
        }
    }

    let exp = ctx.expand_certificate(&cert.w0, &cert.xs)?;
    let f = ctx.build_f(&exp)?;
    let probe = ctx.n() + k + 16;
    if let Err(v) = validate_alternating(&f, ctx.partition(), probe) {
        failures.push(format!("F is not alternating: {v}"));
    }
    if let Err(v) = validate_class_constraint(&f, ctx.partition(), ctx.constraint(), probe) {
        failures.push(format!("F violates the class constraint: {v}"));
    }
    if f.approx(ctx.n()).as_ref() != Some(ctx.a()) {
        failures.push("r_n(F) differs from a".into());
    }
    if let crate::eqrel::CoarseningCheck::FailsAt { level } = is_coarsening(&f, ctx.e(), probe) {
        failures.push(format!("F is not coarser than E at level {level}"));
    }
    let exts = ctx.f_extensions(&f, k)?;
    report.extensions_checked = exts.len();
    for x in &exts {
        let c = predicate.colour(ctx, &x.b);
        if c != cert.colour {
            failures.push(format!("extension {} has colour {c}, expected {}", x.b, cert.colour));
        }
        match ctx.translate_word(&cert.w0, &cert.xs, &exp, &x.choice) {
            Ok(w) => match ctx.decode_word(&w) {
                Ok(b) if b == x.b => {}
                Ok(b) => failures.push(format!("{w} decodes to {b}, not to the extension {}", x.b)),
                Err(e) => failures.push(format!("{w} does not decode: {e}")),
            },
            Err(e) => failures.push(format!("choice {:?}: {e}", x.choice)),
        }
    }
    report.expansion = Some(exp);
    report.verdict = if failures.is_empty() { ProbeVerdict::Certified } else { ProbeVerdict::CheckFailed };
    report.failures = failures;
    Ok(report)
}

/// Above this many colourings the miniature samples instead of enumerating.
pub const COLOURING_THRESHOLD: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MiniatureVerdict {
    /// Colour of each `k`-class relation, in restricted-growth order.
    pub colouring: Vec<u32>,
    /// First relation with `t` classes whose `k`-class coarsenings share a colour.
    pub witness: Option<FiniteEqRel>,
    pub colour: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MiniatureReport {
    pub m: usize,
    pub k: usize,
    pub r: u32,
    pub t: usize,
    pub relations: usize,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    pub colourings: usize,
    pub successes: usize,
    pub failures: usize,
    pub verdicts: Vec<MiniatureVerdict>,
}

fn relations_with_classes(m: usize, k: usize) -> Vec<FiniteEqRel> {
    set_partitions(m)
        .into_iter()
        .map(|labels| FiniteEqRel::canonical_form(&labels))
        .filter(|a| a.len() == k)
        .collect()
}

/// For each `r`-colouring of the `k`-class relations on `{0, .., m-1}`,
/// looks for a `t`-class relation all of whose `k`-class coarsenings share a
/// colour. Enumerates every colouring when there are at most
/// [`COLOURING_THRESHOLD`] of them, otherwise draws `samples` with `seed`.
pub fn miniature_dual_ramsey(m: usize, k: usize, r: u32, t: usize, seed: u64, samples: usize) -> Result<MiniatureReport> {
    if m > 10 || k == 0 || k > m || t < k || t > m || r == 0 {
        return Err(Error::InvalidInput(format!("miniature needs 1 <= k <= t <= m <= 10 and r >= 1, got m={m} k={k} t={t} r={r}")));
    }
    let ks = relations_with_classes(m, k);
    let index: std::collections::HashMap<&FiniteEqRel, usize> = ks.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let fans: Vec<(FiniteEqRel, Vec<usize>)> = relations_with_classes(m, t)
        .into_iter()
        .map(|x| {
            let below: Vec<usize> = coarsenings(&x).iter().filter(|c| c.len() == k).map(|c| index[c]).collect();
            (x, below)
        })
        .collect();
    let total = u64::from(r).checked_pow(ks.len() as u32).filter(|&n| n <= COLOURING_THRESHOLD);
    let colourings: Vec<Vec<u32>> = match total {
        Some(n) => (0..n)
            .map(|mut code| {
                let mut c = vec![0u32; ks.len()];
                for slot in c.iter_mut().rev() {
                    *slot = (code % u64::from(r)) as u32;
                    code /= u64::from(r);
                }
                c
            })
            .collect(),
        None => {
            let mut g = rng::seeded(seed);
            (0..samples).map(|_| (0..ks.len()).map(|_| g.gen_range(0..r)).collect()).collect()
        }
    };
    let verdicts: Vec<MiniatureVerdict> = colourings
        .into_par_iter()
        .map(|colouring| {
            let hit = fans.iter().find_map(|(x, below)| {
                let c0 = colouring[*below.first()?];
                below.iter().all(|&i| colouring[i] == c0).then(|| (x.clone(), c0))
            });
            let (witness, colour) = hit.map_or((None, None), |(x, c)| (Some(x), Some(c)));
            MiniatureVerdict { colouring, witness, colour }
        })
        .collect();
    let successes = verdicts.iter().filter(|v| v.witness.is_some()).count();
    Ok(MiniatureReport {
        m,
        k,
        r,
        t,
        relations: ks.len(),
        exhaustive: total.is_some(),
        seed: total.is_none().then_some(seed),
        colourings: verdicts.len(),
        successes,
        failures: verdicts.len() - successes,
        verdicts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axiom {
    A1,
    A2,
    A3,
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" | "A.1" => Ok(Axiom::A1),
            "A2" | "A.2" => Ok(Axiom::A2),
            "A3" | "A.3" => Ok(Axiom::A3),
            _ => Err(Error::Parse(format!("unknown axiom {s:?}; expected A1, A2 or A3"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub partition: String,
    pub constraint: String,
    pub depth: usize,
    pub corpus: usize,
    pub checked: usize,
    /// `(|b|, number of a with a ≤_fin b, Bell(|b|))`, for the fan check.
    pub fan_sizes: Vec<(usize, usize, u64)>,
    pub counterexamples: Vec<String>,
}

/// Bell numbers by the triangle recurrence.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap_or(&1)];
        for &x in &row {
            let last = *next.last().unwrap_or(&0);
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// The canonical member plus `corpus - 1` seeded random members of the space.
fn corpus(p: &Partition, c: &ConstraintSeq, size: usize, seed: u64) -> Result<Vec<EqRelStream>> {
    let mut out = vec![canonical_finest(p, c)?];
    for i in 1..size {
        out.push(random_alternating(p, c, hash_words(seed, [i as u64]), 0.5)?);
    }
    Ok(out)
}

/// A member of `[r_d(B), B]`: random legal joins among the classes of `B`
/// after `p_d(B)`, realigned to the pattern.
fn random_member_below(b: &EqRelStream, p: &Partition, c: &ConstraintSeq, d: usize, seed: u64) -> Result<EqRelStream> {
    let horizon = d + 24;
    let reps = b.reps(horizon);
    let mut g = rng::seeded(seed);
    let mut joins = Vec::new();
    for k in d + 1..reps.len() {
        if g.next_u32().is_multiple_of(2) {
            continue;
        }
        let to = g.gen_range(0..k);
        if c.permits(p.block_of(reps[to]), p.block_of(reps[k])) {
            joins.push((k, to));
        }
    }
    let joined = coarsen(b, &JoinSpec::finite(joins)?);
    let head = b.approx(d).ok_or_else(|| Error::Invariant(format!("no p_{d} in corpus member")))?;
    amalgamate(&head, &joined, p)
}

/// Bounded attempts to falsify one axiom on a seeded corpus of the space.
pub fn axiom_probe(
    p: &Partition,
    c: &ConstraintSeq,
    axiom: Axiom,
    depth: usize,
    corpus_size: usize,
    seed: u64,
) -> Result<AxiomReport> {
    let corpus = corpus(p, c, corpus_size.max(1), seed)?;
    let mut report = AxiomReport {
        axiom,
        partition: p.to_string(),
        constraint: c.to_string(),
        depth,
        corpus: corpus.len(),
        checked: 0,
        fan_sizes: Vec::new(),
        counterexamples: Vec::new(),
    };
    let approx = |e: &EqRelStream, n: usize| e.approx(n).ok_or_else(|| Error::Invariant(format!("no p_{n}")));
    match axiom {
        Axiom::A1 => {
            for (i, a) in corpus.iter().enumerate() {
                if !approx(a, 0)?.is_empty() {
                    report.counterexamples.push(format!("r_0 of member {i} is not empty"));
                }
                for (j, b) in corpus.iter().enumerate() {
                    for n in 0..=depth {
                        for m in 0..=depth {
                            report.checked += 1;
                            let (ra, rb) = (approx(a, n)?, approx(b, m)?);
                            if ra != rb {
                                continue;
                            }
                            if n != m {
                                report.counterexamples.push(format!("r_{n}(#{i}) = r_{m}(#{j}) with {n} != {m}"));
                            } else if (0..n).any(|k| a.approx(k) != b.approx(k)) {
                                report.counterexamples.push(format!("r_{n}(#{i}) = r_{n}(#{j}) but lower levels differ"));
                            }
                        }
                    }
                }
            }
        }
        Axiom::A2 => {
            for size in 0..=depth.min(7) {
                let b = FiniteEqRel::identity(size);
                let fan = coarsenings(&b);
                report.checked += fan.len();
                let want = bell(size);
                if fan.len() as u64 != want {
                    report.counterexamples.push(format!("|{{a : a <=_fin id({size})}}| = {}, expected {want}", fan.len()));
                }
                if fan.iter().any(|a| !leq_fin(a, &b) || a.len() > b.len()) {
                    report.counterexamples.push(format!("fan of id({size}) contains a non-coarsening"));
                }
                report.fan_sizes.push((size, fan.len(), want));
            }
            for (i, e) in corpus.iter().enumerate() {
                for d in 0..=depth {
                    let f = random_member_below(e, p, c, d, hash_words(seed, [i as u64, d as u64]))?;
                    for n in 0..=depth {
                        report.checked += 1;
                        let rn = approx(&f, n)?;
                        if !matches!(crate::eqrel::depth(&rn, e), Depth::Finite(_)) {
                            report.counterexamples.push(format!("r_{n}(F) has infinite depth in member {i}"));
                        }
                    }
                }
            }
        }
        Axiom::A3 => {
            for (i, b) in corpus.iter().enumerate() {
                for d in 1..=depth {
                    let rd = approx(b, d)?;
                    let a_candidates: Vec<FiniteEqRel> =
                        coarsenings(&rd).into_iter().filter(|a| is_valid_approximation(a, p, c)).collect();
                    for (j, a) in a_candidates.iter().enumerate().take(8) {
                        let big_a = random_member_below(b, p, c, d, hash_words(seed, [i as u64, d as u64, j as u64]))?;
                        report.checked += 1;
                        match witness_in_bracket(a, &big_a, p, c, depth + 4) {
                            Ok(()) => {}
                            Err(why) => report.counterexamples.push(format!("member {i}, d={d}, a={a}: {why}")),
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Builds a member of `[a, A]` and checks it.
fn witness_in_bracket(
    a: &FiniteEqRel,
    big_a: &EqRelStream,
    p: &Partition,
    c: &ConstraintSeq,
    probe: usize,
) -> std::result::Result<(), String> {
    let w = amalgamate(a, big_a, p).map_err(|e| e.to_string())?;
    if w.approx(a.len()).as_ref() != Some(a) {
        return Err("witness does not extend a".into());
    }
    if !is_coarsening(&w, big_a, probe).holds() {
        return Err("witness is not coarser than A".into());
    }
    validate_alternating(&w, p, probe).map_err(|v| v.to_string())?;
    validate_class_constraint(&w, p, c, probe).map_err(|v| v.to_string())?;
    Ok(())
}
