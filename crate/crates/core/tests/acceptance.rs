//! One pass/fail line per acceptance criterion. Oracles here are written
//! independently of the library wherever the library's own routine is the
//! thing under test.

use std::collections::{BTreeSet, HashMap};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use eqrel_ramsey::alternation::{
    random_alternating, random_coarsening, sigma, validate_alternating, ConstraintSeq, Partition,
};
use eqrel_ramsey::cli;
use eqrel_ramsey::coding::CodingContext;
use eqrel_ramsey::eqrel::{is_coarsening, EqRelStream, FiniteEqRel};
use eqrel_ramsey::harness::{
    miniature_dual_ramsey, pigeonhole_probe, ClopenColouring, ExtensionPredicate, PigeonholeParams, ProbeVerdict,
};
use eqrel_ramsey::ordinal::{eqrel_to_rigid, phi, rigid_to_eqrel, transfer, Bijection, Cnf, Rigid, Target};
use eqrel_ramsey::ordinal::{coarser_on_window, transfer_inverse};
use eqrel_ramsey::words::{hj_line_search, Letter, Symbol, Word};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Restricted growth strings of length `m`: every set partition of `0..m`, once.
fn partitions(m: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, m: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            cur.push(c);
            go(cur, m, if c > max { c } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
    } else {
        go(&mut vec![0], m, 0, &mut out);
    }
    out
}

/// Converts a restricted growth string into least-element labels.
fn min_labels(rgs: &[usize]) -> Vec<usize> {
    let mut first: HashMap<usize, usize> = HashMap::new();
    rgs.iter().enumerate().map(|(i, &c)| *first.entry(c).or_insert(i)).collect()
}

fn all_tuples(base: u32, arity: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |d| {
                    let mut t = t.clone();
                    t.push(d);
                    t
                })
            })
            .collect();
    }
    out
}

fn criterion_1() -> Outcome {
    let mut total = 0usize;
    for n in 0..=2usize {
        for l in 1..=3usize {
            for lambda in 0..=2usize {
                let p = Partition::residue(l).map_err(|e| e.to_string())?;
                let ctx = CodingContext::new(EqRelStream::identity(), p, ConstraintSeq::All, n)
                    .map_err(|e| format!("context n={n} l={l}: {e}"))?;
                let dom = n + 1 + l * lambda;
                // With E the identity, an end-extension of r_n(E) on `dom`
                // points is a partition whose only classes are those of 0..=n.
                let oracle: Vec<FiniteEqRel> = partitions(dom)
                    .into_iter()
                    .filter(|rgs| rgs[..=n].iter().enumerate().all(|(i, &c)| c == i) && rgs.iter().all(|&c| c <= n))
                    .map(|rgs| FiniteEqRel::from_assign(min_labels(&rgs)).unwrap())
                    .collect();
                let expected = (n + 1).pow((l * lambda) as u32);
                ensure!(oracle.len() == expected, "n={n} l={l} λ={lambda}: oracle counts {} not {expected}", oracle.len());

                let mut words = BTreeSet::new();
                for b in &oracle {
                    let w = ctx.encode_extension(b).map_err(|e| format!("encode {b}: {e}"))?;
                    ensure!(w.len() == lambda, "encode {b} gave length {}", w.len());
                    let back = ctx.decode_word(&w).map_err(|e| format!("decode {w}: {e}"))?;
                    ensure!(back == *b, "decode(encode({b})) = {back}");
                    words.insert(w.to_string());
                }
                ensure!(words.len() == expected, "encode is not injective at n={n} l={l} λ={lambda}");

                let letters: Vec<Letter> = all_tuples(n as u32 + 1, l).into_iter().map(Letter).collect();
                let mut decoded = 0usize;
                for seq in all_tuples(letters.len() as u32, lambda) {
                    let w = Word::from_letters(seq.iter().map(|&i| letters[i as usize].clone()));
                    let b = ctx.decode_word(&w).map_err(|e| format!("decode {w}: {e}"))?;
                    let again = ctx.encode_extension(&b).map_err(|e| format!("encode {b}: {e}"))?;
                    ensure!(again == w, "encode(decode({w})) = {again}");
                    ensure!(oracle.contains(&b), "{w} decodes outside the oracle set");
                    decoded += 1;
                }
                ensure!(decoded == expected, "word count {decoded} differs from {expected}");
                total += expected;
            }
        }
    }
    Ok(format!("27 cases, {total} extensions, both directions"))
}

fn valuation(k: usize) -> usize {
    let (mut x, mut v) = (k + 1, 0);
    while x % 2 == 0 {
        x /= 2;
        v += 1;
    }
    v
}

fn criterion_2() -> Outcome {
    const N: usize = 1 << 15;
    let table: Vec<usize> = (0..N).map(sigma).collect();
    for (k, &s) in table.iter().enumerate() {
        ensure!(s == valuation(k), "σ({k}) = {s}, oracle {}", valuation(k));
    }
    for q in 0..=10usize {
        let period = 1usize << (q + 1);
        let members: Vec<usize> = (0..N).filter(|&x| table[x] == q).collect();
        ensure!(!members.is_empty(), "block {q} is empty below {N}");
        for w in members.windows(2) {
            ensure!((w[1] - w[0]) % period == 0, "block {q}: {} and {} differ by a non-multiple of {period}", w[0], w[1]);
        }
        let mut last_hit: Option<usize> = None;
        for (x, &t) in table.iter().enumerate().take(N) {
            if t == q {
                last_hit = Some(x);
            }
            if x + 1 >= period {
                let start = x + 1 - period;
                ensure!(last_hit.is_some_and(|h| h >= start), "[{start}, {}] misses block {q}", x);
            }
        }
    }
    Ok(format!("q <= 10 over [0, {N})"))
}

fn criterion_3() -> Outcome {
    let ctx = CodingContext::new(EqRelStream::identity(), Partition::Dyadic, ConstraintSeq::All, 0)
        .map_err(|e| e.to_string())?;
    let got = ctx.t_seq(8).map_err(|e| e.to_string())?;
    let mut t: u64 = 1;
    let mut oracle = Vec::new();
    for i in 0..8usize {
        t *= 1u64 << (valuation(1 + i) + 1);
        oracle.push(t as usize);
    }
    ensure!(got == oracle, "t_seq {got:?}, recurrence {oracle:?}");
    ensure!(got[..4] == [4, 8, 64, 128], "prefix {:?}", &got[..4]);
    Ok(format!("{got:?}"))
}

fn criterion_4() -> Outcome {
    let words: Vec<[u32; 2]> = vec![[0, 0], [0, 1], [1, 0], [1, 1]];
    let lines: Vec<(usize, usize)> = {
        // Variable words of length 2 with at least one variable, as pairs of
        // indices into `words` for the substitutions 0 and 1.
        let idx = |w: [u32; 2]| words.iter().position(|x| *x == w).unwrap();
        let mut out = Vec::new();
        for a in [None, Some(0), Some(1)] {
            for b in [None, Some(0), Some(1)] {
                if a.is_some() && b.is_some() {
                    continue;
                }
                let sub = |c: u32| [a.unwrap_or(c), b.unwrap_or(c)];
                out.push((idx(sub(0)), idx(sub(1))));
            }
        }
        out
    };
    ensure!(lines.len() == 5, "expected 5 lines in {{0,1}}^2, found {}", lines.len());
    let letters = [Letter::scalar(0), Letter::scalar(1)];
    for mask in 0u32..16 {
        let colour = |i: usize| (mask >> i) & 1;
        let brute = lines.iter().any(|&(x, y)| colour(x) == colour(y));
        ensure!(brute, "colouring {mask:04b} has no monochromatic line");
        let lib_colour = |w: &Word| {
            let s: Vec<u32> = w.letters().unwrap().iter().map(|l| l.coords()[0]).collect();
            colour(words.iter().position(|x| x[..] == s[..]).unwrap())
        };
        let found = hj_line_search(&letters, 2, &lib_colour);
        ensure!(found.is_some(), "library search missed a line for colouring {mask:04b}");
    }
    let split = |w: &Word| w.letters().unwrap().first().map_or(0, |l| l.coords()[0]);
    ensure!(
        Letter::scalar(0).coords()[0] != Letter::scalar(1).coords()[0],
        "letters collapse"
    );
    // {0,1}^1 has the single line {0, 1}; colouring each word by its letter splits it.
    ensure!(split(&Word::from_scalars(&[0])) != split(&Word::from_scalars(&[1])), "split colouring is constant");
    ensure!(hj_line_search(&letters, 1, &split).is_none(), "library found a line in {{0,1}}^1 under the split colouring");
    Ok("16/16 colourings of {0,1}^2 have a line; {0,1}^1 split colouring has none".into())
}

/// Every element of `w0⌢[X]_L` of length at most `budget`, for plain mode
/// over a finite alphabet.
fn translate_oracle(w0: &Word, xs: &[Word], letters: &[Letter], budget: usize) -> Vec<Word> {
    fn go(cur: &Word, from: usize, xs: &[Word], letters: &[Letter], budget: usize, out: &mut Vec<Word>) {
        for i in from..xs.len() {
            if cur.len() + xs[i].len() > budget {
                continue;
            }
            for l in letters {
                let mut next = cur.clone();
                for s in xs[i].symbols() {
                    next.0.push(match s {
                        Symbol::Var => Symbol::Letter(l.clone()),
                        other => other.clone(),
                    });
                }
                out.push(next.clone());
                go(&next, i + 1, xs, letters, budget, out);
            }
        }
    }
    let mut out = vec![w0.clone()];
    if w0.len() <= budget {
        go(w0, 0, xs, letters, budget, &mut out);
    } else {
        out.clear();
    }
    out
}

fn criterion_5() -> Outcome {
    let p = Partition::residue(2).unwrap();
    let mut certified = 0;
    let mut exhausted = 0;
    for i in 0..100u64 {
        let n = (i % 3) as usize;
        let depth = 1 + (i % 8) as usize;
        let e = random_alternating(&p, &ConstraintSeq::All, 1000 + i, 0.6).map_err(|e| e.to_string())?;
        let ctx = CodingContext::new(e, p.clone(), ConstraintSeq::All, n).map_err(|e| e.to_string())?;
        let pred = ExtensionPredicate::Clopen(ClopenColouring::new(depth, 2, i).map_err(|e| e.to_string())?);
        let params = PigeonholeParams::default();
        ensure!(params.budget <= 10, "budget {} above 10", params.budget);
        let r = pigeonhole_probe(&ctx, &pred, &params).map_err(|e| format!("probe {i}: {e}"))?;
        match r.verdict {
            ProbeVerdict::Exhausted => {
                exhausted += 1;
                continue;
            }
            ProbeVerdict::CheckFailed => return Err(format!("probe {i} failed its checks: {:?}", r.failures)),
            ProbeVerdict::Certified => {}
        }
        let (w0, xs, colour) = (r.w0.unwrap(), r.xs.unwrap(), r.colour.unwrap());

        let letters: Vec<Letter> = all_tuples(n as u32 + 1, 2).into_iter().map(Letter).collect();
        let translate = translate_oracle(&w0, &xs, &letters, params.budget);
        ensure!(
            translate.len() as u64 == r.translate_checked,
            "probe {i}: oracle translate has {} words, verifier checked {}",
            translate.len(),
            r.translate_checked
        );
        for w in &translate {
            let b = ctx.decode_word(w).map_err(|e| format!("probe {i}: {w}: {e}"))?;
            ensure!(pred.colour(&ctx, &b) == colour, "probe {i}: {w} breaks colour {colour}");
        }

        let exp = ctx.expand_certificate(&w0, &xs).map_err(|e| e.to_string())?;
        let f = ctx.build_f(&exp).map_err(|e| e.to_string())?;
        validate_alternating(&f, &p, n + 20).map_err(|v| format!("probe {i}: F not alternating: {v}"))?;
        let members: BTreeSet<String> = translate.iter().map(Word::to_string).collect();
        for x in ctx.f_extensions(&f, params.words).map_err(|e| e.to_string())? {
            let w = ctx.translate_word(&w0, &xs, &exp, &x.choice).map_err(|e| e.to_string())?;
            ensure!(members.contains(&w.to_string()), "probe {i}: {w} lies outside the translate");
            let b = ctx.decode_word(&w).map_err(|e| e.to_string())?;
            ensure!(b == x.b, "probe {i}: {w} decodes to {b}, not {}", x.b);
        }
        certified += 1;
    }
    ensure!(certified >= 90, "{certified}/100 certified, floor 90");
    Ok(format!("{certified}/100 certified, {exhausted} exhausted"))
}

fn spaces() -> Vec<(String, Partition, Target)> {
    let w2: Cnf = "w^2".parse().unwrap();
    let id = Bijection::from_spec("id", "w".parse().unwrap()).unwrap();
    vec![
        ("w*2".into(), Partition::residue(2).unwrap(), Target::OmegaTimes(2)),
        ("w*3".into(), Partition::residue(3).unwrap(), Target::OmegaTimes(3)),
        ("w^2 (f = id)".into(), Partition::Dyadic, Target::alpha_with(w2, id).unwrap()),
    ]
}

/// `F ≤ E` on `0..m`, from the representative functions alone.
fn coarser_below(f: &EqRelStream, e: &EqRelStream, m: usize) -> bool {
    (0..m).all(|x| f.rep_of(e.rep_of(x)) == f.rep_of(x))
}

fn criterion_6() -> Outcome {
    const PER_SPACE: u64 = 500;
    let mut non_coarser = 0;
    for (name, p, target) in spaces() {
        let c = target.constraint();
        for i in 0..PER_SPACE {
            let keep = 0.3 + 0.1 * (i % 7) as f64;
            let e = random_alternating(&p, &c, i, keep).map_err(|e| e.to_string())?;
            let img = transfer(&e, &p, &target, 12).map_err(|err| format!("{name} #{i}: {err}"))?;
            let window = img.default_window(12).map_err(|e| e.to_string())?;
            let minima = img.window_minima(window).map_err(|e| e.to_string())?;
            for (k, &x) in e.reps(12).iter().enumerate() {
                let want = phi(x, &p, &target);
                ensure!(minima.true_minima.get(k) == Some(&want), "{name} #{i}: p_{k} of the image is not φ(p_{k})");
                ensure!(minima.preceq_minima.get(k) == Some(&want), "{name} #{i}: ≼-minimum {k} differs");
            }
            let back = transfer_inverse(&img, 12).map_err(|err| format!("{name} #{i}: {err}"))?;
            ensure!(back.reps(12) == e.reps(12), "{name} #{i}: pullback changed the relation");

            let f = random_coarsening(&e, &p, &c, 7919 + i, keep).map_err(|e| e.to_string())?;
            let g = random_alternating(&p, &c, 104_729 + i, keep).map_err(|e| e.to_string())?;
            for (label, other) in [("coarsening", &f), ("independent", &g)] {
                let m = e.reps(11).last().max(other.reps(11).last()).copied().unwrap_or(0) + 1;
                let fi = transfer(other, &p, &target, 10).map_err(|err| format!("{name} #{i} {label}: {err}"))?;
                let omega_side = coarser_below(other, &e, m);
                let ordinal_side = coarser_on_window(&fi, &img, m).map_err(|e| e.to_string())?;
                ensure!(omega_side == ordinal_side, "{name} #{i} {label}: ω says {omega_side}, α says {ordinal_side}");
                let lib = is_coarsening(other, &e, 10).holds();
                ensure!(lib == omega_side, "{name} #{i} {label}: library says {lib}, oracle {omega_side}");
                if label == "coarsening" {
                    ensure!(omega_side, "{name} #{i}: generated coarsening is not coarser");
                } else if !omega_side {
                    non_coarser += 1;
                }
            }
        }
    }
    ensure!(non_coarser > 0, "no non-coarsening pair was exercised");
    Ok(format!("3 spaces × {PER_SPACE}, {non_coarser} non-coarser pairs exercised"))
}

fn criterion_7() -> Outcome {
    const DEPTH: usize = 20;
    for i in 0..200u64 {
        let l = 2 + (i % 2) as usize;
        let fresh = 0.2 + 0.1 * (i % 6) as f64;
        let g = Rigid::random(l, DEPTH, i, fresh).map_err(|e| e.to_string())?;
        let r = rigid_to_eqrel(&g).map_err(|e| e.to_string())?;
        let g2 = eqrel_to_rigid(&r, DEPTH).map_err(|e| format!("#{i}: {e}"))?;
        ensure!(g2 == g, "#{i}: rigid → relation → rigid changed the surjection");

        let p = Partition::residue(l).unwrap();
        let e = random_alternating(&p, &ConstraintSeq::Geq, 5000 + i, fresh).map_err(|e| e.to_string())?;
        let img = transfer(&e, &p, &Target::OmegaTimes(l), DEPTH).map_err(|e| e.to_string())?;
        let h = eqrel_to_rigid(&img, DEPTH).map_err(|e| format!("#{i}: {e}"))?;
        let again = rigid_to_eqrel(&h).map_err(|e| e.to_string())?;
        let labels = |x: &eqrel_ramsey::ordinal::OrdinalEqRel| -> Result<FiniteEqRel, String> {
            let ls: Vec<usize> = x.window_labels(l * DEPTH).map_err(|e| e.to_string())?.into_iter().map(|t| t.1).collect();
            Ok(FiniteEqRel::canonical_form(&ls))
        };
        ensure!(labels(&again)? == labels(&img)?, "#{i}: relation → rigid → relation changed the box");
    }
    Ok(format!("200 instances at depth {DEPTH}, both directions"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let a = miniature_dual_ramsey(4, 2, 2, 3, 0, 256).map_err(|e| e.to_string())?;
    let b = miniature_dual_ramsey(4, 2, 2, 3, 0, 256).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(a.exhaustive, "run was sampled, not exhaustive");
    let (ja, jb) = (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    ensure!(ja == jb, "two runs differ");
    ensure!(a.verdicts.len() == a.colourings, "{} verdicts for {} colourings", a.verdicts.len(), a.colourings);
    let constant: Vec<_> = a.verdicts.iter().filter(|v| v.colouring.windows(2).all(|w| w[0] == w[1])).collect();
    ensure!(constant.len() == 2, "expected 2 constant colourings, found {}", constant.len());
    for v in constant {
        ensure!(v.witness.is_some() && v.colour == v.colouring.first().copied(), "constant colouring {:?} failed", v.colouring);
    }
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!("{} colourings, {} succeed, deterministic", a.colourings, a.successes))
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Fixed invocations, one or more per verb, with their golden file names.
fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let cert = golden_dir().join("cert.json").display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        ("validate", s(&["validate", "--relation", "random:7:0.5", "--depth", "10"])),
        ("validate_approx", s(&["validate", "--approx", "0 1 0 3 3"])),
        ("encode", s(&["encode", "--n", "1", "0 1 0 1 1 1"])),
        ("decode", s(&["decode", "--n", "1", "(0,1).(1,1)"])),
        ("decode_dyadic", s(&["decode", "--partition", "dyadic", "--n", "0", "(0,0,0,0)"])),
        ("expand", s(&["expand", "--n", "1", "--w0", "(0,1)", "--x", "v", "--x", "v.(1,0)"])),
        ("expand_file", vec!["expand".into(), "--n".into(), "1".into(), "--cert".into(), cert.clone()]),
        ("build_f", s(&["build-f", "--n", "1", "--w0", "(0,1)", "--x", "v", "--x", "v.(1,0)", "--depth", "8"])),
        ("hj_search", s(&["hj-search", "--letters", "2", "--colouring", "len-mod:2", "--words", "2", "--budget", "6"])),
        ("pigeonhole", s(&["pigeonhole", "--n", "1", "--relation", "random:3:0.6", "--predicate", "clopen:5:2:11"])),
        ("miniature", s(&["miniature", "--m", "4", "--k", "2", "--r", "2"])),
        ("axioms", s(&["axioms", "--axiom", "A1", "--depth", "3", "--corpus", "3", "--seed", "5"])),
        ("transfer", s(&["transfer", "--constraint", "geq", "--target", "w*2", "--relation", "random:9:0.5", "--depth", "8"])),
        ("transfer_alpha", s(&["transfer", "--partition", "dyadic", "--constraint", "f-geq:id", "--target", "w^2", "--depth", "6"])),
        ("project", s(&["project", "--constraint", "geq", "--target", "w*2", "--k", "3", "--depth", "6"])),
        ("validate_ordinal", s(&["validate-ordinal", "--constraint", "geq", "--target", "w*2", "--depth", "8"])),
        ("divide_omega", s(&["divide-omega", "w^3*2 + w^2"])),
        ("json_encode", s(&["--format", "json", "encode", "--n", "0", "0 0 0"])),
        ("bad_input", s(&["decode", "--n", "1", "(0,7)"])),
    ]
}

fn run_cli(args: &[String]) -> (i32, Vec<u8>) {
    let mut argv: Vec<OsString> = vec!["eqrel-ramsey".into()];
    argv.extend(args.iter().map(OsString::from));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut out, &mut err);
    let mut report = format!("exit: {code}\n").into_bytes();
    report.extend(out);
    if !err.is_empty() {
        report.extend(b"stderr:\n");
        report.extend(err);
    }
    (code, report)
}

fn criterion_9() -> Outcome {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let cases = golden_cases();
    for (name, args) in &cases {
        let (_, first) = run_cli(args);
        let (_, second) = run_cli(args);
        ensure!(first == second, "{name}: two runs differ");
        let path = golden_dir().join(format!("{name}.txt"));
        if update {
            std::fs::write(&path, &first).map_err(|e| e.to_string())?;
            continue;
        }
        let want = std::fs::read(&path).map_err(|e| format!("{name}: {e}"))?;
        ensure!(
            want == first,
            "{name}: report differs from {}\n--- got ---\n{}",
            path.display(),
            String::from_utf8_lossy(&first)
        );
    }
    Ok(format!("{} invocations byte-identical{}", cases.len(), if update { " (goldens rewritten)" } else { "" }))
}

fn main() {
    let criteria: [Check; 9] = [
        ("coding round-trip, exhaustive", criterion_1),
        ("σ divisibility and coverage", criterion_2),
        ("t-grading recurrence", criterion_3),
        ("finite Hales-Jewett oracle", criterion_4),
        ("pigeonhole probe", criterion_5),
        ("transfer and order isomorphism", criterion_6),
        ("rigid round-trip", criterion_7),
        ("miniature dual Ramsey", criterion_8),
        ("golden CLI reports", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
