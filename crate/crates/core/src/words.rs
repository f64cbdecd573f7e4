//! Words, variable words, partial subsemigroups and bounded Hales–Jewett search.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A letter: a tuple of coordinates. Scalar letters are 1-tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub Vec<u32>);

impl Letter {
    pub fn scalar(k: u32) -> Self {
        Letter(vec![k])
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    fn as_digit(&self) -> Option<u32> {
        match self.0.as_slice() {
            [d] if *d < 10 => Some(*d),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [k] => write!(f, "{k}"),
            cs => {
                let parts: Vec<String> = cs.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(s);
        let coords = inner
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("letter {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Letter(coords))
    }
}

/// A letter or the variable `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Letter(Letter),
    Var,
}

/// A finite word over `L ∪ {v}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        Word(letters.into_iter().map(Symbol::Letter).collect())
    }

    /// A word of scalar letters.
    pub fn from_scalars(ks: &[u32]) -> Self {
        Word::from_letters(ks.iter().map(|&k| Letter::scalar(k)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn is_variable(&self) -> bool {
        self.0.contains(&Symbol::Var)
    }

    pub fn is_left_variable(&self) -> bool {
        self.0.first() == Some(&Symbol::Var)
    }

    pub fn var_count(&self) -> usize {
        self.0.iter().filter(|s| **s == Symbol::Var).count()
    }

    /// The letters of a variable-free word.
    pub fn letters(&self) -> Option<Vec<&Letter>> {
        self.0
            .iter()
            .map(|s| match s {
                Symbol::Letter(l) => Some(l),
                Symbol::Var => None,
            })
            .collect()
    }

    /// `x⌢y`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }

    /// `x[λ]`: every `v` replaced by `λ`. No alphabet check.
    pub fn substitute_unchecked(&self, lambda: &Symbol) -> Word {
        Word(self.0.iter().map(|s| if *s == Symbol::Var { lambda.clone() } else { s.clone() }).collect())
    }
}

/// `x⌢y`.
pub fn concat(x: &Word, y: &Word) -> Word {
    x.concat(y)
}

/// `x[λ]`, rejecting letters outside the alphabet (at any level, for graded alphabets).
pub fn substitute(x: &Word, lambda: &Symbol, alphabet: &Alphabet) -> Result<Word> {
    if let Symbol::Letter(l) = lambda {
        if !alphabet.contains_anywhere(l) {
            return Err(Error::LetterOutsideAlphabet(l.to_string()));
        }
    }
    Ok(x.substitute_unchecked(lambda))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let digits = self.0.iter().all(|s| match s {
            Symbol::Var => true,
            Symbol::Letter(l) => l.as_digit().is_some(),
        });
        if digits {
            for s in &self.0 {
                match s {
                    Symbol::Var => f.write_str("v")?,
                    Symbol::Letter(l) => write!(f, "{l}")?,
                }
            }
            return Ok(());
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match s {
                Symbol::Var => f.write_str("v")?,
                // A lone multi-digit scalar is bracketed so it does not read as digits.
                Symbol::Letter(l) if self.0.len() == 1 && l.arity() == 1 => write!(f, "({l})")?,
                Symbol::Letter(l) => write!(f, "{l}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Digits-and-`v` form (`0v1`) or dot-separated form (`(0,1).v.(2,0)`);
    /// `ε` or the empty string is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(Word::empty());
        }
        if s.contains('.') || s.contains('(') {
            let syms = s
                .split('.')
                .map(|t| if t.trim() == "v" { Ok(Symbol::Var) } else { t.parse().map(Symbol::Letter) })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Word(syms));
        }
        s.chars()
            .map(|c| match c {
                'v' => Ok(Symbol::Var),
                d if d.is_ascii_digit() => Ok(Symbol::Letter(Letter::scalar(d as u32 - '0' as u32))),
                other => Err(Error::Parse(format!("unexpected character {other:?} in word {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Letter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite set of letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LetterSet {
    /// Explicitly listed letters.
    Letters(Vec<Letter>),
    /// All tuples of `arity` coordinates, each below `base`: `base^arity`.
    Tuples { base: u32, arity: usize },
}

impl LetterSet {
    /// `{0, .., k-1}` as scalar letters.
    pub fn scalars(k: u32) -> Self {
        LetterSet::Letters((0..k).map(Letter::scalar).collect())
    }

    pub fn contains(&self, l: &Letter) -> bool {
        match self {
            LetterSet::Letters(ls) => ls.contains(l),
            LetterSet::Tuples { base, arity } => l.arity() == *arity && l.0.iter().all(|c| c < base),
        }
    }

    /// Number of letters, if it fits in a `u64`.
    pub fn size(&self) -> Option<u64> {
        match self {
            LetterSet::Letters(ls) => Some(ls.len() as u64),
            LetterSet::Tuples { base, arity } => u64::from(*base).checked_pow(u32::try_from(*arity).ok()?),
        }
    }

    /// All letters in increasing order; fails beyond `limit`.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Letter>> {
        match self {
            LetterSet::Letters(ls) => Ok(ls.clone()),
            LetterSet::Tuples { base, arity } => {
                let size = self.size().filter(|&s| s <= limit as u64).ok_or_else(|| {
                    Error::LimitExceeded(format!("{base}^{arity} letters exceed the pool limit {limit}"))
                })?;
                let mut out = Vec::with_capacity(size as usize);
                let mut cur = vec![0u32; *arity];
                for _ in 0..size {
                    out.push(Letter(cur.clone()));
                    for c in cur.iter_mut().rev() {
                        *c += 1;
                        if *c < *base {
                            break;
                        }
                        *c = 0;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// A finite alphabet, or a graded chain `L_0 ⊆ L_1 ⊆ ...` where `L_i` is the
/// union of the first `i + 1` parts and the last part's level repeats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alphabet {
    Finite(LetterSet),
    Graded(Vec<LetterSet>),
}

impl Alphabet {
    pub fn is_graded(&self) -> bool {
        matches!(self, Alphabet::Graded(_))
    }

    /// `λ ∈ L_i` (for a finite alphabet, `λ ∈ L`).
    pub fn contains_at(&self, i: usize, l: &Letter) -> bool {
        match self {
            Alphabet::Finite(s) => s.contains(l),
            Alphabet::Graded(parts) => parts.iter().take(i + 1).any(|p| p.contains(l)),
        }
    }

    pub fn contains_anywhere(&self, l: &Letter) -> bool {
        match self {
            Alphabet::Finite(s) => s.contains(l),
            Alphabet::Graded(parts) => parts.iter().any(|p| p.contains(l)),
        }
    }

    /// The letters of `L_i`, without duplicates, in level order.
    pub fn letters_at(&self, i: usize, limit: usize) -> Result<Vec<Letter>> {
        match self {
            Alphabet::Finite(s) => s.enumerate(limit),
            Alphabet::Graded(parts) => {
                let mut out: Vec<Letter> = Vec::new();
                for p in parts.iter().take(i + 1) {
                    for l in p.enumerate(limit)? {
                        if !out.contains(&l) {
                            out.push(l);
                        }
                    }
                    if out.len() > limit {
                        return Err(Error::LimitExceeded(format!("level {i} exceeds the pool limit {limit}")));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Which partial subsemigroup a translate ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupMode {
    /// `[X]_L`: increasing index subsets, every `λ_i ∈ L`.
    Plain,
    /// `[X]*_L`: indices `0..=k`, `λ_i ∈ L_i`.
    Graded,
}

impl fmt::Display for SemigroupMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemigroupMode::Plain => "plain",
            SemigroupMode::Graded => "graded",
        })
    }
}

/// Default cap on the letters enumerated from one level of an alphabet.
pub const POOL_LIMIT: usize = 4096;

/// Visits every element `w0⌢x_{n_0}[λ_0]⌢...⌢x_{n_k}[λ_k]` of the translate
/// with length at most `len_budget` and `k <= max_terms`, in a fixed
/// deterministic order. `w0` itself is visited first when `include_base`.
/// The visitor returns `false` to stop early.
#[allow(clippy::too_many_arguments)]
pub fn for_each_translate(
    w0: &Word,
    xs: &[Word],
    alphabet: &Alphabet,
    mode: SemigroupMode,
    max_terms: usize,
    len_budget: usize,
    include_base: bool,
    visit: &mut dyn FnMut(&Word) -> bool,
) -> Result<bool> {
    if mode == SemigroupMode::Plain && alphabet.is_graded() {
        return Err(Error::InvalidInput("plain mode needs a finite alphabet".into()));
    }
    if w0.len() > len_budget {
        return Ok(true);
    }
    if include_base && !visit(w0) {
        return Ok(false);
    }
    let pools = (0..xs.len()).map(|i| alphabet.letters_at(i, POOL_LIMIT)).collect::<Result<Vec<_>>>()?;
    let mut cur = w0.clone();
    Ok(translate_rec(xs, &pools, mode, 0, 0, max_terms, len_budget, &mut cur, visit))
}

#[allow(clippy::too_many_arguments)]
fn translate_rec(
    xs: &[Word],
    pools: &[Vec<Letter>],
    mode: SemigroupMode,
    next: usize,
    terms: usize,
    max_terms: usize,
    len_budget: usize,
    cur: &mut Word,
    visit: &mut dyn FnMut(&Word) -> bool,
) -> bool {
    if terms > max_terms {
        return true;
    }
    let candidates: Vec<usize> = match mode {
        SemigroupMode::Plain => (next..xs.len()).collect(),
        SemigroupMode::Graded => (next < xs.len()).then_some(next).into_iter().collect(),
    };
    for i in candidates {
        let x = &xs[i];
        if cur.len() + x.len() > len_budget {
            continue;
        }
        for lambda in &pools[i] {
            let base = cur.len();
            cur.0.extend(x.substitute_unchecked(&Symbol::Letter(lambda.clone())).0);
            let keep_going = visit(cur)
                && translate_rec(xs, pools, mode, i + 1, terms + 1, max_terms, len_budget, cur, visit);
            cur.0.truncate(base);
            if !keep_going {
                return false;
            }
        }
    }
    true
}

/// The partial subsemigroup generated by a truncation `X`, with at most
/// `max_terms + 1` factors.
pub fn enumerate_semigroup(
    xs: &[Word],
    alphabet: &Alphabet,
    mode: SemigroupMode,
    max_terms: usize,
) -> Result<BTreeSet<Word>> {
    let mut out = BTreeSet::new();
    for_each_translate(&Word::empty(), xs, alphabet, mode, max_terms, usize::MAX, false, &mut |w| {
        out.insert(w.clone());
        true
    })?;
    Ok(out)
}

/// A colouring of words.
pub trait Colouring: Sync {
    fn colour(&self, w: &Word) -> u32;
}

impl<F: Fn(&Word) -> u32 + Sync> Colouring for F {
    fn colour(&self, w: &Word) -> u32 {
        self(w)
    }
}

/// The built-in colourings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinColouring {
    Const(u32),
    /// `|w| mod m`.
    LenMod(u32),
    /// First coordinate of the first letter; the empty word gets 0.
    FirstLetter,
    /// Number of occurrences of a letter, mod `m`.
    LetterCount(Letter, u32),
}

impl Colouring for BuiltinColouring {
    fn colour(&self, w: &Word) -> u32 {
        match self {
            BuiltinColouring::Const(c) => *c,
            BuiltinColouring::LenMod(m) => (w.len() % *m as usize) as u32,
            BuiltinColouring::FirstLetter => match w.0.first() {
                Some(Symbol::Letter(l)) => l.0.first().copied().unwrap_or(0),
                _ => 0,
            },
            BuiltinColouring::LetterCount(l, m) => {
                let n = w.0.iter().filter(|s| matches!(s, Symbol::Letter(x) if x == l)).count();
                (n % *m as usize) as u32
            }
        }
    }
}

impl FromStr for BuiltinColouring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown colouring {s:?}"));
        let num = |t: &str| t.parse::<u32>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["const", c] => Ok(BuiltinColouring::Const(num(c)?)),
            ["len-mod", m] if num(m)? > 0 => Ok(BuiltinColouring::LenMod(num(m)?)),
            ["first-letter"] => Ok(BuiltinColouring::FirstLetter),
            ["letter-count", l, m] if num(m)? > 0 => Ok(BuiltinColouring::LetterCount(l.parse()?, num(m)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for BuiltinColouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinColouring::Const(c) => write!(f, "const:{c}"),
            BuiltinColouring::LenMod(m) => write!(f, "len-mod:{m}"),
            BuiltinColouring::FirstLetter => f.write_str("first-letter"),
            BuiltinColouring::LetterCount(l, m) => write!(f, "letter-count:{l}:{m}"),
        }
    }
}

/// All variable words of length `n` over `letters ∪ {v}`, letters before `v`,
/// in lexicographic order.
pub fn variable_words(letters: &[Letter], n: usize) -> Vec<Word> {
    let mut symbols: Vec<Symbol> = letters.iter().cloned().map(Symbol::Letter).collect();
    symbols.push(Symbol::Var);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(symbols: &[Symbol], n: usize, cur: &mut Vec<Symbol>, out: &mut Vec<Word>) {
        if cur.len() == n {
            if cur.contains(&Symbol::Var) {
                out.push(Word(cur.clone()));
            }
            return;
        }
        for s in symbols {
            cur.push(s.clone());
            go(symbols, n, cur, out);
            cur.pop();
        }
    }
    go(&symbols, n, &mut cur, &mut out);
    out
}

/// The first variable word `x` of length `n` (in [`variable_words`] order)
/// whose combinatorial line `{x[λ] : λ ∈ L}` is monochromatic.
pub fn hj_line_search(letters: &[Letter], n: usize, colouring: &dyn Colouring) -> Option<Word> {
    variable_words(letters, n).into_iter().find(|x| {
        let mut colours = letters.iter().map(|l| colouring.colour(&x.substitute_unchecked(&Symbol::Letter(l.clone()))));
        match colours.next() {
            Some(c) => colours.all(|d| d == c),
            None => true,
        }
    })
}

/// A candidate `(w0, X)` for the left-variable Hales–Jewett conclusion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub w0: Word,
    #[serde(rename = "X")]
    pub xs: Vec<Word>,
    pub colour: u32,
}

/// The certificate file layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub w0: Word,
    #[serde(rename = "X")]
    pub xs: Vec<Word>,
    pub alphabet: Alphabet,
    pub mode: SemigroupMode,
}

/// Outcome of the independent verifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verification {
    Ok { colour: Option<u32>, checked: u64 },
    Counterexample { word: Word, colour: u32, expected: u32 },
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verification::Ok { .. })
    }
}

/// Enumerates the translate up to `len_budget` and reports the first word
/// whose colour differs from the first colour seen.
pub fn verify_monochromatic(
    w0: &Word,
    xs: &[Word],
    alphabet: &Alphabet,
    colouring: &dyn Colouring,
    mode: SemigroupMode,
    len_budget: usize,
    include_base: bool,
) -> Result<Verification> {
    let mut expected: Option<u32> = None;
    let mut checked = 0u64;
    let mut bad: Option<(Word, u32, u32)> = None;
    for_each_translate(w0, xs, alphabet, mode, usize::MAX, len_budget, include_base, &mut |w| {
        checked += 1;
        let c = colouring.colour(w);
        match expected {
            None => {
                expected = Some(c);
                true
            }
            Some(e) if e == c => true,
            Some(e) => {
                bad = Some((w.clone(), c, e));
                false
            }
        }
    })?;
    Ok(match bad {
        Some((word, colour, expected)) => Verification::Counterexample { word, colour, expected },
        None => Verification::Ok { colour: expected, checked },
    })
}

/// Knobs for [`lv_hj_bounded_search`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOptions {
    pub mode: SemigroupMode,
    /// Also require `w0` itself to carry the colour.
    pub include_base: bool,
    /// At most this many occurrences of `v` in each `x_i`.
    pub max_vars_per_word: Option<usize>,
    /// Abandon the search after this many partial assignments.
    pub node_limit: u64,
    pub pool_limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: SemigroupMode::Plain,
            include_base: false,
            max_vars_per_word: None,
            node_limit: 50_000_000,
            pool_limit: POOL_LIMIT,
        }
    }
}

/// How far a search got.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub colour_evaluations: u64,
    pub shapes_tried: u64,
    /// Largest `|w0| + Σ|x_i|` fully explored.
    pub explored_total_length: usize,
    pub node_limit_hit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Found { certificate: Certificate, stats: SearchStats },
    Exhausted { stats: SearchStats },
}

/// Searches for `w0` and `k` left-variable words with `|w0| + Σ|x_i| <= len_budget`
/// whose translate is monochromatic.
///
/// Total length grows by iterative deepening; within one total the length
/// shapes are tried with longer `w0` first, then lexicographically, and
/// letters in alphabet order with `v` last. `w0` draws from `L_0` and `x_i`
/// from `L_i`. Every translate element has length at most the total, so the
/// whole translate is checked.
pub fn lv_hj_bounded_search(
    alphabet: &Alphabet,
    colouring: &dyn Colouring,
    k: usize,
    len_budget: usize,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    if opts.mode == SemigroupMode::Plain && alphabet.is_graded() {
        return Err(Error::InvalidInput("plain mode needs a finite alphabet".into()));
    }
    let w0_pool = alphabet.letters_at(0, opts.pool_limit)?;
    let x_pools = (0..k).map(|i| alphabet.letters_at(i, opts.pool_limit)).collect::<Result<Vec<_>>>()?;
    let mut search = Search {
        colouring,
        opts,
        x_pools: &x_pools,
        cache: HashMap::new(),
        stats: SearchStats::default(),
    };
    for total in k..=len_budget {
        for shape in shapes(total, k) {
            search.stats.shapes_tried += 1;
            let mut st = State { w0: Word::empty(), xs: Vec::with_capacity(k), target: None };
            match search.fill_w0(&shape, &w0_pool, &mut st) {
                Step::Found => {
                    let certificate = Certificate { w0: st.w0, xs: st.xs, colour: st.target.unwrap_or(0) };
                    return Ok(SearchOutcome::Found { certificate, stats: search.stats });
                }
                Step::Abort => return Ok(SearchOutcome::Exhausted { stats: search.stats }),
                Step::Continue => {}
            }
        }
        search.stats.explored_total_length = total;
    }
    Ok(SearchOutcome::Exhausted { stats: search.stats })
}

/// Length shapes `(|w0|, |x_0|, ..)` with the given total, longer `w0` first.
fn shapes(total: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if total < k {
        return out;
    }
    for w in (0..=total - k).rev() {
        let mut xs = vec![1; k];
        let rest = total - w - k;
        compositions(rest, k, &mut xs, 0, &mut |xs| {
            let mut s = vec![w];
            s.extend_from_slice(xs);
            out.push(s);
        });
    }
    out
}

/// Distributes `rest` extra units over `xs[i..]` in lexicographic order.
fn compositions(rest: usize, k: usize, xs: &mut Vec<usize>, i: usize, emit: &mut dyn FnMut(&[usize])) {
    if k == 0 {
        if rest == 0 {
            emit(xs);
        }
        return;
    }
    if i == k - 1 {
        xs[i] += rest;
        emit(xs);
        xs[i] -= rest;
        return;
    }
    for extra in 0..=rest {
        xs[i] += extra;
        compositions(rest - extra, k, xs, i + 1, emit);
        xs[i] -= extra;
    }
}

enum Step {
    Found,
    Continue,
    Abort,
}

struct State {
    w0: Word,
    xs: Vec<Word>,
    target: Option<u32>,
}

struct Search<'a> {
    colouring: &'a dyn Colouring,
    opts: &'a SearchOptions,
    x_pools: &'a [Vec<Letter>],
    cache: HashMap<Word, u32>,
    stats: SearchStats,
}

impl Search<'_> {
    fn colour(&mut self, w: &Word) -> u32 {
        if let Some(&c) = self.cache.get(w) {
            return c;
        }
        self.stats.colour_evaluations += 1;
        let c = self.colouring.colour(w);
        if self.cache.len() < 4_000_000 {
            self.cache.insert(w.clone(), c);
        }
        c
    }

    fn tick(&mut self) -> bool {
        self.stats.nodes += 1;
        if self.stats.nodes > self.opts.node_limit {
            self.stats.node_limit_hit = true;
            return false;
        }
        true
    }

    fn fill_w0(&mut self, shape: &[usize], pool: &[Letter], st: &mut State) -> Step {
        if !self.tick() {
            return Step::Abort;
        }
        if st.w0.len() < shape[0] {
            for l in pool {
                st.w0.0.push(Symbol::Letter(l.clone()));
                let step = self.fill_w0(shape, pool, st);
                if matches!(step, Step::Found) {
                    return step;
                }
                st.w0.0.pop();
                if matches!(step, Step::Abort) {
                    return step;
                }
            }
            return Step::Continue;
        }
        let saved = st.target;
        if self.opts.include_base {
            let c = self.colour(&st.w0.clone());
            st.target = Some(c);
        }
        let step = self.fill_x(shape, st);
        if !matches!(step, Step::Found) {
            st.target = saved;
        }
        step
    }

    fn fill_x(&mut self, shape: &[usize], st: &mut State) -> Step {
        let i = st.xs.len();
        if i + 1 == shape.len() {
            return Step::Found;
        }
        st.xs.push(Word(vec![Symbol::Var]));
        let step = self.extend_x(shape, st);
        if !matches!(step, Step::Found) {
            st.xs.pop();
        }
        step
    }

    fn extend_x(&mut self, shape: &[usize], st: &mut State) -> Step {
        if !self.tick() {
            return Step::Abort;
        }
        let i = st.xs.len() - 1;
        if st.xs[i].len() == shape[i + 1] {
            let saved = st.target;
            if !self.check_new_terms(st) {
                st.target = saved;
                return Step::Continue;
            }
            let step = self.fill_x(shape, st);
            if !matches!(step, Step::Found) {
                st.target = saved;
            }
            return step;
        }
        let vars = st.xs[i].var_count();
        let pool = &self.x_pools[i];
        let mut symbols: Vec<Symbol> = pool.iter().cloned().map(Symbol::Letter).collect();
        if self.opts.max_vars_per_word.is_none_or(|m| vars < m) {
            symbols.push(Symbol::Var);
        }
        for s in symbols {
            st.xs[i].0.push(s.clone());
            let step = self.extend_x(shape, st);
            if matches!(step, Step::Found) {
                return step;
            }
            st.xs[i].0.pop();
            if matches!(step, Step::Abort) {
                return step;
            }
        }
        Step::Continue
    }

    /// Checks every translate element whose last factor is the newest `x_i`.
    fn check_new_terms(&mut self, st: &mut State) -> bool {
        let i = st.xs.len() - 1;
        let mut prefixes: Vec<Word> = Vec::new();
        match self.opts.mode {
            SemigroupMode::Graded => {
                // Factors x_0..x_{i-1}, each with λ_j ∈ L_j.
                let mut acc = vec![st.w0.clone()];
                for j in 0..i {
                    let mut next = Vec::with_capacity(acc.len() * self.x_pools[j].len());
                    for p in &acc {
                        for l in &self.x_pools[j] {
                            next.push(p.concat(&st.xs[j].substitute_unchecked(&Symbol::Letter(l.clone()))));
                        }
                    }
                    acc = next;
                }
                prefixes = acc;
            }
            SemigroupMode::Plain => {
                let pool = &self.x_pools[0];
                let mut acc = vec![st.w0.clone()];
                for j in 0..i {
                    let mut next = acc.clone();
                    for p in &acc {
                        for l in pool {
                            next.push(p.concat(&st.xs[j].substitute_unchecked(&Symbol::Letter(l.clone()))));
                        }
                    }
                    acc = next;
                }
                prefixes.extend(acc);
            }
        }
        let pool = self.x_pools[i].clone();
        for p in &prefixes {
            for l in &pool {
                let w = p.concat(&st.xs[i].substitute_unchecked(&Symbol::Letter(l.clone())));
                let c = self.colour(&w);
                match st.target {
                    None => st.target = Some(c),
                    Some(t) if t != c => return false,
                    _ => {}
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn binary() -> Alphabet {
        Alphabet::Finite(LetterSet::scalars(2))
    }

    #[test]
    fn text_forms() {
        for s in ["0110", "0v1", "v", "(0,1).(2,0)", "(0,1).v", "12.3", "(12)"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert_eq!(w("ε"), Word::empty());
        assert_eq!(w(""), Word::empty());
        assert_eq!(Word::empty().to_string(), "ε");
        assert!("0x".parse::<Word>().is_err());
    }

    #[test]
    fn concat_and_substitute() {
        assert_eq!(concat(&w("01"), &w("10")), w("0110"));
        assert_eq!(concat(&Word::empty(), &w("01")), w("01"));
        assert_eq!(concat(&w("0v"), &w("1")), w("0v1"));
        let one = Symbol::Letter(Letter::scalar(1));
        assert_eq!(substitute(&w("v0v"), &one, &binary()).unwrap(), w("101"));
        assert_eq!(substitute(&w("v0v"), &Symbol::Var, &binary()).unwrap(), w("v0v"));
        assert_eq!(substitute(&w("v"), &Symbol::Letter(Letter::scalar(0)), &binary()).unwrap(), w("0"));
        assert!(substitute(&w("v"), &Symbol::Letter(Letter::scalar(5)), &binary()).is_err());
    }

    #[test]
    fn semigroup_examples() {
        let got = enumerate_semigroup(&[w("v")], &binary(), SemigroupMode::Plain, 0).unwrap();
        assert_eq!(got, [w("0"), w("1")].into_iter().collect());

        let got = enumerate_semigroup(&[w("v"), w("v0")], &binary(), SemigroupMode::Plain, 1).unwrap();
        let want: BTreeSet<Word> =
            ["0", "1", "00", "10", "000", "010", "100", "110"].iter().map(|s| w(s)).collect();
        assert_eq!(got, want);

        let graded = Alphabet::Graded(vec![LetterSet::scalars(1), LetterSet::scalars(2)]);
        let got = enumerate_semigroup(&[w("v"), w("v")], &graded, SemigroupMode::Graded, 1).unwrap();
        assert_eq!(got, [w("0"), w("00"), w("01")].into_iter().collect());
    }

    #[test]
    fn line_search_examples() {
        let letters = [Letter::scalar(0), Letter::scalar(1)];
        let by_letter = |x: &Word| match x.0.first() {
            Some(Symbol::Letter(l)) => l.0[0],
            _ => 0,
        };
        assert_eq!(hj_line_search(&letters, 1, &by_letter), None);
        assert!(hj_line_search(&letters, 2, &BuiltinColouring::Const(0)).is_some());
    }

    #[test]
    fn search_examples() {
        let opts = SearchOptions::default();
        let out = lv_hj_bounded_search(&binary(), &BuiltinColouring::Const(3), 2, 6, &opts).unwrap();
        let SearchOutcome::Found { certificate, .. } = out else { panic!("constant colouring must certify") };
        assert_eq!(certificate.w0, Word::empty());
        assert_eq!(certificate.xs, vec![w("v"), w("v")]);

        let first = BuiltinColouring::FirstLetter;
        let out = lv_hj_bounded_search(&binary(), &first, 2, 6, &opts).unwrap();
        let SearchOutcome::Found { certificate, .. } = out else { panic!("first-letter must certify") };
        assert!(!certificate.w0.is_empty());
        let v = verify_monochromatic(&certificate.w0, &certificate.xs, &binary(), &first, SemigroupMode::Plain, 6, false)
            .unwrap();
        assert!(v.is_ok());
    }

    #[test]
    fn found_w0_is_the_searched_one() {
        // Only a w0 beginning with 10 avoids the length-parity colours.
        let starts_10 = |x: &Word| if x.to_string().starts_with("10") { 0 } else { 1 + (x.len() % 2) as u32 };
        let opts = SearchOptions { include_base: true, ..SearchOptions::default() };
        let out = lv_hj_bounded_search(&binary(), &starts_10, 2, 6, &opts).unwrap();
        let SearchOutcome::Found { certificate, .. } = out else { panic!("a prefix colouring must certify") };
        assert!(certificate.w0.to_string().starts_with("10"), "{}", certificate.w0);
        let v = verify_monochromatic(&certificate.w0, &certificate.xs, &binary(), &starts_10, SemigroupMode::Plain, 6, true)
            .unwrap();
        assert!(v.is_ok());
    }

    #[test]
    fn verifier_finds_counterexample() {
        let v = verify_monochromatic(
            &Word::empty(),
            &[w("v")],
            &binary(),
            &BuiltinColouring::FirstLetter,
            SemigroupMode::Plain,
            4,
            false,
        )
        .unwrap();
        assert!(matches!(v, Verification::Counterexample { .. }));
    }

    #[test]
    fn colouring_specs() {
        for s in ["const:1", "len-mod:2", "first-letter", "letter-count:0:3"] {
            assert_eq!(s.parse::<BuiltinColouring>().unwrap().to_string(), s);
        }
        assert!("len-mod:0".parse::<BuiltinColouring>().is_err());
    }

    #[test]
    fn tuple_enumeration_order() {
        let ls = LetterSet::Tuples { base: 2, arity: 2 }.enumerate(10).unwrap();
        let got: Vec<String> = ls.iter().map(ToString::to_string).collect();
        assert_eq!(got, ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
        assert!(LetterSet::Tuples { base: 3, arity: 20 }.enumerate(1000).is_err());
    }
}
