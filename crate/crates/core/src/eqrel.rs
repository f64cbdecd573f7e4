//! Equivalence relations on initial segments of ω and their approximations.
//!
//! A [`FiniteEqRel`] is stored as its minimal-representative array: element
//! `i` maps to the least element of its class. That array is unique per
//! partition, so equality of relations is equality of arrays.
//!
//! An [`EqRelStream`] is an equivalence relation on all of ω, given by a pure
//! [`RepSource`] that can produce the representative array of any finite
//! prefix. The `n`-th approximation `r_n(E)` is the restriction of `E` to the
//! elements below its `n`-th minimal representative `p_n(E)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the prefix length scanned while looking for a representative.
pub const REP_SEARCH_LIMIT: usize = 1 << 22;

/// An equivalence relation on `{0, .., m-1}` in minimal-representative form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawFinite", into = "RawFinite")]
pub struct FiniteEqRel {
    assign: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawFinite {
    m: usize,
    assign: Vec<usize>,
}

impl TryFrom<RawFinite> for FiniteEqRel {
    type Error = Error;

    fn try_from(raw: RawFinite) -> Result<Self> {
        if raw.m != raw.assign.len() {
            return Err(Error::Parse(format!(
                "m = {} but assign has {} entries",
                raw.m,
                raw.assign.len()
            )));
        }
        FiniteEqRel::from_assign(raw.assign)
    }
}

impl From<FiniteEqRel> for RawFinite {
    fn from(rel: FiniteEqRel) -> Self {
        RawFinite { m: rel.assign.len(), assign: rel.assign }
    }
}

impl FiniteEqRel {
    /// The relation on the empty domain, `r_0` of every stream.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every element of `{0, .., m-1}` in its own class.
    pub fn identity(m: usize) -> Self {
        FiniteEqRel { assign: (0..m).collect() }
    }

    /// Validates and wraps a minimal-representative array.
    pub fn from_assign(assign: Vec<usize>) -> Result<Self> {
        for (i, &r) in assign.iter().enumerate() {
            if r > i || assign[r] != r {
                return Err(Error::NotCanonical { index: i, rep: r });
            }
        }
        Ok(FiniteEqRel { assign })
    }

    pub(crate) fn from_assign_unchecked(assign: Vec<usize>) -> Self {
        debug_assert!(Self::from_assign(assign.clone()).is_ok());
        FiniteEqRel { assign }
    }

    /// Canonical form of an arbitrary labelling: elements sharing a label
    /// share a class.
    pub fn canonical_form<L: Eq + Hash>(labels: &[L]) -> Self {
        let mut first: HashMap<&L, usize> = HashMap::with_capacity(labels.len());
        let assign = labels
            .iter()
            .enumerate()
            .map(|(i, l)| *first.entry(l).or_insert(i))
            .collect();
        FiniteEqRel { assign }
    }

    /// Size `m` of the domain `{0, .., m-1}`.
    pub fn domain_size(&self) -> usize {
        self.assign.len()
    }

    /// Number of classes, written `|a|`.
    pub fn len(&self) -> usize {
        self.assign.iter().enumerate().filter(|&(i, &r)| i == r).count()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn rep_of(&self, i: usize) -> usize {
        self.assign[i]
    }

    /// Minimal representatives in increasing order.
    pub fn reps(&self) -> Vec<usize> {
        self.assign
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| (i == r).then_some(i))
            .collect()
    }

    /// For each element, the index of its class in the increasing order of
    /// representatives.
    pub fn class_indices(&self) -> Vec<usize> {
        let mut index_of_rep = vec![usize::MAX; self.assign.len()];
        let mut next = 0;
        self.assign
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                if i == r {
                    index_of_rep[i] = next;
                    next += 1;
                }
                index_of_rep[r]
            })
            .collect()
    }

    /// Restriction to `{0, .., m-1}`; `None` if `m` exceeds the domain.
    pub fn restrict(&self, m: usize) -> Option<FiniteEqRel> {
        (m <= self.assign.len()).then(|| FiniteEqRel { assign: self.assign[..m].to_vec() })
    }

    /// `r_k(a)`: restriction below the `k`-th representative. `k = |a|` gives
    /// `a` itself.
    pub fn approx(&self, k: usize) -> Option<FiniteEqRel> {
        let reps = self.reps();
        match k.cmp(&reps.len()) {
            std::cmp::Ordering::Less => self.restrict(reps[k]),
            std::cmp::Ordering::Equal => Some(self.clone()),
            std::cmp::Ordering::Greater => None,
        }
    }

    /// The classes as sorted element lists, ordered by representative.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let idx = self.class_indices();
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for (i, c) in idx.into_iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Whether every class of `finer` lies inside a class of `self`, on the
    /// same domain.
    pub fn is_coarsening_of(&self, finer: &FiniteEqRel) -> bool {
        leq_fin(self, finer)
    }
}

/// `a ≤_fin b`: equal domains and `a` coarser than `b`.
pub fn leq_fin(a: &FiniteEqRel, b: &FiniteEqRel) -> bool {
    a.assign.len() == b.assign.len()
        && b.assign.iter().enumerate().all(|(i, &r)| a.assign[r] == a.assign[i])
}

impl fmt::Display for FiniteEqRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for r in &self.assign {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl FromStr for FiniteEqRel {
    type Err = Error;

    /// Accepts the space-separated array form (`0 0 2 0 2`) or the JSON form
    /// (`{"m":5,"assign":[0,0,2,0,2]}`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
        }
        let assign = s
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        FiniteEqRel::from_assign(assign)
    }
}

/// A pure description of an equivalence relation on ω.
///
/// Implementations must be deterministic and coherent: the array returned for
/// a longer prefix extends the array for a shorter one.
pub trait RepSource: Send + Sync + fmt::Debug {
    /// Minimal representative of each element `0..len`.
    fn reps_prefix(&self, len: usize) -> Vec<usize>;

    /// Exact number of classes when the relation is known to have finitely many.
    fn class_count(&self) -> Option<usize> {
        None
    }
}

/// How a stream was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Identity,
    /// Finite prefix followed by singleton classes.
    Prefix { domain: usize },
    /// Greedy scan along a partition pattern.
    PatternCanonical { partition: String, constraint: String },
    /// Seeded greedy scan along a partition pattern.
    PatternRandom { partition: String, constraint: String, seed: u64 },
    /// Built from a word certificate; positions past `truncated_at` follow
    /// the canonical pattern tail.
    WordDefined { truncated_at: usize },
    CoarseningOf(Box<Provenance>),
    /// Approximation head glued to a pattern-realigned tail.
    Amalgam(Box<Provenance>),
    /// Pullback of an ordinal-side operation.
    Ordinal(String),
    Function,
}

/// An equivalence relation on ω, evaluated lazily through its approximations.
///
/// Clones share a memo of the longest representative prefix computed so far.
#[derive(Clone)]
pub struct EqRelStream {
    source: Arc<dyn RepSource>,
    provenance: Provenance,
    memo: Arc<RwLock<Vec<usize>>>,
}

impl fmt::Debug for EqRelStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EqRelStream").field("provenance", &self.provenance).finish()
    }
}

#[derive(Debug)]
struct IdentitySource;

impl RepSource for IdentitySource {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        (0..len).collect()
    }
}

#[derive(Debug)]
struct PrefixSource {
    head: FiniteEqRel,
}

impl RepSource for PrefixSource {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        let m = self.head.domain_size();
        let mut out: Vec<usize> = self.head.assign[..len.min(m)].to_vec();
        out.extend(m..len);
        out
    }
}

struct FnSource<F>(F);

impl<F> fmt::Debug for FnSource<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnSource")
    }
}

impl<F: Fn(usize) -> usize + Send + Sync> RepSource for FnSource<F> {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        (0..len).map(&self.0).collect()
    }
}

impl EqRelStream {
    pub fn from_source(source: Arc<dyn RepSource>, provenance: Provenance) -> Self {
        EqRelStream { source, provenance, memo: Arc::default() }
    }

    /// Runs `f` on a representative prefix of length at least `len`.
    fn with_prefix<T>(&self, len: usize, f: impl FnOnce(&[usize]) -> T) -> T {
        {
            let memo = self.memo.read().unwrap_or_else(|e| e.into_inner());
            if memo.len() >= len {
                return f(&memo[..len]);
            }
        }
        let mut memo = self.memo.write().unwrap_or_else(|e| e.into_inner());
        if memo.len() < len {
            *memo = self.source.reps_prefix(len.max(2 * memo.len()));
        }
        f(&memo[..len])
    }

    /// Every element of ω in its own class.
    pub fn identity() -> Self {
        Self::from_source(Arc::new(IdentitySource), Provenance::Identity)
    }

    /// `head` on its domain, singleton classes beyond it.
    pub fn from_prefix(head: FiniteEqRel) -> Self {
        let domain = head.domain_size();
        Self::from_source(Arc::new(PrefixSource { head }), Provenance::Prefix { domain })
    }

    /// A relation given by its minimal-representative function. The function
    /// must satisfy `rep(x) <= x` and `rep(rep(x)) == rep(x)`.
    pub fn from_rep_fn<F>(rep: F) -> Self
    where
        F: Fn(usize) -> usize + Send + Sync + 'static,
    {
        Self::from_source(Arc::new(FnSource(rep)), Provenance::Function)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn class_count(&self) -> Option<usize> {
        self.source.class_count()
    }

    /// Representative array of the first `len` elements.
    pub fn reps_prefix(&self, len: usize) -> Vec<usize> {
        self.with_prefix(len, <[usize]>::to_vec)
    }

    /// The relation restricted to `{0, .., len-1}`.
    pub fn prefix(&self, len: usize) -> FiniteEqRel {
        FiniteEqRel::from_assign_unchecked(self.reps_prefix(len))
    }

    pub fn rep_of(&self, x: usize) -> usize {
        self.with_prefix(x + 1, |a| a[x])
    }

    pub fn is_rep(&self, x: usize) -> bool {
        self.rep_of(x) == x
    }

    /// The first `count` minimal representatives `p_0 < p_1 < ...`; shorter
    /// when the relation has fewer classes or the search limit is hit.
    pub fn reps(&self, count: usize) -> Vec<usize> {
        let count = self.class_count().map_or(count, |c| c.min(count));
        if count == 0 {
            return Vec::new();
        }
        let mut len = (2 * count).max(64);
        loop {
            let reps: Vec<usize> = self.with_prefix(len, |arr| {
                arr.iter().enumerate().filter_map(|(i, &r)| (i == r).then_some(i)).take(count).collect()
            });
            if reps.len() == count || len >= REP_SEARCH_LIMIT {
                return reps;
            }
            len = (len * 2).min(REP_SEARCH_LIMIT);
        }
    }

    /// `p_k(E)`.
    pub fn rep(&self, k: usize) -> Option<usize> {
        self.reps(k + 1).get(k).copied()
    }

    /// `r_n(E)`; `None` when `p_n(E)` does not exist (finitely many classes)
    /// or lies beyond the search limit.
    pub fn approx(&self, n: usize) -> Option<FiniteEqRel> {
        if n == 0 {
            return Some(FiniteEqRel::empty());
        }
        let p = self.rep(n)?;
        Some(self.prefix(p))
    }

    /// Index `k` with `p_k(E) = x`, if `x` is a representative.
    pub fn rep_index(&self, x: usize) -> Option<usize> {
        self.with_prefix(x + 1, |arr| {
            (arr[x] == x).then(|| arr.iter().enumerate().filter(|&(i, &r)| i == r).count() - 1)
        })
    }
}

/// A class-index to class-index merge map for [`coarsen`].
///
/// Finitely many explicit joins plus an optional eventually-periodic tail.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinSpec {
    explicit: BTreeMap<usize, usize>,
    tail: Option<PeriodicJoins>,
}

/// For class indices `k >= start`, the action `actions[(k - start) % len]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicJoins {
    pub start: usize,
    pub actions: Vec<Option<JoinTarget>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JoinTarget {
    /// Join into the class with this index.
    Class(usize),
    /// Join into the class `d` indices earlier.
    Back(usize),
}

impl JoinSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Explicit joins `k -> j`; each must have `j < k`.
    pub fn finite<I: IntoIterator<Item = (usize, usize)>>(joins: I) -> Result<Self> {
        let mut spec = JoinSpec::default();
        for (k, j) in joins {
            spec = spec.with_join(k, j)?;
        }
        Ok(spec)
    }

    pub fn with_join(mut self, from: usize, to: usize) -> Result<Self> {
        if to >= from {
            return Err(Error::JoinNotBackward { from, to });
        }
        self.explicit.insert(from, to);
        Ok(self)
    }

    pub fn with_tail(mut self, tail: PeriodicJoins) -> Result<Self> {
        if tail.actions.is_empty() {
            return Err(Error::InvalidInput("periodic join tail needs at least one action".into()));
        }
        for a in tail.actions.iter().flatten() {
            match *a {
                JoinTarget::Class(j) if j >= tail.start => {
                    return Err(Error::JoinNotBackward { from: tail.start, to: j })
                }
                JoinTarget::Back(d) if d == 0 || d > tail.start => {
                    return Err(Error::InvalidInput(format!(
                        "backward join distance {d} must lie in 1..={}",
                        tail.start
                    )))
                }
                _ => {}
            }
        }
        self.tail = Some(tail);
        Ok(self)
    }

    /// Every class with index `>= start` joined into class `target`.
    pub fn all_from(start: usize, target: usize) -> Result<Self> {
        JoinSpec::new().with_tail(PeriodicJoins {
            start,
            actions: vec![Some(JoinTarget::Class(target))],
        })
    }

    /// Where class `k` is merged, if anywhere.
    pub fn target(&self, k: usize) -> Option<usize> {
        if let Some(&j) = self.explicit.get(&k) {
            return Some(j);
        }
        let tail = self.tail.as_ref()?;
        if k < tail.start {
            return None;
        }
        match tail.actions[(k - tail.start) % tail.actions.len()]? {
            JoinTarget::Class(j) => Some(j),
            JoinTarget::Back(d) => Some(k - d),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.tail.is_none()
    }

    /// Index past which every class index is governed only by the tail.
    pub fn horizon(&self) -> usize {
        let e = self.explicit.keys().next_back().map_or(0, |k| k + 1);
        let t = self.tail.as_ref().map_or(0, |t| t.start + t.actions.len());
        e.max(t)
    }

    fn joins_everything_eventually(&self) -> Option<usize> {
        let tail = self.tail.as_ref()?;
        tail.actions.iter().all(Option::is_some).then_some(tail.start)
    }
}

#[derive(Debug)]
struct CoarsenSource {
    base: EqRelStream,
    joins: JoinSpec,
}

impl RepSource for CoarsenSource {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        let base = self.base.reps_prefix(len);
        let mut base_reps: Vec<usize> = Vec::new();
        let mut root: Vec<usize> = Vec::new();
        let mut class_of_rep: HashMap<usize, usize> = HashMap::new();
        let mut out = Vec::with_capacity(len);
        for (x, &r) in base.iter().enumerate() {
            if r == x {
                let k = base_reps.len();
                base_reps.push(x);
                class_of_rep.insert(x, k);
                let rk = self.joins.target(k).map_or(k, |j| root[j]);
                root.push(rk);
            }
            out.push(base_reps[root[class_of_rep[&r]]]);
        }
        out
    }

    fn class_count(&self) -> Option<usize> {
        let kept_below = |bound: usize| (0..bound).filter(|&k| self.joins.target(k).is_none()).count();
        if let Some(c) = self.base.class_count() {
            return Some(kept_below(c));
        }
        self.joins.joins_everything_eventually().map(kept_below)
    }
}

/// Merges class `p_k(E)` into the class of `p_j(E)` for each join `k -> j`.
pub fn coarsen(e: &EqRelStream, joins: &JoinSpec) -> EqRelStream {
    if joins.is_empty() {
        return e.clone();
    }
    EqRelStream::from_source(
        Arc::new(CoarsenSource { base: e.clone(), joins: joins.clone() }),
        Provenance::CoarseningOf(Box::new(e.provenance().clone())),
    )
}

/// `depth_B(a)`: a natural number or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Depth {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(n) => write!(f, "{n}"),
            Depth::Infinite => f.write_str("inf"),
        }
    }
}

/// The least `n` with `a ≤_fin r_n(B)`.
///
/// Domains of the approximations of `B` strictly increase, so at most one
/// `n` has `dom(r_n(B)) = dom(a)`; if that `n` fails, or none exists, the
/// depth is infinite.
pub fn depth(a: &FiniteEqRel, b: &EqRelStream) -> Depth {
    let m = a.domain_size();
    if m == 0 {
        return Depth::Finite(0);
    }
    let Some(n) = b.rep_index(m) else {
        return Depth::Infinite;
    };
    if leq_fin(a, &b.prefix(m)) {
        Depth::Finite(n)
    } else {
        Depth::Infinite
    }
}

/// Outcome of the bounded coarsening test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoarseningCheck {
    /// Every probed level passed.
    Holds,
    /// `r_level(F)` has no `≤_fin`-match among the approximations of `E`.
    FailsAt { level: usize },
}

impl CoarseningCheck {
    pub fn holds(self) -> bool {
        matches!(self, CoarseningCheck::Holds)
    }
}

/// Semi-decision for `F ≤ E`: checks `(∀n ≤ probe_depth)(∃m) r_n(F) ≤_fin r_m(E)`.
///
/// A `FailsAt` answer is a genuine counterexample; `Holds` only speaks for
/// the probed levels. When `F` has finitely many classes, every level it has
/// is probed and the remaining elements are compared on a prefix reaching
/// `p_{probe_depth}(E)`.
pub fn is_coarsening(f: &EqRelStream, e: &EqRelStream, probe_depth: usize) -> CoarseningCheck {
    let mut last = 0;
    for n in 1..=probe_depth {
        let Some(fa) = f.approx(n) else { break };
        last = n;
        let m = fa.domain_size();
        if !e.is_rep(m) || !leq_fin(&fa, &e.prefix(m)) {
            return CoarseningCheck::FailsAt { level: n };
        }
    }
    if last < probe_depth {
        let len = e.rep(probe_depth).unwrap_or(0).max(f.rep(last).unwrap_or(0) + 1);
        if !leq_fin(&f.prefix(len), &e.prefix(len)) {
            return CoarseningCheck::FailsAt { level: last + 1 };
        }
    }
    CoarseningCheck::Holds
}

/// Semi-decision for `A ∈ [a, B]`.
pub fn in_bracket(a: &FiniteEqRel, b: &EqRelStream, big_a: &EqRelStream, probe_depth: usize) -> bool {
    big_a.approx(a.len()).as_ref() == Some(a) && is_coarsening(big_a, b, probe_depth.max(a.len())).holds()
}

/// All coarsenings of `b` on the same domain, in lexicographic order of
/// their representative arrays.
///
/// These are the set partitions of the classes of `b`, so there are
/// `Bell(|b|)` of them.
pub fn coarsenings(b: &FiniteEqRel) -> Vec<FiniteEqRel> {
    let reps = b.reps();
    let idx = b.class_indices();
    let mut out: Vec<FiniteEqRel> = set_partitions(reps.len())
        .into_iter()
        .map(|rgs| {
            let assign = idx.iter().map(|&c| reps[rgs_first(&rgs, rgs[c])]).collect();
            FiniteEqRel::from_assign_unchecked(assign)
        })
        .collect();
    out.sort();
    out
}

fn rgs_first(rgs: &[usize], block: usize) -> usize {
    rgs.iter().position(|&b| b == block).expect("block occurs")
}

/// Restricted growth strings of length `n`, one per set partition of `n` points.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let limit = if cur.is_empty() { 0 } else { max + 1 };
        for b in 0..=limit {
            cur.push(b);
            go(cur, max.max(b), n, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}

/// All equivalence relations on `{0, .., m-1}` in canonical form.
pub fn all_relations(m: usize) -> Vec<FiniteEqRel> {
    set_partitions(m).iter().map(|rgs| FiniteEqRel::canonical_form(rgs)).collect()
}
