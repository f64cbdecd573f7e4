//! Equivalence relations on `ω·l` and on limit ordinals `α = ω·β`, and their
//! transfer from alternating relations on ω.
//!
//! An element of the target is a pair `(n, γ)`: the `n`-th element of the
//! `γ`-th copy of ω. The standard order compares the copy first. The order
//! `≼` used for the alternation pattern has order type ω; every target
//! element has a `≼`-index.

mod bijection;
mod cnf;
mod rigid;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use bijection::{Bijection, ENUMERATION_LIMIT};
pub use cnf::Cnf;
pub use rigid::{eqrel_to_rigid, rigid_to_eqrel, Rigid};

use crate::alternation::{sigma, validate_alternating, validate_class_constraint, ConstraintSeq, Partition};
use crate::eqrel::{coarsen, EqRelStream, JoinSpec, Provenance};
use crate::error::{Error, Result};

/// The `n`-th element of copy `copy`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrdinalElem {
    pub n: usize,
    pub copy: Cnf,
}

impl OrdinalElem {
    pub fn new(n: usize, copy: Cnf) -> Self {
        OrdinalElem { n, copy }
    }
}

/// Standard ordinal order: `ω·copy + n`.
impl Ord for OrdinalElem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.copy.cmp(&other.copy).then(self.n.cmp(&other.n))
    }
}

impl PartialOrd for OrdinalElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for OrdinalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.copy)
    }
}

impl Serialize for OrdinalElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The ordinal the relations live on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    /// `ω·l`, with copies indexed by `0..l`.
    OmegaTimes(usize),
    /// `α = ω·β` with copies indexed through `f : ω → β`.
    Alpha { alpha: Cnf, f: Arc<Bijection> },
}

impl Target {
    /// `α` with the default bijection onto `β = α / ω`.
    pub fn alpha(alpha: Cnf) -> Result<Self> {
        let beta = alpha.divide_by_omega()?;
        Ok(Target::Alpha { alpha, f: Arc::new(Bijection::canonical(beta)?) })
    }

    pub fn alpha_with(alpha: Cnf, f: Bijection) -> Result<Self> {
        let beta = alpha.divide_by_omega()?;
        if *f.beta() != beta {
            return Err(Error::InvalidInput(format!("bijection targets {} but alpha / w = {beta}", f.beta())));
        }
        Ok(Target::Alpha { alpha, f: Arc::new(f) })
    }

    /// The copy identified with block `b` of the partition.
    pub fn copy_of_block(&self, b: usize) -> Cnf {
        match self {
            Target::OmegaTimes(_) => Cnf::nat(b as u64),
            Target::Alpha { f, .. } => f.f(b),
        }
    }

    pub fn block_of_copy(&self, copy: &Cnf) -> Result<usize> {
        match self {
            Target::OmegaTimes(l) => copy
                .as_nat()
                .map(|c| c as usize)
                .filter(|c| c < l)
                .ok_or_else(|| Error::InvalidInput(format!("copy {copy} outside w*{l}"))),
            Target::Alpha { f, .. } => f.f_inverse(copy),
        }
    }

    /// The copy demanded of the `k`-th representative in `≼` order.
    pub fn pattern_copy(&self, k: usize) -> Cnf {
        match self {
            Target::OmegaTimes(l) => Cnf::nat((k % l) as u64),
            Target::Alpha { f, .. } => f.f(sigma(k)),
        }
    }

    /// Position of `e` in the `≼` enumeration.
    pub fn preceq_index(&self, e: &OrdinalElem) -> Result<usize> {
        match self {
            Target::OmegaTimes(l) => {
                let i = self.block_of_copy(&e.copy)?;
                e.n.checked_mul(*l).and_then(|v| v.checked_add(i)).ok_or_else(|| Error::Overflow("index".into()))
            }
            Target::Alpha { .. } => {
                let q = self.block_of_copy(&e.copy)?;
                Partition::Dyadic.element(q, e.n).ok_or_else(|| Error::Overflow(format!("index of {e}")))
            }
        }
    }

    /// The `idx`-th element in `≼` order, written `γ_idx` for `α`.
    pub fn preceq_elem(&self, idx: usize) -> OrdinalElem {
        match self {
            Target::OmegaTimes(l) => OrdinalElem::new(idx / l, Cnf::nat((idx % l) as u64)),
            Target::Alpha { f, .. } => OrdinalElem::new(Partition::Dyadic.rank_of(idx), f.f(sigma(idx))),
        }
    }

    /// The constraint family that makes the transfer preserve minimal representatives.
    pub fn constraint(&self) -> ConstraintSeq {
        match self {
            Target::OmegaTimes(_) => ConstraintSeq::Geq,
            Target::Alpha { f, .. } => build_i(f),
        }
    }

    fn check_partition(&self, p: &Partition) -> Result<()> {
        match (self, p.block_count()) {
            (Target::OmegaTimes(l), Some(b)) if *l == b => Ok(()),
            (Target::Alpha { .. }, None) => Ok(()),
            _ => Err(Error::InvalidInput(format!("partition {p} does not match the target {self}"))),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::OmegaTimes(l) => write!(f, "w*{l}"),
            Target::Alpha { alpha, f: b } => write!(f, "{alpha} (f = {})", b.id()),
        }
    }
}

/// `I_n = {m : f(m) >= f(n)}`.
pub fn build_i(f: &Arc<Bijection>) -> ConstraintSeq {
    ConstraintSeq::FGeq(Arc::clone(f))
}

/// `φ(x) = (ψ(x), θ(x))`, the copy of `θ(x)` taken through the target.
pub fn phi(x: usize, p: &Partition, target: &Target) -> OrdinalElem {
    OrdinalElem::new(p.rank_of(x), target.copy_of_block(p.block_of(x)))
}

pub fn phi_inverse(e: &OrdinalElem, p: &Partition, target: &Target) -> Result<usize> {
    let b = target.block_of_copy(&e.copy)?;
    p.element(b, e.n).ok_or_else(|| Error::Overflow(format!("preimage of {e}")))
}

/// An equivalence relation on the target, stored as its pullback along `φ`.
#[derive(Clone, Debug)]
pub struct OrdinalEqRel {
    backing: EqRelStream,
    partition: Partition,
    target: Target,
}

/// Which of the two membership conditions failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum OrdinalViolation {
    /// `p_k` lies in the wrong copy.
    Pattern { k: usize, rep: OrdinalElem, expected_copy: Cnf },
    /// The `k`-th true minimum differs from the `k`-th `≼`-minimum.
    Minima { k: usize, true_min: OrdinalElem, preceq_min: OrdinalElem },
    /// Fewer than the probed number of classes met the inspection window.
    TooFewClasses { found: usize },
}

impl fmt::Display for OrdinalViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinalViolation::Pattern { k, rep, expected_copy } => {
                write!(f, "(a) fails at k = {k}: p_k = {rep}, expected copy {expected_copy}")
            }
            OrdinalViolation::Minima { k, true_min, preceq_min } => {
                write!(f, "(b) fails at k = {k}: p_k = {true_min} but q_k = {preceq_min}")
            }
            OrdinalViolation::TooFewClasses { found } => write!(f, "only {found} classes in the window"),
        }
    }
}

/// Class minima seen inside a `≼`-initial window of the target.
#[derive(Clone, Debug)]
pub struct WindowMinima {
    /// Number of target elements inspected.
    pub size: usize,
    /// Standard-order minima of the classes met, sorted by `≼`.
    pub true_minima: Vec<OrdinalElem>,
    /// `≼`-minima of the same classes, sorted by `≼`.
    pub preceq_minima: Vec<OrdinalElem>,
}

impl OrdinalEqRel {
    /// The relation whose pullback along `φ` is `backing`. No membership
    /// conditions are checked.
    pub fn from_backing(backing: EqRelStream, partition: Partition, target: Target) -> Result<Self> {
        target.check_partition(&partition)?;
        Ok(OrdinalEqRel { backing, partition, target })
    }

    pub fn backing(&self) -> &EqRelStream {
        &self.backing
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    /// Class label (the pullback's representative) of a target element.
    pub fn class_of(&self, e: &OrdinalElem) -> Result<usize> {
        Ok(self.backing.rep_of(phi_inverse(e, &self.partition, &self.target)?))
    }

    /// Class labels of the first `size` elements in `≼` order.
    pub fn window_labels(&self, size: usize) -> Result<Vec<(OrdinalElem, usize)>> {
        let elems: Vec<OrdinalElem> = (0..size).map(|i| self.target.preceq_elem(i)).collect();
        let xs = elems
            .iter()
            .map(|e| phi_inverse(e, &self.partition, &self.target))
            .collect::<Result<Vec<usize>>>()?;
        let span = xs.iter().max().map_or(0, |m| m + 1);
        let reps = self.backing.reps_prefix(span);
        Ok(elems.into_iter().zip(xs).map(|(e, x)| (e, reps[x])).collect())
    }

    /// Minima of the classes met by the first `size` elements in `≼` order.
    ///
    /// `≼`-minima are exact. True minima are exact only when no element
    /// beyond the window is smaller in the standard order, so they are a
    /// bounded check.
    pub fn window_minima(&self, size: usize) -> Result<WindowMinima> {
        let labels = self.window_labels(size)?;
        let mut order: Vec<usize> = Vec::new();
        let mut first: HashMap<usize, (usize, OrdinalElem)> = HashMap::new();
        let mut least: HashMap<usize, (usize, OrdinalElem)> = HashMap::new();
        for (idx, (e, label)) in labels.into_iter().enumerate() {
            if let std::collections::hash_map::Entry::Vacant(slot) = first.entry(label) {
                order.push(label);
                slot.insert((idx, e.clone()));
                least.insert(label, (idx, e));
            } else if let Some(slot) = least.get_mut(&label) {
                if e < slot.1 {
                    *slot = (idx, e);
                }
            }
        }
        let preceq_minima = order.iter().map(|l| first[l].1.clone()).collect();
        let mut true_minima: Vec<(usize, OrdinalElem)> = order.iter().map(|l| least[l].clone()).collect();
        true_minima.sort_by_key(|t| t.0);
        Ok(WindowMinima { size, true_minima: true_minima.into_iter().map(|t| t.1).collect(), preceq_minima })
    }

    /// A window wide enough to contain the first `depth + 1` `≼`-minima, with slack.
    pub fn default_window(&self, depth: usize) -> Result<usize> {
        let reps = self.backing.reps(depth + 1);
        let mut widest = 0;
        for &x in &reps {
            let e = phi(x, &self.partition, &self.target);
            widest = widest.max(self.target.preceq_index(&e)?);
        }
        Ok((4 * (widest + 1)).max(64))
    }
}

/// Checks both membership conditions for `k < depth` on a bounded window.
pub fn validate_ordinal_space(r: &OrdinalEqRel, depth: usize) -> std::result::Result<(), OrdinalViolation> {
    let size = r.default_window(depth).map_err(|_| OrdinalViolation::TooFewClasses { found: 0 })?;
    let w = r.window_minima(size).map_err(|_| OrdinalViolation::TooFewClasses { found: 0 })?;
    for k in 0..depth {
        let (Some(p), Some(q)) = (w.true_minima.get(k), w.preceq_minima.get(k)) else {
            return Err(OrdinalViolation::TooFewClasses { found: w.preceq_minima.len() });
        };
        if p != q {
            return Err(OrdinalViolation::Minima { k, true_min: p.clone(), preceq_min: q.clone() });
        }
        let expected_copy = r.target.pattern_copy(k);
        if p.copy != expected_copy {
            return Err(OrdinalViolation::Pattern { k, rep: p.clone(), expected_copy });
        }
    }
    Ok(())
}

/// `Φ(E)`: validates `E` in the matching space on ω, then carries it over.
pub fn transfer(e: &EqRelStream, p: &Partition, target: &Target, depth: usize) -> Result<OrdinalEqRel> {
    target.check_partition(p)?;
    validate_alternating(e, p, depth).map_err(|v| Error::Validation(v.to_string()))?;
    validate_class_constraint(e, p, &target.constraint(), depth).map_err(|v| Error::Validation(v.to_string()))?;
    OrdinalEqRel::from_backing(e.clone(), p.clone(), target.clone())
}

/// `Φ^{-1}`: validates the ordinal relation, then returns its pullback.
pub fn transfer_inverse(r: &OrdinalEqRel, depth: usize) -> Result<EqRelStream> {
    validate_ordinal_space(r, depth).map_err(|v| Error::Validation(v.to_string()))?;
    Ok(EqRelStream::from_source(
        Arc::new(Pullback(r.backing.clone())),
        Provenance::Ordinal(format!("pullback from {}", r.target)),
    ))
}

#[derive(Debug)]
struct Pullback(EqRelStream);

impl crate::eqrel::RepSource for Pullback {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        self.0.reps_prefix(len)
    }

    fn class_count(&self) -> Option<usize> {
        self.0.class_count()
    }
}

/// `π`: every class whose `≼`-minimal representative is `p_n` with `n >= k`
/// merges into the class of the least element.
///
/// Requires a partition under which `φ` is `≼`-monotone (`mod:l` or
/// `dyadic`), so the pullback's class order is the `≼` order.
pub fn project_k(r: &OrdinalEqRel, k: usize) -> Result<OrdinalEqRel> {
    if k == 0 {
        return Err(Error::InvalidInput("projection needs k >= 1".into()));
    }
    let monotone = match &r.partition {
        Partition::Dyadic => true,
        Partition::Periodic(p) => p.iter().enumerate().all(|(i, &b)| i == b),
    };
    if !monotone {
        return Err(Error::InvalidInput(format!("projection needs mod:l or dyadic, got {}", r.partition)));
    }
    let merged = coarsen(&r.backing, &JoinSpec::all_from(k, 0)?);
    OrdinalEqRel::from_backing(merged, r.partition.clone(), r.target.clone())
}

/// Whether `Φ(F) ≤ Φ(E)` on the first `size` target elements in `≼` order,
/// computed from the target side.
pub fn coarser_on_window(f: &OrdinalEqRel, e: &OrdinalEqRel, size: usize) -> Result<bool> {
    let fl = f.window_labels(size)?;
    let el = e.window_labels(size)?;
    let mut image: HashMap<usize, usize> = HashMap::new();
    for ((_, fc), (_, ec)) in fl.iter().zip(&el) {
        if *image.entry(*ec).or_insert(*fc) != *fc {
            return Ok(false);
        }
    }
    Ok(true)
}
