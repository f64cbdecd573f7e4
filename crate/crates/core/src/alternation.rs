//! Partitions of ω, the ruler sequence, and the alternation validators.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eqrel::{EqRelStream, FiniteEqRel, Provenance, RepSource};
use crate::error::{Error, Result};
use crate::ordinal::Bijection;
use crate::rng;
use rand::{Rng as _, RngCore};

/// The 2-adic valuation of `k + 1` (OEIS A007814).
pub fn sigma(k: usize) -> usize {
    (k + 1).trailing_zeros() as usize
}

/// A partition of ω into infinite blocks `P_0, P_1, ...` with increasing minima.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Partition {
    /// `θ(x) = pattern[x mod pattern.len()]`; finitely many blocks.
    Periodic(Vec<usize>),
    /// `P_q = {x : σ(x) = q}`; infinitely many blocks.
    Dyadic,
}

impl Partition {
    /// Residues modulo `l`: `P_i = {x : x ≡ i mod l}`.
    pub fn residue(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidInput("a residue partition needs l >= 1".into()));
        }
        Ok(Partition::Periodic((0..l).collect()))
    }

    /// A periodic partition; each block must occur and blocks must first
    /// appear in increasing order.
    pub fn periodic(pattern: Vec<usize>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidInput("empty partition pattern".into()));
        }
        let mut next = 0;
        for &b in &pattern {
            if b > next {
                return Err(Error::InvalidInput(format!(
                    "block {b} appears before block {next} in the pattern"
                )));
            }
            if b == next {
                next += 1;
            }
        }
        Ok(Partition::Periodic(pattern))
    }

    /// `Some(l)` for a finite partition into `l` blocks.
    pub fn block_count(&self) -> Option<usize> {
        match self {
            Partition::Periodic(p) => Some(p.iter().max().map_or(0, |m| m + 1)),
            Partition::Dyadic => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.block_count().is_some()
    }

    /// `θ(x)`: the block containing `x`.
    pub fn block_of(&self, x: usize) -> usize {
        match self {
            Partition::Periodic(p) => p[x % p.len()],
            Partition::Dyadic => sigma(x),
        }
    }

    /// `ψ(x)`: the rank of `x` inside its block.
    pub fn rank_of(&self, x: usize) -> usize {
        match self {
            Partition::Periodic(p) => {
                let b = p[x % p.len()];
                let per = p.iter().filter(|&&c| c == b).count();
                let before = p[..x % p.len()].iter().filter(|&&c| c == b).count();
                (x / p.len()) * per + before
            }
            Partition::Dyadic => (x + 1) >> (sigma(x) + 1),
        }
    }

    /// The `rank`-th element of block `block`.
    pub fn element(&self, block: usize, rank: usize) -> Option<usize> {
        match self {
            Partition::Periodic(p) => {
                let positions: Vec<usize> =
                    p.iter().enumerate().filter(|&(_, &c)| c == block).map(|(i, _)| i).collect();
                if positions.is_empty() {
                    return None;
                }
                let period = (rank / positions.len()).checked_mul(p.len())?;
                period.checked_add(positions[rank % positions.len()])
            }
            Partition::Dyadic => {
                let odd = rank.checked_mul(2)?.checked_add(1)?;
                let shifted = odd.checked_shl(u32::try_from(block).ok()?)?;
                (shifted >> block == odd).then(|| shifted - 1)
            }
        }
    }

    /// The block demanded of the `k`-th minimal representative.
    pub fn pattern_block(&self, k: usize) -> usize {
        match self {
            Partition::Periodic(_) => k % self.block_count().unwrap_or(1),
            Partition::Dyadic => sigma(k),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::Dyadic => f.write_str("dyadic"),
            Partition::Periodic(p) if p.iter().enumerate().all(|(i, &b)| i == b) => {
                write!(f, "mod:{}", p.len())
            }
            Partition::Periodic(p) => {
                let parts: Vec<String> = p.iter().map(ToString::to_string).collect();
                write!(f, "periodic:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "dyadic" {
            return Ok(Partition::Dyadic);
        }
        if let Some(l) = s.strip_prefix("mod:") {
            let l = l.parse().map_err(|e| Error::Parse(format!("partition {s:?}: {e}")))?;
            return Partition::residue(l);
        }
        if let Some(rest) = s.strip_prefix("periodic:") {
            let pattern = rest
                .split(',')
                .map(|t| t.trim().parse().map_err(|e| Error::Parse(format!("partition {s:?}: {e}"))))
                .collect::<Result<Vec<usize>>>()?;
            return Partition::periodic(pattern);
        }
        Err(Error::Parse(format!("unknown partition spec {s:?}; expected mod:<l>, dyadic or periodic:<list>")))
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A family `(I_n)` restricting which blocks a `P_n`-class may contain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintSeq {
    /// No restriction.
    All,
    /// `I_n = {m : m >= n}`.
    Geq,
    /// `I_n = {m : f(m) >= f(n)}`.
    FGeq(Arc<Bijection>),
}

impl ConstraintSeq {
    /// Whether an element of block `elem_block` may sit in a class whose
    /// representative lies in block `rep_block`.
    pub fn permits(&self, rep_block: usize, elem_block: usize) -> bool {
        match self {
            ConstraintSeq::All => true,
            ConstraintSeq::Geq => elem_block >= rep_block,
            ConstraintSeq::FGeq(f) => f.compare(elem_block, rep_block).is_ge(),
        }
    }

    /// Membership `m ∈ I_n`.
    pub fn contains(&self, n: usize, m: usize) -> bool {
        self.permits(n, m)
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, ConstraintSeq::All)
    }

    /// Parses `all`, `geq`, or `f-geq:<id>` where the bijection is resolved
    /// by the caller-supplied lookup.
    pub fn parse_with(s: &str, lookup: impl FnOnce(&str) -> Result<Bijection>) -> Result<Self> {
        match s.trim() {
            "all" | "none" => Ok(ConstraintSeq::All),
            "geq" => Ok(ConstraintSeq::Geq),
            other => match other.strip_prefix("f-geq:") {
                Some(id) => Ok(ConstraintSeq::FGeq(Arc::new(lookup(id)?))),
                None => Err(Error::Parse(format!(
                    "unknown constraint {other:?}; expected geq, f-geq:<id> or all"
                ))),
            },
        }
    }
}

impl fmt::Display for ConstraintSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSeq::All => f.write_str("all"),
            ConstraintSeq::Geq => f.write_str("geq"),
            ConstraintSeq::FGeq(b) => write!(f, "f-geq:{}", b.id()),
        }
    }
}

/// A failed alternation check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlternationViolation {
    /// `p_k` lies in the wrong block.
    WrongBlock { k: usize, rep: usize, expected: usize, actual: usize },
    /// The relation ran out of classes (or past the search limit) before `p_k`.
    MissingRep { k: usize },
}

impl fmt::Display for AlternationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlternationViolation::WrongBlock { k, rep, expected, actual } => write!(
                f,
                "p_{k} = {rep} lies in block {actual}, expected block {expected}"
            ),
            AlternationViolation::MissingRep { k } => write!(f, "p_{k} does not exist"),
        }
    }
}

/// Checks that `p_k(E)` lies in the demanded block for every `k < depth`.
pub fn validate_alternating(
    e: &EqRelStream,
    p: &Partition,
    depth: usize,
) -> std::result::Result<(), AlternationViolation> {
    let reps = e.reps(depth);
    validate_rep_pattern(&reps, p)?;
    if reps.len() < depth {
        return Err(AlternationViolation::MissingRep { k: reps.len() });
    }
    Ok(())
}

/// Alternation check on an explicit representative sequence.
pub fn validate_rep_pattern(reps: &[usize], p: &Partition) -> std::result::Result<(), AlternationViolation> {
    for (k, &rep) in reps.iter().enumerate() {
        let (expected, actual) = (p.pattern_block(k), p.block_of(rep));
        if expected != actual {
            return Err(AlternationViolation::WrongBlock { k, rep, expected, actual });
        }
    }
    Ok(())
}

/// An element sitting in a class its block is not allowed in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassViolation {
    pub element: usize,
    pub element_block: usize,
    pub rep: usize,
    pub rep_block: usize,
}

impl fmt::Display for ClassViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "element {} (block {}) lies in the class of {} (block {})",
            self.element, self.element_block, self.rep, self.rep_block
        )
    }
}

/// Checks the class condition on every element of `dom(r_depth(E))`; when
/// `E` has fewer than `depth` classes, on the first `depth` elements.
pub fn validate_class_constraint(
    e: &EqRelStream,
    p: &Partition,
    constraint: &ConstraintSeq,
    depth: usize,
) -> std::result::Result<(), ClassViolation> {
    if constraint.is_unconstrained() {
        return Ok(());
    }
    let bound = e.rep(depth).unwrap_or(depth);
    validate_class_constraint_finite(&e.prefix(bound), p, constraint)
}

/// Class condition on a finite relation.
pub fn validate_class_constraint_finite(
    a: &FiniteEqRel,
    p: &Partition,
    constraint: &ConstraintSeq,
) -> std::result::Result<(), ClassViolation> {
    for (x, &r) in a.assign().iter().enumerate() {
        let (eb, rb) = (p.block_of(x), p.block_of(r));
        if !constraint.permits(rb, eb) {
            return Err(ClassViolation { element: x, element_block: eb, rep: r, rep_block: rb });
        }
    }
    Ok(())
}

/// Whether `a` is an approximation of some member of the space: its
/// representatives follow the pattern and its classes obey the constraint.
pub fn is_valid_approximation(a: &FiniteEqRel, p: &Partition, constraint: &ConstraintSeq) -> bool {
    validate_rep_pattern(&a.reps(), p).is_ok()
        && validate_class_constraint_finite(a, p, constraint).is_ok()
        && p.block_of(a.domain_size()) == p.pattern_block(a.len())
}

#[derive(Debug)]
struct GreedySource {
    /// Classes of the base relation are kept or merged as units; `None`
    /// stands for the identity relation.
    base: Option<EqRelStream>,
    partition: Partition,
    constraint: ConstraintSeq,
    rng: Option<RandomJoins>,
}

#[derive(Debug, Clone, Copy)]
struct RandomJoins {
    seed: u64,
    /// Probability, scaled to `u32::MAX`, that an eligible element starts a new class.
    keep: u32,
}

impl RepSource for GreedySource {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(len);
        let mut reps: Vec<usize> = Vec::new();
        let mut rng = self.rng.map(|r| rng::seeded(r.seed));
        let base = self.base.as_ref().map(|b| b.reps_prefix(len));
        for x in 0..len {
            if let Some(r) = base.as_ref().map(|b| b[x]).filter(|&r| r != x) {
                let target = out[r];
                out.push(target);
                continue;
            }
            let b = self.partition.block_of(x);
            let k = reps.len();
            let eligible = b == self.partition.pattern_block(k);
            let new_class = match (&mut rng, self.rng) {
                (Some(g), Some(r)) => eligible && (k == 0 || g.next_u32() <= r.keep),
                _ => eligible,
            };
            if new_class {
                reps.push(x);
                out.push(x);
                continue;
            }
            let permitted = |&r: &usize| self.constraint.permits(self.partition.block_of(r), b);
            let target = match &mut rng {
                Some(g) if !reps.is_empty() => {
                    let pick = reps[g.gen_range(0..reps.len())];
                    if permitted(&pick) {
                        Some(pick)
                    } else {
                        reps.iter().copied().find(|r| permitted(r))
                    }
                }
                _ => reps.iter().copied().find(|r| permitted(r)),
            };
            // Class 0 lies in block 0, which every supported constraint admits.
            out.push(target.unwrap_or(0));
        }
        out
    }
}

fn check_absorbing(p: &Partition, constraint: &ConstraintSeq) -> Result<()> {
    if let ConstraintSeq::FGeq(f) = constraint {
        if !f.fixes_zero() {
            return Err(Error::InvalidInput("f-geq constraint needs f(0) = 0".into()));
        }
    }
    if p.block_of(0) != 0 {
        return Err(Error::InvalidInput("block 0 must contain 0".into()));
    }
    Ok(())
}

/// The greedy member of the space: every element landing in the block
/// demanded for the next representative starts a class, all others join the
/// class of `p_0`.
pub fn canonical_finest(p: &Partition, constraint: &ConstraintSeq) -> Result<EqRelStream> {
    check_absorbing(p, constraint)?;
    Ok(EqRelStream::from_source(
        Arc::new(GreedySource { base: None, partition: p.clone(), constraint: constraint.clone(), rng: None }),
        Provenance::PatternCanonical { partition: p.to_string(), constraint: constraint.to_string() },
    ))
}

/// A seeded random member of the space. Each element in the demanded block
/// starts a new class with probability `keep`; every other element joins a
/// random earlier class that admits it.
pub fn random_alternating(p: &Partition, constraint: &ConstraintSeq, seed: u64, keep: f64) -> Result<EqRelStream> {
    check_absorbing(p, constraint)?;
    if !(keep > 0.0 && keep <= 1.0) {
        return Err(Error::InvalidInput(format!("keep probability {keep} must lie in (0, 1]")));
    }
    let keep = (keep * f64::from(u32::MAX)) as u32;
    Ok(EqRelStream::from_source(
        Arc::new(GreedySource {
            base: None,
            partition: p.clone(),
            constraint: constraint.clone(),
            rng: Some(RandomJoins { seed, keep }),
        }),
        Provenance::PatternRandom { partition: p.to_string(), constraint: constraint.to_string(), seed },
    ))
}

/// A seeded random coarsening of `e` inside the space. Classes of `e` are
/// scanned in order; a class whose representative lies in the block demanded
/// for the next index is kept with probability `keep`, otherwise it merges
/// into a random earlier class that admits it.
///
/// `e` itself must be a member of the space.
pub fn random_coarsening(
    e: &EqRelStream,
    p: &Partition,
    constraint: &ConstraintSeq,
    seed: u64,
    keep: f64,
) -> Result<EqRelStream> {
    check_absorbing(p, constraint)?;
    if !(keep > 0.0 && keep <= 1.0) {
        return Err(Error::InvalidInput(format!("keep probability {keep} must lie in (0, 1]")));
    }
    let keep = (keep * f64::from(u32::MAX)) as u32;
    Ok(EqRelStream::from_source(
        Arc::new(GreedySource {
            base: Some(e.clone()),
            partition: p.clone(),
            constraint: constraint.clone(),
            rng: Some(RandomJoins { seed, keep }),
        }),
        Provenance::CoarseningOf(Box::new(e.provenance().clone())),
    ))
}

#[derive(Debug)]
struct AmalgamSource {
    head: FiniteEqRel,
    base: EqRelStream,
    partition: Partition,
}

impl RepSource for AmalgamSource {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        let m = self.head.domain_size();
        let base = self.base.reps_prefix(len.max(m));
        let mut out: Vec<usize> = self.head.assign().iter().copied().take(len).collect();
        let mut next_index = self.head.len();
        // Base representatives map to the representative of their new class.
        let mut image: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
        for (x, &r) in base.iter().enumerate().take(len).skip(m) {
            let target = if r < m {
                self.head.rep_of(r)
            } else if r == x {
                if self.partition.block_of(x) == self.partition.pattern_block(next_index) {
                    next_index += 1;
                    image.insert(x, x);
                    x
                } else {
                    image.insert(x, 0);
                    0
                }
            } else {
                image[&r]
            };
            out.push(target);
        }
        out
    }
}

/// Glues `head` (an approximation coarser than `r_d(base)` on the same
/// domain) to the classes of `base` beyond its domain. Classes of `base`
/// whose representative falls out of pattern are absorbed into class 0.
pub fn amalgamate(head: &FiniteEqRel, base: &EqRelStream, p: &Partition) -> Result<EqRelStream> {
    let m = head.domain_size();
    if m > 0 && !base.is_rep(m) {
        return Err(Error::InvalidInput(format!("{m} is not a representative of the base relation")));
    }
    if !crate::eqrel::leq_fin(head, &base.prefix(m)) {
        return Err(Error::InvalidInput("head is not coarser than the base on its domain".into()));
    }
    Ok(EqRelStream::from_source(
        Arc::new(AmalgamSource { head: head.clone(), base: base.clone(), partition: p.clone() }),
        Provenance::Amalgam(Box::new(base.provenance().clone())),
    ))
}
