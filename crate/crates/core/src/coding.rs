//! Codings between end-extensions `b ∈ r_{n+1}[a, E]` and words, and the
//! construction of the coarsening `F` from a Hales–Jewett certificate.
//!
//! Every end-extension of `a = r_n(E)` is determined by the list of targets
//! `k ≤ n` to which the classes `p_{n+1}(E), p_{n+2}(E), ...` are joined. A
//! word spells that list out: each letter is a tuple of consecutive targets.
//! For a finite partition into `l` blocks the letters are `l`-tuples; for the
//! dyadic partition they are `t_j`-tuples for the widths `t_j` of the graded
//! alphabet.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::alternation::{
    validate_alternating, validate_class_constraint, validate_class_constraint_finite, amalgamate, ConstraintSeq,
    Partition,
};
use crate::eqrel::{leq_fin, EqRelStream, FiniteEqRel, Provenance, RepSource};
use crate::error::{Error, Result};
use crate::words::{Alphabet, Letter, LetterSet, Symbol, Word};

/// Representatives beyond `n` inspected when validating the input relation.
const PROBE: usize = 48;

/// Fixed data for coding the end-extensions of `r_n(E)`.
#[derive(Clone, Debug)]
pub struct CodingContext {
    e: EqRelStream,
    partition: Partition,
    constraint: ConstraintSeq,
    n: usize,
    a: FiniteEqRel,
    /// `l` for a finite partition, `t_0` for the dyadic one.
    width: usize,
}

/// The scalar words produced from a certificate, with the offset of every
/// variable inside its block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub u0: Word,
    pub ys: Vec<Word>,
    /// For each `y_i`, the offset of `v` within the block that replaced each
    /// variable of `x_i`.
    pub var_offsets: Vec<Vec<usize>>,
}

impl Expansion {
    /// `u0⌢y_0⌢y_1⌢...`.
    pub fn joined(&self) -> Word {
        self.ys.iter().fold(self.u0.clone(), |acc, y| acc.concat(y))
    }
}

/// One end-extension of `a` inside `F`, given by the targets of the first
/// `choice.len()` classes of `F` beyond `p_n(F)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FExtension {
    pub choice: Vec<usize>,
    pub b: FiniteEqRel,
}

impl CodingContext {
    /// Checks that `E` is alternating (and obeys the constraint) on a probe
    /// prefix and fixes `a = r_n(E)`.
    pub fn new(e: EqRelStream, partition: Partition, constraint: ConstraintSeq, n: usize) -> Result<Self> {
        validate_alternating(&e, &partition, n + PROBE)
            .map_err(|v| Error::Validation(format!("E is not alternating: {v}")))?;
        validate_class_constraint(&e, &partition, &constraint, n + PROBE)
            .map_err(|v| Error::Validation(format!("E violates the class constraint: {v}")))?;
        let a = e.approx(n).ok_or_else(|| Error::InvalidInput(format!("E has no representative p_{n}")))?;
        let width = match partition.block_count() {
            Some(l) => l,
            None => 1usize << (partition.pattern_block(n + 1) + 1),
        };
        Ok(CodingContext { e, partition, constraint, n, a, width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &FiniteEqRel {
        &self.a
    }

    pub fn e(&self) -> &EqRelStream {
        &self.e
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn constraint(&self) -> &ConstraintSeq {
        &self.constraint
    }

    pub fn is_finite(&self) -> bool {
        self.partition.is_finite()
    }

    /// Number of representatives coded by one letter of the base alphabet.
    pub fn block_width(&self) -> usize {
        self.width
    }

    /// `q = σ(n+1)`, the block of every admissible new domain bound.
    pub fn q(&self) -> usize {
        self.partition.pattern_block(self.n + 1)
    }

    /// `q_i`: the block demanded of `p_{n+1+i}(E)`.
    pub fn q_seq(&self, len: usize) -> Vec<usize> {
        (0..len).map(|i| self.partition.pattern_block(self.n + 1 + i)).collect()
    }

    /// `t_0 = 2^{q_0+1}`, `t_i = t_{i-1}·2^{q_i+1}`.
    pub fn t_seq(&self, len: usize) -> Result<Vec<usize>> {
        if self.is_finite() {
            return Err(Error::InvalidInput("the t-grading belongs to the dyadic partition".into()));
        }
        let mut out = Vec::with_capacity(len);
        let mut t: usize = 1;
        for q in self.q_seq(len) {
            t = u32::try_from(q + 1)
                .ok()
                .and_then(|s| 1usize.checked_shl(s))
                .and_then(|f| t.checked_mul(f))
                .ok_or_else(|| Error::Overflow(format!("t_{} does not fit in a machine word", out.len())))?;
            out.push(t);
        }
        Ok(out)
    }

    /// `(n+1)^l`, or the graded chain `L_0 ⊆ ... ⊆ L_{levels-1}` with
    /// `L_i = L_{i-1} ∪ (n+1)^{t_i}`.
    pub fn alphabet(&self, levels: usize) -> Result<Alphabet> {
        let base = u32::try_from(self.n + 1).map_err(|_| Error::Overflow("alphabet base".into()))?;
        if self.is_finite() {
            return Ok(Alphabet::Finite(LetterSet::Tuples { base, arity: self.width }));
        }
        let parts = self.t_seq(levels.max(1))?.into_iter().map(|t| LetterSet::Tuples { base, arity: t }).collect();
        Ok(Alphabet::Graded(parts))
    }

    /// Whether `p_{n+1+pos}(E)` may be joined to `p_k(E)` under the constraint.
    pub fn can_join(&self, pos: usize, k: usize) -> bool {
        self.constraint.permits(self.partition.pattern_block(k), self.partition.pattern_block(self.n + 1 + pos))
    }

    fn check_letter(&self, l: &Letter) -> Result<()> {
        let arity_ok = if self.is_finite() {
            l.arity() == self.width
        } else {
            let mut i = 0;
            loop {
                let t = self.t_seq(i + 1)?[i];
                if t >= l.arity() {
                    break t == l.arity();
                }
                i += 1;
            }
        };
        if !arity_ok || l.coords().iter().any(|&c| c as usize > self.n) {
            return Err(Error::LetterOutsideAlphabet(l.to_string()));
        }
        Ok(())
    }

    /// `z_l`: a letter of width `t_j = t_0·m_j` cut into `m_j` letters of `L_0`.
    pub fn flatten_letter(&self, l: &Letter) -> Result<Word> {
        if l.arity() == 0 || !l.arity().is_multiple_of(self.width) {
            return Err(Error::InvalidInput(format!(
                "letter {l} has arity {}, not a multiple of {}",
                l.arity(),
                self.width
            )));
        }
        Ok(Word::from_letters(l.coords().chunks(self.width).map(|c| Letter(c.to_vec()))))
    }

    /// The targets spelled by a variable-free word, after the legality rewrite.
    fn targets(&self, w: &Word) -> Result<Vec<usize>> {
        let letters = w.letters().ok_or_else(|| Error::InvalidInput(format!("{w} contains the variable")))?;
        let mut out = Vec::new();
        for l in letters {
            self.check_letter(l)?;
            out.extend(l.coords().iter().map(|&c| c as usize));
        }
        for (pos, k) in out.iter_mut().enumerate() {
            if !self.can_join(pos, *k) {
                *k = 0;
            }
        }
        Ok(out)
    }

    /// `w̃`: every coordinate naming an illegal join becomes 0. A variable
    /// counts as one block of the base width.
    pub fn tilde_reduce(&self, w: &Word) -> Word {
        let mut pos = 0;
        let syms = w
            .symbols()
            .iter()
            .map(|s| match s {
                Symbol::Var => {
                    pos += self.width;
                    Symbol::Var
                }
                Symbol::Letter(l) => {
                    let coords = l
                        .coords()
                        .iter()
                        .map(|&k| {
                            let keep = self.can_join(pos, k as usize);
                            pos += 1;
                            if keep {
                                k
                            } else {
                                0
                            }
                        })
                        .collect();
                    Symbol::Letter(Letter(coords))
                }
            })
            .collect();
        Word(syms)
    }

    /// `b(w)`.
    pub fn decode_word(&self, w: &Word) -> Result<FiniteEqRel> {
        self.relation_from_labels(&self.targets(w)?)
    }

    /// `w^b`, as a word over the base alphabet.
    pub fn encode_extension(&self, b: &FiniteEqRel) -> Result<Word> {
        let not_ext = |why: &str| Error::NotEndExtension(format!("{b}: {why}"));
        let dom = b.domain_size();
        let m = self.e.rep_index(dom).ok_or_else(|| not_ext("domain is not bounded by a representative of E"))?;
        if m <= self.n {
            return Err(not_ext("domain does not reach p_n(E)"));
        }
        if !leq_fin(b, &self.e.prefix(dom)) {
            return Err(not_ext("not coarser than E"));
        }
        let reps = self.e.reps(m + 1);
        if b.reps() != reps[..=self.n] {
            return Err(not_ext("representatives differ from p_0(E), .., p_n(E)"));
        }
        if b.restrict(self.a.domain_size()).as_ref() != Some(&self.a) {
            return Err(not_ext("does not extend a"));
        }
        if validate_class_constraint_finite(b, &self.partition, &self.constraint).is_err() {
            return Err(not_ext("violates the class constraint"));
        }
        let joined = m - self.n - 1;
        if !joined.is_multiple_of(self.width) {
            return Err(not_ext(&format!("{joined} joined classes is not a multiple of {}", self.width)));
        }
        let index: HashMap<usize, u32> = reps[..=self.n].iter().enumerate().map(|(i, &r)| (r, i as u32)).collect();
        let coords: Vec<u32> = reps[self.n + 1..m].iter().map(|&r| index[&b.rep_of(r)]).collect();
        Ok(Word::from_letters(coords.chunks(self.width).map(|c| Letter(c.to_vec()))))
    }

    /// Width of the block replacing a variable of `x_i`.
    fn var_width(&self, i: usize) -> Result<usize> {
        if self.is_finite() {
            Ok(self.width)
        } else {
            Ok(self.t_seq(i + 1)?[i])
        }
    }

    /// Offset of `v` in the block replacing a variable of `x_i` whose block
    /// starts at absolute place `start` of `y`.
    fn var_offset(&self, i: usize, start: usize, block: usize) -> Result<usize> {
        if self.is_finite() {
            return Ok(i % self.width);
        }
        let qi = self.partition.pattern_block(self.n + 1 + i);
        (0..block).find(|&nn| self.partition.pattern_block(self.n + 1 + start + nn) == qi).ok_or_else(|| {
            Error::Invariant(format!("no place for the variable of x_{i} in [{start}, {})", start + block))
        })
    }

    /// `u0` and `y_0, y_1, ...` over `{0, .., n} ∪ {v}`.
    pub fn expand_certificate(&self, w0: &Word, xs: &[Word]) -> Result<Expansion> {
        let letters = w0.letters().ok_or_else(|| Error::InvalidInput("w0 must be variable-free".into()))?;
        let mut u0 = Word::empty();
        for l in letters {
            self.check_letter(l)?;
            u0.0.extend(l.coords().iter().map(|&c| Symbol::Letter(Letter::scalar(c))));
        }
        let mut pos = u0.len();
        let mut ys = Vec::with_capacity(xs.len());
        let mut var_offsets = Vec::with_capacity(xs.len());
        for (i, x) in xs.iter().enumerate() {
            if !x.is_left_variable() {
                return Err(Error::InvalidInput(format!("x_{i} = {x} is not left-variable")));
            }
            let block = self.var_width(i)?;
            let mut y = Word::empty();
            let mut offsets = Vec::new();
            for s in x.symbols() {
                match s {
                    Symbol::Letter(l) => {
                        self.check_letter(l)?;
                        y.0.extend(l.coords().iter().map(|&c| Symbol::Letter(Letter::scalar(c))));
                    }
                    Symbol::Var => {
                        let nn = self.var_offset(i, pos + y.len(), block)?;
                        offsets.push(nn);
                        y.0.extend((0..block).map(|j| if j == nn { Symbol::Var } else { Symbol::Letter(Letter::scalar(0)) }));
                    }
                }
            }
            pos += y.len();
            ys.push(y);
            var_offsets.push(offsets);
        }
        Ok(Expansion { u0, ys, var_offsets })
    }

    /// The coarsening `F ≤ E` read off `u0⌢y_0⌢...`, with illegal letters
    /// rewritten to 0 and the canonical pattern tail past the truncation.
    pub fn build_f(&self, exp: &Expansion) -> Result<EqRelStream> {
        if exp.ys.is_empty() {
            return Err(Error::InvalidInput("the certificate needs at least one variable word".into()));
        }
        let mut targets: Vec<usize> = Vec::new();
        let mut pos = 0;
        let scalar = |s: &Symbol, pos: usize, label: usize| -> Result<usize> {
            match s {
                Symbol::Var => Ok(label),
                Symbol::Letter(l) => {
                    let k = l.coords()[0] as usize;
                    if l.arity() != 1 || k > self.n {
                        return Err(Error::LetterOutsideAlphabet(l.to_string()));
                    }
                    Ok(if self.can_join(pos, k) { k } else { 0 })
                }
            }
        };
        for s in exp.u0.symbols() {
            if *s == Symbol::Var {
                return Err(Error::InvalidInput("u0 must be variable-free".into()));
            }
            targets.push(scalar(s, pos, 0)?);
            pos += 1;
        }
        for (j, y) in exp.ys.iter().enumerate() {
            let first = y
                .symbols()
                .iter()
                .position(|s| *s == Symbol::Var)
                .ok_or_else(|| Error::InvalidInput(format!("y_{j} has no variable")))?;
            let label = self.n + 1 + pos + first;
            for s in y.symbols() {
                targets.push(scalar(s, pos, label)?);
                pos += 1;
            }
        }
        let head = self.relation_from_labels(&targets)?;
        let truncated_at = head.domain_size();
        let inner = amalgamate(&head, &self.e, &self.partition)?;
        Ok(EqRelStream::from_source(Arc::new(CertificateSource { inner }), Provenance::WordDefined { truncated_at }))
    }

    /// The relation on `p_{n+1+labels.len()}(E)` putting `p_{n+1+i}(E)` in
    /// the class of `p_k(E)` for a label `k ≤ n`; larger labels name new classes.
    fn relation_from_labels(&self, labels_of_index: &[usize]) -> Result<FiniteEqRel> {
        let m = self.n + 1 + labels_of_index.len();
        let reps = self.e.reps(m + 1);
        if reps.len() <= m {
            return Err(Error::LimitExceeded(format!("p_{m}(E) is beyond the search limit")));
        }
        let assign = self.e.reps_prefix(reps[m]);
        let index: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let labels: Vec<usize> = assign
            .iter()
            .map(|r| {
                let idx = index[r];
                if idx <= self.n {
                    idx
                } else {
                    labels_of_index[idx - self.n - 1]
                }
            })
            .collect();
        Ok(FiniteEqRel::canonical_form(&labels))
    }

    /// Whether `K` classes of `F` beyond `p_n(F)` can be consumed by an
    /// end-extension, i.e. `p_{n+1+K}` lies in the block demanded of `p_{n+1}`.
    pub fn admissible_count(&self, k: usize) -> bool {
        self.partition.pattern_block(self.n + 1 + k) == self.q()
    }

    /// All end-extensions of `a` inside `F` joining at most `max_classes`
    /// classes of `F`, with only legal joins.
    pub fn f_extensions(&self, f: &EqRelStream, max_classes: usize) -> Result<Vec<FExtension>> {
        let count = self.n + 2 + max_classes;
        let reps = f.reps(count);
        if reps.len() < count {
            return Err(Error::LimitExceeded("F has too few representatives within the search limit".into()));
        }
        let index: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut out = Vec::new();
        for k in (0..=max_classes).filter(|&k| self.admissible_count(k)) {
            let dom = reps[self.n + 1 + k];
            let assign = f.reps_prefix(dom);
            let legal: Vec<Vec<usize>> = (0..k)
                .map(|j| {
                    let block = self.partition.block_of(reps[self.n + 1 + j]);
                    (0..=self.n)
                        .filter(|&t| self.constraint.permits(self.partition.block_of(reps[t]), block))
                        .collect()
                })
                .collect();
            let mut choice = vec![0usize; k];
            let mut digits = vec![0usize; k];
            loop {
                for j in 0..k {
                    choice[j] = legal[j][digits[j]];
                }
                let labels: Vec<usize> = assign
                    .iter()
                    .map(|r| {
                        let idx = index[r];
                        if idx <= self.n {
                            idx
                        } else {
                            choice[idx - self.n - 1]
                        }
                    })
                    .collect();
                out.push(FExtension { choice: choice.clone(), b: FiniteEqRel::canonical_form(&labels) });
                let Some(j) = (0..k).rev().find(|&j| digits[j] + 1 < legal[j].len()) else { break };
                digits[j] += 1;
                digits[j + 1..].iter_mut().for_each(|d| *d = 0);
            }
        }
        Ok(out)
    }

    /// The letter substituted into `x_i` that makes `y_i` carry `k` at its
    /// variable places.
    pub fn unit_letter(&self, exp: &Expansion, i: usize, k: usize) -> Result<Letter> {
        let offsets = exp.var_offsets.get(i).ok_or_else(|| Error::InvalidInput(format!("no x_{i}")))?;
        let first = *offsets.first().ok_or_else(|| Error::InvalidInput(format!("x_{i} has no variable")))?;
        if offsets.iter().any(|&o| o != first) {
            return Err(Error::Validation(format!(
                "the variables of x_{i} sit at different offsets {offsets:?}; no single letter matches"
            )));
        }
        let mut coords = vec![0u32; self.var_width(i)?];
        coords[first] = k as u32;
        Ok(Letter(coords))
    }

    /// `w0⌢x_0[e_0(k_0)]⌢...⌢x_{K-1}[e_{K-1}(k_{K-1})]`.
    pub fn translate_word(&self, w0: &Word, xs: &[Word], exp: &Expansion, choice: &[usize]) -> Result<Word> {
        let mut w = w0.clone();
        for (i, &k) in choice.iter().enumerate() {
            let x = xs.get(i).ok_or_else(|| Error::InvalidInput(format!("no x_{i}")))?;
            w = w.concat(&x.substitute_unchecked(&Symbol::Letter(self.unit_letter(exp, i, k)?)));
        }
        Ok(w)
    }
}

#[derive(Debug)]
struct CertificateSource {
    inner: EqRelStream,
}

impl RepSource for CertificateSource {
    fn reps_prefix(&self, len: usize) -> Vec<usize> {
        self.inner.reps_prefix(len)
    }
}
