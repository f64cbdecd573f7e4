//! Bijections `f : ω → β` with `f(0) = 0`.
//!
//! The default enumerates the ordinals below `β` by increasing norm and,
//! within one norm, in increasing order. For `β = ω` this is the identity.
//! Variants permute finitely many values of the default.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use super::cnf::Cnf;
use crate::error::{Error, Result};

/// Bound on the enumeration index the default bijection will compute up to.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Canonical,
    /// Canonical composed with a finite permutation of indices.
    Permuted { forward: Vec<usize>, backward: Vec<usize> },
}

#[derive(Default)]
struct Enumeration {
    /// Ordinals below `β` in default order.
    list: Vec<Cnf>,
    /// `level_start[k]` is the index of the first ordinal of norm `k`.
    level_start: Vec<usize>,
    memo: HashMap<(u64, Cnf, bool), Vec<Cnf>>,
}

/// A bijection `f : ω → β` with `f(0) = 0`.
pub struct Bijection {
    beta: Cnf,
    kind: Kind,
    id: String,
    cache: Mutex<Enumeration>,
}

impl fmt::Debug for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bijection").field("beta", &self.beta).field("id", &self.id).finish()
    }
}

impl Clone for Bijection {
    fn clone(&self) -> Self {
        Bijection { beta: self.beta.clone(), kind: self.kind.clone(), id: self.id.clone(), cache: Mutex::default() }
    }
}

impl PartialEq for Bijection {
    fn eq(&self, other: &Self) -> bool {
        self.beta == other.beta && self.kind == other.kind
    }
}

impl Eq for Bijection {}

impl Bijection {
    /// The default enumeration of `β`; `β` must be infinite.
    pub fn canonical(beta: Cnf) -> Result<Self> {
        if beta.is_finite() {
            return Err(Error::InvalidInput(format!("beta = {beta} must be infinite")));
        }
        Ok(Bijection { beta, kind: Kind::Canonical, id: "id".into(), cache: Mutex::default() })
    }

    /// The identity on `ω`.
    pub fn identity() -> Self {
        Self::canonical(Cnf::omega()).expect("omega is infinite")
    }

    /// The default enumeration with the values at `i` and `j` exchanged.
    pub fn swap(beta: Cnf, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 {
            return Err(Error::InvalidInput("a swap must keep f(0) = 0".into()));
        }
        let len = i.max(j) + 1;
        let mut forward: Vec<usize> = (0..len).collect();
        forward.swap(i, j);
        let mut b = Self::permuted(beta, forward)?;
        b.id = format!("swap:{i}:{j}");
        Ok(b)
    }

    /// `f(n) = values[n]` for `n < values.len()`, the default beyond. The
    /// values must be a rearrangement of the first `values.len()` default values.
    pub fn explicit(beta: Cnf, values: &[Cnf], id: impl Into<String>) -> Result<Self> {
        let base = Self::canonical(beta.clone())?;
        let forward = values.iter().map(|v| base.canonical_inverse(v)).collect::<Result<Vec<_>>>()?;
        let mut b = Self::permuted(beta, forward)?;
        b.id = id.into();
        Ok(b)
    }

    fn permuted(beta: Cnf, forward: Vec<usize>) -> Result<Self> {
        let mut backward = vec![usize::MAX; forward.len()];
        for (n, &c) in forward.iter().enumerate() {
            if c >= forward.len() || backward[c] != usize::MAX {
                return Err(Error::InvalidInput(
                    "explicit values must rearrange an initial segment of the default enumeration".into(),
                ));
            }
            backward[c] = n;
        }
        if forward.first().is_some_and(|&c| c != 0) {
            return Err(Error::InvalidInput("f(0) must be 0".into()));
        }
        let mut b = Self::canonical(beta)?;
        b.kind = Kind::Permuted { forward, backward };
        Ok(b)
    }

    /// Resolves `id`, `swap:<i>:<j>`, or `file:<path>` (one ordinal per line).
    pub fn from_spec(spec: &str, beta: Cnf) -> Result<Self> {
        let spec = spec.trim();
        if spec == "id" {
            return Self::canonical(beta);
        }
        if let Some(rest) = spec.strip_prefix("swap:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [i, j] = parts.as_slice() else {
                return Err(Error::Parse(format!("bijection {spec:?}: expected swap:<i>:<j>")));
            };
            let parse = |t: &str| t.parse::<usize>().map_err(|e| Error::Parse(format!("bijection {spec:?}: {e}")));
            return Self::swap(beta, parse(i)?, parse(j)?);
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("reading bijection file {path}: {e}")))?;
            let values = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::parse)
                .collect::<Result<Vec<Cnf>>>()?;
            return Self::explicit(beta, &values, spec);
        }
        Err(Error::Parse(format!("unknown bijection {spec:?}; expected id, swap:<i>:<j> or file:<path>")))
    }

    pub fn beta(&self) -> &Cnf {
        &self.beta
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    fn is_omega(&self) -> bool {
        self.beta == Cnf::omega()
    }

    fn forward_index(&self, n: usize) -> usize {
        match &self.kind {
            Kind::Permuted { forward, .. } if n < forward.len() => forward[n],
            _ => n,
        }
    }

    fn backward_index(&self, c: usize) -> usize {
        match &self.kind {
            Kind::Permuted { backward, .. } if c < backward.len() => backward[c],
            _ => c,
        }
    }

    /// `f(n)`.
    pub fn f(&self, n: usize) -> Cnf {
        self.canonical_value(self.forward_index(n))
    }

    /// `f^{-1}(γ)`.
    pub fn f_inverse(&self, gamma: &Cnf) -> Result<usize> {
        Ok(self.backward_index(self.canonical_inverse(gamma)?))
    }

    /// Compares `f(m)` with `f(n)`.
    pub fn compare(&self, m: usize, n: usize) -> Ordering {
        let (a, b) = (self.forward_index(m), self.forward_index(n));
        if self.is_omega() {
            a.cmp(&b)
        } else {
            self.canonical_value(a).cmp(&self.canonical_value(b))
        }
    }

    pub fn fixes_zero(&self) -> bool {
        self.forward_index(0) == 0
    }

    fn canonical_value(&self, idx: usize) -> Cnf {
        if self.is_omega() {
            return Cnf::nat(idx as u64);
        }
        assert!(idx < ENUMERATION_LIMIT, "bijection index {idx} beyond the enumeration limit");
        let mut cache = self.cache.lock().expect("enumeration cache poisoned");
        while cache.list.len() <= idx {
            self.extend_level(&mut cache);
        }
        cache.list[idx].clone()
    }

    fn canonical_inverse(&self, gamma: &Cnf) -> Result<usize> {
        if *gamma >= self.beta {
            return Err(Error::InvalidInput(format!("{gamma} is not below beta = {}", self.beta)));
        }
        if self.is_omega() {
            return gamma
                .as_nat()
                .and_then(|n| usize::try_from(n).ok())
                .ok_or_else(|| Error::Overflow(format!("{gamma} does not fit an index")));
        }
        let norm = usize::try_from(gamma.norm()).map_err(|_| Error::Overflow("ordinal norm".into()))?;
        let mut cache = self.cache.lock().expect("enumeration cache poisoned");
        while cache.level_start.len() <= norm + 1 {
            if cache.list.len() >= ENUMERATION_LIMIT {
                return Err(Error::LimitExceeded(format!("enumerating ordinals of norm {norm}")));
            }
            self.extend_level(&mut cache);
        }
        let (lo, hi) = (cache.level_start[norm], cache.level_start[norm + 1]);
        let pos = cache.list[lo..hi]
            .binary_search(gamma)
            .map_err(|_| Error::Invariant(format!("{gamma} missing from its norm level")))?;
        Ok(lo + pos)
    }

    fn extend_level(&self, cache: &mut Enumeration) {
        let norm = cache.level_start.len() as u64;
        let level = of_norm(norm, &self.beta, false, &mut cache.memo);
        cache.level_start.push(cache.list.len());
        cache.list.extend(level);
    }
}

/// All ordinals of norm `n` below `bound` (or at most `bound` when
/// `inclusive`), in increasing order.
fn of_norm(n: u64, bound: &Cnf, inclusive: bool, memo: &mut HashMap<(u64, Cnf, bool), Vec<Cnf>>) -> Vec<Cnf> {
    let key = (n, bound.clone(), inclusive);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let admits = |g: &Cnf| if inclusive { g <= bound } else { g < bound };
    let mut out = Vec::new();
    if n == 0 {
        if admits(&Cnf::zero()) {
            out.push(Cnf::zero());
        }
    } else if let Some(lead) = bound.leading_exponent().cloned() {
        for k in 0..n {
            for e in of_norm(k, &lead, true, memo) {
                let weight = 1 + k;
                let mut c = 1;
                while c * weight <= n {
                    let rest_bound = Cnf::omega_pow(e.clone());
                    for rest in of_norm(n - c * weight, &rest_bound, false, memo) {
                        let mut terms = vec![(e.clone(), c)];
                        terms.extend(rest.terms().iter().cloned());
                        let g = Cnf::from_terms(terms).expect("rest exponents lie below e");
                        if admits(&g) {
                            out.push(g);
                        }
                    }
                    c += 1;
                }
            }
        }
    }
    out.sort();
    memo.insert(key, out.clone());
    out
}
