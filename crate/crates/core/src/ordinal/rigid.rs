//! Rigid surjections `ω·l → ω·l`, stored on a finite box.
//!
//! A box of depth `D` is the set of `(n, i)` with `n < D`, listed in `≼`
//! order. A rigid surjection sends each element to the rank of its fibre's
//! minimum among the fibre minima of the same copy, so the fibres determine
//! the values.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{Cnf, OrdinalElem, OrdinalEqRel, Target};
use crate::alternation::Partition;
use crate::eqrel::{EqRelStream, FiniteEqRel};
use crate::error::{Error, Result};
use crate::rng;
use rand::Rng as _;

/// A rigid surjection restricted to a box of depth `depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rigid {
    l: usize,
    depth: usize,
    values: Vec<OrdinalElem>,
}

impl Rigid {
    /// Validates box values: each value must be the copy-rank of its fibre's minimum.
    pub fn new(l: usize, values: Vec<OrdinalElem>) -> Result<Self> {
        if l == 0 || !values.len().is_multiple_of(l) {
            return Err(Error::InvalidInput(format!("{} values do not fill a box of width {l}", values.len())));
        }
        let labels: Vec<&OrdinalElem> = values.iter().collect();
        let expected = Self::from_labels(l, &labels)?;
        if expected.values != values {
            let j = expected.values.iter().zip(&values).position(|(a, b)| a != b).unwrap_or(0);
            return Err(Error::Validation(format!(
                "value at {} is {}, rigidity forces {}",
                box_elem(l, j),
                values[j],
                expected.values[j]
            )));
        }
        Ok(expected)
    }

    /// The identity surjection on a box.
    pub fn identity(l: usize, depth: usize) -> Self {
        let values = (0..l * depth).map(|j| box_elem(l, j)).collect();
        Rigid { l, depth, values }
    }

    /// The rigid surjection whose fibres are the label classes on the box.
    pub fn from_labels<L: Eq + std::hash::Hash>(l: usize, labels: &[L]) -> Result<Self> {
        if l == 0 || !labels.len().is_multiple_of(l) {
            return Err(Error::InvalidInput(format!("{} labels do not fill a box of width {l}", labels.len())));
        }
        let mut min_of: HashMap<&L, OrdinalElem> = HashMap::new();
        for (j, lab) in labels.iter().enumerate() {
            let e = box_elem(l, j);
            min_of.entry(lab).and_modify(|m| if e < *m { *m = e.clone() }).or_insert(e);
        }
        let mut per_copy: BTreeMap<Cnf, Vec<usize>> = BTreeMap::new();
        for m in min_of.values() {
            per_copy.entry(m.copy.clone()).or_default().push(m.n);
        }
        for i in 0..l {
            if !per_copy.contains_key(&Cnf::nat(i as u64)) {
                return Err(Error::Validation(format!("no class has its minimum in copy {i} within the box")));
            }
        }
        for v in per_copy.values_mut() {
            v.sort_unstable();
        }
        let values = labels
            .iter()
            .map(|lab| {
                let m = &min_of[lab];
                let rank = per_copy[&m.copy].partition_point(|&n| n < m.n);
                OrdinalElem::new(rank, m.copy.clone())
            })
            .collect();
        Ok(Rigid { l, depth: labels.len() / l, values })
    }

    /// A seeded random rigid surjection on a box: each element in `≼` order
    /// opens a new fibre with probability `fresh`, otherwise joins a random
    /// earlier fibre. Draws repeat until every copy holds a fibre minimum.
    pub fn random(l: usize, depth: usize, seed: u64, fresh: f64) -> Result<Self> {
        let mut g = rng::seeded(seed);
        for _ in 0..1000 {
            let mut labels: Vec<usize> = Vec::with_capacity(l * depth);
            let mut count = 0;
            for _ in 0..l * depth {
                if count == 0 || g.gen::<f64>() < fresh {
                    labels.push(count);
                    count += 1;
                } else {
                    labels.push(g.gen_range(0..count));
                }
            }
            if let Ok(r) = Self::from_labels(l, &labels) {
                return Ok(r);
            }
        }
        Err(Error::LimitExceeded("no rigid box drawn after 1000 attempts".into()))
    }

    pub fn width(&self) -> usize {
        self.l
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Values in `≼` order of the arguments.
    pub fn values(&self) -> &[OrdinalElem] {
        &self.values
    }

    pub fn value_at(&self, e: &OrdinalElem) -> Option<&OrdinalElem> {
        let i = e.copy.as_nat()? as usize;
        (i < self.l && e.n < self.depth).then(|| &self.values[e.n * self.l + i])
    }
}

fn box_elem(l: usize, j: usize) -> OrdinalElem {
    OrdinalElem::new(j / l, Cnf::nat((j % l) as u64))
}

/// The relation whose classes are the fibres, on the box, with singleton
/// classes beyond it.
pub fn rigid_to_eqrel(g: &Rigid) -> Result<OrdinalEqRel> {
    let head = FiniteEqRel::canonical_form(&g.values);
    OrdinalEqRel::from_backing(EqRelStream::from_prefix(head), Partition::residue(g.l)?, Target::OmegaTimes(g.l))
}

/// The rigid surjection whose fibres are the classes of `r` on a box of
/// depth `depth`. Rejects relations with no class minimum in some copy
/// inside the box.
pub fn eqrel_to_rigid(r: &OrdinalEqRel, depth: usize) -> Result<Rigid> {
    let Target::OmegaTimes(l) = *r.target() else {
        return Err(Error::InvalidInput("rigid surjections are defined on w*l".into()));
    };
    let labels: Vec<usize> = r.window_labels(l * depth)?.into_iter().map(|(_, c)| c).collect();
    Rigid::from_labels(l, &labels)
}
