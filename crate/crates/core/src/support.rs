use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of column indices. Indices are zero-based internally; the
/// textual form used in reports is zero-based as well.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Builds a support from arbitrary indices, sorting them. Duplicates are
    /// rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("support set contains duplicate indices"));
        }
        Ok(SupportSet(indices))
    }

    /// Indices of the nonzero entries of `x`.
    pub fn of_nonzeros(x: &[f64]) -> Self {
        SupportSet(
            x.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn full(dim: usize) -> Self {
        SupportSet((0..dim).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|i| !other.contains(*i)).collect())
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut v: Vec<usize> = self.iter().chain(other.iter()).collect();
        v.sort_unstable();
        v.dedup();
        SupportSet(v)
    }

    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|i| other.contains(*i)).collect())
    }

    /// Complement within `{0, .., dim-1}`.
    pub fn complement(&self, dim: usize) -> SupportSet {
        SupportSet((0..dim).filter(|i| !self.contains(*i)).collect())
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.0.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl TryFrom<Vec<usize>> for SupportSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        SupportSet::new(v)
    }
}
