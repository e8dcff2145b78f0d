use std::fmt;

use serde::Serialize;

use crate::error::{LiouvilleError, Result};

/// A Young diagram: weakly decreasing positive parts. Indexes the
/// descendant L_{−ν(k)}⋯L_{−ν(1)}|Δ⟩, with the smallest part acting last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Sorts the parts into decreasing order; rejects zero parts.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(LiouvilleError::domain("partition parts must be positive"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// |ν|
    pub fn size(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    /// s(ν), the number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub(crate) fn smallest(&self) -> Option<u32> {
        self.parts.last().copied()
    }

    /// The diagram with its smallest part removed.
    pub(crate) fn without_smallest(&self) -> Partition {
        let mut parts = self.parts.clone();
        parts.pop();
        Partition { parts }
    }

    /// Appends `m`, which must not exceed the current smallest part.
    pub(crate) fn with_smallest(&self, m: u32) -> Partition {
        debug_assert!(self.smallest().is_none_or(|s| m <= s));
        let mut parts = self.parts.clone();
        parts.push(m);
        Partition { parts }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", inner.join(","))
    }
}

/// All partitions of `n` in reverse-lexicographic order, e.g.
/// 3 → (3), (2,1), (1,1,1).
pub fn partitions_of(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(n as u32, n as u32, &mut current, &mut out);
    out
}

fn fill(remaining: u32, max: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition {
            parts: current.clone(),
        });
        return;
    }
    for k in (1..=max.min(remaining)).rev() {
        current.push(k);
        fill(remaining - k, k, current, out);
        current.pop();
    }
}
