//! Integer partitions, their orderings and the Laplace–Beltrami eigenvalue
//! attached to each partition.
//!
//! Partitions are stored without trailing zeros. Padding with zeros only
//! happens inside comparisons, so a `Partition` is a canonical key for every
//! coefficient table in the crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// A weakly decreasing tuple of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Builds a partition, dropping trailing zeros.
    ///
    /// Fails if the parts are not weakly decreasing.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(domain(format!("parts {parts:?} are not weakly decreasing")));
        }
        Ok(Partition(parts))
    }

    /// The empty partition of weight zero.
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// The one-row partition `(k)`; empty when `k == 0`.
    pub fn row(k: u32) -> Self {
        if k == 0 {
            Self::empty()
        } else {
            Partition(vec![k])
        }
    }

    pub(crate) fn from_parts_unchecked(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.last() != Some(&0));
        Partition(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// The `i`-th part (0-based), zero beyond the length.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of positive parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Conjugate partition (transpose of the Young diagram).
    pub fn conjugate(&self) -> Partition {
        let first = self.part(0);
        let parts = (1..=first)
            .map(|j| self.0.iter().filter(|&&p| p >= j).count() as u32)
            .collect();
        Partition(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| domain(format!("invalid partition part {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl From<&[u32]> for Partition {
    /// Panics on non-decreasing input; intended for literals in tests and tables.
    fn from(parts: &[u32]) -> Self {
        Partition::new(parts.to_vec()).expect("weakly decreasing parts")
    }
}

impl<const N: usize> From<[u32; N]> for Partition {
    fn from(parts: [u32; N]) -> Self {
        Partition::from(&parts[..])
    }
}

/// All partitions of `k` with at most `max_len` parts, in strictly descending
/// lexicographic order. `k == 0` yields the single empty partition.
pub fn partitions_of(k: u32, max_len: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(k, max_len, k, &mut current, &mut out);
    out
}

fn fill(rest: u32, slots: usize, cap: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    if slots == 0 {
        return;
    }
    let lo = rest.div_ceil(slots as u32);
    for first in (lo..=cap.min(rest)).rev() {
        current.push(first);
        fill(rest - first, slots - 1, first, current, out);
        current.pop();
    }
}

fn check_same_weight(a: &Partition, b: &Partition) -> Result<()> {
    if a.weight() != b.weight() {
        return Err(Error::InvalidComparison {
            left: a.to_string(),
            right: b.to_string(),
        });
    }
    Ok(())
}

/// Lexicographic comparison of two partitions of equal weight.
pub fn lex_compare(a: &Partition, b: &Partition) -> Result<Ordering> {
    check_same_weight(a, b)?;
    let n = a.len().max(b.len());
    Ok((0..n)
        .map(|i| a.part(i).cmp(&b.part(i)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal))
}

/// `true` iff `a` is dominated by `b`: every prefix sum of `a` is at most the
/// corresponding prefix sum of `b`.
pub fn dominance_leq(a: &Partition, b: &Partition) -> Result<bool> {
    check_same_weight(a, b)?;
    let n = a.len().max(b.len());
    let (mut sa, mut sb) = (0u32, 0u32);
    for i in 0..n {
        sa += a.part(i);
        sb += b.part(i);
        if sa > sb {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Eigenvalue of the Laplace–Beltrami operator on the zonal polynomial
/// indexed by `kappa` in dimension `m`: `Σ κ_i (κ_i + m − i − 1)`.
pub fn lb_eigenvalue(kappa: &Partition, m: usize) -> Result<i64> {
    if kappa.len() > m {
        return Err(domain(format!(
            "partition {kappa} has length {} > dimension {m}",
            kappa.len()
        )));
    }
    Ok(kappa
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let p = p as i64;
            p * (p + m as i64 - (i as i64 + 1) - 1)
        })
        .sum())
}
