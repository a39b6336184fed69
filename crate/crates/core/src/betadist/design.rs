use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Degrees of freedom and noncentrality of a one-way MANOVA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManovaDesign {
    m: usize,
    n_h: usize,
    n_e: usize,
    group_sizes: Option<Vec<usize>>,
    theta: Vec<f64>,
}

impl ManovaDesign {
    /// A null design with dimension `m`, hypothesis df `n_h` and error df `n_e`.
    pub fn new(m: usize, n_h: usize, n_e: usize) -> Result<Self> {
        if m == 0 || n_h == 0 {
            return Err(domain("dimension m and hypothesis df n_H must be positive"));
        }
        if n_e < m {
            return Err(domain(format!(
                "error df n_E = {n_e} is smaller than the dimension m = {m}"
            )));
        }
        Ok(ManovaDesign {
            m,
            n_h,
            n_e,
            group_sizes: None,
            theta: Vec::new(),
        })
    }

    /// A null design from group sizes: `n_H = p − 1`, `n_E = Σ n_i − p`.
    pub fn from_groups(m: usize, group_sizes: &[usize]) -> Result<Self> {
        let p = group_sizes.len();
        if p < 2 {
            return Err(domain("at least two groups are needed"));
        }
        if group_sizes.contains(&0) {
            return Err(domain("group sizes must be positive"));
        }
        let total: usize = group_sizes.iter().sum();
        let mut d = Self::new(m, p - 1, total - p)?;
        d.group_sizes = Some(group_sizes.to_vec());
        Ok(d)
    }

    /// `p` groups of `n_i` observations each.
    pub fn balanced(m: usize, p: usize, n_i: usize) -> Result<Self> {
        Self::from_groups(m, &vec![n_i; p])
    }

    /// Replaces the noncentrality spectrum. Entries must be finite, nonnegative
    /// and weakly decreasing, with at most `m` of them positive.
    pub fn with_theta(mut self, theta: &[f64]) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(domain("noncentrality eigenvalues must be finite and nonnegative"));
        }
        if theta.windows(2).any(|w| w[0] < w[1]) {
            return Err(domain("noncentrality eigenvalues must be weakly decreasing"));
        }
        let mut theta = theta.to_vec();
        while theta.last() == Some(&0.0) {
            theta.pop();
        }
        if theta.len() > self.m {
            return Err(domain(format!(
                "rank of the noncentrality matrix exceeds the dimension m = {}",
                self.m
            )));
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn groups(&self) -> Option<usize> {
        self.group_sizes.as_ref().map(Vec::len)
    }

    pub fn group_sizes(&self) -> Option<&[usize]> {
        self.group_sizes.as_deref()
    }

    /// Positive noncentrality eigenvalues, descending.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn rank(&self) -> usize {
        self.theta.len()
    }

    pub fn n_min(&self) -> usize {
        self.m.min(self.n_h)
    }

    pub fn n_max(&self) -> usize {
        self.m.max(self.n_h)
    }

    /// The same degrees of freedom with zero noncentrality.
    pub fn null(&self) -> Self {
        ManovaDesign {
            theta: Vec::new(),
            ..self.clone()
        }
    }
}

impl fmt::Display for ManovaDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={}, n_H={}, n_E={}", self.m, self.n_h, self.n_e)?;
        if !self.theta.is_empty() {
            let t: Vec<String> = self.theta.iter().map(|t| t.to_string()).collect();
            write!(f, ", theta=({})", t.join(","))?;
        }
        Ok(())
    }
}

/// Test statistic of a MANOVA test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// Largest eigenvalue of the Beta matrix.
    Roy,
    /// Trace of the Beta matrix.
    Pillai,
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "roy" => Ok(Statistic::Roy),
            "pillai" => Ok(Statistic::Pillai),
            _ => Err(domain(format!("unknown statistic {s:?}"))),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Roy => "roy",
            Statistic::Pillai => "pillai",
        })
    }
}

/// Truncation controls for the double series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Highest total degree kept in the noncentrality (`k`) series.
    pub k_max: u32,
    /// Relative size below which a `t`-block counts as negligible.
    pub rel_tol: f64,
    /// Largest `t` evaluated when the series does not terminate.
    pub t_cap: u32,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            k_max: 20,
            rel_tol: 1e-10,
            t_cap: 200,
        }
    }
}

impl SeriesControl {
    pub fn with_k(k_max: u32) -> Self {
        SeriesControl {
            k_max,
            ..Self::default()
        }
    }

    /// Default controls with `k_max` large enough for the Poisson-like
    /// `k`-weights `e^{−θ/2}(θ/2)^k/k!` at total noncentrality `θ` to be
    /// negligible beyond the cut.
    pub fn auto_for(theta_total: f64) -> Self {
        let half = theta_total.max(0.0) / 2.0;
        let k = (half + 10.0 * half.sqrt()).ceil() as u32 + 10;
        Self::with_k(k.max(Self::default().k_max))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(domain("rel_tol must be positive"));
        }
        Ok(())
    }
}

/// A series value with truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    /// Number of `k`-degrees summed (`k_max + 1` unless the spectrum is zero).
    pub k_terms_used: u32,
    /// Number of `t`-blocks summed.
    pub t_terms_used: u32,
    /// Largest magnitude among the last `k`-block and the last `t`-block.
    pub last_block_magnitude: f64,
    /// The `t`-series terminated exactly at its truncation bound.
    pub exact_t_termination: bool,
    /// False when the adaptive `t`-series reached `t_cap` without settling.
    pub converged: bool,
}

impl SeriesResult {
    pub(crate) fn exact(value: f64) -> Self {
        SeriesResult {
            value,
            k_terms_used: 0,
            t_terms_used: 0,
            last_block_magnitude: 0.0,
            exact_t_termination: true,
            converged: true,
        }
    }
}

/// `r · n_min` with `r = (n_E − m − 1)/2`, when `r` is a nonnegative integer.
///
/// Beyond this bound every `(m+1−n_E)/2`-Pochhammer factor of the `t`-series
/// vanishes.
pub fn t_truncation_bound(design: &ManovaDesign) -> Option<u32> {
    let twice_r = design.n_e as i64 - design.m as i64 - 1;
    (twice_r >= 0 && twice_r % 2 == 0).then(|| (twice_r / 2) as u32 * design.n_min() as u32)
}
