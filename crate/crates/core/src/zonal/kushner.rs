//! Closed-form product coefficients `g^δ_{(k),τ}` for a one-row left factor.

use num::{BigRational, Zero};

use crate::error::{domain, Result};
use crate::partition::Partition;

use super::special::{factorial, two_step_factorial};
use super::Q;

/// `true` iff `δ_i ≥ τ_i ≥ δ_{i+1}` for every `i ≤ l(τ)` and `δ` has at most
/// `l(τ) + 1` parts, i.e. `δ/τ` is a horizontal strip.
pub fn interlaces(tau: &Partition, delta: &Partition) -> bool {
    delta.len() <= tau.len() + 1
        && (0..tau.len()).all(|i| delta.part(i) >= tau.part(i) && tau.part(i) >= delta.part(i + 1))
}

/// Kushner's formula for the coefficient of `C_δ` in `C_(k) · C_τ`.
///
/// Returns zero off the interlacing support.
pub fn kushner_g(k: u32, tau: &Partition, delta: &Partition) -> Result<Q> {
    let t = tau.weight();
    if delta.weight() != k + t {
        return Err(domain(format!(
            "weight of {delta} is not {k} + weight of {tau}"
        )));
    }
    if !interlaces(tau, delta) {
        return Ok(Q::zero());
    }
    let l = tau.len();
    let tau_at = |i: usize| tau.part(i - 1) as i64;
    let delta_at = |i: usize| delta.part(i - 1) as i64;
    let big_t = |i: usize| 2 * tau_at(i) - i as i64;
    let big_d = |i: usize| 2 * delta_at(i) - i as i64;

    // k! / ((2k)! C(k+t, k)) = k!² t! / ((2k)! (k+t)!)
    let kf = factorial(k as u64);
    let mut numer = &kf * &kf * factorial(t as u64);
    let mut denom = factorial(2 * k as u64) * factorial((k + t) as u64);

    for i in 1..=l + 1 {
        let gap = delta_at(i) - tau_at(i);
        numer *= two_step_factorial(2 * gap - 1, 1)?;
        denom *= factorial(gap as u64);
    }
    for i in 1..=l + 1 {
        for j in (i + 1)..=l + 1 {
            numer *= big_t(i) - big_t(j);
        }
    }
    for i in 1..=l + 2 {
        for j in (i + 1)..=l + 2 {
            numer *= two_step_factorial(big_d(i) - big_t(j) - 1, big_t(i) - big_d(j) + 1)?;
        }
    }
    for i in 1..=l + 1 {
        for j in (i + 1)..=l + 1 {
            denom *= two_step_factorial(big_d(i) - big_t(j), big_t(i) - big_d(j))?;
        }
    }
    if denom.is_zero() {
        return Err(domain(format!("degenerate Kushner denominator for {tau} → {delta}")));
    }
    Ok(BigRational::new(numer, denom))
}

/// All `δ` with `δ/τ` a horizontal strip of size `k` and at most `max_len` parts.
pub fn horizontal_strips(k: u32, tau: &Partition, max_len: usize) -> Vec<Partition> {
    let l = tau.len();
    let rows = (l + 1).min(max_len);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(rows);
    strips(0, rows, k, tau, &mut cur, &mut out);
    out
}

fn strips(i: usize, rows: usize, left: u32, tau: &Partition, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if i == rows {
        if left == 0 {
            out.push(Partition::new(cur.clone()).expect("interlacing keeps the order"));
        }
        return;
    }
    let base = tau.part(i);
    let cap = if i == 0 { left } else { (tau.part(i - 1) - base).min(left) };
    for add in (0..=cap).rev() {
        cur.push(base + add);
        strips(i + 1, rows, left - add, tau, cur, out);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::super::special::{q, qi, zonal_at_identity};
    use super::*;
    use crate::partition::partitions_of;

    /// `Σ_δ g^δ_{(k),τ} C_δ(I_m) = C_(k)(I_m) C_τ(I_m)`.
    fn one_row_product_is_consistent(k: u32, tau: &Partition, m: usize) -> bool {
        let lhs: Q = horizontal_strips(k, tau, m)
            .iter()
            .map(|d| kushner_g(k, tau, d).unwrap() * zonal_at_identity(d, m))
            .sum();
        lhs == zonal_at_identity(&Partition::row(k), m) * zonal_at_identity(tau, m)
    }

    fn p<const N: usize>(parts: [u32; N]) -> Partition {
        Partition::from(parts)
    }

    #[test]
    fn worked_example() {
        assert_eq!(kushner_g(2, &p([3, 2]), &p([5, 2])).unwrap(), q(99, 245));
        assert_eq!(kushner_g(2, &p([3, 2]), &p([4, 3])).unwrap(), q(12, 35));
        assert_eq!(kushner_g(2, &p([3, 2]), &p([3, 2, 2])).unwrap(), q(5, 27));
        assert_eq!(kushner_g(2, &p([3, 2]), &p([5, 1, 1])).unwrap(), qi(0));
    }

    #[test]
    fn empty_tau() {
        for k in 0..8 {
            assert_eq!(kushner_g(k, &Partition::empty(), &Partition::row(k)).unwrap(), qi(1));
        }
    }

    #[test]
    fn weight_mismatch() {
        assert!(kushner_g(2, &p([1]), &p([2])).is_err());
    }

    #[test]
    fn strips_match_interlacing_filter() {
        for k in 0..5 {
            for t in 0..5 {
                for tau in partitions_of(t, 3) {
                    let mut want: Vec<_> = partitions_of(k + t, 3)
                        .into_iter()
                        .filter(|d| interlaces(&tau, d))
                        .collect();
                    let mut got = horizontal_strips(k, &tau, 3);
                    want.sort();
                    got.sort();
                    assert_eq!(got, want, "k={k} τ={tau}");
                }
            }
        }
    }

    #[test]
    fn identity_consistency() {
        for k in 0..6 {
            for t in 0..6 {
                for tau in partitions_of(t, 3) {
                    assert!(one_row_product_is_consistent(k, &tau, 3), "k={k} τ={tau}");
                }
            }
        }
    }
}
