//! Scalar special functions with exact-rational values: rising factorials,
//! generalized Pochhammer symbols, the two-step factorial, zonal polynomials
//! at the identity, and ratios of multivariate gamma functions.

use std::f64::consts::PI;
use std::sync::RwLock;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::numeric::{rational_from_f64, rational_to_f64};
use crate::partition::Partition;

use super::Q;

pub(crate) fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// `n!`, memoized process-wide.
pub(crate) fn factorial(n: u64) -> BigInt {
    static TABLE: RwLock<Vec<BigInt>> = RwLock::new(Vec::new());
    let n = n as usize;
    if let Some(f) = TABLE.read().expect("factorial table poisoned").get(n) {
        return f.clone();
    }
    let mut table = TABLE.write().expect("factorial table poisoned");
    if table.is_empty() {
        table.push(BigInt::one());
    }
    while table.len() <= n {
        let next = table.last().expect("nonempty") * table.len();
        table.push(next);
    }
    table[n].clone()
}

/// Rising factorial `a (a+1) ⋯ (a+n−1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: &Q, n: u32) -> Q {
    // (p/d)_n = Π_i (p + i d) / d^n
    let (p, d) = (a.numer(), a.denom());
    let mut numer = BigInt::one();
    let mut factor = p.clone();
    for _ in 0..n {
        if factor.is_zero() {
            return Q::zero();
        }
        numer *= &factor;
        factor += d;
    }
    BigRational::new(numer, num::pow(d.clone(), n as usize))
}

/// Generalized Pochhammer symbol `(a)_κ = Π_i (a − (i−1)/2)_{κ_i}`.
///
/// Exactly zero whenever one of the factor chains passes through zero; this
/// is what makes the `t`-series terminate for integer `(n_E − m − 1)/2`.
pub fn gen_pochhammer(a: &Q, kappa: &Partition) -> Q {
    let mut acc = Q::one();
    for (i, &part) in kappa.parts().iter().enumerate() {
        let shifted = a - q(i as i64, 2);
        let factor = pochhammer(&shifted, part);
        if factor.is_zero() {
            return Q::zero();
        }
        acc *= factor;
    }
    acc
}

/// Two-step factorial `[b, c]_2 = b (b−2) ⋯ c`, with `[b, c]_2 = 1` when
/// `b − c = −2`.
pub fn two_step_factorial(b: i64, c: i64) -> Result<BigInt> {
    let diff = b - c;
    if diff == -2 {
        return Ok(BigInt::one());
    }
    if diff < -2 || diff.is_odd() {
        return Err(domain(format!(
            "two-step factorial [{b}, {c}]_2 needs an even difference b - c >= -2"
        )));
    }
    let mut acc = BigInt::one();
    let mut x = b;
    while x >= c {
        acc *= x;
        x -= 2;
    }
    Ok(acc)
}

/// Value of the zonal polynomial `C_κ` at the `m × m` identity matrix.
///
/// `C_κ(I_m) = 2^{2k} k! (m/2)_κ Π_{i<j}(2κ_i − 2κ_j − i + j) / Π_i (2κ_i + l − i)!`,
/// zero when `κ` has more than `m` parts.
pub fn zonal_at_identity(kappa: &Partition, m: usize) -> Q {
    let l = kappa.len();
    if l > m {
        return Q::zero();
    }
    let k = kappa.weight() as u64;
    let parts: Vec<i64> = kappa.parts().iter().map(|&p| p as i64).collect();
    let mut numer = (BigInt::one() << (2 * k as usize)) * factorial(k);
    for i in 0..l {
        for j in (i + 1)..l {
            numer *= 2 * parts[i] - 2 * parts[j] - (i as i64) + (j as i64);
        }
    }
    let denom = (0..l).fold(BigInt::one(), |acc, i| {
        acc * factorial((2 * parts[i] + l as i64 - (i as i64 + 1)) as u64)
    });
    BigRational::new(numer, denom) * gen_pochhammer(&q(m as i64, 2), kappa)
}

/// A ratio of gamma products in the form `rational · π^{quarter_pi/4} · exp(log_residual)`.
#[derive(Debug, Clone)]
pub struct GammaRatio {
    pub rational: Q,
    pub quarter_pi: i64,
    pub log_residual: f64,
}

impl GammaRatio {
    pub fn to_f64(&self) -> f64 {
        let scale = (self.quarter_pi as f64 / 4.0) * PI.ln() + self.log_residual;
        rational_to_f64(&self.rational) * scale.exp()
    }

    /// The exact rational value, when no π power or transcendental residual remains.
    pub fn exact_rational(&self) -> Option<Q> {
        (self.quarter_pi == 0 && self.log_residual == 0.0).then(|| self.rational.clone())
    }
}

fn is_nonpositive_integer(a: &Q) -> bool {
    a.is_integer() && !a.is_positive()
}

/// Γ at an integer or half-integer argument, exactly, as `rational · √π^{half}`.
/// Returns `None` for other arguments.
fn gamma_half_integer(a: &Q) -> Option<(Q, i64)> {
    let twice = a * qi(2);
    if !twice.is_integer() {
        return None;
    }
    if a.is_integer() {
        debug_assert!(a.is_positive());
        let n = a.to_integer().to_u64()?;
        return Some((BigRational::from_integer(factorial(n - 1)), 0));
    }
    // Γ(1/2 + n) = √π (1/2)_n,  Γ(1/2 − n) = √π / Π_{j=1..n}(1/2 − j).
    let half = q(1, 2);
    let n = (a - &half).to_integer().to_i64()?;
    let value = if n >= 0 {
        pochhammer(&half, n as u32)
    } else {
        let below = a.clone();
        Q::one() / pochhammer(&below, (-n) as u32)
    };
    Some((value, 2))
}

/// Signed log-gamma for arguments that are not poles.
fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (statrs::function::gamma::ln_gamma(x), 1.0);
    }
    // Reflection: Γ(x) Γ(1 − x) = π / sin(πx).
    let s = (PI * x).sin();
    let lg = PI.ln() - s.abs().ln() - statrs::function::gamma::ln_gamma(1.0 - x);
    (lg, s.signum())
}

/// Ratio `Π Γ_{m_i}(a_i) / Π Γ_{n_j}(b_j)` of multivariate gamma functions,
/// `Γ_m(a) = π^{m(m−1)/4} Π_{i=1..m} Γ(a − (i−1)/2)`.
///
/// Scalar gammas whose arguments differ by an integer are cancelled into
/// finite Pochhammer products; poles must pair with poles on the other side.
/// Residual gammas at integer or half-integer arguments stay exact, any
/// others are evaluated in log space.
pub fn mv_gamma_ratio_parts(numerators: &[(usize, f64)], denominators: &[(usize, f64)]) -> Result<GammaRatio> {
    let expand = |list: &[(usize, f64)]| -> Result<(Vec<Q>, i64)> {
        let mut args = Vec::new();
        let mut quarter = 0i64;
        for &(dim, a) in list {
            if !a.is_finite() {
                return Err(domain(format!("non-finite gamma argument {a}")));
            }
            let a = rational_from_f64(a);
            quarter += (dim * dim.saturating_sub(1)) as i64;
            for i in 0..dim {
                args.push(&a - q(i as i64, 2));
            }
        }
        Ok((args, quarter))
    };
    let (mut num, qn) = expand(numerators)?;
    let (den, qd) = expand(denominators)?;

    let mut ratio = GammaRatio {
        rational: Q::one(),
        quarter_pi: qn - qd,
        log_residual: 0.0,
    };
    let mut residual_den = Vec::new();

    for d in den {
        let d_pole = is_nonpositive_integer(&d);
        let best = num
            .iter()
            .enumerate()
            .filter(|(_, n)| {
                let diff = *n - &d;
                diff.is_integer() && is_nonpositive_integer(n) == d_pole
            })
            .min_by_key(|(_, n)| (*n - &d).abs().to_integer())
            .map(|(i, _)| i);
        match best {
            Some(i) => {
                let n = num.swap_remove(i);
                let factor = if d_pole {
                    // Γ(−a)/Γ(−b) → (−1)^{a−b} b!/a! as a ratio of residues.
                    let a = (-&n).to_integer().to_u64().expect("small pole index");
                    let b = (-&d).to_integer().to_u64().expect("small pole index");
                    let sign = if (a + b) % 2 == 0 { 1 } else { -1 };
                    BigRational::new(factorial(b) * sign, factorial(a))
                } else {
                    let steps = (&n - &d).to_integer().to_i64().expect("moderate gamma shift");
                    if steps >= 0 {
                        pochhammer(&d, steps as u32)
                    } else {
                        Q::one() / pochhammer(&n, (-steps) as u32)
                    }
                };
                ratio.rational *= factor;
            }
            None => {
                if d_pole {
                    return Err(Error::Pole {
                        argument: rational_to_f64(&d),
                    });
                }
                residual_den.push(d);
            }
        }
    }

    for (args, sign) in [(num, 1i64), (residual_den, -1i64)] {
        for a in args {
            if is_nonpositive_integer(&a) {
                return Err(Error::Pole {
                    argument: rational_to_f64(&a),
                });
            }
            match gamma_half_integer(&a) {
                Some((value, half_pi)) => {
                    if sign > 0 {
                        ratio.rational *= value;
                    } else {
                        ratio.rational /= value;
                    }
                    ratio.quarter_pi += sign * half_pi;
                }
                None => {
                    let (lg, s) = ln_gamma_signed(rational_to_f64(&a));
                    ratio.log_residual += sign as f64 * lg;
                    if s < 0.0 {
                        ratio.rational = -ratio.rational.clone();
                    }
                }
            }
        }
    }
    Ok(ratio)
}

/// Floating-point value of the multivariate gamma ratio.
pub fn mv_gamma_ratio(numerators: &[(usize, f64)], denominators: &[(usize, f64)]) -> Result<f64> {
    Ok(mv_gamma_ratio_parts(numerators, denominators)?.to_f64())
}
