//! Polynomials in the elementary symmetric functions.
//!
//! `E_κ = e_1^{κ_1−κ_2} e_2^{κ_2−κ_3} ⋯ e_m^{κ_m}` is indexed by the
//! partition `κ`; its exponent vector is `a_i = κ_i − κ_{i+1}`. Multiplying two
//! such monomials adds exponent vectors, which is the partwise sum of the
//! partitions.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{One, Zero};

use crate::error::{domain, Result};
use crate::numeric::rational_to_f64;
use crate::partition::Partition;

use super::Q;

/// Exact-rational linear combination of `E_κ` monomials in dimension `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EPolynomial {
    dim: usize,
    terms: BTreeMap<Partition, Q>,
}

/// Exponent vector of `E_κ` over `e_1..e_m`.
pub fn exponents(kappa: &Partition, m: usize) -> Vec<u32> {
    (0..m).map(|i| kappa.part(i) - kappa.part(i + 1)).collect()
}

/// Inverse of [`exponents`]: `κ_j = Σ_{i ≥ j} a_i`.
pub fn from_exponents(a: &[u32]) -> Partition {
    let mut parts = vec![0u32; a.len()];
    let mut acc = 0;
    for i in (0..a.len()).rev() {
        acc += a[i];
        parts[i] = acc;
    }
    Partition::new(parts).expect("suffix sums are decreasing")
}

fn partwise_sum(a: &Partition, b: &Partition) -> Partition {
    let n = a.len().max(b.len());
    Partition::from_parts_unchecked((0..n).map(|i| a.part(i) + b.part(i)).collect())
}

impl EPolynomial {
    pub fn zero(dim: usize) -> Self {
        EPolynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial 1 (the monomial of the empty partition).
    pub fn one(dim: usize) -> Self {
        Self::monomial(dim, Partition::empty(), Q::one()).expect("empty partition fits")
    }

    pub fn monomial(dim: usize, kappa: Partition, coeff: Q) -> Result<Self> {
        let mut p = Self::zero(dim);
        p.add_term(kappa, coeff)?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Partition, Q> {
        &self.terms
    }

    pub fn coeff(&self, kappa: &Partition) -> Q {
        self.terms.get(kappa).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · E_κ`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, kappa: Partition, coeff: Q) -> Result<()> {
        if kappa.len() > self.dim {
            return Err(domain(format!(
                "E-monomial {kappa} does not exist in dimension {}",
                self.dim
            )));
        }
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.entry(kappa) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
        Ok(())
    }

    /// Common degree of all terms, `None` for the zero polynomial.
    ///
    /// Fails when terms of different degrees are present.
    pub fn degree(&self) -> Result<Option<u32>> {
        let mut degrees = self.terms.keys().map(Partition::weight);
        let Some(first) = degrees.next() else {
            return Ok(None);
        };
        if degrees.any(|d| d != first) {
            return Err(domain("polynomial is not homogeneous"));
        }
        Ok(Some(first))
    }

    /// Exact evaluation at elementary symmetric values `e[0] = e_1, …, e[m−1] = e_m`.
    pub fn eval_exact(&self, e: &[Q]) -> Q {
        let mut total = Q::zero();
        for (kappa, c) in &self.terms {
            let mut term = c.clone();
            for (i, a) in exponents(kappa, self.dim).into_iter().enumerate() {
                term *= num::pow(e[i].clone(), a as usize);
            }
            total += term;
        }
        total
    }

    /// Floating-point evaluation at elementary symmetric values.
    pub fn eval_f64(&self, e: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(kappa, c)| {
                exponents(kappa, self.dim)
                    .into_iter()
                    .enumerate()
                    .fold(rational_to_f64(c), |acc, (i, a)| acc * e[i].powi(a as i32))
            })
            .sum()
    }
}

impl fmt::Display for EPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (kappa, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})·E({kappa})")?;
        }
        Ok(())
    }
}

/// Product of two E-polynomials: exponent vectors add, coefficients multiply.
pub fn e_product(p: &EPolynomial, q: &EPolynomial) -> Result<EPolynomial> {
    if p.dim != q.dim {
        return Err(domain(format!(
            "dimension mismatch in E-product: {} vs {}",
            p.dim, q.dim
        )));
    }
    let mut out: BTreeMap<Partition, Q> = BTreeMap::new();
    for (a, ca) in &p.terms {
        for (b, cb) in &q.terms {
            *out.entry(partwise_sum(a, b)).or_insert_with(Q::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(EPolynomial {
        dim: p.dim,
        terms: out,
    })
}

// ---------------------------------------------------------------------------
// Explicit polynomials in x_1..x_m: the independent route used to apply the
// Laplace–Beltrami operator by direct differentiation.
// ---------------------------------------------------------------------------

type Monomials = HashMap<Vec<u32>, Q>;

fn mul_polys(a: &Monomials, b: &Monomials) -> Monomials {
    let mut out = Monomials::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(Q::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn elementary_explicit(r: usize, m: usize) -> Monomials {
    let mut out = Monomials::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize == r {
            let e = (0..m).map(|i| (mask >> i) & 1).collect();
            out.insert(e, Q::one());
        }
    }
    out
}

struct Expander {
    m: usize,
    elementary: Vec<Monomials>,
    cache: HashMap<Partition, Monomials>,
}

impl Expander {
    fn new(m: usize) -> Self {
        Expander {
            m,
            elementary: (0..=m).map(|r| elementary_explicit(r, m)).collect(),
            cache: HashMap::new(),
        }
    }

    fn expand(&mut self, kappa: &Partition) -> Monomials {
        if let Some(p) = self.cache.get(kappa) {
            return p.clone();
        }
        let result = if kappa.is_empty() {
            let mut one = Monomials::new();
            one.insert(vec![0; self.m], Q::one());
            one
        } else {
            // E_κ = e_{l(κ)} · E_{κ − (1^l)}
            let l = kappa.len();
            let stripped = Partition::new(kappa.parts().iter().map(|p| p - 1).collect())
                .expect("stripping a column keeps the order");
            let rest = self.expand(&stripped);
            mul_polys(&self.elementary[l], &rest)
        };
        self.cache.insert(kappa.clone(), result.clone());
        result
    }

    fn explicit_of(&mut self, p: &EPolynomial) -> Monomials {
        let mut out = Monomials::new();
        for (kappa, c) in &p.terms {
            for (e, v) in self.expand(kappa) {
                *out.entry(e).or_insert_with(Q::zero) += c * v;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Rewrites a symmetric explicit polynomial in the E-basis by repeatedly
    /// cancelling its lexicographically leading monomial.
    fn e_basis_of(&mut self, mut poly: Monomials) -> Result<EPolynomial> {
        let mut out = EPolynomial::zero(self.m);
        while let Some(lead) = poly.keys().max().cloned() {
            if lead.windows(2).any(|w| w[0] < w[1]) {
                return Err(domain("explicit polynomial is not symmetric"));
            }
            let c = poly[&lead].clone();
            let kappa = Partition::new(lead).expect("checked decreasing");
            for (e, v) in self.expand(&kappa) {
                let entry = poly.entry(e).or_insert_with(Q::zero);
                *entry -= &c * v;
            }
            poly.retain(|_, v| !v.is_zero());
            out.add_term(kappa, c)?;
        }
        Ok(out)
    }
}

fn derivative(p: &Monomials, i: usize) -> Monomials {
    let mut out = Monomials::new();
    for (e, c) in p {
        if e[i] > 0 {
            let mut d = e.clone();
            d[i] -= 1;
            *out.entry(d).or_insert_with(Q::zero) += c * Q::from_integer(e[i].into());
        }
    }
    out
}

fn shift(p: &Monomials, i: usize, by: u32) -> Monomials {
    p.iter()
        .map(|(e, c)| {
            let mut d = e.clone();
            d[i] += by;
            (d, c.clone())
        })
        .collect()
}

/// Exact quotient of `p` by `(x_i − x_j)`; fails if the division is not exact.
fn divide_by_difference(p: &Monomials, i: usize, j: usize) -> Result<Monomials> {
    // Synthetic division in x_i with coefficients polynomial in the others:
    // Q_{s−1} = P_s + x_j Q_s, remainder P_0 + x_j Q_0 must vanish.
    let top = p.keys().map(|e| e[i]).max().unwrap_or(0);
    let mut by_degree: Vec<Monomials> = vec![Monomials::new(); top as usize + 1];
    for (e, c) in p {
        let mut rest = e.clone();
        let s = rest[i];
        rest[i] = 0;
        by_degree[s as usize].insert(rest, c.clone());
    }
    let mut quotient = Monomials::new();
    let mut carry = Monomials::new();
    for s in (0..=top as usize).rev() {
        let mut cur = by_degree[s].clone();
        for (e, c) in shift(&carry, j, 1) {
            *cur.entry(e).or_insert_with(Q::zero) += c;
        }
        cur.retain(|_, c| !c.is_zero());
        if s == 0 {
            if !cur.is_empty() {
                return Err(domain("polynomial is not divisible by x_i - x_j"));
            }
            break;
        }
        for (e, c) in &cur {
            let mut d = e.clone();
            d[i] = (s - 1) as u32;
            quotient.insert(d, c.clone());
        }
        carry = cur;
    }
    Ok(quotient)
}

/// Applies the Laplace–Beltrami operator
/// `D_m = Σ x_i² ∂²/∂x_i² + Σ_{i≠j} x_i²/(x_i − x_j) ∂/∂x_i`
/// to a homogeneous E-polynomial, by expansion into explicit monomials and
/// exact differentiation.
pub fn lb_apply(p: &EPolynomial) -> Result<EPolynomial> {
    p.degree()?;
    let m = p.dim;
    let mut ex = Expander::new(m);
    let f = ex.explicit_of(p);

    let mut out = Monomials::new();
    let mut accumulate = |poly: Monomials| {
        for (e, c) in poly {
            *out.entry(e).or_insert_with(Q::zero) += c;
        }
    };
    let first: Vec<Monomials> = (0..m).map(|i| derivative(&f, i)).collect();
    for (i, d1) in first.iter().enumerate() {
        accumulate(shift(&derivative(d1, i), i, 2));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let mut numer = shift(&first[i], i, 2);
            for (e, c) in shift(&first[j], j, 2) {
                *numer.entry(e).or_insert_with(Q::zero) -= c;
            }
            numer.retain(|_, c| !c.is_zero());
            accumulate(divide_by_difference(&numer, i, j)?);
        }
    }
    out.retain(|_, c| !c.is_zero());
    ex.e_basis_of(out)
}

/// Coefficients of an E-polynomial in the monomial basis `x^α` (test support).
pub fn explicit_coefficients(p: &EPolynomial) -> HashMap<Vec<u32>, Q> {
    Expander::new(p.dim).explicit_of(p)
}

#[cfg(test)]
mod tests {
    use super::super::special::{q, qi};
    use super::*;

    fn ep(dim: usize, terms: &[(&[u32], Q)]) -> EPolynomial {
        let mut p = EPolynomial::zero(dim);
        for (parts, c) in terms {
            p.add_term(Partition::from(*parts), c.clone()).unwrap();
        }
        p
    }

    #[test]
    fn exponent_bijection() {
        let kappa = Partition::from([5, 2]);
        assert_eq!(exponents(&kappa, 3), vec![3, 2, 0]);
        assert_eq!(from_exponents(&[3, 2, 0]), kappa);
        assert_eq!(from_exponents(&[0, 0]), Partition::empty());
    }

    #[test]
    fn worked_product() {
        let c2 = ep(2, &[(&[2], qi(1)), (&[1, 1], q(-4, 3))]);
        let c32 = ep(2, &[(&[3, 2], q(48, 7))]);
        let prod = e_product(&c2, &c32).unwrap();
        assert_eq!(prod, ep(2, &[(&[5, 2], q(48, 7)), (&[4, 3], q(-64, 7))]));
    }

    #[test]
    fn product_identities() {
        let e1 = ep(3, &[(&[1], qi(1))]);
        assert_eq!(e_product(&e1, &e1).unwrap(), ep(3, &[(&[2], qi(1))]));
        let p = ep(3, &[(&[2, 1], q(2, 5)), (&[1, 1, 1], qi(-3))]);
        assert_eq!(e_product(&p, &EPolynomial::one(3)).unwrap(), p);
        assert!(e_product(&p, &EPolynomial::one(2)).is_err());
    }

    #[test]
    fn add_term_respects_dimension_and_cancellation() {
        let mut p = EPolynomial::zero(2);
        assert!(p.add_term(Partition::from([1, 1, 1]), qi(1)).is_err());
        p.add_term(Partition::from([2]), qi(1)).unwrap();
        p.add_term(Partition::from([2]), qi(-1)).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn lb_examples() {
        let e1 = ep(2, &[(&[1], qi(1))]);
        assert_eq!(lb_apply(&e1).unwrap(), e1);
        let c2 = ep(2, &[(&[2], qi(1)), (&[1, 1], q(-4, 3))]);
        let want = ep(2, &[(&[2], qi(4)), (&[1, 1], q(-16, 3))]);
        assert_eq!(lb_apply(&c2).unwrap(), want);
        assert!(lb_apply(&EPolynomial::one(3)).unwrap().is_zero());
        let mixed = ep(2, &[(&[2], qi(1)), (&[1], qi(1))]);
        assert!(lb_apply(&mixed).is_err());
    }

    #[test]
    fn explicit_round_trip() {
        let p = ep(3, &[(&[3, 1], q(2, 3)), (&[2, 2], qi(-1)), (&[2, 1, 1], q(7, 2))]);
        let mut ex = Expander::new(3);
        let explicit = ex.explicit_of(&p);
        assert_eq!(ex.e_basis_of(explicit).unwrap(), p);
    }

    #[test]
    fn evaluation_at_elementary_values() {
        // E_(2,1) = e_1 e_2 at x = (1, 2): e_1 = 3, e_2 = 2.
        let p = ep(2, &[(&[2, 1], qi(1))]);
        assert_eq!(p.eval_exact(&[qi(3), qi(2)]), qi(6));
    }
}
