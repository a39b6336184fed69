//! Zonal polynomials of a fixed degree and dimension, expanded in the
//! elementary-symmetric basis.
//!
//! Construction works in the monomial symmetric basis `M_λ`, where the
//! Laplace–Beltrami operator is triangular with closed-form entries:
//! the coefficient of `M_ν` in `D_m M_λ` is `Σ_{i<j} Σ_{w=1..ν_j} (ν_i − ν_j + 2w)`
//! over the moves `(ν_i, ν_j) → (ν_i + w, ν_j − w)` that sort back to `λ`,
//! and the diagonal entry is `d(λ)`. Each eigenvector is back-substituted
//! along dominance, normalized jointly so the rows sum to `(tr X)^k`, and
//! finally rewritten in the `E_μ` basis through the unitriangular change of
//! basis `E_μ = e_{μ'} = M_μ + (lower terms)`.

use std::collections::HashMap;

use num::{BigInt, One, Zero};

use crate::error::{domain, Result};
use crate::numeric::rational_to_f64;
use crate::partition::{dominance_leq, lb_eigenvalue, partitions_of, Partition};

use super::epoly::EPolynomial;
use super::special::factorial;
use super::Q;

/// Change of basis between `{C_κ}` and `{E_μ}` for partitions of `k` with at
/// most `m` parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalTable {
    degree: u32,
    dim: usize,
    partitions: Vec<Partition>,
    index: HashMap<Partition, usize>,
    /// Row κ holds the E-coordinates of `C_κ`.
    q: Vec<Vec<Q>>,
    /// Row μ holds the zonal coordinates of `E_μ`.
    inverse: Vec<Vec<Q>>,
}

impl ZonalTable {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Partitions in descending lexicographic order.
    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn index_of(&self, kappa: &Partition) -> Option<usize> {
        self.index.get(kappa).copied()
    }

    /// `q[κ, μ]`, the coefficient of `E_μ` in `C_κ`.
    pub fn coeff(&self, kappa: &Partition, mu: &Partition) -> Q {
        match (self.index_of(kappa), self.index_of(mu)) {
            (Some(i), Some(j)) => self.q[i][j].clone(),
            _ => Q::zero(),
        }
    }

    /// Coefficient of `C_κ` in the zonal expansion of `E_μ`.
    pub fn inverse_coeff(&self, mu: &Partition, kappa: &Partition) -> Q {
        match (self.index_of(mu), self.index_of(kappa)) {
            (Some(i), Some(j)) => self.inverse[i][j].clone(),
            _ => Q::zero(),
        }
    }

    /// `C_κ` as an E-polynomial.
    pub fn row(&self, kappa: &Partition) -> Result<EPolynomial> {
        let i = self.index_of(kappa).ok_or_else(|| {
            domain(format!(
                "partition {kappa} is not in the degree-{} dimension-{} table",
                self.degree, self.dim
            ))
        })?;
        let mut p = EPolynomial::zero(self.dim);
        for (j, c) in self.q[i].iter().enumerate() {
            p.add_term(self.partitions[j].clone(), c.clone())?;
        }
        Ok(p)
    }

    /// Rewrites a homogeneous E-polynomial of this degree in the zonal basis.
    pub fn to_zonal_basis(&self, p: &EPolynomial) -> Result<Vec<(Partition, Q)>> {
        if p.dim() != self.dim {
            return Err(domain("dimension mismatch in zonal-basis conversion"));
        }
        let mut coords = vec![Q::zero(); self.partitions.len()];
        for (mu, c) in p.terms() {
            let i = self.index_of(mu).ok_or_else(|| {
                domain(format!("E-monomial {mu} has the wrong degree for this table"))
            })?;
            for (j, v) in self.inverse[i].iter().enumerate() {
                if !v.is_zero() {
                    coords[j] += c * v;
                }
            }
        }
        Ok(self
            .partitions
            .iter()
            .cloned()
            .zip(coords)
            .filter(|(_, c)| !c.is_zero())
            .collect())
    }

    /// Nonzero entries `(κ, μ, q[κ, μ])`, row by row.
    pub fn entries(&self) -> impl Iterator<Item = (&Partition, &Partition, &Q)> {
        self.q.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(j, c)| (&self.partitions[i], &self.partitions[j], c))
        })
    }

    /// Builds a table from stored coefficients, checking every invariant:
    /// lexicographic triangularity with nonzero diagonal, the column sums of
    /// `(tr X)^k`, and an exact inverse.
    pub fn from_entries(degree: u32, dim: usize, entries: Vec<(Partition, Partition, Q)>) -> Result<Self> {
        let partitions = partitions_of(degree, dim);
        let index: HashMap<Partition, usize> =
            partitions.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let n = partitions.len();
        let mut q = vec![vec![Q::zero(); n]; n];
        for (kappa, mu, c) in entries {
            let (Some(&i), Some(&j)) = (index.get(&kappa), index.get(&mu)) else {
                return Err(domain(format!(
                    "entry ({kappa}, {mu}) does not belong to degree {degree}, dimension {dim}"
                )));
            };
            q[i][j] = c;
        }
        let table = Self::finish(degree, dim, partitions, index, q)?;
        table.validate()?;
        Ok(table)
    }

    fn finish(
        degree: u32,
        dim: usize,
        partitions: Vec<Partition>,
        index: HashMap<Partition, usize>,
        q: Vec<Vec<Q>>,
    ) -> Result<Self> {
        let inverse = invert_upper(&q)?;
        Ok(ZonalTable {
            degree,
            dim,
            partitions,
            index,
            q,
            inverse,
        })
    }

    /// Checks triangularity, the nonzero diagonal, the `(tr X)^k` column sums
    /// and `inverse · q = I`.
    pub fn validate(&self) -> Result<()> {
        let n = self.partitions.len();
        for i in 0..n {
            if self.q[i][i].is_zero() {
                return Err(domain(format!("zero diagonal at {}", self.partitions[i])));
            }
            // Index order is descending lex, so entries left of the diagonal
            // would be lexicographically above κ.
            if self.q[i][..i].iter().any(|c| !c.is_zero()) {
                return Err(domain(format!(
                    "row {} has coefficients above it in lexicographic order",
                    self.partitions[i]
                )));
            }
        }
        for j in 0..n {
            let sum: Q = self.q.iter().map(|row| &row[j]).sum();
            let want = if j == 0 { Q::one() } else { Q::zero() };
            if sum != want {
                return Err(domain(format!(
                    "column {} sums to {sum}, expected {want}",
                    self.partitions[j]
                )));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v: Q = (0..n).map(|l| &self.inverse[i][l] * &self.q[l][j]).sum();
                let want = if i == j { Q::one() } else { Q::zero() };
                if v != want {
                    return Err(domain("inverse table does not invert the zonal table"));
                }
            }
        }
        Ok(())
    }

    /// `C_κ` evaluated at the eigenvalues `spectrum`, exactly.
    pub fn eval_exact(&self, kappa: &Partition, spectrum: &[Q]) -> Result<Q> {
        self.check_eval(kappa, spectrum.len())?;
        let e = elementary_values(spectrum, Q::zero(), Q::one());
        Ok(self.row(kappa)?.eval_exact(&e))
    }

    /// `C_κ` evaluated at the eigenvalues `spectrum` in floating point.
    pub fn eval_f64(&self, kappa: &Partition, spectrum: &[f64]) -> Result<f64> {
        self.check_eval(kappa, spectrum.len())?;
        let e = elementary_values(spectrum, 0.0, 1.0);
        let i = self.index_of(kappa).expect("checked");
        Ok(self.q[i]
            .iter()
            .zip(&self.partitions)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, mu)| {
                (0..self.dim).fold(rational_to_f64(c), |acc, r| {
                    acc * e[r].powi((mu.part(r) - mu.part(r + 1)) as i32)
                })
            })
            .sum())
    }

    fn check_eval(&self, kappa: &Partition, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(domain(format!(
                "spectrum of length {len} does not match table dimension {}",
                self.dim
            )));
        }
        if kappa.weight() != self.degree {
            return Err(domain(format!(
                "partition {kappa} does not have the table degree {}",
                self.degree
            )));
        }
        if self.index_of(kappa).is_none() {
            return Err(domain(format!("partition {kappa} is longer than the dimension")));
        }
        Ok(())
    }
}

/// `e_1, …, e_m` of the values in `x`.
fn elementary_values<T>(x: &[T], zero: T, one: T) -> Vec<T>
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
{
    let m = x.len();
    let mut e = vec![zero; m + 1];
    e[0] = one;
    for xi in x {
        for r in (1..=m).rev() {
            e[r] = e[r].clone() + e[r - 1].clone() * xi.clone();
        }
    }
    e.into_iter().skip(1).collect()
}

/// Inverse of a matrix that is upper triangular in index order.
fn invert_upper(a: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let n = a.len();
    let mut inv = vec![vec![Q::zero(); n]; n];
    for i in (0..n).rev() {
        if a[i][i].is_zero() {
            return Err(domain("singular triangular matrix"));
        }
        let d = Q::one() / &a[i][i];
        inv[i][i] = d.clone();
        for j in (i + 1)..n {
            let mut s = Q::zero();
            for l in (i + 1)..=j {
                if !a[i][l].is_zero() && !inv[l][j].is_zero() {
                    s += &a[i][l] * &inv[l][j];
                }
            }
            inv[i][j] = -s * &d;
        }
    }
    Ok(inv)
}

/// Monomial-basis vectors of `E_μ` for all `μ` of a degree, built by
/// stripping columns: `E_μ = e_{l(μ)} · E_{μ − (1^l)}`.
struct ElementaryToMonomial {
    dim: usize,
    cache: HashMap<Partition, HashMap<Partition, BigInt>>,
}

impl ElementaryToMonomial {
    fn new(dim: usize) -> Self {
        ElementaryToMonomial {
            dim,
            cache: HashMap::new(),
        }
    }

    fn vector(&mut self, mu: &Partition) -> HashMap<Partition, BigInt> {
        if let Some(v) = self.cache.get(mu) {
            return v.clone();
        }
        let v = if mu.is_empty() {
            HashMap::from([(Partition::empty(), BigInt::one())])
        } else {
            let l = mu.len();
            let stripped = Partition::new(mu.parts().iter().map(|p| p - 1).collect())
                .expect("stripping a column keeps the order");
            let base = self.vector(&stripped);
            times_elementary(&base, l, mu.weight(), self.dim)
        };
        self.cache.insert(mu.clone(), v.clone());
        v
    }
}

/// Multiplies a monomial-basis vector by `e_r`: the coefficient of `M_ν`
/// counts the `r`-subsets `S` of the support of `ν` with `sort(ν − 1_S)` in
/// the input.
fn times_elementary(
    base: &HashMap<Partition, BigInt>,
    r: usize,
    degree: u32,
    dim: usize,
) -> HashMap<Partition, BigInt> {
    let mut out = HashMap::new();
    for nu in partitions_of(degree, dim) {
        let support = nu.len();
        if support < r {
            continue;
        }
        let mut total = BigInt::zero();
        for_each_subset(support, r, &mut |subset| {
            let mut lowered: Vec<u32> = nu.parts().to_vec();
            for &i in subset {
                lowered[i] -= 1;
            }
            lowered.sort_unstable_by(|a, b| b.cmp(a));
            let lam = Partition::new(lowered).expect("sorted");
            if let Some(c) = base.get(&lam) {
                total += c;
            }
        });
        if !total.is_zero() {
            out.insert(nu, total);
        }
    }
    out
}

fn for_each_subset(n: usize, r: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, f);
            cur.pop();
        }
    }
    rec(0, n, r, &mut Vec::with_capacity(r), f);
}

/// Builds the zonal table for degree `k` in dimension `m`.
pub fn zonal_table(k: u32, m: usize) -> ZonalTable {
    assert!(m >= 1, "dimension must be positive");
    let partitions = partitions_of(k, m);
    let n = partitions.len();
    let index: HashMap<Partition, usize> =
        partitions.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();

    // Off-diagonal Laplace–Beltrami entries in the monomial basis:
    // lb[λ][ν] is the coefficient of M_ν in D_m M_λ.
    let mut lb = vec![vec![0i64; n]; n];
    for (vi, nu) in partitions.iter().enumerate() {
        let padded: Vec<u32> = (0..m).map(|i| nu.part(i)).collect();
        for i in 0..m {
            for j in (i + 1)..m {
                for w in 1..=padded[j] {
                    let mut alpha = padded.clone();
                    alpha[i] += w;
                    alpha[j] -= w;
                    alpha.sort_unstable_by(|a, b| b.cmp(a));
                    let lam = Partition::new(alpha).expect("sorted");
                    let li = index[&lam];
                    lb[li][vi] += (padded[i] as i64) - (padded[j] as i64) + 2 * w as i64;
                }
            }
        }
    }
    let eig: Vec<i64> = partitions
        .iter()
        .map(|p| lb_eigenvalue(p, m).expect("length bounded by m"))
        .collect();

    // Unnormalized eigenvectors with unit leading coefficient.
    let mut mono = vec![vec![Q::zero(); n]; n];
    for ki in 0..n {
        let kappa = &partitions[ki];
        mono[ki][ki] = Q::one();
        for li in (ki + 1)..n {
            let lam = &partitions[li];
            if !dominance_leq(lam, kappa).expect("same weight") {
                continue;
            }
            let gap = eig[ki] - eig[li];
            assert!(gap > 0, "dominance-monotone eigenvalues");
            let mut s = Q::zero();
            for mi in ki..li {
                if lb[mi][li] != 0 && !mono[ki][mi].is_zero() {
                    s += &mono[ki][mi] * Q::from_integer(lb[mi][li].into());
                }
            }
            mono[ki][li] = s / Q::from_integer(gap.into());
        }
    }

    // Joint normalization: Σ_κ s_κ c_κ[λ] = k! / Π λ_i!, the coefficient of
    // M_λ in (x_1 + ⋯ + x_m)^k.
    let kfact = factorial(k as u64);
    for li in 0..n {
        let multinomial = Q::new(
            kfact.clone(),
            partitions[li]
                .parts()
                .iter()
                .fold(BigInt::one(), |acc, &p| acc * factorial(p as u64)),
        );
        let mut rest = multinomial;
        for row in &mono[..li] {
            rest -= &row[li];
        }
        // mono[li][li] is 1 before scaling.
        let scale = rest;
        for v in mono[li].iter_mut() {
            *v *= &scale;
        }
    }

    // Monomial → E coordinates: solve Σ_μ q[κ][μ] B[μ][λ] = c[κ][λ] with B
    // unitriangular.
    let mut e2m = ElementaryToMonomial::new(m);
    let basis: Vec<Vec<BigInt>> = partitions
        .iter()
        .map(|mu| {
            let v = e2m.vector(mu);
            partitions
                .iter()
                .map(|lam| v.get(lam).cloned().unwrap_or_else(BigInt::zero))
                .collect()
        })
        .collect();
    let mut q = vec![vec![Q::zero(); n]; n];
    for ki in 0..n {
        for li in ki..n {
            let mut v = mono[ki][li].clone();
            for mi in ki..li {
                if !q[ki][mi].is_zero() && !basis[mi][li].is_zero() {
                    v -= &q[ki][mi] * Q::from_integer(basis[mi][li].clone());
                }
            }
            debug_assert!(basis[li][li].is_one());
            q[ki][li] = v;
        }
    }

    ZonalTable::finish(k, m, partitions, index, q).expect("nonzero diagonal")
}
