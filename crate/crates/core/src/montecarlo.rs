//! Simulation of the one-way MANOVA model, as an oracle independent of the
//! series evaluators.
//!
//! Each replicate draws `x_ij ~ N_m(μ_i, Σ)`, forms the between-group matrix
//! `H` and the within-group matrix `E`, and returns the largest root `ℓ_1` and
//! the Pillai trace of the pencil `(H, H + E)`. Replicate `r` uses its own
//! ChaCha8 stream `r` under the plan's seed, so samples do not depend on the
//! number of worker threads.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Name of the generator recorded in sample metadata.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), stream = replicate index";

/// Parameters of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub m: usize,
    pub group_sizes: Vec<usize>,
    /// One mean vector of length `m` per group.
    pub means: Vec<Vec<f64>>,
    /// Row-major `m × m` covariance.
    pub covariance: Vec<Vec<f64>>,
    pub replications: usize,
    pub seed: u64,
}

impl SimulationPlan {
    /// A plan with identity covariance.
    pub fn new(m: usize, group_sizes: Vec<usize>, means: Vec<Vec<f64>>, replications: usize, seed: u64) -> Result<Self> {
        let covariance = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let plan = SimulationPlan {
            m,
            group_sizes,
            means,
            covariance,
            replications,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_covariance(mut self, covariance: Vec<Vec<f64>>) -> Result<Self> {
        self.covariance = covariance;
        self.validate()?;
        Ok(self)
    }

    pub fn groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn n_h(&self) -> usize {
        self.groups() - 1
    }

    pub fn n_e(&self) -> usize {
        self.group_sizes.iter().sum::<usize>() - self.groups()
    }

    pub fn n_min(&self) -> usize {
        self.m.min(self.n_h())
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m;
        if m == 0 {
            return Err(domain("dimension must be positive"));
        }
        if self.groups() < 2 {
            return Err(domain("at least two groups are needed"));
        }
        if self.group_sizes.contains(&0) {
            return Err(domain("group sizes must be positive"));
        }
        if self.replications == 0 {
            return Err(domain("the number of replications must be positive"));
        }
        if self.n_h() + self.n_e() < m {
            return Err(domain(format!(
                "total degrees of freedom n_H + n_E = {} are below the dimension {m}; H + E would be singular",
                self.n_h() + self.n_e()
            )));
        }
        if self.means.len() != self.groups() || self.means.iter().any(|mu| mu.len() != m) {
            return Err(domain("need one mean vector of length m per group"));
        }
        let sigma = self.covariance_matrix()?;
        if (&sigma - sigma.transpose()).amax() > 1e-12 * sigma.amax().max(1.0) {
            return Err(domain("covariance must be symmetric"));
        }
        if Cholesky::new(sigma).is_none() {
            return Err(domain("covariance must be positive definite"));
        }
        Ok(())
    }

    fn covariance_matrix(&self) -> Result<DMatrix<f64>> {
        to_matrix(&self.covariance, self.m)
    }

    /// Spectrum of the noncentrality matrix implied by the plan.
    pub fn noncentrality(&self) -> Result<Vec<f64>> {
        noncentrality_of(&self.means, &self.group_sizes, &self.covariance)
    }
}

fn to_matrix(rows: &[Vec<f64>], m: usize) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(domain(format!("expected an {m} × {m} matrix")));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

fn check_rank_inputs(group_sizes: &[usize], m: usize, min_groups: usize) -> Result<()> {
    if group_sizes.len() < min_groups {
        return Err(domain(format!("need at least {min_groups} groups")));
    }
    if group_sizes.contains(&0) {
        return Err(domain("group sizes must be positive"));
    }
    if m == 0 {
        return Err(domain("dimension must be positive"));
    }
    Ok(())
}

/// Displacements `+a` for group `i` and `−b` for group `j` along one axis,
/// with `n_i a = n_j b` (zero weighted mean) and `n_i a² + n_j b² = θ`.
fn symmetric_pair(theta: f64, n_i: usize, n_j: usize) -> (f64, f64) {
    let (ni, nj) = (n_i as f64, n_j as f64);
    let a = (theta * nj / (ni * (ni + nj))).sqrt();
    (a, ni * a / nj)
}

/// Group means on the first axis whose noncentrality spectrum is `(θ_1, 0, …)`.
pub fn build_means_rank1(theta1: f64, group_sizes: &[usize], m: usize) -> Result<Vec<Vec<f64>>> {
    check_rank_inputs(group_sizes, m, 2)?;
    if !(theta1 >= 0.0 && theta1.is_finite()) {
        return Err(domain("noncentrality must be finite and nonnegative"));
    }
    let mut means = vec![vec![0.0; m]; group_sizes.len()];
    let (a, b) = symmetric_pair(theta1, group_sizes[0], group_sizes[1]);
    means[0][0] = a;
    means[1][0] = -b;
    Ok(means)
}

/// Group means in the plane of the first two axes whose noncentrality
/// spectrum is `(θ_1, θ_2, 0, …)`.
///
/// Groups 1 and 2 carry the first direction as in [`build_means_rank1`]; the
/// second direction moves both by `+c` and group 3 by `−c (n_1 + n_2)/n_3`,
/// which keeps the weighted mean at zero and the two directions orthogonal in
/// the `n`-weighted inner product.
pub fn build_means_rank2(theta1: f64, theta2: f64, group_sizes: &[usize], m: usize) -> Result<Vec<Vec<f64>>> {
    check_rank_inputs(group_sizes, m, 3)?;
    if !(theta1 >= theta2 && theta2 >= 0.0 && theta1.is_finite()) {
        return Err(domain("need finite noncentralities with theta1 >= theta2 >= 0"));
    }
    if m < 2 && theta2 > 0.0 {
        return Err(domain("a rank-two alternative needs m >= 2"));
    }
    let mut means = build_means_rank1(theta1, group_sizes, m)?;
    if theta2 > 0.0 {
        let pair = (group_sizes[0] + group_sizes[1]) as f64;
        let n3 = group_sizes[2] as f64;
        let c = (theta2 / (pair * (1.0 + pair / n3))).sqrt();
        means[0][1] = c;
        means[1][1] = c;
        means[2][1] = -c * pair / n3;
    }
    Ok(means)
}

/// Descending eigenvalues of `Σ^{-1} Σ_i n_i (μ_i − μ̄)(μ_i − μ̄)ᵀ`, with the
/// weighted grand mean `μ̄ = Σ n_i μ_i / n`.
pub fn noncentrality_of(means: &[Vec<f64>], group_sizes: &[usize], covariance: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = covariance.len();
    if means.len() != group_sizes.len() || means.iter().any(|mu| mu.len() != m) {
        return Err(domain("need one mean vector of length m per group"));
    }
    let n: usize = group_sizes.iter().sum();
    if n == 0 {
        return Err(domain("group sizes must not all be zero"));
    }
    let sigma = to_matrix(covariance, m)?;
    let mut grand = DVector::zeros(m);
    for (mu, &ni) in means.iter().zip(group_sizes) {
        grand += DVector::from_column_slice(mu) * ni as f64;
    }
    grand /= n as f64;
    let mut scatter = DMatrix::zeros(m, m);
    for (mu, &ni) in means.iter().zip(group_sizes) {
        let d = DVector::from_column_slice(mu) - &grand;
        scatter += &d * d.transpose() * ni as f64;
    }
    generalized_symmetric_eigen(&scatter, &sigma).map_err(|e| match e {
        Error::Decomposition(msg) => domain(format!("singular covariance: {msg}")),
        other => other,
    })
}

/// Descending roots `ℓ` of `det(H − ℓ S) = 0` for symmetric `H` and symmetric
/// positive definite `S`, via `S = L Lᵀ` and the eigenvalues of `L⁻¹ H L⁻ᵀ`.
pub fn generalized_symmetric_eigen(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<Vec<f64>> {
    let m = s.nrows();
    if !s.is_square() || h.shape() != s.shape() {
        return Err(Error::Decomposition("matrices must be square and of equal size".into()));
    }
    let chol = Cholesky::new(s.clone())
        .ok_or_else(|| Error::Decomposition("S is not positive definite".into()))?;
    let l = chol.l();
    let l_inv_h = l
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::Decomposition("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&l_inv_h.transpose())
        .ok_or_else(|| Error::Decomposition("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);

    let scale = s.norm().max(f64::MIN_POSITIVE);
    let lt = l.transpose();
    for (idx, &ell) in eig.eigenvalues.iter().enumerate() {
        let y = eig.eigenvectors.column(idx).into_owned();
        let mut v = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::Decomposition("singular Cholesky factor".into()))?;
        v /= v.norm();
        let residual = (h * &v - s * &v * ell).norm();
        if residual > 1e-10 * scale.max(h.norm()) {
            return Err(Error::Decomposition(format!(
                "eigenpair residual {residual:e} exceeds tolerance"
            )));
        }
    }
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    debug_assert_eq!(values.len(), m);
    Ok(values)
}

/// One simulated replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Largest root of the Beta matrix.
    pub l1: f64,
    /// Pillai trace: sum of the `n_min` largest roots.
    pub v: f64,
}

fn replicate(plan: &SimulationPlan, chol_l: &DMatrix<f64>, index: u64) -> Result<Sample> {
    let m = plan.m;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(index);

    let n: usize = plan.group_sizes.iter().sum();
    let mut group_means = Vec::with_capacity(plan.groups());
    let mut grand = DVector::zeros(m);
    let mut e = DMatrix::zeros(m, m);
    for (mu, &ni) in plan.means.iter().zip(&plan.group_sizes) {
        let mu = DVector::from_column_slice(mu);
        let obs: Vec<DVector<f64>> = (0..ni)
            .map(|_| {
                let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
                &mu + chol_l * z
            })
            .collect();
        let mean = obs.iter().fold(DVector::zeros(m), |acc, x| acc + x) / ni as f64;
        for x in &obs {
            let d = x - &mean;
            e += &d * d.transpose();
        }
        grand += &mean * ni as f64;
        group_means.push(mean);
    }
    grand /= n as f64;
    let mut h = DMatrix::zeros(m, m);
    for (mean, &ni) in group_means.iter().zip(&plan.group_sizes) {
        let d = mean - &grand;
        h += &d * d.transpose() * ni as f64;
    }
    let roots = generalized_symmetric_eigen(&h, &(&h + &e))?;
    let l1 = roots[0].clamp(0.0, 1.0);
    let v = roots
        .iter()
        .take(plan.n_min())
        .map(|r| r.clamp(0.0, 1.0))
        .sum();
    Ok(Sample { l1, v })
}

/// All replicates of a plan, in replicate order.
pub fn simulate_stats(plan: &SimulationPlan) -> Result<Vec<Sample>> {
    plan.validate()?;
    let chol_l = Cholesky::new(plan.covariance_matrix()?)
        .ok_or_else(|| domain("covariance must be positive definite"))?
        .l();
    (0..plan.replications as u64)
        .into_par_iter()
        .map(|r| replicate(plan, &chol_l, r))
        .collect()
}

/// Order-statistic quantile with linear interpolation between neighbours.
pub fn empirical_quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain("no samples"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(domain(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and a continuous `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain("no samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(m: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn generalized_eigen_examples() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let ones = generalized_symmetric_eigen(&s, &s).unwrap();
        assert!(ones.iter().all(|l| (l - 1.0).abs() < 1e-12));
        let zeros = generalized_symmetric_eigen(&DMatrix::zeros(2, 2), &s).unwrap();
        assert!(zeros.iter().all(|l| l.abs() < 1e-12));
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let roots = generalized_symmetric_eigen(&h, &s).unwrap();
        assert!((roots[0] - 0.5).abs() < 1e-14 && roots[1].abs() < 1e-14);
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            generalized_symmetric_eigen(&h, &indefinite),
            Err(Error::Decomposition(_))
        ));
    }

    #[test]
    fn mean_constructions_round_trip() {
        let sizes = [10, 10, 10];
        let means = build_means_rank1(3.0, &sizes, 4).unwrap();
        assert!((means[0][0] - 0.15f64.sqrt()).abs() < 1e-15);
        let omega = noncentrality_of(&means, &sizes, &identity(4)).unwrap();
        assert!((omega[0] - 3.0).abs() < 1e-12 && omega[1..].iter().all(|s| s.abs() < 1e-12));

        let zero = build_means_rank1(0.0, &sizes, 4).unwrap();
        assert!(zero.iter().flatten().all(|&x| x == 0.0));

        for sizes in [vec![6, 6, 6], vec![6, 4, 5, 7, 3]] {
            let means = build_means_rank2(9.0, 3.0, &sizes, 6).unwrap();
            let omega = noncentrality_of(&means, &sizes, &identity(6)).unwrap();
            assert!((omega[0] - 9.0).abs() < 1e-12 && (omega[1] - 3.0).abs() < 1e-12);
            let (u, v): (Vec<f64>, Vec<f64>) = means.iter().map(|mu| (mu[0], mu[1])).unzip();
            let weighted_dot: f64 = (0..sizes.len()).map(|i| sizes[i] as f64 * u[i] * v[i]).sum();
            assert!(weighted_dot.abs() < 1e-14);
            assert_eq!(
                build_means_rank2(9.0, 0.0, &sizes, 6).unwrap(),
                build_means_rank1(9.0, &sizes, 6).unwrap()
            );
        }
        assert!(build_means_rank1(1.0, &[3], 2).is_err());
        assert!(build_means_rank2(1.0, 0.5, &[3, 3], 2).is_err());
    }

    #[test]
    fn two_point_noncentrality() {
        let means = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let omega = noncentrality_of(&means, &[1, 1], &identity(2)).unwrap();
        assert!((omega[0] - 2.0).abs() < 1e-14 && omega[1].abs() < 1e-14);
        let equal = vec![vec![0.5, 0.5]; 3];
        let omega = noncentrality_of(&equal, &[2, 3, 4], &identity(2)).unwrap();
        assert!(omega.iter().all(|s| s.abs() < 1e-14));
        let singular = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(noncentrality_of(&means, &[1, 1], &singular), Err(Error::Domain(_))));
    }

    #[test]
    fn plan_validation() {
        let means = vec![vec![0.0; 6]; 3];
        assert!(SimulationPlan::new(6, vec![2, 2, 2], means.clone(), 10, 1).is_err());
        assert!(SimulationPlan::new(6, vec![6, 6, 6], means.clone(), 0, 1).is_err());
        assert!(SimulationPlan::new(6, vec![6, 6], means.clone(), 10, 1).is_err());
        let plan = SimulationPlan::new(6, vec![6, 6, 6], means, 10, 1).unwrap();
        let mut bad = identity(6);
        bad[0][1] = 2.0;
        assert!(plan.clone().with_covariance(bad).is_err());
    }

    #[test]
    fn samples_are_reproducible_and_in_range() {
        let sizes = vec![6, 6, 6];
        let means = build_means_rank1(9.0, &sizes, 6).unwrap();
        let plan = SimulationPlan::new(6, sizes, means, 200, 7).unwrap();
        let a = simulate_stats(&plan).unwrap();
        let b = simulate_stats(&plan).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| (0.0..=1.0).contains(&s.l1) && (0.0..=2.0).contains(&s.v) && s.v >= s.l1));
        let other = simulate_stats(&SimulationPlan { seed: 8, ..plan }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn quantile_examples() {
        let xs = [5.0, 1.0, 4.0, 2.0, 3.0];
        assert_eq!(empirical_quantile(&xs, 0.5).unwrap(), 3.0);
        assert_eq!(empirical_quantile(&xs, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_quantile(&xs, 1.0).unwrap(), 5.0);
        assert_eq!(empirical_quantile(&xs, 0.125).unwrap(), 1.5);
        assert!(empirical_quantile(&[], 0.5).is_err());
    }

    #[test]
    fn ks_of_exact_grid() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&xs, Ok).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
    }
}
