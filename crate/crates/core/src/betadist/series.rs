//! Exact block coefficients and double-double evaluation of the double series
//!
//! `F(x) = c · etr(−Ω/2) · x^{a} · Σ_k Σ_t b_{k,t} x^{k+t}`,  `a = m n_H / 2`,
//!
//! shared by Roy's largest root and the Pillai trace. Each `b_{k,t}` is an
//! exact rational (the noncentrality spectrum enters through its exact binary
//! value). Blocks are folded along `n = k + t` into one polynomial and
//! evaluated by double-double Horner, which absorbs the cancellation of the
//! alternating `t`-series.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num::Zero;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::numeric::{horner_dd, rational_from_f64, DoubleDouble};
use crate::partition::{partitions_of, Partition};
use crate::zonal::special::{factorial, q, qi};
use crate::zonal::{
    gen_pochhammer, horizontal_strips, kushner_g, mv_gamma_ratio_parts, pochhammer,
    zonal_at_identity, GammaRatio, ZonalStore, Q,
};

use super::design::{t_truncation_bound, ManovaDesign, SeriesControl, SeriesResult, Statistic};

/// How the `κ`-sum and the product coefficients are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// Zero noncentrality: only `k = 0`, `g^δ_{0,τ} = [δ = τ]`.
    Null,
    /// Rank-one noncentrality: `κ = (k)` and Kushner's closed form.
    Rank1,
    /// Arbitrary spectrum: all `κ` and product coefficients from the zonal tables.
    General,
}

impl Route {
    /// The cheapest route able to handle the design's spectrum.
    pub fn for_design(design: &ManovaDesign) -> Route {
        match design.rank() {
            0 => Route::Null,
            1 => Route::Rank1,
            _ => Route::General,
        }
    }
}

/// Builds exact `t`-columns `(b_{0,t}, …, b_{K,t})`.
#[derive(Debug)]
struct BlockBuilder {
    statistic: Statistic,
    route: Route,
    n_min: usize,
    /// `(m + 1 − n_E)/2`
    tau_arg: Q,
    /// `n_max / 2`
    delta_num_arg: Q,
    /// `(n_H + m + 1)/2`, Roy only.
    delta_den_arg: Q,
    /// `m n_H / 2`
    base: Q,
    /// Per `k`: every `κ ⊢ k` with its nonzero weight `A_κ C_κ(Ω/2)`.
    kappa_weights: Vec<Vec<(Partition, Q)>>,
    store: &'static ZonalStore,
    /// `D_δ`, shared by all columns.
    delta_memo: Mutex<HashMap<Partition, Q>>,
}

impl BlockBuilder {
    fn new(statistic: Statistic, route: Route, design: &ManovaDesign, k_max: u32) -> Result<Self> {
        let (m, n_h, n_e) = (design.m() as i64, design.n_h() as i64, design.n_e() as i64);
        let n_min = design.n_min();
        let n_max = design.n_max() as i64;
        if design.rank() > n_min {
            return Err(domain(format!(
                "noncentrality rank {} exceeds min(m, n_H) = {n_min}",
                design.rank()
            )));
        }
        if route == Route::Rank1 && design.rank() > 1 || route == Route::Null && design.rank() > 0 {
            return Err(domain(format!("spectrum of {design} does not fit the {route:?} route")));
        }
        let half_theta: Vec<Q> = (0..n_min)
            .map(|i| match design.theta().get(i) {
                Some(&t) => rational_from_f64(t) / qi(2),
                None => Q::zero(),
            })
            .collect();

        let k_top = if route == Route::Null { 0 } else { k_max };
        let a_num = q(n_h + n_e, 2);
        let a_den = match statistic {
            Statistic::Roy => q(n_h, 2),
            Statistic::Pillai => q(n_max, 2),
        };
        let identity_dim = match statistic {
            Statistic::Roy => design.m(),
            Statistic::Pillai => n_min,
        };
        let store = ZonalStore::global();
        let mut kappa_weights = Vec::with_capacity(k_top as usize + 1);
        for k in 0..=k_top {
            let kappas = match route {
                Route::General => partitions_of(k, n_min),
                _ => vec![Partition::row(k)],
            };
            let table = (route == Route::General).then(|| store.table(k, n_min));
            let mut row = Vec::new();
            for kappa in kappas {
                let c_omega = match &table {
                    Some(t) => t.eval_exact(&kappa, &half_theta)?,
                    None => num::pow(half_theta[0].clone(), k as usize),
                };
                if c_omega.is_zero() {
                    continue;
                }
                let weight = gen_pochhammer(&a_num, &kappa)
                    / (gen_pochhammer(&a_den, &kappa)
                        * zonal_at_identity(&kappa, identity_dim)
                        * Q::from_integer(factorial(k as u64)));
                row.push((kappa, weight * c_omega));
            }
            kappa_weights.push(row);
        }

        Ok(BlockBuilder {
            statistic,
            route,
            n_min,
            tau_arg: q(m + 1 - n_e, 2),
            delta_num_arg: q(n_max, 2),
            delta_den_arg: q(n_h + m + 1, 2),
            base: q(m * n_h, 2),
            kappa_weights,
            store,
            delta_memo: Mutex::new(HashMap::new()),
        })
    }

    fn k_top(&self) -> u32 {
        self.kappa_weights.len() as u32 - 1
    }

    fn delta_factor(&self, delta: &Partition) -> Q {
        if let Some(d) = self.delta_memo.lock().expect("memo poisoned").get(delta) {
            return d.clone();
        }
        let num = gen_pochhammer(&self.delta_num_arg, delta) * zonal_at_identity(delta, self.n_min);
        let d = match self.statistic {
            Statistic::Roy => num / gen_pochhammer(&self.delta_den_arg, delta),
            Statistic::Pillai => num,
        };
        self.delta_memo
            .lock()
            .expect("memo poisoned")
            .insert(delta.clone(), d.clone());
        d
    }

    /// `Σ_δ g^δ_{κ,τ} D_δ` over `δ` with at most `n_min` parts.
    fn product_sum(&self, kappa: &Partition, tau: &Partition) -> Result<Q> {
        let mut acc = Q::zero();
        match self.route {
            Route::Null | Route::Rank1 => {
                let k = kappa.weight();
                for delta in horizontal_strips(k, tau, self.n_min) {
                    let g = kushner_g(k, tau, &delta)?;
                    if !g.is_zero() {
                        acc += g * self.delta_factor(&delta);
                    }
                }
            }
            Route::General => {
                for (delta, g) in self.store.product(kappa, tau, self.n_min).iter() {
                    acc += g * self.delta_factor(delta);
                }
            }
        }
        Ok(acc)
    }

    /// Exact `(b_{0,t}, …, b_{K,t})`.
    fn column(&self, t: u32) -> Result<Vec<Q>> {
        let taus: Vec<(Partition, Q)> = partitions_of(t, self.n_min)
            .into_iter()
            .filter_map(|tau| {
                let w = gen_pochhammer(&self.tau_arg, &tau);
                (!w.is_zero()).then_some((tau, w))
            })
            .collect();
        let t_fact = Q::from_integer(factorial(t as u64));
        let mut col = Vec::with_capacity(self.kappa_weights.len());
        for (k, kappas) in self.kappa_weights.iter().enumerate() {
            let mut sum = Q::zero();
            for (kappa, a) in kappas {
                for (tau, w) in &taus {
                    let inner = self.product_sum(kappa, tau)?;
                    if !inner.is_zero() {
                        sum += a * w * inner;
                    }
                }
            }
            if !sum.is_zero() {
                sum /= &t_fact;
                if self.statistic == Statistic::Pillai {
                    let n = k as u32 + t;
                    let shifted = &self.base + qi(n as i64);
                    sum /= shifted * pochhammer(&self.base, n);
                }
            }
            col.push(sum);
        }
        Ok(col)
    }
}

/// The leading gamma-ratio constant of the series.
pub(crate) fn series_constant(statistic: Statistic, design: &ManovaDesign) -> Result<GammaRatio> {
    let (m, n_h, n_e) = (design.m(), design.n_h() as f64, design.n_e() as f64);
    let (n_min, n_max) = (design.n_min(), design.n_max() as f64);
    let mf = m as f64;
    match statistic {
        Statistic::Roy => mv_gamma_ratio_parts(
            &[(n_min, (n_min as f64 + 1.0) / 2.0), (m, (n_h + n_e) / 2.0)],
            &[(m, n_e / 2.0), (n_min, (n_h + mf + 1.0) / 2.0)],
        ),
        Statistic::Pillai => mv_gamma_ratio_parts(
            &[(n_min, (n_h + n_e) / 2.0)],
            &[(n_min, (n_h + n_e - n_max) / 2.0), (1, mf * n_h / 2.0)],
        ),
    }
}

/// Exact block `b_{k,t}` without the noncentrality factor `C_κ(Ω/2)`, on the
/// one-row (`κ = (k)`) route, i.e. the coefficient multiplying
/// `(θ_1/2)^k x^{m n_H/2 + k + t}` under a rank-one alternative.
pub fn rank1_block(statistic: Statistic, design: &ManovaDesign, k: u32, t: u32) -> Result<Q> {
    let unit = design.null().with_theta(&[2.0])?;
    let builder = BlockBuilder::new(statistic, Route::Rank1, &unit, k)?;
    Ok(builder.column(t)?.swap_remove(k as usize))
}

/// Exact null series coefficients `(t, b_{0,t})` for `t ≤ t_max`.
pub(crate) fn null_column_coefficients(statistic: Statistic, design: &ManovaDesign, t_max: u32) -> Result<Vec<Q>> {
    let builder = BlockBuilder::new(statistic, Route::Null, &design.null(), 0)?;
    (0..=t_max).map(|t| Ok(builder.column(t)?.swap_remove(0))).collect()
}

const CHUNK: u32 = 16;

/// A prepared series for one statistic, design and truncation order.
#[derive(Debug)]
pub struct SeriesPlan {
    statistic: Statistic,
    route: Route,
    design: ManovaDesign,
    k_max: u32,
    t_cap: u32,
    bound: Option<u32>,
    base_exponent: f64,
    prefactor: f64,
    builder: BlockBuilder,
    /// `columns[t][k] = b_{k,t}`
    columns: RwLock<Vec<Vec<DoubleDouble>>>,
    extend_lock: Mutex<()>,
}

impl SeriesPlan {
    pub fn new(statistic: Statistic, route: Route, design: &ManovaDesign, control: &SeriesControl) -> Result<Self> {
        control.validate()?;
        let builder = BlockBuilder::new(statistic, route, design, control.k_max)?;
        let constant = series_constant(statistic, design)?.to_f64();
        let trace: f64 = design.theta().iter().sum();
        let bound = t_truncation_bound(design);
        let plan = SeriesPlan {
            statistic,
            route,
            design: design.clone(),
            k_max: builder.k_top(),
            t_cap: control.t_cap,
            bound,
            base_exponent: (design.m() * design.n_h()) as f64 / 2.0,
            prefactor: constant * (-trace / 2.0).exp(),
            builder,
            columns: RwLock::new(Vec::new()),
            extend_lock: Mutex::new(()),
        };
        let initial = match bound {
            Some(b) => b,
            None => CHUNK.min(control.t_cap),
        };
        plan.extend_to(initial)?;
        Ok(plan)
    }

    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn design(&self) -> &ManovaDesign {
        &self.design
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Makes columns `0..=t` available.
    fn extend_to(&self, t: u32) -> Result<()> {
        let _guard = self.extend_lock.lock().expect("extension lock poisoned");
        let have = self.columns.read().expect("columns poisoned").len() as u32;
        if have > t {
            return Ok(());
        }
        let fresh: Vec<Vec<DoubleDouble>> = (have..=t)
            .into_par_iter()
            .map(|t| {
                self.builder
                    .column(t)
                    .map(|col| col.iter().map(DoubleDouble::from_rational).collect())
            })
            .collect::<Result<_>>()?;
        self.columns.write().expect("columns poisoned").extend(fresh);
        Ok(())
    }

    /// Series value at `x ∈ [0, 1]`; with `derivative`, its `x`-derivative.
    pub fn evaluate(&self, x: f64, derivative: bool, rel_tol: f64) -> Result<SeriesResult> {
        if !(0.0..=1.0).contains(&x) {
            return Err(domain(format!("x = {x} lies outside [0, 1]")));
        }
        if x == 0.0 && !(derivative && self.base_exponent <= 1.0) {
            return Ok(SeriesResult::exact(0.0));
        }
        let (t_last, converged) = match self.bound {
            Some(b) => (b, true),
            None => self.adaptive_t(x, rel_tol)?,
        };
        let columns = self.columns.read().expect("columns poisoned");
        let k_len = self.k_max as usize + 1;
        let mut merged = vec![DoubleDouble::ZERO; k_len + t_last as usize];
        for (t, col) in columns.iter().take(t_last as usize + 1).enumerate() {
            for (k, c) in col.iter().enumerate() {
                merged[k + t] += *c;
            }
        }
        let a = self.base_exponent;
        if derivative {
            for (n, c) in merged.iter_mut().enumerate() {
                *c = *c * DoubleDouble::from_f64(a + n as f64);
            }
        }
        let poly = horner_dd(&merged, x).to_f64();
        let lead = if derivative { x.powf(a - 1.0) } else { x.powf(a) };
        let scale = self.prefactor * lead;

        // Individual t-blocks cancel heavily, so they only measure truncation
        // error when the t-series is cut adaptively.
        let last_t = match self.bound {
            Some(_) => 0.0,
            None => {
                let col = &columns[t_last as usize];
                (scale * x.powi(t_last as i32) * horner_dd(col, x).to_f64()).abs()
            }
        };
        let last_k = if self.k_max == 0 {
            0.0
        } else {
            let k = self.k_max as usize;
            let row: Vec<DoubleDouble> = columns.iter().take(t_last as usize + 1).map(|col| col[k]).collect();
            (scale * x.powi(k as i32) * horner_dd(&row, x).to_f64()).abs()
        };
        Ok(SeriesResult {
            value: scale * poly,
            k_terms_used: self.k_max + 1,
            t_terms_used: t_last,
            last_block_magnitude: last_t.max(last_k),
            exact_t_termination: self.bound.is_some(),
            converged,
        })
    }

    /// Smallest `t` after which two consecutive `t`-blocks fall below
    /// `rel_tol` times the running sum, capped at `t_cap`.
    fn adaptive_t(&self, x: f64, rel_tol: f64) -> Result<(u32, bool)> {
        let mut running = 0.0;
        let mut quiet = 0;
        let mut t = 0u32;
        loop {
            let have = self.columns.read().expect("columns poisoned").len() as u32;
            if t >= have {
                if have > self.t_cap {
                    return Ok((self.t_cap, false));
                }
                self.extend_to((have + CHUNK - 1).min(self.t_cap))?;
                continue;
            }
            let block = {
                let columns = self.columns.read().expect("columns poisoned");
                x.powi(t as i32) * horner_dd(&columns[t as usize], x).to_f64()
            };
            running += block;
            if t > 0 && block.abs() <= rel_tol * running.abs() {
                quiet += 1;
                if quiet == 2 {
                    return Ok((t, true));
                }
            } else {
                quiet = 0;
            }
            if t == self.t_cap {
                return Ok((t, false));
            }
            t += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct PlanKey {
    statistic: Statistic,
    route: Route,
    m: usize,
    n_h: usize,
    n_e: usize,
    theta_bits: Vec<u64>,
    k_max: u32,
    t_cap: u32,
}

type PlanSlot = Arc<OnceLock<Arc<SeriesPlan>>>;

/// A plan shared through a process-wide memo, so repeated evaluations of the
/// same distribution reuse its coefficients.
pub fn shared_plan(
    statistic: Statistic,
    route: Route,
    design: &ManovaDesign,
    control: &SeriesControl,
) -> Result<Arc<SeriesPlan>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, PlanSlot>>> = OnceLock::new();
    let key = PlanKey {
        statistic,
        route,
        m: design.m(),
        n_h: design.n_h(),
        n_e: design.n_e(),
        theta_bits: design.theta().iter().map(|t| t.to_bits()).collect(),
        k_max: if route == Route::Null { 0 } else { control.k_max },
        t_cap: control.t_cap,
    };
    let slot = {
        let mut map = PLANS.get_or_init(Default::default).lock().expect("plan map poisoned");
        map.entry(key).or_default().clone()
    };
    if let Some(plan) = slot.get() {
        return Ok(plan.clone());
    }
    let plan = Arc::new(SeriesPlan::new(statistic, route, design, control)?);
    Ok(slot.get_or_init(|| plan).clone())
}

#[cfg(test)]
mod tests {
    use num::One;

    use super::*;

    #[test]
    fn null_column_of_worked_design() {
        let d = ManovaDesign::new(6, 2, 15).unwrap();
        let c = series_constant(Statistic::Roy, &d).unwrap().exact_rational().unwrap();
        assert_eq!(c, qi(715));
        let cols = null_column_coefficients(Statistic::Roy, &d, 9).unwrap();
        assert_eq!(cols[0], Q::one());
        assert_eq!(&c * &cols[8], qi(55));
        assert!(cols[9].is_zero());
    }

    #[test]
    fn blocks_vanish_past_the_bound() {
        let d = ManovaDesign::balanced(3, 3, 5).unwrap();
        let b = t_truncation_bound(&d).unwrap();
        for stat in [Statistic::Roy, Statistic::Pillai] {
            for k in 0..4 {
                assert!(!rank1_block(stat, &d, k, b).unwrap().is_zero());
                assert!(rank1_block(stat, &d, k, b + 1).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn rank_above_n_min_is_rejected() {
        let d = ManovaDesign::new(6, 2, 15).unwrap().with_theta(&[3.0, 2.0, 1.0]).unwrap();
        let err = SeriesPlan::new(Statistic::Roy, Route::General, &d, &SeriesControl::default());
        assert!(err.is_err());
    }
}
