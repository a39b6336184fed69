use std::sync::Arc;

use num::Zero;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::zonal::Q;

use super::design::{t_truncation_bound, ManovaDesign, SeriesControl, SeriesResult, Statistic};
use super::series::{null_column_coefficients, series_constant, shared_plan, Route, SeriesPlan};

/// Absolute tolerance in `x` of [`quantile`].
pub const QUANTILE_TOL: f64 = 1e-8;

/// The exact distribution of one statistic under one design.
#[derive(Debug, Clone)]
pub struct Distribution {
    plan: Arc<SeriesPlan>,
    control: SeriesControl,
}

impl Distribution {
    /// Uses the cheapest route for the design's noncentrality rank.
    pub fn new(statistic: Statistic, design: &ManovaDesign, control: &SeriesControl) -> Result<Self> {
        Self::with_route(statistic, Route::for_design(design), design, control)
    }

    pub fn with_route(statistic: Statistic, route: Route, design: &ManovaDesign, control: &SeriesControl) -> Result<Self> {
        Ok(Distribution {
            plan: shared_plan(statistic, route, design, control)?,
            control: *control,
        })
    }

    pub fn statistic(&self) -> Statistic {
        self.plan.statistic()
    }

    pub fn design(&self) -> &ManovaDesign {
        self.plan.design()
    }

    pub fn route(&self) -> Route {
        self.plan.route()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        match self.statistic() {
            Statistic::Roy if !(0.0..=1.0).contains(&x) => {
                Err(domain(format!("largest-root CDF needs x in [0, 1], got {x}")))
            }
            Statistic::Pillai if !(x > 0.0 && x < 1.0) => Err(domain(format!(
                "the trace series converges only for 0 < x < 1, got {x}"
            ))),
            _ => Ok(()),
        }
    }

    /// `P(statistic < x)`.
    pub fn cdf(&self, x: f64) -> Result<SeriesResult> {
        self.check_domain(x)?;
        self.plan.evaluate(x, false, self.control.rel_tol)
    }

    /// Derivative of the CDF series.
    pub fn density(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.plan.evaluate(x, true, self.control.rel_tol)?.value)
    }

    /// The `prob`-quantile, by bisection on `[0, 1]`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(domain(format!("probability {prob} outside (0, 1)")));
        }
        let upper = self.plan.evaluate(1.0, false, self.control.rel_tol)?.value;
        if prob > upper {
            return Err(Error::Bracket { prob, lo: 0.0, hi: upper });
        }
        bisect(prob, |x| Ok(self.plan.evaluate(x, false, self.control.rel_tol)?.value), 0.0, 1.0)
    }
}

fn bisect(prob: f64, cdf: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > QUANTILE_TOL {
        let mid = 0.5 * (lo + hi);
        if cdf(mid)? < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The `prob`-quantile of a nondecreasing `cdf` on `[lo, hi]`.
pub fn quantile(prob: f64, cdf: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    let (f_lo, f_hi) = (cdf(lo)?, cdf(hi)?);
    if !(f_lo <= prob && prob <= f_hi) {
        return Err(Error::Bracket { prob, lo: f_lo, hi: f_hi });
    }
    bisect(prob, cdf, lo, hi)
}

fn require_null(design: &ManovaDesign) -> Result<()> {
    if design.rank() > 0 {
        return Err(domain(format!("{design} has nonzero noncentrality")));
    }
    Ok(())
}

/// CDF of the largest root under the null hypothesis.
pub fn roy_cdf_null(x: f64, design: &ManovaDesign, control: &SeriesControl) -> Result<SeriesResult> {
    require_null(design)?;
    Distribution::with_route(Statistic::Roy, Route::Null, design, control)?.cdf(x)
}

/// The null CDF of the largest root as an exact polynomial, when the
/// `t`-series terminates: pairs `(exponent, coefficient)` in increasing exponent.
pub fn roy_null_polynomial(design: &ManovaDesign) -> Result<Vec<(Q, Q)>> {
    require_null(design)?;
    let bound = t_truncation_bound(design).ok_or_else(|| {
        Error::Unsupported(format!("the null series of {design} does not terminate"))
    })?;
    let constant = series_constant(Statistic::Roy, design)?
        .exact_rational()
        .ok_or_else(|| Error::Unsupported(format!("the constant of {design} is not rational")))?;
    let base = Q::new((design.m() * design.n_h()).into(), 2.into());
    Ok(null_column_coefficients(Statistic::Roy, design, bound)?
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(t, c)| (&base + Q::from_integer(t.into()), &constant * c))
        .collect())
}

/// CDF of the largest root under a rank-one alternative with eigenvalue `theta1`.
pub fn roy_cdf_rank1(x: f64, theta1: f64, design: &ManovaDesign, control: &SeriesControl) -> Result<SeriesResult> {
    let design = design.null().with_theta(&[theta1])?;
    let route = if design.rank() == 0 { Route::Null } else { Route::Rank1 };
    Distribution::with_route(Statistic::Roy, route, &design, control)?.cdf(x)
}

/// CDF of the largest root for an arbitrary noncentrality spectrum, through
/// the full zonal-product series.
pub fn roy_cdf_general(x: f64, design: &ManovaDesign, control: &SeriesControl) -> Result<SeriesResult> {
    Distribution::with_route(Statistic::Roy, Route::General, design, control)?.cdf(x)
}

/// CDF of the largest root, routed by noncentrality rank.
pub fn roy_cdf(x: f64, design: &ManovaDesign, control: &SeriesControl) -> Result<SeriesResult> {
    Distribution::new(Statistic::Roy, design, control)?.cdf(x)
}

/// CDF of the largest eigenvalue `q_1 = ℓ_1/(1 − ℓ_1)` of the F matrix.
pub fn f_largest_cdf(x: f64, design: &ManovaDesign, control: &SeriesControl) -> Result<SeriesResult> {
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("F-matrix root CDF needs x >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(SeriesResult::exact(1.0));
    }
    roy_cdf(x / (1.0 + x), design, control)
}

/// CDF of the Pillai trace, valid for `0 < x < 1`.
pub fn pillai_cdf(x: f64, design: &ManovaDesign, control: &SeriesControl) -> Result<SeriesResult> {
    Distribution::new(Statistic::Pillai, design, control)?.cdf(x)
}

/// Density of the Pillai trace, valid for `0 < x < 1`.
pub fn pillai_density(x: f64, design: &ManovaDesign, control: &SeriesControl) -> Result<f64> {
    Distribution::new(Statistic::Pillai, design, control)?.density(x)
}

/// Critical value and power of a level-`alpha` test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerReport {
    pub critical_value: f64,
    pub power: f64,
    /// Diagnostics of the alternative CDF at the critical value.
    pub alternative: SeriesResult,
}

/// Power of the level-`alpha` test based on `statistic`: the critical value is
/// the null `(1 − alpha)`-quantile for the same degrees of freedom.
pub fn power_report(
    design: &ManovaDesign,
    alpha: f64,
    statistic: Statistic,
    control: &SeriesControl,
) -> Result<PowerReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("significance level {alpha} outside (0, 1)")));
    }
    let null = Distribution::new(statistic, &design.null(), control)?;
    let critical_value = null.quantile(1.0 - alpha)?;
    let alt = Distribution::new(statistic, design, control)?;
    let alternative = alt.cdf(critical_value)?;
    Ok(PowerReport {
        critical_value,
        power: 1.0 - alternative.value,
        alternative,
    })
}

pub fn power(design: &ManovaDesign, alpha: f64, statistic: Statistic, control: &SeriesControl) -> Result<f64> {
    Ok(power_report(design, alpha, statistic, control)?.power)
}
