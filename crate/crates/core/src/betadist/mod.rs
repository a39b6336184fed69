//! Exact CDFs of Roy's largest root and the Pillai trace as double series
//! over partitions, with quantiles and test power.
//!
//! Under the null the largest-root series reduces to a Gauss hypergeometric
//! function of matrix argument; it is a polynomial whenever
//! `(n_E − m − 1)/2` is a nonnegative integer. Rank-one alternatives use
//! Kushner's closed form for the product coefficients, general spectra the
//! zonal tables.

mod cdf;
mod design;
mod series;

pub use cdf::{
    f_largest_cdf, pillai_cdf, pillai_density, power, power_report, quantile, roy_cdf, roy_cdf_general,
    roy_cdf_null, roy_cdf_rank1, roy_null_polynomial, Distribution, PowerReport, QUANTILE_TOL,
};
pub use design::{t_truncation_bound, ManovaDesign, SeriesControl, SeriesResult, Statistic};
pub use series::{rank1_block, shared_plan, Route, SeriesPlan};
