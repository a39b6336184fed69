//! Exact-rational zonal-polynomial algebra.
//!
//! Zonal polynomials are kept in the elementary-symmetric basis `E_μ`, where
//! products are trivial (exponent vectors add). Converting a product back to
//! the zonal basis needs only the inverse of the degree-`k+t` table, which is
//! how the coefficients `g^δ_{κ,τ}` are obtained. For a one-row left factor
//! the closed form [`kushner_g`] is available as well.

pub mod epoly;
pub mod kushner;
pub mod special;
pub mod store;
pub mod table;

use std::collections::BTreeMap;

use num::BigRational;

use crate::error::{domain, Result};
use crate::partition::Partition;

pub use epoly::{e_product, lb_apply, EPolynomial};
pub use kushner::{horizontal_strips, interlaces, kushner_g};
pub use special::{
    gen_pochhammer, mv_gamma_ratio, mv_gamma_ratio_parts, pochhammer, two_step_factorial,
    zonal_at_identity, GammaRatio,
};
pub use store::{ProductCoefficients, ZonalStore};
pub use table::{zonal_table, ZonalTable};

/// Exact rational scalar used throughout the coefficient algebra.
pub type Q = BigRational;

/// `C_κ` evaluated at a real spectrum, using a table of matching degree and dimension.
pub fn zonal_eval(kappa: &Partition, spectrum: &[f64], table: &ZonalTable) -> Result<f64> {
    table.eval_f64(kappa, spectrum)
}

/// Product coefficients `g^δ_{κ,τ}` in dimension `m`, memoized in the global store.
pub fn zonal_product_g(kappa: &Partition, tau: &Partition, m: usize) -> Result<BTreeMap<Partition, Q>> {
    if m == 0 {
        return Err(domain("dimension must be positive"));
    }
    Ok((*ZonalStore::global().product(kappa, tau, m)).clone())
}
