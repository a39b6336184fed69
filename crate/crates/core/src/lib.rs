//! Exact distributions of Roy's largest root and the Bartlett–Nanda–Pillai
//! trace in MANOVA under null, rank-1 and rank-2 alternatives.
//!
//! The crate is layered bottom-up:
//!
//! - [`partition`]: integer partitions, orderings and Laplace–Beltrami eigenvalues.
//! - [`zonal`]: exact-rational zonal polynomials in the elementary-symmetric
//!   basis, product coefficients, Kushner's closed form and scalar special
//!   functions.
//! - [`betadist`]: series evaluators for the CDFs, quantiles and powers.
//! - [`montecarlo`]: an independent simulator of the MANOVA model.
//!
//! ```
//! use roy_core::betadist::{roy_null_polynomial, ManovaDesign};
//! use num::BigRational;
//!
//! let design = ManovaDesign::new(6, 2, 15).unwrap();
//! let poly = roy_null_polynomial(&design).unwrap();
//! let at_one: BigRational = poly.iter().map(|(_, c)| c.clone()).sum();
//! assert_eq!(at_one, BigRational::from_integer(1.into()));
//! ```

pub mod betadist;
pub mod error;
pub mod montecarlo;
pub mod numeric;
pub mod partition;
pub mod zonal;

pub use error::{Error, Result};
pub use partition::Partition;
