//! Numerical toolkit for convex energy integrals with slow growth: integrands, growth-hypothesis
//! checks, approximation by smooth integrands, a discrete minimizer and a priori gradient estimates.

pub mod approximation;
pub mod apriori;
pub mod ellipticity;
pub mod error;
pub mod grid;
pub mod integrand;
pub mod quadrature;
pub mod solver;
pub mod sphere;

pub use error::{Error, Result};
