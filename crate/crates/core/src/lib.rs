//! Class polynomials of imaginary quadratic orders, their factorization
//! modulo primes, and the quaternion orders that govern the p-adic shape of
//! their roots.

mod error;

pub mod arith;
pub mod bigcomplex;
pub mod class_polynomial;
pub mod fp_poly;
pub mod quaternion;
pub mod quadratic_orders;
pub mod reduction_analysis;
pub mod survey;

pub use error::{Error, Result};
pub use bigcomplex::BigComplex;
pub use class_polynomial::IntegerPolynomial;
pub use fp_poly::{FpFactorization, FpPolynomial};
pub use quaternion::{IbukiyamaParams, QuaternionElement, QuaternionOrder, Variant};
pub use quadratic_orders::{ClassCount, FamilyFilter, QuadOrder, ReducedForm};
pub use reduction_analysis::{LinearPrediction, PartnerReport, RootClass};
