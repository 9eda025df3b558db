//! Central values of quadratic twists of modular L-functions over families of
//! fundamental discriminants, with the prime-sum proxies and family statistics
//! built on them.

pub mod apps;
pub mod arith;
pub mod error;
pub mod hecke;
pub mod lfunc;
pub mod moments;
pub mod numeric;
pub mod proxy;
pub mod report;

pub use arith::{Discriminant, FamilySlice, PrimeTable};
pub use error::{Error, Result};
pub use hecke::{EigenSource, EigenvalueTable, EllipticCurveSpec, HeckeForm};
pub use lfunc::{AfeParams, LValue};
