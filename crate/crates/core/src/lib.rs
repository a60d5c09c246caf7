pub mod certificate;
pub mod config;
pub mod egg;
pub mod error;
pub mod field;
pub mod linalg;
pub mod linpoly;
pub mod plane;
pub mod polarity;
pub mod sampling;
pub mod spread;
pub mod unital;

pub use certificate::{Certificate, Status};
pub use error::{Error, Result};
pub use field::{Fe, FieldElement, FiniteField};
pub use linpoly::{EggForms, GoodEggSpec, LinearizedPoly};
