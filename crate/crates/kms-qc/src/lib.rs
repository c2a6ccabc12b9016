//! Quadratic Chabauty for even-degree hyperelliptic curves y^2 = f(x) over Q_p,
//! with the genus-2 family y^2 = x^6 + a x^4 + a x^2 + 1 as the main target.

pub mod cli;
pub mod coleman;
pub mod curve;
pub mod error;
pub mod frobenius;
pub mod hodge;
pub mod padic;
pub mod poly;
pub mod qc;
pub mod ring;
pub mod series;

pub use error::{Error, Result};
pub use padic::{Padic, PadicContext, PadicMatrix};
pub use poly::Poly;
pub use ring::Coeff;
pub use series::Series;
