//! Root finding, quadrature and the truncated logarithmic series.

pub mod quad;
pub mod roots;
pub mod series;

pub use quad::{integrate, integrate_breaks, Quadrature};
pub use roots::{bisect, brent, expand_upper, newton_bracketed, RESIDUAL_TOL};
pub use series::{log_series, log_tail, log_tail_u, neg_log1m, one_minus_log};
