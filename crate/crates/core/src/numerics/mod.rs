//! Scalars, exact quadratic arithmetic and the entry grammar.

pub mod bigfloat;
pub mod parse;
pub mod scalar;
pub mod surd;

pub use bigfloat::{BigFloat, DEFAULT_PRECISION, MIN_PRECISION};
pub use parse::{format_real, parse_matrix, parse_real, DecimalMode};
pub use scalar::{check_precision, row_value, row_value_any, RealScalar};
pub use surd::{surd_sign, QuadSurd};
