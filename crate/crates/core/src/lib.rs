pub mod dsl;
pub mod error;
pub mod export;
pub mod expr;
pub mod numeric;
pub mod probe;
pub mod scalar;
pub mod series;
pub mod solver;
pub mod special;
