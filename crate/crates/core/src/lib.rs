pub mod cli;
pub mod coeff;
pub mod error;
pub mod herr;
pub mod json;
pub mod lubin_tate;
pub mod matrix;
pub mod obstruction;
pub mod phigamma;
pub mod ring;
pub mod series;
pub mod suite;
pub mod tquasi;
pub mod zmod;

pub use error::{Error, Result};
