//! Hyper-Kloosterman sums over prime fields, the bilinear Type-I/Type-II
//! sums built from them, the explicit bound shapes that accompany those
//! sums, and exact finite diagnostics for the quantities in the bound's
//! derivation.

pub mod bilinear;
pub mod budget;
pub mod energy;
pub mod error;
pub mod fft;
pub mod field;
pub mod kloosterman;
mod par;
pub mod proofdiag;
pub mod report;
pub mod sum;
pub mod sweep;

pub use budget::Budget;
pub use error::{Error, Result};
pub use field::PrimeField;
pub use kloosterman::{deligne_excess, KloostermanTable, Method};
