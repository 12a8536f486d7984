pub mod alexander;
pub mod catalog;
pub mod engine;
pub mod homology;
mod int;
pub mod lemmas;
pub mod slope;

pub use int::{Int, Overflow};
