//! Xiangqi engine toolkit: rules, alpha-beta search, quiet-position dataset
//! generation, a small two-perspective NNUE with its trainer, and a match
//! harness for measuring strength.

pub mod arena;
pub mod board;
pub mod datagen;
pub mod eval;
pub mod nnue;
pub mod search;
pub mod seed;
