//! File formats: JSON for tree vectors and small operators, Matrix Market
//! for sparse or dense matrices.

pub mod json;
pub mod mtx;

pub use json::{matrix_from_json, tree_from_json, tree_to_json};
pub use mtx::{read_matrix_market, write_matrix_market, MatrixMarket};
