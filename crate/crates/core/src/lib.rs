pub mod atlas;
pub mod document;
pub mod field;
pub mod linalg;
pub mod polytope;
pub mod report;
pub mod triple;
pub mod verify;
pub use num_rational;
