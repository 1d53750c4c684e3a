//! Sparse storage, a banded direct solver and a damped Newton driver.

pub mod newton;
pub mod solver;
pub mod sparse;

pub use newton::{newton_solve, NewtonOptions, NewtonReport, NewtonSystem};
pub use solver::{relative_residual, reverse_cuthill_mckee, DirectSolver};
pub use sparse::{SparseMatrix, TripletBuilder};
