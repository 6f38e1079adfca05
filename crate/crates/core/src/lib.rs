pub mod autodiff;
pub mod gen;
pub mod graph;
pub mod rng;
pub mod model;
pub mod solvers;
pub mod reductions;
pub mod eval;
pub mod cli;
