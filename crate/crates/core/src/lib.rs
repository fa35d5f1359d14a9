pub mod basis;
pub mod bench;
pub mod cli;
pub mod collocation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod problems;
pub mod reference;
pub mod rng;
pub mod solver;
pub mod trial;
