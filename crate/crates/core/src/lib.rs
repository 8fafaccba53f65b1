pub mod ald;
pub mod cli;
pub mod convexsolve;
pub mod exactrho;
pub mod instance;
pub mod numkit;
pub mod penalty;
