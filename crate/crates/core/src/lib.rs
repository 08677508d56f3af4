//! Finite-type analysis of self-similar measures on `[0,1]`.

pub mod classes;
pub mod config;
pub mod constructions;
pub mod dimensions;
pub mod ifs;
pub mod net;
pub mod oracle;
pub mod rational;
pub mod spectra;
pub mod transitions;
