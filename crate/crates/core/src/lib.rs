//! Reduced Beurling, Carleman, Laplace and weak-Laplace spectra of sampled
//! vector-valued signals, class-membership detectors, and executable
//! versions of the spectral-inclusion and tauberian theorems.

pub mod classes;
pub mod config;
pub mod convolution;
pub mod corpus;
pub mod error;
pub mod evolution;
pub mod kernel;
pub mod quadrature;
pub mod report;
pub mod signal;
pub mod spectra;
pub mod theorems;
pub mod transforms;

pub use num_complex::Complex64 as C64;
pub use error::{Error, Result};
pub use signal::{Domain, ExtendedSignal, Mean, SampledSignal};
