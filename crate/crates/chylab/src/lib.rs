pub mod acceptance;
pub mod amplitudes;
pub mod binary_geometry;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod kinematics;
pub mod linalg;
pub mod moduli;
pub mod scattering_form;
pub mod solver;
pub mod spinor;
pub mod string;
pub mod tropical;

pub use error::{Error, Result};
