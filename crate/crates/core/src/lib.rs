//! Simulation and analysis of two-qubit which-path and quantum-eraser
//! interferometers with coherent gate-error models.

pub mod analysis;
pub mod campaign;
pub mod circuits;
pub mod estimators;
pub mod fitting;
pub mod gates;
pub mod limits;
pub mod linalg;
pub mod noise;
pub mod stats;
