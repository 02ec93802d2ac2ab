//! Exact analysis of symmetric association schemes.

pub mod constructions;
pub mod exactnum;
pub mod feasibility;
pub mod imprimitivity;
pub mod qantipodal;
pub mod schemes;
pub mod spectral;
pub mod uniformity;
