//! Exact Voronoi reduction and Hecke operators on the homology of congruence
//! subgroups of SL_n(Z), n in {2, 3}.

#![allow(clippy::needless_range_loop)]

pub mod cones;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod chains;
pub mod hecke;
pub mod reduction;
