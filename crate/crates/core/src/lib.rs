//! Circle packings of triangulated discs, spheres and tori via polynomial
//! equations in the cotangents of half angles.
//!
//! Every corner of every face carries a variable `m = cot(θ/2)`, where `θ`
//! is the angle of the triangle formed by the centres of three mutually
//! tangent circles. Packings correspond to positive solutions of triangle,
//! edge, vertex and (for tori) holonomy equations. The crate assembles these
//! systems, solves them, and lays out and certifies the resulting packings.

pub mod complex;
pub mod descartes;
pub mod equations;
pub mod fixtures;
pub mod layout;
pub mod solver;
