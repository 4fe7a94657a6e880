//! Ext over finite subalgebras of the motivic Steenrod algebra over F₂[τ],
//! plus a small homotopy fixed point spectral sequence calculator.

pub mod chart;
pub mod f2;
pub mod fixtures;
pub mod hfpss;
pub mod modules;
pub mod products;
pub mod resolution;
pub mod steenrod;
pub mod tau_linalg;
