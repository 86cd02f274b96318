//! Exact Whitehead torsion over integral group rings.

pub mod chain;
pub mod cyclo;
pub mod elim;
pub mod fibering;
pub mod group;
pub mod intlin;
pub mod matrix;
pub mod poincare;
pub mod random;
pub mod ring;
pub mod target;
pub mod torsion;
pub mod units;
pub mod whitehead;
