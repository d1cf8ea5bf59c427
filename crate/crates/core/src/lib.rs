//! Numerical toolkit for interpolating sequences in the Bergman spaces `A^p`
//! of the unit disk and for the weighted d-bar equation
//! `(1 - |z|^2) dbar u = f` in `L^p(e^{p k_Z} dA)`.
//!
//! Everything runs at desk scale: point sequences are finite and disk
//! integrals are truncated or adaptively resolved.
//!
//! Conventions used throughout:
//! * `dbar = d/dzbar = (d/dx + i d/dy) / 2` (standard Wirtinger derivative);
//! * `lap = d dbar`, one quarter of the standard Laplacian.
//!
//! The low-level geometry and weight evaluations are generic over the real
//! scalar ([`Real`]); the quadrature-heavy layers work in `f64`.

pub mod dbar;
pub mod density;
mod error;
pub mod extremal;
pub mod geometry;
pub mod interpolation;
pub mod io;
pub mod kernel_ops;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod suites;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

/// Complex number over `f64`.
pub type C64 = Complex<f64>;
/// Complex number over `f32`.
pub type C32 = Complex<f32>;

pub type Point64 = geometry::Point<f64>;
pub type Point32 = geometry::Point<f32>;
pub type PointSet64 = geometry::PointSet<f64>;
pub type PointSet32 = geometry::PointSet<f32>;
pub type PseudoDisk64 = geometry::PseudoDisk<f64>;
pub type CoveringNet64 = geometry::CoveringNet<f64>;

/// Convention string stamped into every report.
pub const CONVENTIONS: &str =
    "lap=d*dbar (standard Laplacian/4); dbar=d/dzbar=(d/dx+i*d/dy)/2 (a dbar without the 1/2 solves with u/2)";
