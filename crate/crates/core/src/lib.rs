//! Numerical toolkit for strictly convex planar billiards: curvature
//! invariants, Mather β/α expansions, marked length spectrum and caustics.

pub mod billiard;
pub mod caustic;
pub mod ellipse_oracle;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod invariants;
pub mod jet;
pub mod quadrature;
pub mod real;
pub mod report;
pub mod spectrum;
pub mod verify;

pub use billiard::{PhasePoint, Trajectory};
pub use caustic::CausticProbe;
pub use ellipse_oracle::EllipseParams;
pub use error::{Error, Result};
pub use geometry::{build_domain, Domain, DomainSpec};
pub use invariants::{AlphaExpansion, BetaExpansion, CausticLengthCoeffs, InvariantSet};
pub use real::{DoubleDouble, Real};
pub use spectrum::PeriodicOrbit;
