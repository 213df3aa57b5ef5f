//! Billiards in ellipses with a confocal elliptic caustic.
//!
//! The crate builds billiard polygons whose sides all touch a fixed ellipse
//! `c` (the caustic) confocal with the table ellipse `e`, using a
//! self-contained Jacobi elliptic-function kernel.  In the canonical
//! parameter `ũ` the billiard map is a rigid shift `ũ -> ũ + 2Δũ`, which
//! makes closure, chord-length products, exterior-angle sums, and the
//! associated vertex kinematics exactly computable — and therefore easy to
//! verify against independent geometric constructions (explicit reflection,
//! line intersections, finite differences).
//!
//! Modules:
//! - [`ellipfn`]: complete/incomplete elliptic integrals and Jacobi `sn`,
//!   `cn`, `dn`, `am` via the arithmetic-geometric mean.
//! - [`confocal`]: the confocal family `x²/(a²+k) + y²/(b²+k) = 1`,
//!   elliptic coordinates, tangents, poles, curvature.
//! - [`billiard`]: canonical construction of the polygon, geometric
//!   reflection oracle, chord lengths, grid of extended-side intersections,
//!   conjugate polygon.
//! - [`kinematics`]: velocity field of the discrete motion, vertex speed
//!   decomposition, angular velocities, rate formulas, flow integration.
//! - [`invariants`]: named invariant checks with tolerances and reports,
//!   and sweeps of the initial vertex across the motion.

pub mod billiard;
pub mod confocal;
pub mod ellipfn;
mod error;
pub mod invariants;
pub mod kinematics;

pub use error::{Error, Result};
