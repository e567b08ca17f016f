//! Differential geometry of parametrised surfaces in R³ and geometry-aware
//! input noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`manifold`]: charts, Jacobians, induced metrics, normals, projectors,
//!   Christoffel symbols and Brownian-motion drifts for the built-in surface
//!   families, plus generic finite-difference versions of the same quantities.
//! - [`geodesic`]: fixed-step RK4 integration of the geodesic equation and the
//!   exponential map.
//! - [`noise`]: ambient, tangent, geodesic and intrinsic Brownian-motion
//!   perturbations of points on a manifold.
//! - [`deformation`]: flow-based deformation of a base chart with an explicit
//!   Euler scheme and the co-integrated Jacobian.
//!
//! All surfaces have two local coordinates and live in R³, so points and
//! matrices use nalgebra's statically sized types.

pub mod deformation;
pub mod error;
pub mod geodesic;
pub mod manifold;
pub mod noise;
pub mod rng;

pub use deformation::{DeformedChart, FieldKind, FlowField, GaussianBump, TimeModulation};
pub use error::{GeoError, Result};
pub use geodesic::{exp_map, geodesic_rhs, integrate_geodesic, GeodesicState};
pub use manifold::{
    AmbientPoint, Christoffel, Coord, CoordKind, Domain, Family, Jacobian, LocalPoint, ManifoldSpec, MetricTensor,
    ParamVelocity, TangentVector,
};
pub use noise::{GeodesicNorm, NoiseConfig, NoiseSample, Strategy};
