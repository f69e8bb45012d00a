//! Hyperbolic and Möbius geometry in the Poincaré ball and upper half-space.

mod ball;
mod config;
mod halfspace;
mod horoball;
mod lemmas;
mod mobius;

pub use ball::{
    cross_ratio_distance, hyperbolic_distance, move_to_origin, ray_point, BallPoint,
    GeodesicRayPoint, SpherePoint,
};
pub use config::{GeometryConfig, Model};
pub use halfspace::{
    cayley_boundary, cayley_infinity, cayley_transform, halfspace_distance,
    inverse_cayley_boundary, inverse_cayley_transform, HalfSpacePoint,
};
pub use horoball::{
    escape_function, point_in_horoball, validate_family, Escape, Horoball, DISJOINT_SLACK,
};
pub use lemmas::{
    circle_angle_grid, circle_lemma_check, horoball_radius_sequence, CircleLemmaReport, CircleRow,
    RadiusRow, RadiusSequence, CIRCLE_THETA_MAX,
};
pub use mobius::{HalfSpaceHoroball, MobiusMap, Riemann, PARABOLIC_TOL};
