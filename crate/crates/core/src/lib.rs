//! Fundamental solutions, image Green functions and Dirichlet representation
//! formulas for the sub-Laplacian on prototype H-type groups.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod gauge;
pub mod group;
pub mod images;
pub mod numerics;
pub mod operator;
pub mod solver;
pub mod suite;

pub use error::{Error, Result};
pub use gauge::{
    calibrate_c, flux, gamma, gamma_pole, gauge, horizontal_gradient_gamma, quasi_distance, Calibration, CoordBox,
    FundamentalSolutionParams, GaugeValue, POLE_EXCLUSION,
};
pub use group::{GroupConfig, GroupSpec, Point, ValidationReport};
pub use images::{
    boundary_trace_scan, characteristic_points, green_eval, green_pole_derivative, green_symmetry_check,
    is_characteristic_at, reflect, strip_images, strip_symmetric_tail_bound, strip_tail_bound, wedge_images,
    BoundaryFace, BoundaryGrid, CharacteristicSet, DomainConfig, DomainSpec, Face, Hyperplane, ImageCharge, Sign,
    TraceReport, TruncationPolicy,
};
pub use numerics::{linspace, CompensatedSum, MultiIndex};
pub use operator::{
    apply_sublaplacian, apply_sublaplacian_composed, apply_vector_field, harmonicity_residual, horizontal_gradient,
    pde_residual, FnField, ResidualReport, ScalarField, StencilSpec,
};
