//! Boundary gradient profiles, fail points and nodal lines of directional
//! derivatives.

mod failpoint;
mod mixed;
mod nodal;
mod profile;

pub use failpoint::{fail_point, FailPointReport, LandmarksCheck, TIE_TOLERANCE};
pub use mixed::{mixed_derivative_origin, MixedFit, DEFAULT_R_FIT};
pub use nodal::{
    nodal_tangent_angle_at_boundary, trace_nodal_line, trace_nodal_line_with_flux, write_paths_csv, NodalPath, PathEnd,
};
pub use profile::{
    boundary_profile, count_maxima, locate_critical_points, profile_from_flux, BoundaryProfile, CriticalKind,
    CriticalPoint, ProfileSample, SideProfile,
};
