//! The main objective: prescriptions, Snell refraction, sequential tracing,
//! aperture shapes and paraxial analysis.

mod aperture;
mod distortion;
mod paraxial;
mod prescription;
mod trace;

pub use aperture::{ApertureKind, ApertureShape};
pub use distortion::{measure_radial_distortion, paraxial_image_plane, DistortionFit, GridTarget};
pub use paraxial::{
    analyze_paraxial, conjugate_distance, entrance_pupil, exit_pupil, image_of, object_for_image,
    propagate, system_matrix, Afocal, ParaxialSummary, Pupil,
};
pub use prescription::{
    double_gauss_100, ExitAperture, LensPrescription, LensSurface, SurfaceKind, DOUBLE_GAUSS_100,
};
pub(crate) use trace::ideal_bend;
pub use trace::{
    trace_through_lens, trace_to_surface, trace_with, traced_focus, ApertureChecks, Blocked,
    SurfaceHit, TraceDirection, TracedFocus,
};

use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TotalInternalReflection;

/// Snell refraction of a unit `direction` at an interface with unit
/// `normal` (either orientation), going from index `n1` into `n2`.
pub fn refract(
    direction: Vec3,
    normal: Vec3,
    n1: f64,
    n2: f64,
) -> Result<Vec3, TotalInternalReflection> {
    let normal = if normal.dot(direction) > 0.0 {
        -normal
    } else {
        normal
    };
    let eta = n1 / n2;
    let cos_i = -normal.dot(direction);
    let sin2_t = eta * eta * (1.0 - cos_i * cos_i).max(0.0);
    if sin2_t > 1.0 {
        return Err(TotalInternalReflection);
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    let t = direction * eta + normal * (eta * cos_i - cos_t);
    Ok(t.normalized())
}

/// Mirror reflection of `direction` about `normal`.
pub fn reflect(direction: Vec3, normal: Vec3) -> Vec3 {
    direction - normal * (2.0 * direction.dot(normal))
}

/// Unpolarized Fresnel reflectance for light going from `n1` into `n2`.
pub fn fresnel_dielectric(cos_i: f64, n1: f64, n2: f64) -> f64 {
    let cos_i = cos_i.clamp(0.0, 1.0);
    let sin_t = n1 / n2 * (1.0 - cos_i * cos_i).max(0.0).sqrt();
    if sin_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin_t * sin_t).max(0.0).sqrt();
    let rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
    let rp = (n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t);
    0.5 * (rs * rs + rp * rp)
}
