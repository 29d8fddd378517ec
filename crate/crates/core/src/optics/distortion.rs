//! Radial distortion of the objective measured from traced chief rays.

use nalgebra::{DMatrix, DVector};

use super::paraxial::{entrance_pupil, image_of, propagate};
use super::prescription::LensPrescription;
use super::trace::{trace_to_surface, trace_with, ApertureChecks, TraceDirection};
use crate::error::{Error, Result};
use crate::geom::{Ray, Vec3};

/// Square grid of points on a frontal plane `distance` mm in front of the
/// first vertex (at `z = front - distance`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridTarget {
    pub distance: f64,
    pub half_extent: f64,
    pub points_per_side: usize,
}

/// Least-squares fit of `r_d = r (1 + k1 r² + k2 r⁴)`, where `r` is the
/// paraxial (ideal) image radius on the chosen image plane, in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionFit {
    pub k1: f64,
    pub k2: f64,
    pub k1_std_err: f64,
    pub k2_std_err: f64,
    pub residual_rms: f64,
    /// Largest |r_d - r| over the grid (mm).
    pub max_displacement: f64,
    /// Largest ideal image radius on the grid (mm).
    pub half_diagonal: f64,
    pub points_used: usize,
}

/// Finds the chief ray from `object` (through the stop center) by secant
/// iteration on its aim height at the front vertex plane, and traces it to
/// `image_z`. Returns the radial image coordinate along the object's meridian.
fn chief_ray_image_radius(lens: &LensPrescription, object: Vec3, image_z: f64) -> Option<f64> {
    let r_obj = (object.x * object.x + object.y * object.y).sqrt();
    let (ux, uy) = if r_obj > 0.0 {
        (object.x / r_obj, object.y / r_obj)
    } else {
        (1.0, 0.0)
    };
    let front = lens.front_z();
    let ep = entrance_pupil(lens);
    let no_stop = ApertureChecks {
        rims: true,
        stop: false,
        exit: false,
    };

    let stop_height = |aim: f64| -> Option<f64> {
        let target = Vec3::new(ux * aim, uy * aim, front);
        let ray = Ray::new(object, target - object);
        let r = trace_to_surface(&ray, lens, lens.stop_index, no_stop).ok()?;
        Some(r.origin.x * ux + r.origin.y * uy)
    };

    // Paraxial guess: straight line toward the entrance pupil center.
    let t = (front - object.z) / (ep.z - object.z);
    let mut a0 = r_obj * (1.0 - t);
    let mut a1 = a0 * 0.99 + 1e-3;
    let mut h0 = stop_height(a0)?;
    let mut h1 = stop_height(a1)?;
    for _ in 0..60 {
        if h1.abs() < 1e-12 {
            break;
        }
        let denom = h1 - h0;
        if denom == 0.0 {
            break;
        }
        let a2 = a1 - h1 * (a1 - a0) / denom;
        a0 = a1;
        h0 = h1;
        a1 = a2;
        h1 = stop_height(a1)?;
    }
    if h1.abs() > 1e-9 {
        return None;
    }
    let target = Vec3::new(ux * a1, uy * a1, front);
    let ray = Ray::new(object, target - object);
    let out = trace_with(&ray, lens, TraceDirection::SceneToSensor, no_stop).ok()?;
    let t = out
        .t_at_z(image_z)
        .or_else(|| (out.origin.z == image_z).then_some(0.0))?;
    let p = out.at(t);
    Some(p.x * ux + p.y * uy)
}

pub fn measure_radial_distortion(
    lens: &LensPrescription,
    target: &GridTarget,
    image_z: f64,
) -> Result<DistortionFit> {
    if target.points_per_side < 2 || !(target.half_extent > 0.0) || !(target.distance > 0.0) {
        return Err(Error::Fit(
            "grid target needs >= 2 points per side and positive size".into(),
        ));
    }
    let z_obj = lens.front_z() - target.distance;
    let ep = entrance_pupil(lens);
    // Paraxial chief-ray height per unit object height on the image plane.
    let (y1, _) = propagate(lens, 1.0, -1.0 / (ep.z - z_obj), z_obj, image_z);
    let n = target.points_per_side;

    let mut radii = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = -target.half_extent + 2.0 * target.half_extent * i as f64 / (n - 1) as f64;
            let y = -target.half_extent + 2.0 * target.half_extent * j as f64 / (n - 1) as f64;
            let r_obj = (x * x + y * y).sqrt();
            if r_obj == 0.0 {
                continue;
            }
            if let Some(r_d) = chief_ray_image_radius(lens, Vec3::new(x, y, z_obj), image_z) {
                radii.push((y1 * r_obj, r_d));
            }
        }
    }
    if radii.len() < 6 {
        return Err(Error::Fit(format!(
            "only {} usable grid points (need 6)",
            radii.len()
        )));
    }

    let m = radii.len();
    let design = DMatrix::from_fn(m, 2, |row, col| {
        let r2 = radii[row].0 * radii[row].0;
        if col == 0 {
            r2
        } else {
            r2 * r2
        }
    });
    let obs = DVector::from_fn(m, |row, _| radii[row].1 / radii[row].0 - 1.0);
    let normal = design.transpose() * &design;
    let inv = normal
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal equations".into()))?;
    let coef = &inv * design.transpose() * &obs;
    let resid = &obs - &design * &coef;
    let dof = (m - 2).max(1) as f64;
    let s2 = resid.norm_squared() / dof;

    let max_displacement = radii
        .iter()
        .map(|(r, rd)| (rd - r).abs())
        .fold(0.0, f64::max);
    let half_diagonal = radii.iter().map(|(r, _)| r.abs()).fold(0.0, f64::max);
    Ok(DistortionFit {
        k1: coef[0],
        k2: coef[1],
        k1_std_err: (s2 * inv[(0, 0)]).sqrt(),
        k2_std_err: (s2 * inv[(1, 1)]).sqrt(),
        residual_rms: (resid.norm_squared() / m as f64).sqrt(),
        max_displacement,
        half_diagonal,
        points_used: m,
    })
}

/// Convenience: grid at `distance` imaged on its own paraxial image plane.
pub fn paraxial_image_plane(lens: &LensPrescription, distance: f64) -> Option<f64> {
    image_of(lens, lens.front_z() - distance).map(|(z, _)| z)
}
