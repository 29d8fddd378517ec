//! First-order (paraxial) analysis with ray-transfer matrices.
//!
//! Rays are `(y, n·u)` pairs: height and reduced slope. Refraction at a
//! surface of curvature `c` is `[[1, 0], [-(n2 - n1)·c, 1]]`, transfer over
//! a distance `t` in a medium `n` is `[[1, t/n], [0, 1]]`.

use nalgebra::{Matrix2, Vector2};

use super::prescription::{LensPrescription, SurfaceKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParaxialSummary {
    pub efl: f64,
    /// Axial positions (same frame as the prescription).
    pub front_principal_z: f64,
    pub rear_principal_z: f64,
    pub front_focal_z: f64,
    pub rear_focal_z: f64,
    /// Rear vertex to rear focal point.
    pub back_focal_distance: f64,
}

/// The system has no power (C = 0); parallel light leaves parallel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Afocal {
    pub angular_magnification: f64,
}

/// Image of the stop: axial position and lateral magnification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pupil {
    pub z: f64,
    pub magnification: f64,
}

fn refraction(n1: f64, n2: f64, c: f64) -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, -(n2 - n1) * c, 1.0)
}

fn transfer(t: f64, n: f64) -> Matrix2<f64> {
    Matrix2::new(1.0, t / n, 0.0, 1.0)
}

fn surface_matrix(lens: &LensPrescription, i: usize) -> Matrix2<f64> {
    let s = &lens.surfaces[i];
    match s.kind {
        SurfaceKind::Ideal { focal_length } => Matrix2::new(1.0, 0.0, -1.0 / focal_length, 1.0),
        SurfaceKind::Spherical => refraction(lens.ior_before(i), s.ior_after, s.curvature()),
    }
}

/// Matrix from the vertex plane of surface `first` (before refraction) to
/// the vertex plane of surface `last` (after refraction).
pub fn system_matrix(lens: &LensPrescription, first: usize, last: usize) -> Matrix2<f64> {
    let mut m = Matrix2::identity();
    for i in first..=last {
        if i > first {
            let gap = lens.surfaces[i].z - lens.surfaces[i - 1].z;
            m = transfer(gap, lens.surfaces[i - 1].ior_after) * m;
        }
        m = surface_matrix(lens, i) * m;
    }
    m
}

fn image_ior(lens: &LensPrescription) -> f64 {
    lens.surfaces[lens.surfaces.len() - 1].ior_after
}

pub fn analyze_paraxial(lens: &LensPrescription) -> Result<ParaxialSummary, Afocal> {
    let m = system_matrix(lens, 0, lens.surfaces.len() - 1);
    let (a, c, d) = (m[(0, 0)], m[(1, 0)], m[(1, 1)]);
    let power_scale = a.abs().max(d.abs()).max(1.0);
    if c.abs() < 1e-15 * power_scale {
        return Err(Afocal {
            angular_magnification: d,
        });
    }
    let n_img = image_ior(lens);
    let efl = -1.0 / c;
    let bfd = -a * n_img / c;
    let rear_focal_z = lens.rear_z() + bfd;
    let front_focal_z = lens.front_z() + d / c;
    Ok(ParaxialSummary {
        efl,
        front_principal_z: front_focal_z + efl,
        rear_principal_z: rear_focal_z - efl * n_img,
        front_focal_z,
        rear_focal_z,
        back_focal_distance: bfd,
    })
}

/// Image of the stop seen from object space.
pub fn entrance_pupil(lens: &LensPrescription) -> Pupil {
    let s = lens.stop_index;
    if s == 0 {
        return Pupil {
            z: lens.stop_z(),
            magnification: 1.0,
        };
    }
    // Object space -> just before the stop.
    let m = transfer(
        lens.stop_z() - lens.surfaces[s - 1].z,
        lens.surfaces[s - 1].ior_after,
    ) * system_matrix(lens, 0, s - 1);
    // Plane at z_ep in object space (n = 1) images onto the stop: B' = 0.
    // M' = M * T(front - z_ep) => B' = A*(front - z_ep) + B = 0.
    let (a, b) = (m[(0, 0)], m[(0, 1)]);
    let dist = -b / a; // front - z_ep
    let z = lens.front_z() - dist;
    let imaging = m * transfer(dist, 1.0);
    Pupil {
        z,
        magnification: 1.0 / imaging[(0, 0)],
    }
}

/// Image of the stop seen from image space.
pub fn exit_pupil(lens: &LensPrescription) -> Pupil {
    let s = lens.stop_index;
    let last = lens.surfaces.len() - 1;
    if s == last {
        return Pupil {
            z: lens.stop_z(),
            magnification: 1.0,
        };
    }
    let m = system_matrix(lens, s + 1, last)
        * transfer(
            lens.surfaces[s + 1].z - lens.stop_z(),
            lens.surfaces[s].ior_after,
        );
    // T(dist) * M with B' = 0: B + dist*D/n = 0.
    let n = image_ior(lens);
    let dist = -m[(0, 1)] * n / m[(1, 1)];
    let imaging = transfer(dist, n) * m;
    Pupil {
        z: lens.rear_z() + dist,
        magnification: imaging[(0, 0)],
    }
}

/// Propagates a paraxial ray `(y, u)` given at the plane `z_start` in object
/// space (n = 1) through the lens, returning `(y, u)` at `z_end` in image space.
pub fn propagate(lens: &LensPrescription, y: f64, u: f64, z_start: f64, z_end: f64) -> (f64, f64) {
    let n = image_ior(lens);
    let m = transfer(z_end - lens.rear_z(), n)
        * system_matrix(lens, 0, lens.surfaces.len() - 1)
        * transfer(lens.front_z() - z_start, 1.0);
    let out = m * Vector2::new(y, u);
    (out[0], out[1] / n)
}

/// Paraxial image of the object plane `z_object`: image plane position and
/// lateral magnification. `None` when the image is at infinity.
pub fn image_of(lens: &LensPrescription, z_object: f64) -> Option<(f64, f64)> {
    let n = image_ior(lens);
    let m =
        system_matrix(lens, 0, lens.surfaces.len() - 1) * transfer(lens.front_z() - z_object, 1.0);
    let d = m[(1, 1)];
    if d.abs() < 1e-15 {
        return None;
    }
    let dist = -m[(0, 1)] * n / d;
    let imaging = transfer(dist, n) * m;
    Some((lens.rear_z() + dist, imaging[(0, 0)]))
}

/// Object plane whose paraxial image lies at `z_image`; `None` if that
/// object is at infinity.
pub fn object_for_image(lens: &LensPrescription, z_image: f64) -> Option<f64> {
    let n = image_ior(lens);
    let m = system_matrix(lens, 0, lens.surfaces.len() - 1);
    let b = (z_image - lens.rear_z()) / n;
    let denom = m[(0, 0)] + b * m[(1, 0)];
    if denom.abs() < 1e-15 {
        return None;
    }
    let d = -(m[(0, 1)] + b * m[(1, 1)]) / denom;
    Some(lens.front_z() - d)
}

/// Object distance `a` conjugate to image distance `b` for a thin lens of
/// focal length `f` (1/f = 1/a + 1/b). Negative values are virtual objects
/// on the image side; `b == f` gives +infinity.
pub fn conjugate_distance(f: f64, b: f64) -> f64 {
    let inv = 1.0 / f - 1.0 / b;
    if inv == 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv
    }
}
