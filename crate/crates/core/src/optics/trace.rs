//! Sequential surface-by-surface tracing through a lens prescription.

use super::prescription::{LensPrescription, LensSurface, SurfaceKind};
use super::refract;
use crate::geom::{Ray, Vec3, EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceDirection {
    SceneToSensor,
    SensorToScene,
}

/// Why a ray did not make it through the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Blocked {
    MissedSurface(usize),
    Stop,
    ExitAperture,
    Tir(usize),
}

/// Which apertures are enforced. Rims are the surface semi-diameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApertureChecks {
    pub rims: bool,
    pub stop: bool,
    pub exit: bool,
}

impl ApertureChecks {
    pub const ALL: Self = Self {
        rims: true,
        stop: true,
        exit: true,
    };
    pub const NONE: Self = Self {
        rims: false,
        stop: false,
        exit: false,
    };
}

/// Hit of a ray with the cap of a lens surface.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceHit {
    pub t: f64,
    pub point: Vec3,
    /// Unit normal facing against the incoming ray.
    pub normal: Vec3,
}

impl LensSurface {
    /// Intersects the ray with this surface's cap (the sheet through the
    /// vertex). Does not check the semi-diameter.
    pub fn intersect(&self, ray: &Ray) -> Option<SurfaceHit> {
        let d = ray.direction;
        if self.is_planar() {
            let t = ray.t_at_z(self.z)?;
            let normal = if d.z > 0.0 {
                Vec3::new(0.0, 0.0, -1.0)
            } else {
                Vec3::Z
            };
            return Some(SurfaceHit {
                t,
                point: ray.at(t),
                normal,
            });
        }
        let r = self.radius;
        let center = Vec3::new(0.0, 0.0, self.z + r);
        let oc = ray.origin - center;
        let b = oc.dot(d);
        let c = oc.length_squared() - r * r;
        let disc = b * b - c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let q = if b > 0.0 { -b - sq } else { -b + sq };
        let (mut t0, mut t1) = if q != 0.0 { (q, c / q) } else { (-b, -b) };
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        // The vertex cap is the near sheet when travelling toward the center.
        let closer = (d.z > 0.0) ^ (r < 0.0);
        let t = if closer { t0 } else { t1 };
        if t <= EPSILON {
            return None;
        }
        let point = ray.at(t);
        // Reject hits on the far hemisphere.
        if (point.z - self.z) * r.signum() >= r.abs() {
            return None;
        }
        let mut normal = (point - center) / r.abs();
        if normal.dot(d) > 0.0 {
            normal = -normal;
        }
        Some(SurfaceHit { t, point, normal })
    }
}

/// Bends `direction` as an ideal thin lens of focal length `f` centered on
/// `(cx, cy)` would, for a ray crossing its plane at `(x, y)`. Slopes are
/// dx/dz and dy/dz, which are invariant under reversing the ray.
pub(crate) fn ideal_bend(direction: Vec3, x: f64, y: f64, cx: f64, cy: f64, f: f64) -> Vec3 {
    let sz = direction.z.signum();
    let (u, v) = (direction.x / direction.z, direction.y / direction.z);
    let u2 = u - sz * (x - cx) / f;
    let v2 = v - sz * (y - cy) / f;
    (Vec3::new(u2, v2, 1.0) * sz).normalized()
}

fn pass_surface(
    ray: &Ray,
    lens: &LensPrescription,
    i: usize,
    n_from: f64,
    n_to: f64,
    checks: ApertureChecks,
) -> Result<Ray, Blocked> {
    let s = &lens.surfaces[i];
    let hit = s.intersect(ray).ok_or(Blocked::MissedSurface(i))?;
    let (x, y) = (hit.point.x, hit.point.y);
    if checks.rims && x * x + y * y > s.semi_diameter * s.semi_diameter {
        return Err(Blocked::MissedSurface(i));
    }
    if i == lens.stop_index {
        if checks.stop && !lens.stop_shape.contains(x, y) {
            return Err(Blocked::Stop);
        }
        return Ok(Ray {
            origin: hit.point,
            ..*ray
        });
    }
    let direction = match s.kind {
        SurfaceKind::Spherical => {
            refract(ray.direction, hit.normal, n_from, n_to).map_err(|_| Blocked::Tir(i))?
        }
        SurfaceKind::Ideal { focal_length } => {
            ideal_bend(ray.direction, x, y, 0.0, 0.0, focal_length)
        }
    };
    Ok(Ray {
        origin: hit.point,
        direction,
        throughput: ray.throughput,
    })
}

fn pass_exit(ray: &Ray, lens: &LensPrescription) -> Result<(), Blocked> {
    let t = ray.t_at_z(lens.exit.z).ok_or(Blocked::ExitAperture)?;
    let p = ray.at(t);
    if lens.exit.shape.contains(p.x, p.y) {
        Ok(())
    } else {
        Err(Blocked::ExitAperture)
    }
}

/// Traces a ray through the whole objective with every aperture enforced.
pub fn trace_through_lens(
    ray: &Ray,
    lens: &LensPrescription,
    direction: TraceDirection,
) -> Result<Ray, Blocked> {
    trace_with(ray, lens, direction, ApertureChecks::ALL)
}

/// Traces through the objective. Scene-to-sensor rays leave at the last
/// vertex surface and are then tested against the exit aperture; sensor-to-
/// scene rays are tested against the exit aperture first and leave at the
/// front surface.
pub fn trace_with(
    ray: &Ray,
    lens: &LensPrescription,
    direction: TraceDirection,
    checks: ApertureChecks,
) -> Result<Ray, Blocked> {
    let n = lens.surfaces.len();
    let mut r = *ray;
    match direction {
        TraceDirection::SceneToSensor => {
            for i in 0..n {
                r = pass_surface(
                    &r,
                    lens,
                    i,
                    lens.ior_before(i),
                    lens.surfaces[i].ior_after,
                    checks,
                )?;
            }
            if checks.exit && r.origin.z < lens.exit.z {
                pass_exit(&r, lens)?;
            }
        }
        TraceDirection::SensorToScene => {
            if checks.exit && r.origin.z > lens.exit.z {
                pass_exit(&r, lens)?;
            }
            for i in (0..n).rev() {
                r = pass_surface(
                    &r,
                    lens,
                    i,
                    lens.surfaces[i].ior_after,
                    lens.ior_before(i),
                    checks,
                )?;
            }
        }
    }
    Ok(r)
}

/// Traces scene-to-sensor up to and including surface `last`.
pub fn trace_to_surface(
    ray: &Ray,
    lens: &LensPrescription,
    last: usize,
    checks: ApertureChecks,
) -> Result<Ray, Blocked> {
    let mut r = *ray;
    for i in 0..=last {
        r = pass_surface(
            &r,
            lens,
            i,
            lens.ior_before(i),
            lens.surfaces[i].ior_after,
            checks,
        )?;
    }
    Ok(r)
}

/// Focal length and back focal distance from one real ray entering parallel
/// to the axis at height `h`, apertures ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracedFocus {
    pub efl: f64,
    pub back_focal_distance: f64,
}

pub fn traced_focus(lens: &LensPrescription, h: f64) -> Option<TracedFocus> {
    let ray = Ray::new(Vec3::new(h, 0.0, lens.front_z() - 1.0), Vec3::Z);
    let out = trace_with(
        &ray,
        lens,
        TraceDirection::SceneToSensor,
        ApertureChecks::NONE,
    )
    .ok()?;
    if out.direction.x == 0.0 {
        return None;
    }
    let slope = out.direction.x / out.direction.z;
    let t = -out.origin.x / out.direction.x;
    Some(TracedFocus {
        efl: -h / slope,
        back_focal_distance: out.at(t).z - lens.rear_z(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RandomStream;
    use crate::optics::paraxial::analyze_paraxial;
    use crate::optics::prescription::double_gauss_100;
    use crate::optics::ApertureShape;

    fn collimated(h: f64, z: f64) -> Ray {
        Ray::new(Vec3::new(h, 0.0, z), Vec3::Z)
    }

    #[test]
    fn axial_ray_stays_on_axis() {
        let lens = double_gauss_100();
        let out = trace_through_lens(
            &collimated(0.0, -10.0),
            &lens,
            TraceDirection::SceneToSensor,
        )
        .unwrap();
        assert_eq!(out.direction.x, 0.0);
        assert_eq!(out.direction.y, 0.0);
        assert!(out.direction.z > 0.0);
    }

    #[test]
    fn paraxial_bundle_converges_at_back_focal_distance() {
        let lens = double_gauss_100();
        let p = analyze_paraxial(&lens).unwrap();
        let mut crossings = Vec::new();
        for k in 1..=10 {
            let h = 0.05 * p.efl * k as f64 / 10.0 * 0.2;
            let out =
                trace_through_lens(&collimated(h, -10.0), &lens, TraceDirection::SceneToSensor)
                    .unwrap();
            let t = -out.origin.x / out.direction.x;
            crossings.push(out.at(t).z - lens.rear_z());
        }
        let mean = crossings.iter().sum::<f64>() / crossings.len() as f64;
        assert!(
            (mean / p.back_focal_distance - 1.0).abs() < 0.01,
            "{mean} vs {}",
            p.back_focal_distance
        );
    }

    #[test]
    fn traced_efl_matches_matrix_efl() {
        let lens = double_gauss_100();
        let p = analyze_paraxial(&lens).unwrap();
        for k in [1000.0, 300.0, 100.0] {
            let h = p.efl / k;
            let out = trace_with(
                &collimated(h, -10.0),
                &lens,
                TraceDirection::SceneToSensor,
                ApertureChecks::NONE,
            )
            .unwrap();
            let slope = out.direction.x / out.direction.z;
            let efl = -h / slope;
            assert!(
                (efl / p.efl - 1.0).abs() < 1e-3,
                "h={h}: {efl} vs {}",
                p.efl
            );
        }
    }

    #[test]
    fn ray_outside_stop_polygon_is_blocked() {
        let lens = double_gauss_100().with_stop_shape(ApertureShape::polygon(6, 0.0, 8.0));
        // Aim at the stop plane just outside the hexagon flat (apothem 8 cos 30°) along y.
        let apothem = 8.0 * (std::f64::consts::PI / 6.0).cos();
        let target_y = apothem + 0.05;
        // Find the entrance height that lands at target_y on the stop by bisection.
        let stop_y = |h: f64| {
            trace_to_surface(
                &Ray::new(Vec3::new(0.0, h, -10.0), Vec3::Z),
                &lens,
                lens.stop_index,
                ApertureChecks::NONE,
            )
            .unwrap()
            .origin
            .y
        };
        let (mut lo, mut hi) = (0.0, 20.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if stop_y(mid) < target_y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ray = Ray::new(Vec3::new(0.0, hi, -10.0), Vec3::Z);
        assert_eq!(
            trace_through_lens(&ray, &lens, TraceDirection::SceneToSensor),
            Err(Blocked::Stop)
        );
        let inside = Ray::new(Vec3::new(0.0, 0.9 * lo, -10.0), Vec3::Z);
        assert!(trace_through_lens(&inside, &lens, TraceDirection::SceneToSensor).is_ok());
    }

    #[test]
    fn tracing_is_reciprocal() {
        let lens = double_gauss_100();
        let mut s = RandomStream::new(4, 0, 0);
        let mut checked = 0;
        for _ in 0..2000 {
            let origin = Vec3::new(
                30.0 * (s.next_f64() - 0.5),
                30.0 * (s.next_f64() - 0.5),
                -50.0,
            );
            let d = Vec3::new(0.2 * (s.next_f64() - 0.5), 0.2 * (s.next_f64() - 0.5), 1.0);
            let ray = Ray::new(origin, d);
            let Ok(out) = trace_with(
                &ray,
                &lens,
                TraceDirection::SceneToSensor,
                ApertureChecks::NONE,
            ) else {
                continue;
            };
            let start = Ray {
                origin: out.origin + out.direction * 5.0,
                ..out.reversed()
            };
            let back = trace_with(
                &start,
                &lens,
                TraceDirection::SensorToScene,
                ApertureChecks::NONE,
            )
            .unwrap();
            assert!((back.direction + ray.direction).length() < 1e-9);
            let t = back.t_at_z(-50.0).unwrap();
            assert!((back.at(t) - origin).length() < 1e-8);
            checked += 1;
        }
        assert!(checked > 500);
    }

    #[test]
    fn exit_aperture_blocks_steep_rays_from_behind() {
        let lens = double_gauss_100();
        let ray = Ray::new(Vec3::new(25.0, 0.0, 80.0), Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(
            trace_through_lens(&ray, &lens, TraceDirection::SensorToScene),
            Err(Blocked::ExitAperture)
        );
    }
}
