//! Microlens array.
//!
//! Each microlens is modelled as a thin flat plate whose front face carries
//! the normals of a sphere of radius `R1 = f (n - 1)` (plano-convex thin
//! lens, flat back). The back face is flat and masked to a circular
//! aperture per lens. Front plane at `plane_z`, back plane at
//! `plane_z + plate_thickness`; light from the scene travels toward +z.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Ray, Vec3};
use crate::optics::{ideal_bend, refract};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrolensSpec {
    pub focal_length: f64,
    pub diameter: f64,
    pub ior: f64,
    pub plate_thickness: f64,
}

impl MicrolensSpec {
    pub fn new(focal_length: f64, diameter: f64, ior: f64) -> Self {
        Self {
            focal_length,
            diameter,
            ior,
            plate_thickness: 0.01,
        }
    }

    /// Front-surface curvature radius from the thin plano-convex lensmaker
    /// relation `1/f = (n - 1)/R1`.
    pub fn front_radius(&self) -> f64 {
        self.focal_length * (self.ior - 1.0)
    }

    pub fn semi_diameter(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMla(m));
        if !(self.focal_length > 0.0) {
            return bad(format!(
                "focal length must be positive, got {}",
                self.focal_length
            ));
        }
        if !(self.ior > 1.0) {
            return bad(format!("microlens ior must exceed 1, got {}", self.ior));
        }
        if !(self.diameter > 0.0) {
            return bad(format!("diameter must be positive, got {}", self.diameter));
        }
        if self.diameter > 2.0 * self.front_radius() {
            return bad(format!(
                "diameter {} exceeds twice the front radius {}",
                self.diameter,
                self.front_radius()
            ));
        }
        if !(self.plate_thickness >= 0.0) {
            return bad("plate thickness must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridLayout {
    Rect,
    /// Rows offset by half a pitch, row spacing `pitch * sqrt(3) / 2`.
    Hex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LensIndex {
    pub i: i64,
    pub j: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlaGrid {
    pub layout: GridLayout,
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
    /// Axial position of the front plane.
    pub plane_z: f64,
}

impl MlaGrid {
    fn range(n: usize) -> (i64, i64) {
        let lo = -(n as i64 / 2);
        (lo, lo + n as i64 - 1)
    }

    pub fn i_range(&self) -> (i64, i64) {
        Self::range(self.nx)
    }

    pub fn j_range(&self) -> (i64, i64) {
        Self::range(self.ny)
    }

    pub fn contains_index(&self, idx: LensIndex) -> bool {
        let (i0, i1) = self.i_range();
        let (j0, j1) = self.j_range();
        (i0..=i1).contains(&idx.i) && (j0..=j1).contains(&idx.j)
    }

    fn row_spacing(&self) -> f64 {
        match self.layout {
            GridLayout::Rect => self.pitch,
            GridLayout::Hex => self.pitch * 3f64.sqrt() / 2.0,
        }
    }

    fn row_shift(&self, j: i64) -> f64 {
        match self.layout {
            GridLayout::Rect => 0.0,
            GridLayout::Hex => 0.5 * j.rem_euclid(2) as f64,
        }
    }

    /// Lateral center of a lens.
    pub fn center(&self, idx: LensIndex) -> (f64, f64) {
        (
            (idx.i as f64 + self.row_shift(idx.j)) * self.pitch,
            idx.j as f64 * self.row_spacing(),
        )
    }

    /// Unclamped nearest lens to a point.
    fn nearest(&self, x: f64, y: f64) -> LensIndex {
        match self.layout {
            GridLayout::Rect => LensIndex {
                i: (x / self.pitch).round() as i64,
                j: (y / self.pitch).round() as i64,
            },
            GridLayout::Hex => {
                let j0 = (y / self.row_spacing()).floor() as i64;
                [j0, j0 + 1]
                    .into_iter()
                    .map(|j| LensIndex {
                        i: (x / self.pitch - self.row_shift(j)).round() as i64,
                        j,
                    })
                    .min_by(|a, b| {
                        let da = dist2(self.center(*a), (x, y));
                        let db = dist2(self.center(*b), (x, y));
                        da.total_cmp(&db)
                    })
                    .unwrap()
            }
        }
    }

    /// The lens whose center is nearest to `(x, y)`.
    pub fn lens_index_at(&self, x: f64, y: f64) -> Result<(LensIndex, (f64, f64)), OutOfGrid> {
        let idx = self.nearest(x, y);
        if self.contains_index(idx) {
            Ok((idx, self.center(idx)))
        } else {
            Err(OutOfGrid)
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = LensIndex> + '_ {
        let (i0, i1) = self.i_range();
        let (j0, j1) = self.j_range();
        (j0..=j1).flat_map(move |j| (i0..=i1).map(move |i| LensIndex { i, j }))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MlaBlocked {
    OutOfGrid,
    /// Hit the front plane outside the lens aperture.
    DeadZone,
    /// Left the back plane outside the lens aperture mask.
    Mask,
    Tir,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlaConfig {
    pub spec: MicrolensSpec,
    pub grid: MlaGrid,
}

impl MlaConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return Err(Error::InvalidMla(
                "grid needs at least one lens per axis".into(),
            ));
        }
        if self.grid.pitch < self.spec.diameter {
            return Err(Error::InvalidMla(format!(
                "pitch {} is smaller than the lens diameter {}",
                self.grid.pitch, self.spec.diameter
            )));
        }
        Ok(())
    }

    pub fn front_z(&self) -> f64 {
        self.grid.plane_z
    }

    pub fn back_z(&self) -> f64 {
        self.grid.plane_z + self.spec.plate_thickness
    }

    /// Diameter of the circular mask on the back plane.
    pub fn mask_diameter(&self) -> f64 {
        self.spec.diameter
    }

    fn in_aperture(&self, p: Vec3, c: (f64, f64)) -> bool {
        let r = self.spec.semi_diameter();
        dist2((p.x, p.y), c) <= r * r
    }

    /// Scene-to-sensor refraction through the lens hit on the front plane.
    pub fn refract_forward(&self, ray: &Ray) -> Result<Ray, MlaBlocked> {
        let t = ray.t_at_z(self.front_z()).ok_or(MlaBlocked::OutOfGrid)?;
        let front = ray.at(t);
        let (_, c) = self
            .grid
            .lens_index_at(front.x, front.y)
            .map_err(|_| MlaBlocked::OutOfGrid)?;
        if !self.in_aperture(front, c) {
            return Err(MlaBlocked::DeadZone);
        }
        let normal = microlens_normal(&self.spec, front.x - c.0, front.y - c.1)
            .map_err(|_| MlaBlocked::DeadZone)?;
        let inside =
            refract(ray.direction, normal, 1.0, self.spec.ior).map_err(|_| MlaBlocked::Tir)?;
        let inner = Ray {
            origin: front,
            direction: inside,
            throughput: ray.throughput,
        };
        let back = match inner.t_at_z(self.back_z()) {
            Some(t) => inner.at(t),
            None => front,
        };
        if !self.in_aperture(back, c) {
            return Err(MlaBlocked::Mask);
        }
        let out = refract(inside, Vec3::new(0.0, 0.0, -1.0), self.spec.ior, 1.0)
            .map_err(|_| MlaBlocked::Tir)?;
        Ok(Ray {
            origin: back,
            direction: out,
            throughput: ray.throughput,
        })
    }

    /// Sensor-to-scene refraction through the lens centered at `center`.
    /// The ray must be heading toward -z and reach the back plane.
    pub fn refract_backward(&self, ray: &Ray, center: (f64, f64)) -> Result<Ray, MlaBlocked> {
        let back = match ray.t_at_z(self.back_z()) {
            Some(t) => ray.at(t),
            None if ray.origin.z == self.back_z() => ray.origin,
            None => return Err(MlaBlocked::Mask),
        };
        if !self.in_aperture(back, center) {
            return Err(MlaBlocked::Mask);
        }
        let inside =
            refract(ray.direction, Vec3::Z, 1.0, self.spec.ior).map_err(|_| MlaBlocked::Tir)?;
        let inner = Ray {
            origin: back,
            direction: inside,
            throughput: ray.throughput,
        };
        let front = match inner.t_at_z(self.front_z()) {
            Some(t) => inner.at(t),
            None => back,
        };
        if !self.in_aperture(front, center) {
            return Err(MlaBlocked::DeadZone);
        }
        let normal = microlens_normal(&self.spec, front.x - center.0, front.y - center.1)
            .map_err(|_| MlaBlocked::DeadZone)?;
        let out = refract(inside, normal, self.spec.ior, 1.0).map_err(|_| MlaBlocked::Tir)?;
        Ok(Ray {
            origin: front,
            direction: out,
            throughput: ray.throughput,
        })
    }
}

/// Outward unit normal of the front sphere (radius `R1`, apex at the lens
/// center, convex toward the scene) at lateral offset `(x, y)` from the lens
/// center. Faces the incoming light (negative z component).
pub fn microlens_normal(spec: &MicrolensSpec, x: f64, y: f64) -> Result<Vec3> {
    let r2 = x * x + y * y;
    let semi = spec.semi_diameter();
    if r2 > semi * semi * (1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!(
            "offset {:.6} mm lies outside the microlens semi-diameter {semi}",
            r2.sqrt()
        )));
    }
    let big_r = spec.front_radius();
    Ok(Vec3::new(x, y, -(big_r * big_r - r2).sqrt()) / big_r)
}

/// Ideal thin lens of focal length `f` in the plane `plane_z`, centered at
/// `center`: the outgoing lateral slope is the incoming slope minus the hit
/// offset over `f`. Returns the bent ray starting at the hit point.
pub fn ideal_thin_lens_refract(ray: &Ray, f: f64, plane_z: f64, center: (f64, f64)) -> Option<Ray> {
    let t = ray.t_at_z(plane_z)?;
    let p = ray.at(t);
    let direction = ideal_bend(ray.direction, p.x, p.y, center.0, center.1, f);
    Some(Ray {
        origin: p,
        direction,
        throughput: ray.throughput,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RandomStream;

    fn grid(layout: GridLayout) -> MlaGrid {
        MlaGrid {
            layout,
            pitch: 0.217,
            nx: 21,
            ny: 21,
            plane_z: 0.0,
        }
    }

    fn default_mla() -> MlaConfig {
        MlaConfig {
            spec: MicrolensSpec::new(2.0, 0.217, 1.5),
            grid: grid(GridLayout::Rect),
        }
    }

    #[test]
    fn rect_lookup() {
        let g = grid(GridLayout::Rect);
        let (idx, c) = g.lens_index_at(0.0, 0.0).unwrap();
        assert_eq!(idx, LensIndex { i: 0, j: 0 });
        assert_eq!(c, (0.0, 0.0));
        let (idx, c) = g.lens_index_at(0.30, 0.0).unwrap();
        assert_eq!(idx, LensIndex { i: 1, j: 0 });
        assert!((c.0 - 0.217).abs() < 1e-15);
        assert_eq!(g.lens_index_at(100.0, 0.0), Err(OutOfGrid));
    }

    #[test]
    fn index_ranges_cover_n_lenses() {
        for n in [1usize, 2, 4, 15] {
            let g = MlaGrid {
                layout: GridLayout::Rect,
                pitch: 1.0,
                nx: n,
                ny: n,
                plane_z: 0.0,
            };
            let (a, b) = g.i_range();
            assert_eq!((b - a + 1) as usize, n);
            assert_eq!(g.indices().count(), n * n);
            assert!(g.contains_index(LensIndex { i: 0, j: 0 }));
        }
    }

    #[test]
    fn lookup_matches_brute_force() {
        for layout in [GridLayout::Rect, GridLayout::Hex] {
            let g = grid(layout);
            let mut s = RandomStream::new(11, layout as u64, 0);
            for _ in 0..10_000 {
                let x = (s.next_f64() - 0.5) * 3.5;
                let y = (s.next_f64() - 0.5) * 3.5;
                let brute = g
                    .indices()
                    .min_by(|a, b| {
                        dist2(g.center(*a), (x, y)).total_cmp(&dist2(g.center(*b), (x, y)))
                    })
                    .unwrap();
                let (idx, _) = g.lens_index_at(x, y).unwrap();
                let d_fast = dist2(g.center(idx), (x, y));
                let d_brute = dist2(g.center(brute), (x, y));
                assert!(
                    idx == brute || (d_fast - d_brute).abs() < 1e-15,
                    "{layout:?} ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn normal_geometry() {
        let spec = MicrolensSpec::new(2.0, 2.0, 1.5);
        let n0 = microlens_normal(&spec, 0.0, 0.0).unwrap();
        assert_eq!(n0, Vec3::new(0.0, 0.0, -1.0));
        let r1 = spec.front_radius();
        let n = microlens_normal(&spec, r1 / 2.0, 0.0).unwrap();
        let tilt = n.x.atan2(-n.z).to_degrees();
        assert!((tilt - 30.0).abs() < 1e-12);
        assert!(n.y == 0.0);
        let a = microlens_normal(&spec, 0.3, 0.0).unwrap();
        let b = microlens_normal(&spec, -0.3, 0.0).unwrap();
        assert_eq!(a.x, -b.x);
        assert_eq!(a.z, b.z);
        assert!(microlens_normal(&MicrolensSpec::new(2.0, 0.217, 1.5), 0.2, 0.0).is_err());
    }

    #[test]
    fn axial_ray_through_center_undeviated() {
        let mla = default_mla();
        let ray = Ray::new(Vec3::new(0.0, 0.0, -5.0), Vec3::Z);
        let out = mla.refract_forward(&ray).unwrap();
        assert_eq!(out.direction, Vec3::Z);
        assert_eq!(out.origin.x, 0.0);
    }

    #[test]
    fn dead_zone_between_lenses() {
        let mut mla = default_mla();
        mla.grid.pitch = 0.25;
        let ray = Ray::new(Vec3::new(0.125, 0.0, -5.0), Vec3::Z);
        assert_eq!(mla.refract_forward(&ray), Err(MlaBlocked::DeadZone));
        // Square-cell corner is outside the circular aperture even when pitch == diameter.
        let mla = default_mla();
        let ray = Ray::new(Vec3::new(0.1, 0.1, -5.0), Vec3::Z);
        assert_eq!(mla.refract_forward(&ray), Err(MlaBlocked::DeadZone));
    }

    /// Least-squares axial crossing of collimated rays at small heights.
    fn fitted_focus(mla: &MlaConfig, max_height: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 1..=20 {
            let h = max_height * k as f64 / 20.0;
            let ray = Ray::new(Vec3::new(h, 0.0, -1.0), Vec3::Z);
            let out = mla.refract_forward(&ray).unwrap();
            // x(z) = x0 + s (z - z0); minimize sum x(z)^2 over z.
            let s = out.direction.x / out.direction.z;
            let x0 = out.origin.x - s * out.origin.z;
            num += -x0 * s;
            den += s * s;
        }
        num / den - mla.back_z()
    }

    #[test]
    fn collimated_bundle_focuses_at_f() {
        let mla = default_mla();
        let f = fitted_focus(&mla, 0.05 * mla.spec.diameter);
        assert!((f - 2.0).abs() < 0.02, "{f}");
    }

    #[test]
    fn lensmaker_family_shares_focus() {
        for (n, r1) in [(1.5, 1.0), (2.0, 2.0), (3.0, 4.0)] {
            let spec = MicrolensSpec::new(2.0, 0.217, n);
            assert!((spec.front_radius() - r1).abs() < 1e-12);
            let mla = MlaConfig {
                spec,
                grid: grid(GridLayout::Rect),
            };
            let f = fitted_focus(&mla, 0.05 * 0.217);
            assert!((f - 2.0).abs() < 0.02, "n={n}: {f}");
        }
    }

    #[test]
    fn backward_is_reverse_of_forward() {
        let mla = default_mla();
        let mut s = RandomStream::new(9, 1, 0);
        for _ in 0..1000 {
            let (x, y) = crate::geom::sample_disk(&mut s, 0.09);
            let d = Vec3::new(
                0.02 * (s.next_f64() - 0.5),
                0.02 * (s.next_f64() - 0.5),
                1.0,
            );
            let ray = Ray::new(Vec3::new(x, y, -0.5), d);
            let Ok(out) = mla.refract_forward(&ray) else {
                continue;
            };
            let back = mla
                .refract_backward(
                    &Ray {
                        origin: out.origin + out.direction * 1.0,
                        ..out.reversed()
                    },
                    (0.0, 0.0),
                )
                .unwrap();
            assert!((back.direction + ray.direction).length() < 1e-9);
        }
    }

    #[test]
    fn ideal_lens_nodal_and_focal() {
        let ray = Ray::new(Vec3::new(-0.1, -0.05, -1.0), Vec3::new(0.1, 0.05, 1.0));
        let out = ideal_thin_lens_refract(&ray, 2.0, 0.0, (0.0, 0.0)).unwrap();
        assert!((out.direction - ray.direction).length() < 1e-15);
        let ray = Ray::new(Vec3::new(0.05, 0.0, -1.0), Vec3::Z);
        let out = ideal_thin_lens_refract(&ray, 2.0, 0.0, (0.0, 0.0)).unwrap();
        let t = -out.origin.x / out.direction.x;
        assert!((out.at(t).z - 2.0).abs() < 1e-12);
    }

    /// Relative lateral-slope deviation of the plate model from the ideal lens.
    fn slope_deviation(spec: MicrolensSpec, h: f64, incoming: f64) -> f64 {
        let mla = MlaConfig {
            spec,
            grid: MlaGrid {
                layout: GridLayout::Rect,
                pitch: spec.diameter,
                nx: 1,
                ny: 1,
                plane_z: 0.0,
            },
        };
        let ray = Ray::new(
            Vec3::new(h - incoming * 1.0, 0.0, -1.0),
            Vec3::new(incoming, 0.0, 1.0),
        );
        let plate = mla.refract_forward(&ray).unwrap();
        let ideal = ideal_thin_lens_refract(&ray, spec.focal_length, 0.0, (0.0, 0.0)).unwrap();
        let sp = plate.direction.x / plate.direction.z;
        let si = ideal.direction.x / ideal.direction.z;
        ((sp - si) / si).abs()
    }

    #[test]
    fn plate_model_tracks_ideal_lens_in_high_ior_regime() {
        // Nearly flat, high-index plate: deviation stays within 1% of the
        // slope for heights up to 10% of f.
        let spec = MicrolensSpec {
            focal_length: 2.0,
            diameter: 0.45,
            ior: 3.0,
            plate_thickness: 0.0,
        };
        let mut prev = 0.0;
        for k in 1..=10 {
            let h = 0.2 * k as f64 / 10.0;
            let dev = slope_deviation(spec, h, 0.0);
            assert!(dev < 0.01, "h={h}: {dev}");
            assert!(dev >= prev);
            prev = dev;
        }
    }

    #[test]
    #[ignore = "0.1% at h = 5% of f is below the exact-refraction floor (tan(asin(h/f)) vs h/f ~ 0.125%)"]
    fn plate_model_within_tenth_percent_up_to_five_percent_of_f() {
        let mut s = RandomStream::new(2, 0, 0);
        for n in [1.5, 3.0] {
            let spec = MicrolensSpec {
                focal_length: 2.0,
                diameter: 0.217,
                ior: n,
                plate_thickness: 0.0,
            };
            for _ in 0..1000 {
                let h = 0.1 * s.next_f64();
                let incoming = 0.002 * (s.next_f64() - 0.5);
                assert!(slope_deviation(spec, h, incoming) < 1e-3);
            }
        }
    }

    #[test]
    fn plate_model_agrees_with_ideal_lens_for_paraxial_heights() {
        let mut s = RandomStream::new(2, 1, 0);
        let spec = MicrolensSpec {
            focal_length: 2.0,
            diameter: 0.217,
            ior: 1.5,
            plate_thickness: 0.0,
        };
        for _ in 0..1000 {
            let h = 0.02 * (0.05 + s.next_f64());
            assert!(slope_deviation(spec, h, 0.0) < 1e-3);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn brute_force(g: &MlaGrid, x: f64, y: f64) -> LensIndex {
            g.indices()
                .min_by(|a, b| dist2(g.center(*a), (x, y)).total_cmp(&dist2(g.center(*b), (x, y))))
                .unwrap()
        }

        proptest! {
            #[test]
            fn lookup_returns_nearest_center(x in -2.0..2.0f64, y in -2.0..2.0f64, hex: bool) {
                let g = grid(if hex { GridLayout::Hex } else { GridLayout::Rect });
                let best = brute_force(&g, x, y);
                match g.lens_index_at(x, y) {
                    Ok((idx, c)) => {
                        prop_assert!((dist2(c, (x, y)) - dist2(g.center(best), (x, y))).abs() < 1e-12);
                        prop_assert_eq!(c, g.center(idx));
                    }
                    // Off the grid: outside every cell, so farther than the cell inradius.
                    Err(OutOfGrid) => {
                        prop_assert!(dist2(g.center(best), (x, y)).sqrt() >= 0.5 * g.pitch - 1e-12);
                    }
                }
            }

            #[test]
            fn backward_reverses_forward(
                r in 0.0..0.09f64,
                phi in 0.0..std::f64::consts::TAU,
                sx in -0.02..0.02f64,
                sy in -0.02..0.02f64,
            ) {
                let mla = default_mla();
                let (x, y) = (r * phi.cos(), r * phi.sin());
                let ray = Ray::new(Vec3::new(x - sx, y - sy, -1.0), Vec3::new(sx, sy, 1.0));
                if let Ok(out) = mla.refract_forward(&ray) {
                    let from_sensor = Ray { origin: out.origin + out.direction, ..out.reversed() };
                    let back = mla.refract_backward(&from_sensor, (0.0, 0.0)).unwrap();
                    prop_assert!((back.direction + ray.direction).length() < 1e-9);
                }
            }
        }
    }
}
