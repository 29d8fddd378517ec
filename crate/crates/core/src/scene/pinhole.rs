use super::{intersect_scene, shade, Scene, MAX_DEPTH};
use crate::geom::{RandomStream, Ray, Rgb, Vec3};
use crate::optics::LensPrescription;

/// Ideal pinhole looking down -z. Pixel (0, 0) is the top-left (+y, -x)
/// corner of the view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinholeCamera {
    pub position: Vec3,
    pub width: usize,
    pub height: usize,
    /// Full horizontal field of view in degrees.
    pub fov_deg: f64,
}

impl PinholeCamera {
    /// Pinhole at the midpoint between the objective's first and last vertex.
    pub fn at_lens_center(
        lens: &LensPrescription,
        width: usize,
        height: usize,
        fov_deg: f64,
    ) -> Self {
        Self {
            position: Vec3::new(0.0, 0.0, lens.center_z()),
            width,
            height,
            fov_deg,
        }
    }

    /// Unnormalized direction `(x, y, -1)` through the pixel point `(px, py)`.
    pub fn direction(&self, px: f64, py: f64) -> Vec3 {
        let s = (0.5 * self.fov_deg.to_radians()).tan() / (0.5 * self.width as f64);
        Vec3::new(
            (px - 0.5 * self.width as f64) * s,
            (0.5 * self.height as f64 - py) * s,
            -1.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    pub color: Vec<Rgb>,
    /// Distance along the viewing axis (-z) to the first hit; infinite on miss.
    pub depth: Vec<f64>,
    /// Euclidean distance from the pinhole to the first hit.
    pub range: Vec<f64>,
}

/// One ray through each pixel center. Deterministic: shading randomness is
/// keyed on `(seed, pixel index)`.
pub fn render_pinhole_ground_truth(
    scene: &Scene,
    camera: &PinholeCamera,
    seed: u64,
) -> GroundTruth {
    let n = camera.width * camera.height;
    let mut gt = GroundTruth {
        width: camera.width,
        height: camera.height,
        color: vec![Rgb::BLACK; n],
        depth: vec![f64::INFINITY; n],
        range: vec![f64::INFINITY; n],
    };
    for row in 0..camera.height {
        for col in 0..camera.width {
            let idx = row * camera.width + col;
            let ray = Ray::new(
                camera.position,
                camera.direction(col as f64 + 0.5, row as f64 + 0.5),
            );
            let mut rand = RandomStream::new(seed, idx as u64, 0);
            match intersect_scene(&ray, scene) {
                Some(hit) => {
                    gt.color[idx] = shade(&ray, &hit, scene, &mut rand, MAX_DEPTH);
                    gt.depth[idx] = camera.position.z - hit.point.z;
                    gt.range[idx] = hit.t;
                }
                None => gt.color[idx] = super::radiance(&ray, scene, &mut rand, MAX_DEPTH),
            }
        }
    }
    gt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{white_plane_scene, Material, Shape, TriangleMesh};

    fn cam(w: usize, h: usize) -> PinholeCamera {
        PinholeCamera {
            position: Vec3::ZERO,
            width: w,
            height: h,
            fov_deg: 40.0,
        }
    }

    #[test]
    fn frontal_plane_depth_constant() {
        let gt = render_pinhole_ground_truth(&white_plane_scene(-500.0), &cam(64, 48), 1);
        for d in &gt.depth {
            assert!((d / 500.0 - 1.0).abs() < 1e-6);
        }
        assert!(gt.range.iter().all(|&r| r >= 500.0 - 1e-9));
    }

    #[test]
    fn sphere_front_pole_depth() {
        let mut s = white_plane_scene(-2000.0);
        s.add(
            Shape::Sphere {
                center: Vec3::new(0.0, 0.0, -500.0),
                radius: 50.0,
            },
            0,
        );
        let gt = render_pinhole_ground_truth(&s, &cam(33, 33), 1);
        let c = 16 * 33 + 16;
        assert!((gt.depth[c] - 450.0).abs() < 1e-9);
        assert!((gt.range[c] - 450.0).abs() < 1e-9);
    }

    #[test]
    fn tilted_plane_inverse_depth_is_linear() {
        let mut s = crate::scene::Scene::new();
        let m = s.add_material(Material::diffuse(Rgb::WHITE));
        s.add(
            Shape::plane(Vec3::new(0.0, 0.0, -500.0), Vec3::new(0.3, 0.0, 1.0)),
            m,
        );
        let camera = cam(41, 41);
        let gt = render_pinhole_ground_truth(&s, &camera, 1);
        // Plane n·P = n·P0 with P = Z·(x, y, -1): 1/Z = (n·(x, y, -1)) / (n·P0).
        let n = Vec3::new(0.3, 0.0, 1.0);
        let k = n.dot(Vec3::new(0.0, 0.0, -500.0));
        for row in 0..41 {
            for col in 0..41 {
                let d = camera.direction(col as f64 + 0.5, row as f64 + 0.5);
                let expected = k / n.dot(d);
                let got = gt.depth[row * 41 + col];
                assert!((got / expected - 1.0).abs() < 1e-6);
            }
        }
        // Along a row, 1/Z steps by a constant amount.
        let inv: Vec<f64> = (0..41).map(|c| 1.0 / gt.depth[20 * 41 + c]).collect();
        let step = inv[1] - inv[0];
        for w in inv.windows(2) {
            assert!(((w[1] - w[0]) - step).abs() < 1e-6 * step.abs());
        }
    }

    #[test]
    fn icosphere_silhouette_matches_sphere() {
        let coverage = |shape: Shape| {
            let mut s = crate::scene::Scene::new();
            let m = s.add_material(Material::diffuse(Rgb::WHITE));
            s.add(shape, m);
            let gt = render_pinhole_ground_truth(&s, &cam(160, 160), 1);
            gt.depth.iter().filter(|d| d.is_finite()).count() as f64
        };
        let c = Vec3::new(0.0, 0.0, -500.0);
        let analytic = coverage(Shape::Sphere {
            center: c,
            radius: 80.0,
        });
        let mesh = coverage(Shape::Mesh(TriangleMesh::icosphere(c, 80.0, 5)));
        assert!((mesh / analytic - 1.0).abs() < 0.01, "{mesh} vs {analytic}");
    }
}
