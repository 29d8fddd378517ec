use std::collections::HashMap;

use crate::geom::{intersect_sphere, Ray, Vec3, EPSILON};

/// Indexed triangle mesh. Faces are wound counter-clockwise seen from the
/// outside, so `(b - a) x (c - a)` is the outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    bound_center: Vec3,
    bound_radius: f64,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, String> {
        if faces.is_empty() {
            return Err("mesh has no faces".into());
        }
        if let Some(f) = faces
            .iter()
            .find(|f| f.iter().any(|&i| i >= vertices.len()))
        {
            return Err(format!(
                "face {f:?} indexes past {} vertices",
                vertices.len()
            ));
        }
        let n = vertices.len() as f64;
        let center = vertices.iter().fold(Vec3::ZERO, |a, &v| a + v) / n;
        let radius = vertices
            .iter()
            .map(|&v| (v - center).length())
            .fold(0.0, f64::max);
        Ok(Self {
            vertices,
            faces,
            bound_center: center,
            bound_radius: radius * (1.0 + 1e-9) + EPSILON,
        })
    }

    /// Nearest hit `(t, geometric outward normal)`.
    pub fn intersect(&self, ray: &Ray) -> Option<(f64, Vec3)> {
        let inside = (ray.origin - self.bound_center).length() <= self.bound_radius;
        if !inside && intersect_sphere(ray, self.bound_center, self.bound_radius).is_none() {
            return None;
        }
        let mut best: Option<(f64, Vec3)> = None;
        for f in &self.faces {
            let (a, b, c) = (
                self.vertices[f[0]],
                self.vertices[f[1]],
                self.vertices[f[2]],
            );
            if let Some(t) = moller_trumbore(ray, a, b, c) {
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, (b - a).cross(c - a).normalized()));
                }
            }
        }
        best
    }

    /// Unit icosphere refined `subdivisions` times, scaled and moved.
    pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> Self {
        let p = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
            (-1.0, p, 0.0),
            (1.0, p, 0.0),
            (-1.0, -p, 0.0),
            (1.0, -p, 0.0),
            (0.0, -1.0, p),
            (0.0, 1.0, p),
            (0.0, -1.0, -p),
            (0.0, 1.0, -p),
            (p, 0.0, -1.0),
            (p, 0.0, 1.0),
            (-p, 0.0, -1.0),
            (-p, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalized())
        .collect();
        #[rustfmt::skip]
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
            let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
                let key = (a.min(b), a.max(b));
                *cache.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalized());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let verts = verts.into_iter().map(|v| center + v * radius).collect();
        Self::new(verts, faces).expect("icosphere is well formed")
    }
}

fn moller_trumbore(ray: &Ray, a: Vec3, b: Vec3, c: Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - a;
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.direction.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > EPSILON).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_hit_and_miss() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(-1.0, -1.0, -5.0),
                Vec3::new(1.0, -1.0, -5.0),
                Vec3::new(0.0, 1.0, -5.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let (t, n) = mesh
            .intersect(&Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0)))
            .unwrap();
        assert!((t - 5.0).abs() < 1e-12);
        assert!((n - Vec3::Z).length() < 1e-12);
        assert!(mesh
            .intersect(&Ray::new(
                Vec3::new(2.0, 0.0, 0.0),
                Vec3::new(0.0, 0.0, -1.0)
            ))
            .is_none());
    }

    #[test]
    fn bad_face_index_rejected() {
        assert!(TriangleMesh::new(vec![Vec3::ZERO], vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn icosphere_normals_point_outward() {
        let mesh = TriangleMesh::icosphere(Vec3::new(1.0, 2.0, 3.0), 2.0, 2);
        assert_eq!(mesh.faces.len(), 20 * 16);
        for f in &mesh.faces {
            let (a, b, c) = (
                mesh.vertices[f[0]],
                mesh.vertices[f[1]],
                mesh.vertices[f[2]],
            );
            let centroid = (a + b + c) / 3.0;
            assert!(
                (b - a)
                    .cross(c - a)
                    .dot(centroid - Vec3::new(1.0, 2.0, 3.0))
                    > 0.0
            );
        }
    }
}
