use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ApertureKind {
    Circle,
    /// Regular polygon formed by `blades` straight iris blades.
    Polygon {
        blades: u32,
        #[serde(default)]
        rotation: f64,
    },
    /// `points`-pointed star; inner vertices sit at `inner_ratio * radius`.
    Star {
        points: u32,
        inner_ratio: f64,
        #[serde(default)]
        rotation: f64,
    },
}

/// Iris outline centered on the optical axis. `radius` is the circumradius
/// in millimeters; rotations are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureShape {
    #[serde(flatten)]
    pub kind: ApertureKind,
    pub radius: f64,
}

impl ApertureShape {
    pub fn circle(radius: f64) -> Self {
        Self {
            kind: ApertureKind::Circle,
            radius,
        }
    }

    pub fn polygon(blades: u32, rotation: f64, radius: f64) -> Self {
        Self {
            kind: ApertureKind::Polygon { blades, rotation },
            radius,
        }
    }

    pub fn star(points: u32, inner_ratio: f64, rotation: f64, radius: f64) -> Self {
        Self {
            kind: ApertureKind::Star {
                points,
                inner_ratio,
                rotation,
            },
            radius,
        }
    }

    pub fn with_radius(self, radius: f64) -> Self {
        Self { radius, ..self }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(format!(
                "aperture radius must be positive, got {}",
                self.radius
            ));
        }
        match self.kind {
            ApertureKind::Circle => Ok(()),
            ApertureKind::Polygon { blades, .. } if blades < 3 => Err(format!(
                "polygon aperture needs at least 3 blades, got {blades}"
            )),
            ApertureKind::Star { points, .. } if points < 3 => Err(format!(
                "star aperture needs at least 3 points, got {points}"
            )),
            ApertureKind::Star { inner_ratio, .. } if !(inner_ratio > 0.0 && inner_ratio < 1.0) => {
                Err(format!(
                    "star inner ratio must lie in (0, 1), got {inner_ratio}"
                ))
            }
            _ => Ok(()),
        }
    }

    /// Exact point-in-shape test for a point in the aperture plane.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let r2 = x * x + y * y;
        if r2 > self.radius * self.radius {
            return false;
        }
        match self.kind {
            ApertureKind::Circle => true,
            // A regular k-gon is the k-point star whose inner vertices sit at the edge midpoints.
            ApertureKind::Polygon { blades, rotation } => {
                let k = blades as f64;
                sector_contains(x, y, k, (PI / k).cos(), rotation, self.radius)
            }
            ApertureKind::Star {
                points,
                inner_ratio,
                rotation,
            } => sector_contains(x, y, points as f64, inner_ratio, rotation, self.radius),
        }
    }

    /// Area in mm².
    pub fn area(&self) -> f64 {
        let r = self.radius;
        match self.kind {
            ApertureKind::Circle => PI * r * r,
            ApertureKind::Polygon { blades, .. } => {
                let k = blades as f64;
                0.5 * k * r * r * (2.0 * PI / k).sin()
            }
            ApertureKind::Star {
                points,
                inner_ratio,
                ..
            } => {
                // 2k triangles (origin, outer vertex, inner vertex).
                let k = points as f64;
                k * r * r * inner_ratio * (PI / k).sin()
            }
        }
    }
}

/// Reduces the point into the wedge [0, pi/k] by symmetry and tests it
/// against the edge joining the outer vertex (r, 0) and the inner vertex at
/// angle pi/k and radius `inner_ratio * r`.
fn sector_contains(x: f64, y: f64, k: f64, inner_ratio: f64, rotation: f64, r: f64) -> bool {
    let wedge = 2.0 * PI / k;
    let mut psi = (y.atan2(x) - rotation).rem_euclid(wedge);
    if psi > wedge / 2.0 {
        psi = wedge - psi;
    }
    let rho = (x * x + y * y).sqrt();
    let (qx, qy) = (rho * psi.cos(), rho * psi.sin());
    let (ox, oy) = (r, 0.0);
    let (ix, iy) = (
        inner_ratio * r * (PI / k).cos(),
        inner_ratio * r * (PI / k).sin(),
    );
    // Origin side of the edge O->I has positive cross product.
    let cross = (ix - ox) * (qy - oy) - (iy - oy) * (qx - ox);
    cross >= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Half-plane intersection oracle for a regular polygon.
    fn polygon_oracle(k: u32, rotation: f64, r: f64, x: f64, y: f64) -> bool {
        let apothem = r * (PI / k as f64).cos();
        (0..k).all(|i| {
            let a = rotation + PI / k as f64 + 2.0 * PI * i as f64 / k as f64;
            x * a.cos() + y * a.sin() <= apothem
        })
    }

    #[test]
    fn center_is_inside_every_shape() {
        for s in [
            ApertureShape::circle(1.0),
            ApertureShape::polygon(6, 0.3, 1.0),
            ApertureShape::polygon(12, 0.0, 2.0),
            ApertureShape::star(5, 0.4, 0.1, 1.0),
        ] {
            assert!(s.contains(0.0, 0.0));
        }
    }

    #[test]
    fn circle_boundary() {
        let c = ApertureShape::circle(1.0);
        assert!(!c.contains(1.001, 0.0));
        assert!(c.contains(0.999, 0.0));
    }

    #[test]
    fn hexagon_near_edge_matches_half_planes() {
        let hex = ApertureShape::polygon(6, 0.0, 1.0);
        assert!(hex.contains(0.87, 0.0));
        let y_edge = 0.5 * 0.87 * (PI / 6.0).tan();
        for eps in [-1e-3, -1e-6, 1e-6, 1e-3, 0.2] {
            let y = y_edge + eps;
            assert_eq!(
                hex.contains(0.87, y),
                polygon_oracle(6, 0.0, 1.0, 0.87, y),
                "eps {eps}"
            );
        }
    }

    #[test]
    fn star_excludes_notch_includes_tip() {
        let s = ApertureShape::star(5, 0.4, 0.0, 1.0);
        assert!(s.contains(0.95, 0.0));
        let notch = PI / 5.0;
        assert!(!s.contains(0.6 * notch.cos(), 0.6 * notch.sin()));
        assert!(s.contains(0.35 * notch.cos(), 0.35 * notch.sin()));
    }

    #[test]
    fn area_matches_monte_carlo() {
        let shapes = [
            ApertureShape::polygon(6, 0.2, 1.0),
            ApertureShape::star(6, 0.5, 0.0, 1.0),
        ];
        for s in shapes {
            let n = 400;
            let mut inside = 0;
            for i in 0..n {
                for j in 0..n {
                    let x = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
                    let y = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
                    inside += s.contains(x, y) as usize;
                }
            }
            let est = 4.0 * inside as f64 / (n * n) as f64;
            assert!(
                (est - s.area()).abs() / s.area() < 0.01,
                "{est} vs {}",
                s.area()
            );
        }
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(ApertureShape::polygon(2, 0.0, 1.0).validate().is_err());
        assert!(ApertureShape::star(5, 1.2, 0.0, 1.0).validate().is_err());
        assert!(ApertureShape::circle(-1.0).validate().is_err());
    }

    fn any_shape() -> impl Strategy<Value = ApertureShape> {
        prop_oneof![
            (0.1f64..5.0).prop_map(ApertureShape::circle),
            (3u32..16, 0.0f64..6.3, 0.1f64..5.0)
                .prop_map(|(k, rot, r)| ApertureShape::polygon(k, rot, r)),
            (3u32..10, 0.1f64..0.9, 0.0f64..6.3, 0.1f64..5.0)
                .prop_map(|(k, rho, rot, r)| ApertureShape::star(k, rho, rot, r)),
        ]
    }

    proptest! {
        #[test]
        fn containment_is_scale_covariant(shape in any_shape(), x in -6.0f64..6.0, y in -6.0f64..6.0, s in 0.25f64..4.0) {
            // Scale by powers of two so the scaled coordinates are exact.
            let s = 2f64.powi(s.log2().round() as i32);
            let scaled = shape.with_radius(shape.radius / s);
            prop_assert_eq!(shape.contains(x, y), scaled.contains(x / s, y / s));
        }

        #[test]
        fn polygon_matches_half_plane_oracle(k in 3u32..16, rot in 0.0f64..6.3, x in -1.2f64..1.2, y in -1.2f64..1.2) {
            let p = ApertureShape::polygon(k, rot, 1.0);
            let oracle = polygon_oracle(k, rot, 1.0, x, y);
            // Skip points within rounding distance of an edge.
            let apothem = (PI / k as f64).cos();
            let margin = (0..k).map(|i| {
                let a = rot + PI / k as f64 + 2.0 * PI * i as f64 / k as f64;
                (x * a.cos() + y * a.sin() - apothem).abs()
            }).fold(f64::INFINITY, f64::min);
            prop_assume!(margin > 1e-9);
            prop_assert_eq!(p.contains(x, y), oracle);
        }
    }
}
