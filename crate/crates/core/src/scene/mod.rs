//! Scene content: primitives, materials, lights and textures, with a
//! direct-lighting shader and perfect-specular recursion.
//!
//! Positions are in camera coordinates: the objective's front vertex sits at
//! `z = 0` and the scene lies at `z < 0`.

mod file;
mod mesh;
mod pinhole;
mod texture;

pub use file::{load_scene, parse_scene};
pub use mesh::TriangleMesh;
pub use pinhole::{render_pinhole_ground_truth, GroundTruth, PinholeCamera};
pub use texture::{ImageTexture, Texture};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{
    intersect_sphere, sample_cosine_hemisphere, RandomStream, Ray, Rgb, Vec3, EPSILON,
};
use crate::optics::{fresnel_dielectric, reflect, refract};

/// Recursion budget for mirror and dielectric bounces.
pub const MAX_DEPTH: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    /// Infinite plane, or a rectangle of half-sizes `extent` in the plane's
    /// local (u, v) frame.
    Plane {
        point: Vec3,
        normal: Vec3,
        extent: Option<[f64; 2]>,
    },
    Mesh(TriangleMesh),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub material: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Lambertian {
        albedo: Rgb,
        texture: Option<Texture>,
    },
    Mirror {
        reflectance: Rgb,
    },
    Dielectric {
        ior: f64,
    },
}

impl Material {
    pub fn diffuse(albedo: Rgb) -> Self {
        Material::Lambertian {
            albedo,
            texture: None,
        }
    }

    pub fn textured(texture: Texture) -> Self {
        Material::Lambertian {
            albedo: Rgb::WHITE,
            texture: Some(texture),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Material::Lambertian { albedo, texture } => {
                texture::check_unit(*albedo, "albedo")?;
                texture.as_ref().map_or(Ok(()), |t| t.validate())
            }
            Material::Mirror { reflectance } => texture::check_unit(*reflectance, "reflectance"),
            Material::Dielectric { ior } if *ior >= 1.0 => Ok(()),
            Material::Dielectric { ior } => Err(format!("dielectric ior must be >= 1, got {ior}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Light {
    /// Isotropic point source of radiant intensity `intensity` (W/sr).
    Point { position: Vec3, intensity: Rgb },
    /// One-sided rectangle `corner + s·edge_u + t·edge_v`, emitting toward
    /// `edge_u x edge_v`. Lights the scene but is not itself visible.
    Area {
        corner: Vec3,
        edge_u: Vec3,
        edge_v: Vec3,
        radiance: Rgb,
    },
    /// Constant radiance from every direction not blocked by geometry.
    Environment { radiance: Rgb },
}

impl Light {
    fn scaled(&self, k: f64) -> Light {
        match self.clone() {
            Light::Point {
                position,
                intensity,
            } => Light::Point {
                position,
                intensity: intensity.scale(k),
            },
            Light::Area {
                corner,
                edge_u,
                edge_v,
                radiance,
            } => Light::Area {
                corner,
                edge_u,
                edge_v,
                radiance: radiance.scale(k),
            },
            Light::Environment { radiance } => Light::Environment {
                radiance: radiance.scale(k),
            },
        }
    }

    fn power(&self) -> Rgb {
        match self {
            Light::Point { intensity, .. } => *intensity,
            Light::Area { radiance, .. } | Light::Environment { radiance } => *radiance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
    pub materials: Vec<Material>,
    pub lights: Vec<Light>,
}

/// Nearest surface hit. `normal` faces the incoming ray; `front_face` is
/// true when the ray arrived from the side the geometric normal points to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneHit {
    pub t: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub front_face: bool,
    pub material: usize,
    pub uv: (f64, f64),
}

/// Orthonormal (u, v) axes for a plane with unit normal `n`. Frontal planes
/// get u = +x, v = +y.
fn plane_basis(n: Vec3) -> (Vec3, Vec3) {
    let up = if n.y.abs() < 0.9 {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let u = up.cross(n).normalized();
    (u, n.cross(u))
}

impl Shape {
    pub fn plane(point: Vec3, normal: Vec3) -> Self {
        Shape::Plane {
            point,
            normal: normal.normalized(),
            extent: None,
        }
    }

    /// Hit distance, geometric (outward) normal, and surface uv.
    fn intersect(&self, ray: &Ray) -> Option<(f64, Vec3, (f64, f64))> {
        match self {
            Shape::Sphere { center, radius } => {
                let h = intersect_sphere(ray, *center, *radius)?;
                let d = h.point - *center;
                Some((h.t, h.normal, (d.x, d.y)))
            }
            Shape::Plane {
                point,
                normal,
                extent,
            } => {
                let denom = normal.dot(ray.direction);
                if denom.abs() < 1e-15 {
                    return None;
                }
                let t = normal.dot(*point - ray.origin) / denom;
                if t <= EPSILON {
                    return None;
                }
                let (bu, bv) = plane_basis(*normal);
                let local = ray.at(t) - *point;
                let uv = (local.dot(bu), local.dot(bv));
                if let Some([eu, ev]) = extent {
                    if uv.0.abs() > *eu || uv.1.abs() > *ev {
                        return None;
                    }
                }
                Some((t, *normal, uv))
            }
            Shape::Mesh(mesh) => {
                let (t, n) = mesh.intersect(ray)?;
                let p = ray.at(t);
                Some((t, n, (p.x, p.y)))
            }
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Shape::Sphere { radius, .. } if !(*radius > 0.0) => {
                Err(format!("sphere radius must be positive, got {radius}"))
            }
            Shape::Plane { normal, .. } if (normal.length() - 1.0).abs() > 1e-9 => {
                Err("plane normal must be unit length".into())
            }
            Shape::Plane {
                extent: Some([u, v]),
                ..
            } if !(*u > 0.0 && *v > 0.0) => Err("plane extent must be positive".into()),
            _ => Ok(()),
        }
    }
}

impl Scene {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_material(&mut self, m: Material) -> usize {
        self.materials.push(m);
        self.materials.len() - 1
    }

    pub fn add(&mut self, shape: Shape, material: usize) -> &mut Self {
        self.primitives.push(Primitive { shape, material });
        self
    }

    pub fn add_light(&mut self, light: Light) -> &mut Self {
        self.lights.push(light);
        self
    }

    /// Scene with every light multiplied by `k`.
    pub fn with_scaled_lights(&self, k: f64) -> Scene {
        Scene {
            lights: self.lights.iter().map(|l| l.scaled(k)).collect(),
            ..self.clone()
        }
    }

    /// Checks ids, material ranges and light values. Scenes built in code
    /// may have no lights (they render black); scene files must have one.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.primitives.iter().enumerate() {
            if p.material >= self.materials.len() {
                return Err(Error::Scene(format!(
                    "primitive {i} uses unknown material {}",
                    p.material
                )));
            }
            p.shape
                .validate()
                .map_err(|m| Error::Scene(format!("primitive {i}: {m}")))?;
        }
        for (i, m) in self.materials.iter().enumerate() {
            m.validate()
                .map_err(|msg| Error::Scene(format!("material {i}: {msg}")))?;
        }
        for (i, l) in self.lights.iter().enumerate() {
            if l.power().0.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Scene(format!("light {i} has negative or NaN power")));
            }
        }
        Ok(())
    }
}

/// Nearest hit over all primitives.
pub fn intersect_scene(ray: &Ray, scene: &Scene) -> Option<SceneHit> {
    let mut best: Option<SceneHit> = None;
    for p in &scene.primitives {
        let Some((t, n, uv)) = p.shape.intersect(ray) else {
            continue;
        };
        if best.as_ref().is_some_and(|b| b.t <= t) {
            continue;
        }
        let front_face = n.dot(ray.direction) < 0.0;
        let normal = if front_face { n } else { -n };
        best = Some(SceneHit {
            t,
            point: ray.at(t),
            normal,
            front_face,
            material: p.material,
            uv,
        });
    }
    best
}

fn occluded(scene: &Scene, from: Vec3, dir: Vec3, max_t: f64) -> bool {
    let ray = Ray::new(from, dir);
    intersect_scene(&ray, scene).is_some_and(|h| h.t < max_t - EPSILON)
}

fn offset(hit: &SceneHit, toward: Vec3) -> Vec3 {
    let s = if toward.dot(hit.normal) >= 0.0 {
        1.0
    } else {
        -1.0
    };
    hit.point + hit.normal * (s * 1e-6 * (1.0 + hit.point.max_abs()))
}

/// Radiance arriving along `ray`. Misses see the environment lights.
pub fn radiance(ray: &Ray, scene: &Scene, rand: &mut RandomStream, depth: u32) -> Rgb {
    match intersect_scene(ray, scene) {
        Some(hit) => shade(ray, &hit, scene, rand, depth),
        None => scene.lights.iter().fold(Rgb::BLACK, |acc, l| match l {
            Light::Environment { radiance } => acc + *radiance,
            _ => acc,
        }),
    }
}

/// Radiance leaving `hit` back along `ray`.
pub fn shade(ray: &Ray, hit: &SceneHit, scene: &Scene, rand: &mut RandomStream, depth: u32) -> Rgb {
    match &scene.materials[hit.material] {
        Material::Lambertian { albedo, texture } => {
            let albedo = texture
                .as_ref()
                .map_or(*albedo, |t| t.lookup(hit.uv.0, hit.uv.1));
            if albedo.is_black() {
                return Rgb::BLACK;
            }
            direct_lighting(hit, scene, rand).filter(albedo)
        }
        Material::Mirror { reflectance } => {
            if depth == 0 {
                return Rgb::BLACK;
            }
            let d = reflect(ray.direction, hit.normal);
            let next = Ray::new(offset(hit, d), d);
            radiance(&next, scene, rand, depth - 1).filter(*reflectance)
        }
        Material::Dielectric { ior } => {
            if depth == 0 {
                return Rgb::BLACK;
            }
            let (n1, n2) = if hit.front_face {
                (1.0, *ior)
            } else {
                (*ior, 1.0)
            };
            let cos_i = -ray.direction.dot(hit.normal);
            let f = fresnel_dielectric(cos_i, n1, n2);
            let d = if rand.next_f64() < f {
                reflect(ray.direction, hit.normal)
            } else {
                match refract(ray.direction, hit.normal, n1, n2) {
                    Ok(t) => t,
                    Err(_) => reflect(ray.direction, hit.normal),
                }
            };
            radiance(&Ray::new(offset(hit, d), d), scene, rand, depth - 1)
        }
    }
}

/// Irradiance / pi at a lambertian point (multiply by albedo for radiance).
fn direct_lighting(hit: &SceneHit, scene: &Scene, rand: &mut RandomStream) -> Rgb {
    let mut sum = Rgb::BLACK;
    for light in &scene.lights {
        match light {
            Light::Point {
                position,
                intensity,
            } => {
                let to = *position - hit.point;
                let dist = to.length();
                let dir = to / dist;
                let cos = dir.dot(hit.normal);
                if cos <= 0.0 || occluded(scene, offset(hit, dir), dir, dist) {
                    continue;
                }
                sum += intensity.scale(cos / (PI * dist * dist));
            }
            Light::Area {
                corner,
                edge_u,
                edge_v,
                radiance,
            } => {
                let (s, t) = rand.next_2d();
                let p = *corner + *edge_u * s + *edge_v * t;
                let cross = edge_u.cross(*edge_v);
                let area = cross.length();
                let ln = cross / area;
                let to = p - hit.point;
                let dist = to.length();
                let dir = to / dist;
                let cos = dir.dot(hit.normal);
                let cos_l = -dir.dot(ln);
                if cos <= 0.0 || cos_l <= 0.0 || occluded(scene, offset(hit, dir), dir, dist) {
                    continue;
                }
                sum += radiance.scale(cos * cos_l * area / (PI * dist * dist));
            }
            Light::Environment { radiance } => {
                let dir = sample_cosine_hemisphere(rand, hit.normal);
                if intersect_scene(&Ray::new(offset(hit, dir), dir), scene).is_none() {
                    sum += *radiance;
                }
            }
        }
    }
    sum
}

/// Uniform white lambertian plane lit by a unit environment: the
/// calibration target for white images.
pub fn white_plane_scene(z: f64) -> Scene {
    let mut s = Scene::new();
    let m = s.add_material(Material::diffuse(Rgb::WHITE));
    s.add(Shape::plane(Vec3::new(0.0, 0.0, z), Vec3::Z), m);
    s.add_light(Light::Environment {
        radiance: Rgb::WHITE,
    });
    s
}

/// Frontal black/white checkerboard wall at `z` under a unit environment.
pub fn checkerboard_scene(z: f64, period: f64) -> Scene {
    let mut s = Scene::new();
    let m = s.add_material(Material::textured(Texture::checkerboard(
        period,
        Rgb::WHITE,
        Rgb::gray(0.05),
    )));
    s.add(Shape::plane(Vec3::new(0.0, 0.0, z), Vec3::Z), m);
    s.add_light(Light::Environment {
        radiance: Rgb::WHITE,
    });
    s
}
