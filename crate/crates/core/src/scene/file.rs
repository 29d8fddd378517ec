//! JSON scene files.
//!
//! ```json
//! {
//!   "materials": [
//!     { "name": "wall", "kind": "lambertian", "albedo": [1, 1, 1],
//!       "texture": { "kind": "checkerboard", "period": 0.5, "colors": [[1, 1, 1], [0.05, 0.05, 0.05]] } },
//!     { "name": "glass", "kind": "dielectric", "ior": 1.5 }
//!   ],
//!   "primitives": [
//!     { "kind": "plane", "point": [0, 0, -500], "normal": [0, 0, 1], "extent": [200, 200], "material": "wall" },
//!     { "kind": "sphere", "center": [0, 0, -400], "radius": 30, "material": "glass" }
//!   ],
//!   "lights": [ { "kind": "environment", "radiance": [1, 1, 1] } ]
//! }
//! ```
//!
//! Other kinds: `mirror` (`reflectance`), `mesh` (`vertices`, `faces`),
//! `icosphere` (`center`, `radius`, `subdivisions`), image textures
//! (`path` to a PNG relative to the scene file, `size` in mm), `point`
//! lights (`position`, `intensity`) and `area` lights (`corner`, `edge_u`,
//! `edge_v`, `radiance`).

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::{ImageTexture, Light, Material, Scene, Shape, Texture, TriangleMesh};
use crate::error::{Error, Result};
use crate::geom::{Rgb, Vec3};

type V3 = [f64; 3];

fn v(a: V3) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    materials: Vec<MaterialEntry>,
    primitives: Vec<PrimitiveEntry>,
    lights: Vec<LightEntry>,
}

#[derive(Deserialize)]
struct MaterialEntry {
    name: String,
    #[serde(flatten)]
    kind: MaterialKind,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MaterialKind {
    Lambertian {
        #[serde(default = "white")]
        albedo: Rgb,
        #[serde(default)]
        texture: Option<TextureEntry>,
    },
    Mirror {
        #[serde(default = "white")]
        reflectance: Rgb,
    },
    Dielectric {
        ior: f64,
    },
}

fn white() -> Rgb {
    Rgb::WHITE
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum TextureEntry {
    Checkerboard { period: f64, colors: [Rgb; 2] },
    Image { path: String, size: [f64; 2] },
}

#[derive(Deserialize)]
struct PrimitiveEntry {
    material: String,
    #[serde(flatten)]
    shape: ShapeEntry,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ShapeEntry {
    Sphere {
        center: V3,
        radius: f64,
    },
    Plane {
        point: V3,
        normal: V3,
        #[serde(default)]
        extent: Option<[f64; 2]>,
    },
    Mesh {
        vertices: Vec<V3>,
        faces: Vec<[usize; 3]>,
    },
    Icosphere {
        center: V3,
        radius: f64,
        subdivisions: u32,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum LightEntry {
    Point {
        position: V3,
        intensity: Rgb,
    },
    Area {
        corner: V3,
        edge_u: V3,
        edge_v: V3,
        radiance: Rgb,
    },
    Environment {
        radiance: Rgb,
    },
}

/// Parses a scene; image texture paths resolve against `base_dir`.
pub fn parse_scene(text: &str, base_dir: &Path) -> Result<Scene> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: SceneFile = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;

    let mut scene = Scene::new();
    let mut ids = HashMap::new();
    for (i, m) in file.materials.into_iter().enumerate() {
        let material = match m.kind {
            MaterialKind::Lambertian { albedo, texture } => {
                let texture = match texture {
                    None => None,
                    Some(TextureEntry::Checkerboard { period, colors }) => {
                        Some(Texture::Checkerboard { period, colors })
                    }
                    Some(TextureEntry::Image { path, size }) => Some(Texture::Image(
                        ImageTexture::load_png(base_dir.join(path), size)?,
                    )),
                };
                Material::Lambertian { albedo, texture }
            }
            MaterialKind::Mirror { reflectance } => Material::Mirror { reflectance },
            MaterialKind::Dielectric { ior } => Material::Dielectric { ior },
        };
        if ids
            .insert(m.name.clone(), scene.add_material(material))
            .is_some()
        {
            return Err(Error::config(
                format!("materials[{i}].name"),
                format!("duplicate material name {:?}", m.name),
            ));
        }
    }
    for (i, p) in file.primitives.into_iter().enumerate() {
        let material = *ids.get(&p.material).ok_or_else(|| {
            Error::config(
                format!("primitives[{i}].material"),
                format!("unknown material {:?}", p.material),
            )
        })?;
        let shape = match p.shape {
            ShapeEntry::Sphere { center, radius } => Shape::Sphere {
                center: v(center),
                radius,
            },
            ShapeEntry::Plane {
                point,
                normal,
                extent,
            } => {
                let n = v(normal);
                if n.length() == 0.0 {
                    return Err(Error::config(
                        format!("primitives[{i}].normal"),
                        "normal must be nonzero",
                    ));
                }
                Shape::Plane {
                    point: v(point),
                    normal: n.normalized(),
                    extent,
                }
            }
            ShapeEntry::Mesh { vertices, faces } => Shape::Mesh(
                TriangleMesh::new(vertices.into_iter().map(v).collect(), faces)
                    .map_err(|m| Error::config(format!("primitives[{i}].faces"), m))?,
            ),
            ShapeEntry::Icosphere {
                center,
                radius,
                subdivisions,
            } => Shape::Mesh(TriangleMesh::icosphere(
                v(center),
                radius,
                subdivisions.min(7),
            )),
        };
        scene.add(shape, material);
    }
    for l in file.lights {
        scene.add_light(match l {
            LightEntry::Point {
                position,
                intensity,
            } => Light::Point {
                position: v(position),
                intensity,
            },
            LightEntry::Area {
                corner,
                edge_u,
                edge_v,
                radiance,
            } => Light::Area {
                corner: v(corner),
                edge_u: v(edge_u),
                edge_v: v(edge_v),
                radiance,
            },
            LightEntry::Environment { radiance } => Light::Environment { radiance },
        });
    }
    if scene.lights.is_empty() {
        return Err(Error::config(
            "lights",
            "a scene file needs at least one light",
        ));
    }
    scene.validate()?;
    Ok(scene)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene(&text, path.parent().unwrap_or(Path::new(".")))
}
