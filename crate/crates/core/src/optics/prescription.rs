//! Lens prescriptions and the plain-text `.lens` table format.
//!
//! One surface per line, scene side first:
//!
//! ```text
//! # R_mm   spacing_to_next_mm   ior_after   semi_diameter_mm
//! 58.950   7.520   1.670   25.2
//! STOP
//! 0        9.000   1.000   17.1
//! IDEAL 100 95 20           # ideal thin lens: focal length, spacing, semi-diameter
//! EXIT 20.0 65.08           # exit aperture: radius, absolute z
//! ```
//!
//! `R = 0` (or `inf`) is planar. `STOP` marks the following (planar) surface
//! as the iris. The first vertex sits at z = 0 and z grows toward the sensor;
//! the spacing after the last surface is kept as the nominal image distance.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aperture::ApertureShape;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SurfaceKind {
    Spherical,
    /// Paraxially perfect thin lens of the given focal length.
    Ideal {
        focal_length: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensSurface {
    /// Signed curvature radius; positive when the center of curvature lies
    /// on the +z side of the vertex. Zero means planar.
    pub radius: f64,
    /// Vertex position on the optical axis.
    pub z: f64,
    /// Distance from this vertex to the next one (or to the nominal image plane).
    pub spacing: f64,
    pub semi_diameter: f64,
    /// Refractive index of the medium on the image side.
    pub ior_after: f64,
    pub kind: SurfaceKind,
}

impl LensSurface {
    pub fn is_planar(&self) -> bool {
        self.radius == 0.0 || self.radius.is_infinite()
    }

    pub fn curvature(&self) -> f64 {
        if self.is_planar() {
            0.0
        } else {
            1.0 / self.radius
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitAperture {
    pub shape: ApertureShape,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LensPrescription {
    pub surfaces: Vec<LensSurface>,
    pub stop_index: usize,
    pub stop_shape: ApertureShape,
    pub exit: ExitAperture,
}

/// Input row before vertex positions are accumulated.
struct Row {
    radius: f64,
    spacing: f64,
    ior_after: f64,
    semi_diameter: f64,
    kind: SurfaceKind,
}

impl LensPrescription {
    /// Builds a prescription from surfaces whose `z` values are already set.
    /// The stop shape defaults to a circle filling the stop surface and the
    /// exit aperture to the rear clear aperture 1 mm behind the last vertex.
    pub fn new(surfaces: Vec<LensSurface>, stop_index: usize) -> Result<Self> {
        let stop_radius = surfaces
            .get(stop_index)
            .map(|s| s.semi_diameter)
            .ok_or_else(|| Error::InvalidLens(format!("stop index {stop_index} out of range")))?;
        let last = *surfaces
            .last()
            .ok_or_else(|| Error::InvalidLens("no surfaces".into()))?;
        let lens = Self {
            surfaces,
            stop_index,
            stop_shape: ApertureShape::circle(stop_radius),
            exit: ExitAperture {
                shape: ApertureShape::circle(last.semi_diameter),
                z: last.z + 1.0,
            },
        };
        lens.validate()?;
        Ok(lens)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidLens(m));
        if self.surfaces.is_empty() {
            return bad("no surfaces".into());
        }
        if self.stop_index >= self.surfaces.len() {
            return bad(format!("stop index {} out of range", self.stop_index));
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            if !(s.semi_diameter > 0.0) {
                return bad(format!("surface {i}: semi-diameter must be positive"));
            }
            if !(s.ior_after >= 1.0) {
                return bad(format!(
                    "surface {i}: ior must be >= 1, got {}",
                    s.ior_after
                ));
            }
            if !s.is_planar() && s.radius.abs() <= s.semi_diameter {
                return bad(format!(
                    "surface {i}: |R| = {} must exceed the semi-diameter {}",
                    s.radius.abs(),
                    s.semi_diameter
                ));
            }
            if let SurfaceKind::Ideal { focal_length } = s.kind {
                if focal_length == 0.0 || !focal_length.is_finite() {
                    return bad(format!(
                        "surface {i}: ideal lens needs a finite non-zero focal length"
                    ));
                }
                if s.ior_after != self.ior_before(i) {
                    return bad(format!(
                        "surface {i}: ideal lens must sit in a single medium"
                    ));
                }
            }
            if i > 0 && !(s.z > self.surfaces[i - 1].z) {
                return bad(format!(
                    "surface {i}: vertex positions must strictly increase"
                ));
            }
        }
        let stop = &self.surfaces[self.stop_index];
        if !stop.is_planar() || stop.kind != SurfaceKind::Spherical {
            return bad("the stop surface must be a plain planar surface".into());
        }
        if stop.ior_after != self.ior_before(self.stop_index) {
            return bad("the stop must not change the medium".into());
        }
        self.stop_shape.validate().map_err(Error::InvalidLens)?;
        self.exit.shape.validate().map_err(Error::InvalidLens)?;
        Ok(())
    }

    /// Index of refraction on the scene side of surface `i`.
    pub fn ior_before(&self, i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.surfaces[i - 1].ior_after
        }
    }

    pub fn front_z(&self) -> f64 {
        self.surfaces[0].z
    }

    pub fn rear_z(&self) -> f64 {
        self.surfaces[self.surfaces.len() - 1].z
    }

    /// Midpoint between the front and rear vertices.
    pub fn center_z(&self) -> f64 {
        0.5 * (self.front_z() + self.rear_z())
    }

    pub fn stop_z(&self) -> f64 {
        self.surfaces[self.stop_index].z
    }

    pub fn with_stop_shape(mut self, shape: ApertureShape) -> Self {
        self.stop_shape = shape;
        self
    }

    pub fn with_exit(mut self, exit: ExitAperture) -> Self {
        self.exit = exit;
        self
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut stop_index = None;
        let mut stop_pending = false;
        let mut exit = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |m: String| Error::LensParse {
                line: line_no,
                message: m,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap();
            let rest: Vec<&str> = tokens.collect();
            match head.to_ascii_uppercase().as_str() {
                "STOP" => {
                    if !rest.is_empty() {
                        return Err(err("STOP takes no arguments".into()));
                    }
                    if stop_index.is_some() || stop_pending {
                        return Err(err("more than one STOP marker".into()));
                    }
                    stop_pending = true;
                }
                "EXIT" => {
                    let v = parse_numbers(&rest, 2, line_no)?;
                    exit = Some((v[0], v[1]));
                }
                "IDEAL" => {
                    let v = parse_numbers(&rest, 3, line_no)?;
                    if stop_pending {
                        return Err(err("the stop must be a planar surface row".into()));
                    }
                    let ior = rows.last().map_or(1.0, |r: &Row| r.ior_after);
                    rows.push(Row {
                        radius: 0.0,
                        spacing: v[1],
                        ior_after: ior,
                        semi_diameter: v[2],
                        kind: SurfaceKind::Ideal { focal_length: v[0] },
                    });
                }
                _ => {
                    let mut fields = vec![head];
                    fields.extend(rest);
                    let v = parse_numbers(&fields, 4, line_no)?;
                    if stop_pending {
                        stop_index = Some(rows.len());
                        stop_pending = false;
                    }
                    rows.push(Row {
                        radius: v[0],
                        spacing: v[1],
                        ior_after: v[2],
                        semi_diameter: v[3],
                        kind: SurfaceKind::Spherical,
                    });
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::LensParse {
                line: 0,
                message: "no surfaces".into(),
            });
        }
        if stop_pending {
            return Err(Error::LensParse {
                line: 0,
                message: "STOP marker not followed by a surface".into(),
            });
        }
        let stop_index = stop_index.ok_or(Error::LensParse {
            line: 0,
            message: "missing STOP marker".into(),
        })?;

        let mut z = 0.0;
        let surfaces: Vec<LensSurface> = rows
            .iter()
            .map(|r| {
                let s = LensSurface {
                    radius: if r.radius.is_infinite() {
                        0.0
                    } else {
                        r.radius
                    },
                    z,
                    spacing: r.spacing,
                    semi_diameter: r.semi_diameter,
                    ior_after: r.ior_after,
                    kind: r.kind,
                };
                z += r.spacing;
                s
            })
            .collect();
        let mut lens = Self::new(surfaces, stop_index)?;
        if let Some((r, z)) = exit {
            lens.exit = ExitAperture {
                shape: ApertureShape::circle(r),
                z,
            };
            lens.validate()?;
        }
        Ok(lens)
    }

    /// Serializes to the `.lens` table format. Stop and exit shapes other
    /// than plain circles are not representable and are written as circles.
    pub fn to_lens_text(&self) -> String {
        let mut out = String::from("# R_mm  spacing_to_next_mm  ior_after  semi_diameter_mm\n");
        for (i, s) in self.surfaces.iter().enumerate() {
            if i == self.stop_index {
                out.push_str("STOP\n");
            }
            match s.kind {
                SurfaceKind::Spherical => {
                    let _ = writeln!(
                        out,
                        "{} {} {} {}",
                        s.radius, s.spacing, s.ior_after, s.semi_diameter
                    );
                }
                SurfaceKind::Ideal { focal_length } => {
                    let _ = writeln!(
                        out,
                        "IDEAL {} {} {}",
                        focal_length, s.spacing, s.semi_diameter
                    );
                }
            }
        }
        let _ = writeln!(out, "EXIT {} {}", self.exit.shape.radius, self.exit.z);
        out
    }
}

fn parse_numbers(fields: &[&str], n: usize, line: usize) -> Result<Vec<f64>> {
    if fields.len() != n {
        return Err(Error::LensParse {
            line,
            message: format!("expected {n} numbers, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| match f.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
            other => other.parse::<f64>().map_err(|_| Error::LensParse {
                line,
                message: format!("not a number: {f:?}"),
            }),
        })
        .collect()
}

/// The bundled 100 mm double-Gauss objective.
pub const DOUBLE_GAUSS_100: &str = include_str!("../../assets/doublegauss100.lens");

pub fn double_gauss_100() -> LensPrescription {
    LensPrescription::parse(DOUBLE_GAUSS_100).expect("bundled prescription parses")
}
