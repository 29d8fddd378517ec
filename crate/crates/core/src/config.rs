//! Camera configuration files and the bundled presets.
//!
//! ```json
//! {
//!   "lens": { "builtin": "doublegauss100" },
//!   "mla": { "pitch": 0.217, "diameter": 0.217, "focal_length": 2.0, "ior": 1.5,
//!            "thickness": 0.01, "layout": "rect", "nx": 15, "ny": 15 },
//!   "layout": { "preset": "plenoptic2", "mla_distance": 123.3, "sensor_gap": 1.7 },
//!   "sensor": { "width": 600, "height": 600, "pixel_pitch": 0.0054, "spp": 16, "seed": 1 },
//!   "aperture": { "shape": { "kind": "polygon", "blades": 6 }, "f_number": 8.0 }
//! }
//! ```
//!
//! `lens` is one of `{"builtin": name}`, `{"file": path}` (relative to the
//! config file) or `{"inline": prescription text}`. `mla_distance` is
//! measured from the midpoint of the objective's first and last vertex to
//! the MLA front plane; `mla_z` gives the absolute position instead.
//! `aperture.f_number` sets the stop so that EFL / entrance-pupil diameter
//! equals it; `aperture.radius` sets the stop circumradius directly; with
//! neither the stop is wide open. `exit_aperture` (`radius`, `offset` behind
//! the last vertex) overrides the default exit aperture.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mla::GridLayout;
use crate::optics::{double_gauss_100, ApertureKind, LensPrescription};
use crate::renderer::BlockStats;

pub const THIN_LENS_2MM: &str = include_str!("../assets/thinlens2mm.lens");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LensSource {
    /// `doublegauss100` or `thinlens2mm`.
    Builtin(String),
    File(PathBuf),
    Inline(String),
}

impl LensSource {
    pub fn load(&self) -> Result<LensPrescription> {
        match self {
            LensSource::Builtin(name) => match name.as_str() {
                "doublegauss100" => Ok(double_gauss_100()),
                "thinlens2mm" => LensPrescription::parse(THIN_LENS_2MM),
                other => Err(Error::config(
                    "lens.builtin",
                    format!("unknown builtin lens {other:?}"),
                )),
            },
            LensSource::File(path) => LensPrescription::load(path),
            LensSource::Inline(text) => LensPrescription::parse(text),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlaBlock {
    pub pitch: f64,
    pub diameter: f64,
    pub focal_length: f64,
    #[serde(default = "default_ior")]
    pub ior: f64,
    #[serde(default = "default_thickness")]
    pub thickness: f64,
    #[serde(default = "default_grid")]
    pub layout: GridLayout,
    pub nx: usize,
    pub ny: usize,
}

fn default_ior() -> f64 {
    1.5
}

fn default_thickness() -> f64 {
    0.01
}

fn default_grid() -> GridLayout {
    GridLayout::Rect
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutPreset {
    /// MLA focused at infinity: sensor one microlens focal length behind it.
    Plenoptic1,
    /// MLA focused on the main lens's virtual image: sensor gap differs from f.
    Plenoptic2,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutBlock {
    pub preset: LayoutPreset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mla_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mla_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorBlock {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch: f64,
    #[serde(default = "default_spp")]
    pub spp: u32,
    #[serde(default)]
    pub seed: u64,
}

fn default_spp() -> u32 {
    16
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureBlock {
    #[serde(default = "circle")]
    pub shape: ApertureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_number: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

fn circle() -> ApertureKind {
    ApertureKind::Circle
}

impl Default for ApertureBlock {
    fn default() -> Self {
        Self {
            shape: ApertureKind::Circle,
            f_number: None,
            radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitBlock {
    pub radius: f64,
    #[serde(default = "one")]
    pub offset: f64,
}

fn one() -> f64 {
    1.0
}

/// Written by renders; ignored when a sidecar is fed back as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureInfo {
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub scene: String,
    pub spp: u32,
    pub seed: u64,
    pub stats: BlockStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub lens: LensSource,
    pub mla: MlaBlock,
    pub layout: LayoutBlock,
    pub sensor: SensorBlock,
    #[serde(default)]
    pub aperture: ApertureBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_aperture: Option<ExitBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<CaptureInfo>,
}

impl CameraConfig {
    /// Parses JSON with field-level errors. Lens file paths resolve against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: CameraConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        if let LensSource::File(p) = &cfg.lens {
            if p.is_relative() {
                cfg.lens = LensSource::File(base_dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Same camera with the lens prescription embedded as text.
    pub fn self_contained(&self) -> Result<Self> {
        let lens = self.lens.load()?;
        Ok(Self {
            lens: LensSource::Inline(lens.to_lens_text()),
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Plenoptic 2.0 setup: MLA 123.3 mm behind the objective center, sensor
/// 1.7 mm behind the MLA, 100 mm double-Gauss, 2 mm / 0.217 mm microlenses.
pub fn plenoptic2() -> CameraConfig {
    CameraConfig {
        lens: LensSource::Builtin("doublegauss100".into()),
        mla: MlaBlock {
            pitch: 0.217,
            diameter: 0.217,
            focal_length: 2.0,
            ior: 1.5,
            thickness: 0.01,
            layout: GridLayout::Rect,
            nx: 15,
            ny: 15,
        },
        layout: LayoutBlock {
            preset: LayoutPreset::Plenoptic2,
            mla_distance: Some(123.3),
            mla_z: None,
            sensor_gap: Some(1.7),
        },
        sensor: SensorBlock {
            width: 600,
            height: 600,
            pixel_pitch: 0.0054,
            spp: 16,
            seed: 1,
        },
        aperture: ApertureBlock {
            shape: ApertureKind::Circle,
            f_number: Some(PRESET_F_NUMBER),
            radius: None,
        },
        exit_aperture: None,
        capture: None,
    }
}

/// Plenoptic 1.0 setup: same objective and MLA, sensor at the microlens
/// focal plane (2 mm).
pub fn plenoptic1() -> CameraConfig {
    let mut c = plenoptic2();
    c.layout.preset = LayoutPreset::Plenoptic1;
    c.layout.sensor_gap = Some(2.0);
    c
}

/// Object-side f-number at which the objective's image cone roughly fills
/// one microlens image at the preset MLA distance.
pub const PRESET_F_NUMBER: f64 = 8.0;

#[cfg(test)]
mod tests {
    use super::*;

    fn asset(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("assets")
            .join(name)
    }

    #[test]
    fn bundled_presets_match_code() {
        assert_eq!(
            CameraConfig::load(asset("plenoptic1.json")).unwrap(),
            plenoptic1()
        );
        assert_eq!(
            CameraConfig::load(asset("plenoptic2.json")).unwrap(),
            plenoptic2()
        );
    }

    #[test]
    fn json_round_trip() {
        let c = plenoptic2().self_contained().unwrap();
        let back = CameraConfig::parse(&c.to_json(), Path::new(".")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn field_level_errors() {
        let mut v: serde_json::Value = serde_json::to_value(plenoptic2()).unwrap();
        v["mla"]["pitch"] = serde_json::json!("wide");
        match CameraConfig::parse(&v.to_string(), Path::new(".")) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "mla.pitch"),
            other => panic!("{other:?}"),
        }
        let mut v: serde_json::Value = serde_json::to_value(plenoptic2()).unwrap();
        v["sensor"]["colour"] = serde_json::json!(1);
        assert!(matches!(
            CameraConfig::parse(&v.to_string(), Path::new(".")),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn relative_lens_paths_resolve_against_config_dir() {
        let mut v: serde_json::Value = serde_json::to_value(plenoptic2()).unwrap();
        v["lens"] = serde_json::json!({ "file": "doublegauss100.lens" });
        let c = CameraConfig::parse(&v.to_string(), &asset("")).unwrap();
        assert_eq!(c.lens.load().unwrap(), double_gauss_100());
    }
}
