use crate::config::CameraConfig;
use crate::error::{Error, Result};

use super::CameraLayout;

/// Linear RGB raster with the camera that produced it. Row 0 is the top
/// (+y) edge of the sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PlenopticImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f32; 3]>,
    /// Per-pixel validity after white-image division; `None` means all valid.
    pub valid: Option<Vec<bool>>,
    /// Self-contained camera echo plus capture info (seed, spp, timestamp).
    pub metadata: CameraConfig,
}

impl PlenopticImage {
    pub fn get(&self, col: usize, row: usize) -> [f32; 3] {
        self.pixels[row * self.width + col]
    }

    /// Channel mean.
    pub fn value(&self, col: usize, row: usize) -> f64 {
        let p = self.get(col, row);
        (p[0] as f64 + p[1] as f64 + p[2] as f64) / 3.0
    }

    pub fn is_valid(&self, col: usize, row: usize) -> bool {
        self.valid
            .as_ref()
            .is_none_or(|v| v[row * self.width + col])
    }

    pub fn layout(&self) -> Result<CameraLayout> {
        CameraLayout::from_config(&self.metadata)
    }

    /// Errors unless both images share size and camera geometry.
    pub fn check_compatible(&self, other: &PlenopticImage) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::Mismatch(format!(
                "image sizes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let (a, b) = (&self.metadata, &other.metadata);
        if a.mla != b.mla
            || a.layout != b.layout
            || a.sensor.pixel_pitch != b.sensor.pixel_pitch
            || a.lens != b.lens
        {
            return Err(Error::Mismatch(
                "camera metadata differs (lens, MLA, layout or pixel pitch)".into(),
            ));
        }
        Ok(())
    }
}
