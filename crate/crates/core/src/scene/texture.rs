use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Rgb;

/// Albedo lookup in surface-local `(u, v)` coordinates (mm).
#[derive(Debug, Clone, PartialEq)]
pub enum Texture {
    /// Squares of side `period`, axis-aligned in (u, v).
    Checkerboard {
        period: f64,
        colors: [Rgb; 2],
    },
    Image(ImageTexture),
}

impl Texture {
    pub fn checkerboard(period: f64, a: Rgb, b: Rgb) -> Self {
        Texture::Checkerboard {
            period,
            colors: [a, b],
        }
    }

    pub fn lookup(&self, u: f64, v: f64) -> Rgb {
        match self {
            Texture::Checkerboard { period, colors } => {
                let parity =
                    ((u / period).floor() as i64 + (v / period).floor() as i64).rem_euclid(2);
                colors[parity as usize]
            }
            Texture::Image(img) => img.lookup(u, v),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Texture::Checkerboard { period, colors } => {
                if !(*period > 0.0) {
                    return Err(format!(
                        "checkerboard period must be positive, got {period}"
                    ));
                }
                colors
                    .iter()
                    .try_for_each(|c| check_unit(*c, "checkerboard color"))
            }
            Texture::Image(img) => {
                if !(img.size[0] > 0.0 && img.size[1] > 0.0) {
                    return Err("image texture size must be positive".into());
                }
                if img.pixels.len() != img.width * img.height || img.pixels.is_empty() {
                    return Err("image texture raster is empty or inconsistent".into());
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn check_unit(c: Rgb, what: &str) -> std::result::Result<(), String> {
    if c.0.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(format!(
            "{what} components must lie in [0, 1], got {:?}",
            c.0
        ))
    }
}

/// Raster mapped onto a `size[0]` x `size[1]` mm rectangle centered on the
/// uv origin, repeated outside it. Row 0 is the +v edge. Nearest-pixel lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTexture {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
    pub size: [f64; 2],
}

impl ImageTexture {
    pub fn from_fn(
        width: usize,
        height: usize,
        size: [f64; 2],
        mut f: impl FnMut(usize, usize) -> Rgb,
    ) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(col, row));
            }
        }
        Self {
            width,
            height,
            pixels,
            size,
        }
    }

    /// Reads an 8-bit PNG and converts sRGB to linear reflectance.
    pub fn load_png(path: impl AsRef<Path>, size: [f64; 2]) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|e| Error::ImageFormat {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?
            .to_rgb8();
        let (w, h) = img.dimensions();
        Ok(Self::from_fn(w as usize, h as usize, size, |x, y| {
            let p = img.get_pixel(x as u32, y as u32).0;
            Rgb::new(
                srgb_to_linear(p[0]),
                srgb_to_linear(p[1]),
                srgb_to_linear(p[2]),
            )
        }))
    }

    pub fn lookup(&self, u: f64, v: f64) -> Rgb {
        let fx = (u / self.size[0] + 0.5).rem_euclid(1.0);
        let fy = (0.5 - v / self.size[1]).rem_euclid(1.0);
        let col = ((fx * self.width as f64) as usize).min(self.width - 1);
        let row = ((fy * self.height as f64) as usize).min(self.height - 1);
        self.pixels[row * self.width + col]
    }
}

fn srgb_to_linear(v: u8) -> f64 {
    let c = v as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}
