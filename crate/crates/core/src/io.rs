//! Image files: PFM (authoritative float data), PNG previews and the JSON
//! camera sidecar that travels with every raw render.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::CameraConfig;
use crate::error::{Error, Result};
use crate::renderer::PlenopticImage;

/// Float RGB raster, row 0 on top.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f32; 3]>,
}

/// Encodes a color PFM: little-endian (scale -1), rows bottom to top.
pub fn encode_pfm(r: &Raster) -> Vec<u8> {
    let mut out = format!("PF\n{} {}\n-1.0\n", r.width, r.height).into_bytes();
    out.reserve(r.pixels.len() * 12);
    for row in (0..r.height).rev() {
        for p in &r.pixels[row * r.width..(row + 1) * r.width] {
            for c in p {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    out
}

/// Decodes color (`PF`) or grayscale (`Pf`) PFM of either byte order.
pub fn decode_pfm(bytes: &[u8]) -> std::result::Result<Raster, String> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(
            std::str::from_utf8(&bytes[start..pos])
                .map_err(|_| "non-ASCII header")?
                .to_owned(),
        );
    }
    pos += 1; // single whitespace byte ends the header
    let channels = match fields[0].as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(format!("bad magic {other:?}")),
    };
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("bad dimension {s:?}"))
    };
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let scale: f32 = fields[3]
        .parse()
        .map_err(|_| format!("bad scale {:?}", fields[3]))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err("scale must be nonzero".into());
    }
    let data = bytes.get(pos..).unwrap_or_default();
    let need = w * h * channels * 4;
    if data.len() != need {
        return Err(format!("expected {need} data bytes, found {}", data.len()));
    }
    let word = |k: usize| {
        let b: [u8; 4] = data[4 * k..4 * k + 4].try_into().unwrap();
        if scale < 0.0 {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    };
    let mut pixels = vec![[0f32; 3]; w * h];
    for file_row in 0..h {
        let row = h - 1 - file_row;
        for col in 0..w {
            let k = (file_row * w + col) * channels;
            pixels[row * w + col] = if channels == 3 {
                [word(k), word(k + 1), word(k + 2)]
            } else {
                [word(k); 3]
            };
        }
    }
    Ok(Raster {
        width: w,
        height: h,
        pixels,
    })
}

pub fn write_pfm(path: impl AsRef<Path>, r: &Raster) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pfm(r)).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes).map_err(|message| Error::ImageFormat {
        path: path.into(),
        message,
    })
}

fn srgb_encode(linear: f64) -> u8 {
    let v = linear.clamp(0.0, 1.0);
    let s = if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    };
    (s * 255.0).round() as u8
}

/// 8-bit sRGB preview; linear values are multiplied by `exposure` first.
pub fn write_png(path: impl AsRef<Path>, r: &Raster, exposure: f64) -> Result<()> {
    let mut buf = image::RgbImage::new(r.width as u32, r.height as u32);
    for (dst, src) in buf.pixels_mut().zip(&r.pixels) {
        *dst = image::Rgb(src.map(|c| srgb_encode(c as f64 * exposure)));
    }
    buf.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
    Ok(())
}

/// `out.pfm` -> `out.json`.
pub fn sidecar_path(image_path: &Path) -> PathBuf {
    image_path.with_extension("json")
}

impl PlenopticImage {
    pub fn raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.pixels.clone(),
        }
    }

    /// Writes `path` (PFM) and its JSON camera sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_pfm(path, &self.raster())?;
        let side = sidecar_path(path);
        let mut f = std::fs::File::create(&side).map_err(|e| Error::io(&side, e))?;
        writeln!(f, "{}", self.metadata.to_json()).map_err(|e| Error::io(&side, e))
    }

    /// Reads a PFM and the sidecar next to it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let r = read_pfm(path)?;
        let metadata = CameraConfig::load(sidecar_path(path))?;
        if metadata.sensor.width != r.width || metadata.sensor.height != r.height {
            return Err(Error::Mismatch(format!(
                "{} is {}x{} but its sidecar describes a {}x{} sensor",
                path.display(),
                r.width,
                r.height,
                metadata.sensor.width,
                metadata.sensor.height
            )));
        }
        Ok(Self {
            width: r.width,
            height: r.height,
            pixels: r.pixels,
            valid: None,
            metadata,
        })
    }
}
