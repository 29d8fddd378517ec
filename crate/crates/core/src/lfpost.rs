//! Post-processing of raw plenoptic images: microlens-center calibration,
//! white-image division and sub-aperture views.
//!
//! Pixel coordinates are continuous: pixel `(c, r)` covers `[c, c+1) x [r, r+1)`
//! and its center sits at `(c + 0.5, r + 0.5)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mla::{GridLayout, LensIndex};
use crate::renderer::{CameraLayout, PlenopticImage};

/// Default white-image floor for division (linear units).
pub const DEFAULT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterSource {
    /// Intensity centroid inside the lens's cell.
    Centroid,
    /// Geometric projection (no signal, or cell clipped by the sensor edge).
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensCenter {
    pub i: i64,
    pub j: i64,
    pub x: f64,
    pub y: f64,
    pub source: CenterSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    pub layout: GridLayout,
    pub nx: usize,
    pub ny: usize,
    /// Microlens pitch projected onto the sensor, in pixels.
    pub pitch_px: f64,
    /// Radius of the lit microlens image, in pixels.
    pub radius_px: f64,
    /// Lenses whose projected center lies on the sensor, row-major over
    /// lens rows `j` then columns `i`, both ascending.
    pub centers: Vec<LensCenter>,
}

impl CalibrationGrid {
    pub fn center(&self, idx: LensIndex) -> Option<(f64, f64)> {
        self.centers
            .iter()
            .find(|c| c.i == idx.i && c.j == idx.j)
            .map(|c| (c.x, c.y))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Default, Clone, Copy)]
struct CellSum {
    w: f64,
    wx: f64,
    wy: f64,
    max: f64,
    pixels: usize,
}

/// Per-lens intensity centroids of a white image.
pub fn calibrate_centers(white: &PlenopticImage) -> Result<CalibrationGrid> {
    let layout = white.layout()?;
    let mut sums: HashMap<LensIndex, CellSum> = HashMap::new();
    for row in 0..white.height {
        for col in 0..white.width {
            let Some(idx) = layout.lens_at_pixel(col, row) else {
                continue;
            };
            let v = if white.is_valid(col, row) {
                white.value(col, row)
            } else {
                0.0
            };
            let s = sums.entry(idx).or_default();
            s.w += v;
            s.wx += v * (col as f64 + 0.5);
            s.wy += v * (row as f64 + 0.5);
            s.max = s.max.max(v);
            s.pixels += 1;
        }
    }
    let strongest = sums.values().map(|s| s.w).fold(0.0, f64::max);
    let pitch_px = layout.mla.grid.pitch * (layout.sensor.plane_z - layout.exit_pupil.z)
        / layout.pupil_distance()
        / layout.sensor.pixel_pitch;
    let full_cell = match layout.mla.grid.layout {
        GridLayout::Rect => pitch_px * pitch_px,
        GridLayout::Hex => pitch_px * pitch_px * 3f64.sqrt() / 2.0,
    };

    let mut centers = Vec::with_capacity(layout.mla.grid.len());
    let mut no_signal = 0;
    let mut radii = Vec::new();
    for idx in layout.mla.grid.indices() {
        let (gx, gy) = layout.projected_center_px(idx);
        if !(0.0..white.width as f64).contains(&gx) || !(0.0..white.height as f64).contains(&gy) {
            continue;
        }
        let s = sums.get(&idx).copied().unwrap_or_default();
        let has_signal = strongest > 0.0 && s.w > 0.01 * strongest;
        if !has_signal {
            no_signal += 1;
        }
        // Cells cut by the sensor edge give biased centroids.
        let whole = (s.pixels as f64) >= 0.9 * full_cell;
        let (x, y, source) = if has_signal && whole {
            let lit = sums_lit_count(white, &layout, idx, 0.5 * s.max);
            radii.push((lit as f64 / std::f64::consts::PI).sqrt());
            (s.wx / s.w, s.wy / s.w, CenterSource::Centroid)
        } else {
            (gx, gy, CenterSource::Geometric)
        };
        centers.push(LensCenter {
            i: idx.i,
            j: idx.j,
            x,
            y,
            source,
        });
    }
    if 2 * no_signal > centers.len() {
        return Err(Error::Calibration(format!(
            "{no_signal} of {} microlenses show no signal",
            centers.len()
        )));
    }
    radii.sort_by(f64::total_cmp);
    let radius_px = radii
        .get(radii.len() / 2)
        .copied()
        .unwrap_or_else(|| layout.microlens_image_radius_px());
    let g = &layout.mla.grid;
    Ok(CalibrationGrid {
        layout: g.layout,
        nx: g.nx,
        ny: g.ny,
        pitch_px,
        radius_px,
        centers,
    })
}

fn sums_lit_count(
    img: &PlenopticImage,
    layout: &CameraLayout,
    idx: LensIndex,
    threshold: f64,
) -> usize {
    let (gx, gy) = layout.projected_center_px(idx);
    let reach = (layout.mla.grid.pitch / layout.sensor.pixel_pitch).ceil() as i64 + 1;
    let mut n = 0;
    for row in (gy as i64 - reach).max(0)..(gy as i64 + reach).min(img.height as i64) {
        for col in (gx as i64 - reach).max(0)..(gx as i64 + reach).min(img.width as i64) {
            let (c, r) = (col as usize, row as usize);
            if layout.lens_at_pixel(c, r) == Some(idx)
                && img.is_valid(c, r)
                && img.value(c, r) > threshold
            {
                n += 1;
            }
        }
    }
    n
}

/// Divides `image` by `white` pixel-wise per channel. Pixels where any white
/// channel is below `floor` become 0 and are flagged invalid.
pub fn devignette(
    image: &PlenopticImage,
    white: &PlenopticImage,
    floor: f64,
) -> Result<PlenopticImage> {
    image.check_compatible(white)?;
    let mut out = image.clone();
    let mut valid = vec![true; image.pixels.len()];
    for (k, (p, w)) in out.pixels.iter_mut().zip(&white.pixels).enumerate() {
        let ok = w.iter().all(|&c| c as f64 >= floor) && image.valid.as_ref().is_none_or(|v| v[k]);
        if ok {
            for c in 0..3 {
                p[c] = (p[c] as f64 / (w[c] as f64).max(floor)) as f32;
            }
        } else {
            *p = [0.0; 3];
            valid[k] = false;
        }
    }
    out.valid = Some(valid);
    Ok(out)
}

/// One pixel per microlens, all sampled at the same offset from the lens
/// image centers. Row 0 holds the top (+y) lens row.
#[derive(Debug, Clone, PartialEq)]
pub struct SubApertureImage {
    pub width: usize,
    pub height: usize,
    pub u: f64,
    pub v: f64,
    pub pixels: Vec<[f32; 3]>,
    pub valid: Vec<bool>,
}

impl SubApertureImage {
    pub fn get(&self, col: usize, row: usize) -> [f32; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn value(&self, col: usize, row: usize) -> f64 {
        let p = self.get(col, row);
        (p[0] as f64 + p[1] as f64 + p[2] as f64) / 3.0
    }
}

/// Bilinear sample at a continuous pixel-space point; `None` if any tap is
/// outside the image or invalid.
pub fn bilinear(img: &PlenopticImage, x: f64, y: f64) -> Option<[f32; 3]> {
    let (fx, fy) = (x - 0.5, y - 0.5);
    let (c0, r0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - c0, fy - r0);
    if c0 < 0.0 || r0 < 0.0 {
        return None;
    }
    let (c0, r0) = (c0 as usize, r0 as usize);
    let c1 = if tx > 0.0 { c0 + 1 } else { c0 };
    let r1 = if ty > 0.0 { r0 + 1 } else { r0 };
    if c1 >= img.width || r1 >= img.height {
        return None;
    }
    let taps = [
        (c0, r0, (1.0 - tx) * (1.0 - ty)),
        (c1, r0, tx * (1.0 - ty)),
        (c0, r1, (1.0 - tx) * ty),
        (c1, r1, tx * ty),
    ];
    let mut out = [0f64; 3];
    for (c, r, w) in taps {
        if w == 0.0 {
            continue;
        }
        if !img.is_valid(c, r) {
            return None;
        }
        let p = img.get(c, r);
        for k in 0..3 {
            out[k] += w * p[k] as f64;
        }
    }
    Some(out.map(|v| v as f32))
}

/// Sub-aperture view at offset `(u, v)` pixels from every lens image center.
pub fn extract_subaperture(
    image: &PlenopticImage,
    cal: &CalibrationGrid,
    u: f64,
    v: f64,
) -> Result<SubApertureImage> {
    if (u * u + v * v).sqrt() > cal.radius_px {
        return Err(Error::OutOfRange(format!(
            "view offset ({u}, {v}) lies outside the microlens image radius {:.2} px",
            cal.radius_px
        )));
    }
    let (w, h) = (cal.nx, cal.ny);
    let mut pixels = vec![[0f32; 3]; w * h];
    let mut valid = vec![false; w * h];
    let i0 = -(cal.nx as i64 / 2);
    let j1 = cal.ny as i64 - 1 - cal.ny as i64 / 2;
    for c in &cal.centers {
        let (col, row) = ((c.i - i0) as usize, (j1 - c.j) as usize);
        if let Some(p) = bilinear(image, c.x + u, c.y + v) {
            pixels[row * w + col] = p;
            valid[row * w + col] = true;
        }
    }
    Ok(SubApertureImage {
        width: w,
        height: h,
        u,
        v,
        pixels,
        valid,
    })
}

/// Horizontal shift `d` (sub-aperture pixels) maximizing the normalized
/// cross-correlation of `a(x)` with `b(x + d)` over the rectangle
/// `cols x rows`, refined by a parabola through the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disparity {
    pub shift: f64,
    pub peak: f64,
}

pub fn ncc_disparity(
    a: &SubApertureImage,
    b: &SubApertureImage,
    cols: std::ops::Range<usize>,
    rows: std::ops::Range<usize>,
    max_shift: i64,
) -> Option<Disparity> {
    let score = |d: i64| -> Option<f64> {
        let mut pairs = Vec::new();
        for r in rows.clone() {
            for c in cols.clone() {
                let cb = c as i64 + d;
                if cb < 0 || cb >= b.width as i64 || r >= a.height || c >= a.width {
                    continue;
                }
                let cb = cb as usize;
                if a.valid[r * a.width + c] && b.valid[r * b.width + cb] {
                    pairs.push((a.value(c, r), b.value(cb, r)));
                }
            }
        }
        if pairs.len() < 4 {
            return None;
        }
        let n = pairs.len() as f64;
        let (ma, mb) = pairs
            .iter()
            .fold((0.0, 0.0), |(x, y), p| (x + p.0 / n, y + p.1 / n));
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in &pairs {
            sab += (x - ma) * (y - mb);
            saa += (x - ma) * (x - ma);
            sbb += (y - mb) * (y - mb);
        }
        (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
    };
    let scores: Vec<(i64, f64)> = (-max_shift..=max_shift)
        .filter_map(|d| score(d).map(|s| (d, s)))
        .collect();
    let &(best, peak) = scores.iter().max_by(|x, y| x.1.total_cmp(&y.1))?;
    let at = |d: i64| scores.iter().find(|s| s.0 == d).map(|s| s.1);
    let shift = match (at(best - 1), at(best + 1)) {
        (Some(l), Some(r)) => {
            let denom = l - 2.0 * peak + r;
            if denom < 0.0 {
                best as f64 + 0.5 * (l - r) / denom
            } else {
                best as f64
            }
        }
        _ => best as f64,
    };
    Some(Disparity { shift, peak })
}
