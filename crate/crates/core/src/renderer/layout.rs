use crate::config::{CameraConfig, LayoutPreset};
use crate::error::{Error, Result};
use crate::mla::{LensIndex, MicrolensSpec, MlaConfig, MlaGrid};
use crate::optics::{
    analyze_paraxial, entrance_pupil, exit_pupil, ApertureShape, ExitAperture, LensPrescription,
    Pupil,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch: f64,
    pub plane_z: f64,
    pub spp: u32,
    pub seed: u64,
}

impl SensorConfig {
    /// Lateral position of the pixel-space point `(px, py)`; pixel `(c, r)`
    /// spans `[c, c+1) x [r, r+1)` and row 0 is the +y edge.
    pub fn position(&self, px: f64, py: f64) -> (f64, f64) {
        (
            (px - 0.5 * self.width as f64) * self.pixel_pitch,
            (0.5 * self.height as f64 - py) * self.pixel_pitch,
        )
    }

    /// Inverse of [`position`](Self::position).
    pub fn pixel_coords(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x / self.pixel_pitch + 0.5 * self.width as f64,
            0.5 * self.height as f64 - y / self.pixel_pitch,
        )
    }
}

/// A fully resolved camera: objective, microlens array and sensor.
#[derive(Debug, Clone)]
pub struct CameraLayout {
    pub config: CameraConfig,
    pub preset: LayoutPreset,
    pub lens: LensPrescription,
    pub mla: MlaConfig,
    pub sensor: SensorConfig,
    /// Paraxial exit pupil of the objective.
    pub exit_pupil: Pupil,
}

impl CameraLayout {
    pub fn from_config(config: &CameraConfig) -> Result<Self> {
        let mut lens = config.lens.load()?;
        let efl = analyze_paraxial(&lens)
            .map_err(|_| Error::config("lens", "the objective is afocal"))?
            .efl;
        let stop_semi = lens.surfaces[lens.stop_index].semi_diameter;
        let a = &config.aperture;
        let radius = match (a.f_number, a.radius) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "aperture",
                    "give f_number or radius, not both",
                ))
            }
            (Some(n), None) if n > 0.0 => {
                efl / (2.0 * n) / entrance_pupil(&lens).magnification.abs()
            }
            (Some(n), None) => {
                return Err(Error::config(
                    "aperture.f_number",
                    format!("must be positive, got {n}"),
                ))
            }
            (None, Some(r)) => r,
            (None, None) => stop_semi,
        };
        if radius > stop_semi * (1.0 + 1e-12) {
            return Err(Error::config(
                "aperture",
                format!(
                    "stop radius {radius:.3} mm exceeds the stop's clear semi-diameter {stop_semi}"
                ),
            ));
        }
        let shape = ApertureShape {
            kind: a.shape,
            radius,
        };
        shape
            .validate()
            .map_err(|m| Error::config("aperture.shape", m))?;
        lens = lens.with_stop_shape(shape);
        if let Some(exit) = config.exit_aperture {
            let shape = ApertureShape::circle(exit.radius);
            shape
                .validate()
                .map_err(|m| Error::config("exit_aperture.radius", m))?;
            let z = lens.rear_z() + exit.offset;
            lens = lens.with_exit(ExitAperture { shape, z });
        }

        let m = &config.mla;
        let front_z = match (config.layout.mla_distance, config.layout.mla_z) {
            (Some(d), None) => lens.center_z() + d,
            (None, Some(z)) => z,
            _ => {
                return Err(Error::config(
                    "layout",
                    "give exactly one of mla_distance or mla_z",
                ))
            }
        };
        let spec = MicrolensSpec {
            focal_length: m.focal_length,
            diameter: m.diameter,
            ior: m.ior,
            plate_thickness: m.thickness,
        };
        let mla = MlaConfig {
            spec,
            grid: MlaGrid {
                layout: m.layout,
                pitch: m.pitch,
                nx: m.nx,
                ny: m.ny,
                plane_z: front_z,
            },
        };
        mla.validate()
            .map_err(|e| Error::config("mla", e.to_string()))?;
        if front_z <= lens.rear_z().max(lens.exit.z) {
            return Err(Error::config(
                "layout",
                "the MLA must sit behind the objective and its exit aperture",
            ));
        }

        let f = m.focal_length;
        let gap = match (config.layout.preset, config.layout.sensor_gap) {
            (LayoutPreset::Plenoptic1, None) => f,
            (LayoutPreset::Plenoptic1, Some(g)) if (g - f).abs() <= 1e-12 * f => g,
            (LayoutPreset::Plenoptic1, Some(g)) => {
                return Err(Error::config(
                    "layout.sensor_gap",
                    format!("plenoptic1 needs the gap to equal the microlens f ({f}), got {g}"),
                ))
            }
            (LayoutPreset::Plenoptic2, Some(g)) if (g - f).abs() > 1e-12 * f => g,
            (LayoutPreset::Plenoptic2, Some(_)) => {
                return Err(Error::config(
                    "layout.sensor_gap",
                    "plenoptic2 needs a gap different from the microlens f",
                ))
            }
            (_, Some(g)) => g,
            (_, None) => {
                return Err(Error::config(
                    "layout.sensor_gap",
                    "required for this preset",
                ))
            }
        };
        if !(gap > 0.0) {
            return Err(Error::config("layout.sensor_gap", "must be positive"));
        }

        let s = &config.sensor;
        if s.width == 0 || s.height == 0 || !(s.pixel_pitch > 0.0) || s.spp == 0 {
            return Err(Error::config(
                "sensor",
                "width, height, pixel_pitch and spp must be positive",
            ));
        }
        let sensor = SensorConfig {
            width: s.width,
            height: s.height,
            pixel_pitch: s.pixel_pitch,
            plane_z: mla.back_z() + gap,
            spp: s.spp,
            seed: s.seed,
        };
        let exit_pupil = exit_pupil(&lens);
        if exit_pupil.z >= front_z {
            return Err(Error::config(
                "layout",
                "the exit pupil lies behind the MLA",
            ));
        }
        Ok(Self {
            config: config.clone(),
            preset: config.layout.preset,
            lens,
            mla,
            sensor,
            exit_pupil,
        })
    }

    /// MLA back plane to sensor.
    pub fn sensor_gap(&self) -> f64 {
        self.sensor.plane_z - self.mla.back_z()
    }

    /// Objective center (midpoint of first and last vertex) to MLA front plane.
    pub fn mla_distance(&self) -> f64 {
        self.mla.front_z() - self.lens.center_z()
    }

    /// Exit pupil to MLA front plane.
    pub fn pupil_distance(&self) -> f64 {
        self.mla.front_z() - self.exit_pupil.z
    }

    /// Central projection through the exit-pupil center from the sensor
    /// plane onto the MLA front plane.
    pub fn sensor_to_mla(&self, x: f64, y: f64) -> (f64, f64) {
        let k = self.pupil_distance() / (self.sensor.plane_z - self.exit_pupil.z);
        (x * k, y * k)
    }

    /// Lens whose cell contains the center of pixel `(col, row)`.
    pub fn lens_at_pixel(&self, col: usize, row: usize) -> Option<LensIndex> {
        let (x, y) = self.sensor.position(col as f64 + 0.5, row as f64 + 0.5);
        let (mx, my) = self.sensor_to_mla(x, y);
        self.mla.grid.lens_index_at(mx, my).ok().map(|(idx, _)| idx)
    }

    /// Where the exit-pupil center projects a microlens center on the
    /// sensor, in pixel coordinates.
    pub fn projected_center_px(&self, idx: LensIndex) -> (f64, f64) {
        let (cx, cy) = self.mla.grid.center(idx);
        let k = (self.sensor.plane_z - self.exit_pupil.z) / self.pupil_distance();
        self.sensor.pixel_coords(cx * k, cy * k)
    }

    /// Paraxial radius (px) of the exit pupil as seen through one microlens.
    pub fn microlens_image_radius_px(&self) -> f64 {
        let r_xp = self.lens.stop_shape.radius * self.exit_pupil.magnification.abs();
        r_xp * self.sensor_gap() / self.pupil_distance() / self.sensor.pixel_pitch
    }

    /// Distance in front of the MLA of the plane its microlenses focus on
    /// (thin-lens conjugate of the sensor gap). Negative for a virtual object
    /// behind the MLA, as in the 2.0 preset; infinite for 1.0.
    pub fn microlens_object_distance(&self) -> f64 {
        crate::optics::conjugate_distance(self.mla.spec.focal_length, self.sensor_gap())
    }

    /// Axial position of the main-lens image the microlenses are focused on.
    pub fn microlens_focus_z(&self) -> f64 {
        self.mla.front_z() - self.microlens_object_distance()
    }

    /// Human-readable warnings about inconsistent but renderable setups.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let g = &self.mla.grid;
        let (i0, i1) = g.i_range();
        let (j0, j1) = g.j_range();
        let (x0, y0) = g.center(LensIndex { i: i0, j: j0 });
        let (x1, y1) = g.center(LensIndex { i: i1, j: j1 });
        let half = 0.5 * g.pitch;
        let (sx, sy) = self.sensor_to_mla(
            0.5 * self.sensor.width as f64 * self.sensor.pixel_pitch,
            0.5 * self.sensor.height as f64 * self.sensor.pixel_pitch,
        );
        if x0 - half > -sx || x1 + half < sx || y0 - half > -sy || y1 + half < sy {
            w.push(
                "the sensor extends beyond the microlens grid; edge pixels will be black".into(),
            );
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{plenoptic1, plenoptic2};
    use crate::optics::conjugate_distance;

    #[test]
    fn plenoptic2_preset_geometry() {
        let l = CameraLayout::from_config(&plenoptic2()).unwrap();
        assert!((l.mla_distance() - 123.3).abs() < 1e-9);
        assert!((l.sensor_gap() - 1.7).abs() < 1e-12);
        assert!((conjugate_distance(2.0, l.sensor_gap()) + 11.333).abs() < 0.01);
        assert!(l.warnings().is_empty(), "{:?}", l.warnings());
    }

    #[test]
    fn plenoptic1_preset_is_focused_at_infinity() {
        let l = CameraLayout::from_config(&plenoptic1()).unwrap();
        assert_eq!(l.sensor_gap(), l.mla.spec.focal_length);
        assert!(l.microlens_object_distance().is_infinite());
    }

    #[test]
    fn preset_gap_rules() {
        let mut c = plenoptic1();
        c.layout.sensor_gap = Some(1.9);
        assert!(matches!(
            CameraLayout::from_config(&c),
            Err(Error::Config { .. })
        ));
        let mut c = plenoptic2();
        c.layout.sensor_gap = Some(2.0);
        assert!(matches!(
            CameraLayout::from_config(&c),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn f_number_sets_entrance_pupil() {
        let l = CameraLayout::from_config(&plenoptic2()).unwrap();
        let ep = entrance_pupil(&l.lens);
        let efl = analyze_paraxial(&l.lens).unwrap().efl;
        let n = efl / (2.0 * l.lens.stop_shape.radius * ep.magnification.abs());
        assert!((n - crate::config::PRESET_F_NUMBER).abs() < 1e-9);
    }

    #[test]
    fn preset_microlens_images_nearly_fill_cells() {
        for c in [plenoptic1(), plenoptic2()] {
            let l = CameraLayout::from_config(&c).unwrap();
            let cell = 0.5 * l.mla.grid.pitch / l.sensor.pixel_pitch;
            let r = l.microlens_image_radius_px();
            assert!(r > 0.75 * cell && r <= 1.0 * cell, "{r} vs {cell}");
        }
    }

    #[test]
    fn pixel_mapping_round_trip() {
        let l = CameraLayout::from_config(&plenoptic2()).unwrap();
        let (x, y) = l.sensor.position(10.25, 599.5);
        let (px, py) = l.sensor.pixel_coords(x, y);
        assert!((px - 10.25).abs() < 1e-9 && (py - 599.5).abs() < 1e-9);
    }
}
