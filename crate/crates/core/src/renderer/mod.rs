//! Backward Monte Carlo rendering from sensor pixels through the microlens
//! array and the objective into the scene.

mod image;
mod layout;

pub use image::PlenopticImage;
pub use layout::{CameraLayout, SensorConfig};

use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::CaptureInfo;
use crate::error::{Error, Result};
use crate::geom::{sample_disk, RandomStream, Ray, Rgb, Vec3};
use crate::mla::MlaBlocked;
use crate::optics::{trace_through_lens, Blocked, TraceDirection};
use crate::scene::{radiance, white_plane_scene, Scene, MAX_DEPTH};

pub const TILE: usize = 32;

/// White images are rendered with at least this many samples per pixel.
pub const WHITE_MIN_SPP: u32 = 64;

/// Why a sample contributed nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockReason {
    OutOfGrid,
    DeadZone,
    Mask,
    MlaTir,
    Lens(Blocked),
}

/// Per-reason sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BlockStats {
    pub samples: u64,
    pub out_of_grid: u64,
    pub dead_zone: u64,
    pub mask: u64,
    pub mla_tir: u64,
    pub missed_surface: u64,
    pub stop: u64,
    pub exit_aperture: u64,
    pub lens_tir: u64,
}

impl BlockStats {
    pub fn record(&mut self, r: BlockReason) {
        match r {
            BlockReason::OutOfGrid => self.out_of_grid += 1,
            BlockReason::DeadZone => self.dead_zone += 1,
            BlockReason::Mask => self.mask += 1,
            BlockReason::MlaTir => self.mla_tir += 1,
            BlockReason::Lens(Blocked::MissedSurface(_)) => self.missed_surface += 1,
            BlockReason::Lens(Blocked::Stop) => self.stop += 1,
            BlockReason::Lens(Blocked::ExitAperture) => self.exit_aperture += 1,
            BlockReason::Lens(Blocked::Tir(_)) => self.lens_tir += 1,
        }
    }

    pub fn merge(&mut self, o: &BlockStats) {
        self.samples += o.samples;
        self.out_of_grid += o.out_of_grid;
        self.dead_zone += o.dead_zone;
        self.mask += o.mask;
        self.mla_tir += o.mla_tir;
        self.missed_surface += o.missed_surface;
        self.stop += o.stop;
        self.exit_aperture += o.exit_aperture;
        self.lens_tir += o.lens_tir;
    }

    pub fn blocked(&self) -> u64 {
        self.out_of_grid
            + self.dead_zone
            + self.mask
            + self.mla_tir
            + self.missed_surface
            + self.stop
            + self.exit_aperture
            + self.lens_tir
    }

    pub fn report(&self) -> String {
        let pct = |n: u64| 100.0 * n as f64 / self.samples.max(1) as f64;
        format!(
            "samples {}  blocked {:.1}%  (out-of-grid {:.1}%, dead-zone {:.1}%, mask {:.1}%, mla-tir {:.1}%, \
             missed-surface {:.1}%, stop {:.1}%, exit-aperture {:.1}%, lens-tir {:.1}%)",
            self.samples,
            pct(self.blocked()),
            pct(self.out_of_grid),
            pct(self.dead_zone),
            pct(self.mask),
            pct(self.mla_tir),
            pct(self.missed_surface),
            pct(self.stop),
            pct(self.exit_aperture),
            pct(self.lens_tir)
        )
    }
}

/// One sample for pixel `(col, row)`.
///
/// The sample point is jittered over the pixel, its microlens is the one hit
/// by the line from the sensor point toward the exit-pupil center, a point
/// is drawn uniformly on that lens's back aperture, and the resulting ray is
/// carried backward through the MLA and the objective into the scene.
/// The returned radiance is weighted by cos^4 of the sensor ray, which is
/// the exact area-sampling estimator of pixel irradiance normalized to 1
/// for a unit-radiance source seen head on.
pub fn trace_sample(
    layout: &CameraLayout,
    scene: &Scene,
    col: usize,
    row: usize,
    rand: &mut RandomStream,
) -> std::result::Result<Rgb, BlockReason> {
    let (jx, jy) = rand.next_2d();
    let (sx, sy) = layout.sensor.position(col as f64 + jx, row as f64 + jy);
    let (mx, my) = layout.sensor_to_mla(sx, sy);
    let (_, center) = layout
        .mla
        .grid
        .lens_index_at(mx, my)
        .map_err(|_| BlockReason::OutOfGrid)?;
    let (dx, dy) = sample_disk(rand, layout.mla.spec.semi_diameter());
    let target = Vec3::new(center.0 + dx, center.1 + dy, layout.mla.back_z());
    let sensor_point = Vec3::new(sx, sy, layout.sensor.plane_z);
    let ray = Ray::new(sensor_point, target - sensor_point);
    let cos = -ray.direction.z;

    let through_mla = layout
        .mla
        .refract_backward(&ray, center)
        .map_err(|b| match b {
            MlaBlocked::OutOfGrid => BlockReason::OutOfGrid,
            MlaBlocked::DeadZone => BlockReason::DeadZone,
            MlaBlocked::Mask => BlockReason::Mask,
            MlaBlocked::Tir => BlockReason::MlaTir,
        })?;
    let into_scene = trace_through_lens(&through_mla, &layout.lens, TraceDirection::SensorToScene)
        .map_err(BlockReason::Lens)?;
    let l = radiance(&into_scene, scene, rand, MAX_DEPTH);
    Ok(l.scale(cos * cos * cos * cos))
}

/// Mean of `spp` samples for one pixel. Sample `k` uses the random stream
/// `(seed, pixel index, k)`.
pub fn sample_pixel(
    layout: &CameraLayout,
    scene: &Scene,
    col: usize,
    row: usize,
    spp: u32,
    stats: &mut BlockStats,
) -> Rgb {
    let stream = (row * layout.sensor.width + col) as u64;
    let mut sum = Rgb::BLACK;
    for k in 0..spp {
        let mut rand = RandomStream::new(layout.sensor.seed, stream, k as u64);
        stats.samples += 1;
        match trace_sample(layout, scene, col, row, &mut rand) {
            Ok(l) => sum += l,
            Err(reason) => stats.record(reason),
        }
    }
    sum.scale(1.0 / spp as f64)
}

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Recorded in the capture metadata.
    pub scene_label: String,
    /// Overrides the sensor's samples per pixel.
    pub spp: Option<u32>,
}

pub fn render(layout: &CameraLayout, scene: &Scene) -> Result<PlenopticImage> {
    render_with(layout, scene, &RenderOptions::default())
}

/// Renders every pixel in 32x32 tiles. The raster depends only on the
/// layout, the scene and the seed, not on the thread count or schedule.
pub fn render_with(
    layout: &CameraLayout,
    scene: &Scene,
    opts: &RenderOptions,
) -> Result<PlenopticImage> {
    scene.validate()?;
    let (w, h) = (layout.sensor.width, layout.sensor.height);
    let spp = opts.spp.unwrap_or(layout.sensor.spp);
    if spp == 0 {
        return Err(Error::config("sensor.spp", "must be at least 1"));
    }
    let tiles: Vec<(usize, usize)> = (0..h.div_ceil(TILE))
        .flat_map(|ty| (0..w.div_ceil(TILE)).map(move |tx| (tx * TILE, ty * TILE)))
        .collect();
    let run = |&(x0, y0): &(usize, usize)| {
        let mut stats = BlockStats::default();
        let mut px = Vec::with_capacity(TILE * TILE);
        for row in y0..(y0 + TILE).min(h) {
            for col in x0..(x0 + TILE).min(w) {
                px.push(sample_pixel(layout, scene, col, row, spp, &mut stats));
            }
        }
        (px, stats)
    };
    let results: Vec<(Vec<Rgb>, BlockStats)> = match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))?;
            pool.install(|| tiles.par_iter().map(run).collect())
        }
        None => tiles.par_iter().map(run).collect(),
    };

    let mut pixels = vec![[0f32; 3]; w * h];
    let mut stats = BlockStats::default();
    for (&(x0, y0), (px, s)) in tiles.iter().zip(&results) {
        stats.merge(s);
        let tw = (x0 + TILE).min(w) - x0;
        for (k, v) in px.iter().enumerate() {
            let (col, row) = (x0 + k % tw, y0 + k / tw);
            pixels[row * w + col] = v.0.map(|c| c as f32);
        }
    }
    let mut metadata = layout.config.self_contained()?;
    metadata.sensor.spp = spp;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    metadata.capture = Some(CaptureInfo {
        timestamp,
        scene: opts.scene_label.clone(),
        spp,
        seed: layout.sensor.seed,
        stats,
    });
    Ok(PlenopticImage {
        width: w,
        height: h,
        pixels,
        valid: None,
        metadata,
    })
}

/// White image: a unit-radiance white lambertian plane filling the view,
/// rendered at no fewer than [`WHITE_MIN_SPP`] samples per pixel.
pub fn render_white_image(layout: &CameraLayout) -> Result<PlenopticImage> {
    render_white_image_with(layout, None)
}

pub fn render_white_image_with(
    layout: &CameraLayout,
    threads: Option<usize>,
) -> Result<PlenopticImage> {
    let opts = RenderOptions {
        threads,
        scene_label: "builtin:white_plane".into(),
        spp: Some(layout.sensor.spp.max(WHITE_MIN_SPP)),
    };
    render_with(layout, &white_plane_scene(-1000.0), &opts)
}
