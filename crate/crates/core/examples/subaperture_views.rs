//! Sub-aperture views from a plenoptic 1.0 capture of two textured planes at
//! different depths, plus the horizontal disparity between opposite views.
//!
//! ```text
//! cargo run --release --example subaperture_views [out_dir]
//! ```

use std::path::PathBuf;

use plenopsim::config::plenoptic1;
use plenopsim::geom::{RandomStream, Rgb, Vec3};
use plenopsim::io::{write_png, Raster};
use plenopsim::lfpost::{
    calibrate_centers, devignette, extract_subaperture, ncc_disparity, SubApertureImage,
    DEFAULT_FLOOR,
};
use plenopsim::renderer::{render, render_white_image, CameraLayout};
use plenopsim::scene::{ImageTexture, Light, Material, Scene, Shape, Texture};

const LENSES: usize = 32;
const CELL_PX: usize = 16;

fn layout(seed: u64, spp: u32) -> CameraLayout {
    let mut c = plenoptic1();
    c.mla.pitch = CELL_PX as f64 * c.sensor.pixel_pitch;
    c.mla.diameter = c.mla.pitch;
    c.mla.focal_length = 0.8;
    c.layout.sensor_gap = Some(0.8);
    c.mla.nx = LENSES;
    c.mla.ny = LENSES;
    c.sensor.width = LENSES * CELL_PX;
    c.sensor.height = LENSES * CELL_PX;
    c.sensor.spp = spp;
    c.sensor.seed = seed;
    CameraLayout::from_config(&c).expect("valid layout")
}

fn textured_plane(scene: &mut Scene, z: f64, center_x: f64, half: [f64; 2], seed: u64) {
    let mut rand = RandomStream::new(seed, 0, 0);
    let tex = ImageTexture::from_fn(256, 256, [256.0; 2], |_, _| {
        Rgb::gray(0.1 + 0.8 * rand.next_f64())
    });
    let m = scene.add_material(Material::textured(Texture::Image(tex)));
    scene.add(
        Shape::Plane {
            point: Vec3::new(center_x, 0.0, z),
            normal: Vec3::Z,
            extent: Some(half),
        },
        m,
    );
}

fn raster(view: &SubApertureImage) -> Raster {
    Raster {
        width: view.width,
        height: view.height,
        pixels: view.pixels.clone(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or("example_output".into()));
    std::fs::create_dir_all(&out)?;

    let white = render_white_image(&layout(1, 64))?;
    let cal = calibrate_centers(&white)?;

    let mut scene = Scene::new();
    textured_plane(&mut scene, -400.0, 60.0, [60.0, 120.0], 1);
    textured_plane(&mut scene, -500.0, 0.0, [200.0, 200.0], 2);
    scene.add_light(Light::Environment {
        radiance: Rgb::gray(1.0),
    });

    let raw = render(&layout(2, 16), &scene)?;
    let flat = devignette(&raw, &white, DEFAULT_FLOOR)?;
    write_png(out.join("lightfield_raw.png"), &raw.raster(), 1.0)?;

    for u in [-5.0, 0.0, 5.0] {
        let view = extract_subaperture(&flat, &cal, u, 0.0)?;
        write_png(out.join(format!("view_u{u:+}.png")), &raster(&view), 1.0)?;
    }
    let a = extract_subaperture(&flat, &cal, -5.0, 0.0)?;
    let b = extract_subaperture(&flat, &cal, 5.0, 0.0)?;
    let half = LENSES / 2;
    let rows = 4..LENSES - 4;
    for (name, cols) in [
        ("near (left)", 4..half - 4),
        ("far (right)", half + 4..LENSES - 4),
    ] {
        match ncc_disparity(&a, &b, cols, rows.clone(), 8) {
            Some(d) => println!(
                "{name:<12} disparity {:+.2} lenses (NCC {:.2})",
                d.shift, d.peak
            ),
            None => println!("{name:<12} disparity undetermined"),
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
