//! Pinhole ground truth for a scene file: color, z-depth and range maps from
//! the objective's center, as used to score depth estimates.
//!
//! ```text
//! cargo run --release --example pinhole_ground_truth [scene.json] [out_dir]
//! ```

use std::path::PathBuf;

use plenopsim::io::{write_pfm, write_png, Raster};
use plenopsim::optics::double_gauss_100;
use plenopsim::scene::{load_scene, render_pinhole_ground_truth, PinholeCamera};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scene_path = args
        .next()
        .unwrap_or(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/scenes/two_depth.json").into());
    let out = PathBuf::from(args.next().unwrap_or("example_output".into()));
    std::fs::create_dir_all(&out)?;

    let scene = load_scene(&scene_path)?;
    let camera = PinholeCamera::at_lens_center(&double_gauss_100(), 320, 240, 30.0);
    let gt = render_pinhole_ground_truth(&scene, &camera, 0);

    let color = Raster {
        width: gt.width,
        height: gt.height,
        pixels: gt.color.iter().map(|c| c.0.map(|x| x as f32)).collect(),
    };
    write_png(out.join("gt_color.png"), &color, 1.0)?;
    let finite: Vec<f64> = gt.depth.iter().copied().filter(|d| d.is_finite()).collect();
    let (near, far) = finite
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let depth = Raster {
        width: gt.width,
        height: gt.height,
        pixels: gt
            .depth
            .iter()
            .map(|&d| [if d.is_finite() { d as f32 } else { 0.0 }; 3])
            .collect(),
    };
    write_pfm(out.join("gt_depth.pfm"), &depth)?;
    let normalized = Raster {
        pixels: depth
            .pixels
            .iter()
            .map(|p| [((p[0] as f64 - near) / (far - near).max(1e-9)) as f32; 3])
            .collect(),
        ..depth.clone()
    };
    write_png(out.join("gt_depth.png"), &normalized, 1.0)?;
    println!(
        "pinhole at z = {:.2} mm; {} of {} pixels hit geometry, depth {near:.1} .. {far:.1} mm",
        camera.position.z,
        finite.len(),
        gt.depth.len()
    );
    println!("wrote {}", out.display());
    Ok(())
}
