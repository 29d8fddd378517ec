//! Renders a white image with the plenoptic 1.0 preset, calibrates the
//! microlens centers from it and writes PFM, PNG and calibration JSON.
//!
//! ```text
//! cargo run --release --example white_image [out_dir]
//! ```

use std::path::PathBuf;

use plenopsim::config::plenoptic1;
use plenopsim::io::write_png;
use plenopsim::lfpost::{calibrate_centers, CenterSource};
use plenopsim::renderer::{render_white_image, CameraLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or("example_output".into()));
    std::fs::create_dir_all(&out)?;

    let mut config = plenoptic1();
    config.sensor.width = 400;
    config.sensor.height = 400;
    config.sensor.spp = 32;
    let layout = CameraLayout::from_config(&config)?;
    for w in layout.warnings() {
        eprintln!("warning: {w}");
    }

    let white = render_white_image(&layout)?;
    white.save(out.join("white.pfm"))?;
    write_png(out.join("white.png"), &white.raster(), 1.0)?;

    let cal = calibrate_centers(&white)?;
    std::fs::write(out.join("white.calibration.json"), cal.to_json())?;
    let measured = cal
        .centers
        .iter()
        .filter(|c| c.source == CenterSource::Centroid)
        .count();
    println!(
        "{} lenses on the sensor, {measured} centroided, pitch {:.2} px, image radius {:.2} px",
        cal.centers.len(),
        cal.pitch_px,
        cal.radius_px
    );
    let worst = cal
        .centers
        .iter()
        .filter(|c| c.source == CenterSource::Centroid)
        .map(|c| {
            let (x, y) = layout.projected_center_px(plenopsim::mla::LensIndex { i: c.i, j: c.j });
            (c.x - x).hypot(c.y - y)
        })
        .fold(0.0, f64::max);
    println!("largest centroid offset from the geometric projection: {worst:.3} px");
    println!("wrote {}", out.display());
    Ok(())
}
