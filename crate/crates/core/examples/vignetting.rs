//! Vignetting that emerges from the traced objective: a wide-field plenoptic
//! 1.0 camera at full aperture. Off-axis microlens images lose brightness and
//! area as the rays are clipped by lens rims.
//!
//! ```text
//! cargo run --release --example vignetting [out_dir]
//! ```

use std::path::PathBuf;

use plenopsim::config::plenoptic1;
use plenopsim::io::write_png;
use plenopsim::renderer::{render_white_image, CameraLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or("example_output".into()));
    std::fs::create_dir_all(&out)?;

    let mut c = plenoptic1();
    c.aperture.f_number = None;
    c.mla.pitch = 3.3;
    c.mla.diameter = 3.3;
    c.mla.focal_length = 8.0;
    c.layout.sensor_gap = Some(8.0);
    c.mla.nx = 17;
    c.mla.ny = 17;
    c.sensor.width = 300;
    c.sensor.height = 300;
    c.sensor.pixel_pitch = 0.165;
    c.sensor.spp = 32;
    let layout = CameraLayout::from_config(&c)?;
    let white = render_white_image(&layout)?;
    write_png(out.join("vignetting_white.png"), &white.raster(), 1.0)?;

    // Mean signal per microlens along the +x row.
    println!("lens  field (mm)  mean      lit px");
    let mut peak = None;
    for i in 0..=7 {
        let idx = plenopsim::mla::LensIndex { i, j: 0 };
        let (mut sum, mut n, mut lit) = (0.0, 0, 0);
        let mut vals = Vec::new();
        for row in 0..white.height {
            for col in 0..white.width {
                if layout.lens_at_pixel(col, row) == Some(idx) {
                    let v = white.value(col, row);
                    vals.push(v);
                    sum += v;
                    n += 1;
                }
            }
        }
        let center_max = *peak.get_or_insert_with(|| vals.iter().copied().fold(0.0, f64::max));
        lit += vals.iter().filter(|v| **v > 0.5 * center_max).count();
        println!(
            "{i:>4}  {:>10.1}  {:.5}  {lit:>6}",
            i as f64 * 3.3,
            sum / n.max(1) as f64
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
