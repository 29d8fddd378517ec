//! Plenoptic 1.0 against 2.0 on the same scene: a checkerboard placed where
//! the 2.0 microlenses focus. The 1.0 camera records one angular sample per
//! microlens image and the pattern is lost; the 2.0 camera keeps it.
//!
//! ```text
//! cargo run --release --example resolution_tradeoff [out_dir]
//! ```

use std::path::PathBuf;

use plenopsim::config::{plenoptic1, plenoptic2, CameraConfig};
use plenopsim::io::write_png;
use plenopsim::optics::object_for_image;
use plenopsim::renderer::{render, CameraLayout, PlenopticImage};
use plenopsim::scene::checkerboard_scene;

fn small(mut c: CameraConfig) -> CameraLayout {
    c.sensor.width = 240;
    c.sensor.height = 240;
    c.sensor.spp = 32;
    CameraLayout::from_config(&c).expect("preset is valid")
}

/// RMS of the 4-neighbor Laplacian inside microlens images.
fn contrast(img: &PlenopticImage, layout: &CameraLayout) -> f64 {
    let r = 0.7 * layout.microlens_image_radius_px();
    let (mut sum, mut n) = (0.0, 0);
    for row in 1..img.height - 1 {
        for col in 1..img.width - 1 {
            let Some(idx) = layout.lens_at_pixel(col, row) else {
                continue;
            };
            let (cx, cy) = layout.projected_center_px(idx);
            if (col as f64 + 0.5 - cx).hypot(row as f64 + 0.5 - cy) > r - 1.5 {
                continue;
            }
            let lap = 4.0 * img.value(col, row)
                - img.value(col - 1, row)
                - img.value(col + 1, row)
                - img.value(col, row - 1)
                - img.value(col, row + 1);
            sum += lap * lap;
            n += 1;
        }
    }
    (sum / n as f64).sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or("example_output".into()));
    std::fs::create_dir_all(&out)?;

    let (l1, l2) = (small(plenoptic1()), small(plenoptic2()));
    let focus = l2.microlens_focus_z();
    let z = object_for_image(&l2.lens, focus).ok_or("no conjugate")?;
    println!(
        "2.0 microlenses focus {:.3} mm behind the array (z = {focus:.2}); object plane z = {z:.1} mm",
        -l2.microlens_object_distance()
    );
    let scene = checkerboard_scene(z, 1.0);
    for (name, layout) in [("plenoptic1", &l1), ("plenoptic2", &l2)] {
        let img = render(layout, &scene)?;
        println!("{name}: Laplacian RMS {:.4}", contrast(&img, layout));
        write_png(out.join(format!("{name}_checker.png")), &img.raster(), 1.0)?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
