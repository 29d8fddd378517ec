//! The stop shape shows up in every microlens image of a plenoptic 1.0
//! camera. Renders white images for several blade counts and crops the
//! central microlens image of each.
//!
//! ```text
//! cargo run --release --example aperture_shapes [out_dir]
//! ```

use std::path::PathBuf;

use plenopsim::config::plenoptic1;
use plenopsim::io::{write_png, Raster};
use plenopsim::mla::LensIndex;
use plenopsim::optics::ApertureKind;
use plenopsim::renderer::{render_white_image, CameraLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or("example_output".into()));
    std::fs::create_dir_all(&out)?;

    let shapes = [
        ("circle", ApertureKind::Circle),
        (
            "hexagon",
            ApertureKind::Polygon {
                blades: 6,
                rotation: 0.0,
            },
        ),
        (
            "twelve",
            ApertureKind::Polygon {
                blades: 12,
                rotation: 0.0,
            },
        ),
        (
            "star",
            ApertureKind::Star {
                points: 5,
                inner_ratio: 0.5,
                rotation: 0.0,
            },
        ),
    ];
    for (name, kind) in shapes {
        let mut config = plenoptic1();
        config.aperture.shape = kind;
        config.sensor.width = 64;
        config.sensor.height = 64;
        config.sensor.spp = 64;
        let layout = CameraLayout::from_config(&config)?;
        let white = render_white_image(&layout)?;

        let center = LensIndex { i: 0, j: 0 };
        let mut crop = Raster {
            width: 64,
            height: 64,
            pixels: vec![[0.0; 3]; 64 * 64],
        };
        let (mut lit, mut peak) = (0, 0.0f64);
        for row in 0..64 {
            for col in 0..64 {
                if layout.lens_at_pixel(col, row) == Some(center) {
                    peak = peak.max(white.value(col, row));
                }
            }
        }
        for row in 0..64 {
            for col in 0..64 {
                if layout.lens_at_pixel(col, row) != Some(center) {
                    continue;
                }
                crop.pixels[row * 64 + col] = white.get(col, row);
                lit += usize::from(white.value(col, row) > 0.5 * peak);
            }
        }
        let stop = layout.lens.stop_shape;
        let pixel_area = layout.sensor.pixel_pitch.powi(2);
        let b = layout.sensor.plane_z - layout.mla.front_z();
        let scale = b * layout.exit_pupil.magnification / layout.pupil_distance();
        let predicted = stop.area() * scale * scale / pixel_area;
        println!(
            "{name:<8} lit {lit:>5} px, stop projected through the microlens {predicted:>7.1} px"
        );
        write_png(out.join(format!("aperture_{name}.png")), &crop, 1.0 / peak)?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
