//! The `plenopsim` command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::CameraConfig;
use crate::error::{Error, Result};
use crate::io::{write_pfm, write_png, Raster};
use crate::lfpost::{
    calibrate_centers, devignette, extract_subaperture, ncc_disparity, CalibrationGrid,
    DEFAULT_FLOOR,
};
use crate::optics::{
    analyze_paraxial, entrance_pupil, exit_pupil, image_of, measure_radial_distortion,
    paraxial_image_plane, traced_focus, GridTarget, LensPrescription,
};
use crate::renderer::{
    render_white_image_with, render_with, CameraLayout, PlenopticImage, RenderOptions,
};
use crate::scene::load_scene;

#[derive(Debug, Parser)]
#[command(name = "plenopsim", version, about = "Plenoptic camera simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene through the camera; writes PFM plus a JSON sidecar.
    Render {
        #[command(flatten)]
        camera: CameraArgs,
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Render the uniform white plane and calibrate microlens centers.
    Whiteimage {
        #[command(flatten)]
        camera: CameraArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Calibrate, devignette and extract one sub-aperture view.
    Subaperture {
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        white: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Paraxial summary, traced focus check and radial distortion of a lens file.
    AnalyzeLens { lens: PathBuf },
}

#[derive(Debug, Args)]
pub struct CameraArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub spp: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "PLENOPSIM_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output PFM path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional sRGB PNG preview.
    #[arg(long)]
    pub png: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub exposure: f64,
}

/// Validation problems exit with 2, everything else with 1.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Calibration(_) | Error::Fit(_) | Error::Png(_) => 1,
        _ => 2,
    }
}

pub fn main() -> ExitCode {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Render { camera, scene, out } => cmd_render(&camera, &scene, &out),
        Command::Whiteimage { camera, out } => cmd_whiteimage(&camera, &out),
        Command::Subaperture {
            raw,
            white,
            u,
            v,
            out,
        } => cmd_subaperture(&raw, &white, u, v, &out),
        Command::AnalyzeLens { lens } => cmd_analyze_lens(&lens),
    }
}

fn load_layout(args: &CameraArgs) -> Result<CameraLayout> {
    let mut config = CameraConfig::load(&args.config)?;
    if let Some(spp) = args.spp {
        config.sensor.spp = spp;
    }
    if let Some(seed) = args.seed {
        config.sensor.seed = seed;
    }
    if args.threads == Some(0) {
        return Err(Error::config("threads", "must be at least 1"));
    }
    let layout = CameraLayout::from_config(&config)?;
    for w in layout.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(layout)
}

fn write_outputs(img: &PlenopticImage, out: &OutArgs) -> Result<()> {
    img.save(&out.out)?;
    if let Some(png) = &out.png {
        write_png(png, &img.raster(), out.exposure)?;
    }
    println!("wrote {}", out.out.display());
    if let Some(c) = &img.metadata.capture {
        println!("{}", c.stats.report());
    }
    Ok(())
}

pub fn cmd_render(camera: &CameraArgs, scene_path: &Path, out: &OutArgs) -> Result<()> {
    let layout = load_layout(camera)?;
    let scene = load_scene(scene_path)?;
    let opts = RenderOptions {
        threads: camera.threads,
        scene_label: scene_path.display().to_string(),
        spp: None,
    };
    write_outputs(&render_with(&layout, &scene, &opts)?, out)
}

/// `white.pfm` -> `white.calibration.json`.
pub fn calibration_path(white: &Path) -> PathBuf {
    white.with_extension("calibration.json")
}

pub fn cmd_whiteimage(camera: &CameraArgs, out: &OutArgs) -> Result<()> {
    let layout = load_layout(camera)?;
    let img = render_white_image_with(&layout, camera.threads)?;
    write_outputs(&img, out)?;
    let cal = calibrate_centers(&img)?;
    let path = calibration_path(&out.out);
    std::fs::write(&path, cal.to_json()).map_err(|e| Error::io(&path, e))?;
    println!(
        "calibration: {} lenses, image radius {:.2} px -> {}",
        cal.centers.len(),
        cal.radius_px,
        path.display()
    );
    Ok(())
}

fn calibration_for(white: &PlenopticImage, white_path: &Path) -> Result<CalibrationGrid> {
    let path = calibration_path(white_path);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(cal) = CalibrationGrid::from_json(&text) {
            return Ok(cal);
        }
    }
    let cal = calibrate_centers(white)?;
    std::fs::write(&path, cal.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(cal)
}

pub fn cmd_subaperture(
    raw_path: &Path,
    white_path: &Path,
    u: f64,
    v: f64,
    out: &OutArgs,
) -> Result<()> {
    let raw = PlenopticImage::load(raw_path)?;
    let white = PlenopticImage::load(white_path)?;
    raw.check_compatible(&white)?;
    let cal = calibration_for(&white, white_path)?;
    let flat = devignette(&raw, &white, DEFAULT_FLOOR)?;
    let view = extract_subaperture(&flat, &cal, u, v)?;
    let raster = Raster {
        width: view.width,
        height: view.height,
        pixels: view.pixels.clone(),
    };
    write_pfm(&out.out, &raster)?;
    if let Some(png) = &out.png {
        write_png(png, &raster, out.exposure)?;
    }
    let valid = view.valid.iter().filter(|v| **v).count();
    println!(
        "wrote {} ({}x{}, {valid} valid)",
        out.out.display(),
        view.width,
        view.height
    );

    if u != 0.0 {
        let mirror = extract_subaperture(&flat, &cal, -u, v)?;
        let (w, h) = (view.width, view.height);
        let max_shift = (w / 4).max(1) as i64;
        println!(
            "disparity of view ({u}, {v}) relative to ({}, {v}), in lenses:",
            -u
        );
        for (name, cols) in [
            ("left", 0..w / 3),
            ("center", w / 3..2 * w / 3),
            ("right", 2 * w / 3..w),
            ("all", 0..w),
        ] {
            match ncc_disparity(&mirror, &view, cols, 0..h, max_shift) {
                Some(d) => println!("  {name:>6}: {:+.2} (ncc {:.3})", d.shift, d.peak),
                None => println!("  {name:>6}: n/a"),
            }
        }
    }
    Ok(())
}

pub fn cmd_analyze_lens(path: &Path) -> Result<()> {
    let lens = LensPrescription::load(path)?;
    print!("{}", lens_report(&lens));
    Ok(())
}

/// Paraxial summary, traced-focus check, conjugates and a distortion fit.
pub fn lens_report(lens: &LensPrescription) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let p = match analyze_paraxial(lens) {
        Ok(p) => p,
        Err(a) => {
            return format!(
                "afocal system, angular magnification {:.6}\n",
                a.angular_magnification
            )
        }
    };
    let (ep, xp) = (entrance_pupil(lens), exit_pupil(lens));
    let _ = writeln!(s, "surfaces            {}", lens.surfaces.len());
    let _ = writeln!(
        s,
        "vertices            {:.3} .. {:.3} mm",
        lens.front_z(),
        lens.rear_z()
    );
    let _ = writeln!(s, "EFL                 {:.4} mm", p.efl);
    let _ = writeln!(s, "BFD                 {:.4} mm", p.back_focal_distance);
    let _ = writeln!(
        s,
        "principal planes    {:.4} / {:.4} mm",
        p.front_principal_z, p.rear_principal_z
    );
    let _ = writeln!(
        s,
        "focal points        {:.4} / {:.4} mm",
        p.front_focal_z, p.rear_focal_z
    );
    let _ = writeln!(
        s,
        "entrance pupil      z {:.3} mm, m {:.4}",
        ep.z, ep.magnification
    );
    let _ = writeln!(
        s,
        "exit pupil          z {:.3} mm, m {:.4}",
        xp.z, xp.magnification
    );
    let stop = lens.stop_shape.radius;
    let _ = writeln!(
        s,
        "stop radius         {stop:.3} mm (f/{:.2})",
        p.efl / (2.0 * stop * ep.magnification.abs())
    );

    let h = p.efl.abs() / 1000.0;
    match traced_focus(lens, h) {
        Some(t) => {
            let _ = writeln!(
                s,
                "traced focus        EFL {:.4} mm ({:+.4}%), BFD {:.4} mm",
                t.efl,
                100.0 * (t.efl / p.efl - 1.0),
                t.back_focal_distance
            );
        }
        None => {
            let _ = writeln!(s, "traced focus        ray blocked");
        }
    }

    let _ = writeln!(
        s,
        "conjugates (object distance from front vertex -> image z)"
    );
    for k in [2.0, 5.0, 10.0, 50.0] {
        let d = k * p.efl.abs();
        match image_of(lens, lens.front_z() - d) {
            Some((z, m)) => {
                let _ = writeln!(s, "  {d:>10.1} mm -> {z:.3} mm (m {m:.4})");
            }
            None => {
                let _ = writeln!(s, "  {d:>10.1} mm -> infinity");
            }
        }
    }

    let distance = 10.0 * p.efl.abs();
    let target = GridTarget {
        distance,
        half_extent: 0.15 * distance,
        points_per_side: 9,
    };
    let fit = paraxial_image_plane(lens, distance)
        .ok_or_else(|| Error::Fit("no real image".into()))
        .and_then(|z| measure_radial_distortion(lens, &target, z));
    match fit {
        Ok(f) => {
            let _ = writeln!(
                s,
                "radial distortion   object grid at {distance:.0} mm, {} points",
                f.points_used
            );
            let _ = writeln!(s, "  k1 {:+.4e} +/- {:.1e} mm^-2", f.k1, f.k1_std_err);
            let _ = writeln!(s, "  k2 {:+.4e} +/- {:.1e} mm^-4", f.k2, f.k2_std_err);
            let _ = writeln!(
                s,
                "  max displacement {:.4} mm ({:.3}% of {:.2} mm half-diagonal)",
                f.max_displacement,
                100.0 * f.max_displacement / f.half_diagonal,
                f.half_diagonal
            );
        }
        Err(e) => {
            let _ = writeln!(s, "radial distortion   {e}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::double_gauss_100;

    #[test]
    fn report_mentions_focal_length() {
        let r = lens_report(&double_gauss_100());
        assert!(r.contains("EFL                 100.7"), "{r}");
        assert!(r.contains("k1"), "{r}");
    }

    #[test]
    fn thin_lens_report() {
        let lens = LensPrescription::parse(crate::config::THIN_LENS_2MM).unwrap();
        let r = lens_report(&lens);
        assert!(r.contains("EFL                 2.00"), "{r}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::config("x", "y")), 2);
        assert_eq!(exit_code(&Error::OutOfRange("x".into())), 2);
        assert_eq!(
            exit_code(&Error::LensParse {
                line: 1,
                message: "x".into()
            }),
            2
        );
        assert_eq!(exit_code(&Error::Calibration("x".into())), 1);
    }

    #[test]
    fn parses_verbs() {
        let c = Cli::try_parse_from([
            "plenopsim",
            "subaperture",
            "--raw",
            "a",
            "--white",
            "b",
            "--u",
            "-5",
            "--v",
            "0",
            "--out",
            "o",
        ]);
        assert!(matches!(c.unwrap().command, Command::Subaperture { u, .. } if u == -5.0));
        assert!(Cli::try_parse_from(["plenopsim", "render", "--config", "c"]).is_err());
    }
}
