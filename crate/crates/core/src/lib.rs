//! Physically based plenoptic camera simulator.
//!
//! Rays leave the sensor, cross a microlens array, get traced surface by
//! surface through a real objective prescription and finally hit a scene.
//! Vignetting, aperture shape and distortion come out of the trace rather
//! than being modeled separately.
//!
//! Units are millimeters. The optical axis is z, pointing from the scene
//! toward the sensor, and the objective's front vertex sits at z = 0.
//!
//! Modules, roughly in pipeline order:
//!
//! - [`geom`]: vectors, rays, RGB and the counter-based random stream.
//! - [`optics`]: lens prescriptions, refraction, sequential tracing, stops,
//!   paraxial analysis and the distortion fit.
//! - [`mla`]: rectangular and hexagonal microlens arrays.
//! - [`scene`]: shapes, materials, lights, scene files and the pinhole
//!   ground-truth camera.
//! - [`config`] and [`renderer`]: camera layouts (plenoptic 1.0 and 2.0) and
//!   the backward Monte Carlo renderer.
//! - [`lfpost`]: microlens-center calibration, white-image division,
//!   sub-aperture views and disparity.
//! - [`io`]: PFM/PNG output with JSON sidecars.
//! - [`cli`]: the `plenopsim` binary.
//!
//! Runnable examples (`cargo run --release --example <name>`):
//!
//! | example | shows |
//! |---|---|
//! | `analyze_lens` | paraxial data, traced focus, conjugates, distortion |
//! | `white_image` | white image and microlens-center calibration |
//! | `aperture_shapes` | blade and star stops imaged by a microlens |
//! | `vignetting` | falloff across the field at full aperture |
//! | `resolution_tradeoff` | plenoptic 1.0 against 2.0 on one checkerboard |
//! | `subaperture_views` | views from a two-depth scene and their disparity |
//! | `pinhole_ground_truth` | color, depth and range maps for a scene file |
//!
//! ```no_run
//! use plenopsim::config::plenoptic2;
//! use plenopsim::renderer::{render, CameraLayout};
//! use plenopsim::scene::checkerboard_scene;
//!
//! let layout = CameraLayout::from_config(&plenoptic2()).unwrap();
//! let raw = render(&layout, &checkerboard_scene(-400.0, 1.0)).unwrap();
//! raw.save("raw.pfm").unwrap();
//! ```

// `!(x > 0.0)` is used on purpose in validation so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod geom;
pub mod io;
pub mod lfpost;
pub mod mla;
pub mod optics;
pub mod renderer;
pub mod scene;
