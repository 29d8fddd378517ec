//! Paraxial and traced analysis of an objective prescription.
//!
//! ```text
//! cargo run --release --example analyze_lens [path/to/lens.lens]
//! ```
//!
//! Without an argument the built-in 100 mm double-Gauss is analyzed.

use plenopsim::cli::lens_report;
use plenopsim::optics::{double_gauss_100, LensPrescription};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lens = match std::env::args().nth(1) {
        Some(path) => LensPrescription::load(&path)?,
        None => double_gauss_100(),
    };
    print!("{}", lens_report(&lens));
    Ok(())
}
