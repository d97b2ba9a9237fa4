//! Writes a synthetic two-color position record with known RMS values.
//!
//! `cargo run --example synthetic_fixture -- out.csv`

use std::fs::File;
use std::io::BufWriter;

use licsq::stability::{synthesize, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "synthetic.csv".into());
    let series = synthesize(&SyntheticSpec::default())?;
    series.write_csv(BufWriter::new(File::create(&path)?))?;
    eprintln!("wrote {path}: {} samples", series.len());
    Ok(())
}
