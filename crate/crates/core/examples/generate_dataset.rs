//! Draw a model realization and dataset, write it as CSV and read it back.
//!
//! Usage: cargo run --example generate_dataset -- [out.csv]

use tracecause::prelude::*;

fn main() -> Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "example_data.csv".into());
    let spec = CausalModelSpec::standard(40, 40, 100, 0.03);
    let data = generate(&Rng::new(1), &spec)?;
    let real = data
        .provenance
        .clone()
        .expect("generated data keeps its model");

    println!(
        "X: {}x{}, Y: {}x{}",
        data.x.nrows(),
        data.x.ncols(),
        data.y.nrows(),
        data.y.ncols()
    );
    println!("spectrum head: {:?}", &real.eigenvalues[..4]);
    println!("realization hash: {}", real.hash_hex());

    data.write_csv(std::fs::File::create(&out)?)?;
    let back = SampleSet::read_csv(std::fs::File::open(&out)?)?;
    println!(
        "wrote {out}; round trip exact: {}",
        back.x == data.x && back.y == data.y
    );
    Ok(())
}
