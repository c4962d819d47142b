//! Ridge accuracy across λ at δ = 0.03, with the mean scores per direction.

use tracecause::prelude::*;

fn main() -> Result<()> {
    let spec = CausalModelSpec::standard(40, 40, 100, 0.0);
    let grid: Vec<f64> = (0..=20)
        .map(|i| 10f64.powf(-8.0 + 0.5 * i as f64))
        .collect();
    let r = sweep_lambda(&Rng::new(0), &spec, 0.03, &grid, 0.05, 100)?;
    print!("{}", r.to_csv());
    Ok(())
}
