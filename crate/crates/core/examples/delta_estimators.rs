//! Population, rank-corrected empirical and ridge Delta scores, both directions.

use tracecause::prelude::*;

fn main() -> Result<()> {
    let spec = CausalModelSpec::standard(40, 40, 100, 0.03);
    let data = generate(&Rng::new(3), &spec)?;
    let real = data.provenance.clone().unwrap();

    let pop = delta_population(&real.a, &real.sigma)?;
    println!("population   X→Y {:+.4}", pop.value);

    let cov = empirical_covariances(&data, false)?;
    for (label, c) in [("X→Y", cov.clone()), ("Y→X", cov.reversed())] {
        let emp = delta_empirical(&c, &fit_pseudo_inverse(&c, None)?)?;
        let ridge = delta_ridge(&c, &fit_ridge_from(&c, 1e-2)?)?;
        let rank = match emp.variant {
            Variant::Empirical { rank } => rank,
            _ => unreachable!(),
        };
        println!(
            "{label}: empirical {:+.4} (rank {rank}), ridge(1e-2) {:+.4}",
            emp.value, ridge.value
        );
    }
    Ok(())
}
