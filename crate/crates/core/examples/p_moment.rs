//! Schatten-moment Delta scores: the Haar denominator is estimated by Monte
//! Carlo for p > 1 and is exact for p = 1.

use tracecause::prelude::*;

fn main() -> Result<()> {
    let spec = CausalModelSpec::standard(20, 20, 200, 0.0);
    let real = realize_model(&Rng::new(4), &spec)?;
    for p in 1..=3 {
        let fwd = delta_p_moment(&Rng::new(10), &real.a, &real.sigma, p, 2000)?;
        let denom = mc_expected_p_trace(&Rng::new(10), &real.a, &real.sigma, p, 2000)?;
        println!(
            "p = {p}: Δ = {:+.4}, E τ((AUCUᵀAᵀ)^p) = {:.4e} ± {:.1e}",
            fwd.value, denom.mean, denom.std_err
        );
    }
    Ok(())
}
