//! The ridge fixed point p_n, the λ′ rule and the asymptotic bias intervals.

use nalgebra::DMatrix;
use tracecause::prelude::*;
use tracecause::theory::plug_in_bias_bound;

fn main() -> Result<()> {
    let identity = vec![1.0; 50];
    println!(
        "identity, c = 1, λ′ = 1: p_n = {:.10}",
        pn_fixed_point(&identity, 1.0, 1.0, 1e-14)?
    );

    let n = 100;
    let spectrum = SpectrumSpec::power_law(n, 1.0).eigenvalues()?;
    for lp in [1e-4, 1e-2, 1.0, 100.0] {
        println!(
            "power law, c = 2, λ′ = {lp:>6}: p_n = {:.6}",
            pn_fixed_point(&spectrum, 2.0, lp, 1e-14)?
        );
    }

    let (c, noise_power, a_frob_sq) = (2.0, 1.0, 100.0);
    let lp = select_lambda_prime(noise_power, c, a_frob_sq)?;
    let i31 = lemma31_interval(lp, c, noise_power, a_frob_sq, &spectrum, n)?;
    println!(
        "λ′ rule → {lp}; ‖Â‖² - ‖A‖² ∈ [{:.3}, {:.3}]",
        i31.lower, i31.upper
    );
    println!(
        "plug-in bound ±{:.3}",
        plug_in_bias_bound(a_frob_sq, c, i31.inputs.p_n)
    );

    let a = DMatrix::identity(n, n) * 0.1;
    let i32 = lemma32_interval(lp, c, noise_power, &a, &spectrum, n)?;
    println!("tr(ÂCÂᵀ) - tr(AΣAᵀ) ∈ [{:.4}, {:.4}]", i32.lower, i32.upper);
    Ok(())
}
