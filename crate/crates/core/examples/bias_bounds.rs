//! Ridge bias under random λ ≤ λ′ against the asymptotic intervals.

use tracecause::prelude::*;

fn main() -> Result<()> {
    let n = 100;
    let a_variance = 1.0 / n as f64;
    for sigma in [0.0, 0.1] {
        let spec = CausalModelSpec {
            spectrum: SpectrumSpec::power_law(n, 1.0),
            structural_law: StructuralLaw::GaussianIid {
                variance: a_variance,
            },
            ..CausalModelSpec::standard(n, n, 200, sigma)
        };
        // Noise power m·σ² at σ = 0.1, E‖A‖² = m·n·variance.
        let lp = select_lambda_prime(n as f64 * 0.01, 2.0, (n * n) as f64 * a_variance)?;
        let r = verify_bias_bounds(&Rng::new(1), &spec, lp, 2.0, 200)?;
        println!("σ = {sigma}, λ′ = {lp}, p_n = {:.4}", r.p_n);
        for (name, b) in [
            ("‖Â‖² - ‖A‖²", &r.frobenius),
            ("tr(ÂCÂᵀ) - tr(AΣAᵀ)", &r.numerator),
        ] {
            println!(
                "  {name:22} {:+.4} ± {:.4} in [{:+.4}, {:+.4}]: {}",
                b.mean, b.std_err, b.lower, b.upper, b.contained
            );
        }
        println!(
            "  plug-in bound {:.3}: {}",
            r.plug_in_bound, r.within_plug_in_bound
        );
    }
    Ok(())
}
