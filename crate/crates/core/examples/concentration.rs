//! Concentration of τ_m(AUCUᵀAᵀ) under Haar U: the mean identity, the
//! 1/√n shrinkage of the spread, and the spectral versus operator bounds.

use nalgebra::{DMatrix, DVector};
use tracecause::prelude::*;
use tracecause::theory::thm1_bound;

fn main() -> Result<()> {
    let rng = Rng::new(9);
    let a = rng.child(0).generator().normal_matrix(16, 32) / 32f64.sqrt();
    let c = DMatrix::from_diagonal(&DVector::from_fn(32, |i, _| 1.0 / (i + 1) as f64));
    let r = verify_concentration(&rng, &a, &c, 1, 3000, 0)?;
    println!(
        "mean {:.5} vs closed form {:.5} (z = {:.2}); q95 |dev| = {:.4}",
        r.sample_mean,
        r.reference,
        r.mean_z_score,
        r.deviations.quantile(0.95).unwrap()
    );
    for (eps, b) in &r.bound_curve {
        println!(
            "  ε = {eps:<4}: spectral {b:.4}, operator {:.4}",
            thm1_bound(&a, &c, *eps)?
        );
    }

    println!("spread with ‖A‖ = ‖C‖ = 1:");
    for n in [16usize, 64, 256] {
        let mut e1 = DMatrix::zeros(1, n);
        e1[(0, 0)] = 1.0;
        let half = DMatrix::from_diagonal(&DVector::from_fn(
            n,
            |i, _| if i < n / 2 { 1.0 } else { 0.0 },
        ));
        let r = verify_concentration(&rng.child(n as u64), &e1, &half, 1, 1000, 0)?;
        println!(
            "  n = {n:>3}: std {:.4} (√n·std = {:.3})",
            r.sample_std,
            r.sample_std * (n as f64).sqrt()
        );
    }

    let r2 = verify_concentration(&rng.child(1), &a, &c, 2, 1000, 20000)?;
    println!(
        "p = 2: mean {:.5e} vs reference {:.5e} (z = {:.2})",
        r2.sample_mean, r2.reference, r2.mean_z_score
    );
    Ok(())
}
