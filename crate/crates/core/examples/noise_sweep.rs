//! Accuracy of the empirical and ridge estimators as the noise grows
//! (n = 40, T = 100, 100 models per point).

use tracecause::prelude::*;

fn main() -> Result<()> {
    let spec = CausalModelSpec::standard(40, 40, 100, 0.0);
    let grid = [0.0, 0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0];
    let ests = [
        EstimatorConfig::Empirical {
            sv_threshold_rel: None,
        },
        EstimatorConfig::Ridge { lambda: 1e-2 },
    ];
    let res = sweep_noise(&Rng::new(0), &spec, &grid, &ests, 0.05, 100)?;
    println!("{:>8} {:>10} {:>10}", "delta", "empirical", "ridge");
    for (i, d) in grid.iter().enumerate() {
        println!(
            "{d:>8} {:>10.2} {:>10.2}",
            res[0].accuracy[i], res[1].accuracy[i]
        );
    }
    Ok(())
}
