//! End-to-end decisions with each estimator, plus the swap check.

use tracecause::experiments::pilot_lambda_symmetric;
use tracecause::prelude::*;

fn main() -> Result<()> {
    let spec = CausalModelSpec::standard(40, 40, 100, 0.03);
    let data = generate(&Rng::new(5), &spec)?;

    let auto = pilot_lambda_symmetric(&data, 1e-3, false)?;
    let configs = [
        ("empirical", PipelineConfig::empirical()),
        ("ridge 1e-2", PipelineConfig::ridge(1e-2)),
        ("ridge pilot", PipelineConfig::ridge(auto)),
        (
            "p-moment",
            PipelineConfig {
                estimator: EstimatorConfig::PMoment {
                    lambda: 1e-2,
                    p: 2,
                    mc_samples: 500,
                    seed: 0,
                },
                ..PipelineConfig::ridge(1e-2)
            },
        ),
    ];
    for (name, cfg) in configs {
        let v = run_pipeline(&data, &cfg)?;
        let swapped = run_pipeline(&data.swapped(), &cfg)?;
        let fmt = |s: Option<DeltaScore>| s.map_or("-".into(), |s| format!("{:+.3}", s.value));
        println!(
            "{name:12} Δxy {} Δyx {} → {:?} (swapped: {:?})",
            fmt(v.score_xy),
            fmt(v.score_yx),
            v.verdict,
            swapped.verdict
        );
    }
    println!("pilot λ = {auto:.3e}");
    Ok(())
}
