use nalgebra::{DMatrix, DVector};

use tracecause::estimators::Variant;
use tracecause::experiments::pilot_lambda_symmetric;
use tracecause::prelude::*;
use tracecause::theory::plug_in_bias_bound;

fn score(direction: Direction, value: f64) -> DeltaScore {
    DeltaScore::new(Variant::Population, direction, value.exp(), 1.0).unwrap()
}

#[test]
fn decide_branches_and_ties() {
    let xy = score(Direction::XtoY, 0.3);
    let yx = score(Direction::YtoX, 0.1);
    assert_eq!(decide(&xy, &yx, 0.05).unwrap().verdict, Verdict::XCausesY);
    assert_eq!(decide(&yx, &xy, 0.05).unwrap().verdict, Verdict::YCausesX);
    assert_eq!(
        decide(&xy, &yx, 0.5).unwrap().verdict,
        Verdict::Inconclusive
    );
    // Equal scores with ξ = 0 satisfy the first branch.
    assert_eq!(decide(&xy, &xy, 0.0).unwrap().verdict, Verdict::XCausesY);
    assert!(decide(&xy, &yx, -1.0).is_err());
}

#[test]
fn noiseless_model_is_identified_by_both_estimators() {
    let spec = CausalModelSpec::standard(10, 10, 60, 0.0);
    for seed in 0..10 {
        let data = generate(&Rng::new(seed), &spec).unwrap();
        assert_eq!(
            run_pipeline(&data, &PipelineConfig::ridge(0.0))
                .unwrap()
                .verdict,
            Verdict::XCausesY
        );
        assert_eq!(
            run_pipeline(&data, &PipelineConfig::empirical())
                .unwrap()
                .verdict,
            Verdict::XCausesY
        );
    }
}

#[test]
fn unreachable_margin_is_inconclusive() {
    let spec = CausalModelSpec::standard(10, 10, 60, 0.0);
    let data = generate(&Rng::new(1), &spec).unwrap();
    let cfg = PipelineConfig {
        xi: 1e9,
        ..PipelineConfig::ridge(0.01)
    };
    let v = run_pipeline(&data, &cfg).unwrap();
    assert_eq!(v.verdict, Verdict::Inconclusive);
    assert!(v.score_xy.is_some() && v.score_yx.is_some());
}

#[test]
fn empirical_estimator_uses_sample_rank_when_short() {
    let spec = CausalModelSpec::standard(20, 20, 12, 0.05);
    let data = generate(&Rng::new(4), &spec).unwrap();
    let v = run_pipeline(&data, &PipelineConfig::empirical()).unwrap();
    let s = v.score_xy.unwrap();
    assert_eq!(s.variant, Variant::Empirical { rank: 12 });
}

#[test]
fn degenerate_data_gives_reasoned_inconclusive() {
    let data = SampleSet::new(DMatrix::zeros(10, 3), DMatrix::zeros(10, 2)).unwrap();
    let v = run_pipeline(&data, &PipelineConfig::ridge(0.1)).unwrap();
    assert_eq!(v.verdict, Verdict::Inconclusive);
    assert!(v.reason.is_some());
}

#[test]
fn moderate_noise_ridge_mostly_correct() {
    // δ = 0.03 at the default scale with λ = 1e-2.
    let spec = CausalModelSpec::standard(40, 40, 100, 0.03);
    let correct = (0..20)
        .filter(|&s| {
            let data = generate(&Rng::new(s), &spec).unwrap();
            run_pipeline(&data, &PipelineConfig::ridge(1e-2))
                .unwrap()
                .verdict
                == Verdict::XCausesY
        })
        .count();
    assert!(correct >= 16, "{correct}/20");
}

#[test]
fn p_moment_pipeline_runs_and_agrees_with_truth() {
    let spec = CausalModelSpec::standard(12, 12, 80, 0.0);
    let data = generate(&Rng::new(2), &spec).unwrap();
    let cfg = PipelineConfig {
        estimator: EstimatorConfig::PMoment {
            lambda: 1e-3,
            p: 2,
            mc_samples: 400,
            seed: 9,
        },
        xi: 0.05,
        centered: false,
    };
    let v = run_pipeline(&data, &cfg).unwrap();
    assert_eq!(v.verdict, Verdict::XCausesY);
    assert!(v.score_xy.unwrap().mc_std_err.unwrap() > 0.0);
    assert_eq!(run_pipeline(&data, &cfg).unwrap(), v);
}

#[test]
fn pilot_lambda_is_symmetric_and_positive() {
    let spec = CausalModelSpec::standard(20, 20, 100, 0.03);
    let data = generate(&Rng::new(3), &spec).unwrap();
    let a = pilot_lambda_symmetric(&data, 1e-3, false).unwrap();
    let b = pilot_lambda_symmetric(&data.swapped(), 1e-3, false).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn concentration_mean_identity_holds() {
    let n = 12;
    for seed in 0..4 {
        let a = Rng::new(seed).generator().normal_matrix(5, n);
        let g = Rng::new(100 + seed).generator().normal_matrix(n, n);
        let c = &g * g.transpose() / n as f64;
        let r = verify_concentration(&Rng::new(seed), &a, &c, 1, 1500, 0).unwrap();
        assert!(r.mean_within(3.0), "z = {}", r.mean_z_score);
        assert_eq!(r.reference_std_err, 0.0);
        assert_eq!(
            r.bound_curve.len(),
            tracecause::experiments::EPSILON_GRID.len()
        );
        let q: Vec<f64> = r.deviations.quantiles.iter().map(|(_, v)| *v).collect();
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn concentration_second_moment_reference_agrees() {
    let n = 6;
    let a = Rng::new(1).generator().normal_matrix(3, n);
    let c = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| 1.0 / (i + 1) as f64));
    let r = verify_concentration(&Rng::new(2), &a, &c, 2, 3000, 20000).unwrap();
    assert!(r.mean_within(3.0), "z = {}", r.mean_z_score);
    assert!(r.reference_std_err > 0.0);
}

#[test]
fn bias_means_fall_in_intervals_small_scale() {
    let n = 40;
    let spec = CausalModelSpec {
        spectrum: SpectrumSpec::power_law(n, 1.0),
        structural_law: StructuralLaw::GaussianIid {
            variance: 1.0 / n as f64,
        },
        ..CausalModelSpec::standard(n, n, 80, 0.1)
    };
    let lp = select_lambda_prime(n as f64 * 0.01, 2.0, (n * n) as f64 / n as f64).unwrap();
    let r = verify_bias_bounds(&Rng::new(8), &spec, lp, 2.0, 150).unwrap();
    assert_eq!(r.sample_count, 80);
    assert!(r.frobenius.contained, "{:?}", r.frobenius);
    assert!(r.numerator.contained, "{:?}", r.numerator);
    assert!(r.frobenius.lower <= r.frobenius.upper);
    let bound = plug_in_bias_bound(1.0, 2.0, r.p_n);
    assert!(bound > 0.0);
}

#[test]
fn noise_sweep_shapes_and_noiseless_accuracy() {
    let spec = CausalModelSpec::standard(40, 40, 100, 0.0);
    let ests = [
        EstimatorConfig::Empirical {
            sv_threshold_rel: None,
        },
        EstimatorConfig::Ridge { lambda: 0.01 },
    ];
    let res = sweep_noise(&Rng::new(1), &spec, &[0.0, 0.03], &ests, 0.05, 30).unwrap();
    assert_eq!(res.len(), 2);
    for r in &res {
        assert_eq!(r.grid, vec![0.0, 0.03]);
        assert!(
            r.accuracy[0] >= 0.95,
            "{} at δ=0: {}",
            r.estimator,
            r.accuracy[0]
        );
        assert_eq!(r.to_csv().lines().count(), 3);
    }
    assert!(res[1].accuracy[1] > res[0].accuracy[1]);
}

#[test]
fn lambda_sweep_extremes_degrade() {
    let spec = CausalModelSpec::standard(40, 40, 100, 0.0);
    let r = sweep_lambda(&Rng::new(2), &spec, 0.03, &[1e-8, 1e-2, 1e3], 0.05, 30).unwrap();
    assert!(r.accuracy[1] >= 0.8);
    assert!(r.accuracy[0] < r.accuracy[1]);
    assert!(r.accuracy[2] < r.accuracy[1]);
    assert!(r.mean_delta_xy[1].is_some());
}

#[test]
fn sweeps_reject_bad_grids() {
    let spec = CausalModelSpec::standard(5, 5, 20, 0.0);
    assert!(sweep_lambda(&Rng::new(0), &spec, 0.0, &[], 0.05, 5).is_err());
    assert!(sweep_lambda(&Rng::new(0), &spec, 0.0, &[-1.0], 0.05, 5).is_err());
    assert!(sweep_noise(&Rng::new(0), &spec, &[0.0], &[], 0.05, 5).is_err());
}
