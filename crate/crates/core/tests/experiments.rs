use cclab::bounds::{conv_exceedance_bound, default_rho_grid, refined_certificate};
use cclab::experiments::config::{ExperimentConfig, ExperimentKind, Overrides};
use cclab::experiments::lower::pipeline_rows;
use cclab::experiments::upper::adversarial;
use cclab::experiments::{execute, ExperimentReport};
use cclab::gaussian::{self, TailModel};
use cclab::measures::{exceedance_of, gaussian_quantile_grid};

fn run(kind: ExperimentKind, o: Overrides) -> ExperimentReport {
    execute(&ExperimentConfig::resolve(kind, o).unwrap()).unwrap()
}

#[test]
fn dkw_pass_rate_improves_with_n() {
    let rate = |n| {
        let r = run(
            ExperimentKind::Dkw,
            Overrides {
                n: Some(n),
                samples: Some(4000),
                ..Default::default()
            },
        );
        assert!(r.pass);
        r.rows[0]["gamma_mass"]["value"].as_f64().unwrap()
    };
    let small = rate(100);
    let large = rate(10_000);
    assert!(small <= large, "{small} vs {large}");
    assert!(small < 1.0);
}

#[test]
fn upper_single_vector_sits_near_gaussian_tail() {
    let r = run(
        ExperimentKind::Upper,
        Overrides {
            n: Some(5000),
            k: Some(vec![1]),
            samples: Some(200),
            ..Default::default()
        },
    );
    assert!(r.pass);
    let mean = r.rows[0]["mean_exceedance"].as_f64().unwrap();
    assert!((mean - gaussian::sf(1.0)).abs() < 0.003, "{mean}");
    assert!(r.rows[0]["max_exceedance"].as_f64().unwrap() < 0.2616);
}

#[test]
fn upper_has_no_violations_at_larger_n() {
    let r = run(
        ExperimentKind::Upper,
        Overrides {
            n: Some(20_000),
            k: Some(vec![5]),
            samples: Some(200),
            ..Default::default()
        },
    );
    assert!(r.pass);
    assert_eq!(r.rows[0]["violations"], 0);
}

#[test]
fn adversarial_exceedance_grows_with_k() {
    let grid = default_rho_grid(12);
    let two = adversarial(20_000, 2, &grid, 1, 0).unwrap();
    let many = adversarial(20_000, 64, &grid, 1, 0).unwrap();
    let single_cert = refined_certificate(1.0, &[1.0]).unwrap().bound;
    assert!(many.exceedance > two.exceedance);
    assert!(
        many.exceedance > single_cert,
        "{} vs {single_cert}",
        many.exceedance
    );
    assert!(many.exceedance <= many.bound);
    assert!(many.bound <= conv_exceedance_bound(64, 0.25).unwrap());
}

#[test]
fn pipeline_without_averaging_keeps_tail() {
    let n = 10_000;
    let rows = pipeline_rows(n, 1, &[0.05], 0, 1).unwrap();
    let t_exc = exceedance_of(&gaussian_quantile_grid(n), 1.0);
    assert_eq!(rows[0].exceedance, t_exc);
    assert!((t_exc - gaussian::sf(1.0)).abs() < 1e-3);
}

#[test]
fn pipeline_respects_first_moment_ceiling() {
    let n = 20_000;
    let p1 = TailModel::new().p1();
    for d in [4, 32, 100] {
        for r in pipeline_rows(n, d, &default_rho_grid(6), 3, 1).unwrap() {
            assert!(r.exceedance <= p1 + 1.0 / n as f64);
            assert!(r.mean_gap <= 1e-12);
        }
    }
    assert!(pipeline_rows(n, 200, &[0.005], 0, 1).is_err());
}

#[test]
fn sandwich_first_row() {
    let r = run(
        ExperimentKind::Sandwich,
        Overrides {
            k: Some(vec![1]),
            samples: Some(50_000),
            ..Default::default()
        },
    );
    assert!(r.pass);
    let lower = r.rows[0]["lower"]["value"].as_f64().unwrap();
    let upper = r.rows[0]["upper"].as_f64().unwrap();
    assert!((lower - gaussian::sf(1.0)).abs() < 0.01);
    assert!((upper - 0.2616144898577462).abs() < 1e-12);
}

#[test]
fn reordering_oracle_passes() {
    for n in [4, 6, 7] {
        let r = run(
            ExperimentKind::ReorderingOracle,
            Overrides {
                n: Some(n),
                m: Some(2),
                samples: Some(300),
                ..Default::default()
            },
        );
        assert!(r.pass, "n = {n}");
    }
}

#[test]
fn box_lower_small_sweep() {
    let r = run(
        ExperimentKind::BoxLower,
        Overrides {
            d: Some(vec![1, 4]),
            samples: Some(20_000),
            rho_grid: Some(vec![0.02, 0.05]),
            ..Default::default()
        },
    );
    assert!(r.pass);
    let d1 = r.rows[0]["best"]["estimate"]["value"].as_f64().unwrap();
    assert!((d1 - gaussian::sf(1.0)).abs() < 0.012);
}

#[test]
fn dominance_small_run() {
    let r = run(
        ExperimentKind::Dominance,
        Overrides {
            k: Some(vec![2, 5]),
            samples: Some(20_000),
            ..Default::default()
        },
    );
    assert!(r.pass);
    assert_eq!(r.rows.len(), 2 * 2 * 6);
}
