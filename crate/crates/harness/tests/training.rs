//! Training, dataset and table contracts on small budgets.

use geonoise_core::{rng, NoiseConfig, Strategy};
use geonoise_harness::table::{best_per_strategy, sigma2_grid, summarize};
use geonoise_harness::{
    generate_dataset, run_grid, run_sweep, run_table, train, train_model, Experiment, GridConfig, Mlp, ModelConfig,
    Preset, TrainConfig,
};
use nalgebra::Vector3;
use rand::Rng;

fn small_grid(strategies: Vec<Strategy>) -> GridConfig {
    GridConfig {
        strategies,
        sigma2_grid: vec![1e-3, 1e-2],
        seeds: vec![0, 1],
        epochs: 5,
        ..GridConfig::default()
    }
}

fn small_experiment() -> Experiment {
    Experiment {
        n_train: 30,
        n_test: 50,
        ..Preset::SwissRoll.experiment()
    }
}

#[test]
fn baseline_training_reduces_the_loss() {
    let e = Preset::SwissRoll.experiment();
    let data = generate_dataset(&e.manifold, e.target, e.n_train, 100, 0).unwrap();
    let tc = TrainConfig {
        epochs: 100,
        ..TrainConfig::default()
    };
    let run = train(&data, &ModelConfig::default(), &tc, 0).unwrap();
    assert!(run.train_mse < run.initial_train_mse);
    assert!(run.test_mse.is_finite());
}

#[test]
fn zero_variance_reproduces_the_baseline_trajectory() {
    let e = small_experiment();
    let data = generate_dataset(&e.manifold, e.target, e.n_train, e.n_test, 3).unwrap();
    let base = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let (reference, _) = train_model(&data, &ModelConfig::default(), &base, 3).unwrap();
    for s in [
        Strategy::Ambient,
        Strategy::Tangent,
        Strategy::Geodesic,
        Strategy::Brownian,
    ] {
        let tc = TrainConfig {
            noise: NoiseConfig::new(s, 0.0),
            ..base
        };
        let (model, run) = train_model(&data, &ModelConfig::default(), &tc, 3).unwrap();
        assert_eq!(model, reference, "{s}");
        assert_eq!(run.resampled, 0);
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let e = small_experiment();
    let data = generate_dataset(&e.manifold, e.target, e.n_train, e.n_test, 5).unwrap();
    for s in Strategy::ALL {
        let tc = TrainConfig {
            epochs: 10,
            noise: NoiseConfig::new(s, 0.05),
            ..TrainConfig::default()
        };
        let a = train(&data, &ModelConfig::default(), &tc, 5).unwrap();
        let b = train(&data, &ModelConfig::default(), &tc, 5).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn backward_input_gradients_match_differences() {
    let model = Mlp::new(&ModelConfig::default(), &mut rng::seeded(11)).unwrap();
    let mut r = rng::seeded(12);
    let h = 1e-5;
    for _ in 0..50 {
        let x = Vector3::from_fn(|_, _| r.random_range(-3.0..3.0));
        let g = model.input_gradient(&x);
        let fd = Vector3::from_fn(|k, _| {
            let e = Vector3::ith(k, h);
            (model.eval(&(x + e)) - model.eval(&(x - e))) / (2.0 * h)
        });
        assert!((g - fd).norm() / g.norm() <= 1e-6);
    }
}

#[test]
fn table_cardinality_and_baseline_row() {
    let e = small_experiment();
    let cfg = small_grid(vec![Strategy::None, Strategy::Brownian]);
    let table = run_table(std::slice::from_ref(&e), &cfg).unwrap();
    assert_eq!(table.records.len(), 2 * 2 * 2);
    assert_eq!(table.best.len(), 2);
    let b = table.best(&e.name, Strategy::None).unwrap();
    assert_eq!(b.relative_mse, 1.0);
    let csv = table.render_csv();
    assert!(csv.starts_with("strategy,SwissRoll\nB,1.00 ± "));
    assert!(csv.contains("\nBM,"));
}

#[test]
fn baseline_does_not_depend_on_other_strategies() {
    let e = small_experiment();
    let alone = run_grid(std::slice::from_ref(&e), &small_grid(vec![Strategy::None])).unwrap();
    let mixed = run_grid(
        std::slice::from_ref(&e),
        &small_grid(vec![Strategy::Ambient, Strategy::None, Strategy::Geodesic]),
    )
    .unwrap();
    let base: Vec<_> = mixed.iter().filter(|r| r.strategy == Strategy::None).cloned().collect();
    assert_eq!(alone, base);
}

#[test]
fn summaries_are_order_independent() {
    let e = small_experiment();
    let cfg = GridConfig {
        jobs: Some(2),
        ..small_grid(vec![Strategy::None, Strategy::Ambient])
    };
    let records = run_grid(std::slice::from_ref(&e), &cfg).unwrap();
    let mut reversed = records.clone();
    reversed.reverse();
    let mut a = best_per_strategy(&summarize(&records).unwrap());
    let mut b = best_per_strategy(&summarize(&reversed).unwrap());
    a.sort_by(|x, y| x.strategy.tag().cmp(y.strategy.tag()));
    b.sort_by(|x, y| x.strategy.tag().cmp(y.strategy.tag()));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(
            (x.strategy, x.sigma2, x.relative_mse),
            (y.strategy, y.sigma2, y.relative_mse)
        );
    }
}

#[test]
fn sweep_needs_five_grid_points() {
    let e = small_experiment();
    assert!(run_sweep(&e, &small_grid(vec![Strategy::Ambient])).is_err());
    let cfg = GridConfig {
        sigma2_grid: sigma2_grid(1e-4, 1e-2, 5),
        seeds: vec![0],
        epochs: 3,
        strategies: vec![Strategy::Tangent],
        ..GridConfig::default()
    };
    let sweep = run_sweep(&e, &cfg).unwrap();
    assert_eq!(sweep.curve(Strategy::Tangent).len(), 5);
    assert_eq!(sweep.curve(Strategy::None).len(), 5);
    assert!(sweep.worst(Strategy::Tangent).unwrap().is_finite());
}

#[test]
fn datasets_embed_their_inputs() {
    for p in Preset::ALL {
        let e = p.experiment();
        let d = generate_dataset(&e.manifold, e.target, 20, 20, 9).unwrap();
        for (u, x) in d.inputs_local.iter().zip(&d.inputs_ambient) {
            assert!((e.manifold.chart_embed(u).unwrap() - x).norm() <= 1e-9);
        }
        for (u, y) in d.inputs_local.iter().zip(&d.targets) {
            assert_eq!(*y, e.target.eval(u));
        }
    }
}
