mod common;

use common::median;
use edgechaos::activations::{synthesize_hp, ActivationFn, HpDesignProfile};
use edgechaos::data::two_moons;
use edgechaos::dynamics::{epsilon_from_fraction, recurrence_plot, DEFAULT_EPSILON_FRACTION};
use edgechaos::mlp::{gradient_check, train, Loss, MlpConfig};
use proptest::prelude::*;

fn moons_config(activation: ActivationFn<f64>, batch_size: usize, seed: u64) -> MlpConfig {
    MlpConfig {
        hidden: vec![64; 4],
        activation,
        learning_rate: 0.05,
        batch_size,
        epochs: 40,
        seed: 100 + seed,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hp_syntheses_pass_gradient_check(
        max in 0.3f64..0.95,
        drop in 0.0f64..0.25,
        gap in 0.02f64..0.3,
        terms in 1usize..6,
        seed in 0u64..1000,
        squared in any::<bool>(),
    ) {
        let profile = HpDesignProfile { max_coeff: max, min_coeff: (max - drop).max(0.05), spacing: gap, num_terms: terms, ..Default::default() };
        let cfg = MlpConfig {
            hidden: vec![5, 4],
            activation: synthesize_hp(&profile).unwrap(),
            loss: if squared { Loss::SquaredError } else { Loss::CrossEntropy },
            seed,
            ..Default::default()
        };
        let data = two_moons(16, 0.1, seed).unwrap();
        let idx: Vec<usize> = (0..8).collect();
        let err = gradient_check(&cfg, &data, &idx).unwrap();
        prop_assert!(err <= 1e-4, "{}: {err}", cfg.activation);
    }
}

#[test]
fn same_seed_gives_identical_traces() {
    let data = two_moons(256, 0.2, 4).unwrap();
    let cfg = moons_config(ActivationFn::tanh(), 16, 4);
    let cfg = MlpConfig { epochs: 8, ..cfg };
    assert_eq!(train(&cfg, &data).unwrap(), train(&cfg, &data).unwrap());
    let other = MlpConfig { seed: cfg.seed + 1, ..cfg.clone() };
    assert_ne!(train(&cfg, &data).unwrap().losses, train(&other, &data).unwrap().losses);
}

/// Epochs the HP net needs to reach the sigmoid net's final loss, compared
/// with the sigmoid's own count; a divergent run never reaches it.
#[test]
fn hp_reaches_sigmoid_loss_sooner() {
    let hp = synthesize_hp(&HpDesignProfile::default()).unwrap();
    let mut hp_epochs = Vec::new();
    let mut sigmoid_epochs = Vec::new();
    for seed in 0..5 {
        let data = two_moons(512, 0.2, seed).unwrap();
        let s = train(&moons_config(ActivationFn::sigmoid(), 32, seed), &data).unwrap();
        let target = s.final_loss();
        sigmoid_epochs.push(s.epochs_to(target).unwrap() as f64);
        let h = train(&moons_config(hp.clone(), 32, seed), &data).ok().and_then(|t| t.epochs_to(target));
        hp_epochs.push(h.map_or(f64::INFINITY, |e| e as f64));
    }
    assert!(
        median(hp_epochs.clone()) < median(sigmoid_epochs.clone()),
        "hp {hp_epochs:?} vs sigmoid {sigmoid_epochs:?}"
    );
}

const BATCHES: [usize; 3] = [8, 64, 512];

/// Per batch size, the median over five seeds of `f(trace)`.
fn batch_medians(f: impl Fn(&edgechaos::mlp::TrainingTrace) -> f64) -> Vec<f64> {
    BATCHES
        .iter()
        .map(|&b| {
            median(
                (0..5)
                    .map(|seed| {
                        let data = two_moons(512, 0.2, seed).unwrap();
                        f(&train(&moons_config(ActivationFn::tanh(), b, seed), &data).unwrap())
                    })
                    .collect(),
            )
        })
        .collect()
}

#[test]
fn larger_batches_give_smoother_loss_traces() {
    let rough = batch_medians(|t| t.roughness());
    assert!(rough[0] > rough[1] && rough[1] > rough[2], "variance of loss differences for {BATCHES:?}: {rough:?}");
}

#[test]
fn hidden_state_recurrence_fades_with_batch_size() {
    let rates = batch_medians(|t| {
        let traj = t.hidden_trajectory();
        let eps = epsilon_from_fraction(&traj, DEFAULT_EPSILON_FRACTION).unwrap();
        recurrence_plot(&traj, eps).unwrap().recurrence_rate
    });
    assert!(rates[0] > rates[1] && rates[1] > rates[2], "recurrence rate for {BATCHES:?}: {rates:?}");
}
