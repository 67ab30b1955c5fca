use proptest::prelude::*;
use qrobust_core::channels::depolarizing_choi;
use qrobust_core::consts::FD_STEP;
use qrobust_core::qml::{
    adversarial_accuracy, ansatz_unitary, embed_state, fgsm, loss_gradient, train, AttackConfig, AttackTarget, Classifier,
    Embedding, NoiseModel, TrainConfig,
};
use qrobust_core::sdp::Order;
use qrobust_core::{CMatrix, ChoiMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Two well-separated clusters on 2 qubits.
fn toy_data(rng: &mut ChaCha8Rng, count: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..count {
        let label = i % 2;
        let base = if label == 0 { [1.0, 0.2, 0.1, 0.0] } else { [0.1, 0.2, 1.0, 0.3] };
        xs.push(unit(base.iter().map(|b| b + 0.1 * rng.gen::<f64>()).collect()));
        ys.push(label);
    }
    (xs, ys)
}

fn batch_loss(c: &Classifier, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
    xs.iter().zip(ys).map(|(x, &y)| -c.forward(x).unwrap()[y].ln()).sum::<f64>() / xs.len() as f64
}

#[test]
fn parameter_shift_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, layers, emb) in [(2, 2, Embedding::Amplitude), (3, 2, Embedding::Angle), (1, 3, Embedding::Amplitude)] {
        let c = Classifier::random(n, layers, emb, 0, rng.gen()).unwrap();
        let xs: Vec<Vec<f64>> = (0..4)
            .map(|_| match emb {
                Embedding::Amplitude => unit((0..1 << n).map(|_| rng.gen::<f64>() + 0.1).collect()),
                Embedding::Angle => (0..n).map(|_| rng.gen_range(0.0..3.0)).collect(),
            })
            .collect();
        let ys = vec![0, 1, 1, 0];
        let states: Vec<_> = xs.iter().map(|x| embed_state(x, emb, n).unwrap()).collect();
        let grad = loss_gradient(&c, &states, &ys, &[1.0; 4]);
        for (j, g) in grad.iter().enumerate() {
            let mut p = c.params().to_vec();
            p[j] += FD_STEP;
            let up = Classifier::new(n, layers, emb, 0, p.clone()).unwrap();
            p[j] -= 2.0 * FD_STEP;
            let down = Classifier::new(n, layers, emb, 0, p).unwrap();
            let fd = (batch_loss(&up, &xs, &ys) - batch_loss(&down, &xs, &ys)) / (2.0 * FD_STEP);
            assert!((g - fd).abs() < 1e-5, "param {j}: {g} vs {fd}");
        }
    }
}

#[test]
fn input_gradient_matches_closed_form() {
    // y(x) = x̂ᵀ Re(F) x̂ with x̂ = x/|x|, so ∇y = (2/|x|)(I − x̂x̂ᵀ) Re(F) x̂
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = Classifier::random(2, 2, Embedding::Amplitude, 0, 5).unwrap();
    let pipe = c.pipeline(None).unwrap();
    for _ in 0..10 {
        let x = unit((0..4).map(|_| rng.gen::<f64>() + 0.05).collect());
        let label = rng.gen_range(0..2);
        let f = &pipe.effects()[label];
        let fx: Vec<f64> = (0..4).map(|i| (0..4).map(|j| f[(i, j)].re * x[j]).sum()).collect();
        let y: f64 = x.iter().zip(&fx).map(|(a, b)| a * b).sum();
        let grad_y: Vec<f64> = (0..4).map(|i| 2.0 * (fx[i] - y * x[i])).collect();
        let fd = pipe.input_gradient(&x, label, FD_STEP);
        for i in 0..4 {
            assert!((fd[i] + grad_y[i] / y).abs() < 1e-6, "{} vs {}", fd[i], -grad_y[i] / y);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ansatz_is_unitary(n in 1usize..=3, layers in 0usize..=40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params: Vec<f64> = (0..layers * n * 3).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let u = ansatz_unitary(&params, n, layers).unwrap();
        prop_assert!(u.dagger().matmul(&u).max_abs_diff(&CMatrix::identity(1 << n)) < 1e-10);
    }

    #[test]
    fn probabilities_sum_to_one(seed in any::<u64>(), p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Classifier::random(3, 3, Embedding::Amplitude, rng.gen_range(0..3), seed).unwrap();
        let x = unit((0..8).map(|_| rng.gen::<f64>()).collect());
        let y = c.forward(&x).unwrap();
        prop_assert!((y[0] + y[1] - 1.0).abs() < 1e-10);
        for order in [Order::Pre, Order::Post] {
            let noise = NoiseModel { choi: depolarizing_choi(p, 8).unwrap(), order };
            let y = c.forward_noisy(&x, &noise).unwrap();
            prop_assert!((y[0] + y[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fgsm_respects_budget(seed in any::<u64>(), budget in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Classifier::random(2, 2, Embedding::Amplitude, 0, seed).unwrap();
        let x = unit((0..4).map(|_| rng.gen::<f64>() + 0.01).collect());
        let xa = fgsm(&c.pipeline(None).unwrap(), &x, rng.gen_range(0..2), &AttackConfig { budget, gradient_step: FD_STEP }).unwrap();
        let dist = x.iter().zip(&xa).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(dist <= budget + 1e-12);
    }
}

#[test]
fn training_is_deterministic_and_reduces_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (xs, ys) = toy_data(&mut rng, 24);
    let c = Classifier::random(2, 2, Embedding::Amplitude, 0, 11).unwrap();
    let cfg = TrainConfig { batch_size: 8, learning_rate: 0.05, epochs: 15, seed: 4, class_weighted: true };
    let a = train(&c, &xs, &ys, &cfg).unwrap();
    let b = train(&c, &xs, &ys, &cfg).unwrap();
    assert_eq!(a.loss_curve, b.loss_curve);
    assert_eq!(a.classifier.params(), b.classifier.params());
    assert!(a.loss_curve.last().unwrap() < &a.loss_curve[0]);
    let correct = xs.iter().zip(&ys).filter(|(x, &y)| qrobust_core::qml::predict(&a.classifier.forward(x).unwrap()) == y).count();
    assert!(correct as f64 / xs.len() as f64 > 0.9);
}

#[test]
fn small_fgsm_step_does_not_lower_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (xs, ys) = toy_data(&mut rng, 20);
    let c = Classifier::random(2, 2, Embedding::Amplitude, 0, 2).unwrap();
    let trained = train(&c, &xs, &ys, &TrainConfig { batch_size: 10, learning_rate: 0.05, epochs: 20, seed: 1, class_weighted: false })
        .unwrap()
        .classifier;
    for noise in [None, Some(NoiseModel { choi: depolarizing_choi(0.3, 4).unwrap(), order: Order::Pre })] {
        let pipe = trained.pipeline(noise.as_ref()).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            if qrobust_core::qml::predict(&pipe.forward(x).unwrap()) != y {
                continue;
            }
            let xa = fgsm(&pipe, x, y, &AttackConfig { budget: 1e-3, gradient_step: FD_STEP }).unwrap();
            assert!(pipe.loss(&xa, y) >= pipe.loss(x, y) - 1e-6);
        }
    }
}

#[test]
fn fully_mixing_channel_gives_constant_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (xs, ys) = toy_data(&mut rng, 30);
    let c = Classifier::random(2, 2, Embedding::Amplitude, 0, 3).unwrap();
    let noise = NoiseModel { choi: ChoiMatrix::fully_mixing(4), order: Order::Pre };
    let budgets = [0.0, 0.05, 0.1, 0.2];
    let acc = adversarial_accuracy(&c, Some(&noise), &xs, &ys, &budgets, AttackTarget::Deployed, FD_STEP).unwrap();
    let class0 = ys.iter().filter(|&&y| y == 0).count() as f64 / ys.len() as f64;
    for p in &acc {
        assert!((p.accuracy - class0).abs() < 1e-12);
        assert_eq!(p.tie_rate, 1.0);
    }
}

#[test]
fn zero_budget_accuracy_is_clean_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (xs, ys) = toy_data(&mut rng, 16);
    let c = Classifier::random(2, 2, Embedding::Amplitude, 0, 8).unwrap();
    let clean = xs.iter().zip(&ys).filter(|(x, &y)| qrobust_core::qml::predict(&c.forward(x).unwrap()) == y).count() as f64 / 16.0;
    let acc = adversarial_accuracy(&c, None, &xs, &ys, &[0.0], AttackTarget::Deployed, FD_STEP).unwrap();
    assert_eq!(acc[0].accuracy, clean);
}
