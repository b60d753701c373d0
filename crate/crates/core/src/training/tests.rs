use approx::assert_relative_eq;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::*;
use crate::decoder::{decode, DecoderConfig};
use crate::polar::CodeSpec;
use crate::tanner::{build_full_factor_graph, prune, StageOrder};

fn code_8_4() -> (CodeSpec, TannerGraph) {
    let spec = CodeSpec::from_one_based(8, &[4, 6, 7, 8]).unwrap();
    let graph = prune(&build_full_factor_graph(&spec, StageOrder::default())).unwrap();
    (spec, graph)
}

#[test]
fn loss_examples() {
    let x = [0u8, 1, 1, 0];
    let exact = cross_entropy(&[0.0, 1.0, 1.0, 0.0], &x);
    assert!(exact < 1e-11);
    assert_relative_eq!(cross_entropy(&[0.5; 6], &[0, 1, 0, 1, 1, 0]), 2f64.ln(), max_relative = 1e-15);
    let mut o = [0.5; 8];
    o[3] = 0.9;
    let oracle = (7.0 * 2f64.ln() + 10f64.ln()) / 8.0;
    assert_relative_eq!(cross_entropy(&o, &[0; 8]), oracle, max_relative = 1e-14);
    assert_relative_eq!(oracle, 0.8943, epsilon = 1e-4);
}

#[test]
fn forward_examples() {
    let (_, g) = code_8_4();
    let net = UnrolledNetwork::new(&g, 3, WeightSet::Single(0.95)).unwrap();
    let tape = net.forward(&[12.0; 8]).unwrap();
    assert!(tape.outputs.iter().all(|&o| o < 1e-4));
    let tape = net.forward(&[0.0; 8]).unwrap();
    assert!(tape.outputs.iter().all(|&o| o == 0.5));
    let grad = net.backward(&tape, &[0; 8]).unwrap();
    assert_eq!(grad, WeightSet::Single(0.0));
}

#[test]
fn forward_matches_decoder_soft_output() {
    let (_, g) = code_8_4();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 1..=4 {
        let llr: Vec<f64> = (0..8).map(|_| rng.gen_range(-4.0..6.0)).collect();
        for w in [WeightSet::Single(1.0), WeightSet::Single(0.8)] {
            let net = UnrolledNetwork::new(&g, t, w.clone()).unwrap();
            let tape = net.forward(&llr).unwrap();
            let cfg = DecoderConfig::new(Variant::WeightedMinSum(w), t);
            let out = decode(&g, &llr, &cfg).unwrap();
            assert_eq!(tape.marginals, out.soft);
        }
        let ms = decode(&g, &llr, &DecoderConfig::new(Variant::MinSum, t)).unwrap();
        let net = UnrolledNetwork::new(&g, t, WeightSet::Single(1.0)).unwrap();
        let tape = net.forward(&llr).unwrap();
        let o: Vec<f64> = (0..8).map(|j| sigmoid(-ms.soft[g.channel_var(j)])).collect();
        assert_eq!(net.loss(&tape, &[0; 8]), cross_entropy(&o, &[0; 8]));
    }
}

fn loss_at(g: &TannerGraph, t: usize, w: &WeightSet, llr: &[f64], x: &[u8]) -> (f64, Tape) {
    let net = UnrolledNetwork::new(g, t, w.clone()).unwrap();
    let tape = net.forward(llr).unwrap();
    (net.loss(&tape, x), tape)
}

/// Central-difference check of every gradient coordinate. Returns false if
/// the point sits too close to a branch change to be usable.
fn gradient_matches(g: &TannerGraph, t: usize, w: &WeightSet, llr: &[f64], x: &[u8]) -> Option<bool> {
    let h = 1e-4;
    let net = UnrolledNetwork::new(g, t, w.clone()).unwrap();
    let tape = net.forward(llr).unwrap();
    let analytic = flatten(&net.backward(&tape, x).unwrap());
    let base = flatten(w);
    for i in 0..base.len() {
        let mut plus = base.clone();
        plus[i] += h;
        let mut minus = base.clone();
        minus[i] -= h;
        let (lp, tp) = loss_at(g, t, &unflatten_like(w, &plus), llr, x);
        let (lm, tm) = loss_at(g, t, &unflatten_like(w, &minus), llr, x);
        if !tape.same_branch(&tp, DEFAULT_CLIP) || !tape.same_branch(&tm, DEFAULT_CLIP) {
            return None;
        }
        let fd = (lp - lm) / (2.0 * h);
        let a = analytic[i];
        if (a - fd).abs() > 1e-4 * a.abs().max(fd.abs()) + 1e-10 {
            eprintln!("coordinate {i}: analytic {a:e}, finite difference {fd:e}");
            return Some(false);
        }
    }
    Some(true)
}

fn random_point(rng: &mut ChaCha8Rng, g: &TannerGraph, t: usize, kind: WeightKind) -> (WeightSet, Vec<f64>) {
    let llr: Vec<f64> = (0..g.code_length()).map(|_| rng.gen_range(-3.0..5.0)).collect();
    let w = match kind {
        WeightKind::Single => WeightSet::Single(rng.gen_range(0.5..1.2)),
        WeightKind::PerEdge => {
            let cfg = TrainConfig { iterations: t, kind, seed: rng.gen(), ..TrainConfig::default() };
            initial_weights(g, &cfg).unwrap()
        }
    };
    (w, llr)
}

#[test]
fn gradients_match_finite_differences() {
    let (_, g) = code_8_4();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for kind in [WeightKind::Single, WeightKind::PerEdge] {
        for t in 1..=3 {
            let mut checked = 0;
            while checked < 10 {
                let (w, llr) = random_point(&mut rng, &g, t, kind);
                let x: Vec<u8> = (0..8).map(|_| rng.gen_range(0..=1)).collect();
                match gradient_matches(&g, t, &w, &llr, &x) {
                    None => continue,
                    Some(ok) => assert!(ok, "{kind:?} T={t} w={w:?} llr={llr:?}"),
                }
                checked += 1;
            }
        }
    }
}

#[test]
fn backward_rejects_mismatched_inputs() {
    let (_, g) = code_8_4();
    let net = UnrolledNetwork::new(&g, 2, WeightSet::Single(1.0)).unwrap();
    let tape = net.forward(&[1.0; 8]).unwrap();
    assert!(net.backward(&tape, &[0; 7]).is_err());
    let other = UnrolledNetwork::new(&g, 3, WeightSet::Single(1.0)).unwrap();
    assert!(other.backward(&tape, &[0; 8]).is_err());
    assert!(UnrolledNetwork::new(&g, 0, WeightSet::Single(1.0)).is_err());
}

#[test]
fn adam_examples() {
    let cfg = AdamConfig::default();
    let mut p = vec![1.0, -2.0];
    let mut st = AdamState::new(2);
    adam_step(&mut p, &[0.0, 0.0], &mut st, 0.1, &cfg);
    assert_eq!(p, vec![1.0, -2.0]);

    let mut st = AdamState::new(3);
    let mut p = vec![0.0; 3];
    adam_step(&mut p, &[3.0, -1e-3, 250.0], &mut st, 0.001, &cfg);
    for (d, s) in p.iter().zip([-1.0, 1.0, -1.0]) {
        assert_relative_eq!(*d, s * 0.001, max_relative = 1e-4);
    }

    // Two steps of constant gradient 0.5 at lr 0.1, by hand.
    let (g, lr) = (0.5, 0.1);
    let m1 = 0.1 * g;
    let v1 = 0.001 * g * g;
    let w1 = 1.0 - lr * (m1 / 0.1) / ((v1 / 0.001f64).sqrt() + 1e-8);
    let m2 = 0.9 * m1 + 0.1 * g;
    let v2 = 0.999 * v1 + 0.001 * g * g;
    let w2 = w1 - lr * (m2 / (1.0 - 0.81)) / ((v2 / (1.0 - 0.999f64 * 0.999)).sqrt() + 1e-8);
    let mut p = vec![1.0];
    let mut st = AdamState::new(1);
    adam_step(&mut p, &[g], &mut st, lr, &cfg);
    assert_relative_eq!(p[0], w1, max_relative = 1e-14);
    adam_step(&mut p, &[g], &mut st, lr, &cfg);
    assert_relative_eq!(p[0], w2, max_relative = 1e-14);
    assert_relative_eq!(p[0], 0.8, epsilon = 1e-6);
}

#[test]
fn default_batch_layout() {
    let spec = crate::polar::construct_frozen_set(16, 8, 0.5).unwrap();
    let cfg = TrainConfig::default();
    assert_eq!(cfg.batch_size(), 120);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let b = make_batch(&spec, &cfg, &mut rng).unwrap();
    assert_eq!(b.llrs.len(), 120);
    for snr in [1.0, 2.0, 3.0, 4.0] {
        assert_eq!(b.snr_db.iter().filter(|&&s| s == snr).count(), 30);
    }
    assert!(b.codewords.iter().all(|x| x.iter().all(|&v| v == 0)));
    assert!(b.llrs.iter().all(|l| l.len() == 16));

    // Nearly noiseless: LLRs sit at 2 / sigma².
    let cfg = TrainConfig { snr_grid_db: vec![80.0], samples_per_snr: 2, ..TrainConfig::default() };
    let b = make_batch(&spec, &cfg, &mut rng).unwrap();
    let sigma = crate::channel::noise_sigma(80.0, 0.5);
    for l in b.llrs.iter().flatten() {
        assert_relative_eq!(*l, 2.0 / (sigma * sigma), max_relative = 1e-3);
    }
}

#[test]
fn zero_learning_rate_keeps_weights() {
    let (spec, g) = code_8_4();
    for kind in [WeightKind::Single, WeightKind::PerEdge] {
        let cfg = TrainConfig { iterations: 3, kind, learning_rate: 0.0, epochs: 5, ..TrainConfig::default() };
        let r = train(&spec, &g, &cfg).unwrap();
        assert_eq!(r.final_weights, r.initial_weights);
        assert_eq!(r.losses.len(), 5);
    }
}

#[test]
fn training_is_deterministic_across_thread_counts() {
    let (spec, g) = code_8_4();
    let cfg = TrainConfig { iterations: 3, epochs: 20, seed: 7, ..TrainConfig::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train(&spec, &g, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.w_trajectory.len(), 20);
    assert!(a.w_trajectory[0] < 1.0);
}

#[test]
fn report_csv_layout() {
    let r = TrainReport {
        losses: vec![0.5, 0.25],
        w_trajectory: vec![0.999, 0.998],
        initial_weights: WeightSet::Single(1.0),
        final_weights: WeightSet::Single(0.998),
        seed: 9,
    };
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].ends_with("seed=9"));
    assert_eq!(&lines[1..], ["epoch,loss,w_prime", "1,0.5,0.999", "2,0.25,0.998"]);
}
