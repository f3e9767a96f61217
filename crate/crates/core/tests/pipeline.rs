//! Cross-module properties exercised through the public API only.

use std::io::Cursor;

use hrcn_core::geometry::{dot, norm};
use hrcn_core::initializer::chow_estimate;
use hrcn_core::learner::{evaluate, learn, read_model, select_best, write_model, LearnConfig, LearnReport};
use hrcn_core::source::{DatasetSource, SampleSource, StreamSource};
use hrcn_core::sq_lab::{distinguish, make_packing, max_abs_inner};
use hrcn_core::synthetic::{generate, random_problem, read_dataset, write_dataset, DatasetHeader};
use hrcn_core::{Dataset, Halfspace, Seed, UnitVector};
use proptest::prelude::*;

fn quick(eta: f64) -> LearnConfig {
    let mut c = LearnConfig::desk(0.2, 0.1, Some(eta));
    c.opt.iteration_cap = 30;
    c
}

fn breakdown_total(r: &LearnReport) -> usize {
    let s = r.samples;
    s.eta_estimation + s.probe + s.init + s.gradient + s.test
}

#[test]
fn chow_identity_across_grid() {
    let n = 1_000_000;
    let mut runs = 0;
    let mut good = 0;
    for d in [3, 10] {
        for t in [-0.5, 1.0] {
            for eta in [0.0, 0.3] {
                for s in 0..3 {
                    let spec = random_problem(d, t, eta, Seed(400 + s)).unwrap();
                    let chow = chow_estimate(&generate(&spec, n).unwrap()).unwrap();
                    let scale = (2.0 / std::f64::consts::PI).sqrt() * (1.0 - 2.0 * eta) * (-0.5 * t * t).exp();
                    let diff: Vec<f64> = chow
                        .iter()
                        .zip(spec.target.w.as_slice())
                        .map(|(c, w)| c - scale * w)
                        .collect();
                    runs += 1;
                    if norm(&diff) <= 4.0 * (d as f64 / n as f64).sqrt() + 0.002 {
                        good += 1;
                    }
                }
            }
        }
    }
    assert!(good as f64 >= 0.95 * runs as f64, "{good}/{runs}");
}

#[test]
fn stream_accounting_matches_oracle() {
    let spec = random_problem(4, 0.8, 0.15, Seed(41)).unwrap();
    let mut src = StreamSource::new(spec);
    let report = learn(&mut src, &quick(0.15)).unwrap();
    assert_eq!(report.samples_used, src.drawn());
    assert_eq!(report.samples_used, breakdown_total(&report));
}

#[test]
fn file_mode_matches_stream_mode_on_the_same_samples() {
    let spec = random_problem(3, 0.4, 0.1, Seed(42)).unwrap();
    let cfg = quick(0.1);
    let mut stream = StreamSource::new(spec.clone());
    let streamed = learn(&mut stream, &cfg).unwrap();

    let data = generate(&spec, streamed.samples_used + 500).unwrap();
    let header = DatasetHeader {
        d: 3,
        n: data.len(),
        seed: spec.seed,
        eta: spec.eta,
        t: spec.target.t,
    };
    let mut bytes = Vec::new();
    write_dataset(&mut bytes, &header, &data).unwrap();
    let (_, reread) = read_dataset(Cursor::new(bytes)).unwrap();
    let mut file = DatasetSource::new(reread);
    let from_file = learn(&mut file, &cfg).unwrap();

    assert_eq!(from_file, streamed);
    assert_eq!(file.remaining(), 500);
}

#[test]
fn negated_dataset_file_negates_predictions() {
    let spec = random_problem(4, 0.5, 0.1, Seed(43)).unwrap();
    let cfg = quick(0.1);
    let n = learn(&mut StreamSource::new(spec.clone()), &cfg).unwrap().samples_used;
    let data = generate(&spec, n).unwrap();
    let mut negated = data.clone();
    negated.negate_labels();
    let a = learn(&mut DatasetSource::new(data), &cfg).unwrap();
    let b = learn(&mut DatasetSource::new(negated), &cfg).unwrap();
    let probe = generate(&spec.with_seed(Seed(8)), 3000).unwrap();
    for (x, _) in probe.iter() {
        assert_eq!(a.hypothesis.predict(x), -b.hypothesis.predict(x));
    }
}

#[test]
fn model_file_preserves_predictions() {
    let spec = random_problem(5, -0.3, 0.2, Seed(44)).unwrap();
    let report = learn(&mut StreamSource::new(spec.clone()), &quick(0.2)).unwrap();
    let mut bytes = Vec::new();
    write_model(&mut bytes, &report.hypothesis).unwrap();
    let back = read_model(std::str::from_utf8(&bytes).unwrap()).unwrap();
    let test = generate(&spec.with_seed(Seed(9)), 5000).unwrap();
    assert_eq!(
        evaluate(&back, &test).unwrap(),
        evaluate(&report.hypothesis, &test).unwrap()
    );
}

fn unit(seed: Seed, d: usize) -> UnitVector {
    UnitVector::new(seed.gaussian_stream().take(d).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn selection_picks_a_minimal_error(seed in any::<u64>(), m in 1usize..8, n in 1usize..400) {
        let spec = random_problem(3, 0.2, 0.2, Seed(seed)).unwrap();
        let fresh: Dataset = generate(&spec, n).unwrap();
        let candidates: Vec<Halfspace> = (0..m as u64)
            .map(|i| Halfspace::new(unit(Seed(seed).derive(3, i), 3), 0.25 * i as f64 - 0.5))
            .collect();
        let (idx, errors) = select_best(&candidates, &fresh).unwrap();
        prop_assert_eq!(errors.len(), m);
        prop_assert!(errors.iter().all(|&e| errors[idx] <= e));
        prop_assert!(errors[..idx].iter().all(|&e| errors[idx] < e));
        prop_assert_eq!(errors[idx], evaluate(&candidates[idx], &fresh).unwrap());
    }

    #[test]
    fn packings_carry_a_valid_certificate(seed in any::<u64>(), m in 2usize..20) {
        let p = make_packing(200, 0.3, m, Seed(seed), 1000).unwrap();
        let mut worst: f64 = 0.0;
        for (i, a) in p.vectors.iter().enumerate() {
            prop_assert!((norm(a.as_slice()) - 1.0).abs() <= 1e-12);
            for b in &p.vectors[i + 1..] {
                worst = worst.max(dot(a.as_slice(), b.as_slice()).abs());
            }
        }
        prop_assert_eq!(worst, p.max_abs_inner);
        prop_assert_eq!(worst, max_abs_inner(&p.vectors));
        prop_assert!(worst < p.threshold);
        prop_assert!((p.threshold - 200f64.powf(-0.5 + 0.3)).abs() < 1e-12);
    }

    #[test]
    fn distinguisher_decision_follows_threshold(seed in any::<u64>(), c in 0.0f64..1.0) {
        let spec = random_problem(20, 0.8, 0.2, Seed(seed)).unwrap();
        let data = generate(&spec, 300).unwrap();
        let v = distinguish(&data, 0.2, c).unwrap();
        prop_assert_eq!(v.planted, v.statistic > v.threshold);
        let chow = data.chow_vector();
        prop_assert!((v.statistic - dot(&chow, &chow)).abs() <= 1e-12 * v.statistic.max(1.0));
    }
}
