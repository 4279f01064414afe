use std::collections::HashSet;

use ganaug::data::{
    build_training_set, flip, generate_phantom_dataset, histogram_normalize, normalize_to_range,
    sample_nested_subsets, split_dataset, FlipChoice, Label, Patch, PatchPool, PhantomConfig, Source,
    TrainingSources,
};
use ganaug::eval::{confusion_from_predictions, f1_score, ConfusionCounts, StrategyId};
use ganaug::gan::checkerboard_score_pixels;
use ganaug::models::{Checkpoint, DiscriminatorSpec, Model, ModelSpec, TrainingMeta};
use proptest::prelude::*;

fn pool_of(n_mass: usize, n_normal: usize, source: Source) -> PatchPool {
    let patches = (0..n_mass + n_normal)
        .map(|i| {
            let label = if i < n_mass { Label::Mass } else { Label::Normal };
            Patch::new(format!("{source:?}{label:?}{i}"), label, source, 32, vec![i as f32 / (n_mass + n_normal) as f32; 1024]).unwrap()
        })
        .collect();
    PatchPool::new(patches).unwrap()
}

fn flips() -> impl Strategy<Value = FlipChoice> {
    (any::<bool>(), any::<bool>()).prop_map(|(horizontal, vertical)| FlipChoice { horizontal, vertical })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn histogram_output_lies_in_unit_interval(raw in prop::collection::vec(-1e6f64..1e6, 2..300)) {
        prop_assume!(raw.iter().any(|&v| v != raw[0]));
        let out = histogram_normalize(&raw).unwrap();
        prop_assert_eq!(out.len(), raw.len());
        prop_assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn normalize_hits_the_requested_range(
        raw in prop::collection::vec(-1e3f64..1e3, 2..200),
        lo in -5.0f64..5.0,
        width in 0.1f64..10.0,
    ) {
        prop_assume!(raw.iter().any(|&v| v != raw[0]));
        let hi = lo + width;
        let out = normalize_to_range(&raw, lo, hi).unwrap();
        prop_assert!(out.iter().all(|&v| v >= lo && v <= hi));
        let imin = raw.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let imax = raw.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        prop_assert_eq!(out[imin], lo);
        prop_assert_eq!(out[imax], hi);
    }

    #[test]
    fn split_is_a_partition(n in 3usize..400, seed in any::<u64>(), a in 0.05f64..0.9, b in 0.01f64..0.5) {
        prop_assume!(a + b < 0.99);
        let pool = pool_of(n / 3, n - n / 3, Source::Real);
        let s = split_dataset(&pool, [a, b, 1.0 - a - b], seed).unwrap();
        prop_assert_eq!(s.train.len() + s.validation.len() + s.test.len(), n);
        let mut seen = HashSet::new();
        for id in s.train.ids().chain(s.validation.ids()).chain(s.test.ids()) {
            prop_assert!(seen.insert(id.to_owned()));
        }
        prop_assert_eq!(s, split_dataset(&pool, [a, b, 1.0 - a - b], seed).unwrap());
    }

    #[test]
    fn subsets_are_nested(
        n in 10usize..200,
        mut sizes in prop::collection::btree_set(1usize..10, 1..5),
        seed in any::<u64>(),
    ) {
        let sizes: Vec<usize> = std::mem::take(&mut sizes).into_iter().collect();
        let pool = pool_of(n, 0, Source::Real);
        let ladder = sample_nested_subsets(&pool, &sizes, seed).unwrap();
        for w in sizes.windows(2) {
            let small = ladder.subset(w[0]).unwrap();
            let large = ladder.subset(w[1]).unwrap();
            prop_assert_eq!(small, &large[..w[0]]);
        }
        for &k in &sizes {
            let ids = ladder.subset(k).unwrap();
            prop_assert_eq!(ids.iter().collect::<HashSet<_>>().len(), k);
        }
    }

    #[test]
    fn flips_are_involutions(px in prop::collection::vec(0.0f32..1.0, 1024), choice in flips()) {
        let p = Patch::new("p", Label::Mass, Source::Synthetic, 32, px).unwrap();
        let once = flip(&p, choice);
        prop_assert_eq!(&flip(&once, choice), &p);
        prop_assert_eq!((once.id(), once.label(), once.source()), (p.id(), p.label(), p.source()));
        let mut a = once.pixels().to_vec();
        let mut b = p.pixels().to_vec();
        a.sort_by(f32::total_cmp);
        b.sort_by(f32::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn f1_agrees_with_its_definition(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
        let s = f1_score(&ConfusionCounts { tp, fp, tn, fn_ });
        prop_assert!((0.0..=1.0).contains(&s.f1));
        let expected = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
        prop_assert!((s.f1 - expected).abs() < 1e-12);
        prop_assert!(s.f1 <= s.precision.max(s.recall) + 1e-12);
        prop_assert!(s.f1 >= s.precision.min(s.recall) - 1e-12);
    }

    #[test]
    fn confusion_counts_every_prediction(
        rows in prop::collection::vec((0.0f64..1.0, any::<bool>()), 0..200),
        threshold in 0.0f64..1.0,
    ) {
        let (probs, ys): (Vec<f64>, Vec<bool>) = rows.into_iter().unzip();
        let c = confusion_from_predictions(&probs, &ys, threshold);
        prop_assert_eq!(c.total() as usize, probs.len());
        prop_assert_eq!((c.tp + c.fn_) as usize, ys.iter().filter(|&&y| y).count());
    }

    #[test]
    fn checkerboard_score_is_a_fraction(half in 1usize..9, px in prop::collection::vec(-1.0f32..1.0, 256)) {
        let side = 2 * half;
        let s = checkerboard_score_pixels(&px[..side * side], side).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn training_set_has_the_requested_composition(
        k in 1usize..20,
        ratio in 1usize..5,
        multiplier in 0.5f64..2.0,
        strategy in prop::sample::select(StrategyId::ALL.to_vec()),
        seed in any::<u64>(),
    ) {
        let positives = pool_of(20, 0, Source::Real);
        let negatives = pool_of(0, 100, Source::Real);
        let synthetic = pool_of(40, 0, Source::Synthetic);
        let ladder = sample_nested_subsets(&positives, &[k], seed).unwrap();
        let sources = TrainingSources { positives: &positives, ladder: &ladder, negatives: &negatives, synthetic: Some(&synthetic) };
        let set = build_training_set(k, sources, strategy, ratio, multiplier).unwrap();
        let n_syn = if strategy.uses_synthetic() { (multiplier * k as f64).round() as usize } else { 0 };
        prop_assert_eq!(set.pool.count(Label::Normal), ratio * k);
        prop_assert_eq!(set.pool.count(Label::Mass), k + n_syn);
        prop_assert_eq!(set.pool.filter(|p| p.source() == Source::Synthetic).len(), n_syn);
        prop_assert_eq!((set.n_real_positive, set.n_synthetic, set.n_negative), (k, n_syn, ratio * k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn phantom_pixels_lie_in_unit_interval(seed in any::<u64>(), n_pos in 0usize..6, n_neg in 0usize..6) {
        let cfg = PhantomConfig { n_positive: n_pos, n_negative: n_neg, seed, ..Default::default() };
        let pool = generate_phantom_dataset(&cfg).unwrap();
        prop_assert_eq!(pool.len(), n_pos + n_neg);
        prop_assert!(pool.iter().all(|p| p.pixels().iter().all(|v| (0.0..=1.0).contains(v))));
    }

    #[test]
    fn checkpoints_round_trip(seed in any::<u64>(), epoch in 0usize..1000, value in -1e6f64..1e6) {
        let spec = ModelSpec::Discriminator(DiscriminatorSpec { base_channels: 8, ..DiscriminatorSpec::new(16) });
        let mut meta = TrainingMeta { epoch, seed, ..Default::default() };
        meta.summary.insert("loss".into(), value);
        let ck = Checkpoint { model: Model::new(spec, seed).unwrap(), meta };
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert_eq!(back, ck);
    }
}
