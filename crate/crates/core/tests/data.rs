use std::collections::HashSet;

use ganaug::data::{
    build_training_set, extract_patches, flip, flip_augment, generate_phantom_dataset,
    histogram_normalize, normalize_to_range, sample_nested_subsets, split_dataset, AnnotatedImage,
    FlipChoice, Label, Patch, PatchPool, PhantomConfig, Rect, Source, TrainingSources,
};
use ganaug::eval::StrategyId;
use ganaug::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pool(prefix: &str, label: Label, source: Source, n: usize) -> PatchPool {
    PatchPool::new(
        (0..n)
            .map(|i| {
                let v = (i % 7) as f32 / 7.0;
                Patch::new(format!("{prefix}{i:05}"), label, source, 32, vec![v; 1024]).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// Percentile by linear interpolation between closest ranks, written out
/// independently of the library.
fn oracle_percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[test]
fn histogram_normalize_examples() {
    assert_eq!(histogram_normalize(&[7.0; 64]).unwrap(), vec![0.0; 64]);
    let two: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
    assert_eq!(histogram_normalize(&two).unwrap(), two);
    assert!(matches!(histogram_normalize(&[]), Err(Error::InvalidInput(_))));

    let ramp: Vec<f64> = (0..1000).map(|i| i as f64).collect();
    let (p1, p99) = (oracle_percentile(&ramp, 1.0), oracle_percentile(&ramp, 99.0));
    assert!((p1 - 9.99).abs() < 1e-9 && (p99 - 989.01).abs() < 1e-9);
    let out = histogram_normalize(&ramp).unwrap();
    for (v, o) in ramp.iter().zip(&out) {
        let expected = (v.clamp(p1, p99) - p1) / (p99 - p1);
        assert!((o - expected).abs() < 1e-12, "{v}: {o} vs {expected}");
    }
    assert_eq!(out[0], 0.0);
    assert_eq!(out[999], 1.0);
}

#[test]
fn normalize_to_range_examples() {
    let out = normalize_to_range(&[0.0, 0.5, 1.0], -1.0, 1.0).unwrap();
    assert_eq!(out[1], 0.0);
    assert_eq!(normalize_to_range(&[3.0; 4], 0.0, 1.0).unwrap(), vec![0.5; 4]);
    let ramp = normalize_to_range(&[0.0f64, 1.0, 2.0, 3.0], 0.0, 1.0).unwrap();
    for (o, e) in ramp.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]) {
        assert!((o - e).abs() < 1e-15);
    }
    assert!(normalize_to_range(&[1.0], 1.0, 1.0).is_err());
}

#[test]
fn phantom_counts_and_determinism() {
    let cfg = PhantomConfig { n_positive: 0, n_negative: 5, ..Default::default() };
    let p = generate_phantom_dataset(&cfg).unwrap();
    assert_eq!((p.count(Label::Mass), p.count(Label::Normal)), (0, 5));

    let cfg = PhantomConfig { n_positive: 7, n_negative: 9, seed: 42, ..Default::default() };
    assert_eq!(generate_phantom_dataset(&cfg).unwrap(), generate_phantom_dataset(&cfg).unwrap());
    let other = PhantomConfig { seed: 43, ..cfg.clone() };
    assert_ne!(generate_phantom_dataset(&cfg).unwrap(), generate_phantom_dataset(&other).unwrap());
}

#[test]
fn phantom_masses_are_brighter_at_the_centre() {
    let cfg = PhantomConfig {
        n_positive: 200,
        n_negative: 200,
        lesion_contrast_range: [0.2, 0.3],
        seed: 5,
        ..Default::default()
    };
    let p = generate_phantom_dataset(&cfg).unwrap();
    let centre_mean = |label: Label| {
        let s = cfg.image_size;
        let lo = s / 2 - 4;
        let mut sum = 0.0;
        let mut n = 0;
        for patch in p.iter().filter(|x| x.label() == label) {
            for y in lo..lo + 9 {
                for x in lo..lo + 9 {
                    sum += patch.pixels()[y * s + x] as f64;
                    n += 1;
                }
            }
        }
        sum / n as f64
    };
    let (mass, normal) = (centre_mean(Label::Mass), centre_mean(Label::Normal));
    assert!(mass > normal, "mass {mass} vs normal {normal}");
}

#[test]
fn phantom_rejects_bad_configs() {
    let bad = [
        PhantomConfig { image_size: 48, ..Default::default() },
        PhantomConfig { lesion_radius_range: [0.0, 3.0], ..Default::default() },
        PhantomConfig { lesion_radius_range: [5.0, 16.0], ..Default::default() },
        PhantomConfig { lesion_radius_range: [6.0, 5.0], ..Default::default() },
    ];
    for cfg in bad {
        assert!(generate_phantom_dataset(&cfg).is_err(), "{cfg:?}");
    }
    assert!(toml::from_str::<PhantomConfig>("n_positives = 3").is_err());
}

fn flat_image(side: usize, boxes: Vec<Rect>) -> AnnotatedImage {
    AnnotatedImage::new("img", side, side, vec![0.5; side * side], boxes, vec![true; side * side]).unwrap()
}

#[test]
fn extract_examples() {
    let boxes = vec![Rect { x: 10, y: 20, width: 30, height: 30 }, Rect { x: 200, y: 200, width: 50, height: 40 }];
    let p = extract_patches(&flat_image(256, boxes), 64, 0, 1).unwrap();
    assert_eq!((p.count(Label::Mass), p.count(Label::Normal)), (2, 0));

    let full = flat_image(128, vec![Rect { x: 0, y: 0, width: 128, height: 128 }]);
    match extract_patches(&full, 32, 1, 1) {
        Err(Error::Infeasible { requested: 1, found: 0, attempts }) => assert_eq!(attempts, 32 * 32 * 100),
        other => panic!("expected infeasible, got {other:?}"),
    }
    assert!(extract_patches(&flat_image(64, vec![]), 128, 0, 1).is_err());
}

#[test]
fn extract_respects_tissue_mask() {
    let side = 128;
    // tissue only in the left half
    let mask: Vec<bool> = (0..side * side).map(|i| i % side < side / 2).collect();
    let pixels: Vec<f32> = (0..side * side).map(|i| if i % side < side / 2 { 0.8 } else { 0.0 }).collect();
    let image = AnnotatedImage::new("m", side, side, pixels, vec![], mask).unwrap();
    let p = extract_patches(&image, 32, 20, 3).unwrap();
    for patch in p.iter() {
        let dark = patch.pixels().iter().filter(|&&v| v == 0.0).count();
        assert!(dark as f64 <= 0.05 * 1024.0, "{} has {dark} background pixels", patch.id());
    }
    assert_eq!(p, extract_patches(&image, 32, 20, 3).unwrap());
}

#[test]
fn mass_patch_is_centred_and_clamped() {
    let side = 128;
    let pixels: Vec<f32> = (0..side * side).map(|i| i as f32 / (side * side - 1) as f32).collect();
    let boxes = vec![Rect { x: 50, y: 60, width: 10, height: 20 }, Rect { x: 0, y: 0, width: 4, height: 4 }];
    let image = AnnotatedImage::new("c", side, side, pixels.clone(), boxes, vec![true; side * side]).unwrap();
    let p = extract_patches(&image, 32, 0, 0).unwrap();
    // centre (55, 70) → top-left (39, 54)
    assert_eq!(p.patches()[0].pixels()[0], pixels[54 * side + 39]);
    assert_eq!(p.patches()[1].pixels()[0], pixels[0]);
}

#[test]
fn split_examples() {
    let p = pool("x", Label::Mass, Source::Real, 2215);
    let s = split_dataset(&p, [0.60, 0.066, 0.334], 9).unwrap();
    assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (1329, 146, 740));
    assert_eq!(s, split_dataset(&p, [0.60, 0.066, 0.334], 9).unwrap());

    let three = split_dataset(&pool("y", Label::Mass, Source::Real, 3), [1.0 / 3.0; 3], 0).unwrap();
    assert_eq!((three.train.len(), three.validation.len(), three.test.len()), (1, 1, 1));
    assert!(split_dataset(&p, [0.5, 0.2, 0.2], 0).is_err());
    assert!(split_dataset(&p, [1.0, 0.0, 0.0], 0).is_err());
}

#[test]
fn nested_subset_examples() {
    let one = pool("o", Label::Mass, Source::Real, 1);
    assert_eq!(sample_nested_subsets(&one, &[1], 0).unwrap().subset(1).unwrap(), ["o00000".to_owned()]);

    let p = pool("p", Label::Mass, Source::Real, 1329);
    let sizes = [100, 250, 500, 750, 1000, 1300];
    let ladder = sample_nested_subsets(&p, &sizes, 17).unwrap();
    let mut prev: HashSet<&String> = HashSet::new();
    for k in sizes {
        let cur: HashSet<&String> = ladder.subset(k).unwrap().iter().collect();
        assert_eq!(cur.len(), k);
        assert!(prev.is_subset(&cur));
        prev = cur;
    }
    assert!(sample_nested_subsets(&p, &[1330], 0).is_err());
    assert!(sample_nested_subsets(&p, &[10, 10], 0).is_err());
    assert!(sample_nested_subsets(&p, &[20, 10], 0).is_err());
}

#[test]
fn training_set_examples() {
    let positives = pool("pos", Label::Mass, Source::Real, 600);
    let negatives = pool("neg", Label::Normal, Source::Real, 6000);
    let synthetic = pool("syn", Label::Mass, Source::Synthetic, 900);
    let ladder = sample_nested_subsets(&positives, &[100, 500], 1).unwrap();
    let sources = TrainingSources { positives: &positives, ladder: &ladder, negatives: &negatives, synthetic: Some(&synthetic) };

    let gan = build_training_set(100, sources, StrategyId::Gan, 10, 1.5).unwrap();
    assert_eq!((gan.n_real_positive, gan.n_synthetic, gan.n_negative, gan.flip), (100, 150, 1000, false));
    assert_eq!(gan.pool.iter().filter(|p| p.source() == Source::Synthetic).count(), 150);

    let org = build_training_set(500, sources, StrategyId::Org, 10, 1.5).unwrap();
    assert_eq!((org.pool.count(Label::Mass), org.pool.count(Label::Normal), org.flip), (500, 5000, false));

    let org100 = build_training_set(100, sources, StrategyId::Org, 10, 1.5).unwrap();
    let aug100 = build_training_set(100, sources, StrategyId::AugOrg, 10, 1.5).unwrap();
    assert_eq!(org100.pool, aug100.pool);
    assert!(aug100.flip && !org100.flip);

    // the real side of GAN is exactly ORG's, negatives are shared
    let real_ids = |s: &PatchPool| s.iter().filter(|p| p.source() == Source::Real).map(|p| p.id().to_owned()).collect::<Vec<_>>();
    assert_eq!(real_ids(&org100.pool), real_ids(&gan.pool));

    let no_synth = TrainingSources { synthetic: None, ..sources };
    assert!(build_training_set(100, no_synth, StrategyId::Gan, 10, 1.5).is_err());
    assert!(build_training_set(500, sources, StrategyId::Gan, 10, 1.5).is_ok());
    assert!(build_training_set(250, sources, StrategyId::Org, 10, 1.5).is_err());
    let few_neg = pool("few", Label::Normal, Source::Real, 999);
    let short = TrainingSources { negatives: &few_neg, ..sources };
    assert!(build_training_set(100, short, StrategyId::Org, 10, 1.5).is_err());
}

#[test]
fn flip_examples() {
    let px: Vec<f32> = (0..1024).map(|i| i as f32 / 1023.0).collect();
    let p = Patch::new("a", Label::Mass, Source::Synthetic, 32, px).unwrap();
    let h = FlipChoice { horizontal: true, vertical: false };
    assert_eq!(flip(&flip(&p, h), h), p);
    let hp = flip(&p, h);
    assert_eq!(hp.pixels()[0], p.pixels()[31]);
    assert_eq!((hp.label(), hp.source(), hp.id()), (p.label(), p.source(), p.id()));

    let flat = Patch::new("c", Label::Normal, Source::Real, 32, vec![0.25; 1024]).unwrap();
    for (a, b) in [(false, false), (true, false), (false, true), (true, true)] {
        assert_eq!(flip(&flat, FlipChoice { horizontal: a, vertical: b }), flat);
    }
}

#[test]
fn flip_outcomes_are_uniform() {
    let px: Vec<f32> = (0..1024).map(|i| i as f32 / 1023.0).collect();
    let p = Patch::new("a", Label::Mass, Source::Real, 32, px).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut counts = [0usize; 4];
    for _ in 0..10_000 {
        let out = flip_augment(&p, &mut rng);
        let first = out.pixels()[0];
        // the corner value identifies which flips were applied
        let idx = [0, 31, 992, 1023].iter().position(|&i| p.pixels()[i] == first).unwrap();
        counts[idx] += 1;
    }
    for c in counts {
        let f = c as f64 / 10_000.0;
        assert!((f - 0.25).abs() <= 0.02, "{counts:?}");
    }
}
