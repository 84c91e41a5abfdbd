use pseudoclust::eval::{
    embedding_distance, nmi, normalized_embedding_distance, paired_ttest, EmbeddingSet,
    PermutationPlan,
};
use pseudoclust::synth::gaussian_blobs;
use proptest::prelude::*;

fn labelings() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (1usize..60).prop_flat_map(|n| (prop::collection::vec(0u8..5, n), prop::collection::vec(0u8..4, n)))
}

fn embedding_set() -> impl Strategy<Value = EmbeddingSet> {
    (2usize..25, 1usize..4).prop_flat_map(|(n, d)| {
        (prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n), prop::collection::vec(0usize..3, n))
            .prop_map(move |(v, l)| EmbeddingSet::new((0..n as u64).collect(), v, l, "p").unwrap())
    })
}

proptest! {
    #[test]
    fn nmi_symmetric_bounded_relabel_invariant((a, b) in labelings(), shift in 1u8..5) {
        let ab = nmi(&a, &b).unwrap();
        let ba = nmi(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        let renamed: Vec<u8> = a.iter().map(|x| (x + shift) % 5 + 10).collect();
        prop_assert!((nmi(&renamed, &b).unwrap() - ab).abs() < 1e-12);
    }

    #[test]
    fn ed_translation_and_scaling(set in embedding_set(), offset in -5.0f64..5.0, scale in 0.1f64..10.0) {
        let base = embedding_distance(&set);
        let moved = EmbeddingSet { vectors: set.vectors.iter().map(|v| v.iter().map(|x| x + offset).collect()).collect(), ..set.clone() };
        prop_assert!((embedding_distance(&moved) - base).abs() < 1e-9 * (1.0 + base));
        let scaled = EmbeddingSet { vectors: set.vectors.iter().map(|v| v.iter().map(|x| x * scale).collect()).collect(), ..set.clone() };
        prop_assert!((embedding_distance(&scaled) - scale * base).abs() < 1e-9 * (1.0 + scale * base));
    }

    #[test]
    fn ned_scale_invariant_and_p_bounded(set in embedding_set(), scale in 0.1f64..10.0, seed in any::<u64>()) {
        let plan = PermutationPlan { repetitions: 50, seed };
        let a = normalized_embedding_distance(&set, &plan).unwrap();
        let scaled = EmbeddingSet { vectors: set.vectors.iter().map(|v| v.iter().map(|x| x * scale).collect()).collect(), ..set.clone() };
        let b = normalized_embedding_distance(&scaled, &plan).unwrap();
        prop_assert!((a.ned - b.ned).abs() < 1e-9);
        prop_assert!(a.p_value >= 1.0 / 51.0 && a.p_value <= 1.0);
        prop_assert_eq!(normalized_embedding_distance(&set, &plan).unwrap(), a);
    }

    #[test]
    fn t_statistic_antisymmetric(pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..20)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ab = paired_ttest(&a, &b, 3).unwrap();
        let ba = paired_ttest(&b, &a, 3).unwrap();
        if ab.t.is_finite() {
            prop_assert!((ab.t + ba.t).abs() < 1e-9 * (1.0 + ab.t.abs()));
        } else {
            prop_assert_eq!(ab.t, -ba.t);
        }
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
        prop_assert!(ab.p_corrected >= ab.p && ab.p_corrected <= 1.0);
    }
}

#[test]
fn permuted_labels_center_ned_at_one() {
    let (points, labels) = gaussian_blobs(3, 40, 2, 4.0, 1.0, 2);
    let mut neds = Vec::new();
    for seed in 0..100u64 {
        let mut shuffled = labels.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut pseudoclust::seed::rng_for(seed, &[99]));
        let set = EmbeddingSet::new((0..120).collect(), points.clone(), shuffled, "perm").unwrap();
        let r = normalized_embedding_distance(&set, &PermutationPlan { repetitions: 100, seed }).unwrap();
        neds.push(r.ned);
    }
    let mean = neds.iter().sum::<f64>() / neds.len() as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean NED {mean}");
}
