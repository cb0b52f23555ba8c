use proptest::prelude::*;
use ufet::model::{bin_mask, target_vector};
use ufet::typespace::{assign_negative, expand_ancestors, normalize_label, Granularity, TypeVocabulary, OTHER};

fn vocab_from(bins: &[usize]) -> TypeVocabulary {
    let mut sorted = bins.to_vec();
    sorted.sort_unstable();
    TypeVocabulary::new(
        sorted
            .iter()
            .enumerate()
            .map(|(i, &b)| (format!("label {i}"), Granularity::ALL[b]))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn normalisation_is_idempotent(raw in "[A-Za-z_ ]{0,24}") {
        if let Ok(once) = normalize_label(&raw) {
            prop_assert_eq!(normalize_label(&once).unwrap(), once.clone());
            prop_assert!(!once.is_empty());
            prop_assert_eq!(once.to_lowercase(), once);
        }
    }

    #[test]
    fn bins_are_contiguous_and_cover_ids(bins in proptest::collection::vec(0usize..3, 0..30)) {
        let vocab = vocab_from(&bins);
        let mut next = 0;
        for bin in Granularity::ALL {
            let range = vocab.range(bin);
            prop_assert_eq!(range.start, next);
            for id in range.clone() {
                prop_assert_eq!(vocab.bin_of_id(id), bin);
            }
            next = range.end;
        }
        prop_assert_eq!(next, vocab.len());
    }

    #[test]
    fn bin_mask_marks_bins_with_a_positive(bins in proptest::collection::vec(0usize..3, 1..20), picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..5)) {
        let vocab = vocab_from(&bins);
        let labels: Vec<String> = picks.iter().map(|i| vocab.label(i.index(vocab.len())).to_string()).collect();
        let targets = target_vector(&labels, &vocab).unwrap();
        let mask = bin_mask(&targets, &vocab);
        for bin in Granularity::ALL {
            let active = labels.iter().any(|l| vocab.bin_of(l).unwrap() == bin);
            for id in vocab.range(bin) {
                prop_assert_eq!(mask[id], active);
            }
        }
    }

    #[test]
    fn ancestors_are_prefix_closed(segments in proptest::collection::vec("[a-z_]{1,6}", 1..5)) {
        let path = format!("/{}", segments.join("/"));
        let set = expand_ancestors(&path).unwrap();
        prop_assert_eq!(set.len(), segments.len());
        for p in &set {
            prop_assert!(path.starts_with(p.as_str()));
            if let Some(i) = p.rfind('/').filter(|&i| i > 0) {
                prop_assert!(set.contains(&p[..i]));
            }
        }
    }
}

#[test]
fn empty_ontology_set_becomes_other() {
    let out = assign_negative(Default::default());
    assert_eq!(out.into_iter().collect::<Vec<_>>(), vec![OTHER.to_string()]);
}

#[test]
fn vocabulary_hash_tracks_content() {
    let a = vocab_from(&[0, 1, 2]);
    let b = vocab_from(&[0, 1, 2]);
    let c = vocab_from(&[0, 1, 1]);
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
}
