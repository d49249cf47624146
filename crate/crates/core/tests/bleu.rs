mod common;

use medload::difficulty::pseudo_bleu;

#[test]
fn matches_reference_implementation() {
    let rows = common::bleu_fixture();
    assert_eq!(rows.len(), 50);
    for (r, h, expected) in rows {
        let got = pseudo_bleu(&common::words(&r), &common::words(&h)).unwrap();
        assert!((got - expected).abs() < 1e-6, "{r:?} / {h:?}: {got} vs {expected}");
    }
}

#[test]
fn identity_and_empty_hypothesis() {
    let r = common::words("a small house stands by the river");
    assert!((pseudo_bleu(&r, &r).unwrap() - 100.0).abs() < 1e-9);
    assert_eq!(pseudo_bleu(&r, &[]).unwrap(), 0.0);
    assert!(pseudo_bleu(&[], &r).is_err());
}

#[test]
fn single_token_identity() {
    assert!((pseudo_bleu(&["ja"], &["ja"]).unwrap() - 100.0).abs() < 1e-9);
}
