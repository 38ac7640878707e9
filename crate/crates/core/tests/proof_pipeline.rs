use std::sync::OnceLock;

use mutacyc_core::proof::{
    audit_ledger, enumerate_weight2_rank4, prove_rank4_weight2, ProofConfig, ProofLedger, Stage,
    Witness,
};
use mutacyc_core::{canonical_form, SearchLimits, Verdict};

fn ledger() -> &'static ProofLedger {
    static LEDGER: OnceLock<ProofLedger> = OnceLock::new();
    LEDGER.get_or_init(|| prove_rank4_weight2(&ProofConfig::default()).expect("proof runs"))
}

#[test]
fn certified_stage_counts() {
    let l = ledger();
    assert_eq!(
        (l.total_raw, l.total_connected, l.total_classes),
        (15625, 15104, 667)
    );
    assert_eq!(l.acyclic_count, 401);
    assert_eq!(l.markov_subquiver_count, 42);
    assert_eq!(l.special_count, 2);
    assert_eq!(l.propagated_nma_count, 2);
    assert_eq!(l.final_ma, 534);
    // Classes without a witness within depth 12 are reported, never guessed.
    assert_eq!(l.final_nma + l.undetermined().len(), 133);
    assert!(l.ensure_complete().is_err() || l.final_nma == 133);
}

#[test]
fn every_witness_audits() {
    audit_ledger(ledger(), SearchLimits::default()).unwrap();
}

#[test]
fn ma_classes_cover_expected_matrix_count() {
    let l = ledger();
    let en = enumerate_weight2_rank4();
    let ma = en
        .connected
        .iter()
        .filter(|q| l.verdict(&canonical_form(q).unwrap()) == Some(Verdict::MutationAcyclic))
        .count();
    assert_eq!(ma, 12082);
}

#[test]
fn torus_and_box_are_initial_nma() {
    let l = ledger();
    let torus = canonical_form(&mutacyc_core::seeds::dreaded_torus()).unwrap();
    let rec = &l.classes[&torus];
    assert_eq!(
        (rec.verdict, rec.stage),
        (Verdict::NonMutationAcyclic, Stage::Special)
    );
    assert_eq!(rec.witness.as_ref().unwrap().kind(), "exchange-graph");
    let boxq = canonical_form(&mutacyc_core::seeds::nma2()).unwrap();
    assert!(matches!(
        l.classes[&boxq].witness,
        Some(Witness::BoxQuiver { a: 2, b: 2, .. })
    ));
}

#[test]
fn ledger_jsonl_round_trip() {
    let l = ledger();
    let mut buf = Vec::new();
    l.write_jsonl(&mut buf).unwrap();
    assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 667);
    let back = ProofLedger::read_jsonl(&buf[..]).unwrap();
    assert_eq!(&back, l);
}

#[test]
fn shallow_resolution_leaves_classes_open() {
    let cfg = ProofConfig {
        max_resolve_depth: 1,
        ..ProofConfig::default()
    };
    let l = prove_rank4_weight2(&cfg).unwrap();
    assert!(!l.undetermined().is_empty());
    assert!(l.ensure_complete().is_err());
}

#[test]
fn dataset4_counts_and_relabeling_invariance() {
    use mutacyc_core::dataset::{build_dataset4, UndeterminedPolicy};
    use mutacyc_core::Encoding;
    let l = ledger();
    if l.undetermined().is_empty() {
        assert!(build_dataset4(l, UndeterminedPolicy::Reject, Encoding::Upper6).is_ok());
    } else {
        assert!(build_dataset4(l, UndeterminedPolicy::Reject, Encoding::Upper6).is_err());
    }
    let b = build_dataset4(l, UndeterminedPolicy::AsNma, Encoding::Upper6).unwrap();
    assert_eq!(b.dataset.class_counts(), vec![12082, 3022]);
    let mut by_class = std::collections::HashMap::new();
    for i in 0..b.dataset.len() {
        let key = canonical_form(&b.dataset.matrix(i).unwrap()).unwrap();
        let label = b.dataset.labels()[i];
        assert_eq!(*by_class.entry(key).or_insert(label), label);
    }
    assert_eq!(by_class.len(), 667);
}
