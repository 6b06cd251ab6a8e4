mod common;

use std::time::Instant;

use lstar_rnn::automata::{Dfa, Symbol};
use lstar_rnn::lstar::QueryRecord;
use lstar_rnn::lstar::{QueryLog, Teacher};
use lstar_rnn::rnn::gru_from_dfa;
use lstar_rnn::teacher::*;
use lstar_rnn::Error;

use common::{binary, ones, ten_star};

#[test]
fn separating_suffixes() {
    let d = ones();
    let acc = d.initial();
    let sink = d.next(acc, 0);
    assert_eq!(separating_suffix(&d, acc, sink).unwrap(), Vec::<Symbol>::new());
    let t = ten_star();
    let after_one = t.next(t.initial(), 1);
    // initial accepts, after "1" rejects
    assert_eq!(
        separating_suffix(&t, t.initial(), after_one).unwrap(),
        Vec::<Symbol>::new()
    );
    let sink = t.next(t.initial(), 0);
    assert_eq!(separating_suffix(&t, after_one, sink).unwrap(), vec![0]);
    assert!(separating_suffix(&t, 0, 0).is_err());
    let redundant = Dfa::new(binary(), 2, 0, [0, 1], vec![vec![1, 1], vec![0, 0]]).unwrap();
    assert!(matches!(separating_suffix(&redundant, 0, 1), Err(Error::Contract(_))));
}

#[test]
fn membership_is_the_network() {
    let net = gru_from_dfa(&ones()).unwrap();
    let mut t = RnnTeacher::new(&net, TeacherConfig::default()).unwrap();
    assert!(t.membership(&[1, 1, 1, 1]).unwrap());
    assert!(!t.membership(&[1, 0]).unwrap());
    assert_eq!(
        t.membership(&[]).unwrap(),
        net.classify_state(&net.initial_state()).unwrap().is_acc()
    );
    assert!(t.membership(&[2]).is_err());
}

#[test]
fn classification_conflict_on_one_state_hypothesis() {
    let net = gru_from_dfa(&ones()).unwrap();
    let mut t = RnnTeacher::new(&net, TeacherConfig::default()).unwrap();
    let all = Dfa::constant(binary(), true);
    assert_eq!(t.parallel_explore(&all, None).unwrap(), Verdict::Reject(vec![0]));
    assert_eq!(t.partitioning().leaf_count(), 1);
}

#[test]
fn constant_network_accepted_without_refinement() {
    let constant = Dfa::constant(binary(), false);
    let net = gru_from_dfa(&constant).unwrap();
    let mut t = RnnTeacher::new(&net, TeacherConfig::default()).unwrap();
    assert_eq!(t.parallel_explore(&constant, None).unwrap(), Verdict::Accept);
    assert_eq!(t.equivalence(&constant).unwrap(), None);
    assert!(t.refinements().is_empty());
    assert!(!t.exhausted());
}

#[test]
fn clustering_conflict_refines_then_accepts() {
    let target = ten_star();
    let net = gru_from_dfa(&target).unwrap();
    let mut t = RnnTeacher::new(
        &net,
        TeacherConfig {
            initial_depth: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(t.parallel_explore(&target, None).unwrap(), Verdict::RestartExploration);
    let first = &t.refinements()[0];
    assert_eq!(first.kind, RefinementKind::Aggressive);
    assert_eq!(first.leaves_after - first.leaves_before, 7);
    assert_eq!(t.equivalence(&target).unwrap(), None);
    let mut log = QueryLog::default();
    log.records.push(QueryRecord::Equiv {
        hypothesis: target.clone(),
        counterexample: None,
        elapsed_ms: 0.0,
    });
    let report = audit(&net, &log, t.refinements()).unwrap();
    assert!(report.is_clean(), "{report:?}");
    assert!(report.refinements_checked >= 1);
    // leaf growth: 2^d - 1 first, then one per svm split
    let mut leaves = 1;
    for r in t.refinements() {
        assert_eq!(r.leaves_before, leaves);
        match r.kind {
            RefinementKind::Aggressive if leaves == 1 => assert_eq!(r.leaves_after, 8),
            RefinementKind::Svm => assert_eq!(r.leaves_after, leaves + 1),
            _ => {}
        }
        leaves = r.leaves_after;
    }
}

#[test]
fn starting_samples_are_checked_first() {
    let net = gru_from_dfa(&ones()).unwrap();
    let samples = starting_samples(&net, &[vec![1, 1], vec![1], vec![0, 1], vec![0]]).unwrap();
    assert_eq!(samples, vec![vec![0], vec![1]]);
    let cfg = TeacherConfig {
        starting_samples: samples,
        ..Default::default()
    };
    let mut t = RnnTeacher::new(&net, cfg).unwrap();
    let none = Dfa::constant(binary(), false);
    assert_eq!(t.equivalence(&none).unwrap(), Some(vec![1]));
    assert_eq!(t.queries()[0].verdict, "counterexample");
    let sampled = sampled_starting_samples(&net, 6, 0).unwrap();
    assert_eq!(sampled, vec![vec![0], Vec::new()]);
}

#[test]
fn extraction_recovers_faithful_networks() {
    for target in [ones(), ten_star()] {
        let net = gru_from_dfa(&target).unwrap();
        let cfg = ExtractionConfig {
            teacher: TeacherConfig {
                starting_samples: sampled_starting_samples(&net, 4, 0).unwrap(),
                ..Default::default()
            },
            ..Default::default()
        };
        let ex = extract(&net, &cfg).unwrap();
        assert!(ex.converged);
        assert_eq!(
            lstar_rnn::automata::shortest_disagreement(&ex.dfa, &target).unwrap(),
            None
        );
        assert!(audit(&net, &ex.log, &ex.refinements).unwrap().is_clean());
        let json = ex.report.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let q = &v["equivalence_queries"][0];
        for key in [
            "hypothesis_size",
            "verdict",
            "counterexample",
            "refinements",
            "elapsed_ms",
            "leaf_count",
        ] {
            assert!(q.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn audit_flags_fabricated_counterexample() {
    let net = gru_from_dfa(&ones()).unwrap();
    let mut log = QueryLog::default();
    log.records.push(QueryRecord::Equiv {
        hypothesis: ones(),
        counterexample: Some(vec![1, 1]),
        elapsed_ms: 0.0,
    });
    let fake = RefinementEvent {
        kind: RefinementKind::Svm,
        first: vec![1],
        second: vec![1, 1],
        suffix: vec![],
        leaves_before: 1,
        leaves_after: 2,
        separated: 1,
        perfect: Some(true),
    };
    let report = audit(&net, &log, &[fake]).unwrap();
    assert_eq!(report.violations.len(), 2);
}

#[test]
fn timeout_is_flagged() {
    let target = ten_star();
    let net = gru_from_dfa(&target).unwrap();
    let mut t = RnnTeacher::new(&net, TeacherConfig::default()).unwrap();
    t.set_deadline(Some(Instant::now()));
    assert_eq!(t.equivalence(&target).unwrap(), None);
    assert!(t.exhausted());
    assert_eq!(t.queries()[0].verdict, "timeout");
}
