mod common;

use std::collections::HashSet;
use std::time::Duration;

use serde_json::Value;

use lstar_rnn::automata::{random_min_dfa, words_up_to};
use lstar_rnn::automata::{shortest_disagreement, Alphabet, Dfa, Symbol, Word};
use lstar_rnn::lstar::*;
use lstar_rnn::{Error, Result};

use common::{binary, ones, ten_star};

fn member_of(d: &Dfa) -> impl FnMut(&[Symbol]) -> Result<bool> + '_ {
    move |w| d.accepts(w)
}

#[test]
fn initial_table_for_ones_is_unclosed_on_zero() {
    // T[ε]=1, T[0]=0, T[1]=1: row("0") matches no row of S={ε}
    let target = ones();
    let t = ObservationTable::new(2, &mut member_of(&target)).unwrap();
    assert_eq!(t.find_unclosed(), Some(vec![0]));
}

#[test]
fn closed_table_for_ones() {
    let target = ones();
    let mut m = member_of(&target);
    let mut t = ObservationTable::new(2, &mut m).unwrap();
    t.add_prefix(vec![0], &mut m).unwrap();
    // row("1") = row(ε); rows of "00","01" = row("0")
    assert_eq!(t.find_unclosed(), None);
    let h = t.make_hypothesis(&binary()).unwrap();
    assert_eq!(h.dfa.n_states(), 2);
    assert_eq!(h.raw_states, 2);
    assert_eq!(shortest_disagreement(&h.dfa, &target).unwrap(), None);
    assert_eq!(h.access[h.dfa.initial()], Vec::<Symbol>::new());
}

#[test]
fn all_true_table_gives_accepting_singleton() {
    let target = Dfa::constant(binary(), true);
    let t = ObservationTable::new(2, &mut member_of(&target)).unwrap();
    assert_eq!(t.find_unclosed(), None);
    let h = t.make_hypothesis(&binary()).unwrap();
    assert_eq!(h.dfa, Dfa::constant(binary(), true));
}

#[test]
fn unclosed_table_cannot_hypothesize() {
    let target = ones();
    let t = ObservationTable::new(2, &mut member_of(&target)).unwrap();
    assert!(matches!(t.make_hypothesis(&binary()), Err(Error::Contract(_))));
}

#[test]
fn counterexample_splits_a_state() {
    // words without "00": ε, "0", "1" are all accepted, so the first
    // hypothesis is the accepting singleton and "00" refutes it
    let no_double_zero = Dfa::new(binary(), 3, 0, [0, 1], vec![vec![1, 0], vec![2, 0], vec![2, 2]]).unwrap();
    let mut m = member_of(&no_double_zero);
    let mut t = ObservationTable::new(2, &mut m).unwrap();
    assert_eq!(t.find_unclosed(), None);
    let h = t.make_hypothesis(&binary()).unwrap();
    assert_eq!(h.dfa, Dfa::constant(binary(), true));
    assert!(t.process_counterexample(&[0, 0], &h, &mut m).unwrap());
    assert_eq!(t.suffixes(), &[vec![], vec![0]]);
    assert!(t.find_unclosed().is_some());
    while let Some(s) = t.find_unclosed() {
        t.add_prefix(s, &mut m).unwrap();
    }
    let next = t.make_hypothesis(&binary()).unwrap();
    assert!(next.dfa.n_states() >= 2);
    assert!(!next.dfa.accepts(&[0, 0]).unwrap());
}

#[test]
fn non_counterexample_falls_back_to_all_suffixes() {
    let target = ones();
    let mut m = member_of(&target);
    let mut t = ObservationTable::new(2, &mut m).unwrap();
    t.add_prefix(vec![0], &mut m).unwrap();
    let h = t.make_hypothesis(&binary()).unwrap();
    // "110" is classified correctly by the exact hypothesis
    assert!(t.process_counterexample(&[1, 1, 0], &h, &mut m).unwrap());
    for e in [vec![], vec![0], vec![1, 0], vec![1, 1, 0]] {
        assert!(t.suffixes().contains(&e));
    }
}

#[test]
fn table_answers_match_teacher() {
    let target = ten_star();
    let mut teacher = DfaTeacher::new(target.clone());
    let out = run(&mut teacher, Limits::default()).unwrap();
    assert!(out.converged);
    for r in &out.log.records {
        if let QueryRecord::Member { input, answer, .. } = r {
            assert_eq!(target.accepts(input).unwrap(), *answer);
        }
    }
}

#[test]
fn learns_ones_exactly() {
    let mut teacher = DfaTeacher::new(ones());
    let out = run(&mut teacher, Limits::default()).unwrap();
    assert!(out.converged);
    assert_eq!(out.dfa, ones());
}

#[test]
fn learns_random_targets_with_increasing_hypotheses() {
    for (seed, k, n) in [(1, 2, 8), (2, 3, 12), (3, 5, 6)] {
        let alphabet = Alphabet::new((0..k).map(|i| format!("s{i}"))).unwrap();
        let target = random_min_dfa(n, &alphabet, seed).unwrap();
        let mut teacher = DfaTeacher::new(target.clone());
        let out = run(&mut teacher, Limits::default()).unwrap();
        assert!(out.converged);
        assert_eq!(shortest_disagreement(&out.dfa, &target).unwrap(), None);
        assert_eq!(out.dfa.n_states(), n);
        let sizes: Vec<usize> = out.log.hypotheses().map(Dfa::n_states).collect();
        assert!(sizes.windows(2).all(|p| p[0] < p[1]), "{sizes:?}");
        assert!(sizes.len() <= n);
        for h in out.log.hypotheses() {
            assert_eq!(h.minimize().n_states(), h.n_states());
        }
    }
}

/// Claims the ever-longer word 0^k is a counterexample, true or not.
struct Stubborn {
    alphabet: Alphabet,
    k: usize,
}

impl Teacher for Stubborn {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    fn membership(&mut self, w: &[Symbol]) -> Result<bool> {
        Ok(w.len() % 2 == 0)
    }
    fn equivalence(&mut self, _: &Dfa) -> Result<Option<Word>> {
        self.k += 1;
        std::thread::sleep(Duration::from_millis(2));
        Ok(Some(vec![0; self.k]))
    }
}

#[test]
fn timeout_returns_last_hypothesis() {
    let mut teacher = Stubborn {
        alphabet: binary(),
        k: 0,
    };
    let limits = Limits {
        wall_clock: Duration::from_millis(1),
        max_states: usize::MAX,
    };
    let out = run(&mut teacher, limits).unwrap();
    assert!(!out.converged);
    assert_eq!(out.log.hypotheses().last(), Some(&out.dfa));
}

#[test]
fn json_lines_have_expected_keys() {
    let mut teacher = DfaTeacher::new(ones());
    let out = run(&mut teacher, Limits::default()).unwrap();
    let text = out.log.to_json_lines(&binary());
    let mut kinds = HashSet::new();
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let obj = v.as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 4);
        for k in ["kind", "input", "answer", "elapsed_ms"] {
            assert!(obj.contains_key(k));
        }
        kinds.insert(obj["kind"].as_str().unwrap().to_string());
    }
    assert!(kinds.contains("member") && kinds.contains("equiv"));
}

#[test]
fn exact_teacher_needs_at_most_n_equivalence_queries() {
    let target = ten_star();
    let mut teacher = DfaTeacher::new(target.clone());
    let out = run(&mut teacher, Limits::default()).unwrap();
    assert!(out.log.hypotheses().count() <= target.n_states());
    for w in words_up_to(2, 8) {
        assert_eq!(out.dfa.accepts(&w).unwrap(), target.accepts(&w).unwrap());
    }
}
