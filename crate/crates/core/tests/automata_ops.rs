mod common;

use proptest::prelude::*;

use lstar_rnn::automata::*;
use lstar_rnn::automata::{random_min_dfa, words_up_to, Alphabet};
use lstar_rnn::*;

use common::{binary, ones, ten_star};

fn brute_disagreement(a: &Dfa, b: &Dfa, max_len: usize) -> Option<Word> {
    words_up_to(a.alphabet().len(), max_len).find(|w| a.accepts(w).unwrap() != b.accepts(w).unwrap())
}

#[test]
fn minimize_keeps_minimal_dfa() {
    let m = ones().minimize();
    assert_eq!(m.n_states(), 2);
    assert_eq!(shortest_disagreement(&m, &ones()).unwrap(), None);
}

#[test]
fn minimize_merges_duplicate_sinks() {
    // 0 -0-> 1, 0 -1-> 2; 1 and 2 are identical accepting sinks
    let d = Dfa::new(binary(), 3, 0, [1, 2], vec![vec![1, 2], vec![1, 1], vec![2, 2]]).unwrap();
    let m = d.minimize();
    assert_eq!(m.n_states(), d.n_states() - 1);
    assert_eq!(shortest_disagreement(&m, &d).unwrap(), None);
}

#[test]
fn minimize_drops_unreachable_and_is_canonical() {
    let d = Dfa::new(
        binary(),
        4,
        3,
        [3],
        vec![vec![0, 0], vec![0, 1], vec![2, 2], vec![0, 3]],
    )
    .unwrap();
    let m = d.minimize();
    // 3 -> new 0, 0 -> new 1
    assert_eq!(m, ones());
}

#[test]
fn minimize_random_minimal_dfa() {
    let alphabet = Alphabet::from_chars("abc").unwrap();
    let d = random_min_dfa(10, &alphabet, 7).unwrap();
    assert_eq!(d.n_states(), 10);
    assert_eq!(d.minimize().n_states(), 10);
}

#[test]
fn disagreement_examples() {
    assert_eq!(shortest_disagreement(&ones(), &ones()).unwrap(), None);
    // brute force: ε agrees, "0" rejected by both, "1" disagrees
    assert_eq!(brute_disagreement(&ones(), &ten_star(), 4), Some(vec![1]));
    assert_eq!(shortest_disagreement(&ones(), &ten_star()).unwrap(), Some(vec![1]));
    let acc = Dfa::constant(binary(), true);
    let rej = Dfa::constant(binary(), false);
    assert_eq!(shortest_disagreement(&acc, &rej).unwrap(), Some(vec![]));
}

#[test]
fn disagreement_alphabet_mismatch() {
    let other = Dfa::constant(Alphabet::from_chars("ab").unwrap(), true);
    assert!(matches!(
        shortest_disagreement(&ones(), &other),
        Err(Error::AlphabetMismatch)
    ));
}

fn arb_dfa(max_states: usize, k: usize) -> impl Strategy<Value = Dfa> {
    (1..=max_states).prop_flat_map(move |n| {
        (
            prop::collection::vec(0..n, n * k),
            prop::collection::vec(any::<bool>(), n),
            0..n,
        )
            .prop_map(move |(delta, acc, init)| {
                let alphabet = Alphabet::new((0..k).map(|i| i.to_string())).unwrap();
                let rows = delta.chunks(k).map(<[usize]>::to_vec).collect();
                let accepting = acc.iter().enumerate().filter(|(_, &a)| a).map(|(q, _)| q);
                Dfa::new(alphabet, n, init, accepting, rows).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn minimize_preserves_language(d in arb_dfa(7, 2)) {
        let m = d.minimize();
        prop_assert!(m.n_states() <= d.n_states());
        for w in words_up_to(2, 12) {
            prop_assert_eq!(m.accepts(&w).unwrap(), d.accepts(&w).unwrap());
        }
        prop_assert_eq!(m.minimize(), m.clone());
    }

    #[test]
    fn minimize_preserves_language_k3(d in arb_dfa(6, 3)) {
        let m = d.minimize();
        for w in words_up_to(3, 8) {
            prop_assert_eq!(m.accepts(&w).unwrap(), d.accepts(&w).unwrap());
        }
    }

    #[test]
    fn disagreement_is_shortest(a in arb_dfa(5, 2), b in arb_dfa(5, 2)) {
        let b = Dfa::new(a.alphabet().clone(), b.n_states(), b.initial(),
            b.accepting_states(), b.delta_rows().map(<[usize]>::to_vec).collect()).unwrap();
        let found = shortest_disagreement(&a, &b).unwrap();
        // product has at most 25 states, so a disagreement (if any) is shorter than 25
        prop_assert_eq!(found.clone(), brute_disagreement(&a, &b, 12));
        if let Some(w) = &found {
            prop_assert_ne!(a.accepts(w).unwrap(), b.accepts(w).unwrap());
        }
        let none = found.is_none();
        let none_min = shortest_disagreement(&a.minimize(), &b.minimize()).unwrap().is_none();
        prop_assert_eq!(none, none_min);
    }
}
