mod common;

use std::cmp::Ordering;

use lstar_rnn::automata::*;
use lstar_rnn::Error;

use common::{binary, ones, ten_star};

#[test]
fn classify_ones() {
    let d = ones();
    let a = d.alphabet().clone();
    assert_eq!(d.classify(&a.parse("111").unwrap()).unwrap(), Label::Acc);
    assert_eq!(d.classify(&[]).unwrap(), Label::Acc);
    assert_eq!(d.classify(&a.parse("10").unwrap()).unwrap(), Label::Rej);
}

#[test]
fn classify_rejects_bad_symbol() {
    assert!(matches!(
        ones().classify(&[0, 2]),
        Err(Error::InvalidWord { symbol: 2, size: 2 })
    ));
}

#[test]
fn alphabet_validation() {
    assert!(Alphabet::new(Vec::<String>::new()).is_err());
    assert!(Alphabet::new(["a", "a"]).is_err());
    assert!(Alphabet::new(["a", ""]).is_err());
    let multi = Alphabet::new(["foo", "bar"]).unwrap();
    let w = multi.parse("bar foo bar").unwrap();
    assert_eq!(w, vec![1, 0, 1]);
    assert_eq!(multi.render(&w), "bar foo bar");
    assert!(binary().parse("012").is_err());
}

#[test]
fn new_validates() {
    let a = binary();
    assert!(Dfa::new(a.clone(), 0, 0, [], vec![]).is_err());
    assert!(Dfa::new(a.clone(), 1, 1, [], vec![vec![0, 0]]).is_err());
    assert!(Dfa::new(a.clone(), 1, 0, [1], vec![vec![0, 0]]).is_err());
    assert!(Dfa::new(a.clone(), 1, 0, [], vec![vec![0, 1]]).is_err());
    assert!(Dfa::new(a, 1, 0, [], vec![vec![0]]).is_err());
}

#[test]
fn json_round_trip_and_field_order() {
    let d = ten_star();
    let text = serde_json::to_string(&d).unwrap();
    assert_eq!(
        text,
        r#"{"alphabet":["0","1"],"n_states":3,"initial":0,"accepting":[0],"delta":[[2,1],[0,2],[2,2]]}"#
    );
    assert_eq!(Dfa::from_json(&d.to_json().unwrap()).unwrap(), d);
    assert!(Dfa::from_json(r#"{"alphabet":["0"],"n_states":1,"initial":0,"accepting":[],"delta":[[3]]}"#).is_err());
}

#[test]
fn word_enumeration_is_shortlex() {
    let words: Vec<Word> = words_up_to(2, 2).collect();
    assert_eq!(
        words,
        vec![vec![], vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
    );
    assert!(words.windows(2).all(|p| shortlex(&p[0], &p[1]) == Ordering::Less));
}
