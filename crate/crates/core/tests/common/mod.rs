#![allow(dead_code)]

use lstar_rnn::{Alphabet, Dfa};

pub fn binary() -> Alphabet {
    Alphabet::from_chars("01").unwrap()
}

/// 1*
pub fn ones() -> Dfa {
    Dfa::new(binary(), 2, 0, [0], vec![vec![1, 0], vec![1, 1]]).unwrap()
}

/// (10)*
pub fn ten_star() -> Dfa {
    Dfa::new(binary(), 3, 0, [0], vec![vec![2, 1], vec![0, 2], vec![2, 2]]).unwrap()
}
