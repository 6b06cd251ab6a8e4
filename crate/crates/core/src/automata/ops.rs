use std::collections::{HashMap, VecDeque};

use super::{Dfa, Symbol, Word};
use crate::{Error, Result};

impl Dfa {
    /// Language-equivalent automaton with the fewest states, numbered in BFS
    /// order from the initial state (symbols visited in index order).
    pub fn minimize(&self) -> Dfa {
        let reach = self.canonical();
        let k = reach.alphabet.len();
        let n = reach.n_states();

        // Moore refinement starting from the accepting/rejecting split.
        let mut class: Vec<usize> = reach.accepting.iter().map(|&a| usize::from(a)).collect();
        let mut n_classes = 0;
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = Vec::with_capacity(n);
            for q in 0..n {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                sig.extend((0..k).map(|a| class[reach.next(q, a)]));
                let fresh = ids.len();
                next.push(*ids.entry(sig).or_insert(fresh));
            }
            let count = ids.len();
            class = next;
            if count == n_classes {
                break;
            }
            n_classes = count;
        }

        let mut accepting = vec![false; n_classes];
        let mut delta = vec![0; n_classes * k];
        for q in 0..n {
            let c = class[q];
            accepting[c] = reach.accepting[q];
            for a in 0..k {
                delta[c * k + a] = class[reach.next(q, a)];
            }
        }
        Dfa::from_parts(reach.alphabet.clone(), class[reach.initial], accepting, delta).canonical()
    }

    /// Drops unreachable states and renumbers the rest in BFS order.
    fn canonical(&self) -> Dfa {
        let k = self.alphabet.len();
        let mut order = Vec::new();
        let mut index = vec![usize::MAX; self.n_states()];
        let mut queue = VecDeque::new();
        index[self.initial] = 0;
        order.push(self.initial);
        queue.push_back(self.initial);
        while let Some(q) = queue.pop_front() {
            for a in 0..k {
                let t = self.next(q, a);
                if index[t] == usize::MAX {
                    index[t] = order.len();
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        let accepting = order.iter().map(|&q| self.accepting[q]).collect();
        let delta = order
            .iter()
            .flat_map(|&q| (0..k).map(move |a| (q, a)))
            .map(|(q, a)| index[self.next(q, a)])
            .collect();
        Dfa::from_parts(self.alphabet.clone(), 0, accepting, delta)
    }
}

/// Shortest (then lexicographically least) word `s` such that reading `s` from
/// `qa` in `a` and from `qb` in `b` ends in states of different acceptance.
///
/// Explores the product lazily by BFS; `None` means the two states are
/// language-equivalent. The alphabets are assumed to agree.
pub fn shortest_separating(a: &Dfa, qa: usize, b: &Dfa, qb: usize) -> Option<Word> {
    let k = a.alphabet.len();
    // (state pair, parent node, symbol leading here)
    let mut nodes: Vec<((usize, usize), usize, Symbol)> = vec![((qa, qb), usize::MAX, 0)];
    let mut seen: HashMap<(usize, usize), ()> = HashMap::from([((qa, qb), ())]);
    let mut head = 0;
    while head < nodes.len() {
        let ((p, q), _, _) = nodes[head];
        if a.is_accepting(p) != b.is_accepting(q) {
            let mut word = Vec::new();
            let mut at = head;
            while nodes[at].1 != usize::MAX {
                word.push(nodes[at].2);
                at = nodes[at].1;
            }
            word.reverse();
            return Some(word);
        }
        for sym in 0..k {
            let pair = (a.next(p, sym), b.next(q, sym));
            if seen.insert(pair, ()).is_none() {
                nodes.push((pair, head, sym));
            }
        }
        head += 1;
    }
    None
}

/// Shortest word on which `a` and `b` disagree, `None` if their languages are equal.
pub fn shortest_disagreement(a: &Dfa, b: &Dfa) -> Result<Option<Word>> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    Ok(shortest_separating(a, a.initial, b, b.initial))
}
