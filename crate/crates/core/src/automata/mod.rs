//! Deterministic finite automata over an explicit alphabet.

mod dot;
mod ops;
mod random;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use ops::{shortest_disagreement, shortest_separating};
pub use random::random_min_dfa;

/// Index of a symbol in its [`Alphabet`].
pub type Symbol = usize;

/// A sequence of symbol indices. The empty word is ε.
pub type Word = Vec<Symbol>;

/// Shortest-then-lexicographic order on words.
pub fn shortlex(a: &[Symbol], b: &[Symbol]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Every word over `size` symbols of length at most `max_len`, in shortlex order.
pub fn words_up_to(size: usize, max_len: usize) -> impl Iterator<Item = Word> {
    (0..=max_len).flat_map(move |len| words_of_length(size, len))
}

/// Every word over `size` symbols of exactly `len` symbols, in lexicographic order.
pub fn words_of_length(size: usize, len: usize) -> impl Iterator<Item = Word> {
    let total = if size == 0 && len > 0 { 0 } else { size.pow(len as u32) };
    (0..total).map(move |mut idx| {
        let mut w = vec![0; len];
        for slot in w.iter_mut().rev() {
            *slot = idx % size;
            idx /= size;
        }
        w
    })
}

/// Ordered set of distinct, non-empty symbol labels.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, Symbol>,
    single_char: bool,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidAlphabet("empty symbol label".into()));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        let single_char = symbols.iter().all(|s| s.chars().count() == 1);
        Ok(Alphabet {
            symbols,
            index,
            single_char,
        })
    }

    /// One symbol per character of `chars`.
    pub fn from_chars(chars: &str) -> Result<Self> {
        Self::new(chars.chars().map(String::from))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, sym: Symbol) -> Option<&str> {
        self.symbols.get(sym).map(String::as_str)
    }

    pub fn symbol(&self, label: &str) -> Option<Symbol> {
        self.index.get(label).copied()
    }

    pub fn check(&self, w: &[Symbol]) -> Result<()> {
        match w.iter().find(|&&s| s >= self.len()) {
            Some(&symbol) => Err(Error::InvalidWord {
                symbol,
                size: self.len(),
            }),
            None => Ok(()),
        }
    }

    /// Parses a word. Single-character alphabets read one symbol per character,
    /// otherwise symbols are whitespace separated.
    pub fn parse(&self, text: &str) -> Result<Word> {
        let lookup = |s: &str| self.symbol(s).ok_or_else(|| Error::UnknownSymbol(s.to_string()));
        if self.single_char {
            let mut buf = [0u8; 4];
            text.chars().map(|c| lookup(c.encode_utf8(&mut buf))).collect()
        } else {
            text.split_whitespace().map(lookup).collect()
        }
    }

    /// Inverse of [`Alphabet::parse`]. Out-of-range symbols render as `?`.
    pub fn render(&self, w: &[Symbol]) -> String {
        let labels = w.iter().map(|&s| self.label(s).unwrap_or("?"));
        if self.single_char {
            labels.collect()
        } else {
            labels.collect::<Vec<_>>().join(" ")
        }
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.symbols).finish()
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(symbols: Vec<String>) -> Result<Self> {
        Alphabet::new(symbols)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

/// Binary classification of a word or state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Acc,
    Rej,
}

impl Label {
    pub fn is_acc(self) -> bool {
        self == Label::Acc
    }
}

impl From<bool> for Label {
    fn from(acc: bool) -> Self {
        if acc {
            Label::Acc
        } else {
            Label::Rej
        }
    }
}

/// A complete deterministic finite automaton.
#[derive(Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: usize,
    accepting: Vec<bool>,
    // row-major: delta[q * |Σ| + a]
    delta: Vec<usize>,
}

impl Dfa {
    pub fn new(
        alphabet: Alphabet,
        n_states: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        delta: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::InvalidDfa("no states".into()));
        }
        if initial >= n_states {
            return Err(Error::InvalidDfa(format!("initial state {initial} out of range")));
        }
        if delta.len() != n_states {
            return Err(Error::InvalidDfa(format!(
                "delta has {} rows for {n_states} states",
                delta.len()
            )));
        }
        let k = alphabet.len();
        let mut flat = Vec::with_capacity(n_states * k);
        for (q, row) in delta.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidDfa(format!(
                    "state {q} has {} transitions, alphabet has {k} symbols",
                    row.len()
                )));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n_states) {
                return Err(Error::InvalidDfa(format!("transition target {t} out of range")));
            }
            flat.extend_from_slice(row);
        }
        let mut acc = vec![false; n_states];
        for q in accepting {
            if q >= n_states {
                return Err(Error::InvalidDfa(format!("accepting state {q} out of range")));
            }
            acc[q] = true;
        }
        Ok(Dfa {
            alphabet,
            initial,
            accepting: acc,
            delta: flat,
        })
    }

    pub(crate) fn from_parts(alphabet: Alphabet, initial: usize, accepting: Vec<bool>, delta: Vec<usize>) -> Self {
        debug_assert_eq!(delta.len(), accepting.len() * alphabet.len());
        Dfa {
            alphabet,
            initial,
            accepting,
            delta,
        }
    }

    /// The one-state automaton accepting everything or nothing.
    pub fn constant(alphabet: Alphabet, accept: bool) -> Self {
        let k = alphabet.len();
        Dfa::from_parts(alphabet, 0, vec![accept], vec![0; k])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepting.iter().enumerate().filter_map(|(q, &a)| a.then_some(q))
    }

    /// δ(q, a).
    pub fn next(&self, q: usize, a: Symbol) -> usize {
        self.delta[q * self.alphabet.len() + a]
    }

    /// δ̂(q, w).
    pub fn run_from(&self, q: usize, w: &[Symbol]) -> Result<usize> {
        self.alphabet.check(w)?;
        Ok(w.iter().fold(q, |q, &a| self.next(q, a)))
    }

    pub fn run(&self, w: &[Symbol]) -> Result<usize> {
        self.run_from(self.initial, w)
    }

    pub fn classify_from(&self, q: usize, w: &[Symbol]) -> Result<Label> {
        Ok(self.accepting[self.run_from(q, w)?].into())
    }

    pub fn classify(&self, w: &[Symbol]) -> Result<Label> {
        self.classify_from(self.initial, w)
    }

    pub fn accepts(&self, w: &[Symbol]) -> Result<bool> {
        Ok(self.classify(w)?.is_acc())
    }

    pub fn complement(&self) -> Dfa {
        let mut d = self.clone();
        d.accepting.iter_mut().for_each(|a| *a = !*a);
        d
    }

    /// Transition rows, one per state.
    pub fn delta_rows(&self) -> impl Iterator<Item = &[usize]> {
        self.delta.chunks(self.alphabet.len())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DfaDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DfaDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

impl fmt::Debug for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dfa")
            .field("alphabet", &self.alphabet)
            .field("n_states", &self.n_states())
            .field("initial", &self.initial)
            .field("accepting", &self.accepting_states().collect::<Vec<_>>())
            .field("delta", &self.delta_rows().collect::<Vec<_>>())
            .finish()
    }
}

/// On-disk form of a [`Dfa`]. Field order is part of the format.
#[derive(Serialize, Deserialize)]
struct DfaDoc {
    alphabet: Alphabet,
    n_states: usize,
    initial: usize,
    accepting: Vec<usize>,
    delta: Vec<Vec<usize>>,
}

impl From<&Dfa> for DfaDoc {
    fn from(d: &Dfa) -> Self {
        DfaDoc {
            alphabet: d.alphabet.clone(),
            n_states: d.n_states(),
            initial: d.initial,
            accepting: d.accepting_states().collect(),
            delta: d.delta_rows().map(<[usize]>::to_vec).collect(),
        }
    }
}

impl TryFrom<DfaDoc> for Dfa {
    type Error = Error;

    fn try_from(doc: DfaDoc) -> Result<Self> {
        Dfa::new(doc.alphabet, doc.n_states, doc.initial, doc.accepting, doc.delta)
    }
}

impl Serialize for Dfa {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DfaDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dfa {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DfaDoc::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}
