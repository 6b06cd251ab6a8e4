//! Benchmark languages, training-set construction and agreement measurement.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{random_min_dfa, words_of_length, Alphabet, Dfa, Symbol, Word};
use crate::rnn::RnnAcceptor;
use crate::{Error, Result, Scalar};

/// Uniform draws per length before a class is declared scarce.
pub const SAMPLING_BUDGET: usize = 100_000;
/// Largest majority:minority ratio kept when one class is scarce, and the
/// number of samples kept when only one class exists.
pub const SCARCE_RATIO: usize = 50;
/// Edits applied per mutation are drawn from `1..=MAX_EDITS`.
pub const MAX_EDITS: usize = 9;

type Oracle = Arc<dyn Fn(&[Symbol]) -> bool + Send + Sync>;

/// Tailored positive-sample generators for languages whose positives are
/// too rare for uniform sampling.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// Balanced parentheses padded with letters, nesting at most `max_depth`.
    BalancedParens { max_depth: usize },
    /// `local@domain` followed by `.com`, `.net` or `.co.XY`, where both parts
    /// have length 2 to 8.
    Email,
}

#[derive(Clone)]
pub struct Language {
    pub name: String,
    pub alphabet: Alphabet,
    oracle: Oracle,
    dfa: Option<Dfa>,
    generator: Option<Generator>,
}

impl fmt::Debug for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Language")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet)
            .field("dfa", &self.dfa.as_ref().map(Dfa::n_states))
            .field("generator", &self.generator)
            .finish()
    }
}

impl Language {
    /// A regular language given by its automaton.
    pub fn from_dfa(name: impl Into<String>, dfa: Dfa) -> Self {
        let d = dfa.clone();
        Language {
            name: name.into(),
            alphabet: dfa.alphabet().clone(),
            oracle: Arc::new(move |w| d.accepts(w).unwrap_or(false)),
            dfa: Some(dfa),
            generator: None,
        }
    }

    pub fn accepts(&self, w: &[Symbol]) -> Result<bool> {
        self.alphabet.check(w)?;
        Ok((self.oracle)(w))
    }

    pub fn dfa(&self) -> Option<&Dfa> {
        self.dfa.as_ref()
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    /// A random positive of exactly `len` symbols, if the generator can make one.
    pub fn generate(&self, len: usize, rng: &mut ChaCha8Rng) -> Option<Word> {
        let w = match self.generator.as_ref()? {
            Generator::BalancedParens { max_depth } => balanced(&self.alphabet, len, *max_depth, rng)?,
            Generator::Email => (0..1000).map(|_| email(&self.alphabet, rng)).find(|w| w.len() == len)?,
        };
        debug_assert!((self.oracle)(&w));
        Some(w)
    }

    /// Applies 1 to 9 random insertions, deletions, substitutions or moves.
    pub fn mutate(&self, w: &[Symbol], rng: &mut ChaCha8Rng) -> Word {
        let k = self.alphabet.len();
        let mut w = w.to_vec();
        for _ in 0..rng.gen_range(1..=MAX_EDITS) {
            match rng.gen_range(0..4) {
                0 => {
                    let at = rng.gen_range(0..=w.len());
                    w.insert(at, rng.gen_range(0..k));
                }
                1 if !w.is_empty() => {
                    w.remove(rng.gen_range(0..w.len()));
                }
                2 if !w.is_empty() => {
                    let at = rng.gen_range(0..w.len());
                    w[at] = rng.gen_range(0..k);
                }
                3 if !w.is_empty() => {
                    let a = w.remove(rng.gen_range(0..w.len()));
                    let at = rng.gen_range(0..=w.len());
                    w.insert(at, a);
                }
                _ => {}
            }
        }
        w
    }
}

fn binary() -> Alphabet {
    Alphabet::from_chars("01").expect("valid alphabet")
}

/// Tomita grammar `i` (1 to 7) over {0,1}, with its minimal automaton.
///
/// Grammar 3 is the complement of
/// `((0|1)*0)*1(11)*(0(0|1)*1)*0(00)*(1(0|1)*)*`, i.e. no odd-length run of
/// 1s is followed, anywhere later, by an odd-length run of 0s.
pub fn tomita(i: usize) -> Result<Language> {
    // (n_states, accepting, delta rows as [on 0, on 1])
    let (n, accepting, delta): (usize, Vec<usize>, Vec<[usize; 2]>) = match i {
        1 => (2, vec![0], vec![[1, 0], [1, 1]]),
        2 => (3, vec![0], vec![[2, 1], [0, 2], [2, 2]]),
        // 0: no odd 1-run pending, 1: inside an odd 1-run, 2: odd 0-run after
        // an odd 1-run, 3: even 0-run or 1s after an odd 1-run, 4: dead
        3 => (5, vec![0, 1, 3], vec![[0, 1], [2, 0], [3, 4], [2, 3], [4, 4]]),
        4 => (4, vec![0, 1, 2], vec![[1, 0], [2, 0], [3, 0], [3, 3]]),
        // state = 2 * (#0 mod 2) + (#1 mod 2)
        5 => (4, vec![0], vec![[2, 1], [3, 0], [0, 3], [1, 2]]),
        6 => (3, vec![0], vec![[1, 2], [2, 0], [0, 1]]),
        7 => (5, vec![0, 1, 2, 3], vec![[0, 1], [2, 1], [2, 3], [4, 3], [4, 4]]),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no Tomita grammar {i}; expected 1 to 7"
            )))
        }
    };
    let dfa = Dfa::new(binary(), n, 0, accepting, delta.into_iter().map(Vec::from).collect())?;
    Ok(Language::from_dfa(format!("tomita{i}"), dfa))
}

/// Balanced parentheses over `a`-`z`, `(`, `)`; letters are ignored.
/// Positives for training are generated with nesting depth at most
/// `max_depth`.
pub fn bp(max_depth: usize) -> Language {
    let alphabet = Alphabet::from_chars("abcdefghijklmnopqrstuvwxyz()").expect("valid alphabet");
    let open = alphabet.symbol("(").expect("open");
    let close = alphabet.symbol(")").expect("close");
    Language {
        name: "bp".into(),
        alphabet,
        oracle: Arc::new(move |w| bp_depth(w, open, close).is_some()),
        dfa: None,
        generator: Some(Generator::BalancedParens { max_depth }),
    }
}

/// Maximal nesting depth of a balanced word, `None` if unbalanced.
fn bp_depth(w: &[Symbol], open: Symbol, close: Symbol) -> Option<usize> {
    let (mut d, mut max) = (0usize, 0);
    for &a in w {
        if a == open {
            d += 1;
            max = max.max(d);
        } else if a == close {
            d = d.checked_sub(1)?;
        }
    }
    (d == 0).then_some(max)
}

/// Automaton for balanced words of nesting depth at most `depth` over the
/// parenthesis alphabet.
pub fn bp_bounded_dfa(depth: usize) -> Dfa {
    let alphabet = bp(depth).alphabet;
    let open = alphabet.symbol("(").expect("open");
    let close = alphabet.symbol(")").expect("close");
    let dead = depth + 1;
    let delta = (0..=dead)
        .map(|q| {
            (0..alphabet.len())
                .map(|a| match (q, a) {
                    (q, _) if q == dead => dead,
                    (q, a) if a == open => (q + 1).min(dead),
                    (0, a) if a == close => dead,
                    (q, a) if a == close => q - 1,
                    (q, _) => q,
                })
                .collect()
        })
        .collect();
    Dfa::new(alphabet, depth + 2, 0, [0], delta).expect("well-formed")
}

fn balanced(alphabet: &Alphabet, len: usize, max_depth: usize, rng: &mut ChaCha8Rng) -> Option<Word> {
    let open = alphabet.symbol("(")?;
    let close = alphabet.symbol(")")?;
    let max_pairs = if max_depth == 0 { 0 } else { len / 2 };
    let pairs = rng.gen_range(0..=max_pairs);
    let mut parens = Vec::with_capacity(2 * pairs);
    let mut depth = 0;
    for pos in 0..2 * pairs {
        let remaining = 2 * pairs - pos;
        let can_open = depth < max_depth && depth < remaining - 1;
        let must_close = depth == remaining;
        if can_open && (depth == 0 || !must_close && rng.gen_bool(0.5)) {
            parens.push(open);
            depth += 1;
        } else {
            parens.push(close);
            depth -= 1;
        }
    }
    let mut slots: Vec<bool> = (0..len).map(|i| i < 2 * pairs).collect();
    slots.shuffle(rng);
    let mut it = parens.into_iter();
    Some(
        slots
            .into_iter()
            .map(|p| {
                if p {
                    it.next().expect("count")
                } else {
                    rng.gen_range(0..26)
                }
            })
            .collect(),
    )
}

fn email(alphabet: &Alphabet, rng: &mut ChaCha8Rng) -> Word {
    let letter = |rng: &mut ChaCha8Rng| rng.gen_range(0..26);
    let alnum = |rng: &mut ChaCha8Rng| rng.gen_range(0..36);
    let sym = |s: &str| alphabet.symbol(s).expect("email alphabet");
    let mut w = vec![letter(rng)];
    for _ in 1..rng.gen_range(2..=8) {
        w.push(alnum(rng));
    }
    w.push(sym("@"));
    for _ in 0..rng.gen_range(2..=8) {
        w.push(alnum(rng));
    }
    // 2 fixed endings plus 26 * 26 country endings, all equally likely
    let choice = rng.gen_range(0..2 + 26 * 26);
    let ending = match choice {
        0 => ".com".to_string(),
        1 => ".net".to_string(),
        c => {
            let c = c - 2;
            let x = (b'a' + (c / 26) as u8) as char;
            let y = (b'a' + (c % 26) as u8) as char;
            format!(".co.{x}{y}")
        }
    };
    w.extend(ending.chars().map(|c| sym(&c.to_string())));
    w
}

/// `[a-z]*1[a-z1]*2[a-z2]*3[a-z3]*4[a-z4]*5[a-z5]*` over `a`-`z`, `1`-`5`.
pub fn counting() -> Language {
    let alphabet = Alphabet::from_chars("abcdefghijklmnopqrstuvwxyz12345").expect("valid alphabet");
    // 0 before any digit, k after digit k, 6 dead
    let dead = 6;
    let delta = (0..=dead)
        .map(|q| {
            (0..alphabet.len())
                .map(|a| {
                    if q == dead {
                        dead
                    } else if a < 26 {
                        q
                    } else {
                        let digit = a - 25;
                        if digit == q || digit == q + 1 {
                            digit
                        } else {
                            dead
                        }
                    }
                })
                .collect()
        })
        .collect();
    let dfa = Dfa::new(alphabet, 7, 0, [5], delta).expect("well-formed");
    Language::from_dfa("counting", dfa)
}

/// Flat tokenized JSON lists `[]` or `[x(,x)*]` with `x` one of `S0NTF`.
pub fn json_lists() -> Language {
    let alphabet = Alphabet::from_chars("[]S0NTF,").expect("valid alphabet");
    let (lb, rb, comma) = (0, 1, 7);
    let dead = 5;
    // 0 start, 1 after '[', 2 after an item, 3 after ',', 4 closed
    let delta = (0..=dead)
        .map(|q| {
            (0..alphabet.len())
                .map(|a| {
                    let item = (2..7).contains(&a);
                    match q {
                        0 if a == lb => 1,
                        1 if a == rb => 4,
                        1 | 3 if item => 2,
                        2 if a == comma => 3,
                        2 if a == rb => 4,
                        _ => dead,
                    }
                })
                .collect()
        })
        .collect();
    let dfa = Dfa::new(alphabet, 6, 0, [4], delta).expect("well-formed");
    Language::from_dfa("json_lists", dfa)
}

/// `[a-z][a-z0-9]*@[a-z0-9]+.(com|net|co.[a-z][a-z])` over `a`-`z`, `0`-`9`,
/// `@`, `.`, reading every `.` as the literal dot symbol.
pub fn emails() -> Language {
    let alphabet = Alphabet::from_chars("abcdefghijklmnopqrstuvwxyz0123456789@.").expect("valid alphabet");
    let sym = |c: char| alphabet.symbol(&c.to_string()).expect("email alphabet");
    let (at, dot) = (sym('@'), sym('.'));
    let (c, o, m, n, e, t) = (sym('c'), sym('o'), sym('m'), sym('n'), sym('e'), sym('t'));
    const DEAD: usize = 12;
    const ACC: usize = 7;
    // 0 start, 1 local part, 2 after '@', 3 domain, 4 after '.', 5 "c",
    // 6 "co", 7 accept, 8 "n", 9 "ne", 10 "co.", 11 "co.X"
    let delta = (0..=DEAD)
        .map(|q| {
            (0..alphabet.len())
                .map(|a| {
                    let letter = a < 26;
                    let alnum = a < 36;
                    match q {
                        0 if letter => 1,
                        1 if alnum => 1,
                        1 if a == at => 2,
                        2 | 3 if alnum => 3,
                        3 if a == dot => 4,
                        4 if a == c => 5,
                        4 if a == n => 8,
                        5 if a == o => 6,
                        6 if a == m => ACC,
                        6 if a == dot => 10,
                        8 if a == e => 9,
                        9 if a == t => ACC,
                        10 if letter => 11,
                        11 if letter => ACC,
                        _ => DEAD,
                    }
                })
                .collect()
        })
        .collect();
    let dfa = Dfa::new(alphabet, DEAD + 1, 0, [ACC], delta).expect("well-formed");
    let mut lang = Language::from_dfa("emails", dfa);
    lang.generator = Some(Generator::Email);
    lang
}

/// The language of a seeded random minimal DFA.
pub fn random_regular(n_states: usize, alphabet_size: usize, seed: u64) -> Result<Language> {
    let alphabet = Alphabet::new((0..alphabet_size).map(|i| i.to_string()))?;
    let dfa = random_min_dfa(n_states, &alphabet, seed)?;
    Ok(Language::from_dfa(
        format!("random-{n_states}-{alphabet_size}-{seed}"),
        dfa,
    ))
}

/// Looks a language up by name: `tomita1`..`tomita7`, `bp`, `counting`,
/// `json_lists`, `emails`, or `random-<states>-<alphabet size>-<seed>`.
pub fn by_name(name: &str) -> Result<Language> {
    let bad = || Error::InvalidArgument(format!("unknown language {name:?}"));
    if let Some(i) = name.strip_prefix("tomita") {
        return tomita(i.parse().map_err(|_| bad())?);
    }
    if let Some(rest) = name.strip_prefix("random-") {
        let parts: Vec<&str> = rest.split('-').collect();
        let [n, k, seed] = parts[..] else { return Err(bad()) };
        let parse = |s: &str| s.parse::<u64>().map_err(|_| bad());
        return random_regular(parse(n)? as usize, parse(k)? as usize, parse(seed)?);
    }
    match name {
        "bp" => Ok(bp(11)),
        "counting" => Ok(counting()),
        "json_lists" => Ok(json_lists()),
        "emails" => Ok(emails()),
        _ => Err(bad()),
    }
}

/// Lengths used for the Tomita training sets: 0 to 13, 16, 19, 22.
pub fn tomita_lengths() -> Vec<usize> {
    (0..=13).chain([16, 19, 22]).collect()
}

/// Lengths used for the random-language training sets: 1 to 15, then even
/// lengths 16 to 26.
pub fn random_language_lengths() -> Vec<usize> {
    (1..=15).chain((16..=26).step_by(2)).collect()
}

/// Labelled words, no word repeated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledDataset {
    pub samples: Vec<(Word, bool)>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.samples.iter().filter(|(_, y)| *y).count()
    }

    /// Per length: (positives, negatives).
    pub fn stats(&self) -> BTreeMap<usize, (usize, usize)> {
        let mut out: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for (w, y) in &self.samples {
            let e = out.entry(w.len()).or_default();
            if *y {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
        out
    }

    /// One `label<TAB>word` line per sample, label `1` or `0`.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (w, y) in &self.samples {
            out.push_str(if *y { "1\t" } else { "0\t" });
            out.push_str(&alphabet.render(w));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let mut samples = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (label, word) = line
                .split_once('\t')
                .ok_or_else(|| Error::Malformed(format!("line {}: missing tab", i + 1)))?;
            let y = match label.trim() {
                "1" | "true" | "acc" => true,
                "0" | "false" | "rej" => false,
                other => return Err(Error::Malformed(format!("line {}: bad label {other:?}", i + 1))),
            };
            let w = alphabet.parse(word)?;
            if !seen.insert(w.clone()) {
                return Err(Error::Malformed(format!("line {}: duplicate word", i + 1)));
            }
            samples.push((w, y));
        }
        Ok(LabeledDataset { samples })
    }
}

/// Builds a training set with up to `per_length_target` words per length.
///
/// Without a generator each length is enumerated (when small) or sampled
/// uniformly with a budget of [`SAMPLING_BUDGET`] draws. Classes are taken
/// 1:1 when both are plentiful; a scarce class is kept whole and the other
/// filled up to the half-target but at most 50 times the scarce count; a
/// length with a single class contributes at most 50 words.
///
/// With a generator, positives come from it and negatives are mutated
/// positives that the oracle rejects.
pub fn make_train_set(
    lang: &Language,
    lengths: &[usize],
    per_length_target: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if lengths.is_empty() {
        return Err(Error::InvalidArgument("no lengths given".into()));
    }
    let half = (per_length_target / 2).max(1);
    let mut samples = Vec::new();
    let mut lengths = lengths.to_vec();
    lengths.sort_unstable();
    lengths.dedup();
    if lang.generator.is_some() {
        generated_set(lang, &lengths, half, seed, &mut samples);
    } else {
        for &len in &lengths {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (len as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let (mut pos, mut neg) = sample_length(lang, len, half, &mut rng);
            let (p, n) = class_quota(pos.len(), neg.len(), half);
            pos.truncate(p);
            neg.truncate(n);
            samples.extend(pos.into_iter().map(|w| (w, true)));
            samples.extend(neg.into_iter().map(|w| (w, false)));
        }
    }
    Ok(LabeledDataset { samples })
}

/// How many positives and negatives to keep given what was found.
pub fn class_quota(pos: usize, neg: usize, half: usize) -> (usize, usize) {
    if pos >= half && neg >= half {
        return (half, half);
    }
    let scarce = pos.min(neg).min(half);
    let other = if scarce == 0 {
        pos.max(neg).min(SCARCE_RATIO)
    } else {
        pos.max(neg).min(half.max(scarce).min(SCARCE_RATIO * scarce))
    };
    if pos <= neg {
        (scarce, other)
    } else {
        (other, scarce)
    }
}

fn sample_length(lang: &Language, len: usize, half: usize, rng: &mut ChaCha8Rng) -> (Vec<Word>, Vec<Word>) {
    let k = lang.alphabet.len();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    let small = (k as f64).powi(len as i32) <= SAMPLING_BUDGET as f64 / 2.0;
    if small {
        for w in words_of_length(k, len) {
            if (lang.oracle)(&w) {
                pos.push(w);
            } else {
                neg.push(w);
            }
        }
        pos.shuffle(rng);
        neg.shuffle(rng);
        return (pos, neg);
    }
    let mut seen = HashSet::new();
    for _ in 0..SAMPLING_BUDGET {
        if pos.len() >= half && neg.len() >= half {
            break;
        }
        let w: Word = (0..len).map(|_| rng.gen_range(0..k)).collect();
        if !seen.insert(w.clone()) {
            continue;
        }
        if (lang.oracle)(&w) {
            pos.push(w);
        } else {
            neg.push(w);
        }
    }
    (pos, neg)
}

fn generated_set(lang: &Language, lengths: &[usize], half: usize, seed: u64, out: &mut Vec<(Word, bool)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut positives = Vec::new();
    for &len in lengths {
        let mut found = 0;
        for _ in 0..half * 20 {
            if found == half {
                break;
            }
            if let Some(w) = lang.generate(len, &mut rng) {
                if seen.insert(w.clone()) {
                    positives.push(w);
                    found += 1;
                }
            }
        }
    }
    let wanted: HashSet<usize> = lengths.iter().copied().collect();
    let mut neg_count: BTreeMap<usize, usize> = BTreeMap::new();
    let mut negatives = Vec::new();
    if !positives.is_empty() {
        let target = positives.len();
        for _ in 0..target * 50 {
            if negatives.len() >= target {
                break;
            }
            let base = positives.choose(&mut rng).expect("non-empty");
            let w = lang.mutate(base, &mut rng);
            let slot = neg_count.entry(w.len()).or_default();
            if !wanted.contains(&w.len()) || *slot >= half || (lang.oracle)(&w) || !seen.insert(w.clone()) {
                continue;
            }
            *slot += 1;
            negatives.push(w);
        }
    }
    out.extend(positives.into_iter().map(|w| (w, true)));
    out.extend(negatives.into_iter().map(|w| (w, false)));
}

/// Anything that labels words over an alphabet.
pub trait WordClassifier {
    fn alphabet(&self) -> &Alphabet;
    fn classify_all(&self, words: &[Word]) -> Result<Vec<bool>>;
}

impl WordClassifier for Dfa {
    fn alphabet(&self) -> &Alphabet {
        Dfa::alphabet(self)
    }

    fn classify_all(&self, words: &[Word]) -> Result<Vec<bool>> {
        words.iter().map(|w| self.accepts(w)).collect()
    }
}

impl WordClassifier for Language {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn classify_all(&self, words: &[Word]) -> Result<Vec<bool>> {
        words.iter().map(|w| self.accepts(w)).collect()
    }
}

impl<F: Scalar> WordClassifier for RnnAcceptor<F> {
    fn alphabet(&self) -> &Alphabet {
        RnnAcceptor::alphabet(self)
    }

    fn classify_all(&self, words: &[Word]) -> Result<Vec<bool>> {
        self.accepts_batch(words)
    }
}

/// Percentage of `n` uniform random words per length on which `subject` and
/// `reference` agree. Deterministic in `seed`.
pub fn agreement(
    subject: &dyn WordClassifier,
    reference: &dyn WordClassifier,
    lengths: &[usize],
    n: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if subject.alphabet() != reference.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let k = subject.alphabet().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let words: Vec<Word> = (0..n)
            .map(|_| (0..len).map(|_| rng.gen_range(0..k)).collect())
            .collect();
        let a = subject.classify_all(&words)?;
        let b = reference.classify_all(&words)?;
        let same = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        out.push((len, 100.0 * same as f64 / n.max(1) as f64));
    }
    Ok(out)
}

/// Percentage of `data` that `subject` labels as recorded.
pub fn dataset_agreement(subject: &dyn WordClassifier, data: &LabeledDataset) -> Result<f64> {
    let words: Vec<Word> = data.samples.iter().map(|(w, _)| w.clone()).collect();
    let got = subject.classify_all(&words)?;
    let same = got.iter().zip(&data.samples).filter(|(g, (_, y))| *g == y).count();
    Ok(100.0 * same as f64 / data.len().max(1) as f64)
}
