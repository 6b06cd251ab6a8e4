//! Angluin's L* with an observation table kept suffix-closed, so every closed
//! table yields a hypothesis consistent with all of its entries.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::automata::{shortest_disagreement, shortlex, Alphabet, Dfa, Symbol, Word};
use crate::{Error, Result};

/// Minimally adequate teacher.
///
/// `membership` must be a fixed function for the lifetime of a run. A word
/// returned by `equivalence` must be classified differently by the teacher and
/// by the hypothesis.
pub trait Teacher {
    fn alphabet(&self) -> &Alphabet;

    fn membership(&mut self, w: &[Symbol]) -> Result<bool>;

    /// `None` accepts the hypothesis.
    fn equivalence(&mut self, hypothesis: &Dfa) -> Result<Option<Word>>;

    /// Set when a `None` from [`Teacher::equivalence`] came from an exhausted
    /// budget rather than a genuine acceptance.
    fn exhausted(&self) -> bool {
        false
    }
}

/// Teacher backed by a known DFA; equivalence returns the shortest disagreement.
#[derive(Clone, Debug)]
pub struct DfaTeacher {
    target: Dfa,
}

impl DfaTeacher {
    pub fn new(target: Dfa) -> Self {
        DfaTeacher { target }
    }
}

impl Teacher for DfaTeacher {
    fn alphabet(&self) -> &Alphabet {
        self.target.alphabet()
    }

    fn membership(&mut self, w: &[Symbol]) -> Result<bool> {
        self.target.accepts(w)
    }

    fn equivalence(&mut self, hypothesis: &Dfa) -> Result<Option<Word>> {
        shortest_disagreement(hypothesis, &self.target)
    }
}

/// The (S, E, T) record of membership answers.
#[derive(Clone, Debug)]
pub struct ObservationTable {
    alphabet_size: usize,
    prefixes: Vec<Word>,
    prefix_set: HashSet<Word>,
    suffixes: Vec<Word>,
    suffix_set: HashSet<Word>,
    answers: HashMap<Word, bool>,
}

/// A closed table's automaton, with an access word from S for every state.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub dfa: Dfa,
    pub access: Vec<Word>,
    /// State count before minimization.
    pub raw_states: usize,
}

impl ObservationTable {
    /// S = E = {ε}, with T filled for ε and every single symbol.
    pub fn new<M>(alphabet_size: usize, member: &mut M) -> Result<Self>
    where
        M: FnMut(&[Symbol]) -> Result<bool>,
    {
        let mut t = ObservationTable {
            alphabet_size,
            prefixes: Vec::new(),
            prefix_set: HashSet::new(),
            suffixes: vec![Vec::new()],
            suffix_set: HashSet::from([Vec::new()]),
            answers: HashMap::new(),
        };
        t.add_prefix(Vec::new(), member)?;
        Ok(t)
    }

    pub fn prefixes(&self) -> &[Word] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    /// T[w] for a word in (S ∪ S·Σ)·E.
    pub fn answer(&self, w: &[Symbol]) -> Option<bool> {
        self.answers.get(w).copied()
    }

    pub fn row(&self, w: &[Symbol]) -> Vec<bool> {
        let mut buf = w.to_vec();
        self.suffixes
            .iter()
            .map(|e| {
                buf.truncate(w.len());
                buf.extend_from_slice(e);
                self.answers[&buf]
            })
            .collect()
    }

    fn fill<M>(&mut self, w: &[Symbol], member: &mut M) -> Result<()>
    where
        M: FnMut(&[Symbol]) -> Result<bool>,
    {
        let mut buf = w.to_vec();
        for e in &self.suffixes {
            buf.truncate(w.len());
            buf.extend_from_slice(e);
            if !self.answers.contains_key(&buf) {
                let ans = member(&buf)?;
                self.answers.insert(buf.clone(), ans);
            }
        }
        Ok(())
    }

    /// Adds `s` to S and fills the rows of `s` and `s·a`.
    pub fn add_prefix<M>(&mut self, s: Word, member: &mut M) -> Result<()>
    where
        M: FnMut(&[Symbol]) -> Result<bool>,
    {
        if !self.prefix_set.insert(s.clone()) {
            return Ok(());
        }
        self.fill(&s, member)?;
        let mut ext = s.clone();
        for a in 0..self.alphabet_size {
            ext.truncate(s.len());
            ext.push(a);
            self.fill(&ext, member)?;
        }
        self.prefixes.push(s);
        Ok(())
    }

    /// Adds `e` and all of its suffixes to E, filling the new columns.
    /// Returns whether E grew.
    pub fn add_suffix<M>(&mut self, e: &[Symbol], member: &mut M) -> Result<bool>
    where
        M: FnMut(&[Symbol]) -> Result<bool>,
    {
        let fresh: Vec<Word> = (0..=e.len())
            .map(|i| e[i..].to_vec())
            .filter(|x| !self.suffix_set.contains(x))
            .collect();
        if fresh.is_empty() {
            return Ok(false);
        }
        let mut buf = Vec::new();
        for s in &self.prefixes {
            for ext in std::iter::once(None).chain((0..self.alphabet_size).map(Some)) {
                for x in &fresh {
                    buf.clear();
                    buf.extend_from_slice(s);
                    buf.extend(ext);
                    buf.extend_from_slice(x);
                    if !self.answers.contains_key(&buf) {
                        let ans = member(&buf)?;
                        self.answers.insert(buf.clone(), ans);
                    }
                }
            }
        }
        for x in fresh {
            self.suffix_set.insert(x.clone());
            self.suffixes.push(x);
        }
        Ok(true)
    }

    /// Shortest (then lexicographically least) s·a whose row matches no row of S.
    pub fn find_unclosed(&self) -> Option<Word> {
        let rows: HashSet<Vec<bool>> = self.prefixes.iter().map(|s| self.row(s)).collect();
        let mut best: Option<Word> = None;
        for s in &self.prefixes {
            for a in 0..self.alphabet_size {
                let mut ext = s.clone();
                ext.push(a);
                if rows.contains(&self.row(&ext)) {
                    continue;
                }
                if best.as_ref().map_or(true, |b| shortlex(&ext, b).is_lt()) {
                    best = Some(ext);
                }
            }
        }
        best
    }

    /// Automaton over the distinct rows of S, minimized and canonically numbered.
    pub fn make_hypothesis(&self, alphabet: &Alphabet) -> Result<Hypothesis> {
        if alphabet.len() != self.alphabet_size {
            return Err(Error::AlphabetMismatch);
        }
        let mut state_of: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut reps: Vec<&Word> = Vec::new();
        for s in &self.prefixes {
            let fresh = state_of.len();
            if *state_of.entry(self.row(s)).or_insert(fresh) == fresh {
                reps.push(s);
            }
        }
        let mut accepting = Vec::new();
        let mut delta = Vec::with_capacity(reps.len());
        for (q, s) in reps.iter().enumerate() {
            if self.answers[*s] {
                accepting.push(q);
            }
            let mut row = Vec::with_capacity(self.alphabet_size);
            for a in 0..self.alphabet_size {
                let mut ext = (*s).clone();
                ext.push(a);
                let target = state_of.get(&self.row(&ext)).ok_or_else(|| {
                    Error::Contract(format!(
                        "hypothesis requested from an unclosed table (row of {})",
                        alphabet.render(&ext)
                    ))
                })?;
                row.push(*target);
            }
            delta.push(row);
        }
        let initial = state_of[&self.row(&[])];
        let raw_states = reps.len();
        let dfa = Dfa::new(alphabet.clone(), raw_states, initial, accepting, delta)?.minimize();

        let mut access: Vec<Option<Word>> = vec![None; dfa.n_states()];
        for s in &self.prefixes {
            let q = dfa.run(s)?;
            if access[q].as_ref().map_or(true, |a| shortlex(s, a).is_lt()) {
                access[q] = Some(s.clone());
            }
        }
        let access = access
            .into_iter()
            .map(|a| a.ok_or_else(|| Error::Contract("hypothesis state without access word".into())))
            .collect::<Result<_>>()?;
        Ok(Hypothesis {
            dfa,
            access,
            raw_states,
        })
    }

    /// Locates a distinguishing suffix of `cex` by binary search (Rivest and
    /// Schapire) and adds it, with its suffixes, to E. When `cex` does not
    /// actually contradict `hyp`, all suffixes of `cex` are added instead.
    /// Returns whether the table changed.
    pub fn process_counterexample<M>(&mut self, cex: &[Symbol], hyp: &Hypothesis, member: &mut M) -> Result<bool>
    where
        M: FnMut(&[Symbol]) -> Result<bool>,
    {
        // alpha(i) = member(access(δ̂(cex[..i])) · cex[i..])
        let alpha = |i: usize, member: &mut M| -> Result<bool> {
            let q = hyp.dfa.run(&cex[..i])?;
            let mut w = hyp.access[q].clone();
            w.extend_from_slice(&cex[i..]);
            member(&w)
        };
        let m = cex.len();
        let (mut lo, mut hi) = (0, m);
        let a_lo = alpha(lo, member)?;
        let a_hi = alpha(hi, member)?;
        if a_lo == a_hi {
            let mut grew = false;
            for i in 0..=m {
                grew |= self.add_suffix(&cex[i..], member)?;
            }
            return Ok(grew);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if alpha(mid, member)? == a_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.add_suffix(&cex[hi..], member)
    }
}

/// Bounds on one learning run.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub wall_clock: Duration,
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            wall_clock: Duration::from_secs(30),
            max_states: usize::MAX,
        }
    }
}

/// One query posed to the teacher.
#[derive(Clone, Debug)]
pub enum QueryRecord {
    Member {
        input: Word,
        answer: bool,
        elapsed_ms: f64,
    },
    Equiv {
        hypothesis: Dfa,
        counterexample: Option<Word>,
        elapsed_ms: f64,
    },
}

#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    pub records: Vec<QueryRecord>,
}

impl QueryLog {
    pub fn hypotheses(&self) -> impl Iterator<Item = &Dfa> {
        self.records.iter().filter_map(|r| match r {
            QueryRecord::Equiv { hypothesis, .. } => Some(hypothesis),
            _ => None,
        })
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = (&Dfa, &Word)> {
        self.records.iter().filter_map(|r| match r {
            QueryRecord::Equiv {
                hypothesis,
                counterexample: Some(w),
                ..
            } => Some((hypothesis, w)),
            _ => None,
        })
    }

    pub fn member_queries(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, QueryRecord::Member { .. }))
            .count()
    }

    /// One JSON object per line: `{kind, input, answer, elapsed_ms}`.
    pub fn to_json_lines(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for r in &self.records {
            let v: Value = match r {
                QueryRecord::Member {
                    input,
                    answer,
                    elapsed_ms,
                } => json!({
                    "kind": "member",
                    "input": alphabet.render(input),
                    "answer": answer,
                    "elapsed_ms": elapsed_ms,
                }),
                QueryRecord::Equiv {
                    hypothesis,
                    counterexample,
                    elapsed_ms,
                } => json!({
                    "kind": "equiv",
                    "input": hypothesis,
                    "answer": counterexample.as_ref().map(|w| alphabet.render(w)),
                    "elapsed_ms": elapsed_ms,
                }),
            };
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub dfa: Dfa,
    pub converged: bool,
    pub log: QueryLog,
}

/// Error raised by the teacher, together with the queries made so far.
#[derive(Debug, thiserror::Error)]
#[error("teacher failed: {source}")]
pub struct RunError {
    #[source]
    pub source: Error,
    pub log: QueryLog,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Runs L* against `teacher` until it accepts a hypothesis or a limit is hit;
/// in the latter case the last hypothesis is returned with `converged = false`.
pub fn run<T: Teacher>(teacher: &mut T, limits: Limits) -> Result<LearnOutcome, RunError> {
    let alphabet = teacher.alphabet().clone();
    let start = Instant::now();
    let mut log = QueryLog::default();
    let mut cache: HashMap<Word, bool> = HashMap::new();

    macro_rules! attempt {
        ($e:expr) => {{
            let r = $e;
            match r {
                Ok(v) => v,
                Err(source) => return Err(RunError { source, log }),
            }
        }};
    }

    let mut member = |w: &[Symbol], log: &mut QueryLog, teacher: &mut T| -> Result<bool> {
        if let Some(&a) = cache.get(w) {
            return Ok(a);
        }
        let t = Instant::now();
        let answer = teacher.membership(w)?;
        log.records.push(QueryRecord::Member {
            input: w.to_vec(),
            answer,
            elapsed_ms: ms(t.elapsed()),
        });
        cache.insert(w.to_vec(), answer);
        Ok(answer)
    };

    let mut table = attempt!(ObservationTable::new(alphabet.len(), &mut |w: &[Symbol]| {
        member(w, &mut log, teacher)
    }));
    let mut last: Option<Dfa> = None;
    let out_of_time = || start.elapsed() >= limits.wall_clock;

    loop {
        while let Some(s) = table.find_unclosed() {
            if last.is_some() && (out_of_time() || table.prefixes().len() >= limits.max_states) {
                return Ok(LearnOutcome {
                    dfa: last.expect("checked"),
                    converged: false,
                    log,
                });
            }
            attempt!(table.add_prefix(s, &mut |w: &[Symbol]| member(w, &mut log, teacher)));
        }
        let hyp = attempt!(table.make_hypothesis(&alphabet));
        if let Some(prev) = &last {
            if hyp.dfa.n_states() > limits.max_states || out_of_time() {
                return Ok(LearnOutcome {
                    dfa: prev.clone(),
                    converged: false,
                    log,
                });
            }
        }
        last = Some(hyp.dfa.clone());

        let t = Instant::now();
        let answer = attempt!(teacher.equivalence(&hyp.dfa));
        log.records.push(QueryRecord::Equiv {
            hypothesis: hyp.dfa.clone(),
            counterexample: answer.clone(),
            elapsed_ms: ms(t.elapsed()),
        });
        let Some(cex) = answer else {
            return Ok(LearnOutcome {
                dfa: hyp.dfa,
                converged: !teacher.exhausted(),
                log,
            });
        };
        if out_of_time() {
            return Ok(LearnOutcome {
                dfa: hyp.dfa,
                converged: false,
                log,
            });
        }
        let changed =
            attempt!(table.process_counterexample(&cex, &hyp, &mut |w: &[Symbol]| { member(w, &mut log, teacher) }));
        if !changed {
            let msg = format!(
                "counterexample {:?} does not contradict the hypothesis",
                alphabet.render(&cex)
            );
            return Err(RunError {
                source: Error::Contract(msg),
                log,
            });
        }
    }
}
