//! Teacher backed by a recurrent network: membership queries go to the
//! network, equivalence queries explore an abstraction of the network in
//! parallel with the hypothesis and refine that abstraction on conflicts
//! that concrete network runs justify.

use std::collections::{HashMap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::abstraction::{Partitioning, DEFAULT_INITIAL_DEPTH};
use crate::automata::{shortest_separating, shortlex, Alphabet, Dfa, Symbol, Word};
use crate::lstar::{self, Limits, QueryLog, Teacher};
use crate::rnn::RnnAcceptor;
use crate::{Error, Result, Scalar};

/// Shortest word taking `a` from `q1` and from `q2` to states of different
/// acceptance.
pub fn separating_suffix(a: &Dfa, q1: usize, q2: usize) -> Result<Word> {
    if q1 == q2 {
        return Err(Error::Contract("separating suffix asked for a single state".into()));
    }
    shortest_separating(a, q1, a, q2)
        .ok_or_else(|| Error::Contract(format!("states {q1} and {q2} are equivalent; hypothesis not minimal")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    /// Exploration stopped on the time budget before finding a conflict.
    AcceptByTimeout,
    Reject(Word),
    RestartExploration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementKind {
    Aggressive,
    Svm,
}

/// One refinement and the network evidence for it: the network labels
/// `first·suffix` and `second·suffix` differently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementEvent {
    pub kind: RefinementKind,
    pub first: Word,
    pub second: Word,
    pub suffix: Word,
    pub leaves_before: usize,
    pub leaves_after: usize,
    /// States of the split set that left the conflicting state's part.
    pub separated: usize,
    /// Whether the SVM classified all its training states correctly.
    pub perfect: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct TeacherConfig {
    /// Depth of the first refinement.
    pub initial_depth: usize,
    /// Budget for a single equivalence query.
    pub query_time_limit: Option<Duration>,
    /// Offered as counterexamples at every equivalence query.
    pub starting_samples: Vec<Word>,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        TeacherConfig {
            initial_depth: DEFAULT_INITIAL_DEPTH,
            query_time_limit: None,
            starting_samples: Vec::new(),
        }
    }
}

/// Shortest accepted and shortest rejected word of `words` according to the
/// network (shortlex order).
pub fn starting_samples<F: Scalar>(net: &RnnAcceptor<F>, words: &[Word]) -> Result<Vec<Word>> {
    let labels = net.accepts_batch(words)?;
    let mut best: [Option<&Word>; 2] = [None, None];
    for (w, &y) in words.iter().zip(&labels) {
        let slot = &mut best[usize::from(y)];
        if slot.map_or(true, |b| shortlex(w, b).is_lt()) {
            *slot = Some(w);
        }
    }
    Ok(best.into_iter().flatten().cloned().collect())
}

/// Shortest accepted and rejected words among all words up to `max_len`
/// (exhaustive while small) and then random words of growing length.
pub fn sampled_starting_samples<F: Scalar>(net: &RnnAcceptor<F>, max_len: usize, seed: u64) -> Result<Vec<Word>> {
    use rand::{Rng, SeedableRng};
    let k = net.alphabet().len();
    let mut words: Vec<Word> = Vec::new();
    let mut len = 0;
    while len <= max_len && words.len() < 20_000 {
        words.extend(crate::automata::words_of_length(k, len).take(20_000));
        len += 1;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for l in len..=max_len {
        for _ in 0..200 {
            words.push((0..l).map(|_| rng.gen_range(0..k)).collect());
        }
    }
    starting_samples(net, &words)
}

type Key = Vec<u64>;

fn key_of<F: Scalar>(h: &Array1<F>) -> Key {
    h.iter().map(|&x| x.key_bits()).collect()
}

/// Bookkeeping of one parallel exploration.
#[derive(Debug, Default)]
pub struct ExplorationRecords<F> {
    /// Distinct network states in discovery order.
    pub states: Vec<Array1<F>>,
    /// Access words per network state, in discovery order.
    pub paths: Vec<Vec<Word>>,
    /// Abstract state of each network state.
    pub part: Vec<usize>,
    index: HashMap<Key, usize>,
    /// Network states seen per abstract state, in discovery order.
    pub visitors: HashMap<usize, Vec<usize>>,
    /// Hypothesis state associated with each abstract state.
    pub association: HashMap<usize, usize>,
    /// Expanded abstract states.
    pub expanded: HashSet<usize>,
    pub accepting: HashSet<usize>,
    pub transitions: HashMap<(usize, Symbol), usize>,
    queue: VecDeque<usize>,
}

struct Conflict {
    part: usize,
    state: usize,
    hyp_state: usize,
    path: Word,
}

impl<F: Scalar> ExplorationRecords<F> {
    /// Records that `path` reaches network state `h` in abstract state `q`
    /// and hypothesis state `q_hyp`. Reports a clustering conflict when `q`
    /// is already associated with another hypothesis state.
    fn update(&mut self, q: usize, h: Array1<F>, q_hyp: usize, path: Word) -> std::result::Result<(), Conflict> {
        let key = key_of(&h);
        let existing = self.index.get(&key).copied();
        match self.association.get(&q) {
            Some(&assoc) if assoc != q_hyp => {
                return Err(Conflict {
                    part: q,
                    state: existing.unwrap_or(usize::MAX),
                    hyp_state: q_hyp,
                    path,
                });
            }
            Some(_) => {}
            None => {
                self.association.insert(q, q_hyp);
            }
        }
        match existing {
            Some(i) => self.paths[i].push(path),
            None => {
                let i = self.states.len();
                self.index.insert(key, i);
                self.states.push(h);
                self.paths.push(vec![path]);
                self.part.push(q);
                self.visitors.entry(q).or_default().push(i);
                self.queue.push_back(i);
            }
        }
        Ok(())
    }
}

/// Per-equivalence-query record for the extraction report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRecord {
    pub hypothesis_size: usize,
    /// `counterexample`, `accept` or `timeout`.
    pub verdict: String,
    pub counterexample: Option<String>,
    pub refinements: usize,
    pub elapsed_ms: f64,
    pub leaf_count: usize,
}

/// Teacher answering from a network.
pub struct RnnTeacher<'a, F: Scalar> {
    net: &'a RnnAcceptor<F>,
    partitioning: Partitioning<F>,
    cfg: TeacherConfig,
    deadline: Option<Instant>,
    exhausted: bool,
    refinements: Vec<RefinementEvent>,
    queries: Vec<EquivalenceRecord>,
}

impl<'a, F: Scalar> RnnTeacher<'a, F> {
    pub fn new(net: &'a RnnAcceptor<F>, cfg: TeacherConfig) -> Result<Self> {
        for w in &cfg.starting_samples {
            net.alphabet().check(w)?;
        }
        if cfg.initial_depth == 0 {
            return Err(Error::InvalidArgument(
                "initial refinement depth must be at least 1".into(),
            ));
        }
        Ok(RnnTeacher {
            net,
            partitioning: Partitioning::new(),
            cfg,
            deadline: None,
            exhausted: false,
            refinements: Vec::new(),
            queries: Vec::new(),
        })
    }

    /// Overall deadline; equivalence queries answered after it accept.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn partitioning(&self) -> &Partitioning<F> {
        &self.partitioning
    }

    pub fn refinements(&self) -> &[RefinementEvent] {
        &self.refinements
    }

    pub fn queries(&self) -> &[EquivalenceRecord] {
        &self.queries
    }

    fn out_of_time(&self, query_deadline: Option<Instant>) -> bool {
        let now = Instant::now();
        self.deadline.is_some_and(|d| now >= d) || query_deadline.is_some_and(|d| now >= d)
    }

    /// One breadth-first exploration of the network under the current
    /// partitioning, in parallel with `hyp`.
    pub fn parallel_explore(&mut self, hyp: &Dfa, query_deadline: Option<Instant>) -> Result<Verdict> {
        let net = self.net;
        let mut rec = ExplorationRecords::<F>::default();
        let h0 = net.initial_state();
        let q0 = self.partitioning.map(h0.view())?;
        if rec.update(q0, h0, hyp.initial(), Vec::new()).is_err() {
            unreachable!("first record cannot conflict");
        }
        let mut polls = 0u32;
        while let Some(i) = rec.queue.pop_front() {
            polls = polls.wrapping_add(1);
            if polls % 64 == 0 && self.out_of_time(query_deadline) {
                return Ok(Verdict::AcceptByTimeout);
            }
            let q = rec.part[i];
            let q_hyp = rec.association[&q];
            let accepted = net.classify_state(&rec.states[i])?.is_acc();
            if accepted != hyp.is_accepting(q_hyp) {
                let w = rec.paths[i]
                    .iter()
                    .min_by(|a, b| shortlex(a, b))
                    .expect("non-empty paths")
                    .clone();
                return Ok(Verdict::Reject(w));
            }
            if !rec.expanded.insert(q) {
                continue;
            }
            if accepted {
                rec.accepting.insert(q);
            }
            let base = rec.paths[i][0].clone();
            for a in 0..hyp.alphabet().len() {
                let h_next = net.step(&rec.states[i], a)?;
                let q_next = self.partitioning.map(h_next.view())?;
                rec.transitions.insert((q, a), q_next);
                let mut path = base.clone();
                path.push(a);
                if let Err(conflict) = rec.update(q_next, h_next.clone(), hyp.next(q_hyp, a), path) {
                    return self.handle_cluster_conflict(&rec, hyp, conflict, h_next);
                }
            }
        }
        Ok(Verdict::Accept)
    }

    fn handle_cluster_conflict(
        &mut self,
        rec: &ExplorationRecords<F>,
        hyp: &Dfa,
        conflict: Conflict,
        h: Array1<F>,
    ) -> Result<Verdict> {
        let q1 = rec.association[&conflict.part];
        let suffix = separating_suffix(hyp, q1, conflict.hyp_state)?;
        let visitors = &rec.visitors[&conflict.part];
        let mut words: Vec<Word> = Vec::new();
        for &v in visitors {
            for p in &rec.paths[v] {
                words.push([p.as_slice(), &suffix].concat());
            }
        }
        words.push([conflict.path.as_slice(), &suffix].concat());
        let net_says = self.net.accepts_batch(&words)?;
        let best = words
            .iter()
            .zip(&net_says)
            .filter(|(w, &r)| hyp.accepts(w).map(|a| a != r).unwrap_or(false))
            .map(|(w, _)| w)
            .min_by(|a, b| shortlex(a, b));
        if let Some(w) = best {
            return Ok(Verdict::Reject(w.clone()));
        }
        // every word agrees with the hypothesis, so the network separates the
        // conflicting path from each visitor
        if conflict.state != usize::MAX && visitors.contains(&conflict.state) {
            return Err(Error::Contract(
                "one network state reached with two hypothesis states".into(),
            ));
        }
        let others: Vec<Array1<F>> = visitors.iter().map(|&v| rec.states[v].clone()).collect();
        let first = rec.paths[visitors[0]]
            .iter()
            .min_by(|a, b| shortlex(a, b))
            .expect("non-empty paths")
            .clone();
        let before = self.partitioning.leaf_count();
        let (kind, refined) = if self.refinements.is_empty() {
            (
                RefinementKind::Aggressive,
                self.partitioning
                    .refine_aggressive(&h, &others, self.cfg.initial_depth)?,
            )
        } else {
            match self.partitioning.refine_svm(&h, &others) {
                Ok(r) if r.separated > 0 => (RefinementKind::Svm, r),
                Ok(_) | Err(Error::NoOpRefinement(_)) => {
                    log::debug!("svm split separated nothing; refining aggressively");
                    (
                        RefinementKind::Aggressive,
                        self.partitioning
                            .refine_aggressive(&h, &others, self.cfg.initial_depth)?,
                    )
                }
                Err(e) => return Err(e),
            }
        };
        let refined = if refined.separated > 0 {
            refined
        } else {
            // a single distinct target always gives a non-zero gap
            let far = others
                .iter()
                .max_by(|a, b| {
                    let da = (*a - &h).mapv(|x| x * x).sum();
                    let db = (*b - &h).mapv(|x| x * x).sum();
                    da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty visitors");
            self.partitioning.refine_aggressive(&h, std::slice::from_ref(far), 1)?
        };
        self.refinements.push(RefinementEvent {
            kind,
            first,
            second: conflict.path,
            suffix,
            leaves_before: before,
            leaves_after: refined.partitioning.leaf_count(),
            separated: refined.separated,
            perfect: refined.fit.as_ref().map(|f| f.perfect),
        });
        self.partitioning = refined.partitioning;
        Ok(Verdict::RestartExploration)
    }

    fn check_equivalence(&mut self, hyp: &Dfa) -> Result<(Option<Word>, bool)> {
        let mut bad: Vec<&Word> = Vec::new();
        for w in &self.cfg.starting_samples {
            if self.net.accepts(w)? != hyp.accepts(w)? {
                bad.push(w);
            }
        }
        if let Some(w) = bad.into_iter().min_by(|a, b| shortlex(a, b)) {
            return Ok((Some(w.clone()), false));
        }
        let query_deadline = self.cfg.query_time_limit.map(|d| Instant::now() + d);
        loop {
            if self.out_of_time(query_deadline) {
                return Ok((None, true));
            }
            match self.parallel_explore(hyp, query_deadline)? {
                Verdict::Accept => return Ok((None, false)),
                Verdict::AcceptByTimeout => return Ok((None, true)),
                Verdict::Reject(w) => return Ok((Some(w), false)),
                Verdict::RestartExploration => {}
            }
        }
    }
}

impl<F: Scalar> Teacher for RnnTeacher<'_, F> {
    fn alphabet(&self) -> &Alphabet {
        self.net.alphabet()
    }

    fn membership(&mut self, w: &[Symbol]) -> Result<bool> {
        self.net.accepts(w)
    }

    fn equivalence(&mut self, hyp: &Dfa) -> Result<Option<Word>> {
        if hyp.alphabet() != self.net.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        let start = Instant::now();
        let before = self.refinements.len();
        let (answer, timed_out) = self.check_equivalence(hyp)?;
        if timed_out {
            self.exhausted = true;
        }
        self.queries.push(EquivalenceRecord {
            hypothesis_size: hyp.n_states(),
            verdict: match (&answer, timed_out) {
                (Some(_), _) => "counterexample",
                (None, true) => "timeout",
                (None, false) => "accept",
            }
            .into(),
            counterexample: answer.as_ref().map(|w| hyp.alphabet().render(w)),
            refinements: self.refinements.len() - before,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            leaf_count: self.partitioning.leaf_count(),
        });
        Ok(answer)
    }

    fn exhausted(&self) -> bool {
        self.exhausted
    }
}

#[derive(Clone, Debug)]
pub struct ExtractionConfig {
    pub teacher: TeacherConfig,
    pub time_limit: Duration,
    pub max_states: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            teacher: TeacherConfig::default(),
            time_limit: Duration::from_secs(30),
            max_states: usize::MAX,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractionReport {
    pub converged: bool,
    pub dfa_size: usize,
    pub elapsed_ms: f64,
    pub membership_queries: usize,
    pub equivalence_queries: Vec<EquivalenceRecord>,
    pub refinements: Vec<RefinementEvent>,
}

impl ExtractionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug)]
pub struct Extraction<F> {
    /// Accepted hypothesis, or the last one proposed when a limit was hit.
    pub dfa: Dfa,
    pub converged: bool,
    pub log: QueryLog,
    pub refinements: Vec<RefinementEvent>,
    pub partitioning: Partitioning<F>,
    pub report: ExtractionReport,
}

/// Runs L* with the network as teacher.
pub fn extract<F: Scalar>(net: &RnnAcceptor<F>, cfg: &ExtractionConfig) -> Result<Extraction<F>> {
    let start = Instant::now();
    let mut teacher = RnnTeacher::new(net, cfg.teacher.clone())?;
    teacher.set_deadline(Some(start + cfg.time_limit));
    let outcome = lstar::run(
        &mut teacher,
        Limits {
            wall_clock: cfg.time_limit,
            max_states: cfg.max_states,
        },
    )
    .map_err(|e| e.source)?;
    let report = ExtractionReport {
        converged: outcome.converged,
        dfa_size: outcome.dfa.n_states(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        membership_queries: outcome.log.member_queries(),
        equivalence_queries: teacher.queries.clone(),
        refinements: teacher.refinements.clone(),
    };
    Ok(Extraction {
        dfa: outcome.dfa,
        converged: outcome.converged,
        log: outcome.log,
        refinements: teacher.refinements,
        partitioning: teacher.partitioning,
        report,
    })
}

/// Outcome of re-checking a run's claims against the network.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditReport {
    pub counterexamples_checked: usize,
    pub refinements_checked: usize,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-queries the network: every counterexample must be labelled differently
/// by the network and the hypothesis it refuted, and every refinement's
/// witness words must be labelled differently by the network.
pub fn audit<F: Scalar>(net: &RnnAcceptor<F>, log: &QueryLog, refinements: &[RefinementEvent]) -> Result<AuditReport> {
    let alphabet = net.alphabet();
    let mut report = AuditReport::default();
    for (hyp, w) in log.counterexamples() {
        report.counterexamples_checked += 1;
        if net.accepts(w)? == hyp.accepts(w)? {
            report.violations.push(format!(
                "counterexample {:?} is labelled alike by network and hypothesis",
                alphabet.render(w)
            ));
        }
    }
    for r in refinements {
        report.refinements_checked += 1;
        let a = [r.first.as_slice(), &r.suffix].concat();
        let b = [r.second.as_slice(), &r.suffix].concat();
        if net.accepts(&a)? == net.accepts(&b)? {
            report.violations.push(format!(
                "refinement witnesses {:?} and {:?} are labelled alike",
                alphabet.render(&a),
                alphabet.render(&b)
            ));
        }
    }
    Ok(report)
}
