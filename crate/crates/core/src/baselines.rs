//! Baseline extractors: breadth-first abstraction under a fixed
//! partitioning (equal-interval quantization or k-means), and an
//! equivalence oracle that samples random words.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;
use std::time::{Duration, Instant};

use ndarray::{Array1, ArrayView1};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abstraction::Partitioning;
use crate::automata::{shortlex, Alphabet, Dfa, Symbol, Word};
use crate::lstar::Teacher;
use crate::rnn::{Cell, RnnAcceptor};
use crate::{Error, Result, Scalar};

/// Assigns each network state a discrete key.
pub trait StateMapper<F> {
    type Key: Hash + Eq + Clone;
    fn key(&self, h: ArrayView1<F>) -> Result<Self::Key>;
}

impl<F: Scalar> StateMapper<F> for Partitioning<F> {
    type Key = usize;
    fn key(&self, h: ArrayView1<F>) -> Result<usize> {
        self.map(h)
    }
}

/// Splits every dimension into `q` equal intervals over a fixed range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantPartitioning<F> {
    q: usize,
    ranges: Vec<(F, F)>,
}

impl<F: Scalar> QuantPartitioning<F> {
    pub fn new(q: usize, ranges: Vec<(F, F)>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument("quantization level must be at least 2".into()));
        }
        if q > usize::from(u16::MAX) {
            return Err(Error::InvalidArgument("quantization level too large".into()));
        }
        if ranges.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidArgument("every range needs lo < hi".into()));
        }
        Ok(QuantPartitioning { q, ranges })
    }

    /// Value range per state dimension.
    pub fn ranges(&self) -> &[(F, F)] {
        &self.ranges
    }

    /// Ranges for a network's state: `[-1, 1]` for hidden values, and for
    /// LSTM cell values the extremes seen over 1000 random walks.
    pub fn for_network(net: &RnnAcceptor<F>, q: usize, seed: u64) -> Result<Self> {
        let d = net.state_dim();
        let mut ranges = vec![(-F::one(), F::one()); d];
        if net.shape().cell == Cell::Lstm {
            let mut cell_dims = vec![true; d];
            for r in net.h_ranges() {
                cell_dims[r].iter_mut().for_each(|c| *c = false);
            }
            let mut lo = vec![F::zero(); d];
            let mut hi = vec![F::zero(); d];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = net.alphabet().len();
            for _ in 0..1000 {
                let mut h = net.initial_state();
                for _ in 0..rng.gen_range(1..=50) {
                    h = net.step(&h, rng.gen_range(0..k))?;
                    for i in 0..d {
                        lo[i] = lo[i].min(h[i]);
                        hi[i] = hi[i].max(h[i]);
                    }
                }
            }
            for i in (0..d).filter(|&i| cell_dims[i]) {
                ranges[i] = if lo[i] < hi[i] {
                    (lo[i], hi[i])
                } else {
                    (lo[i] - F::one(), lo[i] + F::one())
                };
            }
        }
        Self::new(q, ranges)
    }

    /// Interval index per dimension; values outside the range fall in the
    /// boundary interval.
    pub fn intervals(&self, h: ArrayView1<F>) -> Result<Vec<u16>> {
        if h.len() != self.ranges.len() {
            return Err(Error::Dimension {
                expected: self.ranges.len(),
                got: h.len(),
            });
        }
        let q = F::from_usize(self.q).expect("q");
        Ok(h.iter()
            .zip(&self.ranges)
            .map(|(&x, &(lo, hi))| {
                let t = ((x - lo) / (hi - lo) * q).floor();
                let t = t.max(F::zero()).min(q - F::one());
                t.to_usize().unwrap_or(0) as u16
            })
            .collect())
    }
}

impl<F: Scalar> StateMapper<F> for QuantPartitioning<F> {
    type Key = Vec<u16>;
    fn key(&self, h: ArrayView1<F>) -> Result<Vec<u16>> {
        self.intervals(h)
    }
}

/// Nearest-centroid partitioning.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KmeansPartitioning<F> {
    pub centroids: Vec<Array1<F>>,
}

fn sq<F: Scalar>(a: ArrayView1<F>, b: ArrayView1<F>) -> F {
    a.iter()
        .zip(b.iter())
        .fold(F::zero(), |s, (&x, &y)| s + (x - y) * (x - y))
}

impl<F: Scalar> KmeansPartitioning<F> {
    /// Lloyd's algorithm from `k` distinct seeded starting points. Returns the
    /// model and the objective (sum of squared distances) after each pass.
    pub fn fit(states: &[Array1<F>], k: usize, seed: u64) -> Result<(Self, Vec<F>)> {
        if k == 0 || k > states.len() {
            return Err(Error::InvalidArgument(format!("k = {k} for {} states", states.len())));
        }
        let d = states[0].len();
        if let Some(bad) = states.iter().find(|s| s.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                got: bad.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = KmeansPartitioning {
            centroids: sample(&mut rng, states.len(), k)
                .into_iter()
                .map(|i| states[i].clone())
                .collect(),
        };
        let mut assignment = vec![usize::MAX; states.len()];
        let mut history = Vec::new();
        for _ in 0..300 {
            let mut changed = false;
            let mut objective = F::zero();
            for (a, s) in assignment.iter_mut().zip(states) {
                let (c, dist) = model.nearest(s.view());
                objective += dist;
                if *a != c {
                    *a = c;
                    changed = true;
                }
            }
            history.push(objective);
            if !changed {
                break;
            }
            let mut sums = vec![Array1::<F>::zeros(d); k];
            let mut counts = vec![0usize; k];
            for (&a, s) in assignment.iter().zip(states) {
                sums[a] += s;
                counts[a] += 1;
            }
            for c in 0..k {
                if counts[c] > 0 {
                    model.centroids[c] = &sums[c] / F::from_usize(counts[c]).expect("count");
                }
            }
        }
        Ok((model, history))
    }

    fn nearest(&self, h: ArrayView1<F>) -> (usize, F) {
        let mut best = (0, F::infinity());
        for (i, c) in self.centroids.iter().enumerate() {
            let d = sq(c.view(), h);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

impl<F: Scalar> StateMapper<F> for KmeansPartitioning<F> {
    type Key = usize;
    fn key(&self, h: ArrayView1<F>) -> Result<usize> {
        let d = self.centroids[0].len();
        if h.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: h.len(),
            });
        }
        Ok(self.nearest(h).0)
    }
}

/// Every state the network passes through while reading `words`, deduplicated.
pub fn visited_states<F: Scalar>(net: &RnnAcceptor<F>, words: &[Word]) -> Result<Vec<Array1<F>>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut push = |h: &Array1<F>, out: &mut Vec<Array1<F>>| {
        if seen.insert(h.iter().map(|x| x.key_bits()).collect::<Vec<_>>()) {
            out.push(h.clone());
        }
    };
    for w in words {
        let mut h = net.initial_state();
        push(&h, &mut out);
        for &a in w {
            h = net.step(&h, a)?;
            push(&h, &mut out);
        }
    }
    Ok(out)
}

/// A DFA whose transitions may be missing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialDfa {
    pub alphabet: Alphabet,
    pub accepting: Vec<bool>,
    /// `delta[q][a]`; state 0 is initial.
    pub delta: Vec<Vec<Option<usize>>>,
}

impl PartialDfa {
    pub fn n_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn is_complete(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// `None` when the word leaves the defined transitions.
    pub fn classify(&self, w: &[Symbol]) -> Option<bool> {
        let mut q = 0;
        for &a in w {
            q = (*self.delta[q].get(a)?)?;
        }
        Some(self.accepting[q])
    }

    pub fn to_dfa(&self) -> Result<Dfa> {
        if !self.is_complete() {
            return Err(Error::InvalidDfa("partial automaton has missing transitions".into()));
        }
        let delta = self
            .delta
            .iter()
            .map(|row| row.iter().map(|t| t.expect("complete")).collect())
            .collect();
        let accepting = (0..self.n_states()).filter(|&q| self.accepting[q]);
        Dfa::new(self.alphabet.clone(), self.n_states(), 0, accepting, delta)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreLimits {
    pub time: Duration,
    pub max_states: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            time: Duration::from_secs(30),
            max_states: usize::MAX,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AbstractionResult {
    pub dfa: PartialDfa,
    /// Every discovered state was expanded.
    pub complete: bool,
    pub elapsed_ms: f64,
}

/// Breadth-first exploration of the parts of `p` reachable from the initial
/// network state. Each part takes its label and outgoing transitions from the
/// first network state found in it. When a limit is hit the unexpanded parts
/// keep no outgoing transitions.
pub fn extract_abstraction<F: Scalar, P: StateMapper<F>>(
    net: &RnnAcceptor<F>,
    p: &P,
    limits: ExploreLimits,
) -> Result<AbstractionResult> {
    let start = Instant::now();
    let k = net.alphabet().len();
    let mut ids: HashMap<P::Key, usize> = HashMap::new();
    let mut accepting = Vec::new();
    let mut delta: Vec<Vec<Option<usize>>> = Vec::new();
    let mut queue = VecDeque::new();
    let h0 = net.initial_state();
    ids.insert(p.key(h0.view())?, 0);
    accepting.push(net.classify_state(&h0)?.is_acc());
    delta.push(vec![None; k]);
    queue.push_back((0, h0));
    let mut complete = true;
    while let Some((q, h)) = queue.pop_front() {
        if start.elapsed() >= limits.time {
            complete = false;
            break;
        }
        for a in 0..k {
            let next = net.step(&h, a)?;
            let key = p.key(next.view())?;
            let target = match ids.get(&key) {
                Some(&t) => t,
                None => {
                    if accepting.len() >= limits.max_states {
                        complete = false;
                        continue;
                    }
                    let t = accepting.len();
                    ids.insert(key, t);
                    accepting.push(net.classify_state(&next)?.is_acc());
                    delta.push(vec![None; k]);
                    queue.push_back((t, next));
                    t
                }
            };
            delta[q][a] = Some(target);
        }
    }
    let complete = complete && queue.is_empty();
    Ok(AbstractionResult {
        dfa: PartialDfa {
            alphabet: net.alphabet().clone(),
            accepting,
            delta,
        },
        complete,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageRow {
    pub length: usize,
    pub coverage: f64,
    /// Agreement with the network among covered words; `None` if none covered.
    pub accuracy: Option<f64>,
}

/// Per length, the percentage of `n` random words the partial automaton can
/// read to the end, and its agreement with the network on those.
pub fn coverage_accuracy<F: Scalar>(
    dfa: &PartialDfa,
    net: &RnnAcceptor<F>,
    lengths: &[usize],
    n: usize,
    seed: u64,
) -> Result<Vec<CoverageRow>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one word per length".into()));
    }
    if &dfa.alphabet != net.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let k = dfa.alphabet.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &len in lengths {
        let words: Vec<Word> = (0..n)
            .map(|_| (0..len).map(|_| rng.gen_range(0..k)).collect())
            .collect();
        let labels: Vec<Option<bool>> = words.iter().map(|w| dfa.classify(w)).collect();
        let covered: Vec<Word> = words
            .iter()
            .zip(&labels)
            .filter(|(_, l)| l.is_some())
            .map(|(w, _)| w.clone())
            .collect();
        let net_says = net.accepts_batch(&covered)?;
        let agree = labels.iter().flatten().zip(&net_says).filter(|(a, b)| a == b).count();
        rows.push(CoverageRow {
            length: len,
            coverage: 100.0 * covered.len() as f64 / n as f64,
            accuracy: (!covered.is_empty()).then(|| 100.0 * agree as f64 / covered.len() as f64),
        });
    }
    Ok(rows)
}

/// `length,coverage,accuracy` lines, `NA` for undefined accuracy.
pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from("length,coverage,accuracy\n");
    for r in rows {
        let acc = r.accuracy.map_or("NA".to_string(), |a| format!("{a:.2}"));
        out.push_str(&format!("{},{:.2},{acc}\n", r.length, r.coverage));
    }
    out
}

#[derive(Clone, Debug)]
pub struct SamplingConfig {
    pub per_length: usize,
    pub max_length: usize,
    pub starting_samples: Vec<Word>,
    pub seed: u64,
    pub time_limit: Option<Duration>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            per_length: 1000,
            max_length: 100,
            starting_samples: Vec::new(),
            seed: 0,
            time_limit: None,
        }
    }
}

/// Answers equivalence queries by checking the starting samples, then
/// `per_length` uniform random words of each length 1, 2, 3, ...
pub struct RandomSamplingTeacher<'a, F: Scalar> {
    net: &'a RnnAcceptor<F>,
    cfg: SamplingConfig,
    rng: ChaCha8Rng,
    deadline: Option<Instant>,
    exhausted: bool,
}

impl<'a, F: Scalar> RandomSamplingTeacher<'a, F> {
    pub fn new(net: &'a RnnAcceptor<F>, cfg: SamplingConfig) -> Result<Self> {
        for w in &cfg.starting_samples {
            net.alphabet().check(w)?;
        }
        Ok(RandomSamplingTeacher {
            net,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            deadline: cfg.time_limit.map(|t| Instant::now() + t),
            cfg,
            exhausted: false,
        })
    }
}

impl<F: Scalar> Teacher for RandomSamplingTeacher<'_, F> {
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
        let mut bad = Vec::new();
        for w in &self.cfg.starting_samples {
            if self.net.accepts(w)? != hyp.accepts(w)? {
                bad.push(w);
            }
        }
        if let Some(w) = bad.into_iter().min_by(|a, b| shortlex(a, b)) {
            return Ok(Some(w.clone()));
        }
        let k = hyp.alphabet().len();
        for len in 1..=self.cfg.max_length {
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.exhausted = true;
                return Ok(None);
            }
            let words: Vec<Word> = (0..self.cfg.per_length)
                .map(|_| (0..len).map(|_| self.rng.gen_range(0..k)).collect())
                .collect();
            let net_says = self.net.accepts_batch(&words)?;
            for (w, r) in words.iter().zip(net_says) {
                if hyp.accepts(w)? != r {
                    return Ok(Some(w.clone()));
                }
            }
        }
        Ok(None)
    }

    fn exhausted(&self) -> bool {
        self.exhausted
    }
}

/// One random-sampling equivalence check of `hyp` against the network.
pub fn random_sampling_oracle<F: Scalar>(
    net: &RnnAcceptor<F>,
    hyp: &Dfa,
    cfg: &SamplingConfig,
) -> Result<Option<Word>> {
    RandomSamplingTeacher::new(net, cfg.clone())?.equivalence(hyp)
}
