use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use lstar_rnn::automata::shortest_disagreement;
use lstar_rnn::baselines::{
    coverage_accuracy, coverage_csv, extract_abstraction, visited_states, AbstractionResult, CoverageRow,
    ExploreLimits, KmeansPartitioning, QuantPartitioning, RandomSamplingTeacher, SamplingConfig,
};
use lstar_rnn::corpus::{self, agreement, make_train_set, LabeledDataset, Language, WordClassifier};
use lstar_rnn::lstar::{self, Limits};
use lstar_rnn::rnn::{self, TrainReport};
use lstar_rnn::teacher::{self, AuditReport, ExtractionConfig, ExtractionReport, TeacherConfig};
use lstar_rnn::{Dfa, Rnn, Word};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, SampleSource};
use crate::{CliError, Method};

const WEIGHTS: &str = "weights.json";
const TRAIN_SET: &str = "train.tsv";
/// Longest word considered when the starting samples are drawn at random.
const SAMPLE_MAX_LEN: usize = 20;

pub enum EvalReference {
    Weights(PathBuf),
    Language(String),
    Dfa(PathBuf),
}

/// Per-run seeds, all drawn from the one generator seeded by the user.
struct Seeds {
    data: u64,
    dev: u64,
    train: u64,
    samples: u64,
    baseline: u64,
    eval: u64,
}

impl Seeds {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Seeds {
            data: rng.next_u64(),
            dev: rng.next_u64(),
            train: rng.next_u64(),
            samples: rng.next_u64(),
            baseline: rng.next_u64(),
            eval: rng.next_u64(),
        }
    }
}

fn language(cfg: &ExperimentConfig) -> Result<Language, CliError> {
    if let Some(path) = &cfg.dfa_file {
        let dfa = load_dfa(path)?;
        let name = path
            .file_stem()
            .map_or("dfa".into(), |s| s.to_string_lossy().into_owned());
        return Ok(Language::from_dfa(name, dfa));
    }
    match &cfg.language {
        Some(name) => Ok(corpus::by_name(name)?),
        None => Err(CliError::config(
            "no language given (config `language`/`dfa_file` or --language)",
        )),
    }
}

fn load_dfa(path: &Path) -> Result<Dfa, CliError> {
    Ok(Dfa::from_json(&read(path)?)?)
}

fn load_weights(path: &Path) -> Result<Rnn, CliError> {
    if !path.is_file() {
        return Err(CliError::config(format!("missing weights: {}", path.display())));
    }
    Ok(Rnn::from_json(&read(path)?)?)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::contract(e.to_string()))
}

fn duration(seconds: f64) -> Duration {
    Duration::from_secs_f64(seconds.max(0.0))
}

fn default_lengths(cfg: &ExperimentConfig) -> Vec<usize> {
    match &cfg.language {
        Some(name) if name.starts_with("random-") => corpus::random_language_lengths(),
        _ => corpus::tomita_lengths(),
    }
}

#[derive(Serialize)]
struct LengthAccuracy {
    length: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    language: &'a str,
    samples: usize,
    positives: usize,
    train_acc: f64,
    dev_acc: Vec<LengthAccuracy>,
    epochs: usize,
    loss: f64,
    seconds: f64,
    reached_target: bool,
}

pub fn train(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let seeds = Seeds::new(seed);
    let lang = language(cfg)?;
    let lengths = cfg.train.lengths.clone().unwrap_or_else(|| default_lengths(cfg));
    if lengths.is_empty() || cfg.train.per_length == 0 {
        return Err(CliError::config("empty dataset: no lengths or zero words per length"));
    }
    let data = make_train_set(&lang, &lengths, cfg.train.per_length, seeds.data)?;
    if data.is_empty() {
        return Err(CliError::config("empty dataset"));
    }
    info!("{} samples, {} positive", data.len(), data.positives());
    let (net, report): (Rnn, TrainReport) = rnn::train(
        cfg.network.shape(),
        &lang.alphabet,
        &data.samples,
        &cfg.train.train_config(seeds.train),
    )?;
    let dev = make_train_set(&lang, &lengths, cfg.train.per_length, seeds.dev)?;
    let dev_acc = per_length_accuracy(&net, &dev)?;

    let out = cfg.out_dir();
    write(&out, WEIGHTS, &net.to_json()?)?;
    write(&out, TRAIN_SET, &data.to_text(&lang.alphabet))?;
    let summary = TrainOutput {
        config: cfg,
        seed,
        language: &lang.name,
        samples: data.len(),
        positives: data.positives(),
        train_acc: report.accuracy,
        dev_acc,
        epochs: report.epochs,
        loss: report.loss,
        seconds: report.seconds,
        reached_target: report.reached_target,
    };
    write(&out, "train_report.json", &to_json(&summary)?)?;
    println!(
        "train_acc={:.4} epochs={} seconds={:.1}",
        report.accuracy, report.epochs, report.seconds
    );
    if !report.reached_target {
        return Err(CliError {
            code: CliError::TARGET_MISSED,
            message: format!(
                "training accuracy {:.4} is below the target {}",
                report.accuracy, cfg.train.target_accuracy
            ),
        });
    }
    Ok(())
}

fn per_length_accuracy(net: &Rnn, data: &LabeledDataset) -> Result<Vec<LengthAccuracy>, CliError> {
    let words: Vec<Word> = data.samples.iter().map(|(w, _)| w.clone()).collect();
    let got = net.accepts_batch(&words)?;
    let mut tally: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for ((w, y), g) in data.samples.iter().zip(got) {
        let t = tally.entry(w.len()).or_default();
        t.0 += usize::from(*y == g);
        t.1 += 1;
    }
    Ok(tally
        .into_iter()
        .map(|(length, (ok, n))| LengthAccuracy {
            length,
            accuracy: ok as f64 / n as f64,
        })
        .collect())
}

/// Shortest accepted and rejected words, from the saved training set or from
/// random words.
fn starting_samples(cfg: &ExperimentConfig, net: &Rnn, seed: u64) -> Result<Vec<Word>, CliError> {
    let path = cfg.out_dir().join(TRAIN_SET);
    if cfg.extract.starting_samples == SampleSource::Train {
        if path.is_file() {
            let data = LabeledDataset::from_text(&read(&path)?, net.alphabet())?;
            let words: Vec<Word> = data.samples.into_iter().map(|(w, _)| w).collect();
            return Ok(teacher::starting_samples(net, &words)?);
        }
        warn!("{} not found; drawing starting samples at random", path.display());
    }
    Ok(teacher::sampled_starting_samples(net, SAMPLE_MAX_LEN, seed)?)
}

#[derive(Serialize)]
struct GroundTruth {
    language: String,
    equivalent: bool,
    /// Shortest word the extracted DFA and the language disagree on.
    disagreement: Option<String>,
}

fn ground_truth(cfg: &ExperimentConfig, dfa: &Dfa) -> Option<GroundTruth> {
    let lang = language(cfg).ok()?;
    let target = lang.dfa()?;
    let diff = shortest_disagreement(dfa, target).ok()?;
    Some(GroundTruth {
        language: lang.name.clone(),
        equivalent: diff.is_none(),
        disagreement: diff.map(|w| dfa.alphabet().render(&w)),
    })
}

#[derive(Serialize)]
struct ExtractOutput<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    weights: &'a Path,
    starting_samples: Vec<String>,
    #[serde(flatten)]
    report: &'a ExtractionReport,
    audit: &'a AuditReport,
    ground_truth: Option<GroundTruth>,
}

pub fn extract(cfg: &ExperimentConfig, weights: Option<PathBuf>) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let seeds = Seeds::new(seed);
    let out = cfg.out_dir();
    let weights = weights.unwrap_or_else(|| out.join(WEIGHTS));
    let net = load_weights(&weights)?;
    let samples = starting_samples(cfg, &net, seeds.samples)?;
    let ecfg = ExtractionConfig {
        teacher: TeacherConfig {
            initial_depth: cfg.extract.initial_depth,
            query_time_limit: None,
            starting_samples: samples.clone(),
        },
        time_limit: duration(cfg.extract.time_limit),
        max_states: usize::MAX,
    };
    let ex = teacher::extract(&net, &ecfg)?;
    let audit = teacher::audit(&net, &ex.log, &ex.refinements)?;

    write(&out, "dfa.json", &ex.dfa.to_json()?)?;
    write(&out, "dfa.dot", &ex.dfa.to_dot())?;
    write(&out, "queries.jsonl", &ex.log.to_json_lines(net.alphabet()))?;
    let summary = ExtractOutput {
        config: cfg,
        seed,
        weights: &weights,
        starting_samples: samples.iter().map(|w| net.alphabet().render(w)).collect(),
        report: &ex.report,
        audit: &audit,
        ground_truth: ground_truth(cfg, &ex.dfa),
    };
    write(&out, "extraction_report.json", &to_json(&summary)?)?;
    println!(
        "converged={} states={} seconds={:.2}",
        ex.converged,
        ex.dfa.n_states(),
        ex.report.elapsed_ms / 1e3
    );
    if !audit.is_clean() {
        return Err(CliError::contract(audit.violations.join("; ")));
    }
    Ok(())
}

#[derive(Serialize)]
struct AbstractionOutput<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    method: &'static str,
    states: usize,
    complete: bool,
    elapsed_ms: f64,
    coverage: &'a [CoverageRow],
}

#[derive(Serialize)]
struct SamplingOutput<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    method: &'static str,
    converged: bool,
    states: usize,
    elapsed_ms: f64,
    membership_queries: usize,
    counterexamples: Vec<String>,
    agreement: Vec<LengthAccuracy>,
}

pub fn baseline(cfg: &ExperimentConfig, method: Method, weights: Option<PathBuf>) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let seeds = Seeds::new(seed);
    let out = cfg.out_dir();
    let weights = weights.unwrap_or_else(|| out.join(WEIGHTS));
    let net = load_weights(&weights)?;
    let limits = ExploreLimits {
        time: duration(cfg.baseline.time_limit),
        max_states: cfg.baseline.max_states.unwrap_or(usize::MAX),
    };
    let (name, result) = match method {
        Method::Quant => {
            let p = QuantPartitioning::for_network(&net, cfg.baseline.q, seeds.baseline)?;
            ("quant", extract_abstraction(&net, &p, limits)?)
        }
        Method::Kmeans => {
            let states = visited_states(&net, &random_words(&net, seeds.baseline))?;
            let (p, _) = KmeansPartitioning::fit(&states, cfg.baseline.k, seeds.baseline)?;
            ("kmeans", extract_abstraction(&net, &p, limits)?)
        }
        Method::Randsample => return random_sampling(cfg, &net, &seeds),
    };
    abstraction_report(cfg, seed, name, &net, &result, &seeds)
}

/// Words of length 0 to [`SAMPLE_MAX_LEN`] whose visited states seed k-means.
fn random_words(net: &Rnn, seed: u64) -> Vec<Word> {
    let k = net.alphabet().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..1000)
        .map(|_| {
            let len = rng.gen_range(0..=SAMPLE_MAX_LEN);
            (0..len).map(|_| rng.gen_range(0..k)).collect()
        })
        .collect()
}

fn abstraction_report(
    cfg: &ExperimentConfig,
    seed: u64,
    method: &'static str,
    net: &Rnn,
    result: &AbstractionResult,
    seeds: &Seeds,
) -> Result<(), CliError> {
    let out = cfg.out_dir();
    let rows = coverage_accuracy(&result.dfa, net, &cfg.eval.lengths, cfg.eval.n.max(1), seeds.eval)?;
    write(&out, &format!("baseline_{method}_coverage.csv"), &coverage_csv(&rows))?;
    if result.complete {
        write(
            &out,
            &format!("baseline_{method}_dfa.json"),
            &result.dfa.to_dfa()?.to_json()?,
        )?;
    }
    let summary = AbstractionOutput {
        config: cfg,
        seed,
        method,
        states: result.dfa.n_states(),
        complete: result.complete,
        elapsed_ms: result.elapsed_ms,
        coverage: &rows,
    };
    write(&out, &format!("baseline_{method}.json"), &to_json(&summary)?)?;
    println!("states={} complete={}", result.dfa.n_states(), result.complete);
    print!("{}", coverage_csv(&rows));
    Ok(())
}

fn random_sampling(cfg: &ExperimentConfig, net: &Rnn, seeds: &Seeds) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let time = duration(cfg.baseline.time_limit);
    let scfg = SamplingConfig {
        per_length: cfg.baseline.per_length,
        max_length: cfg.baseline.max_length,
        starting_samples: starting_samples(cfg, net, seeds.samples)?,
        seed: seeds.baseline,
        time_limit: Some(time),
    };
    let mut teacher = RandomSamplingTeacher::new(net, scfg)?;
    let outcome = lstar::run(
        &mut teacher,
        Limits {
            wall_clock: time,
            max_states: cfg.baseline.max_states.unwrap_or(usize::MAX),
        },
    )
    .map_err(|e| CliError::from(e.source))?;
    let alphabet = net.alphabet();
    let agree = agreement(
        &outcome.dfa,
        net as &dyn WordClassifier,
        &cfg.eval.lengths,
        cfg.eval.n,
        seeds.eval,
    )?;
    let out = cfg.out_dir();
    write(&out, "baseline_randsample_dfa.json", &outcome.dfa.to_json()?)?;
    let summary = SamplingOutput {
        config: cfg,
        seed,
        method: "randsample",
        converged: outcome.converged,
        states: outcome.dfa.n_states(),
        elapsed_ms: outcome
            .log
            .records
            .iter()
            .map(|r| match r {
                lstar::QueryRecord::Member { elapsed_ms, .. } | lstar::QueryRecord::Equiv { elapsed_ms, .. } => {
                    *elapsed_ms
                }
            })
            .sum(),
        membership_queries: outcome.log.member_queries(),
        counterexamples: outcome.log.counterexamples().map(|(_, w)| alphabet.render(w)).collect(),
        agreement: agree
            .into_iter()
            .map(|(length, pct)| LengthAccuracy { length, accuracy: pct })
            .collect(),
    };
    write(&out, "baseline_randsample.json", &to_json(&summary)?)?;
    println!("converged={} states={}", outcome.converged, outcome.dfa.n_states());
    Ok(())
}

pub fn eval(cfg: &ExperimentConfig, dfa: &Path, reference: EvalReference) -> Result<(), CliError> {
    let seeds = Seeds::new(cfg.seed()?);
    let subject = load_dfa(dfa)?;
    let reference: Box<dyn WordClassifier> = match reference {
        EvalReference::Weights(p) => Box::new(load_weights(&p)?),
        EvalReference::Language(name) => Box::new(corpus::by_name(&name)?),
        EvalReference::Dfa(p) => Box::new(load_dfa(&p)?),
    };
    if cfg.eval.n == 0 {
        return Err(CliError::config("need at least one word per length"));
    }
    let rows = agreement(&subject, reference.as_ref(), &cfg.eval.lengths, cfg.eval.n, seeds.eval)?;
    let mut csv = String::from("length,agreement\n");
    for (len, pct) in rows {
        csv.push_str(&format!("{len},{pct:.2}\n"));
    }
    print!("{csv}");
    if cfg.out.is_some() {
        write(&cfg.out_dir(), "eval.csv", &csv)?;
    }
    Ok(())
}
