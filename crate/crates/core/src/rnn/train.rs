//! Batched forward/backward passes and the training loop.
//!
//! Batches always hold words of one length so every time step is a dense
//! matrix product.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Cell, Params, RnnAcceptor, Shape};
use crate::automata::{Alphabet, Symbol, Word};
use crate::{Error, Result, Scalar};

struct StepCache<F> {
    h_prev: Array2<F>,
    c_prev: Option<Array2<F>>,
    /// Post-activation gates, B x (gates * hidden).
    gates: Array2<F>,
    /// GRU only: U_n h_prev.
    uh_n: Option<Array2<F>>,
    c: Option<Array2<F>>,
    h: Array2<F>,
}

struct Forward<F> {
    /// steps[t][layer]
    steps: Vec<Vec<StepCache<F>>>,
    logits: Array1<F>,
    top_h: Array2<F>,
}

fn one_hot_rows<F: Scalar>(wt: &ArrayView2<F>, bias: &Array1<F>, syms: &[Symbol]) -> Array2<F> {
    let mut out = Array2::zeros((syms.len(), bias.len()));
    for (mut row, &a) in out.axis_iter_mut(Axis(0)).zip(syms) {
        row.assign(&wt.row(a));
        row += bias;
    }
    out
}

fn forward<F: Scalar>(net: &RnnAcceptor<F>, words: &[&[Symbol]], keep: bool) -> Forward<F> {
    let b = words.len();
    let hd = net.shape.hidden;
    let len = words.first().map_or(0, |w| w.len());
    let cell = net.shape.cell;
    let n_layers = net.shape.n_layers;
    let w0t = net.params.layers[0].w.t();

    let mut h: Vec<Array2<F>> = vec![Array2::zeros((b, hd)); n_layers];
    let mut c: Vec<Array2<F>> = match cell {
        Cell::Lstm => vec![Array2::zeros((b, hd)); n_layers],
        Cell::Gru => Vec::new(),
    };
    let mut steps = Vec::with_capacity(if keep { len } else { 0 });
    let mut syms = vec![0; b];
    for t in 0..len {
        for (s, w) in syms.iter_mut().zip(words) {
            *s = w[t];
        }
        let mut layer_caches = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let p = &net.params.layers[l];
            let mut pre_x = if l == 0 {
                one_hot_rows(&w0t, &p.b, &syms)
            } else {
                let mut m = Array2::from_shape_fn((b, p.b.len()), |(_, j)| p.b[j]);
                general_mat_mul(F::one(), &h[l - 1], &p.w.t(), F::one(), &mut m);
                m
            };
            let pre_h = h[l].dot(&p.u.t());
            let h_prev = &h[l];
            let mut h_new = Array2::zeros((b, hd));
            match cell {
                Cell::Gru => {
                    let mut uh_n = Array2::zeros((b, hd));
                    for i in 0..b {
                        let px = pre_x.row_mut(i).into_slice().expect("contiguous");
                        let ph = pre_h.row(i);
                        let hp = h_prev.row(i);
                        let mut hn = h_new.row_mut(i);
                        let mut un = uh_n.row_mut(i);
                        for j in 0..hd {
                            let r = sigmoid(px[j] + ph[j]);
                            let z = sigmoid(px[hd + j] + ph[hd + j]);
                            let n = (px[2 * hd + j] + r * ph[2 * hd + j]).tanh();
                            un[j] = ph[2 * hd + j];
                            hn[j] = (F::one() - z) * n + z * hp[j];
                            px[j] = r;
                            px[hd + j] = z;
                            px[2 * hd + j] = n;
                        }
                    }
                    let prev = std::mem::replace(&mut h[l], h_new);
                    if keep {
                        layer_caches.push(StepCache {
                            h_prev: prev,
                            c_prev: None,
                            gates: pre_x,
                            uh_n: Some(uh_n),
                            c: None,
                            h: h[l].clone(),
                        });
                    }
                }
                Cell::Lstm => {
                    let mut c_new = Array2::zeros((b, hd));
                    let c_prev = &c[l];
                    for i in 0..b {
                        let px = pre_x.row_mut(i).into_slice().expect("contiguous");
                        let ph = pre_h.row(i);
                        let cp = c_prev.row(i);
                        let mut cn = c_new.row_mut(i);
                        let mut hn = h_new.row_mut(i);
                        for j in 0..hd {
                            let ig = sigmoid(px[j] + ph[j]);
                            let fg = sigmoid(px[hd + j] + ph[hd + j]);
                            let g = (px[2 * hd + j] + ph[2 * hd + j]).tanh();
                            let o = sigmoid(px[3 * hd + j] + ph[3 * hd + j]);
                            let cv = fg * cp[j] + ig * g;
                            cn[j] = cv;
                            hn[j] = o * cv.tanh();
                            px[j] = ig;
                            px[hd + j] = fg;
                            px[2 * hd + j] = g;
                            px[3 * hd + j] = o;
                        }
                    }
                    let prev_h = std::mem::replace(&mut h[l], h_new);
                    let prev_c = std::mem::replace(&mut c[l], c_new);
                    if keep {
                        layer_caches.push(StepCache {
                            h_prev: prev_h,
                            c_prev: Some(prev_c),
                            gates: pre_x,
                            uh_n: None,
                            c: Some(c[l].clone()),
                            h: h[l].clone(),
                        });
                    }
                }
            }
        }
        if keep {
            steps.push(layer_caches);
        }
    }
    let top_h = h.pop().expect("at least one layer");
    let logits = top_h.dot(&net.params.classifier.w) + net.params.classifier.b;
    if !keep {
        // stash the remaining layers so forward_states can read them
        let mut last = Vec::new();
        for (l, hl) in h.into_iter().enumerate() {
            last.push(StepCache {
                h_prev: Array2::zeros((0, 0)),
                c_prev: None,
                gates: Array2::zeros((0, 0)),
                uh_n: None,
                c: c.get(l).cloned(),
                h: hl,
            });
        }
        last.push(StepCache {
            h_prev: Array2::zeros((0, 0)),
            c_prev: None,
            gates: Array2::zeros((0, 0)),
            uh_n: None,
            c: c.get(n_layers - 1).cloned(),
            h: top_h.clone(),
        });
        steps.push(last);
    }
    Forward { steps, logits, top_h }
}

pub(super) fn forward_logits<F: Scalar>(net: &RnnAcceptor<F>, words: &[&[Symbol]]) -> Array1<F> {
    forward(net, words, false).logits
}

pub(super) fn forward_states<F: Scalar>(net: &RnnAcceptor<F>, words: &[&[Symbol]]) -> Array2<F> {
    let fwd = forward(net, words, false);
    let hd = net.shape.hidden;
    let mut out = Array2::zeros((words.len(), net.state_dim()));
    for (l, cache) in fwd.steps[0].iter().enumerate() {
        let off = net.layer_offset(l);
        out.slice_mut(s![.., off..off + hd]).assign(&cache.h);
        if let Some(c) = &cache.c {
            out.slice_mut(s![.., off + hd..off + 2 * hd]).assign(c);
        }
    }
    out
}

fn softplus<F: Scalar>(x: F) -> F {
    x.max(F::zero()) + (F::one() + (-x.abs()).exp()).ln()
}

/// Mean binary cross-entropy over an equal-length batch and its gradient.
pub fn batch_loss_and_grad<F: Scalar>(
    net: &RnnAcceptor<F>,
    words: &[&[Symbol]],
    labels: &[bool],
) -> (F, Params<F>, usize) {
    let b = words.len();
    let bf = F::from_usize(b).expect("batch size");
    let hd = net.shape.hidden;
    let n_layers = net.shape.n_layers;
    let cell = net.shape.cell;
    let fwd = forward(net, words, true);

    let mut grads = Params::zeros_like(&net.params);
    let mut loss = F::zero();
    let mut correct = 0;
    let mut dlogit = Array1::zeros(b);
    for i in 0..b {
        let z = fwd.logits[i];
        let y = if labels[i] { F::one() } else { F::zero() };
        loss += softplus(z) - y * z;
        dlogit[i] = (sigmoid(z) - y) / bf;
        if (sigmoid(z) >= F::lit(0.5)) == labels[i] {
            correct += 1;
        }
    }
    loss = loss / bf;
    grads.classifier.w = fwd.top_h.t().dot(&dlogit);
    grads.classifier.b = dlogit.sum();

    let len = fwd.steps.len();
    if len == 0 {
        return (loss, grads, correct);
    }
    let v = &net.params.classifier.w;
    let mut dh_next: Vec<Array2<F>> = vec![Array2::zeros((b, hd)); n_layers];
    let mut dc_next: Vec<Array2<F>> = match cell {
        Cell::Lstm => vec![Array2::zeros((b, hd)); n_layers],
        Cell::Gru => Vec::new(),
    };
    for i in 0..b {
        dh_next[n_layers - 1].row_mut(i).scaled_add(dlogit[i], v);
    }

    let mut syms = vec![0; b];
    for t in (0..len).rev() {
        for (s, w) in syms.iter_mut().zip(words) {
            *s = w[t];
        }
        // gradient flowing into layer l's h at time t from layer l+1
        let mut from_above: Option<Array2<F>> = None;
        for l in (0..n_layers).rev() {
            let cache = &fwd.steps[t][l];
            let p = &net.params.layers[l];
            let mut dh = std::mem::replace(&mut dh_next[l], Array2::zeros((0, 0)));
            if let Some(extra) = from_above.take() {
                dh += &extra;
            }
            let g = cell.gates() * hd;
            let mut dpx = Array2::zeros((b, g));
            let mut dph = Array2::zeros((b, g));
            let mut dh_prev = Array2::zeros((b, hd));
            match cell {
                Cell::Gru => {
                    let uh_n = cache.uh_n.as_ref().expect("gru cache");
                    for i in 0..b {
                        let gt = cache.gates.row(i);
                        let hp = cache.h_prev.row(i);
                        let un = uh_n.row(i);
                        let d = dh.row(i);
                        let mut dx = dpx.row_mut(i);
                        let mut dhh = dph.row_mut(i);
                        let mut dp = dh_prev.row_mut(i);
                        for j in 0..hd {
                            let (r, z, n) = (gt[j], gt[hd + j], gt[2 * hd + j]);
                            let dn = d[j] * (F::one() - z);
                            let dz = d[j] * (hp[j] - n);
                            dp[j] = d[j] * z;
                            let dan = dn * (F::one() - n * n);
                            let dar = dan * un[j] * r * (F::one() - r);
                            let daz = dz * z * (F::one() - z);
                            dx[j] = dar;
                            dx[hd + j] = daz;
                            dx[2 * hd + j] = dan;
                            dhh[j] = dar;
                            dhh[hd + j] = daz;
                            dhh[2 * hd + j] = dan * r;
                        }
                    }
                }
                Cell::Lstm => {
                    let c = cache.c.as_ref().expect("lstm cache");
                    let c_prev = cache.c_prev.as_ref().expect("lstm cache");
                    let mut dc_in = std::mem::replace(&mut dc_next[l], Array2::zeros((0, 0)));
                    for i in 0..b {
                        let gt = cache.gates.row(i);
                        let d = dh.row(i);
                        let cv = c.row(i);
                        let cp = c_prev.row(i);
                        let mut dcr = dc_in.row_mut(i);
                        let mut dx = dpx.row_mut(i);
                        for j in 0..hd {
                            let (ig, fg, gg, o) = (gt[j], gt[hd + j], gt[2 * hd + j], gt[3 * hd + j]);
                            let tc = cv[j].tanh();
                            let dc = dcr[j] + d[j] * o * (F::one() - tc * tc);
                            let d_o = d[j] * tc;
                            dx[j] = dc * gg * ig * (F::one() - ig);
                            dx[hd + j] = dc * cp[j] * fg * (F::one() - fg);
                            dx[2 * hd + j] = dc * ig * (F::one() - gg * gg);
                            dx[3 * hd + j] = d_o * o * (F::one() - o);
                            dcr[j] = dc * fg;
                        }
                    }
                    dc_next[l] = dc_in;
                    dph.assign(&dpx);
                }
            }
            let gl = &mut grads.layers[l];
            general_mat_mul(F::one(), &dph.t(), &cache.h_prev, F::one(), &mut gl.u);
            gl.b += &dpx.sum_axis(Axis(0));
            general_mat_mul(F::one(), &dph, &p.u, F::one(), &mut dh_prev);
            if l == 0 {
                for (i, &a) in syms.iter().enumerate() {
                    gl.w.column_mut(a).scaled_add(F::one(), &dpx.row(i));
                }
            } else {
                let below = &fwd.steps[t][l - 1].h;
                general_mat_mul(F::one(), &dpx.t(), below, F::one(), &mut gl.w);
                from_above = Some(dpx.dot(&p.w));
            }
            dh_next[l] = dh_prev;
        }
    }
    (loss, grads, correct)
}

/// Mean loss and gradient over a whole dataset of mixed lengths.
pub fn dataset_loss_and_grad<F: Scalar>(net: &RnnAcceptor<F>, data: &[(Word, bool)]) -> (F, Params<F>) {
    let n = F::from_usize(data.len()).expect("dataset size");
    let mut total = F::zero();
    let mut grads = Params::zeros_like(&net.params);
    for idx in buckets(data).values() {
        let words: Vec<&[Symbol]> = idx.iter().map(|&i| data[i].0.as_slice()).collect();
        let labels: Vec<bool> = idx.iter().map(|&i| data[i].1).collect();
        let (loss, g, _) = batch_loss_and_grad(net, &words, &labels);
        let weight = F::from_usize(idx.len()).expect("bucket size") / n;
        total += loss * weight;
        for (acc, part) in grads.slices_mut().into_iter().zip(g.slices()) {
            for (a, &p) in acc.iter_mut().zip(part) {
                *a += p * weight;
            }
        }
    }
    (total, grads)
}

fn buckets(data: &[(Word, bool)]) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (w, _)) in data.iter().enumerate() {
        out.entry(w.len()).or_default().push(i);
    }
    out
}

/// Adaptive moment estimation.
#[derive(Clone, Debug)]
pub struct Adam<F> {
    pub lr: F,
    pub beta1: F,
    pub beta2: F,
    pub eps: F,
    t: i32,
    m: Params<F>,
    v: Params<F>,
}

impl<F: Scalar> Adam<F> {
    pub fn new(params: &Params<F>, lr: F) -> Self {
        Adam {
            lr,
            beta1: F::lit(0.9),
            beta2: F::lit(0.999),
            eps: F::lit(1e-8),
            t: 0,
            m: Params::zeros_like(params),
            v: Params::zeros_like(params),
        }
    }

    pub fn step(&mut self, params: &mut Params<F>, grads: &Params<F>) {
        self.t += 1;
        let bc1 = F::one() - self.beta1.powi(self.t);
        let bc2 = F::one() - self.beta2.powi(self.t);
        let (b1, b2) = (self.beta1, self.beta2);
        for (((p, g), m), v) in params
            .slices_mut()
            .into_iter()
            .zip(grads.slices())
            .zip(self.m.slices_mut())
            .zip(self.v.slices_mut())
        {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (F::one() - b1) * g[i];
                v[i] = b2 * v[i] + (F::one() - b2) * g[i] * g[i];
                let mh = m[i] / bc1;
                let vh = v[i] / bc2;
                p[i] -= self.lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop as soon as train accuracy reaches this fraction.
    pub target_accuracy: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global gradient-norm clip; non-positive disables clipping.
    pub clip_norm: f64,
    /// Wall-clock cap in seconds; non-positive means none.
    pub max_seconds: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            learning_rate: 0.005,
            batch_size: 32,
            max_epochs: 200,
            target_accuracy: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 5.0,
            max_seconds: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub accuracy: f64,
    pub epochs: usize,
    pub loss: f64,
    pub reached_target: bool,
    pub seconds: f64,
}

/// Trains a freshly initialised network on `data` with Adam on binary
/// cross-entropy. Deterministic in `cfg.seed`. Not reaching the target
/// accuracy is reported, not an error.
pub fn train<F: Scalar>(
    shape: Shape,
    alphabet: &Alphabet,
    data: &[(Word, bool)],
    cfg: &TrainConfig,
) -> Result<(RnnAcceptor<F>, TrainReport)> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if cfg.learning_rate <= 0.0 || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument(
            "learning rate and batch size must be positive".into(),
        ));
    }
    let mut seen: HashMap<&[Symbol], bool> = HashMap::new();
    for (w, label) in data {
        alphabet.check(w)?;
        if seen.insert(w, *label).is_some_and(|old| old != *label) {
            return Err(Error::InvalidArgument(format!(
                "word {:?} carries both labels",
                alphabet.render(w)
            )));
        }
    }

    let start = Instant::now();
    let mut net = RnnAcceptor::<F>::random(shape, alphabet.clone(), cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_da7a);
    let mut adam = Adam::new(&net.params, F::lit(cfg.learning_rate));
    adam.beta1 = F::lit(cfg.beta1);
    adam.beta2 = F::lit(cfg.beta2);
    adam.eps = F::lit(cfg.epsilon);

    let mut groups: Vec<Vec<usize>> = buckets(data).into_values().collect();
    let n = data.len() as f64;
    let mut report = TrainReport {
        accuracy: 0.0,
        epochs: 0,
        loss: f64::INFINITY,
        reached_target: false,
        seconds: 0.0,
    };
    for epoch in 1..=cfg.max_epochs {
        let mut batches: Vec<Vec<usize>> = Vec::new();
        for g in &mut groups {
            g.shuffle(&mut rng);
            batches.extend(g.chunks(cfg.batch_size).map(<[usize]>::to_vec));
        }
        batches.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        let mut running_correct = 0;
        for batch in &batches {
            let words: Vec<&[Symbol]> = batch.iter().map(|&i| data[i].0.as_slice()).collect();
            let labels: Vec<bool> = batch.iter().map(|&i| data[i].1).collect();
            let (loss, mut grads, correct) = batch_loss_and_grad(&net, &words, &labels);
            epoch_loss += loss.to_f64().unwrap_or(f64::NAN) * batch.len() as f64;
            running_correct += correct;
            if cfg.clip_norm > 0.0 {
                clip(&mut grads, F::lit(cfg.clip_norm));
            }
            adam.step(&mut net.params, &grads);
        }
        report.epochs = epoch;
        report.loss = epoch_loss / n;
        // cheap filter before an exact evaluation with the final weights
        if running_correct as f64 / n >= cfg.target_accuracy || epoch == cfg.max_epochs {
            report.accuracy = accuracy(&net, data)?;
            if report.accuracy >= cfg.target_accuracy {
                report.reached_target = true;
                break;
            }
        }
        if cfg.max_seconds > 0.0 && start.elapsed().as_secs_f64() > cfg.max_seconds {
            report.accuracy = accuracy(&net, data)?;
            break;
        }
        log::debug!(
            "epoch {epoch}: loss {:.5} running acc {:.4}",
            report.loss,
            running_correct as f64 / n
        );
    }
    report.seconds = start.elapsed().as_secs_f64();
    Ok((net, report))
}

fn clip<F: Scalar>(grads: &mut Params<F>, max_norm: F) {
    let norm = grads
        .slices()
        .iter()
        .flat_map(|s| s.iter())
        .fold(F::zero(), |acc, &g| acc + g * g)
        .sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for s in grads.slices_mut() {
            s.iter_mut().for_each(|g| *g *= scale);
        }
    }
}

/// Fraction of `data` the network labels correctly.
pub fn accuracy<F: Scalar>(net: &RnnAcceptor<F>, data: &[(Word, bool)]) -> Result<f64> {
    let words: Vec<Word> = data.iter().map(|(w, _)| w.clone()).collect();
    let got = net.accepts_batch(&words)?;
    let correct = got.iter().zip(data).filter(|(g, (_, y))| *g == y).count();
    Ok(correct as f64 / data.len() as f64)
}
