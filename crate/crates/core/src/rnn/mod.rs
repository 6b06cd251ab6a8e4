//! GRU and LSTM acceptors over one-hot inputs.
//!
//! The network state seen by the rest of the crate is the concatenation of
//! every layer's recurrent state, bottom layer first; an LSTM layer contributes
//! its `h` followed by its `c`. The classifier head reads only the top layer's
//! `h`.

mod construct;
mod train;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayViewMut1, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automata::{Alphabet, Label, Symbol};
use crate::{Error, Result, Scalar};

pub use construct::gru_from_dfa;
pub use train::{accuracy, batch_loss_and_grad, dataset_loss_and_grad, train, Adam, TrainConfig, TrainReport};

/// Continuous network state.
pub type RState<F> = Array1<F>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Gru,
    Lstm,
}

impl Cell {
    /// Number of gate blocks stacked in each weight matrix.
    pub fn gates(self) -> usize {
        match self {
            Cell::Gru => 3,
            Cell::Lstm => 4,
        }
    }

    /// Vectors of width `hidden` each layer contributes to the state.
    pub fn vectors_per_layer(self) -> usize {
        match self {
            Cell::Gru => 1,
            Cell::Lstm => 2,
        }
    }
}

/// Architecture of a network, without weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub cell: Cell,
    pub n_layers: usize,
    pub hidden: usize,
}

/// One recurrent layer. Gate blocks are stacked row-wise: `[r; z; n]` for a
/// GRU, `[i; f; g; o]` for an LSTM.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<F> {
    /// (gates * hidden) x input
    pub w: Array2<F>,
    /// (gates * hidden) x hidden
    pub u: Array2<F>,
    pub b: Array1<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classifier<F> {
    pub w: Array1<F>,
    pub b: F,
}

/// All trainable parameters; also used as the gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct Params<F> {
    pub layers: Vec<LayerParams<F>>,
    pub classifier: Classifier<F>,
}

impl<F: Scalar> Params<F> {
    pub fn zeros_like(other: &Params<F>) -> Self {
        Params {
            layers: other
                .layers
                .iter()
                .map(|l| LayerParams {
                    w: Array2::zeros(l.w.raw_dim()),
                    u: Array2::zeros(l.u.raw_dim()),
                    b: Array1::zeros(l.b.raw_dim()),
                })
                .collect(),
            classifier: Classifier {
                w: Array1::zeros(other.classifier.w.raw_dim()),
                b: F::zero(),
            },
        }
    }

    pub fn slices(&self) -> Vec<&[F]> {
        let mut out = Vec::with_capacity(3 * self.layers.len() + 2);
        for l in &self.layers {
            out.push(l.w.as_slice().expect("standard layout"));
            out.push(l.u.as_slice().expect("standard layout"));
            out.push(l.b.as_slice().expect("standard layout"));
        }
        out.push(self.classifier.w.as_slice().expect("standard layout"));
        out.push(std::slice::from_ref(&self.classifier.b));
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [F]> {
        let mut out = Vec::with_capacity(3 * self.layers.len() + 2);
        for l in &mut self.layers {
            out.push(l.w.as_slice_mut().expect("standard layout"));
            out.push(l.u.as_slice_mut().expect("standard layout"));
            out.push(l.b.as_slice_mut().expect("standard layout"));
        }
        out.push(self.classifier.w.as_slice_mut().expect("standard layout"));
        out.push(std::slice::from_mut(&mut self.classifier.b));
        out
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A recurrent binary classifier over words.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnAcceptor<F> {
    shape: Shape,
    alphabet: Alphabet,
    params: Params<F>,
}

pub(crate) fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

impl<F: Scalar> RnnAcceptor<F> {
    /// Weights drawn uniformly from ±1/sqrt(hidden), deterministic in `seed`.
    pub fn random(shape: Shape, alphabet: Alphabet, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (shape.hidden.max(1) as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        let mut net = Self::zeros(shape, alphabet)?;
        for slice in net.params.slices_mut() {
            for v in slice.iter_mut() {
                *v = F::lit(dist.sample(&mut rng));
            }
        }
        Ok(net)
    }

    pub fn zeros(shape: Shape, alphabet: Alphabet) -> Result<Self> {
        if shape.n_layers == 0 || shape.hidden == 0 {
            return Err(Error::InvalidArgument(
                "network needs at least one layer and unit".into(),
            ));
        }
        let g = shape.cell.gates() * shape.hidden;
        let layers = (0..shape.n_layers)
            .map(|l| {
                let input = if l == 0 { alphabet.len() } else { shape.hidden };
                LayerParams {
                    w: Array2::zeros((g, input)),
                    u: Array2::zeros((g, shape.hidden)),
                    b: Array1::zeros(g),
                }
            })
            .collect();
        Ok(RnnAcceptor {
            shape,
            alphabet,
            params: Params {
                layers,
                classifier: Classifier {
                    w: Array1::zeros(shape.hidden),
                    b: F::zero(),
                },
            },
        })
    }

    pub fn from_params(shape: Shape, alphabet: Alphabet, params: Params<F>) -> Result<Self> {
        let template = Self::zeros(shape, alphabet)?;
        let ok = params.layers.len() == template.params.layers.len()
            && params
                .layers
                .iter()
                .zip(&template.params.layers)
                .all(|(a, b)| a.w.dim() == b.w.dim() && a.u.dim() == b.u.dim() && a.b.dim() == b.b.dim())
            && params.classifier.w.dim() == template.params.classifier.w.dim();
        if !ok {
            return Err(Error::Malformed(
                "parameter shapes disagree with the declared architecture".into(),
            ));
        }
        Ok(RnnAcceptor { params, ..template })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn params(&self) -> &Params<F> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params<F> {
        &mut self.params
    }

    /// Dimension of the concatenated state vector.
    pub fn state_dim(&self) -> usize {
        self.shape.cell.vectors_per_layer() * self.shape.n_layers * self.shape.hidden
    }

    /// Offset of layer `l`'s block in the state vector.
    fn layer_offset(&self, l: usize) -> usize {
        l * self.shape.cell.vectors_per_layer() * self.shape.hidden
    }

    /// Indices of the top layer's `h` inside the state vector.
    pub fn top_h_range(&self) -> std::ops::Range<usize> {
        let off = self.layer_offset(self.shape.n_layers - 1);
        off..off + self.shape.hidden
    }

    /// Indices of every `h` block (all of the state for a GRU).
    pub fn h_ranges(&self) -> Vec<std::ops::Range<usize>> {
        (0..self.shape.n_layers)
            .map(|l| {
                let off = self.layer_offset(l);
                off..off + self.shape.hidden
            })
            .collect()
    }

    pub fn initial_state(&self) -> RState<F> {
        Array1::zeros(self.state_dim())
    }

    fn check_state(&self, h: &ArrayView1<F>) -> Result<()> {
        if h.len() != self.state_dim() {
            return Err(Error::Dimension {
                expected: self.state_dim(),
                got: h.len(),
            });
        }
        Ok(())
    }

    /// g_R(h, sym).
    pub fn step(&self, h: &RState<F>, sym: Symbol) -> Result<RState<F>> {
        self.check_state(&h.view())?;
        self.alphabet.check(&[sym])?;
        let mut out = h.clone();
        self.step_in_place(out.view_mut(), sym);
        Ok(out)
    }

    fn step_in_place(&self, mut state: ArrayViewMut1<F>, sym: Symbol) {
        let hd = self.shape.hidden;
        for (l, p) in self.params.layers.iter().enumerate() {
            let mut pre_x = p.b.clone();
            if l == 0 {
                pre_x += &p.w.column(sym);
            } else {
                let below = self.layer_offset(l - 1);
                let x = state.slice(s![below..below + hd]);
                pre_x += &p.w.dot(&x);
            }
            let off = self.layer_offset(l);
            let h_prev = state.slice(s![off..off + hd]).to_owned();
            let pre_h = p.u.dot(&h_prev);
            match self.shape.cell {
                Cell::Gru => {
                    let mut h_new = state.slice_mut(s![off..off + hd]);
                    for j in 0..hd {
                        let r = sigmoid(pre_x[j] + pre_h[j]);
                        let z = sigmoid(pre_x[hd + j] + pre_h[hd + j]);
                        let n = (pre_x[2 * hd + j] + r * pre_h[2 * hd + j]).tanh();
                        h_new[j] = (F::one() - z) * n + z * h_prev[j];
                    }
                }
                Cell::Lstm => {
                    for j in 0..hd {
                        let i = sigmoid(pre_x[j] + pre_h[j]);
                        let f = sigmoid(pre_x[hd + j] + pre_h[hd + j]);
                        let g = (pre_x[2 * hd + j] + pre_h[2 * hd + j]).tanh();
                        let o = sigmoid(pre_x[3 * hd + j] + pre_h[3 * hd + j]);
                        let c = f * state[off + hd + j] + i * g;
                        state[off + hd + j] = c;
                        state[off + j] = o * c.tanh();
                    }
                }
            }
        }
    }

    /// ĝ_R(h, w).
    pub fn run_from(&self, h: &RState<F>, w: &[Symbol]) -> Result<RState<F>> {
        self.check_state(&h.view())?;
        self.alphabet.check(w)?;
        let mut out = h.clone();
        for &a in w {
            self.step_in_place(out.view_mut(), a);
        }
        Ok(out)
    }

    pub fn run(&self, w: &[Symbol]) -> Result<RState<F>> {
        self.run_from(&self.initial_state(), w)
    }

    /// Pre-sigmoid classifier output for a state.
    pub fn logit(&self, h: &RState<F>) -> Result<F> {
        self.check_state(&h.view())?;
        let top = h.slice(s![self.top_h_range()]);
        Ok(self.params.classifier.w.dot(&top) + self.params.classifier.b)
    }

    /// f_R: accepting iff sigmoid(logit) >= 0.5.
    pub fn classify_state(&self, h: &RState<F>) -> Result<Label> {
        Ok((sigmoid(self.logit(h)?) >= F::lit(0.5)).into())
    }

    pub fn classify_word(&self, w: &[Symbol]) -> Result<Label> {
        self.classify_state(&self.run(w)?)
    }

    pub fn accepts(&self, w: &[Symbol]) -> Result<bool> {
        Ok(self.classify_word(w)?.is_acc())
    }

    /// Classifies many words, batching words of equal length through matrix
    /// products. Same answers as [`RnnAcceptor::accepts`] up to float rounding
    /// of the batched products.
    pub fn accepts_batch(&self, words: &[Vec<Symbol>]) -> Result<Vec<bool>> {
        for w in words {
            self.alphabet.check(w)?;
        }
        let mut by_len: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, w) in words.iter().enumerate() {
            by_len.entry(w.len()).or_default().push(i);
        }
        let mut out = vec![false; words.len()];
        for idx in by_len.values() {
            for chunk in idx.chunks(512) {
                let batch: Vec<&[Symbol]> = chunk.iter().map(|&i| words[i].as_slice()).collect();
                let logits = train::forward_logits(self, &batch);
                for (&i, &z) in chunk.iter().zip(logits.iter()) {
                    out[i] = sigmoid(z) >= F::lit(0.5);
                }
            }
        }
        Ok(out)
    }

    /// Final states of a batch of equal-length words, one row per word.
    pub fn run_batch(&self, words: &[&[Symbol]]) -> Result<Array2<F>> {
        for w in words {
            self.alphabet.check(w)?;
        }
        if words.windows(2).any(|p| p[0].len() != p[1].len()) {
            return Err(Error::InvalidArgument("run_batch needs words of equal length".into()));
        }
        Ok(train::forward_states(self, words))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&WeightsDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: WeightsDoc<F> = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
struct LayerDoc<F> {
    w: Vec<Vec<F>>,
    u: Vec<Vec<F>>,
    b: Vec<F>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
struct ClassifierDoc<F> {
    w: Vec<F>,
    b: F,
}

/// Weight file layout; matrices are row-major nested arrays.
#[derive(Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
struct WeightsDoc<F> {
    cell: Cell,
    n_layers: usize,
    hidden: usize,
    alphabet: Alphabet,
    layers: Vec<LayerDoc<F>>,
    classifier: ClassifierDoc<F>,
}

fn rows<F: Scalar>(m: &Array2<F>) -> Vec<Vec<F>> {
    m.axis_iter(Axis(0)).map(|r| r.to_vec()).collect()
}

fn matrix<F: Scalar>(rows: Vec<Vec<F>>, shape: (usize, usize)) -> Result<Array2<F>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::Malformed(format!(
            "matrix shape does not match expected {}x{}",
            shape.0, shape.1
        )));
    }
    let flat: Vec<F> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec(shape, flat).map_err(|e| Error::Malformed(e.to_string()))
}

impl<F: Scalar> From<&RnnAcceptor<F>> for WeightsDoc<F> {
    fn from(net: &RnnAcceptor<F>) -> Self {
        WeightsDoc {
            cell: net.shape.cell,
            n_layers: net.shape.n_layers,
            hidden: net.shape.hidden,
            alphabet: net.alphabet.clone(),
            layers: net
                .params
                .layers
                .iter()
                .map(|l| LayerDoc {
                    w: rows(&l.w),
                    u: rows(&l.u),
                    b: l.b.to_vec(),
                })
                .collect(),
            classifier: ClassifierDoc {
                w: net.params.classifier.w.to_vec(),
                b: net.params.classifier.b,
            },
        }
    }
}

impl<F: Scalar> TryFrom<WeightsDoc<F>> for RnnAcceptor<F> {
    type Error = Error;

    fn try_from(doc: WeightsDoc<F>) -> Result<Self> {
        let shape = Shape {
            cell: doc.cell,
            n_layers: doc.n_layers,
            hidden: doc.hidden,
        };
        let template = RnnAcceptor::<F>::zeros(shape, doc.alphabet.clone())?;
        if doc.layers.len() != doc.n_layers {
            return Err(Error::Malformed(format!(
                "{} layers listed, {} declared",
                doc.layers.len(),
                doc.n_layers
            )));
        }
        let layers = doc
            .layers
            .into_iter()
            .zip(&template.params.layers)
            .map(|(l, t)| {
                if l.b.len() != t.b.len() {
                    return Err(Error::Malformed("bias length does not match hidden size".into()));
                }
                Ok(LayerParams {
                    w: matrix(l.w, t.w.dim())?,
                    u: matrix(l.u, t.u.dim())?,
                    b: Array1::from(l.b),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if doc.classifier.w.len() != doc.hidden {
            return Err(Error::Malformed("classifier width does not match hidden size".into()));
        }
        let params = Params {
            layers,
            classifier: Classifier {
                w: Array1::from(doc.classifier.w),
                b: doc.classifier.b,
            },
        };
        RnnAcceptor::from_params(shape, doc.alphabet, params)
    }
}
