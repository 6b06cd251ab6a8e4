use ndarray::{Array1, Array2};

use super::{Cell, Classifier, LayerParams, Params, RnnAcceptor, Shape};
use crate::automata::Dfa;
use crate::Result;

/// Gate saturation; sigmoid(±GATE) rounds to exactly 0 or 1 in f64.
const GATE: f64 = 50.0;
/// Candidate gain; tanh(±GAIN) rounds to exactly ±1 in f64.
const GAIN: f64 = 20.0;

/// A single-layer GRU that reproduces `dfa` exactly.
///
/// Reset gates are pinned open and update gates shut, so the cell acts as
/// `h' = tanh(W x + U h + b)`. There is one unit per (state, last symbol) pair
/// plus a "started" unit; after the first symbol the state vector is an exact
/// ±1 one-hot code of the pair, and the zero initial vector stands for the
/// initial state. The network therefore has finitely many reachable states,
/// one per reachable pair, and classifies every word as `dfa` does.
pub fn gru_from_dfa(dfa: &Dfa) -> Result<RnnAcceptor<f64>> {
    let n = dfa.n_states();
    let k = dfa.alphabet().len();
    let units = n * k;
    let hidden = units + 1;
    let started = units;
    let unit = |q: usize, a: usize| q * k + a;
    let q0 = dfa.initial();

    let mut w = Array2::zeros((3 * hidden, k));
    let mut u = Array2::zeros((3 * hidden, hidden));
    let mut b = Array1::zeros(3 * hidden);
    let nb = 2 * hidden;
    for j in 0..hidden {
        b[j] = GATE;
        b[hidden + j] = -GATE;
    }
    b[nb + started] = GAIN;
    for target in 0..n {
        for a in 0..k {
            let row = nb + unit(target, a);
            w[[row, a]] = 2.0 * GAIN;
            let from_initial = f64::from(u8::from(dfa.next(q0, a) == target));
            let mut preds = 0.0;
            for q in 0..n {
                if dfa.next(q, a) == target {
                    for tau in 0..k {
                        u[[row, unit(q, tau)]] = GAIN;
                        preds += 1.0;
                    }
                }
            }
            u[[row, started]] = GAIN * (preds - 2.0 * from_initial);
            b[row] = GAIN * (2.0 * from_initial - 3.0);
        }
    }

    let mut cw = Array1::zeros(hidden);
    let mut accepting_units = 0.0;
    for q in dfa.accepting_states() {
        for a in 0..k {
            cw[unit(q, a)] = GAIN;
            accepting_units += 1.0;
        }
    }
    let q0_acc = f64::from(u8::from(dfa.is_accepting(q0)));
    cw[started] = GAIN * (accepting_units - 2.0 * q0_acc);
    let cb = GAIN * (2.0 * q0_acc - 1.0);

    let shape = Shape {
        cell: Cell::Gru,
        n_layers: 1,
        hidden,
    };
    let params = Params {
        layers: vec![LayerParams { w, u, b }],
        classifier: Classifier { w: cw, b: cb },
    };
    RnnAcceptor::from_params(shape, dfa.alphabet().clone(), params)
}
