use ndarray::array;
use ndarray::Array1;

use lstar_rnn::automata::words_up_to;
use lstar_rnn::automata::{Alphabet, Label};
use lstar_rnn::rnn::*;
use lstar_rnn::Error;

fn binary() -> Alphabet {
    Alphabet::from_chars("01").unwrap()
}

fn gru(hidden: usize, layers: usize, seed: u64) -> RnnAcceptor<f64> {
    let shape = Shape {
        cell: Cell::Gru,
        n_layers: layers,
        hidden,
    };
    RnnAcceptor::random(shape, binary(), seed).unwrap()
}

fn lstm(hidden: usize, layers: usize, seed: u64) -> RnnAcceptor<f64> {
    let shape = Shape {
        cell: Cell::Lstm,
        n_layers: layers,
        hidden,
    };
    RnnAcceptor::random(shape, binary(), seed).unwrap()
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Straight-line single-layer GRU cell, written without ndarray.
fn gru_reference(net: &RnnAcceptor<f64>, h: &[f64], sym: usize) -> Vec<f64> {
    let p = &net.params().layers[0];
    let hd = h.len();
    let mut out = vec![0.0; hd];
    for j in 0..hd {
        let mut ar = p.b[j] + p.w[[j, sym]];
        let mut az = p.b[hd + j] + p.w[[hd + j, sym]];
        let an = p.b[2 * hd + j] + p.w[[2 * hd + j, sym]];
        let mut un = 0.0;
        for k in 0..hd {
            ar += p.u[[j, k]] * h[k];
            az += p.u[[hd + j, k]] * h[k];
            un += p.u[[2 * hd + j, k]] * h[k];
        }
        let r = sig(ar);
        let z = sig(az);
        let n = (an + r * un).tanh();
        out[j] = (1.0 - z) * n + z * h[j];
    }
    out
}

/// Straight-line single-layer LSTM cell; state is [h, c].
fn lstm_reference(net: &RnnAcceptor<f64>, state: &[f64], sym: usize) -> Vec<f64> {
    let p = &net.params().layers[0];
    let hd = state.len() / 2;
    let (h, c) = state.split_at(hd);
    let mut out = vec![0.0; 2 * hd];
    for j in 0..hd {
        let mut pre = [0.0; 4];
        for (gate, v) in pre.iter_mut().enumerate() {
            let row = gate * hd + j;
            *v = p.b[row] + p.w[[row, sym]];
            for k in 0..hd {
                *v += p.u[[row, k]] * h[k];
            }
        }
        let i = sig(pre[0]);
        let f = sig(pre[1]);
        let g = pre[2].tanh();
        let o = sig(pre[3]);
        let cn = f * c[j] + i * g;
        out[hd + j] = cn;
        out[j] = o * cn.tanh();
    }
    out
}

#[test]
fn initial_state_dimensions() {
    assert_eq!(gru(4, 1, 0).initial_state(), Array1::<f64>::zeros(4));
    let big = lstm(100, 2, 0);
    assert_eq!(big.initial_state().len(), 400);
    assert!(big.initial_state().iter().all(|&v| v == 0.0));
    assert_eq!(big.initial_state(), big.initial_state());
}

#[test]
fn zero_gru_stays_at_zero() {
    let shape = Shape {
        cell: Cell::Gru,
        n_layers: 1,
        hidden: 4,
    };
    let net = RnnAcceptor::<f64>::zeros(shape, binary()).unwrap();
    let h = net.step(&net.initial_state(), 1).unwrap();
    assert_eq!(h, Array1::<f64>::zeros(4));
    let h = array![1.0, -2.0, 0.5, 0.0];
    // update gate 0.5 and candidate 0 halve the state
    assert_eq!(net.step(&h, 0).unwrap(), array![0.5, -1.0, 0.25, 0.0]);
}

#[test]
fn step_matches_reference_gru() {
    let net = gru(4, 1, 11);
    let mut h = net.initial_state();
    for &a in &[1, 0, 0, 1, 1, 0] {
        let expected = gru_reference(&net, h.as_slice().unwrap(), a);
        h = net.step(&h, a).unwrap();
        for (x, y) in h.iter().zip(&expected) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
    assert_eq!(net.step(&h, 1).unwrap(), net.step(&h, 1).unwrap());
}

#[test]
fn step_matches_reference_lstm() {
    let net = lstm(4, 1, 5);
    let mut h = net.initial_state();
    for &a in &[0, 1, 1, 0, 1] {
        let expected = lstm_reference(&net, h.as_slice().unwrap(), a);
        h = net.step(&h, a).unwrap();
        for (x, y) in h.iter().zip(&expected) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn step_errors() {
    let net = gru(4, 1, 0);
    assert!(matches!(
        net.step(&Array1::zeros(3), 0),
        Err(Error::Dimension { expected: 4, got: 3 })
    ));
    assert!(net.step(&net.initial_state(), 2).is_err());
    assert!(net.classify_word(&[0, 7]).is_err());
}

#[test]
fn classifier_bias_and_tie() {
    let mut net = gru(4, 2, 1);
    net.params_mut().classifier.w.fill(0.0);
    net.params_mut().classifier.b = 0.0;
    assert_eq!(net.classify_state(&net.initial_state()).unwrap(), Label::Acc);
    net.params_mut().classifier.b = 10.0;
    assert_eq!(net.classify_word(&[0, 1, 1]).unwrap(), Label::Acc);
    net.params_mut().classifier.b = -10.0;
    assert_eq!(net.classify_word(&[0, 1, 1]).unwrap(), Label::Rej);
}

#[test]
fn classify_word_is_fold_of_step() {
    let net = lstm(6, 2, 3);
    assert_eq!(
        net.classify_word(&[]).unwrap(),
        net.classify_state(&net.initial_state()).unwrap()
    );
    let h1 = net.step(&net.initial_state(), 1).unwrap();
    assert_eq!(net.classify_word(&[1]).unwrap(), net.classify_state(&h1).unwrap());
}

#[test]
fn batched_forward_matches_single() {
    for net in [gru(5, 2, 9), lstm(5, 2, 9)] {
        let words: Vec<Vec<usize>> = words_up_to(2, 6).collect();
        let batch = net.accepts_batch(&words).unwrap();
        for (w, b) in words.iter().zip(batch) {
            assert_eq!(net.accepts(w).unwrap(), b);
        }
        let same: Vec<&[usize]> = vec![&[0, 1, 1], &[1, 1, 0]];
        let states = net.run_batch(&same).unwrap();
        for (row, w) in states.rows().into_iter().zip(&same) {
            let single = net.run(w).unwrap();
            for (x, y) in row.iter().zip(single.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn weights_round_trip() {
    for net in [gru(3, 2, 4), lstm(3, 1, 4)] {
        let text = net.to_json().unwrap();
        assert_eq!(text, net.to_json().unwrap());
        let back = RnnAcceptor::<f64>::from_json(&text).unwrap();
        assert_eq!(back, net);
        for w in words_up_to(2, 5) {
            assert_eq!(back.run(&w).unwrap(), net.run(&w).unwrap());
        }
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["cell", "n_layers", "hidden", "alphabet", "layers", "classifier"]);
    }
}

#[test]
fn load_rejects_shape_mismatch() {
    let net = gru(3, 1, 4);
    let mut v: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
    v["hidden"] = serde_json::json!(4);
    assert!(RnnAcceptor::<f64>::from_json(&v.to_string()).is_err());
    let mut v: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
    v["layers"][0]["u"][0].as_array_mut().unwrap().pop();
    assert!(RnnAcceptor::<f64>::from_json(&v.to_string()).is_err());
    assert!(RnnAcceptor::<f64>::from_json("{").is_err());
}

#[test]
fn f32_network_runs() {
    let shape = Shape {
        cell: Cell::Gru,
        n_layers: 2,
        hidden: 3,
    };
    let net = RnnAcceptor::<f32>::random(shape, binary(), 2).unwrap();
    let back = RnnAcceptor::<f32>::from_json(&net.to_json().unwrap()).unwrap();
    assert_eq!(back.run(&[0, 1]).unwrap(), net.run(&[0, 1]).unwrap());
}
