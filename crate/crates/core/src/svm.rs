//! RBF-kernel soft-margin SVM trained by sequential minimal optimization.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Default box constraint.
pub const DEFAULT_C: f64 = 1e4;
/// Stopping tolerance on the maximal KKT violation.
pub const KKT_TOLERANCE: f64 = 1e-3;
const MAX_ITERATIONS: usize = 1_000_000;
const TAU: f64 = 1e-12;
/// Kernel rows kept before the cache is flushed.
const CACHE_ROWS: usize = 4096;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Pos,
    Neg,
}

/// Outcome of a fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Every training point lands on its own side.
    pub perfect: bool,
    pub training_errors: usize,
    pub iterations: usize,
    /// Final maximal KKT violation.
    pub kkt_gap: f64,
    /// Dual objective `0.5 a'Qa - sum(a)` at the solution (minimised).
    pub objective: f64,
}

/// A trained model: `f(x) = sum_i coef_i K(sv_i, x) - rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbfSvm<F> {
    support: Array2<F>,
    /// Signed dual coefficients `alpha_i * y_i`.
    coef: Vec<F>,
    rho: F,
    gamma: F,
    c: F,
}

fn sq_dist<F: Scalar>(a: ArrayView1<F>, b: ArrayView1<F>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let d = (x - y).to_f64().unwrap_or(f64::NAN);
            d * d
        })
        .sum()
}

struct Kernel<'a, F> {
    x: &'a Array2<F>,
    gamma: f64,
    rows: HashMap<usize, Vec<f64>>,
}

impl<F: Scalar> Kernel<'_, F> {
    fn row(&mut self, i: usize) -> &[f64] {
        if !self.rows.contains_key(&i) {
            if self.rows.len() >= CACHE_ROWS {
                self.rows.clear();
            }
            let xi = self.x.row(i);
            let row = self
                .x
                .rows()
                .into_iter()
                .map(|xj| (-self.gamma * sq_dist(xi, xj)).exp())
                .collect();
            self.rows.insert(i, row);
        }
        &self.rows[&i]
    }
}

impl<F: Scalar> RbfSvm<F> {
    /// Separates `positive` from `negative` with default `C` and
    /// `gamma = 1 / dim`.
    pub fn fit_default(positive: &[Array1<F>], negative: &[Array1<F>]) -> Result<(Self, FitReport)> {
        let dim = positive.first().map_or(1, |v| v.len().max(1));
        Self::fit(positive, negative, DEFAULT_C, 1.0 / dim as f64, 0)
    }

    /// Solves the soft-margin dual to KKT tolerance 1e-3.
    ///
    /// Working pairs are chosen by maximal violation with second-order gain,
    /// which is deterministic, so `seed` has no effect; it is kept so callers
    /// can thread one seed through every randomised component.
    pub fn fit(
        positive: &[Array1<F>],
        negative: &[Array1<F>],
        c: f64,
        gamma: f64,
        _seed: u64,
    ) -> Result<(Self, FitReport)> {
        if positive.is_empty() {
            return Err(Error::EmptyClass("positive"));
        }
        if negative.is_empty() {
            return Err(Error::EmptyClass("negative"));
        }
        if !(c > 0.0 && gamma > 0.0) {
            return Err(Error::InvalidArgument("C and gamma must be positive".into()));
        }
        let dim = positive[0].len();
        for v in positive.iter().chain(negative) {
            if v.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let n = positive.len() + negative.len();
        let mut x = Array2::zeros((n, dim));
        for (mut row, v) in x.rows_mut().into_iter().zip(positive.iter().chain(negative)) {
            row.assign(v);
        }
        let y: Vec<f64> = (0..n).map(|i| if i < positive.len() { 1.0 } else { -1.0 }).collect();

        let mut kernel = Kernel {
            x: &x,
            gamma,
            rows: HashMap::new(),
        };
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let up = |a: f64, yy: f64| (yy > 0.0 && a < c) || (yy < 0.0 && a > 0.0);
        let low = |a: f64, yy: f64| (yy > 0.0 && a > 0.0) || (yy < 0.0 && a < c);

        let mut iterations = 0;
        let mut gap;
        loop {
            // first index: maximal violator in the up set
            let mut gmax = f64::NEG_INFINITY;
            let mut i = usize::MAX;
            for t in 0..n {
                if up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                    gmax = -y[t] * grad[t];
                    i = t;
                }
            }
            let mut gmin = f64::INFINITY;
            let mut j = usize::MAX;
            if i != usize::MAX {
                let ki = kernel.row(i).to_vec();
                let mut best = f64::INFINITY;
                for t in 0..n {
                    if !low(alpha[t], y[t]) {
                        continue;
                    }
                    let v = -y[t] * grad[t];
                    gmin = gmin.min(v);
                    let b = gmax - v;
                    if b > 0.0 {
                        let kt = kernel.row(t)[t];
                        let mut a = ki[i] + kt - 2.0 * ki[t];
                        if a <= 0.0 {
                            a = TAU;
                        }
                        if -(b * b) / a < best {
                            best = -(b * b) / a;
                            j = t;
                        }
                    }
                }
            }
            gap = gmax - gmin;
            if gap < KKT_TOLERANCE || j == usize::MAX {
                break;
            }
            if iterations >= MAX_ITERATIONS {
                log::warn!("svm: iteration cap reached with KKT gap {gap}");
                break;
            }
            iterations += 1;

            let ki = kernel.row(i).to_vec();
            let kj = kernel.row(j).to_vec();
            let (ai, aj) = (alpha[i], alpha[j]);
            let mut quad = ki[i] + kj[j] - 2.0 * ki[j];
            if quad <= 0.0 {
                quad = TAU;
            }
            if y[i] != y[j] {
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = ai - aj;
                let (mut ni, mut nj) = (ai + delta, aj + delta);
                if diff > 0.0 {
                    if nj < 0.0 {
                        nj = 0.0;
                        ni = diff;
                    }
                } else if ni < 0.0 {
                    ni = 0.0;
                    nj = -diff;
                }
                if diff > 0.0 {
                    if ni > c {
                        ni = c;
                        nj = c - diff;
                    }
                } else if nj > c {
                    nj = c;
                    ni = c + diff;
                }
                alpha[i] = ni;
                alpha[j] = nj;
            } else {
                let delta = (grad[i] - grad[j]) / quad;
                let sum = ai + aj;
                let (mut ni, mut nj) = (ai - delta, aj + delta);
                if sum > c {
                    if ni > c {
                        ni = c;
                        nj = sum - c;
                    }
                } else if nj < 0.0 {
                    nj = 0.0;
                    ni = sum;
                }
                if sum > c {
                    if nj > c {
                        nj = c;
                        ni = sum - c;
                    }
                } else if ni < 0.0 {
                    ni = 0.0;
                    nj = sum;
                }
                alpha[i] = ni;
                alpha[j] = nj;
            }
            let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
            for t in 0..n {
                grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
            }
        }

        // offset from free vectors, else midpoint of the feasible interval
        let (mut ub, mut lb, mut sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if alpha[t] >= c {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
        let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();

        let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
        let mut support = Array2::zeros((sv.len(), dim));
        for (mut row, &t) in support.rows_mut().into_iter().zip(&sv) {
            row.assign(&x.row(t));
        }
        let model = RbfSvm {
            support,
            coef: sv.iter().map(|&t| F::lit(alpha[t] * y[t])).collect(),
            rho: F::lit(rho),
            gamma: F::lit(gamma),
            c: F::lit(c),
        };
        let training_errors = (0..n)
            .filter(|&t| {
                let want = if y[t] > 0.0 { Side::Pos } else { Side::Neg };
                model.side(x.row(t)) != want
            })
            .count();
        let report = FitReport {
            perfect: training_errors == 0,
            training_errors,
            iterations,
            kkt_gap: gap.max(0.0),
            objective,
        };
        Ok((model, report))
    }

    /// Decision value; positive side when `>= 0`.
    pub fn decision_value(&self, x: ArrayView1<F>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.value(x))
    }

    fn value(&self, x: ArrayView1<F>) -> f64 {
        let gamma = self.gamma.to_f64().unwrap_or(f64::NAN);
        let s: f64 = self
            .support
            .rows()
            .into_iter()
            .zip(&self.coef)
            .map(|(sv, &a)| a.to_f64().unwrap_or(f64::NAN) * (-gamma * sq_dist(sv, x)).exp())
            .sum();
        s - self.rho.to_f64().unwrap_or(f64::NAN)
    }

    fn side(&self, x: ArrayView1<F>) -> Side {
        if self.value(x) >= 0.0 {
            Side::Pos
        } else {
            Side::Neg
        }
    }

    /// Side of `x`; a zero decision value counts as positive.
    pub fn decide(&self, x: ArrayView1<F>) -> Result<Side> {
        Ok(if self.decision_value(x)? >= 0.0 {
            Side::Pos
        } else {
            Side::Neg
        })
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn support_vectors(&self) -> &Array2<F> {
        &self.support
    }

    pub fn dual_coefficients(&self) -> &[F] {
        &self.coef
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }

    pub fn c(&self) -> F {
        self.c
    }
}
