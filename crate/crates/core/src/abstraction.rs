//! Partitionings of the network's state space into abstract states, stored
//! as a decision tree that only ever grows.

use std::sync::Arc;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::svm::{FitReport, RbfSvm, Side, DEFAULT_C};
use crate::{Error, Result, Scalar};

/// Depth of the first, aggressive refinement.
pub const DEFAULT_INITIAL_DEPTH: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node<F> {
    Leaf {
        id: usize,
    },
    /// Goes `high` iff `h[dim] >= threshold`.
    Interval {
        dim: usize,
        threshold: F,
        low: Arc<Node<F>>,
        high: Arc<Node<F>>,
    },
    Svm {
        model: RbfSvm<F>,
        neg: Arc<Node<F>>,
        pos: Arc<Node<F>>,
    },
}

/// Maps state vectors to abstract-state ids. Refinement returns a new value
/// sharing every untouched subtree with the old one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partitioning<F> {
    root: Arc<Node<F>>,
    next_id: usize,
}

/// Result of a refinement.
#[derive(Clone, Debug)]
pub struct Refined<F> {
    pub partitioning: Partitioning<F>,
    /// Members of the separated set that no longer share a part with `h`.
    pub separated: usize,
    /// Present for SVM refinements.
    pub fit: Option<FitReport>,
}

impl<F: Scalar> Default for Partitioning<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> Partitioning<F> {
    /// The trivial partitioning: everything maps to 0.
    pub fn new() -> Self {
        Partitioning {
            root: Arc::new(Node::Leaf { id: 0 }),
            next_id: 1,
        }
    }

    pub fn root(&self) -> &Node<F> {
        &self.root
    }

    pub fn map(&self, h: ArrayView1<F>) -> Result<usize> {
        let mut node = &*self.root;
        loop {
            node = match node {
                Node::Leaf { id } => return Ok(*id),
                Node::Interval {
                    dim,
                    threshold,
                    low,
                    high,
                } => {
                    let v = *h.get(*dim).ok_or(Error::Dimension {
                        expected: dim + 1,
                        got: h.len(),
                    })?;
                    if v >= *threshold {
                        high
                    } else {
                        low
                    }
                }
                Node::Svm { model, neg, pos } => match model.decide(h)? {
                    Side::Pos => pos,
                    Side::Neg => neg,
                },
            };
        }
    }

    pub fn leaf_count(&self) -> usize {
        fn count<F>(n: &Node<F>) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Interval { low, high, .. } => count(low) + count(high),
                Node::Svm { neg, pos, .. } => count(neg) + count(pos),
            }
        }
        count(&self.root)
    }

    /// Longest root-to-leaf path, in splits.
    pub fn depth(&self) -> usize {
        fn depth<F>(n: &Node<F>) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Interval { low, high, .. } => 1 + depth(low).max(depth(high)),
                Node::Svm { neg, pos, .. } => 1 + depth(neg).max(depth(pos)),
            }
        }
        depth(&self.root)
    }

    /// Members of `others` that share `h`'s part and differ from `h`.
    fn same_part(&self, h: &Array1<F>, others: &[Array1<F>]) -> Result<(usize, Vec<Array1<F>>)> {
        let target = self.map(h.view())?;
        let mut kept = Vec::new();
        for o in others {
            if o != h && self.map(o.view())? == target {
                kept.push(o.clone());
            }
        }
        if kept.is_empty() {
            return Err(Error::NoOpRefinement("nothing left to separate from the state"));
        }
        Ok((target, kept))
    }

    fn replace_leaf(&self, h: ArrayView1<F>, subtree: Node<F>) -> Result<Arc<Node<F>>> {
        fn go<F: Scalar>(node: &Arc<Node<F>>, h: ArrayView1<F>, sub: Node<F>) -> Result<Arc<Node<F>>> {
            Ok(match &**node {
                Node::Leaf { .. } => Arc::new(sub),
                Node::Interval {
                    dim,
                    threshold,
                    low,
                    high,
                } => {
                    let (low, high) = if h[*dim] >= *threshold {
                        (low.clone(), go(high, h, sub)?)
                    } else {
                        (go(low, h, sub)?, high.clone())
                    };
                    Arc::new(Node::Interval {
                        dim: *dim,
                        threshold: *threshold,
                        low,
                        high,
                    })
                }
                Node::Svm { model, neg, pos } => {
                    let (neg, pos) = match model.decide(h)? {
                        Side::Pos => (neg.clone(), go(pos, h, sub)?),
                        Side::Neg => (go(neg, h, sub)?, pos.clone()),
                    };
                    Arc::new(Node::Svm {
                        model: model.clone(),
                        neg,
                        pos,
                    })
                }
            })
        }
        go(&self.root, h, subtree)
    }

    fn count_separated(&self, h: &Array1<F>, others: &[Array1<F>]) -> Result<usize> {
        let id = self.map(h.view())?;
        let mut n = 0;
        for o in others {
            if self.map(o.view())? != id {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Splits `h`'s part with an RBF SVM isolating `h` from the members of
    /// `others` in the same part. Adds exactly one part.
    pub fn refine_svm(&self, h: &Array1<F>, others: &[Array1<F>]) -> Result<Refined<F>> {
        let (_, rest) = self.same_part(h, others)?;
        let gamma = 1.0 / h.len().max(1) as f64;
        let (model, fit) = RbfSvm::fit(std::slice::from_ref(h), &rest, DEFAULT_C, gamma, 0)?;
        if !fit.perfect {
            log::debug!("svm split misclassifies {} training states", fit.training_errors);
        }
        let sub = Node::Svm {
            model,
            neg: Arc::new(Node::Leaf { id: self.next_id }),
            pos: Arc::new(Node::Leaf { id: self.next_id + 1 }),
        };
        let partitioning = Partitioning {
            root: self.replace_leaf(h.view(), sub)?,
            next_id: self.next_id + 2,
        };
        let separated = partitioning.count_separated(h, &rest)?;
        Ok(Refined {
            partitioning,
            separated,
            fit: Some(fit),
        })
    }

    /// Replaces `h`'s part by a complete depth-`depth` tree of interval
    /// splits along the dimensions where `h` is furthest from the mean of the
    /// others, each cut halfway between `h` and that mean. Adds `2^depth - 1`
    /// parts. Depth is clamped to the state dimension.
    pub fn refine_aggressive(&self, h: &Array1<F>, others: &[Array1<F>], depth: usize) -> Result<Refined<F>> {
        if depth == 0 {
            return Err(Error::InvalidArgument("refinement depth must be at least 1".into()));
        }
        let (_, rest) = self.same_part(h, others)?;
        let mut mean = Array1::<F>::zeros(h.len());
        for o in &rest {
            mean += o;
        }
        mean /= F::from_usize(rest.len()).expect("count");
        let depth = if depth > h.len() {
            log::warn!("refinement depth {depth} clamped to state dimension {}", h.len());
            h.len()
        } else {
            depth
        };
        let mut dims: Vec<usize> = (0..h.len()).collect();
        // stable sort keeps lower indices first among equal gaps
        dims.sort_by(|&a, &b| {
            let ga = (h[a] - mean[a]).abs();
            let gb = (h[b] - mean[b]).abs();
            gb.partial_cmp(&ga).unwrap_or(std::cmp::Ordering::Equal)
        });
        let two = F::lit(2.0);
        let cuts: Vec<(usize, F)> = dims[..depth].iter().map(|&d| (d, (h[d] + mean[d]) / two)).collect();

        fn build<F: Copy>(cuts: &[(usize, F)], level: usize, next: &mut usize) -> Node<F> {
            if level == cuts.len() {
                *next += 1;
                return Node::Leaf { id: *next - 1 };
            }
            let low = Arc::new(build(cuts, level + 1, next));
            let high = Arc::new(build(cuts, level + 1, next));
            Node::Interval {
                dim: cuts[level].0,
                threshold: cuts[level].1,
                low,
                high,
            }
        }
        let mut next = self.next_id;
        let sub = build(&cuts, 0, &mut next);
        let partitioning = Partitioning {
            root: self.replace_leaf(h.view(), sub)?,
            next_id: next,
        };
        let separated = partitioning.count_separated(h, &rest)?;
        Ok(Refined {
            partitioning,
            separated,
            fit: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        let mut ids = std::collections::HashSet::new();
        fn collect<F>(n: &Node<F>, ids: &mut std::collections::HashSet<usize>) -> bool {
            match n {
                Node::Leaf { id } => ids.insert(*id),
                Node::Interval { low, high, .. } => collect(low, ids) && collect(high, ids),
                Node::Svm { neg, pos, .. } => collect(neg, ids) && collect(pos, ids),
            }
        }
        if !collect(&p.root, &mut ids) {
            return Err(Error::Malformed("duplicate leaf id in partitioning".into()));
        }
        if ids.iter().any(|&id| id >= p.next_id) {
            return Err(Error::Malformed("leaf id beyond the id counter".into()));
        }
        Ok(p)
    }
}
