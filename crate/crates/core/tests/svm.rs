use ndarray::array;
use ndarray::Array1;
use proptest::prelude::*;

use lstar_rnn::svm::*;
use lstar_rnn::Error;

fn v(x: &[f64]) -> Array1<f64> {
    Array1::from(x.to_vec())
}

#[test]
fn separable_pair() {
    let (m, r) = RbfSvm::fit(&[v(&[1.0, 0.0])], &[v(&[-1.0, 0.0])], 1e4, 0.5, 0).unwrap();
    assert!(r.perfect);
    assert_eq!(m.decide(array![1.0, 0.0].view()).unwrap(), Side::Pos);
    assert_eq!(m.decide(array![-1.0, 0.0].view()).unwrap(), Side::Neg);
    // symmetric model: the midpoint is an exact tie and goes positive
    assert_eq!(m.decision_value(array![0.0, 0.0].view()).unwrap(), 0.0);
    assert_eq!(m.decide(array![0.0, 0.0].view()).unwrap(), Side::Pos);
}

#[test]
fn center_from_ring() {
    let ring = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]].map(|p| v(&p));
    let (m, r) = RbfSvm::fit_default(&[v(&[0.0, 0.0])], &ring).unwrap();
    assert!(r.perfect);
    assert_eq!(m.decide(array![0.0, 0.0].view()).unwrap(), Side::Pos);
    for p in &ring {
        assert_eq!(m.decide(p.view()).unwrap(), Side::Neg);
    }
    assert_eq!(m.decide(array![0.05, 0.05].view()).unwrap(), Side::Pos);
    for (row, &a) in m.support_vectors().rows().into_iter().zip(m.dual_coefficients()) {
        let want = if a > 0.0 { Side::Pos } else { Side::Neg };
        assert_eq!(m.decide(row).unwrap(), want);
        assert!(a.abs() <= m.c());
    }
}

#[test]
fn errors() {
    let p = [v(&[0.0])];
    assert!(matches!(RbfSvm::fit(&[], &p, 1.0, 1.0, 0), Err(Error::EmptyClass(_))));
    assert!(matches!(RbfSvm::fit(&p, &[], 1.0, 1.0, 0), Err(Error::EmptyClass(_))));
    assert!(RbfSvm::fit(&p, &[v(&[0.0, 1.0])], 1.0, 1.0, 0).is_err());
    let (m, _) = RbfSvm::fit(&p, &[v(&[1.0])], 1.0, 1.0, 0).unwrap();
    assert!(m.decide(array![0.0, 0.0].view()).is_err());
}

#[test]
fn overlapping_points_give_imperfect_split() {
    let (_, r) = RbfSvm::fit(&[v(&[0.0])], &[v(&[0.0]), v(&[1.0])], 1e4, 1.0, 0).unwrap();
    assert!(!r.perfect);
    assert_eq!(r.training_errors, 1);
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Exact dual optimum by enumerating which multipliers sit at 0, at C, or
/// strictly between, and solving the stationarity system for the free ones.
fn brute_force_objective(points: &[Array1<f64>], y: &[f64], c: f64, gamma: f64) -> f64 {
    let n = points.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d: f64 = (&points[i] - &points[j]).mapv(|t| t * t).sum();
                    y[i] * y[j] * (-gamma * d).exp()
                })
                .collect()
        })
        .collect();
    let obj = |a: &[f64]| {
        let mut f = 0.0;
        for i in 0..n {
            for j in 0..n {
                f += 0.5 * a[i] * a[j] * q[i][j];
            }
            f -= a[i];
        }
        f
    };
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let mut kind = vec![0; n];
        let mut k = code;
        for slot in kind.iter_mut() {
            *slot = k % 3;
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| kind[i] == 2).collect();
        let mut alpha: Vec<f64> = kind.iter().map(|&t| if t == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            // unknowns: free alphas then the equality multiplier
            let m = free.len() + 1;
            let mut a = vec![vec![0.0; m]; m];
            let mut b = vec![0.0; m];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q[i][j];
                }
                a[r][m - 1] = y[i];
                b[r] = 1.0 - (0..n).filter(|&j| kind[j] == 1).map(|j| q[i][j] * c).sum::<f64>();
            }
            for (s, &j) in free.iter().enumerate() {
                a[m - 1][s] = y[j];
            }
            b[m - 1] = -(0..n).filter(|&j| kind[j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(sol) = solve(a, b) else { continue };
            for (s, &i) in free.iter().enumerate() {
                alpha[i] = sol[s];
            }
        }
        let feasible = alpha.iter().all(|&a| (-1e-9..=c + 1e-9).contains(&a))
            && alpha.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-7;
        if feasible {
            best = best.min(obj(&alpha));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn matches_brute_force_dual(
        pts in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 2), 3..=6),
        n_pos in 1usize..3,
        c in prop_oneof![Just(0.5), Just(3.0), Just(1e4)],
    ) {
        let n_pos = n_pos.min(pts.len() - 1);
        let points: Vec<Array1<f64>> = pts.iter().map(|p| v(p)).collect();
        let y: Vec<f64> = (0..points.len()).map(|i| if i < n_pos { 1.0 } else { -1.0 }).collect();
        let (_, report) = RbfSvm::fit(&points[..n_pos], &points[n_pos..], c, 0.5, 0).unwrap();
        let oracle = brute_force_objective(&points, &y, c, 0.5);
        prop_assert!(report.kkt_gap < KKT_TOLERANCE);
        prop_assert!((report.objective - oracle).abs() <= 1e-3 * oracle.abs().max(1.0),
            "smo {} oracle {}", report.objective, oracle);
    }
}
