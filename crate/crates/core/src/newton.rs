//! Newton polyhedron distance by an exact two-phase simplex.
//!
//! `l = min s` such that `(s,…,s)` lies in `conv(support) + ℝ^d_{≥0}`, i.e.
//! `min s` over `λ ≥ 0, Σλ = 1, Σ_p λ_p k_p[c] ≤ s` for every coordinate `c`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{q, q_string, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonResult {
    pub l: Q,
    pub bound: Q,
    /// Convex weights on the support points attaining `l`.
    pub weights: Vec<Q>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NewtonSummary {
    pub l: String,
    pub bound: String,
}

impl NewtonResult {
    pub fn summary(&self) -> NewtonSummary {
        NewtonSummary { l: q_string(&self.l), bound: q_string(&self.bound) }
    }
}

/// Minimises `c·x` subject to `A x = b`, `x ≥ 0`, with `b ≥ 0`.
/// Returns the optimum and a minimiser, or `None` if infeasible.
/// Assumes the problem is bounded below.
fn simplex(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> Option<(Q, Vec<Q>)> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    // Tableau rows 0..m are constraints, row m the objective.
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![Q::zero(); width];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = Q::one();
        row[width - 1] = b[i].clone();
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let pivot = |t: &mut Vec<Vec<Q>>, r: usize, col: usize| {
        let p = t[r][col].clone();
        for v in t[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    };

    // Bland's rule over the allowed columns.
    let run = |t: &mut Vec<Vec<Q>>, basis: &mut Vec<usize>, allowed: usize| -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| t[m][j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..m {
                if t[i][col].is_positive() {
                    let ratio = &t[i][width - 1] / &t[i][col];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            pivot(t, r, col);
            basis[r] = col;
        }
    };

    // Phase one: minimise the sum of artificials.
    let mut obj = vec![Q::zero(); width];
    for row in t.iter().take(m) {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    t.push(obj);
    run(&mut t, &mut basis, n);
    if !t[m][width - 1].is_zero() {
        return None;
    }
    // Drive basic artificials out where possible.
    for r in 0..m {
        if basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| !t[r][j].is_zero()) {
                pivot(&mut t, r, col);
                basis[r] = col;
            }
        }
    }
    // Phase two.
    let mut obj = vec![Q::zero(); width];
    obj[..n].clone_from_slice(c);
    for r in 0..m {
        let bc = basis[r];
        if bc < n && !obj[bc].is_zero() {
            let f = obj[bc].clone();
            for j in 0..width {
                let delta = &f * &t[r][j];
                obj[j] -= delta;
            }
        }
    }
    t[m] = obj;
    if !run(&mut t, &mut basis, n) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = t[r][width - 1].clone();
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Some((value, x))
}

/// Newton distance `l(M)` and the bound `1/l(M)` for a support set of
/// multi-indices in `d` dimensions.
pub fn newton_bound(support: &[Vec<u32>], d: usize) -> Result<NewtonResult> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if support.iter().any(|k| k.len() != d) {
        return Err(Error::InvalidInput("support point of wrong dimension".into()));
    }
    let p = support.len();
    // Variables: λ_0..λ_{p-1}, s, slack_0..slack_{d-1}.
    let n = p + 1 + d;
    let mut a = Vec::with_capacity(d + 1);
    let mut b = Vec::with_capacity(d + 1);
    for c in 0..d {
        let mut row = vec![Q::zero(); n];
        for (i, k) in support.iter().enumerate() {
            row[i] = q(k[c] as i64);
        }
        row[p] = q(-1);
        row[p + 1 + c] = Q::one();
        a.push(row);
        b.push(Q::zero());
    }
    let mut row = vec![Q::zero(); n];
    for v in row.iter_mut().take(p) {
        *v = Q::one();
    }
    a.push(row);
    b.push(Q::one());
    let mut cost = vec![Q::zero(); n];
    cost[p] = Q::one();
    let (l, x) = simplex(&a, &b, &cost).ok_or_else(|| Error::InvalidInput("infeasible Newton program".into()))?;
    if l.is_zero() {
        return Err(Error::EmptySupport);
    }
    Ok(NewtonResult { bound: l.recip(), l, weights: x[..p].to_vec() })
}

/// Bound `d / (2(C+1))` from an error-correction order `C`: every support
/// point then has degree at least `2(C+1)`, and the simplex over the points
/// `2(C+1) e_i` is the extreme case.
pub fn error_correction_bound(d: usize, c: usize) -> Result<NewtonResult> {
    let support: Vec<Vec<u32>> = (0..d)
        .map(|i| {
            let mut k = vec![0; d];
            k[i] = 2 * (c as u32 + 1);
            k
        })
        .collect();
    newton_bound(&support, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point() {
        let r = newton_bound(&[vec![2, 0, 0]], 3).unwrap();
        assert_eq!(r.l, q(2));
        assert_eq!(r.bound, Q::new(1.into(), 2.into()));
    }

    #[test]
    fn universal_bound() {
        let r = error_correction_bound(30, 0).unwrap();
        assert_eq!(r.bound, q(15));
        assert_eq!(error_correction_bound(30, 1).unwrap().bound, Q::new(15.into(), 2.into()));
    }

    #[test]
    fn mixed_point_beats_the_axes() {
        // The average of 2e1 and 2e2 already sits on the diagonal at s = 1.
        let r = newton_bound(&[vec![2, 0], vec![0, 2], vec![1, 1]], 2).unwrap();
        assert_eq!(r.l, q(1));
        let r = newton_bound(&[vec![4, 0], vec![0, 4], vec![1, 1]], 2).unwrap();
        assert_eq!(r.l, q(1));
        let r = newton_bound(&[vec![4, 0], vec![0, 4]], 2).unwrap();
        assert_eq!(r.l, q(2));
    }

    #[test]
    fn empty_support() {
        assert!(matches!(newton_bound(&[], 2), Err(Error::EmptySupport)));
    }
}
