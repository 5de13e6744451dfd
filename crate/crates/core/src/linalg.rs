//! Small dense matrices over scalars and over series.
//!
//! Sizes here are tiny (at most the number of variables), so determinants of
//! series matrices use plain cofactor expansion.

use crate::error::{Error, Result};
use crate::scalar::{Arith, Scalar};
use crate::series::FormalSeries;

pub type Matrix = Vec<Vec<Scalar>>;
pub type SeriesMatrix = Vec<Vec<FormalSeries>>;

pub fn identity(n: usize, arith: Arith) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { arith.one() } else { arith.zero() }).collect())
        .collect()
}

pub fn is_identity(m: &Matrix, arith: Arith) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, c)| arith.approx_eq(c, &if i == j { arith.one() } else { arith.zero() }))
    })
}

pub fn mat_mul(a: &Matrix, b: &Matrix, arith: Arith) -> Matrix {
    let (p, q, r) = (a.len(), b.len(), b.first().map_or(0, |row| row.len()));
    (0..p)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut s = arith.zero();
                    for k in 0..q {
                        s += &(&a[i][k] * &b[k][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Matrix, v: &[Scalar], arith: Arith) -> Vec<Scalar> {
    a.iter()
        .map(|row| {
            let mut s = arith.zero();
            for (c, x) in row.iter().zip(v) {
                s += &(c * x);
            }
            s
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Row echelon form with partial pivoting on the modulus; returns the pivot
/// columns.
fn echelon(m: &mut Matrix, arith: Arith) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows)
            .filter(|&i| !arith.is_zero(&m[i][c]))
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()));
        let Some(p) = best else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for i in r + 1..rows {
            if arith.is_zero(&m[i][c]) {
                continue;
            }
            let f = &m[i][c] * &inv;
            for k in c..cols {
                let t = &f * &m[r][k];
                m[i][k] -= &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix, arith: Arith) -> usize {
    let mut w = m.clone();
    echelon(&mut w, arith).len()
}

/// Indices of `rows.len()` linearly independent columns, the first ones
/// found by elimination.
pub fn independent_columns(m: &Matrix, arith: Arith) -> Vec<usize> {
    let mut w = m.clone();
    echelon(&mut w, arith)
}

pub fn det(m: &Matrix, arith: Arith) -> Scalar {
    let n = m.len();
    let mut w = m.clone();
    let mut sign = false;
    let mut d = arith.one();
    for c in 0..n {
        let best = (c..n)
            .filter(|&i| !arith.is_zero(&w[i][c]))
            .max_by(|&i, &j| w[i][c].abs().total_cmp(&w[j][c].abs()));
        let Some(p) = best else { return arith.zero() };
        if p != c {
            w.swap(p, c);
            sign = !sign;
        }
        d = &d * &w[c][c];
        let inv = w[c][c].recip();
        for i in c + 1..n {
            let f = &w[i][c] * &inv;
            for k in c..n {
                let t = &f * &w[c][k];
                w[i][k] -= &t;
            }
        }
    }
    if sign {
        -d
    } else {
        d
    }
}

/// Gauss–Jordan inverse.
pub fn inverse(m: &Matrix, arith: Arith) -> Result<Matrix> {
    let n = m.len();
    let mut w: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { arith.one() } else { arith.zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let best = (c..n)
            .filter(|&i| !arith.is_zero(&w[i][c]))
            .max_by(|&i, &j| w[i][c].abs().total_cmp(&w[j][c].abs()))
            .ok_or_else(|| Error::Invalid("singular matrix".into()))?;
        w.swap(best, c);
        let inv = w[c][c].recip();
        for k in 0..2 * n {
            w[c][k] = &w[c][k] * &inv;
        }
        for i in 0..n {
            if i == c || arith.is_zero(&w[i][c]) {
                continue;
            }
            let f = w[i][c].clone();
            for k in 0..2 * n {
                let t = &f * &w[c][k];
                w[i][k] -= &t;
            }
        }
    }
    Ok(w.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// A nonzero solution of `M v = 0`, if the kernel is nontrivial.
pub fn null_vector(m: &Matrix, arith: Arith) -> Option<Vec<Scalar>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut w = m.clone();
    let pivots = echelon(&mut w, arith);
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![arith.zero(); cols];
    v[free] = arith.one();
    for (r, &c) in pivots.iter().enumerate().rev() {
        let mut s = arith.zero();
        for k in c + 1..cols {
            s += &(&w[r][k] * &v[k]);
        }
        v[c] = -&(&s / &w[r][c]);
    }
    Some(v)
}

/// Largest entry modulus.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().flatten().map(|c| c.abs()).fold(0.0, f64::max)
}

fn minor<T: Clone>(a: &[Vec<T>], skip_r: usize, skip_c: usize) -> Vec<Vec<T>> {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_r)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != skip_c)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Determinant of a square series matrix by cofactor expansion along the
/// first row. `one` supplies dimension, cap and mode for the empty matrix.
pub fn series_det(a: &SeriesMatrix, one: &FormalSeries) -> FormalSeries {
    match a.len() {
        0 => one.clone(),
        1 => a[0][0].clone(),
        2 => &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]),
        n => {
            let mut acc = &a[0][0] - &a[0][0];
            for j in 0..n {
                if a[0][j].is_zero() {
                    continue;
                }
                let t = &a[0][j] * &series_det(&minor(a, 0, j), one);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

/// Cofactor transpose: `C[i][j] = (−1)^{i+j} det(A without row j, column i)`,
/// so that `C·A = det(A)·Id`.
pub fn series_adjugate(a: &SeriesMatrix, one: &FormalSeries) -> SeriesMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = series_det(&minor(a, j, i), one);
                    if (i + j) % 2 == 0 {
                        d
                    } else {
                        -&d
                    }
                })
                .collect()
        })
        .collect()
}

pub fn series_mat_mul(a: &SeriesMatrix, b: &SeriesMatrix) -> SeriesMatrix {
    let (p, q, r) = (a.len(), b.len(), b[0].len());
    (0..p)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut s = &a[i][0] * &b[0][j];
                    for k in 1..q {
                        s = &s + &(&a[i][k] * &b[k][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_det_inverse_rank() {
        let a = Arith::Exact;
        let m = vec![
            vec![a.int(2), a.int(1), a.int(0)],
            vec![a.int(1), a.int(3), a.int(1)],
            vec![a.int(0), a.int(1), a.int(4)],
        ];
        assert_eq!(det(&m, a), a.int(18));
        let inv = inverse(&m, a).unwrap();
        assert!(is_identity(&mat_mul(&m, &inv, a), a));
        let sing = vec![vec![a.int(1), a.int(2)], vec![a.int(2), a.int(4)]];
        assert_eq!(rank(&sing, a), 1);
        assert!(inverse(&sing, a).is_err());
        assert_eq!(independent_columns(&vec![vec![a.int(0), a.int(1), a.int(1)]], a), vec![1]);
    }

    #[test]
    fn null_vector_of_singular() {
        let a = Arith::Exact;
        let m = vec![vec![a.int(0), a.int(0)], vec![a.int(1), a.int(1)]];
        let v = null_vector(&m, a).unwrap();
        assert!(mat_vec(&m, &v, a).iter().all(|c| a.is_zero(c)));
        assert!(v.iter().any(|c| !a.is_zero(c)));
        assert!(null_vector(&identity(3, a), a).is_none());
    }

    #[test]
    fn adjugate_identity() {
        let a = Arith::Exact;
        let s = |t: &[(&[u32], i64)]| FormalSeries::from_ints(2, 6, a, t);
        let m: SeriesMatrix = vec![
            vec![s(&[(&[0, 0], 1), (&[1, 1], 2)]), s(&[(&[1, 0], 1)]), s(&[(&[0, 2], -1)])],
            vec![s(&[(&[0, 1], 3)]), s(&[(&[0, 0], 2)]), s(&[])],
            vec![s(&[(&[2, 0], 1)]), s(&[(&[1, 1], 1)]), s(&[(&[0, 0], 1), (&[1, 0], 1)])],
        ];
        let one = FormalSeries::one(2, 6, a);
        let c = series_adjugate(&m, &one);
        let d = series_det(&m, &one);
        let ca = series_mat_mul(&c, &m);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { d.clone() } else { FormalSeries::zero(2, 6, a) };
                assert_eq!(ca[i][j], want);
            }
        }
    }
}
