//! Small dense matrices over any `Real`, for the factorizations that have
//! to run in multi-limb precision.

use std::ops::{Index, IndexMut};

use crate::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, b: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, b.rows);
        let mut c = Mat::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..b.cols {
                    c.data[i * b.cols + j] += a * b[(k, j)];
                }
            }
        }
        c
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// M = L·diag(d)·U without pivoting; L unit lower, U unit upper.
/// On a zero pivot returns its index.
pub fn ldu<T: Real>(m: &Mat<T>) -> Result<(Mat<T>, Vec<T>, Mat<T>), usize> {
    let n = m.rows;
    assert_eq!(n, m.cols);
    let mut a = m.clone();
    let mut l = Mat::identity(n);
    let mut u = Mat::identity(n);
    let mut d = vec![T::zero(); n];
    for k in 0..n {
        let p = a[(k, k)];
        if p == T::zero() || !p.is_finite() {
            return Err(k);
        }
        d[k] = p;
        for i in k + 1..n {
            l[(i, k)] = a[(i, k)] / p;
            u[(k, i)] = a[(k, i)] / p;
        }
        for i in k + 1..n {
            let li = a[(i, k)] / p;
            if li == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let akj = a[(k, j)];
                a[(i, j)] -= li * akj;
            }
        }
    }
    Ok((l, d, u))
}

/// Inverse of a unit lower-triangular matrix.
pub fn unit_lower_inverse<T: Real>(l: &Mat<T>) -> Mat<T> {
    let n = l.rows;
    let mut x = Mat::identity(n);
    for i in 0..n {
        for j in 0..i {
            let mut s = T::zero();
            for k in j..i {
                s += l[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = -s;
        }
    }
    x
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
pub fn solve<T: Real>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows;
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| m[(i, k)].abs().partial_cmp(&m[(j, k)].abs()).unwrap())?;
        if m[(piv, k)] == T::zero() {
            return None;
        }
        if piv != k {
            for j in 0..n {
                m.data.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                let v = m[(k, j)];
                m[(i, j)] -= f * v;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[(k, j)] * x[j];
        }
        x[k] = s / m[(k, k)];
    }
    Some(x)
}

/// Determinant with partial pivoting.
pub fn det<T: Real>(a: &Mat<T>) -> T {
    let n = a.rows;
    let mut m = a.clone();
    let mut d = T::one();
    for k in 0..n {
        let piv =
            match (k..n).max_by(|&i, &j| m[(i, k)].abs().partial_cmp(&m[(j, k)].abs()).unwrap()) {
                Some(p) => p,
                None => return T::zero(),
            };
        if m[(piv, k)] == T::zero() {
            return T::zero();
        }
        if piv != k {
            for j in 0..n {
                m.data.swap(k * n + j, piv * n + j);
            }
            d = -d;
        }
        d *= m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                let v = m[(k, j)];
                m[(i, j)] -= f * v;
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Quad;

    #[test]
    fn ldu_reconstructs_hilbert() {
        let n = 8;
        let h = Mat::<Quad>::from_fn(n, n, |i, j| Quad::one() / Quad::int((i + j + 1) as i64));
        let (l, d, u) = ldu(&h).unwrap();
        let dm = Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { Quad::zero() });
        let r = l.mul(&dm).mul(&u);
        for (a, b) in r.data.iter().zip(&h.data) {
            assert!((*a - *b).abs().f64() < 1e-70);
        }
        let li = unit_lower_inverse(&l);
        let e = li.mul(&l);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[(i, j)].f64() - want).abs() < 1e-60);
            }
        }
    }

    #[test]
    fn ldu_reports_zero_pivot() {
        let m = Mat::<f64>::from_fn(2, 2, |i, j| if i == 0 && j == 0 { 0.0 } else { 1.0 });
        assert_eq!(ldu(&m).err(), Some(0));
    }

    #[test]
    fn solve_and_det() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| {
            [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]][i][j]
        });
        let x = solve(&a, &[3.0, 2.0, 4.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!((det(&a) - (-5.0)).abs() < 1e-14);
    }
}
