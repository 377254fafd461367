//! Small dense complex linear algebra: LU solve, Hermitian eigenvalues,
//! pivoted Cholesky and Hessenberg QR eigenvalues.
//!
//! Sizes here stay well under a hundred, so plain O(n³) loops are enough.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { cr(T::one()) } else { C::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C<T>>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> T {
        let mut d = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::c(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real + Serialize> Serialize for CMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows;
    assert_eq!(a.cols, n, "square system expected");
    assert_eq!(b.rows, n, "right-hand side mismatch");
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs();
    if scale.is_zero() {
        return Err(Error::Singular);
    }
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().partial_cmp(&lu[(j, k)].norm()).unwrap())
            .unwrap();
        if lu[(p, k)].norm() <= T::epsilon() * scale {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                lu.data.swap(k * n + j, p * n + j);
            }
            for j in 0..x.cols {
                x.data.swap(k * x.cols + j, p * x.cols + j);
            }
        }
        let piv = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / piv;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= f * v;
            }
            for j in 0..x.cols {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for j in 0..x.cols {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for k in i + 1..n {
                s -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / lu[(i, i)];
        }
    }
    Ok(x)
}

/// Eigenvalues (ascending) of a Hermitian matrix.
///
/// `H = X + iY` is embedded as the real symmetric `[[X, -Y], [Y, X]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled; cyclic Jacobi is
/// run on the embedding.
pub fn hermitian_eigenvalues<T: Real>(h: &CMatrix<T>) -> Vec<T> {
    let n = h.rows;
    if n == 0 {
        return Vec::new();
    }
    let m = 2 * n;
    let mut a = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            // use the Hermitian part so tiny asymmetries cannot stall Jacobi
            let v = (h[(i, j)] + h[(j, i)].conj()) * T::c(0.5);
            a[i * m + j] = v.re;
            a[(i + n) * m + (j + n)] = v.re;
            a[i * m + (j + n)] = -v.im;
            a[(i + n) * m + j] = v.im;
        }
    }
    jacobi_symmetric(&mut a, m);
    let mut ev: Vec<T> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev.into_iter().step_by(2).collect()
}

fn jacobi_symmetric<T: Real>(a: &mut [T], m: usize) {
    let frob = a.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
    if frob.is_zero() {
        return;
    }
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    off += a[i * m + j] * a[i * m + j];
                }
            }
        }
        if off.sqrt() <= T::epsilon() * T::c(0.01) * frob {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (T::c(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

/// Output of [`pivoted_cholesky`].
#[derive(Debug, Clone)]
pub struct PivotedCholesky<T: Real> {
    /// `rank × n` factor with `factor* · factor ≈ A` (columns in original order).
    pub factor: CMatrix<T>,
    /// Pivot order: step `k` eliminated original index `perm[k]`.
    pub perm: Vec<usize>,
    pub rank: usize,
    /// Largest remaining diagonal entry when elimination stopped.
    pub remainder: T,
}

/// Cholesky with symmetric diagonal pivoting, stopping once every remaining
/// diagonal entry is at most `drop_tol`.
pub fn pivoted_cholesky<T: Real>(a: &CMatrix<T>, drop_tol: T) -> PivotedCholesky<T> {
    let n = a.rows;
    let mut w = a.hermitian_part();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut r = CMatrix::zeros(n, n);
    let mut rank = 0;
    let mut remainder = T::zero();
    for k in 0..n {
        let (p, dmax) = (k..n)
            .map(|j| (j, w[(j, j)].re))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        remainder = dmax.max(T::zero());
        if dmax <= drop_tol {
            break;
        }
        if p != k {
            perm.swap(k, p);
            for j in 0..n {
                w.data.swap(k * n + j, p * n + j);
            }
            for i in 0..n {
                w.data.swap(i * n + k, i * n + p);
            }
            for i in 0..k {
                r.data.swap(i * n + k, i * n + p);
            }
        }
        let d = w[(k, k)].re.sqrt();
        r[(k, k)] = cr(d);
        for j in k + 1..n {
            r[(k, j)] = w[(k, j)] / d;
        }
        for i in k + 1..n {
            let rki = r[(k, i)].conj();
            for j in k + 1..n {
                let rkj = r[(k, j)];
                w[(i, j)] -= rki * rkj;
            }
        }
        rank = k + 1;
        remainder = T::zero();
    }
    if rank == n {
        remainder = T::zero();
    }
    let mut factor = CMatrix::zeros(rank, n);
    for k in 0..rank {
        for j in 0..n {
            factor[(k, perm[j])] = r[(k, j)];
        }
    }
    PivotedCholesky {
        factor,
        perm,
        rank,
        remainder,
    }
}

/// Largest `c` with `S v = c G v` for Hermitian `S` and positive definite `G`.
pub fn generalized_max_eigenvalue<T: Real>(s: &CMatrix<T>, g: &CMatrix<T>) -> Result<T> {
    let n = g.rows;
    let chol = pivoted_cholesky(g, T::zero());
    if chol.rank < n {
        return Err(Error::GramNotPositive {
            min_eig: chol.remainder.to_f64().unwrap_or(0.0),
        });
    }
    // G = F* F; eigenvalues of F^{-*} S F^{-1}
    let f = chol.factor;
    let fh = f.conj_transpose();
    let y = solve(&fh, s)?; // F^{-*} S
    let z = solve(&fh, &y.conj_transpose())?; // F^{-*} (F^{-*} S)^* = F^{-*} S F^{-1}
    let ev = hermitian_eigenvalues(&z);
    Ok(*ev.last().unwrap_or(&T::zero()))
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR.
pub fn hessenberg_eigenvalues<T: Real>(h0: &CMatrix<T>) -> Result<Vec<C<T>>> {
    let n = h0.rows;
    let mut h = h0.clone();
    let mut eig = vec![C::zero(); n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let max_iter = 60 * n.max(1);
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s.is_zero() { h.max_abs() } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = C::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter * n {
            return Err(Error::RootNonConvergence {
                degree: n,
                residual: f64::NAN,
            });
        }
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mut mu = if iter % 11 == 10 {
            // exceptional shift
            d + cr(c.norm() * T::c(1.5))
        } else {
            let half = (a - d) * T::c(0.5);
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * T::c(0.5) + disc;
            let m2 = (a + d) * T::c(0.5) - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        if !mu.re.is_finite() || !mu.im.is_finite() {
            mu = d;
        }
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r.is_zero() {
                (cr(T::one()), C::zero())
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = cs.conj() * t1 + sn.conj() * t2;
                h[(k + 1, j)] = -sn * t1 + cs * t2;
            }
            rots.push((cs, sn));
        }
        for (idx, &(cs, sn)) in rots.iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hi) {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = t1 * cs + t2 * sn;
                h[(i, k + 1)] = -(t1 * sn.conj()) + t2 * cs.conj();
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(eig)
}

/// Builds a matrix from rows of `(re, im)` pairs. Test helper.
pub fn from_pairs<T: Real>(rows: &[&[(f64, f64)]]) -> CMatrix<T> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    CMatrix::from_fn(r, c, |i, j| {
        Complex::new(T::c(rows[i][j].0), T::c(rows[i][j].1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = CMatrix<f64>;

    #[test]
    fn solve_small_system() {
        let a: M = from_pairs(&[&[(2.0, 0.0), (1.0, 1.0)], &[(0.0, -1.0), (3.0, 0.0)]]);
        let x_true: M = from_pairs(&[&[(1.0, -2.0)], &[(0.5, 0.5)]]);
        let b = a.matmul(&x_true);
        let x = solve(&a, &b).unwrap();
        assert!(x.sub(&x_true).max_abs() < 1e-14);
    }

    #[test]
    fn singular_system_rejected() {
        let a: M = from_pairs(&[&[(1.0, 0.0), (2.0, 0.0)], &[(2.0, 0.0), (4.0, 0.0)]]);
        assert_eq!(solve(&a, &M::identity(2)), Err(Error::Singular));
    }

    #[test]
    fn hermitian_spectrum_of_known_matrix() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let a: M = from_pairs(&[&[(2.0, 0.0), (0.0, 1.0)], &[(0.0, -1.0), (2.0, 0.0)]]);
        let ev = hermitian_eigenvalues(&a);
        assert!((ev[0] - 1.0).abs() < 1e-13 && (ev[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn pivoted_cholesky_detects_rank() {
        let v = [
            Complex::new(1.0, 0.5),
            Complex::new(-0.25, 2.0),
            Complex::new(0.0, 1.0),
        ];
        let w = [
            Complex::new(0.3, 0.0),
            Complex::new(1.0, -1.0),
            Complex::new(2.0, 0.0),
        ];
        let a = M::from_fn(3, 3, |i, j| v[i] * v[j].conj() + w[i] * w[j].conj());
        let ch = pivoted_cholesky(&a, 1e-12 * a.trace().re);
        assert_eq!(ch.rank, 2);
        let back = ch.factor.conj_transpose().matmul(&ch.factor);
        assert!(back.sub(&a).max_abs() < 1e-12);
    }

    #[test]
    fn hessenberg_companion_roots() {
        // z^3 - 1
        let h: M = from_pairs(&[
            &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
            &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)],
        ]);
        let ev = hessenberg_eigenvalues(&h).unwrap();
        for e in ev {
            assert!((e * e * e - Complex::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn generalized_eigenvalue_diagonal() {
        let g: M = from_pairs(&[&[(2.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (4.0, 0.0)]]);
        let s: M = from_pairs(&[&[(6.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (4.0, 0.0)]]);
        assert!((generalized_max_eigenvalue(&s, &g).unwrap() - 3.0).abs() < 1e-13);
    }
}
