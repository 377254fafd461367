//! Complex polynomial arithmetic, root finding and Fejér–Riesz factorization.

mod laurent;
mod roots;

pub use laurent::{
    fejer_riesz, fejer_riesz_with, laurent_modulus_product, FejerRiesz, HermitianLaurent,
};
pub use roots::{poly_roots, poly_roots_with, RootOptions, RootSet};

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::scalar::{cr, Real, C};

/// Polynomial with complex coefficients, `coeffs[j]` multiplying `z^j`.
///
/// Trailing exact zeros are removed on construction, so the last stored
/// coefficient is nonzero unless the polynomial is identically zero (in which
/// case no coefficients are stored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexPoly<T: Real> {
    coeffs: Vec<C<T>>,
}

/// Which coefficient-wise operation [`poly_arith`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

pub fn poly_arith<T: Real>(a: &ComplexPoly<T>, b: &ComplexPoly<T>, op: PolyOp) -> ComplexPoly<T> {
    match op {
        PolyOp::Add => a + b,
        PolyOp::Sub => a - b,
        PolyOp::Mul => a * b,
    }
}

impl<T: Real> ComplexPoly<T> {
    pub fn new(mut coeffs: Vec<C<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&c| cr(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(cr(T::one()))
    }

    pub fn constant(c: C<T>) -> Self {
        Self::new(vec![c])
    }

    /// `c·z^k`.
    pub fn monomial(k: usize, c: C<T>) -> Self {
        let mut v = vec![C::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// `z - root`.
    pub fn linear(root: C<T>) -> Self {
        Self::new(vec![-root, cr(T::one())])
    }

    /// Monic polynomial `∏ (z - r)`.
    pub fn from_roots(roots: &[C<T>]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| acc.mul_linear(r))
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C<T>> {
        self.coeffs
    }

    /// Coefficient of `z^j` (zero past the degree).
    pub fn coeff(&self, j: usize) -> C<T> {
        self.coeffs.get(j).copied().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> C<T> {
        self.coeffs.last().copied().unwrap_or_else(C::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C<T>) -> C<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| c * T::from_usize_lossy(j))
                .collect(),
        )
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Multiplies by `z^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![C::zero(); k];
        v.extend_from_slice(&self.coeffs);
        Self { coeffs: v }
    }

    /// Multiplies by `(z - r)`.
    pub fn mul_linear(&self, r: C<T>) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let n = self.coeffs.len();
        let mut v = vec![C::zero(); n + 1];
        for (j, &c) in self.coeffs.iter().enumerate() {
            v[j + 1] += c;
            v[j] -= c * r;
        }
        Self::new(v)
    }

    /// Polynomial with conjugated coefficients, `p*(u) = Σ conj(c_j) u^j`,
    /// so that `p*(conj(w)) = conj(p(w))`.
    pub fn conj_coeffs(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Euclidean norm of the coefficient vector (the H² norm).
    pub fn coeff_norm(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
            .sqrt()
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    /// Drops trailing coefficients whose modulus is at most `tol`.
    pub fn trimmed(&self, tol: T) -> Self {
        let mut v = self.coeffs.clone();
        while v.last().is_some_and(|c| c.norm() <= tol) {
            v.pop();
        }
        Self::new(v)
    }

    /// Coefficients of `p(w + λ)` as a polynomial in `w`, i.e. the Taylor
    /// coefficients of `p` at `λ`.
    pub fn taylor_shift(&self, lambda: C<T>) -> Self {
        let mut a = self.coeffs.clone();
        let n = a.len();
        // repeated synthetic division by (z - λ)
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let next = a[j + 1];
                a[j] += lambda * next;
            }
        }
        Self::new(a)
    }

    /// Synthetic division by `(z - λ)`: returns `(quotient, remainder)`.
    pub fn div_linear(&self, lambda: C<T>) -> (Self, C<T>) {
        let n = self.coeffs.len();
        if n == 0 {
            return (Self::zero(), C::zero());
        }
        let mut q = vec![C::zero(); n - 1];
        let mut acc = C::zero();
        for j in (0..n).rev() {
            acc = acc * lambda + self.coeffs[j];
            if j > 0 {
                q[j - 1] = acc;
            }
        }
        (Self::new(q), acc)
    }

    /// Long division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (Self::zero(), self.clone());
        }
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        let mut q = vec![C::zero(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let t = r[k + dd] / lead;
            q[k] = t;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= t * dc;
            }
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    /// Converts scalar precision.
    pub fn cast<U: Real>(&self) -> ComplexPoly<U> {
        ComplexPoly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    Complex::new(
                        U::c(c.re.to_f64().unwrap_or(f64::NAN)),
                        U::c(c.im.to_f64().unwrap_or(f64::NAN)),
                    )
                })
                .collect(),
        )
    }
}

impl<T: Real> Add for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn add(self, rhs: Self) -> ComplexPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl<T: Real> Sub for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn sub(self, rhs: Self) -> ComplexPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|j| self.coeff(j) - rhs.coeff(j)).collect())
    }
}

impl<T: Real> Mul for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn mul(self, rhs: Self) -> ComplexPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut v = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        ComplexPoly::new(v)
    }
}

impl<T: Real> Neg for &ComplexPoly<T> {
    type Output = ComplexPoly<T>;
    fn neg(self) -> ComplexPoly<T> {
        self.scale(cr(-T::one()))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Real> $tr for ComplexPoly<T> {
            type Output = ComplexPoly<T>;
            fn $m(self, rhs: Self) -> ComplexPoly<T> {
                (&self).$m(&rhs)
            }
        }
        impl<T: Real> $tr<&ComplexPoly<T>> for ComplexPoly<T> {
            type Output = ComplexPoly<T>;
            fn $m(self, rhs: &ComplexPoly<T>) -> ComplexPoly<T> {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = ComplexPoly<f64>;

    fn c(re: f64, im: f64) -> C<f64> {
        Complex::new(re, im)
    }

    fn real(v: &[f64]) -> P {
        P::from_real(v)
    }

    #[test]
    fn binomial_square() {
        let p = real(&[-1.0, 1.0]);
        assert_eq!(poly_arith(&p, &p, PolyOp::Mul), real(&[1.0, -2.0, 1.0]));
    }

    #[test]
    fn monomial_product() {
        let z = P::monomial(1, c(1.0, 0.0));
        let z2 = P::monomial(2, c(1.0, 0.0));
        assert_eq!(&z * &z2, P::monomial(3, c(1.0, 0.0)));
    }

    #[test]
    fn sub_cancels_to_zero_polynomial() {
        let p = real(&[1.0, 2.0, 3.0]);
        let d = poly_arith(&p, &p, PolyOp::Sub);
        assert!(d.is_zero());
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn taylor_shift_examples() {
        // z^2 at 1 -> 1 + 2w + w^2
        assert_eq!(
            real(&[0.0, 0.0, 1.0]).taylor_shift(c(1.0, 0.0)),
            real(&[1.0, 2.0, 1.0])
        );
        assert_eq!(P::one().taylor_shift(c(0.3, -2.0)), P::one());
        // z^3 - z at -1: (w-1)^3 - (w-1) = w^3 - 3w^2 + 2w
        let p = real(&[0.0, -1.0, 0.0, 1.0]);
        assert_eq!(p.taylor_shift(c(-1.0, 0.0)), real(&[0.0, 2.0, -3.0, 1.0]));
    }

    #[test]
    fn synthetic_and_long_division() {
        let p = real(&[1.0, -2.0, 1.0]);
        let (q, r) = p.div_linear(c(1.0, 0.0));
        assert_eq!(q, real(&[-1.0, 1.0]));
        assert_eq!(r, c(0.0, 0.0));
        let (q2, r2) = real(&[5.0, 0.0, 0.0, 1.0]).div_rem(&real(&[1.0, 1.0]));
        assert_eq!(q2, real(&[1.0, -1.0, 1.0]));
        assert_eq!(r2, real(&[4.0]));
    }

    #[test]
    fn conj_coeffs_conjugates_values() {
        let p = P::new(vec![c(1.0, 2.0), c(-0.5, 0.25)]);
        let w = c(0.3, 0.7);
        assert!((p.conj_coeffs().eval(w.conj()) - p.eval(w).conj()).norm() < 1e-15);
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = P> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=max_deg + 1)
            .prop_map(|v| P::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig {
            cases: 200,
            rng_seed: proptest::test_runner::RngSeed::Fixed(0x0dd_5eed),
            failure_persistence: None,
            ..ProptestConfig::default()
        })]

        #[test]
        fn taylor_shift_round_trip(p in arb_poly(12), lr in -1.0f64..1.0, li in -1.0f64..1.0) {
            let lam = c(lr, li);
            let back = p.taylor_shift(lam).taylor_shift(-lam);
            // relative to the size of the intermediate (shifted) coefficients
            let scale = p.max_abs_coeff().max(1.0) * (1.0 + lam.norm()).powi(p.degree() as i32);
            for j in 0..=p.degree() {
                prop_assert!((back.coeff(j) - p.coeff(j)).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn horner_matches_naive(p in arb_poly(10), zr in -1.5f64..1.5, zi in -1.5f64..1.5) {
            let z = c(zr, zi);
            let naive: C<f64> = p.coeffs().iter().enumerate().map(|(j, &a)| a * z.powu(j as u32)).sum();
            prop_assert!((p.eval(z) - naive).norm() <= 1e-12 * (1.0 + naive.norm()) * 10.0);
        }

        #[test]
        fn product_evaluates_pointwise(a in arb_poly(6), b in arb_poly(6), zr in -1.0f64..1.0, zi in -1.0f64..1.0) {
            let z = c(zr, zi);
            let lhs = (&a * &b).eval(z);
            let rhs = a.eval(z) * b.eval(z);
            prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
        }
    }
}
