//! Hermitian Laurent polynomials (real trigonometric polynomials) and their
//! Fejér–Riesz factorization.

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use super::{poly_roots, ComplexPoly};
use crate::error::{Error, Result};
use crate::scalar::{circle_grid, cr, Real, C};

/// `R(z) = Σ_{|k|≤n} r_k z^k` with `r_{-k} = conj(r_k)`.
///
/// Stored as the nonnegative half `r_0, …, r_n`; `r_0` is real.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermitianLaurent<T: Real> {
    half: Vec<C<T>>,
}

impl<T: Real> HermitianLaurent<T> {
    /// Builds from `r_0, …, r_n`; the imaginary part of `r_0` is discarded.
    pub fn from_half(mut half: Vec<C<T>>) -> Self {
        if let Some(r0) = half.first_mut() {
            r0.im = T::zero();
        }
        while half.len() > 1 && half.last().is_some_and(|c| c.is_zero()) {
            half.pop();
        }
        Self { half }
    }

    pub fn constant(c: T) -> Self {
        Self::from_half(vec![cr(c)])
    }

    /// `|z - λ|² = (1+|λ|²) - conj(λ) z - λ conj(z)` on the circle.
    pub fn distance_squared(lambda: C<T>) -> Self {
        Self::from_half(vec![cr(T::one() + lambda.norm_sqr()), -lambda.conj()])
    }

    /// `|p(z)|²` on the circle.
    pub fn modulus_of(p: &ComplexPoly<T>) -> Self {
        let c = p.coeffs();
        let half = (0..c.len())
            .map(|k| (0..c.len() - k).fold(C::zero(), |acc, j| acc + c[j + k] * c[j].conj()))
            .collect();
        Self::from_half(half)
    }

    pub fn degree(&self) -> usize {
        self.half.len().saturating_sub(1)
    }

    /// `r_k` for any integer `k`.
    pub fn coeff(&self, k: i64) -> C<T> {
        let idx = k.unsigned_abs() as usize;
        let c = self.half.get(idx).copied().unwrap_or_else(C::zero);
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    /// Full coefficient list `r_{-n}, …, r_n`.
    pub fn coeffs(&self) -> Vec<C<T>> {
        let n = self.degree() as i64;
        (-n..=n).map(|k| self.coeff(k)).collect()
    }

    /// Value at a point of the unit circle (real by construction).
    pub fn eval_circle(&self, z: C<T>) -> T {
        // r_0 + 2 Re Σ_{k≥1} r_k z^k
        let mut zk = cr(T::one());
        let mut acc = self.half.first().map_or(T::zero(), |c| c.re);
        for c in self.half.iter().skip(1) {
            zk *= z;
            acc += T::c(2.0) * (*c * zk).re;
        }
        acc
    }

    /// Value at any nonzero point, `Σ r_k z^k`.
    pub fn eval(&self, z: C<T>) -> C<T> {
        let n = self.degree() as i64;
        (-n..=n).fold(C::zero(), |acc, k| acc + self.coeff(k) * z.powi(k as i32))
    }

    pub fn max_abs_coeff(&self) -> T {
        self.half.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Largest `|r_{-k} - conj(r_k)|`; zero unless the storage was bypassed.
    pub fn hermitian_defect(&self) -> T {
        let n = self.degree() as i64;
        (-n..=n).fold(T::zero(), |m, k| {
            m.max((self.coeff(-k) - self.coeff(k).conj()).norm())
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.half.len().max(other.half.len());
        Self::from_half(
            (0..len as i64)
                .map(|k| self.coeff(k) + other.coeff(k))
                .collect(),
        )
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_half(self.half.iter().map(|c| *c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.degree() as i64, other.degree() as i64);
        let half = (0..=a + b)
            .map(|k| (-a..=a).fold(C::zero(), |acc, i| acc + self.coeff(i) * other.coeff(k - i)))
            .collect();
        Self::from_half(half)
    }

    /// Drops top coefficients below `tol`.
    pub fn trimmed(&self, tol: T) -> Self {
        let mut half = self.half.clone();
        while half.len() > 1 && half.last().is_some_and(|c| c.norm() <= tol) {
            half.pop();
        }
        Self { half }
    }
}

/// `R(z) = ∏|z-λᵢ|² + Σ cᵢ ∏_{j≠i}|z-λⱼ|²` on the circle.
pub fn laurent_modulus_product<T: Real>(
    atoms: &[C<T>],
    weights: &[T],
) -> Result<HermitianLaurent<T>> {
    if atoms.len() != weights.len() {
        return Err(Error::InvalidArgument(
            "atoms and weights differ in length".into(),
        ));
    }
    for (i, a) in atoms.iter().enumerate() {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("atom {i} is not finite")));
        }
        if atoms[..i].iter().any(|b| (*b - *a).norm() <= T::epsilon()) {
            return Err(Error::InvalidArgument(format!("atom {i} is repeated")));
        }
    }
    if let Some(w) = weights
        .iter()
        .position(|w| !(*w > T::zero() && w.is_finite()))
    {
        return Err(Error::InvalidArgument(format!(
            "weight {w} is not positive"
        )));
    }
    let factors: Vec<_> = atoms
        .iter()
        .map(|&l| HermitianLaurent::distance_squared(l))
        .collect();
    let prod_except = |skip: Option<usize>| {
        factors
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .fold(HermitianLaurent::constant(T::one()), |acc, (_, f)| {
                acc.mul(f)
            })
    };
    let mut r = prod_except(None);
    for (i, &c) in weights.iter().enumerate() {
        r = r.add(&prod_except(Some(i)).scale(c));
    }
    debug_assert!(r.hermitian_defect().is_zero());
    Ok(r)
}

/// Spectral factor `q` with `|q|² = R` on the circle.
#[derive(Debug, Clone, Serialize)]
pub struct FejerRiesz<T: Real> {
    pub q: ComplexPoly<T>,
    /// Max over the 256-point grid of `| |q|² - R |`.
    pub residual: T,
    /// Smallest root modulus of `q` (infinite for constants).
    pub min_root_modulus: T,
}

/// [`fejer_riesz_with`] using a root margin of `1e-8` and residual tolerance
/// `1e-10·max|R|`.
pub fn fejer_riesz<T: Real>(r: &HermitianLaurent<T>) -> Result<FejerRiesz<T>> {
    fejer_riesz_with(r, T::tol(1e-8), T::tol(1e-10))
}

/// Factorizes a positive trigonometric polynomial by pairing the roots of
/// `z^n R(z)`: the outer member of each pair `(ζ, 1/conj ζ)` becomes a root of
/// `q`. Normalized so that `q(0) > 0`.
pub fn fejer_riesz_with<T: Real>(
    r: &HermitianLaurent<T>,
    margin: T,
    rel_tol: T,
) -> Result<FejerRiesz<T>> {
    let scale = r.max_abs_coeff();
    if scale.is_zero() {
        return Err(Error::NotPositive { min: 0.0 });
    }
    let r = r.trimmed(T::c(64.0) * T::epsilon() * scale);
    let check = circle_grid::<T>(512);
    let min = check
        .iter()
        .map(|&z| r.eval_circle(z))
        .fold(T::infinity(), |m, v| m.min(v));
    if !(min > T::zero()) {
        return Err(Error::NotPositive {
            min: min.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = r.degree();
    let grid = circle_grid::<T>(256);
    let max_r = grid
        .iter()
        .map(|&z| r.eval_circle(z))
        .fold(T::zero(), |m, v| m.max(v));

    let (q, min_root_modulus) = if n == 0 {
        (
            ComplexPoly::constant(cr(r.coeff(0).re.sqrt())),
            T::infinity(),
        )
    } else {
        let shifted = ComplexPoly::new((0..=2 * n as i64).map(|j| r.coeff(j - n as i64)).collect());
        let roots = poly_roots(&shifted)?.roots;
        let (inner, outer) = roots.split_at(n);
        let inner_max = inner.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let outer_min = outer.iter().fold(T::infinity(), |m, z| m.min(z.norm()));
        if !(outer_min > T::one() + margin) || !(inner_max < T::one()) {
            return Err(Error::RootPairing(format!(
                "root moduli straddle the circle: inner max {inner_max}, outer min {outer_min}"
            )));
        }
        let monic = ComplexPoly::from_roots(outer);
        // |C|² = R / |monic|² on the circle; averaged to damp rounding
        let mut acc = T::zero();
        for &z in &grid {
            acc += r.eval_circle(z) / monic.eval(z).norm_sqr();
        }
        let modulus = (acc / T::from_usize_lossy(grid.len())).sqrt();
        let m0 = monic.coeff(0);
        let phase = m0.conj() / m0.norm();
        let mut q = monic.scale(phase * modulus);
        // q(0) is real up to rounding; make it exactly so
        let mut c = q.clone().into_coeffs();
        c[0] = Complex::new(c[0].re, T::zero());
        q = ComplexPoly::new(c);
        (q, outer_min)
    };

    let residual = grid
        .iter()
        .map(|&z| (q.eval(z).norm_sqr() - r.eval_circle(z)).abs())
        .fold(T::zero(), |m, v| m.max(v));
    let tolerance = rel_tol * max_r;
    if !(residual <= tolerance) {
        return Err(Error::FactorizationResidual {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(FejerRiesz {
        q,
        residual,
        min_root_modulus,
    })
}
