//! Defect forms `⟨Δ⁽ⁿ⁾p, r⟩` of the shift for an arbitrary inner product on
//! polynomials, and the classifications built on them.

use num_traits::Zero;
use serde::Serialize;

use crate::error::Result;
use crate::hardy::{dmu_inner_poly, local_dirichlet_m, AtomicMeasure, StableRational};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::poly::ComplexPoly;
use crate::scalar::{cr, Real, C};

/// Hermitian sesquilinear form on polynomials, linear in the first slot.
pub trait InnerProduct<T: Real> {
    fn inner(&self, f: &ComplexPoly<T>, g: &ComplexPoly<T>) -> Result<C<T>>;

    /// Short description of where the form comes from.
    fn tag(&self) -> String;

    /// `G[(a, b)] = ⟨z^a, z^b⟩` for `a, b < size`.
    fn monomial_gram(&self, size: usize) -> Result<CMatrix<T>> {
        let mono = |k| ComplexPoly::monomial(k, cr(T::one()));
        let mut g = CMatrix::zeros(size, size);
        for a in 0..size {
            for b in a..size {
                let v = self.inner(&mono(a), &mono(b))?;
                g[(a, b)] = v;
                g[(b, a)] = v.conj();
            }
        }
        Ok(g)
    }
}

impl<T: Real, I: InnerProduct<T> + ?Sized> InnerProduct<T> for &I {
    fn inner(&self, f: &ComplexPoly<T>, g: &ComplexPoly<T>) -> Result<C<T>> {
        (**self).inner(f, g)
    }
    fn tag(&self) -> String {
        (**self).tag()
    }
    fn monomial_gram(&self, size: usize) -> Result<CMatrix<T>> {
        (**self).monomial_gram(size)
    }
}

/// Plain H² inner product.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hardy;

impl<T: Real> InnerProduct<T> for Hardy {
    fn inner(&self, f: &ComplexPoly<T>, g: &ComplexPoly<T>) -> Result<C<T>> {
        Ok(f.coeffs()
            .iter()
            .zip(g.coeffs())
            .fold(C::zero(), |acc, (a, b)| acc + *a * b.conj()))
    }
    fn tag(&self) -> String {
        "hardy".into()
    }
    fn monomial_gram(&self, size: usize) -> Result<CMatrix<T>> {
        Ok(CMatrix::identity(size))
    }
}

/// The `D(μ)` inner product of an atomic measure.
#[derive(Debug, Clone)]
pub struct Atomic<T: Real>(pub AtomicMeasure<T>);

impl<T: Real> InnerProduct<T> for Atomic<T> {
    fn inner(&self, f: &ComplexPoly<T>, g: &ComplexPoly<T>) -> Result<C<T>> {
        dmu_inner_poly(f, g, &self.0)
    }
    fn tag(&self) -> String {
        format!("atomic measure with {} atoms", self.0.len())
    }
    fn monomial_gram(&self, size: usize) -> Result<CMatrix<T>> {
        // (z^a - λ^a)/(z - λ) = Σ_{j<a} λ^{a-1-j} z^j
        let mut g = CMatrix::identity(size);
        for (lambda, c) in self.0.iter() {
            let mut pw = vec![cr(T::one()); size];
            for k in 1..size {
                pw[k] = pw[k - 1] * lambda;
            }
            for a in 1..size {
                for b in 1..size {
                    let mut s = C::zero();
                    for j in 0..a.min(b) {
                        s += pw[a - 1 - j] * pw[b - 1 - j].conj();
                    }
                    g[(a, b)] += s * c;
                }
            }
        }
        Ok(g)
    }
}

/// `⟨f, g⟩_{H²} + ⟨h_{pf}, h_{pg}⟩_{H²}`, where `pf = T_{m-1}(pf, λ) + (z-λ)^m h_{pf}`.
#[derive(Debug, Clone)]
pub struct HigherOrderLocal<T: Real> {
    pub lambda: C<T>,
    pub p: ComplexPoly<T>,
    pub m: usize,
}

impl<T: Real> HigherOrderLocal<T> {
    fn remainder(&self, f: &ComplexPoly<T>) -> Result<ComplexPoly<T>> {
        let pf = StableRational::polynomial(&self.p * f);
        Ok(local_dirichlet_m(&pf, self.lambda, self.m)?.h.num().clone())
    }
}

impl<T: Real> InnerProduct<T> for HigherOrderLocal<T> {
    fn inner(&self, f: &ComplexPoly<T>, g: &ComplexPoly<T>) -> Result<C<T>> {
        let h2 = Hardy.inner(f, g)?;
        let (hf, hg) = (self.remainder(f)?, self.remainder(g)?);
        Ok(h2 + Hardy.inner(&hf, &hg)?)
    }
    fn tag(&self) -> String {
        format!("higher-order local Dirichlet, m = {}", self.m)
    }
}

/// `(f, g) ↦ ⟨zf, zg⟩`.
#[derive(Debug, Clone)]
pub struct Shifted<I>(pub I);

impl<T: Real, I: InnerProduct<T>> InnerProduct<T> for Shifted<I> {
    fn inner(&self, f: &ComplexPoly<T>, g: &ComplexPoly<T>) -> Result<C<T>> {
        self.0.inner(&f.shift_up(1), &g.shift_up(1))
    }
    fn tag(&self) -> String {
        format!("shifted {}", self.0.tag())
    }
    fn monomial_gram(&self, size: usize) -> Result<CMatrix<T>> {
        let g = self.0.monomial_gram(size + 1)?;
        Ok(CMatrix::from_fn(size, size, |a, b| g[(a + 1, b + 1)]))
    }
}

pub(crate) fn binomial<T: Real>(n: usize, k: usize) -> T {
    (0..k).fold(T::one(), |acc, j| {
        acc * T::from_usize_lossy(n - j) / T::from_usize_lossy(j + 1)
    })
}

/// `⟨Δ⁽ⁿ⁾p, r⟩ = Σ_j (-1)^{n-j} C(n,j) ⟨z^j p, z^j r⟩`.
pub fn defect_form<T: Real, I: InnerProduct<T>>(
    ip: &I,
    n: usize,
    p: &ComplexPoly<T>,
    r: &ComplexPoly<T>,
) -> Result<C<T>> {
    let mut acc = C::zero();
    for j in 0..=n {
        let v = ip.inner(&p.shift_up(j), &r.shift_up(j))?;
        let w: T = binomial(n, j);
        acc += if (n - j).is_multiple_of(2) { v * w } else { -v * w };
    }
    Ok(acc)
}

/// `(lhs, rhs)` with `lhs = Σ_j (-1)^j C(n,j) ‖z^j p‖²` in `D(μ)` and
/// `rhs = -Σ cᵢ (1-|λᵢ|²)^{n-1} |p(λᵢ)|²`.
pub fn atomic_defect_identity<T: Real>(
    mu: &AtomicMeasure<T>,
    n: usize,
    p: &ComplexPoly<T>,
) -> Result<(T, T)> {
    let ip = Atomic(mu.clone());
    let form = defect_form(&ip, n, p, p)?.re;
    let lhs = if n.is_multiple_of(2) { form } else { -form };
    let rhs = -mu.iter().fold(T::zero(), |acc, (l, c)| {
        let w = (T::one() - l.norm_sqr()).max(T::zero());
        acc + c * w.powi(n as i32 - 1) * p.eval(l).norm_sqr()
    });
    Ok((lhs, rhs))
}

/// `Σ_j C(n,j) |⟨z^j p, z^j p⟩|`, the size of the terms that cancel in the
/// defect form. Used to scale tolerances.
pub fn defect_scale<T: Real, I: InnerProduct<T>>(
    ip: &I,
    n: usize,
    p: &ComplexPoly<T>,
) -> Result<T> {
    let mut acc = T::zero();
    for j in 0..=n {
        let q = p.shift_up(j);
        acc += binomial::<T>(n, j) * ip.inner(&q, &q)?.norm();
    }
    Ok(acc)
}

/// `⟨Δ⁽ⁿ⁾z^b, z^a⟩` for `a, b ≤ N`, read off a monomial Gram matrix of size
/// at least `N + n + 1`; also returns the entrywise term scale.
pub fn defect_matrix<T: Real>(gram: &CMatrix<T>, n: usize, truncation: usize) -> (CMatrix<T>, T) {
    let size = truncation + 1;
    assert!(
        gram.rows() >= size + n,
        "Gram matrix too small for this order"
    );
    let mut out = CMatrix::zeros(size, size);
    let mut scale = T::zero();
    for a in 0..size {
        for b in 0..size {
            let mut acc = C::zero();
            let mut mag = T::zero();
            for j in 0..=n {
                let w: T = binomial(n, j);
                // ⟨z^{b+j}, z^{a+j}⟩ = gram[(b+j, a+j)]
                let v = gram[(b + j, a + j)] * w;
                mag += v.norm();
                acc += if (n - j).is_multiple_of(2) { v } else { -v };
            }
            out[(a, b)] = acc;
            scale = scale.max(mag);
        }
    }
    (out, scale)
}

/// Defect matrix of one order on polynomials of degree at most `N`.
#[derive(Debug, Clone, Serialize)]
pub struct DefectReport<T: Real> {
    pub order: usize,
    pub truncation: usize,
    /// `matrix[(a, b)] = ⟨Δ⁽ⁿ⁾z^b, z^a⟩`, so `⟨Δ⁽ⁿ⁾f, f⟩ = f* · matrix · f`.
    pub matrix: CMatrix<T>,
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Largest magnitude of the summed Gram terms.
    pub scale: T,
    pub norm: T,
    pub hermitian_defect: T,
    pub positive_semidefinite: bool,
    pub negative_semidefinite: bool,
    pub vanishes: bool,
    /// Eigenvalues above `1e-8` times the largest magnitude.
    pub numerical_rank: usize,
}

/// Flags from [`classify`], all meant "on polynomials of degree ≤ N".
#[derive(Debug, Clone, Serialize)]
pub struct Classification<T: Real> {
    pub tag: String,
    pub truncation: usize,
    pub reports: Vec<DefectReport<T>>,
    pub expansive: bool,
    /// `(-1)^n Δ⁽ⁿ⁾ ≤ 0` for every computed order.
    pub dirichlet_type: bool,
    /// Smallest computed `n` with `Δ⁽ⁿ⁾ = 0`.
    pub isometry_order: Option<usize>,
    /// Numerical rank of `Δ⁽¹⁾`.
    pub rank: usize,
}

impl<T: Real> Classification<T> {
    pub fn report(&self, order: usize) -> Option<&DefectReport<T>> {
        self.reports.iter().find(|r| r.order == order)
    }
}

pub fn report_from_matrix<T: Real>(
    order: usize,
    truncation: usize,
    matrix: CMatrix<T>,
    scale: T,
) -> DefectReport<T> {
    let eigenvalues = hermitian_eigenvalues(&matrix);
    let norm = eigenvalues.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    let tol = T::tol(1e-8) * scale;
    let numerical_rank = eigenvalues
        .iter()
        .filter(|e| e.abs() > T::tol(1e-8) * norm && e.abs() > T::tol(1e-12) * scale)
        .count();
    DefectReport {
        order,
        truncation,
        hermitian_defect: matrix.hermitian_defect(),
        positive_semidefinite: eigenvalues.first().is_none_or(|&e| e >= -tol),
        negative_semidefinite: eigenvalues.last().is_none_or(|&e| e <= tol),
        vanishes: norm <= tol,
        eigenvalues,
        scale,
        norm,
        numerical_rank,
        matrix,
    }
}

/// Defect matrices of orders `1..=n_max` on the degree-`N` truncation.
pub fn classify<T: Real, I: InnerProduct<T>>(
    ip: &I,
    truncation: usize,
    n_max: usize,
) -> Result<Classification<T>> {
    let gram = ip.monomial_gram(truncation + n_max + 1)?;
    let reports: Vec<_> = (1..=n_max)
        .map(|n| {
            let (m, scale) = defect_matrix(&gram, n, truncation);
            report_from_matrix(n, truncation, m, scale)
        })
        .collect();
    let expansive = reports.first().is_some_and(|r| r.positive_semidefinite);
    let dirichlet_type = reports.iter().all(|r| {
        if r.order % 2 == 1 {
            r.positive_semidefinite
        } else {
            r.negative_semidefinite
        }
    });
    let isometry_order = reports.iter().find(|r| r.vanishes).map(|r| r.order);
    let rank = reports.first().map_or(0, |r| r.numerical_rank);
    Ok(Classification {
        tag: ip.tag(),
        truncation,
        reports,
        expansive,
        dirichlet_type,
        isometry_order,
        rank,
    })
}

/// `max_{k ≤ N} |⟨Δ(p z^k), p z^k⟩|`.
pub fn annihilation_check<T: Real, I: InnerProduct<T>>(
    ip: &I,
    p: &ComplexPoly<T>,
    truncation: usize,
) -> Result<T> {
    let mut worst = T::zero();
    for k in 0..=truncation {
        let f = p.shift_up(k);
        worst = worst.max(defect_form(ip, 1, &f, &f)?.norm());
    }
    Ok(worst)
}
