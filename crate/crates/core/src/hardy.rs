//! H² inner products of stable rational functions, local Dirichlet forms and
//! the inner product of the weighted Dirichlet space of an atomic measure.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{poly_roots, ComplexPoly};
use crate::scalar::{cr, Real, C};

/// Largest number of Taylor terms the H² summation will use.
pub const MAX_TERMS: usize = 1_000_000;

/// `num / den` with `den` zero-free on the closed unit disk and `den(0) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableRational<T: Real> {
    num: ComplexPoly<T>,
    den: ComplexPoly<T>,
    /// Smallest modulus of a zero of `den` (infinite for constants).
    #[serde(skip)]
    rho: T,
}

impl<T: Real> StableRational<T> {
    /// Checks the denominator by root finding.
    pub fn new(num: ComplexPoly<T>, den: ComplexPoly<T>) -> Result<Self> {
        let d0 = den.coeff(0);
        if d0.is_zero() {
            return Err(Error::UnstableDenominator { modulus: 0.0 });
        }
        let rho = if den.degree() == 0 {
            T::infinity()
        } else {
            let rs = poly_roots(&den)?;
            rs.roots[0].norm()
        };
        if !(rho > T::one()) {
            return Err(Error::UnstableDenominator {
                modulus: rho.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self::with_root_bound(num, den, rho))
    }

    /// Skips root finding when the caller already knows the smallest root
    /// modulus of `den` (for instance from a spectral factorization).
    pub fn with_root_bound(num: ComplexPoly<T>, den: ComplexPoly<T>, rho: T) -> Self {
        let d0 = den.coeff(0);
        let (num, den) = if d0.im.is_zero() && d0.re > T::zero() {
            (num, den)
        } else {
            let phase = d0.conj() / d0.norm();
            let mut dc = den.scale(phase).into_coeffs();
            dc[0] = cr(dc[0].re);
            (num.scale(phase), ComplexPoly::new(dc))
        };
        Self { num, den, rho }
    }

    pub fn polynomial(p: ComplexPoly<T>) -> Self {
        Self {
            num: p,
            den: ComplexPoly::one(),
            rho: T::infinity(),
        }
    }

    pub fn num(&self) -> &ComplexPoly<T> {
        &self.num
    }

    pub fn den(&self) -> &ComplexPoly<T> {
        &self.den
    }

    pub fn root_bound(&self) -> T {
        self.rho
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    pub fn eval(&self, z: C<T>) -> C<T> {
        self.num.eval(z) / self.den.eval(z)
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            num: self.num.scale(s),
            den: self.den.clone(),
            rho: self.rho,
        }
    }

    /// Multiplies by a polynomial (same denominator).
    pub fn mul_poly(&self, p: &ComplexPoly<T>) -> Self {
        Self {
            num: &self.num * p,
            den: self.den.clone(),
            rho: self.rho,
        }
    }

    /// `z^k · self`.
    pub fn shift_up(&self, k: usize) -> Self {
        Self {
            num: self.num.shift_up(k),
            den: self.den.clone(),
            rho: self.rho,
        }
    }

    /// Sum; the denominators are multiplied unless they coincide.
    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self {
                num: &self.num + &other.num,
                den: self.den.clone(),
                rho: self.rho,
            };
        }
        Self::with_root_bound(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
            self.rho.min(other.rho),
        )
    }

    /// First `count` Taylor coefficients at the origin.
    pub fn taylor(&self, count: usize) -> Vec<C<T>> {
        let b = self.den.coeffs();
        let b0 = b[0];
        let mut c = Vec::with_capacity(count);
        for k in 0..count {
            let mut acc = self.num.coeff(k);
            for j in 1..b.len().min(k + 1) {
                acc -= b[j] * c[k - j];
            }
            c.push(acc / b0);
        }
        c
    }

    /// Bound `M` with `|coeff_k| ≤ M s^{-k}` for `1 < s < rho`, from the
    /// maximum of `|num/den|` on the circle of radius `s`.
    fn cauchy_bound(&self, roots: &[C<T>], s: T) -> T {
        let top = self
            .num
            .coeffs()
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * s + c.norm());
        let bottom = roots
            .iter()
            .fold(self.den.leading().norm(), |acc, r| acc * (r.norm() - s));
        top / bottom
    }

    /// `sqrt(Σ_{k≥K} |coeff_k|²)` bound as a function of `K`, over a few radii.
    fn tail_bounds(&self) -> Vec<(T, T)> {
        if self.is_polynomial() {
            return Vec::new();
        }
        // without roots there is no certified bound; the caller then hits the cap
        let Ok(roots) = poly_roots(&self.den).map(|r| r.roots) else {
            return Vec::new();
        };
        let rho = roots.first().map_or(self.rho, |r| r.norm()).min(self.rho);
        [0.3, 0.5, 0.7, 0.85, 0.95]
            .iter()
            .map(|&t| {
                let s = T::one() + (rho - T::one()) * T::c(t);
                (s, self.cauchy_bound(&roots, s))
            })
            .filter(|(s, m)| m.is_finite() && *s > T::one())
            .collect()
    }
}

fn tail_at<T: Real>(bounds: &[(T, T)], k: usize) -> T {
    // Σ_{j≥k} M² s^{-2j} = M² s^{-2k} / (1 - s^{-2})
    bounds
        .iter()
        .map(|&(s, m)| {
            let inv = s.recip();
            (m * m * inv.powi(2 * k as i32) / (T::one() - inv * inv)).sqrt()
        })
        .fold(T::infinity(), T::min)
}

/// Value of an H² inner product together with its certified truncation error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertifiedInner<T: Real> {
    pub value: C<T>,
    pub bound: T,
    pub terms: usize,
}

/// `Σ_{k<K} f̂(k) conj(ĝ(k))`.
pub fn h2_inner_truncated<T: Real>(
    f: &StableRational<T>,
    g: &StableRational<T>,
    terms: usize,
) -> C<T> {
    let a = f.taylor(terms);
    let b = g.taylor(terms);
    a.iter()
        .zip(&b)
        .fold(C::zero(), |acc, (x, y)| acc + *x * y.conj())
}

pub fn h2_inner<T: Real>(f: &StableRational<T>, g: &StableRational<T>) -> Result<C<T>> {
    h2_inner_with_bound(f, g).map(|c| c.value)
}

/// Series summation with the number of terms chosen so that the geometric
/// tail bound is below `1e-15·max(1, ‖f‖‖g‖)` (scaled to the precision of `T`).
pub fn h2_inner_with_bound<T: Real>(
    f: &StableRational<T>,
    g: &StableRational<T>,
) -> Result<CertifiedInner<T>> {
    if f.num.is_zero() || g.num.is_zero() {
        return Ok(CertifiedInner {
            value: C::zero(),
            bound: T::zero(),
            terms: 0,
        });
    }
    // a polynomial factor makes the sum finite
    let exact = match (f.is_polynomial(), g.is_polynomial()) {
        (true, true) => Some(f.num.degree().min(g.num.degree()) + 1),
        (true, false) => Some(f.num.degree() + 1),
        (false, true) => Some(g.num.degree() + 1),
        _ => None,
    };
    if let Some(terms) = exact {
        return Ok(CertifiedInner {
            value: h2_inner_truncated(f, g, terms),
            bound: T::zero(),
            terms,
        });
    }
    let (bf, bg) = (f.tail_bounds(), g.tail_bounds());
    let probe = 64;
    let norm = |v: &[C<T>]| v.iter().fold(T::zero(), |s, c| s + c.norm_sqr()).sqrt();
    let scale = (norm(&f.taylor(probe)) * norm(&g.taylor(probe))).max(T::one());
    let target = T::tol(1e-15) * scale;
    let bound_at = |k: usize| tail_at(&bf, k) * tail_at(&bg, k);
    let mut hi = probe;
    while !(bound_at(hi) <= target) {
        if hi >= MAX_TERMS {
            return Err(Error::TruncationCap {
                terms: MAX_TERMS,
                bound: bound_at(hi).to_f64().unwrap_or(f64::NAN),
            });
        }
        hi = (hi * 2).min(MAX_TERMS);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if bound_at(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let terms = hi.max(f.num.degree().max(g.num.degree()) + 1);
    Ok(CertifiedInner {
        value: h2_inner_truncated(f, g, terms),
        bound: bound_at(terms),
        terms,
    })
}

fn divide_exact<T: Real>(
    num: &ComplexPoly<T>,
    lambda: C<T>,
    reference: T,
) -> Result<ComplexPoly<T>> {
    let (q, rem) = num.div_linear(lambda);
    let tolerance = T::tol(1e-9) * reference.max(T::min_positive_value());
    if rem.norm() > tolerance {
        return Err(Error::InexactDivision {
            at: format!("{lambda}"),
            remainder: rem.norm().to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(q)
}

/// Difference quotient `(f - f(λ)) / (z - λ)`.
pub fn difference_quotient<T: Real>(
    f: &StableRational<T>,
    lambda: C<T>,
) -> Result<StableRational<T>> {
    let value = f.eval(lambda);
    let num = &f.num - &f.den.scale(value);
    let reference = f.num.coeff_norm() + value.norm() * f.den.coeff_norm();
    let q = divide_exact(&num, lambda, reference)?;
    Ok(StableRational {
        num: q,
        den: f.den.clone(),
        rho: f.rho,
    })
}

/// Polarized local Dirichlet form `⟨F, G⟩_{H²}` of the difference quotients at `λ`.
pub fn local_dirichlet<T: Real>(
    f: &StableRational<T>,
    g: &StableRational<T>,
    lambda: C<T>,
) -> Result<C<T>> {
    check_closed_disk(lambda)?;
    let ff = difference_quotient(f, lambda)?;
    let gg = if std::ptr::eq(f, g) {
        ff.clone()
    } else {
        difference_quotient(g, lambda)?
    };
    h2_inner(&ff, &gg)
}

fn check_closed_disk<T: Real>(lambda: C<T>) -> Result<()> {
    if lambda.norm() > T::one() + T::tol(1e-12) {
        return Err(Error::InvalidArgument(format!(
            "point {lambda} lies outside the closed disk"
        )));
    }
    Ok(())
}

/// Output of [`local_dirichlet_m`].
#[derive(Debug, Clone, Serialize)]
pub struct HigherLocal<T: Real> {
    /// Taylor polynomial of degree `m-1` at `λ`, in powers of `z`.
    pub taylor: ComplexPoly<T>,
    /// `(f - taylor) / (z - λ)^m`.
    pub h: StableRational<T>,
    /// `‖h‖²_{H²}`.
    pub value: T,
}

/// Degree `m-1` Taylor polynomial of `f` at `λ`, expanded in powers of `z`.
pub fn taylor_polynomial<T: Real>(f: &StableRational<T>, lambda: C<T>, m: usize) -> ComplexPoly<T> {
    let shifted = StableRational {
        num: f.num.taylor_shift(lambda),
        den: f.den.taylor_shift(lambda),
        rho: T::zero(),
    };
    let local = ComplexPoly::new(shifted.taylor(m));
    local.taylor_shift(-lambda)
}

/// `f = T_{m-1}(f, λ) + (z-λ)^m h` with `λ` on the circle.
pub fn local_dirichlet_m<T: Real>(
    f: &StableRational<T>,
    lambda: C<T>,
    m: usize,
) -> Result<HigherLocal<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("order m must be at least 1".into()));
    }
    if (lambda.norm() - T::one()).abs() > T::tol(1e-12) {
        return Err(Error::InvalidArgument(format!(
            "point {lambda} is not on the unit circle"
        )));
    }
    let taylor = taylor_polynomial(f, lambda, m);
    let mut num = &f.num - &(&taylor * &f.den);
    let reference = f.num.coeff_norm() + taylor.coeff_norm() * f.den.coeff_norm();
    for _ in 0..m {
        num = divide_exact(&num, lambda, reference)?;
    }
    let h = StableRational {
        num: num.trimmed(T::tol(1e-13) * reference),
        den: f.den.clone(),
        rho: f.rho,
    };
    let value = h2_inner(&h, &h)?.re;
    Ok(HigherLocal { taylor, h, value })
}

/// `μ = Σ cᵢ δ_{λᵢ}` with distinct atoms in the closed disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicMeasure<T: Real> {
    atoms: Vec<C<T>>,
    weights: Vec<T>,
}

impl<T: Real> AtomicMeasure<T> {
    /// Atoms with modulus in `(1, 1 + 1e-12]` are pulled onto the circle.
    pub fn new(atoms: Vec<C<T>>, weights: Vec<T>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument(
                "measure needs at least one atom".into(),
            ));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "atoms and weights differ in length".into(),
            ));
        }
        let mut clean = Vec::with_capacity(atoms.len());
        for (i, &a) in atoms.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("atom {i} is not finite")));
            }
            let r = a.norm();
            let a = if r > T::one() {
                if r > T::one() + T::tol(1e-12) {
                    return Err(Error::InvalidArgument(format!(
                        "atom {i} = {a} lies outside the closed disk"
                    )));
                }
                a / r
            } else {
                a
            };
            if clean.iter().any(|b: &C<T>| (*b - a).norm() <= T::epsilon()) {
                return Err(Error::InvalidArgument(format!("atom {i} is repeated")));
            }
            clean.push(a);
        }
        if let Some(i) = weights
            .iter()
            .position(|w| !(*w > T::zero() && w.is_finite()))
        {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is not positive"
            )));
        }
        Ok(Self {
            atoms: clean,
            weights,
        })
    }

    pub fn point_mass(lambda: C<T>, c: T) -> Result<Self> {
        Self::new(vec![lambda], vec![c])
    }

    pub fn atoms(&self) -> &[C<T>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (C<T>, T)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    /// Whether every atom lies on the unit circle (within `tol`).
    pub fn on_circle(&self, tol: T) -> bool {
        self.atoms
            .iter()
            .all(|a| (a.norm() - T::one()).abs() <= tol)
    }
}

/// `⟨f, g⟩_{H²} + Σ cᵢ D_{λᵢ}(f, g)`.
pub fn dmu_inner<T: Real>(
    f: &StableRational<T>,
    g: &StableRational<T>,
    mu: &AtomicMeasure<T>,
) -> Result<C<T>> {
    let mut acc = h2_inner(f, g)?;
    for (lambda, c) in mu.iter() {
        acc += local_dirichlet(f, g, lambda)? * c;
    }
    Ok(acc)
}

/// Polynomial convenience: `dmu_inner` of two polynomials.
pub fn dmu_inner_poly<T: Real>(
    p: &ComplexPoly<T>,
    r: &ComplexPoly<T>,
    mu: &AtomicMeasure<T>,
) -> Result<C<T>> {
    dmu_inner(
        &StableRational::polynomial(p.clone()),
        &StableRational::polynomial(r.clone()),
        mu,
    )
}

/// `Σ cᵢ |f(λᵢ)|²`, the increment `‖zf‖² - ‖f‖²`.
pub fn shift_increment<T: Real>(f: &StableRational<T>, mu: &AtomicMeasure<T>) -> T {
    mu.iter()
        .fold(T::zero(), |acc, (l, c)| acc + c * f.eval(l).norm_sqr())
}
