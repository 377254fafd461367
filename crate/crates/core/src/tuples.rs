//! Allowable tuples of circle distributions `P(D)δ_λ`, their Fourier
//! generators, and the Dirichlet integrals `D_{μ,i}` of polynomials.
//!
//! Integer data (binomial sums, fitted polynomials in `k`) is exact in
//! `i128`/`Ratio<i128>`; values that involve arbitrary complex coefficients
//! are carried in floating point alongside.

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::defect::InnerProduct;
use crate::error::{Error, Result};
use crate::hardy::{local_dirichlet_m, StableRational};
use crate::linalg::{generalized_max_eigenvalue, hermitian_eigenvalues, CMatrix};
use crate::poly::ComplexPoly;
use crate::scalar::{cr, Real, C};

pub type Rat = Ratio<i128>;

/// Gaussian rational `re + i·im` with overflow-checked arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        Self { re, im }
    }

    pub fn int(re: i128, im: i128) -> Self {
        Self::new(Rat::from_integer(re), Rat::from_integer(im))
    }

    pub fn real(re: Rat) -> Self {
        Self::new(re, Rat::zero())
    }

    pub fn zero() -> Self {
        Self::int(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(Self::new(
            self.re.checked_add(&o.re).ok_or(Error::DegreeOverflow)?,
            self.im.checked_add(&o.im).ok_or(Error::DegreeOverflow)?,
        ))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let m = |a: &Rat, b: &Rat| a.checked_mul(b).ok_or(Error::DegreeOverflow);
        let re = m(&self.re, &o.re)?
            .checked_sub(&m(&self.im, &o.im)?)
            .ok_or(Error::DegreeOverflow)?;
        let im = m(&self.re, &o.im)?
            .checked_add(&m(&self.im, &o.re)?)
            .ok_or(Error::DegreeOverflow)?;
        Ok(Self::new(re, im))
    }

    pub fn scale(&self, r: &Rat) -> Result<Self> {
        self.mul(&Self::real(*r))
    }

    pub fn to_complex<T: Real>(&self) -> C<T> {
        C::new(rat_to(&self.re), rat_to(&self.im))
    }

    /// Exact conversion of a complex float with integer parts below `2^53`.
    pub fn from_integral<T: Real>(z: C<T>) -> Option<Self> {
        let conv = |x: T| {
            let f = x.to_f64()?;
            (f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i128)
        };
        Some(Self::int(conv(z.re)?, conv(z.im)?))
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // unit imaginary parts print as a bare `i`
        let imag = |x: Rat| {
            if x.is_one() {
                "i".to_string()
            } else {
                format!("{x}i")
            }
        };
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{}", imag(-self.im))
            } else {
                write!(f, "{}", imag(self.im))
            }
        } else if self.im.is_negative() {
            write!(f, "({} - {})", self.re, imag(-self.im))
        } else {
            write!(f, "({} + {})", self.re, imag(self.im))
        }
    }
}

fn rat_to<T: Real>(r: &Rat) -> T {
    T::c(r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN))
}

/// `C(n, k)` exactly; zero when `k < 0` or `k > n`.
pub fn binomial(n: i128, k: i128) -> Result<i128> {
    if k < 0 || n < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for j in 0..k {
        // acc·(n-j) is divisible by j+1
        acc = acc.checked_mul(n - j).ok_or(Error::DegreeOverflow)? / (j + 1);
    }
    Ok(acc)
}

fn sign(e: i128) -> i128 {
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Point of the unit circle, exact when it is a root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CirclePoint<T: Real> {
    /// `exp(2πi·index/order)`.
    RootOfUnity {
        order: u32,
        index: u32,
    },
    Point(C<T>),
}

impl<T: Real> CirclePoint<T> {
    pub fn root_of_unity(order: u32, index: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("root of unity of order 0".into()));
        }
        Ok(Self::RootOfUnity {
            order,
            index: index % order,
        })
    }

    pub fn one() -> Self {
        Self::RootOfUnity { order: 1, index: 0 }
    }

    /// A general point; must lie on the circle within `1e-12`.
    pub fn point(z: C<T>) -> Result<Self> {
        let r = z.norm();
        if (r - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidArgument(format!(
                "{z} is not on the unit circle"
            )));
        }
        Ok(Self::Point(z / r))
    }

    pub fn value(&self) -> C<T> {
        self.pow(1)
    }

    fn reduced(order: u32, index: u32, e: i64) -> (u64, u64) {
        let n = order as i64;
        let idx = ((index as i64 % n) * (e % n)).rem_euclid(n);
        (idx as u64, order as u64)
    }

    /// `λ^e`, exact on quarter turns.
    pub fn pow(&self, e: i64) -> C<T> {
        match *self {
            Self::RootOfUnity { order, index } => {
                let (idx, n) = Self::reduced(order, index, e);
                if (4 * idx) % n == 0 {
                    return match 4 * idx / n {
                        0 => cr(T::one()),
                        1 => C::new(T::zero(), T::one()),
                        2 => cr(-T::one()),
                        _ => C::new(T::zero(), -T::one()),
                    };
                }
                let t = T::TAU() * T::c(idx as f64) / T::c(n as f64);
                C::new(t.cos(), t.sin())
            }
            Self::Point(z) => z.powi(e as i32),
        }
    }

    /// `λ^e` as a Gaussian integer when it is one of `±1, ±i`.
    pub fn exact_pow(&self, e: i64) -> Option<GaussRat> {
        match *self {
            Self::RootOfUnity { order, index } => {
                let (idx, n) = Self::reduced(order, index, e);
                ((4 * idx) % n == 0).then(|| match 4 * idx / n {
                    0 => GaussRat::int(1, 0),
                    1 => GaussRat::int(0, 1),
                    2 => GaussRat::int(-1, 0),
                    _ => GaussRat::int(0, -1),
                })
            }
            Self::Point(_) => None,
        }
    }

    pub fn same_point(&self, other: &Self) -> bool {
        (self.value() - other.value()).norm() <= T::tol(1e-12)
    }
}

impl<T: Real> fmt::Display for CirclePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_pow(1) {
            Some(g) => write!(f, "{g}"),
            None => {
                let z = self.value();
                write!(f, "{}", ComplexDisplay(z))
            }
        }
    }
}

struct ComplexDisplay<T: Real>(C<T>);

impl<T: Real> fmt::Display for ComplexDisplay<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.0;
        if z.im.is_zero() {
            write!(f, "{}", z.re)
        } else if z.im < T::zero() {
            write!(f, "({} - {}i)", z.re, -z.im)
        } else {
            write!(f, "({} + {}i)", z.re, z.im)
        }
    }
}

/// Polynomial in `k` with exact rational coefficients, recovered from exact
/// samples at `k = 0, …, degree` by Newton forward differences and checked
/// on `extra` further samples.
pub fn fit_polynomial(
    max_degree: usize,
    extra: usize,
    mut sample: impl FnMut(i128) -> Result<Rat>,
) -> Result<Vec<Rat>> {
    let d = max_degree;
    let ys: Vec<Rat> = (0..=d as i128).map(&mut sample).collect::<Result<_>>()?;
    // forward differences Δ^r y_0
    let mut diff = ys.clone();
    let mut newton = Vec::with_capacity(d + 1);
    for r in 0..=d {
        newton.push(diff[0]);
        for j in 0..d - r {
            diff[j] = diff[j + 1]
                .checked_sub(&diff[j])
                .ok_or(Error::DegreeOverflow)?;
        }
    }
    // Σ_r Δ^r y_0 · k(k-1)…(k-r+1)/r!
    let mut coeffs = vec![Rat::zero(); d + 1];
    let mut falling = vec![Rat::one()];
    let mut fact = Rat::one();
    for (r, c) in newton.iter().enumerate() {
        if r > 0 {
            let mut next = vec![Rat::zero(); falling.len() + 1];
            let shift = Rat::from_integer(r as i128 - 1);
            for (j, a) in falling.iter().enumerate() {
                next[j + 1] = next[j + 1].checked_add(a).ok_or(Error::DegreeOverflow)?;
                let t = a.checked_mul(&shift).ok_or(Error::DegreeOverflow)?;
                next[j] = next[j].checked_sub(&t).ok_or(Error::DegreeOverflow)?;
            }
            falling = next;
            fact = fact
                .checked_mul(&Rat::from_integer(r as i128))
                .ok_or(Error::DegreeOverflow)?;
        }
        let w = c.checked_mul(&fact.recip()).ok_or(Error::DegreeOverflow)?;
        for (j, a) in falling.iter().enumerate() {
            let t = a.checked_mul(&w).ok_or(Error::DegreeOverflow)?;
            coeffs[j] = coeffs[j].checked_add(&t).ok_or(Error::DegreeOverflow)?;
        }
    }
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    for k in (d + 1)..=(d + extra) {
        let k = k as i128;
        if eval_rat(&coeffs, k)? != sample(k)? {
            return Err(Error::Unsupported(format!(
                "samples are not a polynomial of degree ≤ {d} in k"
            )));
        }
    }
    Ok(coeffs)
}

fn eval_rat(coeffs: &[Rat], k: i128) -> Result<Rat> {
    let x = Rat::from_integer(k);
    coeffs.iter().rev().try_fold(Rat::zero(), |acc, c| {
        acc.checked_mul(&x)
            .and_then(|v| v.checked_add(c))
            .ok_or(Error::DegreeOverflow)
    })
}

fn eval_gauss(coeffs: &[GaussRat], k: i128) -> Result<GaussRat> {
    let x = GaussRat::int(k, 0);
    coeffs
        .iter()
        .rev()
        .try_fold(GaussRat::zero(), |acc, c| acc.mul(&x)?.add(c))
}

/// The `m×m` integer matrix of one tuple index `N` at lag `k`:
/// `H[j1][j2] = Σ_{l<N} (-1)^{N-1-l} C(N-1,l) C(l+j1,m-1) C(l+k+j2,m-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HMatrix {
    pub index: usize,
    pub k: u64,
    pub m: usize,
    pub entries: Vec<Vec<i128>>,
}

pub fn hmatrix(index: usize, k: u64, m: usize) -> Result<HMatrix> {
    if index == 0 || m == 0 {
        return Err(Error::InvalidArgument(
            "index and m must be at least 1".into(),
        ));
    }
    let mut entries = vec![vec![0i128; m]; m];
    for (j1, row) in entries.iter_mut().enumerate() {
        for (j2, e) in row.iter_mut().enumerate() {
            *e = hentry(index, k as i128, m, j1, j2)?;
        }
    }
    Ok(HMatrix {
        index,
        k,
        m,
        entries,
    })
}

fn hentry(index: usize, k: i128, m: usize, j1: usize, j2: usize) -> Result<i128> {
    let n1 = index as i128 - 1;
    let top = m as i128 - 1;
    let mut acc: i128 = 0;
    for l in 0..=n1 {
        let t = binomial(n1, l)?
            .checked_mul(binomial(l + j1 as i128, top)?)
            .and_then(|v| v.checked_mul(binomial(l + k + j2 as i128, top).ok()?))
            .ok_or(Error::DegreeOverflow)?;
        acc = acc
            .checked_add(sign(n1 - l) * t)
            .ok_or(Error::DegreeOverflow)?;
    }
    Ok(acc)
}

/// One summand `P(D)δ_λ`; `poly[r]` multiplies `|k|^r` in the Fourier generator.
#[derive(Debug, Clone, Serialize)]
pub struct Term<T: Real> {
    pub point: CirclePoint<T>,
    pub poly: Vec<C<T>>,
    /// Same coefficients exactly, when every input was exact.
    #[serde(skip)]
    pub exact: Option<Vec<GaussRat>>,
}

impl<T: Real> Term<T> {
    pub fn eval(&self, k: u64) -> C<T> {
        let x = T::c(k as f64);
        self.poly
            .iter()
            .rev()
            .fold(C::zero(), |acc, &c| acc * x + c)
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly.iter().rposition(|c| !c.is_zero())
    }
}

/// `lebesgue·|dz|/2π + Σ P_t(D)δ_{λ_t}`, with
/// `μ̂(k) = lebesgue·δ_{k0} + Σ P_t(k) conj(λ_t)^k` for `k ≥ 0` and
/// `μ̂(-k) = conj(μ̂(k))`.
#[derive(Debug, Clone, Serialize)]
pub struct CircleDistribution<T: Real> {
    pub lebesgue: T,
    pub terms: Vec<Term<T>>,
}

impl<T: Real> CircleDistribution<T> {
    pub fn zero() -> Self {
        Self {
            lebesgue: T::zero(),
            terms: Vec::new(),
        }
    }

    pub fn lebesgue() -> Self {
        Self {
            lebesgue: T::one(),
            terms: Vec::new(),
        }
    }

    /// `c·δ_λ`.
    pub fn point_mass(point: CirclePoint<T>, c: T) -> Self {
        Self {
            lebesgue: T::zero(),
            terms: vec![Term {
                point,
                poly: vec![cr(c)],
                exact: None,
            }],
        }
    }

    /// `P(D)δ_λ` with integer coefficients, `coeffs[r]` multiplying `D^r`.
    pub fn generator(point: CirclePoint<T>, coeffs: &[i64]) -> Self {
        let exact: Vec<GaussRat> = coeffs
            .iter()
            .map(|&c| GaussRat::int(c as i128, 0))
            .collect();
        Self {
            lebesgue: T::zero(),
            terms: vec![Term {
                point,
                poly: coeffs.iter().map(|&c| cr(T::c(c as f64))).collect(),
                exact: Some(exact),
            }],
        }
    }

    /// Sum of two distributions; terms at the same point are merged.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.lebesgue += other.lebesgue;
        for t in &other.terms {
            match out.terms.iter_mut().find(|u| u.point.same_point(&t.point)) {
                Some(u) => {
                    let len = u.poly.len().max(t.poly.len());
                    u.poly.resize(len, C::zero());
                    for (a, b) in u.poly.iter_mut().zip(&t.poly) {
                        *a += b;
                    }
                    u.exact = match (u.exact.take(), &t.exact) {
                        (Some(mut a), Some(b)) => {
                            a.resize(len, GaussRat::zero());
                            a.iter_mut()
                                .zip(b)
                                .map(|(x, y)| x.add(y).map(|v| *x = v))
                                .collect::<Result<Vec<_>>>()
                                .ok()
                                .map(|_| a)
                        }
                        _ => None,
                    };
                }
                None => out.terms.push(t.clone()),
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.lebesgue.is_zero() && self.terms.iter().all(|t| t.degree().is_none())
    }

    /// Largest degree of the `P_t` (the order of the distribution).
    pub fn order(&self) -> Option<usize> {
        self.terms.iter().filter_map(|t| t.degree()).max()
    }

    pub fn fourier(&self, k: i64) -> C<T> {
        if k < 0 {
            return self.fourier(-k).conj();
        }
        let mut acc = if k == 0 { cr(self.lebesgue) } else { C::zero() };
        for t in &self.terms {
            acc += t.eval(k as u64) * t.point.pow(-k);
        }
        acc
    }

    /// Exact `μ̂(k)` when all generator data is exact.
    pub fn fourier_exact(&self, k: i64) -> Option<Result<GaussRat>> {
        if k < 0 {
            return self.fourier_exact(-k).map(|r| r.map(|g| g.conj()));
        }
        let leb = self.lebesgue.to_f64()?;
        if leb.fract() != 0.0 {
            return None;
        }
        let mut acc = if k == 0 {
            GaussRat::int(leb as i128, 0)
        } else {
            GaussRat::zero()
        };
        for t in &self.terms {
            let p = t.exact.as_ref()?;
            let w = t.point.exact_pow(-k)?;
            let v = eval_gauss(p, k as i128)
                .and_then(|v| v.mul(&w))
                .and_then(|v| acc.add(&v));
            match v {
                Ok(v) => acc = v,
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(acc))
    }

    /// A positive measure: nonnegative Lebesgue part and constant
    /// nonnegative masses.
    pub fn is_positive_measure(&self) -> bool {
        self.lebesgue >= T::zero()
            && self.terms.iter().all(|t| match t.degree() {
                None => true,
                Some(0) => t.poly[0].im.is_zero() && t.poly[0].re >= T::zero(),
                Some(_) => false,
            })
    }

    /// Readable closed form such as `(D + 1)δ(1)`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.lebesgue.is_zero() {
            parts.push(if self.lebesgue == T::one() {
                "|dz|/2π".to_string()
            } else {
                format!("{}·|dz|/2π", self.lebesgue)
            });
        }
        for t in &self.terms {
            let Some(deg) = t.degree() else { continue };
            let coeff = |r: usize| match &t.exact {
                Some(e) => e[r].to_string(),
                None => ComplexDisplay(t.poly[r]).to_string(),
            };
            let mut mono = Vec::new();
            for r in (0..=deg).rev() {
                if t.poly[r].is_zero() {
                    continue;
                }
                let c = coeff(r);
                mono.push(match r {
                    0 => c,
                    _ => {
                        let power = if r == 1 {
                            "D".to_string()
                        } else {
                            format!("D^{r}")
                        };
                        if c == "1" {
                            power
                        } else {
                            format!("{c}·{power}")
                        }
                    }
                });
            }
            let poly = mono.join(" + ");
            let poly = if mono.len() > 1 {
                format!("({poly})")
            } else {
                poly
            };
            parts.push(format!("{poly}δ({})", t.point));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// `(μ₀, …, μ_{n-1})` with `μ₀` normalized Lebesgue measure.
#[derive(Debug, Clone, Serialize)]
pub struct TupleSpec<T: Real> {
    pub entries: Vec<CircleDistribution<T>>,
}

impl<T: Real> TupleSpec<T> {
    pub fn new(entries: Vec<CircleDistribution<T>>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty tuple".into()))?;
        if first.lebesgue != T::one() || !first.terms.is_empty() {
            return Err(Error::InvalidArgument(
                "first entry must be normalized Lebesgue measure".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The last entry is a positive measure.
    pub fn leading_is_positive(&self) -> bool {
        self.entries.last().is_some_and(|d| d.is_positive_measure())
    }
}

/// One atom of [`multi_tuple`]: `λ`, its order `m_j` and the polynomials `p_{ij}`.
#[derive(Debug, Clone)]
pub struct AtomSpec<T: Real> {
    pub point: CirclePoint<T>,
    pub m: usize,
    pub polys: Vec<ComplexPoly<T>>,
}

/// Exact fitted polynomial in `k` of every entry of `H_N(k)`, `[j1][j2][r]`.
fn hmatrix_polys(index: usize, m: usize) -> Result<Vec<Vec<Vec<Rat>>>> {
    let deg = 2 * m - 2;
    (0..m)
        .map(|j1| {
            (0..m)
                .map(|j2| {
                    fit_polynomial(deg, 4, |k| {
                        hentry(index, k, m, j1, j2).map(Rat::from_integer)
                    })
                })
                .collect()
        })
        .collect()
}

/// Tuple of length `2·max m_j` summing the rank-one contributions of every
/// `(λ_j, p_{ij})`, each built with its own `m_j`.
pub fn multi_tuple<T: Real>(atoms: &[AtomSpec<T>]) -> Result<TupleSpec<T>> {
    if atoms.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one atom is required".into(),
        ));
    }
    for (j, a) in atoms.iter().enumerate() {
        if a.m == 0 || a.polys.is_empty() || a.polys.len() > a.m {
            return Err(Error::InvalidArgument(format!(
                "atom {j}: need 1 ≤ number of polynomials ≤ m"
            )));
        }
        if atoms[..j].iter().any(|b| b.point.same_point(&a.point)) {
            return Err(Error::InvalidArgument(format!("atom {j} is repeated")));
        }
        for (i, p) in a.polys.iter().enumerate() {
            if !p.is_zero() && p.degree() + 1 > a.m {
                return Err(Error::InvalidArgument(format!(
                    "atom {j}: polynomial {i} has degree above m - 1 = {}",
                    a.m - 1
                )));
            }
        }
        let first = &a.polys[0];
        let at = first.eval(a.point.value()).norm();
        if !(at > T::tol(1e-12) * first.coeff_norm().max(T::one())) {
            return Err(Error::InvalidArgument(format!(
                "atom {j}: first polynomial vanishes at λ"
            )));
        }
    }
    let m = atoms.iter().map(|a| a.m).max().unwrap_or(1);
    let mut entries = vec![CircleDistribution::lebesgue()];
    for index in 1..2 * m {
        let mut dist = CircleDistribution::zero();
        for a in atoms {
            let h = hmatrix_polys(index, a.m)?;
            let len = 2 * a.m - 1;
            let mut poly = vec![C::<T>::zero(); len];
            let mut exact = Some(vec![GaussRat::zero(); len]);
            for p in &a.polys {
                // vec p(λ) = (c_j λ^j)
                let v: Vec<C<T>> = (0..a.m)
                    .map(|j| p.coeff(j) * a.point.pow(j as i64))
                    .collect();
                let ve: Option<Vec<GaussRat>> = (0..a.m)
                    .map(|j| {
                        let c = GaussRat::from_integral(p.coeff(j))?;
                        c.mul(&a.point.exact_pow(j as i64)?).ok()
                    })
                    .collect();
                for j1 in 0..a.m {
                    for j2 in 0..a.m {
                        let w = v[j1] * v[j2].conj();
                        for (r, c) in h[j1][j2].iter().enumerate() {
                            poly[r] += w * rat_to::<T>(c);
                        }
                        exact = match (exact, &ve) {
                            (Some(mut acc), Some(ve)) => {
                                let we = ve[j1].mul(&ve[j2].conj())?;
                                for (r, c) in h[j1][j2].iter().enumerate() {
                                    acc[r] = acc[r].add(&we.scale(c)?)?;
                                }
                                Some(acc)
                            }
                            _ => None,
                        };
                    }
                }
            }
            let (poly, exact) = match exact {
                // exact data decides which coefficients vanish
                Some(e) => {
                    let keep = e.iter().rposition(|c| !c.is_zero()).map_or(0, |d| d + 1);
                    let poly = e[..keep].iter().map(|c| c.to_complex()).collect();
                    (poly, Some(e[..keep].to_vec()))
                }
                None => {
                    let scale = poly.iter().fold(T::zero(), |s, c| s.max(c.norm()));
                    let keep = poly
                        .iter()
                        .rposition(|c| c.norm() > T::tol(1e-13) * scale)
                        .map_or(0, |d| d + 1);
                    (poly[..keep].to_vec(), None)
                }
            };
            if !poly.is_empty() {
                dist.terms.push(Term {
                    point: a.point,
                    poly,
                    exact,
                });
            }
        }
        entries.push(dist);
    }
    TupleSpec::new(entries)
}

/// Tuple of length `2m` for the single atom `λ` and polynomial `p`.
pub fn rank_one_tuple<T: Real>(
    point: CirclePoint<T>,
    p: &ComplexPoly<T>,
    m: usize,
) -> Result<TupleSpec<T>> {
    multi_tuple(&[AtomSpec {
        point,
        m,
        polys: vec![p.clone()],
    }])
}

/// `μᵢ = C(i-1, m-1)·∏_{j=i+1-m}^{m-1}(D+j)/(2m-1-i)!·δ_λ`.
pub fn dlambda_closed_form<T: Real>(point: CirclePoint<T>, m: usize) -> Result<TupleSpec<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let mut entries = vec![CircleDistribution::lebesgue()];
    let mi = m as i128;
    for i in 1..2 * mi {
        let lead = binomial(i - 1, mi - 1)?;
        if lead == 0 {
            entries.push(CircleDistribution::zero());
            continue;
        }
        let mut poly = vec![Rat::from_integer(lead)];
        for j in (i + 1 - mi)..mi {
            // multiply by (k + j)
            let mut next = vec![Rat::zero(); poly.len() + 1];
            for (r, c) in poly.iter().enumerate() {
                next[r + 1] = next[r + 1].checked_add(c).ok_or(Error::DegreeOverflow)?;
                let t = c
                    .checked_mul(&Rat::from_integer(j))
                    .ok_or(Error::DegreeOverflow)?;
                next[r] = next[r].checked_add(&t).ok_or(Error::DegreeOverflow)?;
            }
            poly = next;
        }
        let mut fact: i128 = 1;
        for t in 2..=(2 * mi - 1 - i) {
            fact = fact.checked_mul(t).ok_or(Error::DegreeOverflow)?;
        }
        let inv = Rat::new(1, fact);
        let poly: Vec<Rat> = poly.iter().map(|c| c * inv).collect();
        entries.push(CircleDistribution {
            lebesgue: T::zero(),
            terms: vec![Term {
                point,
                poly: poly.iter().map(|c| cr(rat_to(c))).collect(),
                exact: Some(poly.iter().map(|c| GaussRat::real(*c)).collect()),
            }],
        });
    }
    TupleSpec::new(entries)
}

/// `Σ_{l=m-1}^{i-1} (-1)^{i-1-l} C(i-m, i-1-l) C(l+k, m-1) = C(m+k-1, 2m-1-i)`
/// for every `0 ≤ k ≤ k_max`, in exact integers.
pub fn binomial_identity_check(m: usize, i: usize, k_max: usize) -> Result<bool> {
    if m == 0 || i < m || i > 2 * m - 1 {
        return Err(Error::InvalidArgument("need 1 ≤ m ≤ i ≤ 2m - 1".into()));
    }
    let (m, i) = (m as i128, i as i128);
    for k in 0..=k_max as i128 {
        let mut lhs: i128 = 0;
        for l in (m - 1)..=(i - 1) {
            let t = binomial(i - m, i - 1 - l)?
                .checked_mul(binomial(l + k, m - 1)?)
                .ok_or(Error::DegreeOverflow)?;
            lhs = lhs
                .checked_add(sign(i - 1 - l) * t)
                .ok_or(Error::DegreeOverflow)?;
        }
        if lhs != binomial(m + k - 1, 2 * m - 1 - i)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(j)_i (j')_i / (i!·(M)_i)` with `M = max(j, j')`: the weight of
/// `f_j conj(g_{j'}) μ̂(j'-j)` in `D_{μ,i}`.
fn order_weight<T: Real>(j: usize, jp: usize, i: usize) -> T {
    let big = j.max(jp);
    (0..i).fold(T::one(), |acc, t| {
        acc * T::from_usize_lossy(j - t) * T::from_usize_lossy(jp - t)
            / (T::from_usize_lossy(t + 1) * T::from_usize_lossy(big - t))
    })
}

/// Polarized `D_{μ,i}(f, g)` for polynomials.
pub fn dirichlet_form<T: Real>(
    mu: &CircleDistribution<T>,
    i: usize,
    f: &ComplexPoly<T>,
    g: &ComplexPoly<T>,
) -> Result<C<T>> {
    if i == 0 {
        if !mu.terms.is_empty() {
            return Err(Error::Unsupported(
                "order 0 is only defined for Lebesgue measure".into(),
            ));
        }
        let h2 = f
            .coeffs()
            .iter()
            .zip(g.coeffs())
            .fold(C::zero(), |a, (x, y)| a + *x * y.conj());
        return Ok(h2 * mu.lebesgue);
    }
    let mut acc = C::zero();
    for j in i..f.coeffs().len() {
        let fj = f.coeff(j);
        if fj.is_zero() {
            continue;
        }
        for jp in i..g.coeffs().len() {
            let gj = g.coeff(jp);
            if gj.is_zero() {
                continue;
            }
            let w: T = order_weight(j, jp, i);
            acc += fj * gj.conj() * mu.fourier(jp as i64 - j as i64) * w;
        }
    }
    Ok(acc)
}

/// `D_{μ,i}(f)`.
pub fn dirichlet_integral<T: Real>(
    mu: &CircleDistribution<T>,
    i: usize,
    f: &ComplexPoly<T>,
) -> Result<T> {
    let v = dirichlet_form(mu, i, f, f)?.re;
    if mu.is_positive_measure() {
        let scale = f.coeff_norm().powi(2).max(T::one())
            * T::from_usize_lossy(f.degree() + 1).powi(i as i32);
        if v < -T::tol(1e-10) * scale {
            return Err(Error::NegativeIntegral {
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(v)
}

/// The same integral taken over the disk of radius `r < 1` only:
/// the Beta factor becomes `∫_0^{r²} s^{M-i}(1-s)^{i-1} ds`.
pub fn dirichlet_integral_radius<T: Real>(
    mu: &CircleDistribution<T>,
    i: usize,
    f: &ComplexPoly<T>,
    r: T,
) -> Result<T> {
    if i == 0 {
        return Err(Error::Unsupported("order 0 is a boundary value".into()));
    }
    let mut acc = C::zero();
    let r2 = r * r;
    let n = f.coeffs().len();
    for j in i..n {
        for jp in i..n {
            let big = j.max(jp);
            let a = big - i + 1;
            let mut beta = T::zero();
            for s in 0..i {
                let c = T::c(binomial(i as i128 - 1, s as i128)? as f64);
                let e = a + s;
                let term = c * r2.powi(e as i32) / T::from_usize_lossy(e);
                beta += if s % 2 == 0 { term } else { -term };
            }
            // (j)_i (j')_i / (i!(i-1)!)
            let mut w = T::one();
            for t in 0..i {
                w = w * T::from_usize_lossy(j - t) * T::from_usize_lossy(jp - t)
                    / T::from_usize_lossy(t + 1);
                if t > 0 {
                    w /= T::from_usize_lossy(t);
                }
            }
            acc += f.coeff(j) * f.coeff(jp).conj() * mu.fourier(jp as i64 - j as i64) * (w * beta);
        }
    }
    Ok(acc.re)
}

/// `Σᵢ D_{μᵢ,i}(f, g)`.
pub fn vecmu_inner<T: Real>(
    t: &TupleSpec<T>,
    f: &ComplexPoly<T>,
    g: &ComplexPoly<T>,
) -> Result<C<T>> {
    t.entries
        .iter()
        .enumerate()
        .try_fold(C::zero(), |acc, (i, mu)| {
            Ok(acc + dirichlet_form(mu, i, f, g)?)
        })
}

pub fn vecmu_norm<T: Real>(t: &TupleSpec<T>, f: &ComplexPoly<T>) -> Result<T> {
    Ok(vecmu_inner(t, f, f)?.re)
}

impl<T: Real> InnerProduct<T> for TupleSpec<T> {
    fn inner(&self, f: &ComplexPoly<T>, g: &ComplexPoly<T>) -> Result<C<T>> {
        vecmu_inner(self, f, g)
    }

    fn tag(&self) -> String {
        format!("tuple of length {}", self.len())
    }

    fn monomial_gram(&self, size: usize) -> Result<CMatrix<T>> {
        let mut g = CMatrix::zeros(size, size);
        for (i, mu) in self.entries.iter().enumerate() {
            if i == 0 {
                for a in 0..size {
                    g[(a, a)] += cr(mu.lebesgue);
                }
                continue;
            }
            for a in i..size {
                for b in i..size {
                    let w: T = order_weight(a, b, i);
                    g[(a, b)] += mu.fourier(b as i64 - a as i64) * w;
                }
            }
        }
        Ok(g)
    }
}

/// `(vecμ norm of f, ‖f‖²_{H²} + D_λ^m(pf))`.
pub fn norm_crosscheck<T: Real>(
    point: CirclePoint<T>,
    p: &ComplexPoly<T>,
    m: usize,
    f: &ComplexPoly<T>,
) -> Result<(T, T)> {
    let t = rank_one_tuple(point, p, m)?;
    let lhs = vecmu_norm(&t, f)?;
    let pf = StableRational::polynomial(p * f);
    let rhs = f.coeff_norm().powi(2) + local_dirichlet_m(&pf, point.value(), m)?.value;
    Ok((lhs, rhs))
}

/// Finite-section evidence that a tuple is allowable.
#[derive(Debug, Clone, Serialize)]
pub struct AllowabilityCertificate<T: Real> {
    pub truncation: usize,
    pub min_eigenvalue: T,
    pub max_eigenvalue: T,
    /// Gram matrix of `1, z, …, z^N` is PSD within `1e-8·max_eigenvalue`.
    pub gram_psd: bool,
    /// Smallest `C` with `‖zf‖² ≤ C‖f‖²` on the truncation.
    pub shift_bound: Option<T>,
}

pub fn allowability<T: Real, I: InnerProduct<T>>(
    ip: &I,
    truncation: usize,
) -> Result<AllowabilityCertificate<T>> {
    let size = truncation + 1;
    let full = ip.monomial_gram(size + 1)?;
    let g = CMatrix::from_fn(size, size, |a, b| full[(a, b)]);
    let s = CMatrix::from_fn(size, size, |a, b| full[(a + 1, b + 1)]);
    let ev = hermitian_eigenvalues(&g);
    let (lo, hi) = (ev[0], ev[size - 1]);
    let gram_psd = lo >= -T::tol(1e-8) * hi.abs();
    let shift_bound = if lo > T::zero() {
        generalized_max_eigenvalue(&s.hermitian_part(), &g.hermitian_part()).ok()
    } else {
        None
    };
    Ok(AllowabilityCertificate {
        truncation,
        min_eigenvalue: lo,
        max_eigenvalue: hi,
        gram_psd,
        shift_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> CirclePoint<f64> {
        CirclePoint::one()
    }

    fn poly(c: &[f64]) -> ComplexPoly<f64> {
        ComplexPoly::from_real(c)
    }

    fn exact_values(d: &CircleDistribution<f64>, k: i64) -> GaussRat {
        d.fourier_exact(k).unwrap().unwrap()
    }

    #[test]
    fn strict_four_isometry_tuple() {
        let t = rank_one_tuple(one(), &poly(&[0.0, 1.0]), 2).unwrap();
        assert_eq!(t.len(), 4);
        for k in 0..=40 {
            assert_eq!(
                exact_values(&t.entries[1], k),
                GaussRat::int(k as i128 + 1, 0)
            );
            assert_eq!(
                exact_values(&t.entries[2], k),
                GaussRat::int(k as i128 + 3, 0)
            );
            assert_eq!(exact_values(&t.entries[3], k), GaussRat::int(2, 0));
        }
        assert_eq!(t.entries[1].describe(), "(D + 1)δ(1)");
        assert_eq!(t.entries[3].describe(), "2δ(1)");
    }

    #[test]
    fn constant_p_matches_closed_form() {
        for m in 1..=4 {
            let a = rank_one_tuple(one(), &poly(&[1.0]), m).unwrap();
            let b = dlambda_closed_form(one(), m).unwrap();
            for i in 1..2 * m {
                for k in 0..=40 {
                    let x = a.entries[i].fourier_exact(k).unwrap().unwrap();
                    let y = b.entries[i].fourier_exact(k).unwrap().unwrap();
                    assert_eq!(x, y, "m={m} i={i} k={k}");
                }
            }
        }
    }

    #[test]
    fn closed_form_orders() {
        let t = dlambda_closed_form(one(), 4).unwrap();
        for i in 1..4 {
            assert!(t.entries[i].is_zero());
        }
        for i in 4..8 {
            assert_eq!(t.entries[i].order(), Some(7 - i));
        }
        assert_eq!(
            dlambda_closed_form(one(), 2).unwrap().entries[2].describe(),
            "(D + 1)δ(1)"
        );
    }

    #[test]
    fn single_atom_m1_is_point_mass() {
        let lam = CirclePoint::root_of_unity(8, 3).unwrap();
        let t = rank_one_tuple(lam, &poly(&[1.0]), 1).unwrap();
        assert_eq!(t.len(), 2);
        for k in -5..=5i64 {
            let want = lam.pow(-k);
            assert!((t.entries[1].fourier(k) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn two_point_example() {
        let minus = CirclePoint::root_of_unity(2, 1).unwrap();
        let t = multi_tuple(&[
            AtomSpec {
                point: one(),
                m: 1,
                polys: vec![poly(&[1.0])],
            },
            AtomSpec {
                point: minus,
                m: 2,
                polys: vec![poly(&[1.0])],
            },
        ])
        .unwrap();
        assert_eq!(t.len(), 4);
        let sgn = |k: i64| if k % 2 == 0 { 1 } else { -1 };
        for k in 0..20i64 {
            assert_eq!(exact_values(&t.entries[1], k), GaussRat::int(1, 0));
            assert_eq!(
                exact_values(&t.entries[2], k),
                GaussRat::int(sgn(k) * (k as i128 + 1), 0)
            );
            assert_eq!(exact_values(&t.entries[3], k), GaussRat::int(2 * sgn(k), 0));
        }
    }

    #[test]
    fn hmatrix_consistency() {
        let h = hmatrix(1, 0, 1).unwrap();
        assert_eq!(h.entries, vec![vec![1]]);
        let h = hmatrix(1, 0, 2).unwrap();
        // l = 0 only: C(j1,1) C(j2,1)
        assert_eq!(h.entries, vec![vec![0, 0], vec![0, 1]]);
        // pairing with vec p(λ) reproduces the generator
        let lam = CirclePoint::<f64>::root_of_unity(6, 1).unwrap();
        let p = ComplexPoly::new(vec![C::new(1.0, 0.5), C::new(-0.25, 2.0), C::new(0.0, 1.0)]);
        let t = rank_one_tuple(lam, &p, 3).unwrap();
        for idx in 1..6 {
            for k in 0..6u64 {
                let h = hmatrix(idx, k, 3).unwrap();
                let v: Vec<C<f64>> = (0..3).map(|j| p.coeff(j) * lam.pow(j as i64)).collect();
                let mut s = C::zero();
                for j1 in 0..3 {
                    for j2 in 0..3 {
                        s += v[j1] * v[j2].conj() * h.entries[j1][j2] as f64;
                    }
                }
                let want = lam.pow(-(k as i64)) * s;
                assert!((t.entries[idx].fourier(k as i64) - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn binomial_identity_small_cases() {
        for m in 1..=6 {
            assert!(binomial_identity_check(m, m, 50).unwrap());
        }
        assert!(binomial_identity_check(2, 3, 50).unwrap());
        for i in 7..=11 {
            assert!(binomial_identity_check(6, i, 50).unwrap());
        }
        assert!(binomial_identity_check(3, 2, 5).is_err());
    }

    #[test]
    fn gaussian_display() {
        assert_eq!(GaussRat::int(0, 1).to_string(), "i");
        assert_eq!(GaussRat::int(0, -1).to_string(), "-i");
        assert_eq!(GaussRat::int(2, -3).to_string(), "(2 - 3i)");
        assert_eq!(
            GaussRat::new(Rat::new(1, 2), Rat::one()).to_string(),
            "(1/2 + i)"
        );
    }

    #[test]
    fn fit_recovers_quadratic() {
        let c = fit_polynomial(4, 3, |k| Ok(Rat::new(k * k - 3 * k + 1, 2))).unwrap();
        assert_eq!(c, vec![Rat::new(1, 2), Rat::new(-3, 2), Rat::new(1, 2)]);
        assert!(fit_polynomial(2, 3, |k| Ok(Rat::from_integer(k * k * k))).is_err());
    }

    #[test]
    fn dirichlet_integral_examples() {
        let leb = CircleDistribution::<f64>::lebesgue();
        assert_eq!(
            dirichlet_integral(&leb, 0, &poly(&[0.0, 0.0, 0.0, 1.0])).unwrap(),
            1.0
        );
        let d1 = CircleDistribution::point_mass(one(), 1.0);
        let f = poly(&[0.0, 1.0, 1.0]);
        assert!((dirichlet_integral(&d1, 1, &f).unwrap() - 5.0).abs() < 1e-14);
        assert!(dirichlet_integral(&d1, 0, &f).is_err());
    }

    #[test]
    fn truncated_radius_tends_to_full() {
        let t = rank_one_tuple(one(), &poly(&[0.0, 1.0]), 2).unwrap();
        let f = poly(&[0.5, -1.0, 2.0, 0.25]);
        for i in 1..4 {
            let full = dirichlet_integral(&t.entries[i], i, &f).unwrap();
            let part = dirichlet_integral_radius(&t.entries[i], i, &f, 1.0 - 1e-9).unwrap();
            assert!((full - part).abs() < 1e-6 * full.abs().max(1.0));
        }
    }

    #[test]
    fn vecmu_norm_of_one_is_one() {
        let t = rank_one_tuple(one(), &poly(&[0.0, 1.0]), 2).unwrap();
        assert!((vecmu_norm(&t, &poly(&[1.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crosscheck_central_example() {
        let (l, r) =
            norm_crosscheck(one(), &poly(&[0.0, 1.0]), 2, &poly(&[1.0, 1.0, 1.0])).unwrap();
        assert!((l - r).abs() < 1e-8 * r);
    }

    #[test]
    fn allowability_of_closed_form() {
        let t = dlambda_closed_form(one(), 2).unwrap();
        let cert = allowability(&t, 12).unwrap();
        assert!(cert.gram_psd);
        assert!(cert.shift_bound.unwrap() >= 1.0);
        assert!(t.leading_is_positive());
    }
}
