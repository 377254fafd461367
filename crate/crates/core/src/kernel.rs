//! Reproducing kernel and rational Schur function of `D(μ)` for a finitely
//! atomic measure `μ`.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hardy::{dmu_inner, AtomicMeasure, StableRational};
use crate::linalg::{hermitian_eigenvalues, pivoted_cholesky, solve, CMatrix};
use crate::poly::{fejer_riesz, laurent_modulus_product, ComplexPoly};
use crate::scalar::{circle_grid, cr, disk_grid, Real, C};

/// Everything the construction produces for one measure.
#[derive(Debug, Clone, Serialize)]
pub struct KernelModel<T: Real> {
    pub measure: AtomicMeasure<T>,
    /// Spectral factor, `|q|² = R` on the circle, `q(0) > 0`.
    pub q: ComplexPoly<T>,
    pub q_min_root_modulus: T,
    pub factorization_residual: T,
    /// `∏(z-λᵢ)/q`.
    pub phi: StableRational<T>,
    /// `∏(1-conj(λᵢ)z)/q`, with `a(0) = 1/q(0) > 0`.
    pub mate: StableRational<T>,
    /// `fᵢ(λⱼ) = δᵢⱼ`, all over the denominator `q`.
    pub dual_basis: Vec<StableRational<T>>,
    /// `gram[(i, j)] = ⟨fⱼ, fᵢ⟩`.
    pub gram: CMatrix<T>,
    pub gram_condition: T,
    /// Kernels at the atoms, projected to the span of the dual basis.
    pub atom_kernels: Vec<StableRational<T>>,
    /// `M` with `Σ pᵢ(z) conj(pᵢ(w)) = X(w)* M X(z)`, `X(z) = (z, …, zⁿ)`.
    pub psd: CMatrix<T>,
    /// Numerators of `B = (p₁, …, pₙ)/q`.
    pub schur_numerators: Vec<ComplexPoly<T>>,
    /// Max coefficient error of the factorization `M = P*P`.
    pub schur_residual: T,
    pub warnings: Vec<String>,
}

/// Bivariate coefficient array: `coeffs[(a, b)]` multiplies `z^a u^b`.
fn bivariate<T: Real>(terms: &[(&ComplexPoly<T>, &ComplexPoly<T>)], size: usize) -> CMatrix<T> {
    let mut out = CMatrix::zeros(size, size);
    for (p, r) in terms {
        for (a, &pa) in p.coeffs().iter().enumerate() {
            for (b, &rb) in r.coeffs().iter().enumerate() {
                out[(a, b)] += pa * rb.conj();
            }
        }
    }
    out
}

/// Multiplies a bivariate array by `(1 - z u)`.
fn times_one_minus_zu<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let n = m.rows();
    CMatrix::from_fn(n, n, |a, b| {
        let lower = if a > 0 && b > 0 {
            m[(a - 1, b - 1)]
        } else {
            C::zero()
        };
        m[(a, b)] - lower
    })
}

pub fn build_model<T: Real>(mu: &AtomicMeasure<T>) -> Result<KernelModel<T>> {
    let n = mu.len();
    let atoms = mu.atoms();
    let r = laurent_modulus_product(atoms, mu.weights())?;
    let fr = fejer_riesz(&r)?;
    let q = fr.q;
    let rho = fr.min_root_modulus;
    let over_q = |p: ComplexPoly<T>| StableRational::with_root_bound(p, q.clone(), rho);

    let pi = ComplexPoly::from_roots(atoms);
    let reflected = atoms.iter().fold(ComplexPoly::one(), |acc, l| {
        &acc * &ComplexPoly::new(vec![cr(T::one()), -l.conj()])
    });
    let phi = over_q(pi.clone());
    let mate = over_q(reflected);

    let mut numerators = Vec::with_capacity(n);
    for i in 0..n {
        let others: Vec<_> = (0..n).filter(|&j| j != i).map(|j| atoms[j]).collect();
        let base = ComplexPoly::from_roots(&others);
        let d = q.eval(atoms[i]) / base.eval(atoms[i]);
        numerators.push(base.scale(d));
    }
    let dual_basis: Vec<_> = numerators.iter().cloned().map(over_q).collect();

    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = if j < i {
                gram[(j, i)].conj()
            } else {
                dmu_inner(&dual_basis[j], &dual_basis[i], mu)?
            };
        }
    }
    let ev = hermitian_eigenvalues(&gram);
    let (lo, hi) = (ev[0], ev[n - 1]);
    if !(lo > T::tol(1e-12) * hi) {
        return Err(Error::GramNotPositive {
            min_eig: lo.to_f64().unwrap_or(f64::NAN),
        });
    }
    let gram_condition = hi / lo;
    let mut warnings = Vec::new();
    if gram_condition > T::c(1e8) {
        warnings.push(format!(
            "Gram condition number {gram_condition:e} exceeds 1e8"
        ));
    }

    // f_j = Σ_i gram[(i, j)] K_i on numerator vectors: F = K·G
    let f = CMatrix::from_fn(n, n, |row, col| numerators[col].coeff(row));
    let kt = solve(&transpose(&gram), &transpose(&f))?;
    let atom_kernels = (0..n)
        .map(|i| over_q(ComplexPoly::new((0..n).map(|row| kt[(i, row)]).collect())))
        .collect();

    let mut model = KernelModel {
        measure: mu.clone(),
        q,
        q_min_root_modulus: rho,
        factorization_residual: fr.residual,
        phi,
        mate,
        dual_basis,
        gram,
        gram_condition,
        atom_kernels,
        psd: CMatrix::zeros(0, 0),
        schur_numerators: Vec::new(),
        schur_residual: T::zero(),
        warnings,
    };
    let schur = schur_extract(&model)?;
    model.psd = schur.psd;
    model.schur_numerators = schur.numerators;
    model.schur_residual = schur.residual;
    Ok(model)
}

fn transpose<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::from_fn(m.cols(), m.rows(), |i, j| m[(j, i)])
}

/// Numerator `N(z, u)` with
/// `K_w(z) = N(z, conj w) / (q(z) conj(q(w)) (1 - z conj w))`.
pub fn kernel_numerator<T: Real>(model: &KernelModel<T>) -> CMatrix<T> {
    let size = model.measure.len() + 2;
    let pairs: Vec<_> = model
        .dual_basis
        .iter()
        .zip(&model.atom_kernels)
        .map(|(f, k)| (f.num(), k.num()))
        .collect();
    let cross = times_one_minus_zu(&bivariate(&pairs, size));
    let phi = bivariate(&[(model.phi.num(), model.phi.num())], size);
    CMatrix::from_fn(size, size, |a, b| cross[(a, b)] + phi[(a, b)])
}

fn check_open_disk<T: Real>(z: C<T>) -> Result<()> {
    if !(z.norm() < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "point {z} is not in the open unit disk"
        )));
    }
    Ok(())
}

/// `K_w(z) = Σ fᵢ(z) conj(Kᵢ(w)) + φ(z) conj(φ(w)) / (1 - z conj w)`.
pub fn kernel_eval<T: Real>(model: &KernelModel<T>, z: C<T>, w: C<T>) -> Result<C<T>> {
    check_open_disk(z)?;
    check_open_disk(w)?;
    let finite = model
        .dual_basis
        .iter()
        .zip(&model.atom_kernels)
        .fold(C::<T>::zero(), |acc, (f, k)| {
            acc + f.eval(z) * k.eval(w).conj()
        });
    let one = cr(T::one());
    Ok(finite + model.phi.eval(z) * model.phi.eval(w).conj() / (one - z * w.conj()))
}

/// `K_w` as a function of `z`.
pub fn kernel_function<T: Real>(model: &KernelModel<T>, w: C<T>) -> Result<StableRational<T>> {
    check_open_disk(w)?;
    let one = cr(T::one());
    let factor = ComplexPoly::new(vec![one, -w.conj()]);
    let mut num = model.phi.num().scale(model.phi.eval(w).conj());
    for (f, k) in model.dual_basis.iter().zip(&model.atom_kernels) {
        num = &num + &(&f.num().scale(k.eval(w).conj()) * &factor);
    }
    let den = &model.q * &factor;
    let rho = if w.norm().is_zero() {
        model.q_min_root_modulus
    } else {
        model.q_min_root_modulus.min(w.norm().recip())
    };
    Ok(StableRational::with_root_bound(num, den, rho))
}

/// Result of [`schur_extract`].
#[derive(Debug, Clone, Serialize)]
pub struct SchurExtraction<T: Real> {
    pub numerators: Vec<ComplexPoly<T>>,
    pub psd: CMatrix<T>,
    pub rank: usize,
    pub min_eigenvalue: T,
    /// Max entry of `P*P - M`.
    pub residual: T,
}

/// Cholesky factor of the coefficient matrix of
/// `q(z)conj(q(w))(1 - (1 - z conj w) K_w(z))`.
pub fn schur_extract<T: Real>(model: &KernelModel<T>) -> Result<SchurExtraction<T>> {
    let n = model.measure.len();
    let size = n + 2;
    let qq = bivariate(&[(&model.q, &model.q)], size);
    let s = qq.sub(&kernel_numerator(model));
    let scale = s.max_abs().max(qq.max_abs());
    let edge_tol = T::tol(1e-9) * scale;
    for k in 0..size {
        if s[(0, k)].norm() > edge_tol || s[(k, 0)].norm() > edge_tol {
            return Err(Error::NotPsd {
                min_eig: -s[(0, k)]
                    .norm()
                    .max(s[(k, 0)].norm())
                    .to_f64()
                    .unwrap_or(f64::NAN),
                scale: scale.to_f64().unwrap_or(f64::NAN),
            });
        }
        // degree beyond n cannot appear
        if s[(size - 1, k)].norm() > edge_tol || s[(k, size - 1)].norm() > edge_tol {
            return Err(Error::RankDeficient {
                rank: n + 1,
                expected: n,
            });
        }
    }
    let raw = CMatrix::from_fn(n, n, |i, j| s[(j + 1, i + 1)]);
    if raw.hermitian_defect() > T::tol(1e-9) * scale {
        return Err(Error::NotPsd {
            min_eig: f64::NAN,
            scale: scale.to_f64().unwrap_or(f64::NAN),
        });
    }
    let m = raw.hermitian_part();
    let ev = hermitian_eigenvalues(&m);
    let norm = ev.iter().fold(T::zero(), |a, e| a.max(e.abs()));
    let min_eigenvalue = ev[0];
    if min_eigenvalue < -T::tol(1e-8) * norm {
        return Err(Error::NotPsd {
            min_eig: min_eigenvalue.to_f64().unwrap_or(f64::NAN),
            scale: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    let chol = pivoted_cholesky(&m, T::tol(1e-10) * m.trace().re);
    if chol.rank < n {
        return Err(Error::RankDeficient {
            rank: chol.rank,
            expected: n,
        });
    }
    let residual = chol
        .factor
        .conj_transpose()
        .matmul(&chol.factor)
        .sub(&m)
        .max_abs();
    let numerators = (0..chol.rank)
        .map(|i| {
            let mut c = vec![C::zero(); n + 1];
            for a in 0..n {
                c[a + 1] = chol.factor[(i, a)];
            }
            ComplexPoly::new(c)
        })
        .collect();
    Ok(SchurExtraction {
        numerators,
        psd: m,
        rank: chol.rank,
        min_eigenvalue,
        residual,
    })
}

/// `⟨B(z), B(w)⟩ = Σ pᵢ(z) conj(pᵢ(w)) / (q(z) conj(q(w)))`.
pub fn schur_pairing<T: Real>(model: &KernelModel<T>, z: C<T>, w: C<T>) -> C<T> {
    let num = model
        .schur_numerators
        .iter()
        .fold(C::<T>::zero(), |acc, p| acc + p.eval(z) * p.eval(w).conj());
    num / (model.q.eval(z) * model.q.eval(w).conj())
}

/// `b = γz/(1 - βz)` read off a one-atom model.
pub fn degree_one_parameters<T: Real>(model: &KernelModel<T>) -> Option<(C<T>, C<T>)> {
    if model.schur_numerators.len() != 1 || model.q.degree() > 1 {
        return None;
    }
    let q0 = model.q.coeff(0);
    let gamma = model.schur_numerators[0].coeff(1) / q0;
    let beta = -model.q.coeff(1) / q0;
    Some((gamma, beta))
}

/// Worst residuals of the identities a built model must satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport<T: Real> {
    pub trials: usize,
    /// `max |⟨fⱼ, K_{λᵢ}⟩ - δᵢⱼ|`.
    pub dual_basis: T,
    /// `max |⟨f, K_w⟩ - f(w)|` over random polynomials `f` and points `w`.
    pub reproducing: T,
    /// `max |K_w(z) - conj(K_z(w))|`.
    pub hermitian: T,
    /// `max ‖B(z)‖²` on a disk grid.
    pub schur_bound: T,
    /// `max | |a|² + ‖B‖² - 1 |` on the circle.
    pub mate_identity: T,
    /// `max |⟨B(z),B(w)⟩ - (1 - (1 - z conj w) K_w(z))|`.
    pub schur_kernel: T,
    /// `max | |q|² - R |` on the circle.
    pub factorization: T,
}

impl<T: Real> ModelReport<T> {
    /// True when every residual is within `tol` and `‖B‖ ≤ 1 + tol`.
    pub fn passes(&self, tol: T) -> bool {
        self.dual_basis <= tol
            && self.reproducing <= tol
            && self.hermitian <= tol
            && self.schur_bound <= T::one() + tol
            && self.mate_identity <= tol
            && self.schur_kernel <= tol
            && self.factorization <= tol
    }
}

fn random_disk_point<T: Real>(rng: &mut ChaCha8Rng, radius: f64) -> C<T> {
    let r = radius * rng.random::<f64>().sqrt();
    let t = std::f64::consts::TAU * rng.random::<f64>();
    C::new(T::c(r * t.cos()), T::c(r * t.sin()))
}

/// Spot checks with `trials` random points, reproducible from `seed`.
pub fn verify_model<T: Real>(
    model: &KernelModel<T>,
    trials: usize,
    seed: u64,
) -> Result<ModelReport<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = &model.measure;
    let one = cr(T::one());

    let mut dual_basis = T::zero();
    for (i, k) in model.atom_kernels.iter().enumerate() {
        for (j, f) in model.dual_basis.iter().enumerate() {
            let target = if i == j { one } else { C::zero() };
            dual_basis = dual_basis.max((dmu_inner(f, k, mu)? - target).norm());
        }
    }

    let mut reproducing = T::zero();
    let mut hermitian = T::zero();
    let mut schur_kernel = T::zero();
    for t in 0..trials {
        let w = random_disk_point::<T>(&mut rng, 0.9);
        let z = random_disk_point::<T>(&mut rng, 0.9);
        let deg = rng.random_range(0..=6usize);
        let f = ComplexPoly::new(
            (0..=deg)
                .map(|_| {
                    C::new(
                        T::c(rng.random_range(-1.0..1.0)),
                        T::c(rng.random_range(-1.0..1.0)),
                    )
                })
                .collect(),
        );
        // the inner products are the costly part; sample them on a subset
        if t < 20.min(trials) {
            let kw = kernel_function(model, w)?;
            let lhs = dmu_inner(&StableRational::polynomial(f.clone()), &kw, mu)?;
            reproducing = reproducing.max((lhs - f.eval(w)).norm());
        }
        let kzw = kernel_eval(model, z, w)?;
        let kwz = kernel_eval(model, w, z)?;
        hermitian = hermitian.max((kzw - kwz.conj()).norm());
        let expect = one - (one - z * w.conj()) * kzw;
        schur_kernel = schur_kernel.max((schur_pairing(model, z, w) - expect).norm());
    }

    let mut schur_bound = T::zero();
    for z in disk_grid::<T>(T::c(0.999), 12, 24) {
        schur_bound = schur_bound.max(schur_pairing(model, z, z).re);
    }
    let r = laurent_modulus_product(mu.atoms(), mu.weights())?;
    let mut mate_identity = T::zero();
    let mut factorization = T::zero();
    for z in circle_grid::<T>(256) {
        let total = model.mate.eval(z).norm_sqr() + schur_pairing(model, z, z).re;
        mate_identity = mate_identity.max((total - T::one()).abs());
        factorization = factorization.max((model.q.eval(z).norm_sqr() - r.eval_circle(z)).abs());
    }
    Ok(ModelReport {
        trials,
        dual_basis,
        reproducing,
        hermitian,
        schur_bound,
        mate_identity,
        schur_kernel,
        factorization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn example() -> KernelModel<f64> {
        let mu = AtomicMeasure::new(vec![cf(1.0, 0.0), cf(0.0, 0.0)], vec![1.0, 1.0]).unwrap();
        build_model(&mu).unwrap()
    }

    #[test]
    fn two_atom_model_matches_closed_forms() {
        let m = example();
        assert!((m.q.coeff(0) - cf(2.0, 0.0)).norm() < 1e-12);
        assert!((m.q.coeff(1) - cf(-1.0, 0.0)).norm() < 1e-12);
        let k1 = &m.atom_kernels[0];
        assert!((k1.num().coeff(0) - cf(2.0, 0.0)).norm() < 1e-12);
        assert!((k1.num().coeff(1) - cf(-0.5, 0.0)).norm() < 1e-12);
        let k0 = &m.atom_kernels[1];
        for z in [cf(0.1, 0.2), cf(-0.5, 0.3)] {
            assert!((k0.eval(z) - cf(1.0, 0.0)).norm() < 1e-12);
        }
        let (z, w) = (cf(0.3, 0.0), cf(0.0, 0.2));
        let zw = z * w.conj();
        let one = cf(1.0, 0.0);
        let closed = (one
            - zw * (zw * 0.5 - z - w.conj() + cf(2.5, 0.0))
                / ((cf(2.0, 0.0) - z) * (cf(2.0, 0.0) - w.conj())))
            / (one - zw);
        assert!((kernel_eval(&m, z, w).unwrap() - closed).norm() < 1e-12);
    }

    #[test]
    fn origin_atom_model() {
        let mu = AtomicMeasure::point_mass(cf(0.0, 0.0), 1.0).unwrap();
        let m = build_model(&mu).unwrap();
        assert!((m.q.coeff(0).re - 2f64.sqrt()).abs() < 1e-14);
        let (z, w) = (cf(0.4, -0.1), cf(0.2, 0.6));
        let zw = z * w.conj();
        let expect = (cf(2.0, 0.0) - zw) / ((cf(1.0, 0.0) - zw) * 2.0);
        assert!((kernel_eval(&m, z, w).unwrap() - expect).norm() < 1e-13);
        let p = &m.schur_numerators[0];
        assert!((p.coeff(1) - cf(1.0, 0.0)).norm() < 1e-12);
        let (gamma, beta) = degree_one_parameters(&m).unwrap();
        assert!((gamma.norm() - 0.5f64.sqrt()).abs() < 1e-12 && beta.norm() < 1e-14);
    }

    #[test]
    fn kernel_at_origin_is_one() {
        let m = example();
        for z in [cf(0.7, 0.1), cf(-0.2, -0.3)] {
            assert!((kernel_eval(&m, z, C::zero()).unwrap() - cf(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn example_report_is_clean() {
        let rep = verify_model(&example(), 100, 7).unwrap();
        assert!(rep.passes(1e-9), "{rep:?}");
    }

    #[test]
    fn outside_disk_rejected() {
        assert!(kernel_eval(&example(), cf(1.0, 0.0), C::zero()).is_err());
    }
}
