//! Simultaneous root finding (Aberth–Ehrlich) with a companion-matrix fallback.

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use super::ComplexPoly;
use crate::error::{Error, Result};
use crate::linalg::{hessenberg_eigenvalues, CMatrix};
use crate::scalar::{arg_positive, cr, Real, C};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    pub max_iter: usize,
    /// Accepted value of `|p(r)| / (|lead|·max(1,|r|)^deg)`.
    pub tol: T,
}

impl<T: Real> Default for RootOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: T::tol(1e-9),
        }
    }
}

/// Roots with multiplicity, sorted by modulus then argument in `[0, 2π)`.
#[derive(Debug, Clone, Serialize)]
pub struct RootSet<T: Real> {
    pub roots: Vec<C<T>>,
    /// Largest scaled residual `|p(r)| / (|lead|·max(1,|r|)^deg)`.
    pub residual: T,
}

pub fn poly_roots<T: Real>(p: &ComplexPoly<T>) -> Result<RootSet<T>> {
    poly_roots_with(p, &RootOptions::default())
}

pub fn poly_roots_with<T: Real>(p: &ComplexPoly<T>, opts: &RootOptions<T>) -> Result<RootSet<T>> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::InvalidArgument(
            "root finding needs a polynomial of degree at least 1".into(),
        ));
    }
    let n = p.degree();
    // exact zero roots come off first
    let zeros = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = ComplexPoly::new(p.coeffs()[zeros..].to_vec());

    let mut roots = vec![C::zero(); zeros];
    if reduced.degree() > 0 {
        let mut found = aberth(&reduced, opts.max_iter);
        polish(&reduced, &mut found);
        if scaled_residual(&reduced, &found) > opts.tol {
            let mut alt = companion_roots(&reduced)?;
            polish(&reduced, &mut alt);
            if scaled_residual(&reduced, &alt) < scaled_residual(&reduced, &found) {
                found = alt;
            }
        }
        roots.extend(found);
    }
    let residual = scaled_residual(p, &roots);
    if !(residual <= opts.tol) {
        return Err(Error::RootNonConvergence {
            degree: n,
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    roots.sort_by(|a, b| {
        a.norm()
            .partial_cmp(&b.norm())
            .unwrap()
            .then(arg_positive(*a).partial_cmp(&arg_positive(*b)).unwrap())
    });
    Ok(RootSet { roots, residual })
}

fn scaled_residual<T: Real>(p: &ComplexPoly<T>, roots: &[C<T>]) -> T {
    let lead = p.leading().norm();
    let n = p.degree() as i32;
    roots.iter().fold(T::zero(), |m, &r| {
        let s = lead * r.norm().max(T::one()).powi(n);
        m.max(p.eval(r).norm() / s)
    })
}

/// `p(z)` and `p'(z)` in one Horner pass.
fn eval_with_derivative<T: Real>(p: &ComplexPoly<T>, z: C<T>) -> (C<T>, C<T>) {
    let mut v = C::zero();
    let mut d = C::zero();
    for &c in p.coeffs().iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

fn aberth<T: Real>(p: &ComplexPoly<T>, max_iter: usize) -> Vec<C<T>> {
    let n = p.degree();
    let lead = p.leading().norm();
    let c0 = p.coeff(0).norm();
    let radius = (c0 / lead).powf(T::one() / T::from_usize_lossy(n));
    let radius = if radius.is_finite() && radius > T::zero() {
        radius
    } else {
        T::one()
    };
    let offset = T::c(0.4);
    let mut z: Vec<C<T>> = (0..n)
        .map(|k| {
            let t = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(n) + offset;
            Complex::from_polar(radius, t)
        })
        .collect();
    let mut done = vec![false; n];
    let eps = T::epsilon();
    for _ in 0..max_iter {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, d) = eval_with_derivative(p, z[k]);
            if v.is_zero() {
                done[k] = true;
                continue;
            }
            let ratio = v / d;
            let mut sum = C::zero();
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if !diff.is_zero() {
                        sum += cr(T::one()) / diff;
                    }
                }
            }
            let denom = cr(T::one()) - ratio * sum;
            let step = if denom.is_zero() || !d.norm().is_finite() || d.is_zero() {
                // nudge off a critical point
                Complex::from_polar(
                    eps.sqrt() * (T::one() + z[k].norm()),
                    T::from_usize_lossy(k),
                )
            } else {
                ratio / denom
            };
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[k] -= step;
            if step.norm() <= T::c(4.0) * eps * z[k].norm().max(T::one()) {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    z
}

/// A few Newton steps per root, kept only while the residual improves.
fn polish<T: Real>(p: &ComplexPoly<T>, roots: &mut [C<T>]) {
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (v, d) = eval_with_derivative(p, *r);
            if v.is_zero() || d.is_zero() {
                break;
            }
            let cand = *r - v / d;
            if !(cand.re.is_finite() && cand.im.is_finite()) || p.eval(cand).norm() >= v.norm() {
                break;
            }
            *r = cand;
        }
    }
}

fn companion_roots<T: Real>(p: &ComplexPoly<T>) -> Result<Vec<C<T>>> {
    let n = p.degree();
    let lead = p.leading();
    let mut h = CMatrix::zeros(n, n);
    for j in 0..n {
        h[(0, j)] = -p.coeff(n - 1 - j) / lead;
    }
    for i in 1..n {
        h[(i, i - 1)] = cr(T::one());
    }
    hessenberg_eigenvalues(&h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cf;

    fn poly(c: &[f64]) -> ComplexPoly<f64> {
        ComplexPoly::from_real(c)
    }

    #[test]
    fn double_root() {
        let rs = poly_roots(&poly(&[1.0, -2.0, 1.0])).unwrap();
        assert_eq!(rs.roots.len(), 2);
        for r in &rs.roots {
            assert!((r - cf::<f64>(1.0, 0.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn linear_root() {
        let rs = poly_roots(&poly(&[2.0, -1.0])).unwrap();
        assert!((rs.roots[0] - cf::<f64>(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cube_roots_of_unity_are_ordered() {
        let rs = poly_roots(&poly(&[-1.0, 0.0, 0.0, 1.0])).unwrap();
        let expect = [0.0, 2.0 / 3.0, 4.0 / 3.0];
        for (r, t) in rs.roots.iter().zip(expect) {
            let e = Complex::from_polar(1.0, t * std::f64::consts::PI);
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn zero_roots_are_exact() {
        let rs = poly_roots(&poly(&[0.0, 0.0, 3.0, 1.0])).unwrap();
        assert_eq!(rs.roots[0], C::zero());
        assert_eq!(rs.roots[1], C::zero());
        assert!((rs.roots[2] + cf::<f64>(3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn constant_rejected() {
        assert!(poly_roots(&poly(&[3.0])).is_err());
    }

    #[test]
    fn companion_fallback_agrees() {
        let p = ComplexPoly::from_roots(&[
            cf::<f64>(0.5, 0.1),
            cf(-2.0, 1.0),
            cf(0.0, 3.0),
            cf(1.5, -0.5),
        ]);
        let mut a = companion_roots(&p).unwrap();
        polish(&p, &mut a);
        assert!(scaled_residual(&p, &a) < 1e-12);
    }

    #[test]
    fn wilkinson_like_degree_twenty() {
        let rts: Vec<C<f64>> = (1..=20).map(|k| cf(k as f64 / 10.0, 0.0)).collect();
        let p = ComplexPoly::from_roots(&rts);
        let rs = poly_roots(&p).unwrap();
        assert_eq!(rs.roots.len(), 20);
        assert!(rs.residual < 1e-9);
    }

    #[test]
    fn works_in_single_precision() {
        let p = ComplexPoly::<f32>::from_real(&[2.0, -3.0, 1.0]);
        let rs = poly_roots(&p).unwrap();
        assert!((rs.roots[0].re - 1.0).abs() < 1e-3 && (rs.roots[1].re - 2.0).abs() < 1e-3);
    }
}
