//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count or index.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Rescales a tolerance stated for double precision so that it keeps
    /// the same share of this type's significant digits: `1e-10` asks for
    /// about 10 of 16 digits in `f64` and about 4 of 7 in `f32`. Identity for `f64`.
    #[inline]
    fn tol(x: f64) -> Self {
        let eps = Self::epsilon().to_f64().unwrap_or(f64::EPSILON);
        let power = eps.ln() / f64::EPSILON.ln();
        Self::c(x.powf(power).min(0.5))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[cfg(test)]
#[inline]
pub(crate) fn cf<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::c(re), T::c(im))
}

/// Argument mapped to `[0, 2π)`.
#[inline]
pub(crate) fn arg_positive<T: Real>(z: C<T>) -> T {
    let a = z.arg();
    if a < T::zero() {
        a + T::TAU()
    } else {
        a
    }
}

/// Points `e^{2πij/count}` on the unit circle.
pub fn circle_grid<T: Real>(count: usize) -> Vec<C<T>> {
    (0..count)
        .map(|j| {
            let t = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(count);
            Complex::new(t.cos(), t.sin())
        })
        .collect()
}

/// Polar grid inside the disk of the given radius: `rings × spokes` points.
pub fn disk_grid<T: Real>(radius: T, rings: usize, spokes: usize) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(rings * spokes + 1);
    out.push(cr(T::zero()));
    for r in 1..=rings {
        let rho = radius * T::from_usize_lossy(r) / T::from_usize_lossy(rings);
        for s in 0..spokes {
            let t = T::TAU() * (T::from_usize_lossy(s) + T::c(0.5) * T::from_usize_lossy(r % 2))
                / T::from_usize_lossy(spokes);
            out.push(Complex::from_polar(rho, t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_scales_with_precision() {
        assert_eq!(f64::tol(1e-10), 1e-10);
        let t32 = f32::tol(1e-10);
        assert!(t32 > 1e-6 && t32 < 1e-3);
        assert!(f32::tol(1e-15) < f32::tol(1e-9));
    }

    #[test]
    fn positive_argument() {
        assert!(
            (arg_positive(Complex::new(0.0f64, -1.0)) - 1.5 * std::f64::consts::PI).abs() < 1e-15
        );
        assert_eq!(arg_positive(Complex::new(1.0f64, 0.0)), 0.0);
    }
}
