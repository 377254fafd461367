//! Randomized invariants, 200 instances each, from fixed seeds.

use dbr_core::defect::{defect_form, Atomic, InnerProduct};
use dbr_core::hardy::{dmu_inner, dmu_inner_poly, h2_inner, h2_inner_truncated, shift_increment};
use dbr_core::kernel::{build_model, kernel_eval, kernel_function, schur_pairing};
use dbr_core::poly::{fejer_riesz, laurent_modulus_product, poly_roots};
use dbr_core::tuples::{multi_tuple, vecmu_inner, AtomSpec, CirclePoint};
use dbr_core::{Complex64, Measure, Poly, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 200;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coeff(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

fn poly(r: &mut ChaCha8Rng, max_degree: usize) -> Poly {
    let d = r.random_range(0..=max_degree);
    Poly::new((0..=d).map(|_| coeff(r)).collect())
}

fn disk(r: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(
        radius * r.random::<f64>().sqrt(),
        std::f64::consts::TAU * r.random::<f64>(),
    )
}

fn measure(r: &mut ChaCha8Rng) -> Measure {
    let n = r.random_range(1..=3);
    let mut atoms: Vec<Complex64> = Vec::new();
    while atoms.len() < n {
        let a = if r.random_bool(0.5) {
            Complex64::from_polar(1.0, std::f64::consts::TAU * r.random::<f64>())
        } else {
            disk(r, 0.9)
        };
        if atoms.iter().all(|b| (a - b).norm() > 0.2) {
            atoms.push(a);
        }
    }
    let w = (0..n).map(|_| r.random_range(0.2..3.0)).collect();
    Measure::new(atoms, w).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

#[test]
fn roots_have_small_residual() {
    let mut r = rng(1);
    for _ in 0..CASES {
        let mut p = poly(&mut r, 12);
        if p.degree() == 0 {
            p = p.shift_up(1);
        }
        let set = poly_roots(&p).unwrap();
        assert_eq!(set.roots.len(), p.degree());
        assert!(set.residual < 1e-9, "residual {}", set.residual);
        // the roots rebuild the polynomial
        let rebuilt = Poly::from_roots(&set.roots).scale(p.leading());
        for z in [c(0.3, 0.1), c(-0.7, 0.5), c(1.0, 0.0)] {
            assert!(rel(rebuilt.eval(z), p.eval(z)) < 1e-7);
        }
    }
}

#[test]
fn spectral_factor_reproduces_modulus() {
    let mut r = rng(2);
    for _ in 0..CASES {
        let mu = measure(&mut r);
        let lp = laurent_modulus_product(mu.atoms(), mu.weights()).unwrap();
        let fr = fejer_riesz(&lp).unwrap();
        assert!(fr.q.coeff(0).re > 0.0 && fr.q.coeff(0).im.abs() < 1e-12);
        assert!(fr.min_root_modulus > 1.0);
        for k in 0..64 {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 64.0 + 0.01);
            let want = lp.eval_circle(z);
            assert!((fr.q.eval(z).norm_sqr() - want).abs() < 1e-9 * want.max(1.0));
        }
    }
}

#[test]
fn dmu_inner_is_hermitian_and_sesquilinear() {
    let mut r = rng(3);
    for _ in 0..CASES {
        let mu = measure(&mut r);
        let (f, g, h) = (poly(&mut r, 6), poly(&mut r, 6), poly(&mut r, 6));
        let (a, b) = (coeff(&mut r), coeff(&mut r));
        let fg = dmu_inner_poly(&f, &g, &mu).unwrap();
        assert!(rel(fg, dmu_inner_poly(&g, &f, &mu).unwrap().conj()) < 1e-12);
        let combo = &f.scale(a) + &g.scale(b);
        let lhs = dmu_inner_poly(&combo, &h, &mu).unwrap();
        let rhs =
            dmu_inner_poly(&f, &h, &mu).unwrap() * a + dmu_inner_poly(&g, &h, &mu).unwrap() * b;
        assert!(rel(lhs, rhs) < 1e-12);
        let right = dmu_inner_poly(&h, &combo, &mu).unwrap();
        let right_want = dmu_inner_poly(&h, &f, &mu).unwrap() * a.conj()
            + dmu_inner_poly(&h, &g, &mu).unwrap() * b.conj();
        assert!(rel(right, right_want) < 1e-12);
        assert!(dmu_inner_poly(&f, &f, &mu).unwrap().re >= -1e-14);
    }
}

#[test]
fn shift_adds_point_evaluations() {
    let mut r = rng(4);
    for _ in 0..CASES {
        let mu = measure(&mut r);
        let f = poly(&mut r, 8);
        let norm = |p: &Poly| dmu_inner_poly(p, p, &mu).unwrap().re;
        let step = norm(&f.shift_up(1)) - norm(&f);
        let inc = shift_increment(&Rational::polynomial(f.clone()), &mu);
        assert!((step - inc).abs() < 1e-10 * norm(&f).max(1.0));
    }
}

#[test]
fn rational_h2_inner_matches_long_truncation() {
    let mut r = rng(5);
    for _ in 0..CASES {
        let roots: Vec<Complex64> = (0..r.random_range(1..=3))
            .map(|_| {
                Complex64::from_polar(
                    r.random_range(1.3..3.0),
                    std::f64::consts::TAU * r.random::<f64>(),
                )
            })
            .collect();
        let den = Poly::from_roots(&roots);
        let f = Rational::new(poly(&mut r, 3), den.clone()).unwrap();
        let g = Rational::new(poly(&mut r, 3), den).unwrap();
        let v = h2_inner(&f, &g).unwrap();
        let long = h2_inner_truncated(&f, &g, 400);
        assert!(rel(v, long) < 1e-10);
    }
}

#[test]
fn kernel_reproduces_and_is_hermitian() {
    let mut r = rng(6);
    for _ in 0..CASES {
        let mu = measure(&mut r);
        let model = build_model(&mu).unwrap();
        let (z, w) = (disk(&mut r, 0.95), disk(&mut r, 0.95));
        let f = poly(&mut r, 5);
        let kw = kernel_function(&model, w).unwrap();
        let lhs = dmu_inner(&Rational::polynomial(f.clone()), &kw, &mu).unwrap();
        assert!(
            rel(lhs, f.eval(w)) < 1e-9,
            "reproducing {lhs} vs {}",
            f.eval(w)
        );
        let kzw = kernel_eval(&model, z, w).unwrap();
        assert!(rel(kzw, kernel_eval(&model, w, z).unwrap().conj()) < 1e-10);
        assert!(kernel_eval(&model, z, z).unwrap().re > 0.0);
        // de Branges–Rovnyak form of the kernel
        let one = c(1.0, 0.0);
        let from_b = (one - schur_pairing(&model, z, w)) / (one - z * w.conj());
        assert!(rel(kzw, from_b) < 1e-9);
        assert!(schur_pairing(&model, z, z).re <= 1.0 + 1e-12);
    }
}

#[test]
fn defect_recursion() {
    // Δ⁽ⁿ⁺¹⁾ = T*Δ⁽ⁿ⁾T - Δ⁽ⁿ⁾
    let mut r = rng(7);
    for _ in 0..CASES {
        let ip = Atomic(measure(&mut r));
        let n = r.random_range(0..=4);
        let (p, q) = (poly(&mut r, 6), poly(&mut r, 6));
        let next = defect_form(&ip, n + 1, &p, &q).unwrap();
        let want = defect_form(&ip, n, &p.shift_up(1), &q.shift_up(1)).unwrap()
            - defect_form(&ip, n, &p, &q).unwrap();
        assert!(rel(next, want) < 1e-10);
    }
}

fn tuple_atoms(r: &mut ChaCha8Rng) -> Vec<AtomSpec<f64>> {
    let n = r.random_range(1..=2);
    let order = [3u32, 4, 6, 8][r.random_range(0..4)];
    let first = r.random_range(0..order);
    (0..n)
        .map(|j| {
            let point = CirclePoint::root_of_unity(order, first + j as u32 * (order / 2)).unwrap();
            let m = r.random_range(1..=3);
            let mut p = poly(r, m - 1);
            if p.eval(point.value()).norm() < 0.2 {
                p = &p + &Poly::one();
            }
            AtomSpec {
                point,
                m,
                polys: vec![p],
            }
        })
        .collect()
}

#[test]
fn tuple_inner_is_hermitian_and_fast_gram_agrees() {
    let mut r = rng(8);
    let mut done = 0;
    while done < CASES {
        let Ok(t) = multi_tuple(&tuple_atoms(&mut r)) else {
            continue;
        };
        let (f, g) = (poly(&mut r, 7), poly(&mut r, 7));
        let fg = vecmu_inner(&t, &f, &g).unwrap();
        assert!(rel(fg, vecmu_inner(&t, &g, &f).unwrap().conj()) < 1e-12);
        assert!(vecmu_inner(&t, &f, &f).unwrap().re > 0.0);
        if done % 10 == 0 {
            let fast = t.monomial_gram(8).unwrap();
            for a in 0..8 {
                for b in 0..8 {
                    let mono = |k| Poly::monomial(k, c(1.0, 0.0));
                    assert!(rel(fast[(a, b)], t.inner(&mono(a), &mono(b)).unwrap()) < 1e-12);
                }
            }
        }
        done += 1;
    }
}

#[test]
fn tuples_add_over_atoms() {
    let mut r = rng(9);
    let mut done = 0;
    while done < CASES {
        let atoms = tuple_atoms(&mut r);
        if atoms.len() < 2 || atoms[0].m != atoms[1].m {
            continue;
        }
        let whole = multi_tuple(&atoms).unwrap();
        let parts: Vec<_> = atoms
            .iter()
            .map(|a| multi_tuple(std::slice::from_ref(a)).unwrap())
            .collect();
        for k in -6..=6i64 {
            for i in 1..whole.len() {
                let sum = parts[0].entries[i].fourier(k) + parts[1].entries[i].fourier(k);
                assert!(rel(whole.entries[i].fourier(k), sum) < 1e-12);
            }
        }
        done += 1;
    }
}
