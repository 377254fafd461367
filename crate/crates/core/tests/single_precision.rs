//! The pipelines are generic over the scalar; f32 runs with scaled tolerances.

use dbr_core::hardy::AtomicMeasure;
use dbr_core::kernel::{build_model, kernel_eval};
use dbr_core::poly::ComplexPoly;
use dbr_core::tuples::{rank_one_tuple, vecmu_norm, CirclePoint};
use dbr_core::C;

#[test]
fn two_point_model_in_f32() {
    let mu = AtomicMeasure::<f32>::new(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)], vec![1.0, 1.0])
        .unwrap();
    let m = build_model(&mu).unwrap();
    assert!((m.q.coeff(0).re - 2.0).abs() < 1e-4);
    assert!((m.q.coeff(1).re + 1.0).abs() < 1e-4);
    assert!((m.gram[(0, 1)].re + 2.0).abs() < 1e-3);
    let (z, w) = (C::new(0.2f32, 0.1), C::new(-0.3f32, 0.4));
    let k = kernel_eval(&m, z, w).unwrap();
    let k64 = {
        let mu =
            AtomicMeasure::<f64>::new(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)], vec![1.0, 1.0])
                .unwrap();
        kernel_eval(
            &build_model(&mu).unwrap(),
            C::new(0.2, 0.1),
            C::new(-0.3, 0.4),
        )
        .unwrap()
    };
    assert!(((k.re as f64) - k64.re).abs() < 1e-4);
}

#[test]
fn tuple_norm_in_f32() {
    let t = rank_one_tuple(
        CirclePoint::<f32>::one(),
        &ComplexPoly::from_real(&[0.0, 1.0]),
        2,
    )
    .unwrap();
    let f = ComplexPoly::from_real(&[1.0f32, 1.0, 1.0]);
    // ‖f‖² = 3, plus 2·|f'(1) coefficient terms| from the tuple
    let n = vecmu_norm(&t, &f).unwrap();
    let n64 = vecmu_norm(
        &rank_one_tuple(
            CirclePoint::<f64>::one(),
            &ComplexPoly::from_real(&[0.0, 1.0]),
            2,
        )
        .unwrap(),
        &ComplexPoly::from_real(&[1.0, 1.0, 1.0]),
    )
    .unwrap();
    assert!(((n as f64) - n64).abs() < 1e-4 * n64);
}
