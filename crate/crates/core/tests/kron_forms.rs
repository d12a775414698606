use num_complex::Complex;
use tfrechet::frechet::{tfrechet_bcirc, FrechetOptions, Method};
use tfrechet::kron::{
    bcirc_of_unit, column_relation_check, kron_bcirc, kron_efficient, kron_full, unit_tensor, BcircFrechet,
    KronOptions, MatrixRoute,
};
use tfrechet::linalg::relative_distance;
use tfrechet::random::{random_complex_tensor, random_tensor, seeded};
use tfrechet::{shift_apply, CMatrix, Error, ScalarFunction, Tensor3};

type T3 = Tensor3<f64>;
type F = ScalarFunction<f64>;

fn max_entry_diff(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn is_circulant(k: &CMatrix<f64>, tol: f64) -> bool {
    let p = k.nrows();
    (0..p).all(|r| (0..p).all(|c| (k[(r, c)] - k[((r + p - c) % p, 0)]).norm() <= tol))
}

#[test]
fn unit_tensor_cases() {
    let e = unit_tensor::<f64>(0, 0, 0, 2, 3).unwrap();
    assert_eq!(e.get(0, 0, 0), Complex::new(1.0, 0.0));
    assert_eq!(e.frobenius_norm(), 1.0);
    let mut total = T3::zeros(2, 2, 3);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..3 {
                let u = unit_tensor::<f64>(i, j, k, 2, 3).unwrap();
                assert_eq!(u.frobenius_norm(), 1.0);
                total = &total + &u;
            }
        }
    }
    assert!(total.vec().iter().all(|z| *z == Complex::new(1.0, 0.0)));
    assert!(matches!(unit_tensor::<f64>(2, 0, 0, 2, 3), Err(Error::IndexOutOfRange(_))));
}

#[test]
fn bcirc_of_unit_matches_bcirc_exhaustively() {
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..3 {
                let via_shifts = bcirc_of_unit::<f64>(i, j, k, 2, 3).unwrap();
                assert_eq!(via_shifts, unit_tensor::<f64>(i, j, k, 2, 3).unwrap().bcirc());
                assert_eq!(via_shifts.iter().filter(|z| z.norm() != 0.0).count(), 3);
            }
        }
    }
    let single = bcirc_of_unit::<f64>(1, 0, 0, 2, 1).unwrap();
    let mut e = CMatrix::<f64>::zeros(2, 2);
    e[(1, 0)] = Complex::new(1.0, 0.0);
    assert_eq!(single, e);
}

#[test]
fn kron_full_of_identity_function_is_identity() {
    let a: T3 = random_complex_tensor(2, 2, 3, &mut seeded(1));
    let k = kron_full(&a, &F::identity(), Method::Dft, &KronOptions::default()).unwrap();
    assert_eq!(k.solver_calls, 12);
    assert!(max_entry_diff(&k.matrix, &CMatrix::identity(12, 12)) <= 1e-14);
}

#[test]
fn tubal_kronecker_form_is_circulant() {
    let a: T3 = random_tensor(1, 1, 5, &mut seeded(2));
    let k = kron_full(&a, &F::Exp, Method::Dft, &KronOptions::default()).unwrap();
    assert!(is_circulant(&k.matrix, 1e-13));
}

#[test]
fn kron_action_matches_solver() {
    let mut rng = seeded(3);
    let a: T3 = random_complex_tensor(2, 2, 2, &mut rng);
    let k = kron_full(&a, &F::Exp, Method::Dft, &KronOptions::default()).unwrap();
    for _ in 0..10 {
        let c: T3 = random_complex_tensor(2, 2, 2, &mut rng);
        let via_k = k.apply(&c).unwrap();
        let direct = tfrechet_bcirc(&a, &c, &F::Exp, &FrechetOptions::default()).unwrap().value;
        assert!(relative_distance(via_k.unfolded(), direct.unfolded()) <= 1e-11);
    }
}

#[test]
fn efficient_construction_matches_brute_force() {
    let a: T3 = random_complex_tensor(2, 2, 3, &mut seeded(4));
    let opts = KronOptions::default();
    let full = kron_full(&a, &F::Exp, Method::Bcirc, &opts).unwrap();
    for route in [MatrixRoute::Dense, MatrixRoute::Fourier] {
        let eff = kron_efficient(&a, &F::Exp, route, &opts).unwrap();
        assert_eq!(eff.solver_calls, 4);
        assert!(max_entry_diff(&full.matrix, &eff.matrix) <= 1e-12, "{route:?}");
    }
    let id = kron_efficient(&a, &F::identity(), MatrixRoute::Fourier, &opts).unwrap();
    assert!(max_entry_diff(&id.matrix, &CMatrix::identity(12, 12)) <= 1e-14);
}

#[test]
fn caps_are_enforced() {
    let a: T3 = random_tensor(4, 4, 3, &mut seeded(5));
    let tight = KronOptions { cap: 40, bcirc_cap: 100, ..KronOptions::default() };
    assert!(matches!(kron_full(&a, &F::Exp, Method::Dft, &tight), Err(Error::DenseLimit { .. })));
    assert!(matches!(kron_efficient(&a, &F::Exp, MatrixRoute::Fourier, &tight), Err(Error::DenseLimit { .. })));
    assert!(matches!(kron_bcirc(&a, &F::Exp, &tight), Err(Error::DenseLimit { .. })));
}

#[test]
fn column_relation_holds() {
    let opts = KronOptions::default();
    let a: T3 = random_complex_tensor(2, 2, 3, &mut seeded(6));
    let report = column_relation_check(&a, &F::Exp, &opts).unwrap();
    assert_eq!(report.per_column.len(), 12);
    assert!(report.holds(1e-12), "{}", report.max_deviation);

    let single: T3 = random_complex_tensor(2, 2, 1, &mut seeded(7));
    let k1 = kron_full(&single, &F::Exp, Method::Bcirc, &opts).unwrap().matrix;
    let k2 = kron_bcirc(&single, &F::Exp, &opts).unwrap();
    assert!(max_entry_diff(&k1, &k2) <= 1e-14);

    let tubal: T3 = random_tensor(1, 1, 4, &mut seeded(8));
    assert!(column_relation_check(&tubal, &F::Exp, &opts).unwrap().holds(1e-12));
    let k = kron_full(&tubal, &F::Exp, Method::Dft, &opts).unwrap();
    assert!(is_circulant(&k.matrix, 1e-13));
}

#[test]
fn matrix_level_derivative_commutes_with_shifts() {
    let a: T3 = random_complex_tensor(2, 2, 3, &mut seeded(9));
    let dense = BcircFrechet::new(&a, &F::Exp, MatrixRoute::Dense).unwrap();
    let fourier = BcircFrechet::new(&a, &F::Exp, MatrixRoute::Fourier).unwrap();
    let mut e = CMatrix::<f64>::zeros(6, 6);
    e[(3, 4)] = Complex::new(1.0, 0.0);
    let base = dense.apply(&e).unwrap();
    for (l1, l2) in [(1, 0), (0, 2), (2, 1), (-1, 1)] {
        let shifted = shift_apply(&e, l1, l2, 2).unwrap();
        let lhs = dense.apply(&shifted).unwrap();
        let rhs = shift_apply(&base, l1, l2, 2).unwrap();
        assert!(relative_distance(&lhs, &rhs) <= 1e-12);
        assert!(relative_distance(&fourier.apply(&shifted).unwrap(), &lhs) <= 1e-12);
    }
}
