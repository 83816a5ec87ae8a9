mod common;

use common::bessel_series;
use hofm_core::bessel::{bessel_j, bessel_row};
use proptest::prelude::*;

/// Dyadic arguments `(num, log2 den)` covering (0, 16].
const ARGS: &[(i64, u32)] = &[
    (1, 3),
    (1, 1),
    (3, 2),
    (1, 0),
    (2, 0),
    (5, 1),
    (3, 0),
    (4, 0),
    (23, 2),
    (8, 0),
    (25, 1),
    (12, 0),
    (61, 2),
    (16, 0),
];

#[test]
fn oracle_spot_values() {
    assert!((bessel_series(1, 2, 0) - 0.576_724_807_756_873).abs() < 1e-15);
    assert!((bessel_series(0, 2, 0) - 0.223_890_779_141_235_7).abs() < 1e-15);
    assert!((bessel_series(-1, 2, 0) + 0.576_724_807_756_873).abs() < 1e-15);
}

#[test]
fn matches_exact_series() {
    let mut worst = (0.0f64, 0, 0.0);
    for &(num, den) in ARGS {
        let z = num as f64 / f64::from(1u32 << den);
        for n in -32..=32 {
            let err = (bessel_j(n, z) - bessel_series(n, num, den)).abs();
            if err > worst.0 {
                worst = (err, n, z);
            }
        }
    }
    assert!(worst.0 <= 1e-12, "worst error {:e} at n={} z={}", worst.0, worst.1, worst.2);
}

#[test]
fn row_matches_pointwise() {
    let row = bessel_row(8, 2.0);
    assert_eq!(row.len(), 9);
    for (n, v) in row.iter().enumerate() {
        assert!((v - bessel_series(n as i64, 2, 0)).abs() < 1e-14, "J_{n}(2)");
    }
}

#[test]
fn normalization_identity() {
    for z in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let row = bessel_row((z as usize) + 20, z);
        let s = row[0] * row[0] + 2.0 * row[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((s - 1.0).abs() <= 1e-10, "z={z}: {s}");
    }
}

#[test]
fn three_term_recurrence() {
    for i in 0..=62 {
        let z = 0.5 + 0.25 * i as f64;
        for n in 1..40 {
            let lhs = bessel_j(n - 1, z) + bessel_j(n + 1, z);
            let rhs = 2.0 * n as f64 / z * bessel_j(n, z);
            assert!((lhs - rhs).abs() <= 1e-9, "n={n} z={z}: {lhs} vs {rhs}");
        }
    }
}

proptest! {
    #[test]
    fn parity_is_exact(n in 0i64..60, z in 0.0f64..40.0) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(bessel_j(-n, z), sign * bessel_j(n, z));
    }

    #[test]
    fn negative_argument_parity(n in 0i64..30, z in 0.01f64..20.0) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((bessel_j(n, -z) - sign * bessel_j(n, z)).abs() < 1e-15);
    }

    #[test]
    fn squares_sum_to_one(z in 0.0f64..50.0) {
        let row = bessel_row(z.ceil() as usize + 25, z);
        let s = row[0] * row[0] + 2.0 * row[1..].iter().map(|v| v * v).sum::<f64>();
        prop_assert!((s - 1.0).abs() <= 1e-10, "z={} sum={}", z, s);
    }

    #[test]
    fn bounded_by_one(n in -80i64..80, z in 0.0f64..100.0) {
        prop_assert!(bessel_j(n, z).abs() <= 1.0);
    }

    #[test]
    fn row_agrees_with_single_values(z in 0.0f64..30.0, order in 0usize..40) {
        let row = bessel_row(order, z);
        for (n, v) in row.iter().enumerate() {
            prop_assert!((v - bessel_j(n as i64, z)).abs() < 1e-13);
        }
    }
}
