//! Bessel functions of the first kind, integer order.
//!
//! Small arguments use the power series directly. Otherwise the row
//! `J_0 ..= J_n` comes from Miller's downward recurrence, started well above
//! both the requested order and the argument and normalised with
//! `J_0 + 2 Σ J_2k = 1`. Upward recurrence is never used: it loses all
//! precision once the order exceeds the argument.

/// Below this argument the power series is used for every order.
const SERIES_LIMIT: f64 = 1.0;

const RESCALE_ABOVE: f64 = 1e250;

/// `J_n(z)` for any integer order and real argument.
pub fn bessel_j(n: i64, z: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_row(order, z.abs())[order];
    // J_{-n}(z) = (-1)^n J_n(z) and J_n(-z) = (-1)^n J_n(z).
    let flips = (n < 0) as u32 + (z < 0.0) as u32;
    if order % 2 == 1 && flips % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `[J_0(z), J_1(z), ..., J_max_order(z)]`.
pub fn bessel_row(max_order: usize, z: f64) -> Vec<f64> {
    if z < 0.0 {
        let mut row = bessel_row(max_order, -z);
        row.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
        return row;
    }
    if z == 0.0 {
        let mut row = vec![0.0; max_order + 1];
        row[0] = 1.0;
        return row;
    }
    if z < SERIES_LIMIT {
        (0..=max_order).map(|n| series(n, z)).collect()
    } else {
        miller(max_order, z)
    }
}

fn series(n: usize, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1.. {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(max_order: usize, z: f64) -> Vec<f64> {
    let top = max_order.max(z.ceil() as usize);
    let mut start = top + 24 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let mut out = vec![0.0; max_order + 1];
    let two_over_z = 2.0 / z;
    // Unnormalised J_{k+1} and J_k.
    let mut above = 0.0;
    let mut cur = 1e-300;
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_z * cur - above;
        above = cur;
        cur = below;
        let m = k - 1;
        if m <= max_order {
            out[m] = cur;
        }
        if m > 0 && m % 2 == 0 {
            even_sum += cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            cur *= s;
            above *= s;
            even_sum *= s;
            out.iter_mut().for_each(|v| *v *= s);
        }
    }
    let norm = cur + 2.0 * even_sum;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}
