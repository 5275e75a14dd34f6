//! Bessel function of the first kind, order one.
//!
//! Small arguments use the ascending power series; larger arguments use
//! Miller's backward recurrence normalised with
//! `J0(x) + 2 * (J2(x) + J4(x) + ...) = 1`, which stays accurate to a few ulps
//! of unity over the whole range the antenna pattern needs.

const SERIES_LIMIT: f64 = 4.0;

/// `J1(x)`. Odd in `x`.
pub fn j1(x: f64) -> f64 {
    if x < 0.0 {
        return -j1(-x);
    }
    if x < SERIES_LIMIT {
        0.5 * x * jinc_series(x)
    } else {
        j1_miller(x)
    }
}

/// `2 J1(x) / x`, continuous at zero where it equals one.
pub fn jinc(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        jinc_series(x)
    } else {
        2.0 * j1_miller(x) / x
    }
}

/// Power series of `2 J1(x) / x = sum_k (-1)^k (x/2)^(2k) / (k! (k+1)!)`.
fn jinc_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    sum
}

fn j1_miller(x: f64) -> f64 {
    const RESCALE_ABOVE: f64 = 1e250;

    // Start well above x so the recurrence has settled on the minimal solution.
    let mut start = (x + 30.0 + (50.0 * x).sqrt()) as usize;
    start += start % 2;

    let two_over_x = 2.0 / x;
    let mut j_next = 0.0; // J_{n+1}
    let mut j_cur = 1e-300; // J_n
    let mut norm = 0.0;
    let mut j1 = 0.0;

    for n in (1..=start).rev() {
        // J_{n-1} = (2n/x) J_n - J_{n+1}
        let j_prev = n as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let m = n - 1;
        if m == 1 {
            j1 = j_cur;
        }
        if m % 2 == 0 {
            norm += if m == 0 { j_cur } else { 2.0 * j_cur };
        }
        if j_cur.abs() > RESCALE_ABOVE {
            j_cur /= RESCALE_ABOVE;
            j_next /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            j1 /= RESCALE_ABOVE;
        }
    }
    j1 / norm
}
