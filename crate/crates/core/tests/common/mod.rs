//! Oracles shared by the integration tests. Plain `Vec` arithmetic only, so
//! they stay independent of the nalgebra code paths under test.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<Complex64>>;

pub fn to_dense(m: &DMatrix<Complex64>) -> Dense {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn from_dense(d: &Dense) -> DMatrix<Complex64> {
    DMatrix::from_fn(d.len(), d[0].len(), |i, j| d[i][j])
}

pub fn adjoint(a: &Dense) -> Dense {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..k {
                acc += a[i][t] * b[t][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a.clone();
    let mut inv: Dense = (0..n)
        .map(|i| (0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()))
            .unwrap();
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        assert!(p.norm() > 0.0, "singular matrix");
        for j in 0..n {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = m[i][col];
                if f.norm() != 0.0 {
                    for j in 0..n {
                        let (mc, ic) = (m[col][j], inv[col][j]);
                        m[i][j] -= f * mc;
                        inv[i][j] -= f * ic;
                    }
                }
            }
        }
    }
    inv
}

/// `(H^H H + I / p_t)^-1 H^H` by explicit inversion.
pub fn mmse_oracle(h: &Dense, p_t: f64) -> Dense {
    let ha = adjoint(h);
    let mut g = matmul(&ha, h);
    for (i, row) in g.iter_mut().enumerate() {
        row[i] += Complex64::new(1.0 / p_t, 0.0);
    }
    matmul(&inverse(&g), &ha)
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &Dense, b: &Dense) -> f64 {
    let diff: Dense = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect();
    frobenius(&diff) / frobenius(b)
}

/// SINR of beam `b` by explicit loops over beams and satellites.
pub fn sinr_oracle(h: &Dense, w: &Dense, p_tx: f64, b: usize) -> f64 {
    let n_sat = h[b].len();
    let n_beams = w[0].len();
    let mut signal = 0.0;
    let mut interference = 0.0;
    for l in 0..n_beams {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n_sat {
            acc += h[b][j] * w[j][l];
        }
        if l == b {
            signal = acc.norm_sqr();
        } else {
            interference += acc.norm_sqr();
        }
    }
    p_tx * signal / (1.0 + p_tx * interference)
}

pub fn random_dense<R: Rng>(rng: &mut R, n: usize) -> Dense {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect()
}
