//! Regularised MMSE precoding with per-satellite power normalisation.
//!
//! Rows of a precoder are indexed by satellite (transmit antenna), columns by
//! beam. With `N_B` beams the normalised precoders carry a `1/sqrt(N_B)` row
//! scaling, so they are driven with the total swarm power `N_B * P_t`
//! (see [`BeamformingMatrix::transmit_power`]); each satellite then radiates
//! at most `P_t`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::{Error, Result};

/// Maximum relative Frobenius residual accepted from the linear solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Raw,
    Pac,
    Mpc,
    IdentityBaseline,
}

/// Transmission scheme simulated for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// MMSE with per-antenna power constraint.
    Pac,
    /// MMSE with maximum power constraint.
    Mpc,
    /// No beamforming: each satellite serves only its own beam.
    Baseline,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Pac, Mode::Mpc, Mode::Baseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pac => "pac",
            Mode::Mpc => "mpc",
            Mode::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pac" => Ok(Mode::Pac),
            "mpc" => Ok(Mode::Mpc),
            "baseline" | "none" => Ok(Mode::Baseline),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingMatrix {
    pub entries: DMatrix<Complex64>,
    pub normalization: Normalization,
}

impl BeamformingMatrix {
    pub fn n_satellites(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_beams(&self) -> usize {
        self.entries.ncols()
    }

    pub fn row_norm(&self, j: usize) -> f64 {
        self.entries.row(j).norm()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.n_satellites()).map(|j| self.row_norm(j)).collect()
    }

    /// Power `P_TX` that drives this precoder when every satellite is limited
    /// to `per_satellite_power`.
    pub fn transmit_power(&self, per_satellite_power: f64) -> f64 {
        match self.normalization {
            Normalization::IdentityBaseline => per_satellite_power,
            _ => self.n_beams() as f64 * per_satellite_power,
        }
    }

    /// Power radiated by each satellite, `P_TX * ||W_j,:||^2`.
    pub fn satellite_powers(&self, per_satellite_power: f64) -> Vec<f64> {
        let p_tx = self.transmit_power(per_satellite_power);
        (0..self.n_satellites())
            .map(|j| p_tx * self.entries.row(j).norm_squared())
            .collect()
    }
}

/// `W = (H^H H + I / P_t)^-1 H^H`, via a Cholesky solve of the Hermitian
/// positive-definite system.
pub fn mmse_matrix(h: &ChannelMatrix, p_t: f64) -> Result<BeamformingMatrix> {
    let h = &h.entries;
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::Domain(format!("channel matrix is {}x{}, expected square", h.nrows(), h.ncols())));
    }
    if !(p_t > 0.0 && p_t.is_finite()) {
        return Err(Error::Domain(format!("transmit power {p_t} W")));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite channel entry".into()));
    }

    let n = h.ncols();
    let h_adj = h.adjoint();
    let mut gram = &h_adj * h;
    let alpha = 1.0 / p_t;
    for i in 0..n {
        gram[(i, i)] += Complex64::new(alpha, 0.0);
    }

    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("regularised Gram matrix is not positive definite".into()))?;
    let w = chol.solve(&h_adj);

    let residual = (&gram * &w - &h_adj).norm() / h_adj.norm();
    if !residual.is_finite() || residual > SOLVE_RESIDUAL_TOL {
        return Err(Error::Numeric(format!("MMSE solve residual {residual:e}")));
    }
    Ok(BeamformingMatrix {
        entries: w,
        normalization: Normalization::Raw,
    })
}

fn require_raw(w: &BeamformingMatrix) -> Result<()> {
    if w.normalization != Normalization::Raw {
        return Err(Error::Domain(format!(
            "expected an unnormalised precoder, got {:?}",
            w.normalization
        )));
    }
    Ok(())
}

/// Per-antenna power constraint: every row rescaled to norm `1/sqrt(N_B)`.
pub fn normalize_pac(w: &BeamformingMatrix) -> Result<BeamformingMatrix> {
    require_raw(w)?;
    let scale = 1.0 / (w.n_beams() as f64).sqrt();
    let mut out = w.entries.clone();
    for (j, mut row) in out.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegeneratePrecoder(format!("row {j} has norm {norm}")));
        }
        row *= Complex64::new(scale / norm, 0.0);
    }
    Ok(BeamformingMatrix {
        entries: out,
        normalization: Normalization::Pac,
    })
}

/// Maximum power constraint: one global scale so the strongest row has norm
/// `1/sqrt(N_B)`. Column directions are untouched.
pub fn normalize_mpc(w: &BeamformingMatrix) -> Result<BeamformingMatrix> {
    require_raw(w)?;
    let max_sq = w
        .entries
        .row_iter()
        .map(|r| r.norm_squared())
        .fold(0.0, f64::max);
    if max_sq == 0.0 || !max_sq.is_finite() {
        return Err(Error::DegeneratePrecoder("all rows are zero".into()));
    }
    let scale = 1.0 / (w.n_beams() as f64 * max_sq).sqrt();
    Ok(BeamformingMatrix {
        entries: w.entries.map(|z| z * scale),
        normalization: Normalization::Mpc,
    })
}

pub fn baseline_matrix(n_satellites: usize) -> Result<BeamformingMatrix> {
    if n_satellites == 0 {
        return Err(Error::Domain("baseline needs at least one satellite".into()));
    }
    Ok(BeamformingMatrix {
        entries: DMatrix::identity(n_satellites, n_satellites),
        normalization: Normalization::IdentityBaseline,
    })
}

/// Normalised precoder for `mode`.
pub fn precoder(h: &ChannelMatrix, p_t: f64, mode: Mode) -> Result<BeamformingMatrix> {
    match mode {
        Mode::Pac => normalize_pac(&mmse_matrix(h, p_t)?),
        Mode::Mpc => normalize_mpc(&mmse_matrix(h, p_t)?),
        Mode::Baseline => baseline_matrix(h.n_satellites()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_channel(rng: &mut impl Rng, n: usize) -> ChannelMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        ChannelMatrix::new(m, 1.0).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn scalar_channel() {
        let h0 = Complex64::new(0.3, -1.2);
        let h = ChannelMatrix::new(DMatrix::from_element(1, 1, h0), 1.0).unwrap();
        let p_t = 2.5;
        let w = mmse_matrix(&h, p_t).unwrap();
        let want = h0.conj() / (h0.norm_sqr() + 1.0 / p_t);
        assert!((w.entries[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn identity_channel() {
        let h = ChannelMatrix::new(DMatrix::identity(4, 4), 1.0).unwrap();
        let w = mmse_matrix(&h, 1.0).unwrap();
        assert!((w.entries - DMatrix::from_diagonal_element(4, 4, c(0.5))).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut m = DMatrix::identity(2, 2);
        assert!(mmse_matrix(&ChannelMatrix { entries: m.clone(), noise_power: 1.0 }, 0.0).is_err());
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            mmse_matrix(&ChannelMatrix { entries: m, noise_power: 1.0 }, 1.0),
            Err(Error::Numeric(_))
        ));
        let rect = ChannelMatrix::new(DMatrix::zeros(2, 3), 1.0).unwrap();
        assert!(mmse_matrix(&rect, 1.0).is_err());
    }

    #[test]
    fn pac_identity() {
        let w = BeamformingMatrix { entries: DMatrix::identity(2, 2), normalization: Normalization::Raw };
        let p = normalize_pac(&w).unwrap();
        let want = DMatrix::from_diagonal_element(2, 2, c(1.0 / 2f64.sqrt()));
        assert!((p.entries - &want).norm() < 1e-15);
        let m = normalize_mpc(&w).unwrap();
        assert!((m.entries - want).norm() < 1e-15);
    }

    #[test]
    fn degenerate_rows_rejected() {
        let mut e = DMatrix::identity(3, 3);
        e[(1, 1)] = c(0.0);
        let w = BeamformingMatrix { entries: e, normalization: Normalization::Raw };
        assert!(matches!(normalize_pac(&w), Err(Error::DegeneratePrecoder(_))));
        assert!(normalize_mpc(&w).is_ok());
        let zero = BeamformingMatrix { entries: DMatrix::zeros(3, 3), normalization: Normalization::Raw };
        assert!(matches!(normalize_mpc(&zero), Err(Error::DegeneratePrecoder(_))));
    }

    #[test]
    fn normalizing_twice_is_rejected() {
        let w = baseline_matrix(3).unwrap();
        assert!(normalize_pac(&w).is_err());
    }

    #[test]
    fn baseline_powers() {
        let w = baseline_matrix(7).unwrap();
        assert_eq!(w.entries, DMatrix::identity(7, 7));
        assert_eq!(w.satellite_powers(0.8), vec![0.8; 7]);
        assert!(baseline_matrix(0).is_err());
    }

    #[test]
    fn pac_and_mpc_powers_respect_the_satellite_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p_t = 5.0;
        for _ in 0..50 {
            let h = random_channel(&mut rng, 7);
            let pac = precoder(&h, p_t, Mode::Pac).unwrap();
            for p in pac.satellite_powers(p_t) {
                assert!((p - p_t).abs() < 1e-12 * p_t);
            }
            let mpc = precoder(&h, p_t, Mode::Mpc).unwrap();
            let powers = mpc.satellite_powers(p_t);
            let max = powers.iter().cloned().fold(0.0, f64::max);
            assert!((max - p_t).abs() < 1e-12 * p_t);
            assert!(powers.iter().all(|&p| p <= p_t * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn zero_forcing_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let h = random_channel(&mut rng, 7);
            let eye = DMatrix::<Complex64>::identity(7, 7);
            let mut last = f64::INFINITY;
            for k in 0..8 {
                let p_t = 10f64.powi(k);
                let w = mmse_matrix(&h, p_t).unwrap();
                let err = (&h.entries * &w.entries - &eye).norm();
                assert!(err < last, "not monotone at P_t = {p_t}");
                last = err;
            }
            assert!(last < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn mpc_preserves_column_angles(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_channel(&mut rng, 7);
            let w = mmse_matrix(&h, 3.0).unwrap();
            let m = normalize_mpc(&w).unwrap();
            let cosine = |a: &DMatrix<Complex64>, p: usize, q: usize| {
                let (cp, cq) = (a.column(p), a.column(q));
                cp.dotc(&cq).norm() / (cp.norm() * cq.norm())
            };
            for p in 0..7 {
                for q in 0..7 {
                    prop_assert!((cosine(&w.entries, p, q) - cosine(&m.entries, p, q)).abs() < 1e-12);
                }
            }
        }
    }
}
