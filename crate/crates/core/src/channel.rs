//! Link budget and noise-normalised channel coefficients.
//!
//! A coefficient is
//! `h = sqrt(G_T G_R) / (4 pi d/lambda sqrt(A_loss P_z)) * exp(-j 2 pi d / lambda)`,
//! so the receiver noise has unit variance once `h` is used.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::{ReflectorAntenna, UserAntenna};
use crate::geometry::{off_boresight_angle, slant_range, GeoPoint, Satellite, SwarmGeometry};
use crate::{db_to_linear, Error, Result, BOLTZMANN, SPEED_OF_LIGHT};

/// Reference temperature for the noise-figure definition, K.
const T0: f64 = 290.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    pub carrier_frequency: f64,
    pub carrier_bandwidth: f64,
    pub channel_bandwidth: f64,
    pub polarization_loss_db: f64,
    pub scintillation_loss_db: f64,
    pub shadowing_margin_db: f64,
    pub antenna_temperature: f64,
    pub noise_figure_db: f64,
    /// Boresight EIRP spectral density, dBW/MHz.
    pub eirp_density: f64,
    pub g_t_max_dbi: f64,
}

impl LinkBudgetParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_frequency_hz", self.carrier_frequency),
            ("carrier_bandwidth_hz", self.carrier_bandwidth),
            ("channel_bandwidth_hz", self.channel_bandwidth),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("{v} must be positive")));
            }
        }
        let non_negative = [
            ("polarization_loss_db", self.polarization_loss_db),
            ("scintillation_loss_db", self.scintillation_loss_db),
            ("shadowing_margin_db", self.shadowing_margin_db),
            ("antenna_temperature_k", self.antenna_temperature),
            ("noise_figure_db", self.noise_figure_db),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("{v} must be non-negative")));
            }
        }
        if self.carrier_bandwidth > self.channel_bandwidth {
            return Err(Error::config(
                "carrier_bandwidth_hz",
                "carrier bandwidth exceeds the channel bandwidth",
            ));
        }
        for (key, v) in [("eirp_density_dbw_mhz", self.eirp_density), ("g_t_max_dbi", self.g_t_max_dbi)] {
            if !v.is_finite() {
                return Err(Error::config(key, format!("{v} is not finite")));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Aggregate of polarisation, scintillation and shadowing losses, linear.
    pub fn loss_linear(&self) -> f64 {
        db_to_linear(self.polarization_loss_db + self.scintillation_loss_db + self.shadowing_margin_db)
    }

    pub fn system_temperature(&self) -> f64 {
        self.antenna_temperature + T0 * (db_to_linear(self.noise_figure_db) - 1.0)
    }
}

/// Receiver noise power over one carrier, W.
pub fn noise_power(params: &LinkBudgetParams) -> f64 {
    BOLTZMANN * params.system_temperature() * params.carrier_bandwidth
}

/// Antenna-port power that yields the configured boresight EIRP density over
/// `bandwidth` Hz.
fn port_power(params: &LinkBudgetParams, bandwidth: f64) -> f64 {
    db_to_linear(params.eirp_density + 10.0 * (bandwidth / 1e6).log10() - params.g_t_max_dbi)
}

/// Per-carrier antenna-port power, W.
pub fn transmit_power_per_carrier(params: &LinkBudgetParams) -> f64 {
    port_power(params, params.carrier_bandwidth)
}

/// Antenna-port power of a satellite radiating the EIRP density over the
/// whole channel bandwidth, W.
pub fn transmit_power_full_band(params: &LinkBudgetParams) -> f64 {
    port_power(params, params.channel_bandwidth)
}

/// How the per-satellite power `P_t` is budgeted from the EIRP density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerBudget {
    /// Full node power over the channel bandwidth is available to the
    /// scheduled carrier.
    #[default]
    FullBand,
    /// Only the EIRP density share of one carrier is available.
    PerCarrier,
}

impl PowerBudget {
    pub fn transmit_power(self, params: &LinkBudgetParams) -> f64 {
        match self {
            PowerBudget::FullBand => transmit_power_full_band(params),
            PowerBudget::PerCarrier => transmit_power_per_carrier(params),
        }
    }
}

/// Everything needed to evaluate channel coefficients for one scenario.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    params: LinkBudgetParams,
    antenna: ReflectorAntenna,
    user_antenna: UserAntenna,
    wavelength: f64,
    noise_power: f64,
    loss: f64,
}

impl ChannelModel {
    pub fn new(params: LinkBudgetParams, antenna: ReflectorAntenna, user_antenna: UserAntenna) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            wavelength: params.wavelength(),
            noise_power: noise_power(&params),
            loss: params.loss_linear(),
            params,
            antenna,
            user_antenna,
        })
    }

    /// Same model with the noise power replaced; used to check normalisation.
    pub fn with_noise_power(mut self, noise_power: f64) -> Result<Self> {
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::Domain(format!("noise power {noise_power} W")));
        }
        self.noise_power = noise_power;
        Ok(self)
    }

    pub fn params(&self) -> &LinkBudgetParams {
        &self.params
    }

    pub fn antenna(&self) -> &ReflectorAntenna {
        &self.antenna
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn coefficient(&self, user: &GeoPoint, satellite: &Satellite) -> Result<Complex64> {
        let user_pos = user.to_ecef();
        let d = slant_range(user, &satellite.position);
        if d <= 0.0 {
            return Err(Error::Domain("zero slant range".into()));
        }
        let theta_t = off_boresight_angle(&satellite.position, &satellite.boresight, &user_pos)?;
        let zenith = user_pos.normalize();
        let theta_r = off_boresight_angle(&user_pos, &zenith, &satellite.position)?;

        let g_t = self.antenna.gain_linear(theta_t);
        let g_r = self.user_antenna.gain_linear(theta_r);
        let cycles = d / self.wavelength;
        let magnitude = (g_t * g_r).sqrt() / (4.0 * PI * cycles * (self.loss * self.noise_power).sqrt());
        let phase = -2.0 * PI * cycles.fract();
        Ok(Complex64::from_polar(magnitude, phase))
    }
}

/// Coefficient between `user` and satellite `j` of `swarm`.
pub fn channel_coefficient(
    user: &GeoPoint,
    j: usize,
    swarm: &SwarmGeometry,
    model: &ChannelModel,
) -> Result<Complex64> {
    let sat = swarm
        .satellites
        .get(j)
        .ok_or_else(|| Error::Domain(format!("satellite index {j} out of range")))?;
    model.coefficient(user, sat)
}

/// Noise-normalised channel matrix; row `b` holds the channel vector of the
/// user scheduled in beam `b`, column `j` belongs to satellite `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub noise_power: f64,
}

impl ChannelMatrix {
    pub fn new(entries: DMatrix<Complex64>, noise_power: f64) -> Result<Self> {
        if entries.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::Numeric("non-finite channel coefficient".into()));
        }
        Ok(Self { entries, noise_power })
    }

    pub fn n_users(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_satellites(&self) -> usize {
        self.entries.ncols()
    }
}

pub fn build_channel_matrix(
    scheduled_users: &[GeoPoint],
    swarm: &SwarmGeometry,
    model: &ChannelModel,
) -> Result<ChannelMatrix> {
    let n = swarm.len();
    if scheduled_users.len() != n {
        return Err(Error::Scheduling(format!(
            "{} scheduled users for {n} beams",
            scheduled_users.len()
        )));
    }
    let mut entries = DMatrix::zeros(n, n);
    for (b, user) in scheduled_users.iter().enumerate() {
        for (j, sat) in swarm.satellites.iter().enumerate() {
            let h = model.coefficient(user, sat)?;
            if h.norm() == 0.0 {
                return Err(Error::Numeric(format!("zero channel gain at ({b}, {j})")));
            }
            entries[(b, j)] = h;
        }
    }
    ChannelMatrix::new(entries, model.noise_power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{design_swarm, LatticeLayout};
    use crate::linear_to_db;
    use proptest::prelude::*;

    fn params(eirp: f64) -> LinkBudgetParams {
        LinkBudgetParams {
            carrier_frequency: 2e9,
            carrier_bandwidth: 180e3,
            channel_bandwidth: 30e6,
            polarization_loss_db: 3.0,
            scintillation_loss_db: 2.2,
            shadowing_margin_db: 3.0,
            antenna_temperature: 290.0,
            noise_figure_db: 7.0,
            eirp_density: eirp,
            g_t_max_dbi: 30.0,
        }
    }

    fn model() -> ChannelModel {
        let p = params(34.0);
        let ant = ReflectorAntenna::new(2.0, 30.0, p.wavelength()).unwrap();
        ChannelModel::new(p, ant, UserAntenna::default()).unwrap()
    }

    fn nadir_sat(h: f64) -> Satellite {
        let ssp = GeoPoint::surface(0.0, 0.0).unwrap();
        let position = ssp.with_altitude(h).unwrap().to_ecef();
        Satellite { position, ssp, boresight: -position.normalize() }
    }

    #[test]
    fn noise_power_values() {
        let mut p = params(34.0);
        p.noise_figure_db = 0.0;
        assert!((noise_power(&p) - 1.380_649e-23 * 290.0 * 1.8e5).abs() < 1e-30);
        let p = params(34.0);
        assert!((p.system_temperature() - 1453.442_977_52).abs() < 1e-6);
        assert!((noise_power(&p) - 3.612_050_268_24e-15).abs() < 1e-24);
        assert!((linear_to_db(noise_power(&p)) + 144.422_462_143).abs() < 1e-9);
        let mut wide = p;
        wide.carrier_bandwidth *= 2.0;
        assert!((noise_power(&wide) / noise_power(&p) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn transmit_power_values() {
        let p = transmit_power_per_carrier(&params(34.0));
        assert!((linear_to_db(p) + 3.447_274_948_97).abs() < 1e-9);
        assert!((p - 0.452_139_557_672).abs() < 1e-10);
        let p = transmit_power_per_carrier(&params(40.0));
        assert!((p - 1.8).abs() < 1e-12);
        let mut unit = params(30.0);
        unit.carrier_bandwidth = 1e6;
        assert!((transmit_power_per_carrier(&unit) - 1.0).abs() < 1e-15);
        let full = transmit_power_full_band(&params(34.0));
        assert!((linear_to_db(full) - 18.771_212_547_2).abs() < 1e-9);
    }

    #[test]
    fn nadir_coefficient_power() {
        // 30 - FSPL(154.031408143) - 8.2 + 144.422462143 = 12.1910540004 dB
        let h = model().coefficient(&GeoPoint::surface(0.0, 0.0).unwrap(), &nadir_sat(600e3)).unwrap();
        assert!((linear_to_db(h.norm_sqr()) - 12.191_054_000_4).abs() < 1e-8);
    }

    #[test]
    fn boresight_snr_per_carrier() {
        let m = model();
        let h = m.coefficient(&GeoPoint::surface(0.0, 0.0).unwrap(), &nadir_sat(600e3)).unwrap();
        let snr = transmit_power_per_carrier(m.params()) * h.norm_sqr();
        assert!((linear_to_db(snr) - 8.743_779_051_39).abs() < 1e-8);
    }

    #[test]
    fn doubling_distance_costs_6_dB() {
        let m = model();
        let user = GeoPoint::surface(0.0, 0.0).unwrap();
        let a = m.coefficient(&user, &nadir_sat(600e3)).unwrap().norm_sqr();
        let b = m.coefficient(&user, &nadir_sat(1200e3)).unwrap().norm_sqr();
        assert!((linear_to_db(a / b) - 20.0 * 2f64.log10()).abs() < 1e-10);
    }

    #[test]
    fn integer_wavelength_distance_has_zero_phase() {
        let m = model();
        let lambda = m.wavelength();
        let h = (600e3 / lambda).round() * lambda;
        let c = m.coefficient(&GeoPoint::surface(0.0, 0.0).unwrap(), &nadir_sat(h)).unwrap();
        let phase = c.arg().rem_euclid(2.0 * PI);
        assert!(phase.min(2.0 * PI - phase) < 1e-6, "{phase}");
    }

    #[test]
    fn noise_normalisation_scales_power() {
        let m = model();
        let user = GeoPoint::surface(0.001, 0.0).unwrap();
        let a = m.coefficient(&user, &nadir_sat(600e3)).unwrap();
        let m2 = m.clone().with_noise_power(m.noise_power() * 4.0).unwrap();
        let b = m2.coefficient(&user, &nadir_sat(600e3)).unwrap();
        assert!((a.norm_sqr() / b.norm_sqr() - 4.0).abs() < 1e-12);
        assert!((a.arg() - b.arg()).abs() < 1e-15);
    }

    #[test]
    fn matrix_is_entrywise_scalar() {
        let m = model();
        let theta = m.antenna().solve_theta_3db().unwrap();
        let swarm = design_swarm(600e3, theta, 7, LatticeLayout::Contiguous).unwrap();
        let users: Vec<_> = swarm.satellites.iter().map(|s| s.ssp).collect();
        let h = build_channel_matrix(&users, &swarm, &m).unwrap();
        assert_eq!(h.entries.shape(), (7, 7));
        for b in 0..7 {
            let mut best = 0;
            for j in 0..7 {
                let want = channel_coefficient(&users[b], j, &swarm, &m).unwrap();
                assert_eq!(h.entries[(b, j)], want);
                if h.entries[(b, j)].norm() > h.entries[(b, best)].norm() {
                    best = j;
                }
            }
            assert_eq!(best, b);
        }
        // Neighbours sit outside the main lobe's -10 dB contour at the SSP.
        for b in 0..7 {
            for j in 0..7 {
                if b != j {
                    assert!(h.entries[(b, j)].norm_sqr() < 0.1 * h.entries[(b, b)].norm_sqr());
                }
            }
        }
    }

    #[test]
    fn single_satellite_matrix() {
        let m = model();
        let theta = m.antenna().solve_theta_3db().unwrap();
        let swarm = design_swarm(600e3, theta, 1, LatticeLayout::Contiguous).unwrap();
        let user = [GeoPoint::surface(0.0, 0.001).unwrap()];
        let h = build_channel_matrix(&user, &swarm, &m).unwrap();
        assert_eq!(h.entries.shape(), (1, 1));
        assert_eq!(h.entries[(0, 0)], channel_coefficient(&user[0], 0, &swarm, &m).unwrap());
        assert!(matches!(
            build_channel_matrix(&[user[0], user[0]], &swarm, &m),
            Err(Error::Scheduling(_))
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params(34.0);
        p.carrier_bandwidth = 40e6;
        assert!(p.validate().is_err());
        let mut p = params(34.0);
        p.shadowing_margin_db = -1.0;
        assert!(matches!(p.validate(), Err(Error::Config { key, .. }) if key == "shadowing_margin_db"));
    }

    proptest! {
        #[test]
        fn magnitude_decreases_with_distance(h1 in 300e3f64..2000e3, h2 in 300e3f64..2000e3) {
            prop_assume!((h1 - h2).abs() > 1.0);
            let m = model();
            let user = GeoPoint::surface(0.0, 0.0).unwrap();
            let a = m.coefficient(&user, &nadir_sat(h1)).unwrap().norm();
            let b = m.coefficient(&user, &nadir_sat(h2)).unwrap().norm();
            prop_assert_eq!(h1 < h2, a > b);
        }
    }
}
