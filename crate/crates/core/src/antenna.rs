//! Satellite reflector pattern, half-power angle and device antenna.
//!
//! The reflector follows the circular-aperture model used for NTN
//! calibration: `G(theta) = G_max * |2 J1(ka sin theta) / (ka sin theta)|^2`,
//! with `ka = 2 pi (D/2) / lambda`. The peak gain is configured directly
//! rather than derived from the aperture, so antenna efficiency is folded
//! into `G_max`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::bessel::jinc;
use crate::{db_to_linear, linear_to_db, Error, Result};

/// First zero of `J1`, i.e. the first null of the aperture pattern in `u`.
pub const FIRST_NULL_U: f64 = 3.831_705_970_207_512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectorAntenna {
    diameter: f64,
    max_gain_dbi: f64,
    wavelength: f64,
}

impl ReflectorAntenna {
    pub fn new(diameter: f64, max_gain_dbi: f64, wavelength: f64) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::Domain(format!("antenna diameter {diameter} m")));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Domain(format!("carrier wavelength {wavelength} m")));
        }
        if !max_gain_dbi.is_finite() {
            return Err(Error::Domain(format!("peak gain {max_gain_dbi} dBi")));
        }
        Ok(Self {
            diameter,
            max_gain_dbi,
            wavelength,
        })
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn max_gain_dbi(&self) -> f64 {
        self.max_gain_dbi
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Aperture electrical size `k a`.
    pub fn ka(&self) -> f64 {
        2.0 * PI * (self.diameter / 2.0) / self.wavelength
    }

    /// Normalised pattern `g(theta)`, equal to one at boresight.
    ///
    /// No range check; callers inside the crate only pass visible angles.
    pub fn pattern(&self, theta: f64) -> f64 {
        let v = jinc(self.ka() * theta.sin());
        v * v
    }

    /// Linear gain `G_max * g(theta)`.
    pub fn gain_linear(&self, theta: f64) -> f64 {
        db_to_linear(self.max_gain_dbi) * self.pattern(theta)
    }

    /// Gain in dBi at off-boresight angle `theta` in `[0, pi/2]`.
    pub fn reflector_gain(&self, theta: f64) -> Result<f64> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::Domain(format!(
                "off-boresight angle {theta} rad outside [0, pi/2]"
            )));
        }
        if theta == 0.0 {
            return Ok(self.max_gain_dbi);
        }
        Ok(self.max_gain_dbi + linear_to_db(self.pattern(theta)))
    }

    /// Smallest positive angle where the pattern is 3 dB (exactly one half)
    /// below its peak.
    pub fn solve_theta_3db(&self) -> Result<f64> {
        let u = half_power_u();
        let ka = self.ka();
        if ka < u {
            return Err(Error::InfeasibleGeometry(format!(
                "ka = {ka} is below the half-power argument {u}; the main lobe never drops 3 dB"
            )));
        }
        Ok((u / ka).asin())
    }
}

/// The argument `u*` where `(2 J1(u) / u)^2 = 1/2` on the main lobe.
pub fn half_power_u() -> f64 {
    static U: OnceLock<f64> = OnceLock::new();
    *U.get_or_init(|| {
        let f = |u: f64| {
            let v = jinc(u);
            v * v - 0.5
        };
        // g is strictly decreasing on (0, first null); f(1) > 0 > f(2).
        let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
        while hi - lo > 1e-15 * hi {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Omnidirectional device antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserAntenna {
    gain_dbi: f64,
}

impl Default for UserAntenna {
    fn default() -> Self {
        Self { gain_dbi: 0.0 }
    }
}

impl UserAntenna {
    pub fn new(gain_dbi: f64) -> Self {
        Self { gain_dbi }
    }

    /// Gain in dBi; the receive angle is accepted for symmetry with the
    /// transmit side and has no effect.
    pub fn gain(&self, _theta: f64) -> f64 {
        self.gain_dbi
    }

    pub fn gain_linear(&self, theta: f64) -> f64 {
        db_to_linear(self.gain(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::j1;
    use crate::SPEED_OF_LIGHT;
    use proptest::prelude::*;

    fn set_a() -> ReflectorAntenna {
        ReflectorAntenna::new(2.0, 30.0, SPEED_OF_LIGHT / 2e9).unwrap()
    }

    /// Independent oracle: bisection directly on the pattern in `theta`.
    fn theta_3db_bisect(ant: &ReflectorAntenna) -> f64 {
        let (mut lo, mut hi) = (1e-9, (FIRST_NULL_U / ant.ka()).asin());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ant.pattern(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn first_null_constant_is_a_zero_of_j1() {
        assert!(j1(FIRST_NULL_U - 1e-6) > 0.0 && j1(FIRST_NULL_U + 1e-6) < 0.0);
        assert!(j1(FIRST_NULL_U).abs() < 1e-14);
    }

    #[test]
    fn boresight_gain_is_peak() {
        assert_eq!(set_a().reflector_gain(0.0).unwrap(), 30.0);
    }

    #[test]
    fn half_power_argument() {
        // 1.6163399483107031781 from an extended-precision root finder.
        assert!((half_power_u() - 1.616_339_948_310_703).abs() < 1e-12);
    }

    #[test]
    fn set_a_theta_3db() {
        let ant = set_a();
        assert!((ant.ka() - 41.916_900_439_033_6).abs() < 1e-9);
        let t = ant.solve_theta_3db().unwrap();
        assert!((t.to_degrees() - 2.209_906_318_098_33).abs() < 1e-9);
        assert!((t - theta_3db_bisect(&ant)).abs() < 1e-12);
        assert!((ant.pattern(t) - 0.5).abs() < 1e-9);
        // Half power is 10 log10(0.5) = -3.0103 dB below the peak.
        let drop = 30.0 - ant.reflector_gain(t).unwrap();
        assert!((drop - 3.010_299_956_639_812).abs() < 1e-8);
    }

    #[test]
    fn set_b_theta_3db() {
        let ant = ReflectorAntenna::new(1.0, 24.1, SPEED_OF_LIGHT / 2e9).unwrap();
        let t = ant.solve_theta_3db().unwrap();
        assert!((t.to_degrees() - 4.423_108_803_222_27).abs() < 1e-9);
        // Doubling ka halves sin(theta_3db).
        let a = set_a().solve_theta_3db().unwrap();
        assert!((t.sin() - 2.0 * a.sin()).abs() < 1e-15);
    }

    #[test]
    fn gain_at_4_41_degrees() {
        // 10 log10 |2 J1(u)/u|^2 at u = 41.917 sin(4.41 deg), mpmath: -16.1160765708 dB.
        let g = set_a().reflector_gain(4.41f64.to_radians()).unwrap();
        assert!((g - (30.0 - 16.116_076_570_8)).abs() < 1e-8, "{g}");
    }

    #[test]
    fn rejects_out_of_range_angles() {
        assert!(set_a().reflector_gain(-1e-3).is_err());
        assert!(set_a().reflector_gain(FRAC_PI_2 + 1e-3).is_err());
    }

    #[test]
    fn small_aperture_is_infeasible() {
        let lambda = SPEED_OF_LIGHT / 2e9;
        // ka = 1.6 < u*
        let d = 1.6 * lambda / PI;
        let ant = ReflectorAntenna::new(d, 10.0, lambda).unwrap();
        assert!(matches!(
            ant.solve_theta_3db(),
            Err(Error::InfeasibleGeometry(_))
        ));
    }

    #[test]
    fn user_antenna_is_isotropic() {
        let u = UserAntenna::default();
        assert_eq!(u.gain(0.0), 0.0);
        assert_eq!(u.gain(1.2), 0.0);
        assert_eq!(u.gain_linear(0.7), 1.0);
    }

    proptest! {
        #[test]
        fn pattern_decreases_to_first_null(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let ant = set_a();
            let null = (FIRST_NULL_U / ant.ka()).asin();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(ant.pattern(lo * null) > ant.pattern(hi * null));
            prop_assert!(ant.reflector_gain(hi * null).unwrap_or(f64::NEG_INFINITY) <= 30.0);
        }

        #[test]
        fn pattern_continuous_at_boresight(t in 0.0f64..1e-7) {
            prop_assert!((set_a().pattern(t) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn half_power_root_holds_for_any_large_aperture(d in 0.2f64..10.0) {
            let ant = ReflectorAntenna::new(d, 20.0, SPEED_OF_LIGHT / 2e9).unwrap();
            let t = ant.solve_theta_3db().unwrap();
            prop_assert!((ant.pattern(t) - 0.5).abs() < 1e-9);
        }
    }
}
