//! Spherical-Earth geometry for a single swarm snapshot.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, EARTH_RADIUS};

/// Earth-centred Earth-fixed position or direction, metres.
pub type EcefVector = Vector3<f64>;

/// Geodetic position on the spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    /// Radians, in `[-pi/2, pi/2]`.
    pub latitude: f64,
    /// Radians, in `(-pi, pi]`.
    pub longitude: f64,
    /// Metres above mean sea level.
    pub altitude: f64,
}

impl GeoPoint {
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self> {
        if !latitude.is_finite() || latitude.abs() > FRAC_PI_2 {
            return Err(Error::Domain(format!("latitude {latitude} rad")));
        }
        if !longitude.is_finite() {
            return Err(Error::Domain(format!("longitude {longitude} rad")));
        }
        if !(altitude >= 0.0 && altitude.is_finite()) {
            return Err(Error::Domain(format!("altitude {altitude} m")));
        }
        Ok(Self {
            latitude,
            longitude: wrap_longitude(longitude),
            altitude,
        })
    }

    pub fn surface(latitude: f64, longitude: f64) -> Result<Self> {
        Self::new(latitude, longitude, 0.0)
    }

    pub fn from_degrees(lat_deg: f64, lon_deg: f64, altitude: f64) -> Result<Self> {
        Self::new(lat_deg.to_radians(), lon_deg.to_radians(), altitude)
    }

    pub fn with_altitude(self, altitude: f64) -> Result<Self> {
        Self::new(self.latitude, self.longitude, altitude)
    }

    pub fn to_ecef(&self) -> EcefVector {
        let r = EARTH_RADIUS + self.altitude;
        let (slat, clat) = self.latitude.sin_cos();
        let (slon, clon) = self.longitude.sin_cos();
        EcefVector::new(r * clat * clon, r * clat * slon, r * slat)
    }

    pub fn from_ecef(v: &EcefVector) -> Result<Self> {
        let r = v.norm();
        if r < EARTH_RADIUS * (1.0 - 1e-12) {
            return Err(Error::Domain(format!("point {r} m from the centre is below the surface")));
        }
        let lat = (v.z / r).clamp(-1.0, 1.0).asin();
        let lon = v.y.atan2(v.x);
        Self::new(lat, lon, (r - EARTH_RADIUS).max(0.0))
    }

    /// Point on the surface at geocentric angle `central_angle` from `self`
    /// along initial bearing `bearing` (clockwise from north).
    pub fn destination(&self, bearing: f64, central_angle: f64) -> Result<Self> {
        let (slat, clat) = self.latitude.sin_cos();
        let (sd, cd) = central_angle.sin_cos();
        let lat = (slat * cd + clat * sd * bearing.cos()).clamp(-1.0, 1.0).asin();
        let lon = self.longitude + (bearing.sin() * sd * clat).atan2(cd - slat * lat.sin());
        Self::surface(lat, lon)
    }

    /// Geocentric angle to `other`, radians.
    pub fn central_angle(&self, other: &GeoPoint) -> f64 {
        let a = self.to_ecef();
        let b = other.to_ecef();
        a.cross(&b).norm().atan2(a.dot(&b))
    }
}

fn wrap_longitude(lon: f64) -> f64 {
    let mut l = lon % (2.0 * PI);
    if l <= -PI {
        l += 2.0 * PI;
    } else if l > PI {
        l -= 2.0 * PI;
    }
    l
}

/// Spacing rule for the hexagonal sub-satellite-point lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeLayout {
    /// Neighbouring -3 dB footprints overlap so that the hexagonal cells
    /// inscribed in them tile the ground: spacing `sqrt(3) h tan(theta_3db)`.
    #[default]
    Contiguous,
    /// Neighbouring -3 dB footprints touch: spacing `2 h tan(theta_3db)`.
    Tangent,
}

impl LatticeLayout {
    pub fn spacing_factor(self) -> f64 {
        match self {
            LatticeLayout::Contiguous => 3f64.sqrt(),
            LatticeLayout::Tangent => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Satellite {
    pub position: EcefVector,
    pub ssp: GeoPoint,
    /// Unit vector, nadir pointing.
    pub boresight: EcefVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmGeometry {
    pub satellites: Vec<Satellite>,
    pub altitude: f64,
    pub theta_3db: f64,
    pub beam_radius_uv: f64,
    /// Ground distance between neighbouring SSPs, metres.
    pub lattice_spacing: f64,
    /// Geocentric angle between neighbouring satellites in the same orbit.
    pub intra_node_separation: f64,
    /// Longitude separation between adjacent polar orbital planes.
    pub inter_node_separation: f64,
    /// Geocentric radius of each -3 dB footprint.
    pub footprint_angle: f64,
}

impl SwarmGeometry {
    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    /// Whether `point` lies inside the -3 dB footprint of satellite `j`.
    pub fn in_footprint(&self, j: usize, point: &EcefVector) -> bool {
        let sat = &self.satellites[j];
        match off_boresight_angle(&sat.position, &sat.boresight, point) {
            Ok(theta) => theta <= self.theta_3db,
            Err(_) => false,
        }
    }

    pub fn in_coverage(&self, point: &EcefVector) -> bool {
        (0..self.len()).any(|j| self.in_footprint(j, point))
    }
}

/// Beam radius in uv (direction-cosine) coordinates.
pub fn beam_radius_uv(theta_3db: f64) -> Result<f64> {
    if !(theta_3db > 0.0 && theta_3db < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "half-power angle {theta_3db} rad outside (0, pi/2)"
        )));
    }
    Ok(theta_3db.sin())
}

/// Geocentric radius of the ground footprint seen at off-nadir angle `theta`
/// from altitude `altitude`.
pub fn footprint_central_angle(altitude: f64, theta: f64) -> Result<f64> {
    let ratio = (EARTH_RADIUS + altitude) / EARTH_RADIUS * theta.sin();
    if ratio >= 1.0 {
        return Err(Error::InfeasibleGeometry(format!(
            "off-nadir angle {theta} rad misses the Earth from {altitude} m"
        )));
    }
    Ok(ratio.asin() - theta)
}

/// Lays out `n_satellites` (1 or 7) over a hexagonal SSP lattice centred at
/// (0, 0), with two outer nodes due north and south of the centre.
pub fn design_swarm(
    altitude: f64,
    theta_3db: f64,
    n_satellites: usize,
    layout: LatticeLayout,
) -> Result<SwarmGeometry> {
    if !(altitude > 0.0 && altitude.is_finite()) {
        return Err(Error::config("altitude_m", format!("{altitude} must be positive")));
    }
    if n_satellites != 1 && n_satellites != 7 {
        return Err(Error::config(
            "n_satellites",
            format!("{n_satellites}; the hexagonal layout supports 1 or 7"),
        ));
    }
    let beam_radius_uv = beam_radius_uv(theta_3db)?;
    let footprint_angle = footprint_central_angle(altitude, theta_3db)?;

    let lattice_spacing = layout.spacing_factor() * altitude * theta_3db.tan();
    let sep = lattice_spacing / EARTH_RADIUS;

    let centre = GeoPoint::surface(0.0, 0.0)?;
    let mut ssps = vec![centre];
    for k in 0..n_satellites - 1 {
        let bearing = k as f64 * PI / 3.0;
        ssps.push(centre.destination(bearing, sep)?);
    }
    let inter_node_separation = if n_satellites > 1 {
        ssps[2].longitude.abs()
    } else {
        0.0
    };

    let satellites = ssps
        .into_iter()
        .map(|ssp| {
            let position = ssp.with_altitude(altitude)?.to_ecef();
            Ok(Satellite {
                position,
                ssp,
                boresight: -position.normalize(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SwarmGeometry {
        satellites,
        altitude,
        theta_3db,
        beam_radius_uv,
        lattice_spacing,
        intra_node_separation: sep,
        inter_node_separation,
        footprint_angle,
    })
}

/// Euclidean distance between a user and a satellite, metres.
pub fn slant_range(user: &GeoPoint, satellite: &EcefVector) -> f64 {
    (satellite - user.to_ecef()).norm()
}

/// Angle between `boresight` and the direction from `from` to `target`.
pub fn off_boresight_angle(
    from: &EcefVector,
    boresight: &EcefVector,
    target: &EcefVector,
) -> Result<f64> {
    let dir = target - from;
    if dir.norm() == 0.0 {
        return Err(Error::Domain("target coincides with the antenna".into()));
    }
    if boresight.norm() == 0.0 {
        return Err(Error::Domain("zero-length boresight".into()));
    }
    Ok(boresight.cross(&dir).norm().atan2(boresight.dot(&dir)))
}
