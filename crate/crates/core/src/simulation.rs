//! Monte Carlo evaluation of the swarm downlink.
//!
//! Every iteration draws a fresh Poisson population over the union of the
//! -3 dB footprints, associates each device to its strongest beam, schedules
//! one device per beam on a single carrier and evaluates the SINR of every
//! scheduled device. Iterations own independent RNG streams, so results do
//! not depend on how they are spread over worker threads.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::antenna::ReflectorAntenna;
use crate::beamforming::{precoder, BeamformingMatrix, Mode};
use crate::channel::{build_channel_matrix, ChannelMatrix, ChannelModel};
use crate::config::ScenarioConfig;
use crate::geometry::{off_boresight_angle, GeoPoint, SwarmGeometry};
use crate::{linear_to_db, Error, Result, EARTH_RADIUS};

/// Consecutive drops with an empty beam tolerated before giving up.
pub const MAX_REDRAWS: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub users: Vec<GeoPoint>,
    /// Beam index of each entry of `users`.
    pub beam_assignment: Vec<usize>,
}

impl UserDrop {
    /// User indices grouped by beam.
    pub fn members(&self, n_beams: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n_beams];
        for (i, &b) in self.beam_assignment.iter().enumerate() {
            out[b].push(i);
        }
        out
    }

    pub fn has_empty_beam(&self, n_beams: usize) -> bool {
        self.members(n_beams).iter().any(Vec::is_empty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledSlot {
    /// Index into the drop's users, one per beam.
    pub selected: Vec<usize>,
    pub carrier: usize,
}

/// Latitude/longitude box containing every footprint of `swarm`.
fn coverage_box(swarm: &SwarmGeometry) -> (f64, f64, f64, f64) {
    let pad = swarm.footprint_angle * 1.01;
    let lat_min = swarm.satellites.iter().map(|s| s.ssp.latitude).fold(f64::INFINITY, f64::min);
    let lat_max = swarm.satellites.iter().map(|s| s.ssp.latitude).fold(f64::NEG_INFINITY, f64::max);
    let lat_lo = (lat_min - pad).max(-FRAC_PI_2);
    let lat_hi = (lat_max + pad).min(FRAC_PI_2);
    let widest = lat_lo.abs().max(lat_hi.abs()).min(FRAC_PI_2 - 1e-6);
    let lon_pad = pad / widest.cos();
    let lon_min = swarm.satellites.iter().map(|s| s.ssp.longitude).fold(f64::INFINITY, f64::min);
    let lon_max = swarm.satellites.iter().map(|s| s.ssp.longitude).fold(f64::NEG_INFINITY, f64::max);
    (lat_lo, lat_hi, lon_min - lon_pad, lon_max + lon_pad)
}

/// Draws a homogeneous Poisson population of intensity `rho` (users/km^2)
/// over the union of the swarm's -3 dB footprints.
pub fn drop_users<R: Rng + ?Sized>(swarm: &SwarmGeometry, rho: f64, rng: &mut R) -> Result<Vec<GeoPoint>> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("user density {rho} per km^2")));
    }
    let (lat_lo, lat_hi, lon_lo, lon_hi) = coverage_box(swarm);
    let (s_lo, s_hi) = (lat_lo.sin(), lat_hi.sin());
    let r_km = EARTH_RADIUS / 1e3;
    let box_area = r_km * r_km * (lon_hi - lon_lo) * (s_hi - s_lo);

    let count = Poisson::new(rho * box_area)
        .map_err(|e| Error::Domain(format!("Poisson mean: {e}")))?
        .sample(rng) as u64;

    let mut users = Vec::new();
    for _ in 0..count {
        let lat = rng.random_range(s_lo..s_hi).asin();
        let lon = rng.random_range(lon_lo..lon_hi);
        let p = GeoPoint::surface(lat, lon)?;
        if swarm.in_coverage(&p.to_ecef()) {
            users.push(p);
        }
    }
    Ok(users)
}

/// Beam of maximum transmit-pattern gain for every user; ties go to the
/// lowest satellite index.
pub fn assign_beams(users: &[GeoPoint], swarm: &SwarmGeometry, antenna: &ReflectorAntenna) -> Vec<usize> {
    users
        .iter()
        .map(|u| {
            let pos = u.to_ecef();
            let mut best = 0;
            let mut best_gain = f64::NEG_INFINITY;
            for (j, sat) in swarm.satellites.iter().enumerate() {
                let gain = off_boresight_angle(&sat.position, &sat.boresight, &pos)
                    .map(|t| antenna.pattern(t))
                    .unwrap_or(f64::NEG_INFINITY);
                if gain > best_gain {
                    best = j;
                    best_gain = gain;
                }
            }
            best
        })
        .collect()
}

/// Picks one user uniformly at random in every beam.
pub fn schedule_slot<R: Rng + ?Sized>(drop: &UserDrop, n_beams: usize, rng: &mut R) -> Result<ScheduledSlot> {
    let members = drop.members(n_beams);
    let mut selected = Vec::with_capacity(n_beams);
    for (b, m) in members.iter().enumerate() {
        if m.is_empty() {
            return Err(Error::Scheduling(format!("beam {b} has no users")));
        }
        selected.push(m[rng.random_range(0..m.len())]);
    }
    Ok(ScheduledSlot { selected, carrier: 0 })
}

/// SINR of the user in beam `b` with unit noise variance.
pub fn sinr(h: &ChannelMatrix, w: &BeamformingMatrix, tx_power: f64, b: usize) -> f64 {
    let row = h.entries.row(b);
    let mut signal = 0.0;
    let mut interference = 0.0;
    for l in 0..w.n_beams() {
        let g = (row * w.entries.column(l))[(0, 0)].norm_sqr();
        if l == b {
            signal = g;
        } else {
            interference += g;
        }
    }
    tx_power * signal / (1.0 + tx_power * interference)
}

/// SINR of every beam. Evaluated per row/column product rather than through
/// one `H W` product: near zero forcing the interference terms are pure
/// cancellation residue and blocked products round them differently.
pub fn sinr_all(h: &ChannelMatrix, w: &BeamformingMatrix, tx_power: f64) -> Vec<f64> {
    (0..h.n_users()).map(|b| sinr(h, w, tx_power, b)).collect()
}

/// Shannon spectral efficiency, bit/s/Hz. Expects `gamma >= 0`.
pub fn shannon_se(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

/// Rate over `bandwidth` Hz, bit/s.
pub fn capacity(se: f64, bandwidth: f64) -> f64 {
    se * bandwidth
}

/// Empirical CDF, `P(i) = i / n` over the sorted samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    points: Vec<(f64, f64)>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("empirical CDF of no samples".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Domain("NaN sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let points = sorted
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, (i + 1) as f64 / n))
            .collect();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|&(v, _)| v <= x);
        k as f64 / self.points.len() as f64
    }

    /// Smallest sample `x` with `F(x) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.points.len();
        let k = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        self.points[k - 1].0
    }

    pub fn min(&self) -> f64 {
        self.points[0].0
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrSample {
    pub iteration: u64,
    pub beam: usize,
    pub user: GeoPoint,
    pub sinr: f64,
    pub sinr_db: f64,
    /// bit/s/Hz
    pub se: f64,
    /// bit/s
    pub capacity: f64,
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub mode: Mode,
    pub samples: Vec<SinrSample>,
    /// Radiated power of each satellite, per iteration, W.
    pub satellite_powers: Vec<Vec<f64>>,
    pub per_satellite_power: f64,
    pub redraws: u64,
    /// Mean capacity per scheduled device, bit/s.
    pub avg_capacity: f64,
    pub sinr_db_cdf: EmpiricalCdf,
    pub se_cdf: EmpiricalCdf,
}

impl RunResults {
    fn from_samples(
        mode: Mode,
        samples: Vec<SinrSample>,
        satellite_powers: Vec<Vec<f64>>,
        per_satellite_power: f64,
        redraws: u64,
    ) -> Result<Self> {
        let db: Vec<f64> = samples.iter().map(|s| s.sinr_db).collect();
        let se: Vec<f64> = samples.iter().map(|s| s.se).collect();
        let avg_capacity = samples.iter().map(|s| s.capacity).sum::<f64>() / samples.len() as f64;
        Ok(Self {
            mode,
            sinr_db_cdf: EmpiricalCdf::new(&db)?,
            se_cdf: EmpiricalCdf::new(&se)?,
            samples,
            satellite_powers,
            per_satellite_power,
            redraws,
            avg_capacity,
        })
    }

    pub fn sinr_db_percentile(&self, p: f64) -> f64 {
        self.sinr_db_cdf.quantile(p)
    }

    /// Mean spectral efficiency of each iteration, in iteration order.
    pub fn iteration_mean_se(&self) -> Vec<f64> {
        let mut acc: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
        for s in &self.samples {
            let e = acc.entry(s.iteration).or_default();
            e.0 += s.se;
            e.1 += 1;
        }
        acc.into_values().map(|(sum, n)| sum / n as f64).collect()
    }
}

/// Precomputed scenario: swarm, channel model and power budget.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub swarm: SwarmGeometry,
    pub model: ChannelModel,
    /// `P_t`, W.
    pub per_satellite_power: f64,
    rho: f64,
    seed: u64,
    iterations: u64,
    workers: usize,
    carrier_bandwidth: f64,
}

struct IterationOutcome {
    samples: Vec<Vec<SinrSample>>,
    powers: Vec<Vec<f64>>,
    redraws: u64,
}

impl Simulator {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let params = config.link_params();
        let model = ChannelModel::new(params, config.reflector()?, config.user_antenna())?;
        let theta = model.antenna().solve_theta_3db()?;
        let swarm = crate::geometry::design_swarm(config.altitude_m, theta, config.n_satellites, config.lattice)?;
        Ok(Self {
            per_satellite_power: config.power_budget.transmit_power(&params),
            swarm,
            model,
            rho: config.rho,
            seed: config.seed,
            iterations: config.iterations,
            workers: config.workers,
            carrier_bandwidth: params.carrier_bandwidth,
        })
    }

    /// Population and schedule of one iteration, redrawing while any beam is
    /// empty. Returns the drop, the slot and the number of redraws.
    pub fn draw_slot(&self, iteration: u64) -> Result<(UserDrop, ScheduledSlot, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ iteration);
        let n = self.swarm.len();
        let mut redraws = 0;
        loop {
            let users = drop_users(&self.swarm, self.rho, &mut rng)?;
            let beam_assignment = assign_beams(&users, &self.swarm, self.model.antenna());
            let drop = UserDrop { users, beam_assignment };
            if !drop.has_empty_beam(n) {
                let slot = schedule_slot(&drop, n, &mut rng)?;
                return Ok((drop, slot, redraws));
            }
            redraws += 1;
            if redraws > MAX_REDRAWS {
                return Err(Error::Scheduling(format!(
                    "a beam stayed empty after {MAX_REDRAWS} redraws; density too low"
                )));
            }
        }
    }

    fn run_iteration(&self, iteration: u64, modes: &[Mode]) -> Result<IterationOutcome> {
        let (drop, slot, redraws) = self.draw_slot(iteration)?;
        let scheduled: Vec<GeoPoint> = slot.selected.iter().map(|&i| drop.users[i]).collect();
        let h = build_channel_matrix(&scheduled, &self.swarm, &self.model)?;
        let mut samples = Vec::with_capacity(modes.len());
        let mut powers = Vec::with_capacity(modes.len());
        for &mode in modes {
            let w = precoder(&h, self.per_satellite_power, mode)?;
            let tx = w.transmit_power(self.per_satellite_power);
            let gammas = sinr_all(&h, &w, tx);
            samples.push(
                gammas
                    .into_iter()
                    .enumerate()
                    .map(|(beam, g)| {
                        let se = shannon_se(g);
                        SinrSample {
                            iteration,
                            beam,
                            user: scheduled[beam],
                            sinr: g,
                            sinr_db: linear_to_db(g),
                            se,
                            capacity: capacity(se, self.carrier_bandwidth),
                        }
                    })
                    .collect(),
            );
            powers.push(w.satellite_powers(self.per_satellite_power));
        }
        Ok(IterationOutcome { samples, powers, redraws })
    }

    /// Runs every iteration once and evaluates all `modes` on the same drops.
    pub fn run_modes(&self, modes: &[Mode]) -> Result<BTreeMap<Mode, RunResults>> {
        if modes.is_empty() {
            return Err(Error::config("mode", "no modes requested"));
        }
        let work = || {
            (0..self.iterations)
                .into_par_iter()
                .map(|it| {
                    self.run_iteration(it, modes).map_err(|e| Error::Iteration {
                        iteration: it,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        let outcomes = if self.workers == 0 {
            work()?
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .map_err(|e| Error::config("workers", e.to_string()))?
                .install(work)?
        };

        let redraws: u64 = outcomes.iter().map(|o| o.redraws).sum();
        if redraws > 0 {
            debug!("{redraws} drops redrawn for empty beams");
        }
        let mut out = BTreeMap::new();
        for (k, &mode) in modes.iter().enumerate() {
            let mut samples = Vec::new();
            let mut powers = Vec::new();
            for o in &outcomes {
                samples.extend_from_slice(&o.samples[k]);
                powers.push(o.powers[k].clone());
            }
            let r = RunResults::from_samples(mode, samples, powers, self.per_satellite_power, redraws)?;
            out.insert(mode, r);
        }
        Ok(out)
    }
}

/// Full Monte Carlo run for the configured normalisation.
pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<RunResults> {
    let mut runs = Simulator::new(config)?.run_modes(&[config.normalization])?;
    Ok(runs.remove(&config.normalization).expect("requested mode present"))
}
