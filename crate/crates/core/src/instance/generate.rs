use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{tighten_time_windows, Depot, Direction, Endpoint, Instance, Request, TimeWindow, TravelMetric};
use crate::error::{Error, Result};

/// Fleet sizes of the synthetic city benchmark, keyed by (capacity, requests).
const FLEET_TABLE: [(u32, usize, usize); 14] = [
    (3, 10, 6),
    (3, 15, 7),
    (3, 20, 9),
    (3, 25, 9),
    (3, 30, 11),
    (3, 35, 12),
    (3, 40, 15),
    (6, 10, 6),
    (6, 15, 9),
    (6, 20, 11),
    (6, 25, 15),
    (6, 30, 16),
    (6, 35, 18),
    (6, 40, 20),
];

/// Fleet size for a synthetic instance; `ceil(n / 2)` outside the table.
pub fn fleet_size_for(capacity: u32, n: usize) -> usize {
    FLEET_TABLE
        .iter()
        .find(|&&(q, m, _)| q == capacity && m == n)
        .map(|&(_, _, k)| k)
        .unwrap_or(n.div_ceil(2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    /// 3 (one seat per request) or 6 (1..=6 seats per request).
    pub capacity: u32,
    pub seed: u64,
    /// Side of the square service area, in cost units (km).
    pub area_side: f64,
    pub horizon: f64,
    pub window_length: f64,
    /// Earliest pickups are drawn from `first, first + step, ..., last`.
    pub pickup_first: f64,
    pub pickup_last: f64,
    pub pickup_step: f64,
    pub ride_time_factor: f64,
    pub time_factor: f64,
    /// Overrides the fleet-size table when set.
    pub fleet_size: Option<usize>,
}

impl GeneratorConfig {
    pub fn new(n: usize, capacity: u32, seed: u64) -> Self {
        GeneratorConfig {
            n,
            capacity,
            seed,
            area_side: 6.0,
            horizon: 150.0,
            window_length: 15.0,
            pickup_first: 15.0,
            pickup_last: 60.0,
            pickup_step: 5.0,
            ride_time_factor: 1.5,
            time_factor: 4.0,
            fleet_size: None,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if self.capacity != 3 && self.capacity != 6 {
            return bad("capacity must be 3 or 6");
        }
        let positive = [
            self.area_side,
            self.horizon,
            self.window_length,
            self.pickup_step,
            self.ride_time_factor,
            self.time_factor,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return bad("lengths, factors and the horizon must be positive");
        }
        if self.ride_time_factor < 1.0 {
            return bad("ride time factor below 1 makes every request infeasible");
        }
        if !(self.pickup_first >= 0.0 && self.pickup_last >= self.pickup_first) {
            return bad("pickup tick range is empty");
        }
        if self.fleet_size == Some(0) {
            return bad("fleet size must be positive");
        }
        Ok(())
    }
}

/// Samples a synthetic inbound instance. The same config always yields the
/// same instance.
pub fn generate_synthetic(cfg: &GeneratorConfig) -> Result<Instance> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let side = cfg.area_side;
    let ticks = ((cfg.pickup_last - cfg.pickup_first) / cfg.pickup_step).floor() as u32;

    let mut coords = BTreeMap::new();
    coords.insert(0, [side / 2.0, side / 2.0]);
    let mut requests = Vec::with_capacity(n);
    for k in 1..=n {
        let pickup = [rng.random_range(0.0..side), rng.random_range(0.0..side)];
        let dropoff = [rng.random_range(0.0..side), rng.random_range(0.0..side)];
        let earliest = cfg.pickup_first + cfg.pickup_step * rng.random_range(0..=ticks) as f64;
        let seats = if cfg.capacity == 3 { 1 } else { rng.random_range(1..=6) };
        coords.insert(k, pickup);
        coords.insert(n + k, dropoff);
        let direct = cfg.time_factor * (pickup[0] - dropoff[0]).hypot(pickup[1] - dropoff[1]);
        requests.push(Request {
            id: k as u32,
            pickup: Endpoint { location: k, window: TimeWindow::new(earliest, earliest + cfg.window_length) },
            dropoff: Endpoint { location: n + k, window: TimeWindow::new(0.0, cfg.horizon) },
            seats,
            service: seats as f64,
            max_ride: cfg.ride_time_factor * direct,
            direction: Some(Direction::Inbound),
            direct_time: 0.0,
        });
    }
    let depot = Depot { location: 0, window: TimeWindow::new(0.0, cfg.horizon) };
    let fleet = cfg.fleet_size.unwrap_or_else(|| fleet_size_for(cfg.capacity, n));
    let inst = Instance::new(fleet, cfg.capacity, depot, cfg.time_factor, requests, TravelMetric::Coordinates(coords))?;
    tighten_time_windows(&inst)
}
