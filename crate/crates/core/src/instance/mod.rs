//! Dial-a-ride instances: requests, fleet, depot and the travel metric.
//!
//! Times are minutes in `f64` throughout; nothing is rounded on ingestion.

mod cordeau;
mod generate;
mod tighten;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cordeau::{parse_cordeau, write_cordeau};
pub use generate::{fleet_size_for, generate_synthetic, GeneratorConfig};
pub use tighten::tighten_time_windows;

pub type LocationId = usize;

/// Absolute tolerance used for metric and window sanity checks.
const CHECK_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub earliest: f64,
    pub latest: f64,
}

impl TimeWindow {
    pub fn new(earliest: f64, latest: f64) -> Self {
        TimeWindow { earliest, latest }
    }

    pub fn width(&self) -> f64 {
        self.latest - self.earliest
    }

    pub fn is_empty(&self) -> bool {
        self.latest < self.earliest
    }

    /// True if this window contains all of `other`.
    pub fn covers(&self, other: &TimeWindow) -> bool {
        self.earliest <= other.earliest && self.latest >= other.latest
    }

    pub fn clip(&self, to: &TimeWindow) -> TimeWindow {
        TimeWindow::new(self.earliest.max(to.earliest), self.latest.min(to.latest))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endpoint {
    pub location: LocationId,
    pub window: TimeWindow,
}

/// Which window the user specified: the pickup window (inbound) or the
/// drop-off window (outbound).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Inbound,
    Outbound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Request {
    /// 1-based request id.
    pub id: u32,
    pub pickup: Endpoint,
    pub dropoff: Endpoint,
    /// Requested seats `q_i`.
    pub seats: u32,
    /// Service duration `s_i`, applied at both pickup and drop-off.
    pub service: f64,
    /// Maximum ride time `L_i`.
    pub max_ride: f64,
    /// `None` until classified by [`tighten_time_windows`].
    pub direction: Option<Direction>,
    /// Direct travel time pickup -> drop-off; cached from the metric.
    pub direct_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Depot {
    pub location: LocationId,
    pub window: TimeWindow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TravelMetric {
    /// Euclidean distances; travel time is `time_factor * distance`.
    Coordinates(BTreeMap<LocationId, [f64; 2]>),
    /// Explicit square matrices indexed by location id. Times are taken
    /// verbatim, `time_factor` does not apply.
    Matrix { cost: Vec<Vec<f64>>, time: Vec<Vec<f64>> },
}

impl TravelMetric {
    fn contains(&self, loc: LocationId) -> bool {
        match self {
            TravelMetric::Coordinates(c) => c.contains_key(&loc),
            TravelMetric::Matrix { cost, .. } => loc < cost.len(),
        }
    }

    fn check(&self) -> Result<()> {
        let TravelMetric::Matrix { cost, time } = self else {
            return Ok(());
        };
        let m = cost.len();
        if time.len() != m || cost.iter().chain(time.iter()).any(|row| row.len() != m) {
            return Err(Error::InvalidInstance("metric matrices must be square and of equal size".into()));
        }
        for (name, mat) in [("cost", cost), ("time", time)] {
            for i in 0..m {
                for j in 0..m {
                    let v = mat[i][j];
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(Error::InvalidInstance(format!("{name}[{i}][{j}] = {v} is not a nonnegative number")));
                    }
                }
            }
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        if mat[i][k] > mat[i][j] + mat[j][k] + CHECK_EPS {
                            return Err(Error::InvalidInstance(format!(
                                "{name} matrix violates the triangle inequality at ({i}, {j}, {k})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub fleet_size: usize,
    /// Vehicle capacity `Q`.
    pub capacity: u32,
    pub depot: Depot,
    pub time_factor: f64,
    /// Requests ordered by id, `requests[i - 1].id == i`.
    pub requests: Vec<Request>,
    pub metric: TravelMetric,
}

impl Instance {
    /// Builds an instance, caching direct times and checking every invariant.
    pub fn new(
        fleet_size: usize,
        capacity: u32,
        depot: Depot,
        time_factor: f64,
        requests: Vec<Request>,
        metric: TravelMetric,
    ) -> Result<Self> {
        let mut inst = Instance { fleet_size, capacity, depot, time_factor, requests, metric };
        inst.metric.check()?;
        inst.refresh_direct_times()?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.requests.len()
    }

    /// Horizon `T = l_0 - e_0`.
    pub fn horizon(&self) -> f64 {
        self.depot.window.width()
    }

    /// Request by 1-based id.
    ///
    /// Panics if `id` is out of range.
    pub fn request(&self, id: u32) -> &Request {
        &self.requests[id as usize - 1]
    }

    /// Routing cost and travel time between two locations.
    pub fn travel(&self, from: LocationId, to: LocationId) -> Result<(f64, f64)> {
        for loc in [from, to] {
            if !self.metric.contains(loc) {
                return Err(Error::UnknownLocation(loc));
            }
        }
        if from == to {
            return Ok((0.0, 0.0));
        }
        Ok(match &self.metric {
            TravelMetric::Coordinates(c) => {
                let (a, b) = (c[&from], c[&to]);
                let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                (d, self.time_factor * d)
            }
            TravelMetric::Matrix { cost, time } => (cost[from][to], time[from][to]),
        })
    }

    /// Same as [`travel`](Self::travel) for locations already known to exist.
    pub(crate) fn travel_known(&self, from: LocationId, to: LocationId) -> (f64, f64) {
        self.travel(from, to).expect("location validated at construction")
    }

    /// All location ids referenced by the depot and the requests.
    pub fn locations(&self) -> Vec<LocationId> {
        let mut locs = vec![self.depot.location];
        for r in &self.requests {
            locs.push(r.pickup.location);
            locs.push(r.dropoff.location);
        }
        locs
    }

    fn refresh_direct_times(&mut self) -> Result<()> {
        for i in 0..self.requests.len() {
            let (p, d) = (self.requests[i].pickup.location, self.requests[i].dropoff.location);
            self.requests[i].direct_time = self.travel(p, d)?.1;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.requests.is_empty() {
            return bad("at least one request is required".into());
        }
        if self.fleet_size == 0 {
            return bad("fleet size must be positive".into());
        }
        if self.capacity == 0 {
            return bad("capacity must be positive".into());
        }
        if !(self.horizon() > 0.0) {
            return bad(format!("depot window {:?} has no positive duration", self.depot.window));
        }
        if !(self.time_factor > 0.0) {
            return bad("time factor must be positive".into());
        }
        if !self.metric.contains(self.depot.location) {
            return Err(Error::UnknownLocation(self.depot.location));
        }
        for (idx, r) in self.requests.iter().enumerate() {
            let id = idx as u32 + 1;
            if r.id != id {
                return bad(format!("request at position {idx} has id {}, expected {id}", r.id));
            }
            if r.seats < 1 || r.seats > self.capacity {
                return bad(format!("request {id} needs {} seats, capacity is {}", r.seats, self.capacity));
            }
            if r.pickup.location == r.dropoff.location {
                return bad(format!("request {id} has identical pickup and drop-off location ids"));
            }
            for (what, w) in [("pickup", r.pickup.window), ("drop-off", r.dropoff.window)] {
                if w.is_empty() || !w.earliest.is_finite() || !w.latest.is_finite() {
                    return bad(format!("request {id} has an empty {what} window [{}, {}]", w.earliest, w.latest));
                }
            }
            for loc in [r.pickup.location, r.dropoff.location] {
                if !self.metric.contains(loc) {
                    return Err(Error::UnknownLocation(loc));
                }
            }
            if !(r.service >= 0.0) {
                return bad(format!("request {id} has negative service duration"));
            }
            if !(r.max_ride >= 0.0) || r.max_ride + CHECK_EPS < r.direct_time {
                return bad(format!(
                    "request {id}: maximum ride time {} is below the direct travel time {}",
                    r.max_ride, r.direct_time
                ));
            }
        }
        Ok(())
    }

    /// True if every request asks for exactly one seat.
    pub fn unit_demand(&self) -> bool {
        self.requests.iter().all(|r| r.seats == 1)
    }

    /// Sub-instance with the given requests, renumbered 1.. in the given order.
    pub fn restrict(&self, ids: &[u32]) -> Result<Instance> {
        let requests = ids
            .iter()
            .enumerate()
            .map(|(k, &id)| Request { id: k as u32 + 1, ..self.request(id).clone() })
            .collect();
        Instance::new(self.fleet_size, self.capacity, self.depot, self.time_factor, requests, self.metric.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceJson::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let raw: InstanceJson = serde_json::from_str(text)?;
        raw.into_instance()
    }
}

// Canonical JSON layout.

#[derive(Serialize, Deserialize)]
struct DepotJson {
    location: LocationId,
    e: f64,
    l: f64,
}

#[derive(Serialize, Deserialize)]
struct EndpointJson {
    loc: LocationId,
    e: f64,
    l: f64,
}

#[derive(Serialize, Deserialize)]
struct RequestJson {
    id: u32,
    pickup: EndpointJson,
    dropoff: EndpointJson,
    q: u32,
    s: f64,
    #[serde(rename = "L")]
    max_ride: f64,
    direction: Option<Direction>,
}

#[derive(Serialize, Deserialize)]
enum MetricJson {
    #[serde(rename = "coords")]
    Coords(BTreeMap<LocationId, [f64; 2]>),
    #[serde(rename = "matrix")]
    Matrix { cost: Vec<Vec<f64>>, time: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    fleet_size: usize,
    capacity: u32,
    depot: DepotJson,
    time_factor: f64,
    requests: Vec<RequestJson>,
    metric: MetricJson,
}

impl From<&Instance> for InstanceJson {
    fn from(inst: &Instance) -> Self {
        let ep = |e: &Endpoint| EndpointJson { loc: e.location, e: e.window.earliest, l: e.window.latest };
        InstanceJson {
            n: inst.n(),
            fleet_size: inst.fleet_size,
            capacity: inst.capacity,
            depot: DepotJson {
                location: inst.depot.location,
                e: inst.depot.window.earliest,
                l: inst.depot.window.latest,
            },
            time_factor: inst.time_factor,
            requests: inst
                .requests
                .iter()
                .map(|r| RequestJson {
                    id: r.id,
                    pickup: ep(&r.pickup),
                    dropoff: ep(&r.dropoff),
                    q: r.seats,
                    s: r.service,
                    max_ride: r.max_ride,
                    direction: r.direction,
                })
                .collect(),
            metric: match &inst.metric {
                TravelMetric::Coordinates(c) => MetricJson::Coords(c.clone()),
                TravelMetric::Matrix { cost, time } => MetricJson::Matrix { cost: cost.clone(), time: time.clone() },
            },
        }
    }
}

impl InstanceJson {
    fn into_instance(self) -> Result<Instance> {
        if self.n != self.requests.len() {
            return Err(Error::InvalidInstance(format!(
                "n = {} but {} requests are listed",
                self.n,
                self.requests.len()
            )));
        }
        let ep = |e: EndpointJson| Endpoint { location: e.loc, window: TimeWindow::new(e.e, e.l) };
        let requests = self
            .requests
            .into_iter()
            .map(|r| Request {
                id: r.id,
                pickup: ep(r.pickup),
                dropoff: ep(r.dropoff),
                seats: r.q,
                service: r.s,
                max_ride: r.max_ride,
                direction: r.direction,
                direct_time: 0.0,
            })
            .collect();
        let metric = match self.metric {
            MetricJson::Coords(c) => TravelMetric::Coordinates(c),
            MetricJson::Matrix { cost, time } => TravelMetric::Matrix { cost, time },
        };
        let depot = Depot { location: self.depot.location, window: TimeWindow::new(self.depot.e, self.depot.l) };
        Instance::new(self.fleet_size, self.capacity, depot, self.time_factor, requests, metric)
    }
}
