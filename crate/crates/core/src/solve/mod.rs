//! Tours, schedules and solutions, plus the exact oracle, solver-output
//! import and the instance-level validator.

mod import;
mod oracle;
mod schedule;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, LocationId};
use crate::model::ObjectiveValues;

pub use import::{encode_solution, import_solution, parse_assignment, Assignment, ImportOutcome};
pub use oracle::{oracle_solve, DEFAULT_ORACLE_LIMIT};
pub use schedule::minimal_schedule;
pub use validate::{validate_solution, ValidationReport, Violation, ViolationKind};

/// Absolute tolerance for timing feasibility and binary rounding.
pub const TIME_TOL: f64 = 1e-6;
/// Tolerance for objective agreement.
pub const OBJECTIVE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopKind {
    Pickup,
    Dropoff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stop {
    pub request: u32,
    pub kind: StopKind,
}

impl Stop {
    pub fn pickup(request: u32) -> Self {
        Stop { request, kind: StopKind::Pickup }
    }

    pub fn dropoff(request: u32) -> Self {
        Stop { request, kind: StopKind::Dropoff }
    }

    pub fn location(&self, inst: &Instance) -> LocationId {
        let r = inst.request(self.request);
        match self.kind {
            StopKind::Pickup => r.pickup.location,
            StopKind::Dropoff => r.dropoff.location,
        }
    }

    /// `2 * request + (1 for drop-off)`; orders tours canonically.
    pub fn code(&self) -> u32 {
        2 * self.request + (self.kind == StopKind::Dropoff) as u32
    }
}

/// A vehicle route; the depot at both ends is implicit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour {
    pub stops: Vec<Stop>,
}

impl Tour {
    pub fn new(stops: Vec<Stop>) -> Self {
        Tour { stops }
    }

    /// Depot, every stop, depot.
    pub fn locations(&self, inst: &Instance) -> Vec<LocationId> {
        let depot = inst.depot.location;
        let mut out = Vec::with_capacity(self.stops.len() + 2);
        out.push(depot);
        out.extend(self.stops.iter().map(|s| s.location(inst)));
        out.push(depot);
        out
    }

    pub fn requests(&self) -> BTreeSet<u32> {
        self.stops.iter().map(|s| s.request).collect()
    }

    pub fn encoding(&self) -> Vec<u32> {
        self.stops.iter().map(Stop::code).collect()
    }

    pub fn cost(&self, inst: &Instance) -> Result<f64> {
        let locs = self.locations(inst);
        let mut total = 0.0;
        for w in locs.windows(2) {
            total += inst.travel(w[0], w[1])?.0;
        }
        Ok(total)
    }
}

/// Service start per stop of one tour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: Vec<f64>,
    /// `d_i` of each request dropped off on the tour.
    pub excess: BTreeMap<u32, f64>,
    /// Depot departure to depot return.
    pub makespan: f64,
}

impl Schedule {
    /// Derives excess and makespan from given service starts.
    pub fn from_times(tour: &Tour, start: Vec<f64>, inst: &Instance) -> Result<Schedule> {
        if start.len() != tour.stops.len() {
            return Err(Error::InvalidSolution("schedule length differs from tour length".into()));
        }
        for s in &tour.stops {
            if s.request == 0 || s.request as usize > inst.n() {
                return Err(Error::InvalidSolution(format!("unknown request {}", s.request)));
            }
        }
        let mut excess = BTreeMap::new();
        for (s, &t) in tour.stops.iter().zip(&start) {
            if s.kind == StopKind::Dropoff {
                excess.insert(s.request, (t - inst.request(s.request).dropoff.window.earliest).max(0.0));
            }
        }
        let makespan = match (tour.stops.first(), tour.stops.last()) {
            (Some(first), Some(last)) => {
                let depot = inst.depot.location;
                let out = inst.travel(depot, first.location(inst))?.1;
                let back = inst.travel(last.location(inst), depot)?.1;
                let service = inst.request(last.request).service;
                start[start.len() - 1] + service + back - (start[0] - out)
            }
            _ => 0.0,
        };
        Ok(Schedule { start, excess, makespan })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub tours: Vec<Tour>,
    pub schedules: Vec<Schedule>,
    pub accepted: BTreeSet<u32>,
    pub objective: Option<ObjectiveValues>,
}

#[derive(Serialize, Deserialize)]
struct StopJson {
    req: u32,
    kind: StopKind,
    time: f64,
}

#[derive(Serialize, Deserialize)]
struct SolutionJson {
    tours: Vec<Vec<StopJson>>,
    accepted: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    objective: Option<ObjectiveValues>,
}

impl Solution {
    pub fn empty() -> Self {
        Solution { tours: Vec::new(), schedules: Vec::new(), accepted: BTreeSet::new(), objective: None }
    }

    /// Builds a solution from tours and service starts; accepted requests
    /// are the ones appearing in the tours.
    pub fn from_tours(inst: &Instance, tours: Vec<(Tour, Vec<f64>)>) -> Result<Solution> {
        let mut sol = Solution::empty();
        for (tour, times) in tours {
            sol.schedules.push(Schedule::from_times(&tour, times, inst)?);
            sol.accepted.extend(tour.requests());
            sol.tours.push(tour);
        }
        Ok(sol)
    }

    /// Canonical order: tours sorted by their stop encoding.
    pub fn canonicalize(&mut self) {
        let mut pairs: Vec<(Tour, Schedule)> = self.tours.drain(..).zip(self.schedules.drain(..)).collect();
        pairs.sort_by(|a, b| a.0.encoding().cmp(&b.0.encoding()));
        for (t, s) in pairs {
            self.tours.push(t);
            self.schedules.push(s);
        }
    }

    pub fn to_json(&self) -> String {
        let doc = SolutionJson {
            tours: self
                .tours
                .iter()
                .zip(&self.schedules)
                .map(|(t, s)| {
                    t.stops.iter().zip(&s.start).map(|(st, &time)| StopJson { req: st.request, kind: st.kind, time }).collect()
                })
                .collect(),
            accepted: self.accepted.iter().copied().collect(),
            objective: self.objective,
        };
        serde_json::to_string_pretty(&doc).expect("solution serializes")
    }

    /// Reads a solution; excess and makespan are recomputed from `inst`.
    pub fn from_json(text: &str, inst: &Instance) -> Result<Solution> {
        let doc: SolutionJson = serde_json::from_str(text)?;
        let mut sol = Solution::empty();
        for t in doc.tours {
            let tour = Tour::new(t.iter().map(|s| Stop { request: s.req, kind: s.kind }).collect());
            let times = t.iter().map(|s| s.time).collect();
            sol.schedules.push(Schedule::from_times(&tour, times, inst)?);
            sol.tours.push(tour);
        }
        sol.accepted = doc.accepted.into_iter().collect();
        sol.objective = doc.objective;
        Ok(sol)
    }
}
