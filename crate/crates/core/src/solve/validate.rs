use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Solution, StopKind, TIME_TOL};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Capacity,
    /// A request not picked up and dropped off exactly once, served by two
    /// tours, or inconsistent with the accepted set.
    Pairing,
    Precedence,
    Window,
    /// Consecutive stops closer than service plus travel time.
    Separation,
    RideTime,
    Duration,
    Fleet,
    /// Unknown request id or a schedule that does not match its tour.
    Structure,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub tour: Option<usize>,
    pub stop: Option<usize>,
    pub magnitude: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, kind: ViolationKind, tour: Option<usize>, stop: Option<usize>, magnitude: f64, detail: String) {
        self.0.push(Violation { kind, tour, stop, magnitude, detail });
    }
}

/// Checks a solution against the instance alone. Every problem is
/// reported; nothing is thrown.
pub fn validate_solution(inst: &Instance, sol: &Solution) -> ValidationReport {
    let mut out = Collector(Vec::new());
    let n = inst.n() as u32;
    let depot = inst.depot;

    let used = sol.tours.iter().filter(|t| !t.stops.is_empty()).count();
    if used > inst.fleet_size {
        out.push(
            ViolationKind::Fleet,
            None,
            None,
            (used - inst.fleet_size) as f64,
            format!("{used} tours for {} vehicles", inst.fleet_size),
        );
    }
    if sol.schedules.len() != sol.tours.len() {
        out.push(ViolationKind::Structure, None, None, 1.0, "schedule count differs from tour count".into());
    }

    let mut owner: BTreeMap<u32, usize> = BTreeMap::new();
    for (k, tour) in sol.tours.iter().enumerate() {
        let times = sol.schedules.get(k).map(|s| s.start.as_slice()).unwrap_or(&[]);
        if times.len() != tour.stops.len() {
            out.push(ViolationKind::Structure, Some(k), None, 1.0, "schedule length differs from tour length".into());
            continue;
        }
        if let Some((j, s)) = tour.stops.iter().enumerate().find(|(_, s)| s.request == 0 || s.request > n) {
            out.push(ViolationKind::Structure, Some(k), Some(j), 1.0, format!("unknown request {}", s.request));
            continue;
        }

        let mut pick: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let mut drop: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (j, s) in tour.stops.iter().enumerate() {
            match s.kind {
                StopKind::Pickup => pick.entry(s.request).or_default().push(j),
                StopKind::Dropoff => drop.entry(s.request).or_default().push(j),
            }
        }
        let requests: BTreeSet<u32> = pick.keys().chain(drop.keys()).copied().collect();
        for &i in &requests {
            if let Some(&other) = owner.get(&i) {
                out.push(ViolationKind::Pairing, Some(k), None, 1.0, format!("request {i} also served by tour {other}"));
            } else {
                owner.insert(i, k);
            }
            let (p, d) = (pick.get(&i).map_or(0, Vec::len), drop.get(&i).map_or(0, Vec::len));
            if p != 1 || d != 1 {
                let diff = (p as f64 - 1.0).abs() + (d as f64 - 1.0).abs();
                out.push(ViolationKind::Pairing, Some(k), None, diff, format!("request {i}: {p} pickups, {d} drop-offs"));
            }
            if let (Some(&pj), Some(&dj)) = (pick.get(&i).and_then(|v| v.first()), drop.get(&i).and_then(|v| v.last())) {
                if dj < pj {
                    out.push(
                        ViolationKind::Precedence,
                        Some(k),
                        Some(dj),
                        (pj - dj) as f64,
                        format!("request {i} dropped off before pickup"),
                    );
                } else {
                    let r = inst.request(i);
                    let ride = times[dj] - times[pj] - r.service;
                    if ride > r.max_ride + TIME_TOL {
                        out.push(
                            ViolationKind::RideTime,
                            Some(k),
                            Some(dj),
                            ride - r.max_ride,
                            format!("request {i} rides {ride} > {}", r.max_ride),
                        );
                    }
                }
            }
        }

        let mut load: i64 = 0;
        for (j, s) in tour.stops.iter().enumerate() {
            let r = inst.request(s.request);
            let w = match s.kind {
                StopKind::Pickup => {
                    load += r.seats as i64;
                    r.pickup.window
                }
                StopKind::Dropoff => {
                    load -= r.seats as i64;
                    r.dropoff.window
                }
            };
            if load > inst.capacity as i64 {
                out.push(
                    ViolationKind::Capacity,
                    Some(k),
                    Some(j),
                    (load - inst.capacity as i64) as f64,
                    format!("load {load} > {}", inst.capacity),
                );
            }
            let t = times[j];
            if t < w.earliest - TIME_TOL || t > w.latest + TIME_TOL {
                let off = (w.earliest - t).max(t - w.latest);
                out.push(
                    ViolationKind::Window,
                    Some(k),
                    Some(j),
                    off,
                    format!("time {t} outside [{}, {}]", w.earliest, w.latest),
                );
            }
            if j > 0 {
                let prev = &tour.stops[j - 1];
                let travel = inst.travel_known(prev.location(inst), s.location(inst)).1;
                let need = times[j - 1] + inst.request(prev.request).service + travel;
                if t < need - TIME_TOL {
                    out.push(ViolationKind::Separation, Some(k), Some(j), need - t, format!("starts at {t}, earliest {need}"));
                }
            }
        }

        if let (Some(first), Some(last)) = (tour.stops.first(), tour.stops.last()) {
            let leave = times[0] - inst.travel_known(depot.location, first.location(inst)).1;
            if leave < depot.window.earliest - TIME_TOL {
                out.push(
                    ViolationKind::Duration,
                    Some(k),
                    Some(0),
                    depot.window.earliest - leave,
                    format!("leaves the depot at {leave}"),
                );
            }
            let back = times[times.len() - 1]
                + inst.request(last.request).service
                + inst.travel_known(last.location(inst), depot.location).1;
            if back > depot.window.latest + TIME_TOL {
                out.push(
                    ViolationKind::Duration,
                    Some(k),
                    Some(times.len() - 1),
                    back - depot.window.latest,
                    format!("returns to the depot at {back}"),
                );
            }
        }
    }

    let served: BTreeSet<u32> = owner.keys().copied().collect();
    if served != sol.accepted {
        let diff = served.symmetric_difference(&sol.accepted).count();
        out.push(ViolationKind::Pairing, None, None, diff as f64, "accepted set differs from served requests".into());
    }
    ValidationReport { ok: out.0.is_empty(), violations: out.0 }
}
