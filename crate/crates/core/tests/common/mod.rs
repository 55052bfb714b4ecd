//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use evdarp::instance::generate_synthetic;
use evdarp::{oracle_solve, ObjectiveKind, ObjectiveSpec, Depot, Endpoint, GeneratorConfig, Instance, Request, TimeWindow, TravelMetric};

/// Three requests, Q = 3, seats (1, 1, 3): requests 1 and 2 may share the
/// vehicle, request 3 fills it alone.
pub fn example_one() -> Instance {
    let mut coords = BTreeMap::new();
    for (loc, xy) in [[0.0, 0.0], [1.0, 2.0], [2.0, 1.0], [-2.0, 1.0], [4.0, 4.0], [5.0, 2.0], [-3.0, 4.0]]
        .into_iter()
        .enumerate()
    {
        coords.insert(loc, xy);
    }
    let requests = [1, 1, 3]
        .into_iter()
        .enumerate()
        .map(|(k, q)| {
            let id = k as u32 + 1;
            Request {
                id,
                pickup: Endpoint { location: id as usize, window: TimeWindow::new(0.0, 100.0) },
                dropoff: Endpoint { location: id as usize + 3, window: TimeWindow::new(0.0, 100.0) },
                seats: q,
                service: 1.0,
                max_ride: 30.0,
                direction: None,
                direct_time: 0.0,
            }
        })
        .collect();
    let depot = Depot { location: 0, window: TimeWindow::new(0.0, 100.0) };
    Instance::new(2, 3, depot, 1.0, requests, TravelMetric::Coordinates(coords)).unwrap()
}

/// Unit-demand instance with `n` requests on a line; only the graph shape
/// matters for the count checks.
pub fn unit_line(n: usize, q: u32) -> Instance {
    let mut coords = BTreeMap::new();
    coords.insert(0, [0.0, 0.0]);
    let mut requests = Vec::new();
    for k in 1..=n {
        coords.insert(k, [k as f64, 1.0]);
        coords.insert(n + k, [k as f64, 2.0]);
        requests.push(Request {
            id: k as u32,
            pickup: Endpoint { location: k, window: TimeWindow::new(0.0, 100.0) },
            dropoff: Endpoint { location: n + k, window: TimeWindow::new(0.0, 100.0) },
            seats: 1,
            service: 0.0,
            max_ride: 50.0,
            direction: None,
            direct_time: 0.0,
        });
    }
    let depot = Depot { location: 0, window: TimeWindow::new(0.0, 100.0) };
    Instance::new(1, q, depot, 1.0, requests, TravelMetric::Coordinates(coords)).unwrap()
}

/// Vehicle state as plain data: event (0 depot, +i pickup, -i drop-off)
/// and the set of other riders.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct State {
    pub event: i64,
    pub others: BTreeSet<u32>,
}

impl State {
    fn before(&self) -> BTreeSet<u32> {
        let mut s = self.others.clone();
        if self.event < 0 {
            s.insert((-self.event) as u32);
        }
        s
    }

    fn after(&self) -> BTreeSet<u32> {
        let mut s = self.others.clone();
        if self.event > 0 {
            s.insert(self.event as u32);
        }
        s
    }
}

/// Every admissible vehicle state, by exhaustive filtering of all subsets.
pub fn brute_states(seats: &[u32], q: u32) -> Vec<State> {
    let n = seats.len() as u32;
    let mut out = vec![State { event: 0, others: BTreeSet::new() }];
    for i in 1..=n {
        for mask in 0u32..(1 << n) {
            if mask & (1 << (i - 1)) != 0 {
                continue;
            }
            let others: BTreeSet<u32> = (1..=n).filter(|j| mask & (1 << (j - 1)) != 0).collect();
            let load: u32 = others.iter().map(|&j| seats[j as usize - 1]).sum::<u32>() + seats[i as usize - 1];
            if others.len() < q as usize && load <= q {
                out.push(State { event: i as i64, others: others.clone() });
                out.push(State { event: -(i as i64), others });
            }
        }
    }
    out
}

/// A transition is an arc when the load leaving `v` equals the load
/// arriving at `w`; the depot is never followed by itself or a drop-off,
/// and a drop-off is never followed by the same request's pickup.
pub fn brute_arc(v: &State, w: &State) -> bool {
    if v.event == 0 && w.event == 0 {
        return false;
    }
    if v.event < 0 && w.event == -v.event {
        return false;
    }
    if v.after() != w.before() {
        return false;
    }
    // a new pickup must be a request not yet on board
    !(w.event > 0 && v.after().contains(&(w.event as u32)))
}

pub fn brute_counts(seats: &[u32], q: u32) -> (usize, usize) {
    let states = brute_states(seats, q);
    let arcs = states.iter().map(|v| states.iter().filter(|w| brute_arc(v, w)).count()).sum();
    (states.len(), arcs)
}

/// The 50 generated instances shared by the solver cross checks: the first
/// seeds whose requests can all be served by the table fleet.
pub fn cross_check_instances() -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < 50 {
        seed += 1;
        let n = 2 + (seed as usize % 5);
        let q = if seed % 2 == 0 { 3 } else { 6 };
        let inst = generate_synthetic(&GeneratorConfig::new(n, q, seed)).unwrap();
        let obj = ObjectiveSpec::new(ObjectiveKind::Cost, n);
        if oracle_solve(&inst, &obj, false, 6).is_ok() {
            out.push((format!("g{seed}-n{n}-q{q}"), inst));
        }
    }
    out
}

/// Small instances with a single vehicle, so not every request fits.
pub fn denial_instances(count: usize) -> Vec<Instance> {
    (0..count as u64)
        .map(|seed| {
            let n = 3 + (seed as usize % 2);
            let mut cfg = GeneratorConfig::new(n, if seed % 3 == 0 { 6 } else { 3 }, 1000 + seed);
            cfg.fleet_size = Some(1);
            generate_synthetic(&cfg).unwrap()
        })
        .collect()
}

/// External MILP solver command: `EVDARP_MILP_SOLVER` (a program taking MPS
/// paths and writing `<stem>.sol.txt` next to each), else the bundled HiGHS
/// script when `python3` can import `highspy`.
pub fn milp_solver() -> Option<Vec<String>> {
    if let Ok(cmd) = std::env::var("EVDARP_MILP_SOLVER") {
        return Some(cmd.split_whitespace().map(String::from).collect());
    }
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../python/solve_mps.py");
    let probe = Command::new("python3").args(["-c", "import highspy"]).output().ok()?;
    if !probe.status.success() || !script.exists() {
        return None;
    }
    Some(vec!["python3".into(), script.to_string_lossy().into_owned()])
}

/// Solves every model in parallel batches; returns the assignment path per
/// model, in input order.
pub fn run_solver(cmd: &[String], models: &[PathBuf]) -> Vec<PathBuf> {
    let workers = std::thread::available_parallelism().map_or(2, |n| n.get()).min(8);
    let chunk = models.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        for part in models.chunks(chunk) {
            s.spawn(move || {
                let status = Command::new(&cmd[0]).args(&cmd[1..]).args(part).output().expect("solver starts");
                assert!(status.status.success(), "solver failed: {}", String::from_utf8_lossy(&status.stderr));
            });
        }
    });
    models.iter().map(|p| p.with_extension("sol.txt")).collect()
}
