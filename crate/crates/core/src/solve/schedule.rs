use super::{Schedule, StopKind, Tour};
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Smallest raise that counts as progress during propagation.
const EPS: f64 = 1e-9;

/// Pre-computed difference constraints of a stop sequence.
pub(crate) struct TimingProblem {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `B[to] >= B[from] + gap`
    pub edges: Vec<(usize, usize, f64)>,
}

impl TimingProblem {
    /// `closed` adds the return to the depot; without it the problem is a
    /// relaxation of every extension of the stop sequence.
    pub(crate) fn new(tour: &Tour, inst: &Instance, closed: bool) -> Result<TimingProblem> {
        let stops = &tour.stops;
        let m = stops.len();
        let depot = inst.depot;
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);
        let mut edges = Vec::new();
        let mut pickup_at = vec![None; inst.n() + 1];
        let mut prev: Option<(usize, f64)> = None;
        for (k, s) in stops.iter().enumerate() {
            let r = inst.request(s.request);
            let w = match s.kind {
                StopKind::Pickup => r.pickup.window,
                StopKind::Dropoff => r.dropoff.window,
            };
            let loc = s.location(inst);
            lower.push(w.earliest);
            upper.push(w.latest);
            match prev {
                None => lower[k] = lower[k].max(depot.window.earliest + inst.travel(depot.location, loc)?.1),
                Some((from, service)) => {
                    let t = inst.travel(stops[from].location(inst), loc)?.1;
                    edges.push((from, k, service + t));
                }
            }
            match s.kind {
                StopKind::Pickup => pickup_at[s.request as usize] = Some(k),
                StopKind::Dropoff => {
                    let p = pickup_at[s.request as usize].ok_or_else(|| {
                        Error::InvalidSolution(format!("drop-off of request {} before its pickup", s.request))
                    })?;
                    // B_p >= B_d - L - s
                    edges.push((k, p, -(r.max_ride + r.service)));
                }
            }
            prev = Some((k, r.service));
        }
        if let (true, Some((last, service))) = (closed, prev) {
            let back = inst.travel(stops[last].location(inst), depot.location)?.1;
            upper[last] = upper[last].min(depot.window.latest - service - back);
        }
        Ok(TimingProblem { lower, upper, edges })
    }

    /// Componentwise-minimal feasible times, `None` if infeasible.
    pub(crate) fn solve(&self) -> Option<Vec<f64>> {
        let m = self.lower.len();
        let mut b = self.lower.clone();
        if b.iter().zip(&self.upper).any(|(lo, hi)| lo > &(hi + EPS)) {
            return None;
        }
        for _pass in 0..=m {
            let mut changed = false;
            for &(from, to, gap) in &self.edges {
                let need = b[from] + gap;
                if need > b[to] + EPS {
                    if need > self.upper[to] + EPS {
                        return None;
                    }
                    b[to] = need;
                    changed = true;
                }
            }
            if !changed {
                return Some(b);
            }
        }
        // still rising after m passes: a positive cycle
        None
    }
}

/// The componentwise-minimal schedule of a fixed stop sequence.
///
/// All timing rules are difference constraints, so the feasible set is
/// closed under componentwise minimum; lower bounds are propagated to a
/// fixpoint and any raise past an upper bound means infeasible. The result
/// minimizes every `d_i` of the tour at once.
pub fn minimal_schedule(tour: &Tour, inst: &Instance) -> Result<Schedule> {
    check_structure(tour, inst)?;
    let problem = TimingProblem::new(tour, inst, true)?;
    let times = problem
        .solve()
        .ok_or_else(|| Error::Infeasible(format!("no feasible schedule for tour {:?}", tour.encoding())))?;
    Schedule::from_times(tour, times, inst)
}

/// Pairing, precedence and capacity of a single tour.
pub(crate) fn check_structure(tour: &Tour, inst: &Instance) -> Result<()> {
    let n = inst.n();
    let mut state = vec![0u8; n + 1];
    let mut load = 0u32;
    for s in &tour.stops {
        let i = s.request as usize;
        if i == 0 || i > n {
            return Err(Error::InvalidSolution(format!("unknown request {i}")));
        }
        let seats = inst.request(s.request).seats;
        match (s.kind, state[i]) {
            (StopKind::Pickup, 0) => {
                state[i] = 1;
                load += seats;
                if load > inst.capacity {
                    return Err(Error::InvalidSolution(format!("load {load} exceeds capacity at pickup {i}")));
                }
            }
            (StopKind::Dropoff, 1) => {
                state[i] = 2;
                load -= seats;
            }
            _ => return Err(Error::InvalidSolution(format!("request {i} is not picked up once before one drop-off"))),
        }
    }
    if state.contains(&1) {
        return Err(Error::InvalidSolution("a request is never dropped off".into()));
    }
    Ok(())
}
