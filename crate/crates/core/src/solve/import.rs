use std::collections::{BTreeMap, BTreeSet};

use super::{Solution, Stop, StopKind, Tour, OBJECTIVE_TOL, TIME_TOL};
use crate::error::{Error, Result};
use crate::event_graph::{Event, EventGraph, EventNode};
use crate::model::{evaluate_objective, MilpModel, ModelVariant, ObjectiveValues, VarRole};

/// Column values by name.
pub type Assignment = BTreeMap<String, f64>;

/// Reads a flat `name value` file. Blank lines are skipped; a line
/// `# objective <value>` (or `objective <value>`) gives the solver's claimed
/// objective, other `#` lines are comments.
pub fn parse_assignment(text: &str) -> Result<(Assignment, Option<f64>)> {
    let mut values = Assignment::new();
    let mut claimed = None;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let body = line.strip_prefix('#').map(str::trim);
        let fields: Vec<&str> = body.unwrap_or(line).split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields[0].eq_ignore_ascii_case("objective") && fields.len() == 2 {
            let v = fields[1].parse().map_err(|_| Error::parse(k + 1, format!("bad objective value `{}`", fields[1])))?;
            claimed = Some(v);
            continue;
        }
        if body.is_some() {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::parse(k + 1, "expected `name value`"));
        }
        let v: f64 = fields[1].parse().map_err(|_| Error::parse(k + 1, format!("bad value `{}`", fields[1])))?;
        if values.insert(fields[0].to_string(), v).is_some() {
            return Err(Error::parse(k + 1, format!("duplicate column `{}`", fields[0])));
        }
    }
    Ok((values, claimed))
}

/// Decoded solution together with the objective comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportOutcome {
    pub solution: Solution,
    pub recomputed: ObjectiveValues,
    pub claimed: Option<f64>,
    /// `|claimed - recomputed|` when it exceeds the objective tolerance.
    pub discrepancy: Option<f64>,
}

/// Decodes a solver assignment into tours.
///
/// Binaries are rounded; selected arcs must split into depot-anchored
/// cycles. Any selected arc left over forms a cycle that never visits the
/// depot and is reported as an error rather than dropped.
pub fn import_solution(model: &MilpModel, assignment: &Assignment, claimed: Option<f64>) -> Result<ImportOutcome> {
    let g = model.graph();
    let inst = g.instance();
    let mut selected = vec![false; g.arcs().len()];
    let mut starts = vec![None; g.nodes().len()];
    for v in model.variables() {
        let value = assignment.get(&v.name).copied();
        match v.role {
            VarRole::Arc { arc } => {
                let x = value.ok_or_else(|| Error::Import(format!("missing value for binary {}", v.name)))?;
                let r = x.round();
                if (x - r).abs() > TIME_TOL || !(r == 0.0 || r == 1.0) {
                    return Err(Error::Import(format!("{} = {x} is not binary", v.name)));
                }
                selected[arc] = r == 1.0;
            }
            VarRole::Start { node } => starts[node] = value,
            VarRole::Accept { .. } => {
                if let Some(x) = value {
                    if (x - x.round()).abs() > TIME_TOL {
                        return Err(Error::Import(format!("{} = {x} is not binary", v.name)));
                    }
                }
            }
            _ => {}
        }
    }

    // successor of each node along selected arcs
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); g.nodes().len()];
    for (a, arc) in g.arcs().iter().enumerate().filter(|(a, _)| selected[*a]) {
        succ[arc.tail].push(a);
    }
    for (v, s) in succ.iter().enumerate().skip(1) {
        if s.len() > 1 {
            return Err(Error::Import(format!("node {} has {} selected outgoing arcs", g.node(v), s.len())));
        }
    }
    let mut used = vec![false; g.arcs().len()];
    let mut tours = Vec::new();
    let mut served = BTreeSet::new();
    for &first in &succ[EventGraph::DEPOT] {
        let mut stops = Vec::new();
        let mut times = Vec::new();
        let mut a = first;
        loop {
            if used[a] {
                return Err(Error::Import("selected arcs revisit a node before returning to the depot".into()));
            }
            used[a] = true;
            let head = g.arc(a).head;
            if head == EventGraph::DEPOT {
                break;
            }
            let node = g.node(head);
            let stop = match node.event {
                Event::Pickup(i) => {
                    if !served.insert(i) {
                        return Err(Error::Import(format!("request {i} is served more than once")));
                    }
                    Stop::pickup(i)
                }
                Event::Dropoff(i) => Stop::dropoff(i),
                Event::Depot => unreachable!(),
            };
            stops.push(stop);
            times.push(starts[head].ok_or_else(|| Error::Import(format!("missing value for B{head}")))?);
            a = *succ[head]
                .first()
                .ok_or_else(|| Error::Import(format!("flow stops at node {}", g.node(head))))?;
        }
        tours.push((Tour::new(stops), times));
    }
    if let Some(a) = (0..used.len()).find(|&a| selected[a] && !used[a]) {
        return Err(Error::Import(format!(
            "selected arc {} -> {} lies on a cycle that does not visit the depot",
            g.node(g.arc(a).tail),
            g.node(g.arc(a).head)
        )));
    }
    let mut solution = Solution::from_tours(inst, tours)?;
    solution.canonicalize();
    let recomputed = evaluate_objective(inst, &solution, model.objective())?;
    solution.objective = Some(recomputed);
    let discrepancy = claimed.map(|c| (c - recomputed.total).abs()).filter(|d| *d > OBJECTIVE_TOL);
    if let Some(d) = discrepancy {
        log::warn!("claimed objective differs from the recomputed one by {d}");
    }
    Ok(ImportOutcome { solution, recomputed, claimed, discrepancy })
}

/// Maps a solution onto model columns. Inactive start variables are parked
/// where every row stays satisfied: pickups at `l_{i+}` under Model 3, all
/// other nodes at the earliest time of their window.
pub fn encode_solution(model: &MilpModel, sol: &Solution) -> Result<Assignment> {
    let g = model.graph();
    let inst = g.instance();
    let mut values = vec![0.0; model.variables().len()];
    for (v, node) in g.nodes().iter().enumerate() {
        let w = crate::model::node_window(inst, node.event);
        values[model.start_column(v)] = match (model.variant(), node.event) {
            (ModelVariant::Model3, Event::Pickup(_)) => w.latest,
            _ => w.earliest,
        };
    }
    for (tour, sched) in sol.tours.iter().zip(&sol.schedules) {
        let mut onboard: BTreeSet<u32> = BTreeSet::new();
        let mut prev = EventGraph::DEPOT;
        for (stop, &t) in tour.stops.iter().zip(&sched.start) {
            let event = match stop.kind {
                StopKind::Pickup => Event::Pickup(stop.request),
                StopKind::Dropoff => Event::Dropoff(stop.request),
            };
            let others: Vec<u32> = onboard.iter().copied().filter(|&j| j != stop.request).collect();
            let node = EventNode::new(event, others, inst.capacity);
            let id = g
                .node_id(&node)
                .ok_or_else(|| Error::InvalidSolution(format!("state {node} is not a graph node")))?;
            let arc = g
                .arc_between(prev, id)
                .ok_or_else(|| Error::InvalidSolution(format!("no arc into {node}")))?;
            values[model.arc_column(arc)] = 1.0;
            values[model.start_column(id)] = t;
            match stop.kind {
                StopKind::Pickup => onboard.insert(stop.request),
                StopKind::Dropoff => onboard.remove(&stop.request),
            };
            prev = id;
        }
        if !tour.stops.is_empty() {
            let arc = g
                .arc_between(prev, EventGraph::DEPOT)
                .ok_or_else(|| Error::InvalidSolution("tour does not end empty".into()))?;
            values[model.arc_column(arc)] = 1.0;
        }
    }
    let mut max_d = 0.0f64;
    for (k, v) in model.variables().iter().enumerate() {
        match v.role {
            VarRole::Accept { request } => values[k] = sol.accepted.contains(&request) as u8 as f64,
            VarRole::Excess { request } => {
                let d = sol.schedules.iter().find_map(|s| s.excess.get(&request).copied()).unwrap_or(0.0);
                values[k] = d;
                max_d = max_d.max(d);
            }
            _ => {}
        }
    }
    if let Some(k) = model.column("dmax") {
        values[k] = max_d;
    }
    Ok(model.variables().iter().zip(values).map(|(v, x)| (v.name.clone(), x)).collect())
}
