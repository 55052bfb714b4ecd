//! Solver-neutral MILP assembly over an event graph.
//!
//! Two variants share flow conservation, request service and fleet rows:
//!
//! * [`ModelVariant::Model2`] keeps plain window bounds on every `B_v` and
//!   switches ride-time rows off with a big-M on the activity of both nodes.
//! * [`ModelVariant::Model3`] moves the activation into the window rows of
//!   pickup and drop-off nodes, which lets the ride-time rows stay plain
//!   three-term differences.
//!
//! Travel-time linking is a big-M row per non-depot arc. Depot arcs get one
//! departure or return row each instead of sharing `B_0`, so every tour fits
//! the depot window on its own.

mod objective;
mod writer;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_graph::{ArcClass, Event, EventGraph};
use crate::instance::{Instance, TimeWindow};

pub use objective::{evaluate_objective, ObjectiveKind, ObjectiveSpec, ObjectiveValues, Weights};
pub use writer::{format_number, write_lp, write_lp_to, write_mps, write_mps_to};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    Model2,
    Model3,
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelVariant::Model2 => "model2",
            ModelVariant::Model3 => "model3",
        })
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model2" => Ok(ModelVariant::Model2),
            "model3" => Ok(ModelVariant::Model3),
            _ => Err(Error::Model(format!("unknown model variant `{s}`"))),
        }
    }
}

/// What a model column stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum VarRole {
    #[serde(rename = "x")]
    Arc { arc: usize },
    #[serde(rename = "B")]
    Start { node: usize },
    #[serde(rename = "p")]
    Accept { request: u32 },
    #[serde(rename = "d")]
    Excess { request: u32 },
    #[serde(rename = "dmax")]
    MaxExcess,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub role: VarRole,
    pub binary: bool,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Amount by which `values` violate the row, 0 when satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Big-M constants: one per request for the Model-2 ride-time rows and one
/// per arc for the linking rows.
#[derive(Clone, Debug, PartialEq)]
pub struct BigM {
    pub request: Vec<f64>,
    pub arc: Vec<f64>,
}

pub(crate) fn node_window(inst: &Instance, event: Event) -> TimeWindow {
    match event {
        Event::Depot => inst.depot.window,
        Event::Pickup(i) => inst.request(i).pickup.window,
        Event::Dropoff(i) => inst.request(i).dropoff.window,
    }
}

pub(crate) fn node_service(inst: &Instance, event: Event) -> f64 {
    event.request().map_or(0.0, |i| inst.request(i).service)
}

/// Smallest valid big-M values, floored at zero.
///
/// `M_i = l_{i-} - e_{i+} - L_i - s_i`; for an arc `(v, w)` between request
/// nodes `M = l_{v1} - e_{w1} + s_{v1} + t_vw`. Depot arcs use the bounds of
/// their own departure/return rows: `e_0 + t - e_{w1}` leaving the depot and
/// `l_{v1} + s_{v1} + t - l_0` returning to it.
pub fn compute_big_m(graph: &EventGraph) -> BigM {
    let inst = graph.instance();
    let request = inst
        .requests
        .iter()
        .map(|r| (r.dropoff.window.latest - r.pickup.window.earliest - r.max_ride - r.service).max(0.0))
        .collect();
    let depot = inst.depot.window;
    let arc = graph
        .arcs()
        .iter()
        .map(|a| {
            let (v, w) = (graph.node(a.tail).event, graph.node(a.head).event);
            let m = match a.class {
                ArcClass::A6 => depot.earliest + a.time - node_window(inst, w).earliest,
                ArcClass::A5 => node_window(inst, v).latest + node_service(inst, v) + a.time - depot.latest,
                _ => node_window(inst, v).latest - node_window(inst, w).earliest + node_service(inst, v) + a.time,
            };
            m.max(0.0)
        })
        .collect();
    BigM { request, arc }
}

/// A built MILP. Columns are ordered x (per arc), B (per node), then the
/// optional p, d and dmax columns; rows keep their emission order.
#[derive(Clone, Debug)]
pub struct MilpModel {
    graph: Arc<EventGraph>,
    variant: ModelVariant,
    objective: ObjectiveSpec,
    allow_denial: bool,
    variables: Vec<Variable>,
    rows: Vec<Row>,
    objective_terms: Vec<(usize, f64)>,
    objective_offset: f64,
    big_m: BigM,
    names: HashMap<String, usize>,
}

struct Builder<'g> {
    graph: &'g EventGraph,
    variables: Vec<Variable>,
    rows: Vec<Row>,
}

impl Builder<'_> {
    fn var(&mut self, name: String, role: VarRole, binary: bool, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable { name, role, binary, lower, upper });
        self.variables.len() - 1
    }

    fn row(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { name, terms, sense, rhs });
    }

    /// `coef * sum of x over arcs entering v`.
    fn inflow(&self, v: usize, coef: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.graph.in_arcs(v).iter().map(move |&a| (a, coef))
    }
}

/// Assembles Model 2 or Model 3 with the given objective.
///
/// With `allow_denial` the request-service rows read `sum x = p_i`. The
/// request-cost-excess objective requires it; every other objective with
/// denial enabled is accepted but logs a warning because rejecting all
/// requests is then optimal.
pub fn build_model(
    graph: Arc<EventGraph>,
    variant: ModelVariant,
    objective: ObjectiveSpec,
    allow_denial: bool,
) -> Result<MilpModel> {
    objective.validate()?;
    if objective.kind.penalizes_denial() && !allow_denial {
        return Err(Error::Model(format!("objective {} requires request denial to be enabled", objective.kind)));
    }
    if allow_denial && !objective.kind.penalizes_denial() {
        log::warn!("request denial with objective {}: serving nobody is optimal", objective.kind);
    }
    let g = graph.as_ref();
    let inst = g.instance();
    let n = inst.n() as u32;
    let big_m = compute_big_m(g);
    let mut b = Builder { graph: g, variables: Vec::new(), rows: Vec::new() };

    // columns
    for (a, _) in g.arcs().iter().enumerate() {
        b.var(format!("x{a}"), VarRole::Arc { arc: a }, true, 0.0, 1.0);
    }
    let b_base = b.variables.len();
    for (v, node) in g.nodes().iter().enumerate() {
        let w = node_window(inst, node.event);
        b.var(format!("B{v}"), VarRole::Start { node: v }, false, w.earliest, w.latest);
    }
    let start = |v: usize| b_base + v;
    let p_base = allow_denial.then(|| {
        let base = b.variables.len();
        for i in 1..=n {
            b.var(format!("p{i}"), VarRole::Accept { request: i }, true, 0.0, 1.0);
        }
        base
    });
    let d_base = objective.kind.uses_excess().then(|| {
        let base = b.variables.len();
        for i in 1..=n {
            b.var(format!("d{i}"), VarRole::Excess { request: i }, false, 0.0, f64::INFINITY);
        }
        base
    });
    let dmax = objective.kind.uses_max_excess().then(|| b.var("dmax".into(), VarRole::MaxExcess, false, 0.0, f64::INFINITY));

    // flow conservation
    for v in 0..g.nodes().len() {
        let mut terms: Vec<(usize, f64)> = b.inflow(v, 1.0).collect();
        terms.extend(g.out_arcs(v).map(|a| (a, -1.0)));
        b.row(format!("flow{v}"), terms, Sense::Eq, 0.0);
    }
    // each request picked up once (or p_i times)
    for i in 1..=n {
        let mut terms: Vec<(usize, f64)> = g.pickup_nodes(i).iter().flat_map(|&v| b.inflow(v, 1.0)).collect();
        match p_base {
            Some(base) => {
                terms.push((base + i as usize - 1, -1.0));
                b.row(format!("serve{i}"), terms, Sense::Eq, 0.0);
            }
            None => b.row(format!("serve{i}"), terms, Sense::Eq, 1.0),
        }
    }
    let fleet = g.out_arcs(EventGraph::DEPOT).map(|a| (a, 1.0)).collect();
    b.row("fleet".into(), fleet, Sense::Le, inst.fleet_size as f64);

    if variant == ModelVariant::Model3 {
        // inactive pickup nodes rest at l_{i+}; inactive drop-off nodes at most e_{i+} + L_i + s_i
        for i in 1..=n {
            let r = inst.request(i);
            let width = r.pickup.window.width();
            for &v in g.pickup_nodes(i) {
                let mut terms = vec![(start(v), 1.0)];
                terms.extend(b.inflow(v, width).filter(|t| t.1 != 0.0));
                b.row(format!("twp{v}"), terms, Sense::Ge, r.pickup.window.latest);
            }
            for &v in g.dropoff_nodes(i) {
                let mut terms = vec![(start(v), 1.0)];
                terms.extend(b.inflow(v, -width).filter(|t| t.1 != 0.0));
                b.row(format!("twd{v}"), terms, Sense::Le, r.pickup.window.earliest + r.max_ride + r.service);
            }
        }
    }

    // ride time
    for i in 1..=n {
        let r = inst.request(i);
        let m = big_m.request[i as usize - 1];
        for &v in g.pickup_nodes(i) {
            for &w in g.dropoff_nodes(i) {
                let mut terms = vec![(start(w), 1.0), (start(v), -1.0)];
                let mut rhs = r.max_ride + r.service;
                if variant == ModelVariant::Model2 && m > 0.0 {
                    terms.extend(b.inflow(v, m));
                    terms.extend(b.inflow(w, m));
                    rhs += 2.0 * m;
                }
                b.row(format!("rt{v}_{w}"), terms, Sense::Le, rhs);
            }
        }
    }

    // travel-time linking
    let depot = inst.depot.window;
    for (id, a) in g.arcs().iter().enumerate() {
        let m = big_m.arc[id];
        let with_m = |terms: &mut Vec<(usize, f64)>, coef: f64| {
            if m != 0.0 {
                terms.push((id, coef));
            }
        };
        match a.class {
            ArcClass::A6 => {
                // B_w >= e_0 + t - M (1 - x)
                let mut terms = vec![(start(a.head), 1.0)];
                with_m(&mut terms, -m);
                b.row(format!("dep{id}"), terms, Sense::Ge, depot.earliest + a.time - m);
            }
            ArcClass::A5 => {
                // B_v + s_v + t <= l_0 + M (1 - x)
                let s = node_service(inst, g.node(a.tail).event);
                let mut terms = vec![(start(a.tail), 1.0)];
                with_m(&mut terms, m);
                b.row(format!("ret{id}"), terms, Sense::Le, depot.latest - s - a.time + m);
            }
            _ => {
                // B_w >= B_v + s_v + t - M (1 - x)
                let s = node_service(inst, g.node(a.tail).event);
                let mut terms = vec![(start(a.head), 1.0), (start(a.tail), -1.0)];
                with_m(&mut terms, -m);
                b.row(format!("tt{id}"), terms, Sense::Ge, s + a.time - m);
            }
        }
    }

    if let Some(d_base) = d_base {
        for i in 1..=n {
            let e = inst.request(i).dropoff.window.earliest;
            for &v in g.dropoff_nodes(i) {
                // d_i >= B_v - e_{i-}
                let terms = vec![(d_base + i as usize - 1, 1.0), (start(v), -1.0)];
                b.row(format!("ex{v}"), terms, Sense::Ge, -e);
            }
        }
        if let Some(dmax) = dmax {
            for i in 1..=n {
                b.row(format!("mx{i}"), vec![(dmax, 1.0), (d_base + i as usize - 1, -1.0)], Sense::Ge, 0.0);
            }
        }
    }

    // objective
    let w = objective.weights();
    let mut objective_terms = Vec::new();
    if w.cost != 0.0 {
        objective_terms.extend(g.arcs().iter().enumerate().filter(|(_, a)| a.cost != 0.0).map(|(k, a)| (k, w.cost * a.cost)));
    }
    if let (Some(base), true) = (d_base, w.excess != 0.0) {
        objective_terms.extend((0..n as usize).map(|k| (base + k, w.excess)));
    }
    if let (Some(j), true) = (dmax, w.max_excess != 0.0) {
        objective_terms.push((j, w.max_excess));
    }
    let mut objective_offset = 0.0;
    if let (Some(base), true) = (p_base, w.denied != 0.0) {
        objective_offset = w.denied * n as f64;
        objective_terms.extend((0..n as usize).map(|k| (base + k, -w.denied)));
    }

    let mut names = HashMap::with_capacity(b.variables.len());
    for (k, v) in b.variables.iter().enumerate() {
        let previous = names.insert(v.name.clone(), k);
        assert!(previous.is_none(), "duplicate column name {}", v.name);
    }
    Ok(MilpModel {
        variables: b.variables,
        rows: b.rows,
        graph,
        variant,
        objective,
        allow_denial,
        objective_terms,
        objective_offset,
        big_m,
        names,
    })
}

/// Sidecar describing every column, written next to the model file and
/// needed to decode solver output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMapping {
    pub variant: ModelVariant,
    pub objective: ObjectiveSpec,
    pub allow_denial: bool,
    pub objective_offset: f64,
    pub nodes: usize,
    pub arcs: usize,
    pub variables: BTreeMap<String, VarRole>,
}

/// Per-variant row counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub columns: usize,
    pub binaries: usize,
    pub rows: usize,
    pub ride_time_rows: usize,
    pub ride_time_terms: usize,
    pub window_rows: usize,
    pub linking_rows: usize,
}

impl MilpModel {
    pub fn graph(&self) -> &EventGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<EventGraph> {
        Arc::clone(&self.graph)
    }

    pub fn instance(&self) -> &Instance {
        self.graph.instance()
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn allow_denial(&self) -> bool {
        self.allow_denial
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective_terms(&self) -> &[(usize, f64)] {
        &self.objective_terms
    }

    /// Constant added to the linear objective (gamma * n for the
    /// request-cost-excess objective).
    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn big_m(&self) -> &BigM {
        &self.big_m
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    /// Column of `x_a`; arcs come first so this is the identity.
    pub fn arc_column(&self, arc: usize) -> usize {
        arc
    }

    pub fn start_column(&self, node: usize) -> usize {
        self.graph.arcs().len() + node
    }

    /// Column values in model order from a name map; absent names count as 0.
    pub fn dense(&self, assignment: &BTreeMap<String, f64>) -> Vec<f64> {
        self.variables.iter().map(|v| assignment.get(&v.name).copied().unwrap_or(0.0)).collect()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset + self.objective_terms.iter().map(|&(j, c)| c * values[j]).sum::<f64>()
    }

    /// Names of rows, bounds or integrality conditions violated by more than `tol`.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (v, &x) in self.variables.iter().zip(values) {
            let off = (v.lower - x).max(x - v.upper).max(0.0);
            if off > tol {
                out.push((format!("bound:{}", v.name), off));
            }
            if v.binary && (x - x.round()).abs() > tol {
                out.push((format!("integrality:{}", v.name), (x - x.round()).abs()));
            }
        }
        for r in &self.rows {
            let off = r.violation(values);
            if off > tol {
                out.push((r.name.clone(), off));
            }
        }
        out
    }

    pub fn mapping(&self) -> ModelMapping {
        ModelMapping {
            variant: self.variant,
            objective: self.objective,
            allow_denial: self.allow_denial,
            objective_offset: self.objective_offset,
            nodes: self.graph.nodes().len(),
            arcs: self.graph.arcs().len(),
            variables: self.variables.iter().map(|v| (v.name.clone(), v.role)).collect(),
        }
    }

    pub fn census(&self) -> Census {
        let mut c = Census {
            columns: self.variables.len(),
            binaries: self.variables.iter().filter(|v| v.binary).count(),
            rows: self.rows.len(),
            ..Census::default()
        };
        for r in &self.rows {
            if r.name.starts_with("rt") {
                c.ride_time_rows += 1;
                c.ride_time_terms += r.terms.len();
            } else if r.name.starts_with("twp") || r.name.starts_with("twd") {
                c.window_rows += 1;
            } else if r.name.starts_with("tt") || r.name.starts_with("dep") || r.name.starts_with("ret") {
                c.linking_rows += 1;
            }
        }
        c
    }

    /// Default file stem: `<instance>.<variant>.<objective>`.
    pub fn file_stem(&self, instance_name: &str) -> String {
        format!("{instance_name}.{}.{}", self.variant, self.objective.kind)
    }
}
