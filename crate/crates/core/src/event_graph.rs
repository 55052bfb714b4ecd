//! The event graph: nodes are occupancy tuples tagged with the most recent
//! pickup or drop-off, arcs are the feasible transitions between them.
//!
//! A node `(i+, v_2, ..., v_Q)` says request `i` was just picked up while
//! `v_2 > v_3 > ...` (zero padded) were already seated. `(i-, ...)` says `i`
//! was just dropped off and the listed requests remain. Capacity, pairing and
//! precedence are encoded by which tuples and transitions exist, so every
//! depot-anchored cycle is a load-feasible tour.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write};
use std::ops::Range;

use serde::Serialize;

use crate::instance::{Instance, LocationId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Event {
    Depot,
    Pickup(u32),
    Dropoff(u32),
}

impl Event {
    pub fn request(self) -> Option<u32> {
        match self {
            Event::Depot => None,
            Event::Pickup(i) | Event::Dropoff(i) => Some(i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventNode {
    pub event: Event,
    /// The remaining `Q - 1` tuple components: strictly descending request
    /// ids followed by zeros.
    pub onboard: Vec<u32>,
}

impl EventNode {
    /// Node for `event` with the given other riders, sorted and zero padded.
    pub fn new(event: Event, mut riders: Vec<u32>, capacity: u32) -> Self {
        riders.sort_unstable_by(|a, b| b.cmp(a));
        riders.resize(capacity as usize - 1, 0);
        EventNode { event, onboard: riders }
    }

    pub fn depot(capacity: u32) -> Self {
        EventNode { event: Event::Depot, onboard: vec![0; capacity as usize - 1] }
    }

    /// Non-zero entries of the remaining components.
    pub fn riders(&self) -> impl Iterator<Item = u32> + '_ {
        self.onboard.iter().copied().take_while(|&v| v != 0)
    }

    pub fn rider_count(&self) -> usize {
        self.riders().count()
    }

    /// Requests in the vehicle right after this event.
    pub fn load_after(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.riders().collect();
        if let Event::Pickup(i) = self.event {
            v.push(i);
        }
        v
    }
}

impl fmt::Display for EventNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.event {
            Event::Depot => write!(f, "(0")?,
            Event::Pickup(i) => write!(f, "({i}+")?,
            Event::Dropoff(i) => write!(f, "({i}-")?,
        }
        for v in &self.onboard {
            write!(f, ",{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ArcClass {
    /// pickup -> drop-off
    A1,
    /// pickup -> pickup
    A2,
    /// drop-off -> pickup
    A3,
    /// drop-off -> drop-off
    A4,
    /// drop-off -> depot
    A5,
    /// depot -> pickup
    A6,
}

impl ArcClass {
    pub const ALL: [ArcClass; 6] = [ArcClass::A1, ArcClass::A2, ArcClass::A3, ArcClass::A4, ArcClass::A5, ArcClass::A6];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["A1", "A2", "A3", "A4", "A5", "A6"][self.index()]
    }

    pub fn touches_depot(self) -> bool {
        matches!(self, ArcClass::A5 | ArcClass::A6)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventArc {
    pub tail: usize,
    pub head: usize,
    pub class: ArcClass,
    pub cost: f64,
    pub time: f64,
}

/// Event graph over an owned copy of its instance.
///
/// Node 0 is the depot; the remaining nodes are ordered by (location, event,
/// tuple). Arcs are sorted by (tail, head) so the outgoing arcs of a node
/// form a contiguous range; incoming arcs are indexed separately.
#[derive(Clone, Debug)]
pub struct EventGraph {
    instance: Instance,
    nodes: Vec<EventNode>,
    arcs: Vec<EventArc>,
    out_offsets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<usize>,
    pickup_nodes: Vec<Vec<usize>>,
    dropoff_nodes: Vec<Vec<usize>>,
    index: HashMap<EventNode, usize>,
}

/// Subsets of `others` (given descending) of at most `room` riders whose
/// seats fit into `free`.
fn companion_sets(others: &[u32], seats: &[u32], room: usize, free: u32, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    out.push(cur.clone());
    if room == 0 {
        return;
    }
    for (k, &j) in others.iter().enumerate() {
        let q = seats[j as usize - 1];
        if q <= free {
            cur.push(j);
            companion_sets(&others[k + 1..], seats, room - 1, free - q, out, cur);
            cur.pop();
        }
    }
}

impl EventGraph {
    pub fn build(instance: &Instance) -> EventGraph {
        let inst = instance.clone();
        let cap = inst.capacity;
        let n = inst.n() as u32;
        let seats: Vec<u32> = inst.requests.iter().map(|r| r.seats).collect();

        let mut nodes = Vec::new();
        for i in 1..=n {
            let others: Vec<u32> = (1..=n).rev().filter(|&j| j != i).collect();
            let mut sets = Vec::new();
            companion_sets(&others, &seats, cap as usize - 1, cap - seats[i as usize - 1], &mut sets, &mut Vec::new());
            for s in sets {
                nodes.push(EventNode::new(Event::Pickup(i), s.clone(), cap));
                nodes.push(EventNode::new(Event::Dropoff(i), s, cap));
            }
        }
        let location = |node: &EventNode| location_in(&inst, node);
        nodes.sort_by(|a, b| (location(a), a.event, &a.onboard).cmp(&(location(b), b.event, &b.onboard)));
        nodes.insert(0, EventNode::depot(cap));

        let index: HashMap<EventNode, usize> = nodes.iter().cloned().enumerate().map(|(k, v)| (v, k)).collect();
        let mut pickup_nodes = vec![Vec::new(); n as usize];
        let mut dropoff_nodes = vec![Vec::new(); n as usize];
        for (k, v) in nodes.iter().enumerate() {
            match v.event {
                Event::Pickup(i) => pickup_nodes[i as usize - 1].push(k),
                Event::Dropoff(i) => dropoff_nodes[i as usize - 1].push(k),
                Event::Depot => {}
            }
        }

        let mut arcs = Vec::new();
        let mut out_offsets = Vec::with_capacity(nodes.len() + 1);
        let mut heads: Vec<(usize, ArcClass)> = Vec::new();
        for (tail, v) in nodes.iter().enumerate() {
            out_offsets.push(arcs.len());
            heads.clear();
            let mut push = |node: EventNode, class: ArcClass| {
                if let Some(&h) = index.get(&node) {
                    heads.push((h, class));
                }
            };
            let riders: Vec<u32> = v.riders().collect();
            match v.event {
                Event::Depot => {
                    for j in 1..=n {
                        push(EventNode::new(Event::Pickup(j), vec![], cap), ArcClass::A6);
                    }
                }
                Event::Pickup(i) => {
                    let mut seated = riders.clone();
                    seated.push(i);
                    for &j in &seated {
                        let rest = seated.iter().copied().filter(|&k| k != j).collect();
                        push(EventNode::new(Event::Dropoff(j), rest, cap), ArcClass::A1);
                    }
                    // a pickup can follow only while a tuple slot is still free
                    if riders.len() + 2 <= cap as usize {
                        for j in (1..=n).filter(|j| !seated.contains(j)) {
                            push(EventNode::new(Event::Pickup(j), seated.clone(), cap), ArcClass::A2);
                        }
                    }
                }
                Event::Dropoff(i) => {
                    for j in (1..=n).filter(|&j| j != i && !riders.contains(&j)) {
                        push(EventNode::new(Event::Pickup(j), riders.clone(), cap), ArcClass::A3);
                    }
                    for &j in &riders {
                        let rest = riders.iter().copied().filter(|&k| k != j).collect();
                        push(EventNode::new(Event::Dropoff(j), rest, cap), ArcClass::A4);
                    }
                    if riders.is_empty() {
                        heads.push((0, ArcClass::A5));
                    }
                }
            }
            heads.sort_unstable();
            let from = location_in(&inst, v);
            for &(head, class) in heads.iter() {
                let (cost, time) = inst.travel_known(from, location_in(&inst, &nodes[head]));
                arcs.push(EventArc { tail, head, class, cost, time });
            }
        }
        out_offsets.push(arcs.len());

        let mut in_count = vec![0usize; nodes.len() + 1];
        for a in &arcs {
            in_count[a.head + 1] += 1;
        }
        for k in 1..in_count.len() {
            in_count[k] += in_count[k - 1];
        }
        let in_offsets = in_count.clone();
        let mut fill = in_count;
        let mut in_arcs = vec![0; arcs.len()];
        for (id, a) in arcs.iter().enumerate() {
            in_arcs[fill[a.head]] = id;
            fill[a.head] += 1;
        }

        EventGraph { instance: inst, nodes, arcs, out_offsets, in_offsets, in_arcs, pickup_nodes, dropoff_nodes, index }
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn nodes(&self) -> &[EventNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[EventArc] {
        &self.arcs
    }

    pub fn node(&self, id: usize) -> &EventNode {
        &self.nodes[id]
    }

    pub fn arc(&self, id: usize) -> &EventArc {
        &self.arcs[id]
    }

    pub const DEPOT: usize = 0;

    pub fn node_id(&self, node: &EventNode) -> Option<usize> {
        self.index.get(node).copied()
    }

    /// Ids of the arcs leaving `v`.
    pub fn out_arcs(&self, v: usize) -> Range<usize> {
        self.out_offsets[v]..self.out_offsets[v + 1]
    }

    /// Ids of the arcs entering `v`.
    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.in_arcs[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn arc_between(&self, tail: usize, head: usize) -> Option<usize> {
        let range = self.out_arcs(tail);
        let slice = &self.arcs[range.clone()];
        slice.binary_search_by_key(&head, |a| a.head).ok().map(|k| range.start + k)
    }

    /// Pickup nodes `V_{i+}` of request `i` (1-based).
    pub fn pickup_nodes(&self, request: u32) -> &[usize] {
        &self.pickup_nodes[request as usize - 1]
    }

    /// Drop-off nodes `V_{i-}` of request `i` (1-based).
    pub fn dropoff_nodes(&self, request: u32) -> &[usize] {
        &self.dropoff_nodes[request as usize - 1]
    }

    pub fn location_of(&self, node: usize) -> LocationId {
        location_in(&self.instance, &self.nodes[node])
    }

    pub fn class_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for a in &self.arcs {
            counts[a.class.index()] += 1;
        }
        counts
    }

    pub fn stats(&self) -> GraphStats {
        let counts = self.class_counts();
        let (n, q) = (self.instance.n() as u64, self.instance.capacity as u64);
        let uniform = self.instance.unit_demand();
        GraphStats {
            nodes: self.nodes.len(),
            arcs: self.arcs.len(),
            arcs_by_class: ArcClass::ALL.iter().map(|c| (c.label().to_string(), counts[c.index()])).collect(),
            closed_form_nodes: uniform.then(|| node_count_closed_form(n, q)),
            closed_form_arcs: uniform.then(|| arc_count_closed_form(n, q)),
        }
    }

    /// Graphviz rendering; nodes are labelled with their tuples, arcs with their class.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph event_graph {\n");
        for (k, v) in self.nodes.iter().enumerate() {
            writeln!(out, "  n{k} [label=\"{v}\"];").unwrap();
        }
        for a in &self.arcs {
            writeln!(out, "  n{} -> n{} [label=\"{}\"];", a.tail, a.head, a.class.label()).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

fn location_in(inst: &Instance, node: &EventNode) -> LocationId {
    match node.event {
        Event::Depot => inst.depot.location,
        Event::Pickup(i) => inst.request(i).pickup.location,
        Event::Dropoff(i) => inst.request(i).dropoff.location,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub arcs: usize,
    pub arcs_by_class: BTreeMap<String, usize>,
    /// Closed-form sizes, only meaningful when every request has one seat.
    pub closed_form_nodes: Option<u64>,
    pub closed_form_arcs: Option<u64>,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.closed_form_nodes {
            Some(c) => writeln!(f, "nodes: {} (closed-form: {c})", self.nodes)?,
            None => writeln!(f, "nodes: {}", self.nodes)?,
        }
        match self.closed_form_arcs {
            Some(c) => writeln!(f, "arcs: {} (closed-form: {c})", self.arcs)?,
            None => writeln!(f, "arcs: {}", self.arcs)?,
        }
        for (class, count) in &self.arcs_by_class {
            writeln!(f, "  {class}: {count}")?;
        }
        Ok(())
    }
}

/// Binomial coefficient with `C(m, k) = 0` for `k > m` or `m < 0`.
fn binom(m: i64, k: i64) -> u128 {
    if m < 0 || k < 0 || k > m {
        return 0;
    }
    let k = k.min(m - k);
    (0..k).fold(1u128, |acc, j| acc * (m - j) as u128 / (j + 1) as u128)
}

/// `|V|` for `n` unit-demand requests and capacity `q`.
pub fn node_count_closed_form(n: u64, q: u64) -> u64 {
    let (n, q) = (n as i64, q as i64);
    let sum: u128 = (0..q).map(|j| binom(n - 1, j)).sum();
    (1 + 2 * n as u128 * sum) as u64
}

/// `|A|` for `n` unit-demand requests and capacity `q`.
pub fn arc_count_closed_form(n: u64, q: u64) -> u64 {
    let (n, q) = (n as i64, q as i64);
    let nn = n as u128;
    let pick_drop: u128 = (0..q).map(|j| binom(n - 1, j) * (j as u128 + 1)).sum();
    let middle: u128 = (0..=q - 2).map(|j| binom(n - 2, j)).sum();
    let falling: u128 = if n <= q { 0 } else { (0..=q).map(|k| (n - k) as u128).product() };
    let fact: u128 = (1..q).map(|k| k as u128).product();
    let total = 2 * nn + nn * pick_drop + 3 * nn * nn.saturating_sub(1) * middle + falling / fact;
    total as u64
}
