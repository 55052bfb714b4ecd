//! Reader and writer for the whitespace-separated benchmark layout:
//!
//! ```text
//! |K| m T Q L
//! id x y s q e l      # origin depot, then pickups 1..n, then drop-offs n+1..2n,
//! ...                 # optionally a terminal depot row
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{Depot, Endpoint, Instance, Request, TimeWindow, TravelMetric};
use crate::error::{Error, Result};

struct Row {
    line: usize,
    id: f64,
    x: f64,
    y: f64,
    service: f64,
    load: f64,
    e: f64,
    l: f64,
}

fn numbers(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|_| Error::parse(line, format!("non-numeric field `{tok}`"))))
        .collect()
}

fn as_count(line: usize, v: f64, what: &str) -> Result<usize> {
    if v.fract() != 0.0 || v < 0.0 {
        return Err(Error::parse(line, format!("{what} must be a nonnegative integer, got {v}")));
    }
    Ok(v as usize)
}

/// Parses a benchmark file. Windows are kept as given; see
/// [`tighten_time_windows`](super::tighten_time_windows).
pub fn parse_cordeau(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(0, "empty input"))?;
    let h = numbers(hline, header)?;
    if h.len() != 5 {
        return Err(Error::parse(hline, format!("header needs 5 fields (|K| m T Q L), found {}", h.len())));
    }
    let fleet = as_count(hline, h[0], "fleet size")?;
    let declared_nodes = as_count(hline, h[1], "node count")?;
    let horizon = h[2];
    let capacity = as_count(hline, h[3], "capacity")?;
    let max_ride = h[4];

    let mut rows = Vec::new();
    for (line, text) in lines {
        let f = numbers(line, text)?;
        if f.len() != 7 {
            return Err(Error::parse(line, format!("node row needs 7 fields (id x y s q e l), found {}", f.len())));
        }
        rows.push(Row { line, id: f[0], x: f[1], y: f[2], service: f[3], load: f[4], e: f[5], l: f[6] });
    }
    if rows.len() < 3 {
        return Err(Error::parse(hline, "no request rows: at least one pickup and one drop-off are required"));
    }
    let with_terminal = rows.len() % 2 == 0;
    let n = if with_terminal { (rows.len() - 2) / 2 } else { (rows.len() - 1) / 2 };
    if n == 0 {
        return Err(Error::parse(hline, "no request rows: at least one pickup and one drop-off are required"));
    }
    if declared_nodes != n && declared_nodes != rows.len() {
        return Err(Error::parse(
            hline,
            format!("header declares {declared_nodes} nodes but the file holds {} node rows ({n} requests)", rows.len()),
        ));
    }
    for (k, row) in rows.iter().enumerate() {
        if row.id != k as f64 {
            return Err(Error::parse(row.line, format!("expected node id {k}, found {}", row.id)));
        }
    }

    let depot_row = &rows[0];
    let e0 = depot_row.e;
    let l0 = if depot_row.l - e0 == horizon { depot_row.l } else { e0 + horizon };
    let depot = Depot { location: 0, window: TimeWindow::new(e0, l0) };

    let mut coords = BTreeMap::new();
    for (k, row) in rows.iter().enumerate().take(2 * n + 1) {
        coords.insert(k, [row.x, row.y]);
    }

    let mut requests = Vec::with_capacity(n);
    for i in 1..=n {
        let (p, d) = (&rows[i], &rows[n + i]);
        if d.load != -p.load {
            return Err(Error::parse(
                d.line,
                format!("drop-off load {} does not match pickup load {} of request {i}", d.load, p.load),
            ));
        }
        let seats = as_count(p.line, p.load, "pickup load")?;
        if seats == 0 || seats > capacity {
            return Err(Error::parse(p.line, format!("request {i} asks for {seats} seats, capacity is {capacity}")));
        }
        if d.service != p.service {
            return Err(Error::parse(d.line, format!("request {i} has different pickup and drop-off service times")));
        }
        requests.push(Request {
            id: i as u32,
            pickup: Endpoint { location: i, window: TimeWindow::new(p.e, p.l) },
            dropoff: Endpoint { location: n + i, window: TimeWindow::new(d.e, d.l) },
            seats: seats as u32,
            service: p.service,
            max_ride,
            direction: None,
            direct_time: 0.0,
        });
    }
    Instance::new(fleet, capacity as u32, depot, 1.0, requests, TravelMetric::Coordinates(coords))
}

/// Writes an instance in the benchmark layout (2n+1 node rows, no terminal depot).
///
/// Only instances that the format can express are accepted: coordinate
/// metric with unit time factor, the canonical location numbering and a
/// single maximum ride time.
pub fn write_cordeau(inst: &Instance) -> Result<String> {
    let unsupported = |msg: &str| Err(Error::InvalidInstance(format!("cannot write benchmark format: {msg}")));
    let TravelMetric::Coordinates(coords) = &inst.metric else {
        return unsupported("matrix metric");
    };
    if inst.time_factor != 1.0 {
        return unsupported("time factor other than 1");
    }
    let n = inst.n();
    let max_ride = inst.requests[0].max_ride;
    if inst.requests.iter().any(|r| r.max_ride != max_ride) {
        return unsupported("maximum ride time differs between requests");
    }
    if inst.depot.location != 0
        || inst.requests.iter().any(|r| r.pickup.location != r.id as usize || r.dropoff.location != n + r.id as usize)
    {
        return unsupported("non-canonical location numbering");
    }
    let mut out = String::new();
    let d = &inst.depot;
    writeln!(out, "{} {} {} {} {}", inst.fleet_size, 2 * n + 1, inst.horizon(), inst.capacity, max_ride).unwrap();
    let c = coords[&0];
    writeln!(out, "0 {} {} 0 0 {} {}", c[0], c[1], d.window.earliest, d.window.latest).unwrap();
    for r in &inst.requests {
        let c = coords[&r.pickup.location];
        let w = r.pickup.window;
        writeln!(out, "{} {} {} {} {} {} {}", r.id, c[0], c[1], r.service, r.seats, w.earliest, w.latest).unwrap();
    }
    for r in &inst.requests {
        let c = coords[&r.dropoff.location];
        let w = r.dropoff.window;
        writeln!(
            out,
            "{} {} {} {} -{} {} {}",
            r.dropoff.location, c[0], c[1], r.service, r.seats, w.earliest, w.latest
        )
        .unwrap();
    }
    Ok(out)
}
