//! Event-based graph models for the static dial-a-ride problem.
//!
//! The crate turns a dial-a-ride instance into an event graph whose nodes are
//! vehicle occupancy tuples, assembles two MILP formulations over that graph
//! (a big-M ride-time model and a reformulated window model) and writes them
//! as MPS/LP files for any external solver. Solutions are checked by an
//! exhaustive oracle for tiny instances and by a validator that works on the
//! instance directly, without the event graph.

pub mod error;
pub mod event_graph;
pub mod instance;
pub mod model;
pub mod solve;

pub use error::{Error, Result};
pub use event_graph::{ArcClass, Event, EventArc, EventGraph, EventNode, GraphStats};
pub use instance::{
    Depot, Direction, Endpoint, GeneratorConfig, Instance, LocationId, Request, TimeWindow,
    TravelMetric,
};
pub use model::{
    build_model, compute_big_m, evaluate_objective, write_lp, write_mps, BigM, MilpModel,
    ModelMapping, ModelVariant, ObjectiveKind, ObjectiveSpec, ObjectiveValues, VarRole,
};
pub use solve::{
    encode_solution, import_solution, minimal_schedule, oracle_solve, parse_assignment,
    validate_solution, Schedule, Solution, Stop, StopKind, Tour, ValidationReport, Violation,
    ViolationKind,
};
