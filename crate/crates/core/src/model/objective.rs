use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::solve::Solution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Total routing cost.
    Cost,
    /// Total excess ride time.
    Excess,
    /// Maximum excess ride time.
    MaxExcess,
    /// Cost + alpha * total excess.
    CostExcess,
    /// Cost + beta * maximum excess.
    CostMaxExcess,
    /// Cost + alpha * total excess + gamma * denied requests.
    RequestCostExcess,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 6] = [
        ObjectiveKind::Cost,
        ObjectiveKind::Excess,
        ObjectiveKind::MaxExcess,
        ObjectiveKind::CostExcess,
        ObjectiveKind::CostMaxExcess,
        ObjectiveKind::RequestCostExcess,
    ];

    /// Short name used on the command line and in file names.
    pub fn cli_name(self) -> &'static str {
        match self {
            ObjectiveKind::Cost => "cost",
            ObjectiveKind::Excess => "excess",
            ObjectiveKind::MaxExcess => "max-excess",
            ObjectiveKind::CostExcess => "cost-excess",
            ObjectiveKind::CostMaxExcess => "cost-max-excess",
            ObjectiveKind::RequestCostExcess => "rce",
        }
    }

    /// Needs the per-request excess variables `d_i`.
    pub fn uses_excess(self) -> bool {
        self != ObjectiveKind::Cost
    }

    /// Needs the maximum excess variable.
    pub fn uses_max_excess(self) -> bool {
        matches!(self, ObjectiveKind::MaxExcess | ObjectiveKind::CostMaxExcess)
    }

    pub fn penalizes_denial(self) -> bool {
        self == ObjectiveKind::RequestCostExcess
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.cli_name() == s)
            .ok_or_else(|| Error::Model(format!("unknown objective `{s}`")))
    }
}

/// Objective variant with its weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Weights of the linear combination `w_c f_c + w_e f_e + w_m f_emax + w_n f_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub cost: f64,
    pub excess: f64,
    pub max_excess: f64,
    pub denied: f64,
}

impl ObjectiveSpec {
    /// Default weights: alpha = 3, beta = 3n/5, gamma = 60.
    pub fn new(kind: ObjectiveKind, n: usize) -> Self {
        ObjectiveSpec { kind, alpha: 3.0, beta: 3.0 * n as f64 / 5.0, gamma: 60.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let need = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Model(format!("objective {} needs {name} > 0, got {v}", self.kind)))
            }
        };
        match self.kind {
            ObjectiveKind::CostExcess => need("alpha", self.alpha),
            ObjectiveKind::CostMaxExcess => need("beta", self.beta),
            ObjectiveKind::RequestCostExcess => {
                need("alpha", self.alpha)?;
                need("gamma", self.gamma)
            }
            _ => Ok(()),
        }
    }

    pub fn weights(&self) -> Weights {
        let w = |cost, excess, max_excess, denied| Weights { cost, excess, max_excess, denied };
        match self.kind {
            ObjectiveKind::Cost => w(1.0, 0.0, 0.0, 0.0),
            ObjectiveKind::Excess => w(0.0, 1.0, 0.0, 0.0),
            ObjectiveKind::MaxExcess => w(0.0, 0.0, 1.0, 0.0),
            ObjectiveKind::CostExcess => w(1.0, self.alpha, 0.0, 0.0),
            ObjectiveKind::CostMaxExcess => w(1.0, 0.0, self.beta, 0.0),
            ObjectiveKind::RequestCostExcess => w(1.0, self.alpha, 0.0, self.gamma),
        }
    }

    pub fn combine(&self, f_c: f64, f_e: f64, f_emax: f64, f_n: f64) -> f64 {
        let w = self.weights();
        w.cost * f_c + w.excess * f_e + w.max_excess * f_emax + w.denied * f_n
    }
}

/// Objective total together with its components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValues {
    pub total: f64,
    pub f_c: f64,
    pub f_e: f64,
    pub f_emax: f64,
    pub f_n: f64,
}

/// Recomputes every objective component of `sol` from the instance data.
///
/// Excess of an accepted request is its drop-off start minus the earliest
/// drop-off time, floored at zero.
pub fn evaluate_objective(inst: &Instance, sol: &Solution, obj: &ObjectiveSpec) -> Result<ObjectiveValues> {
    let n = inst.n() as u32;
    let mut f_c = 0.0;
    let (mut f_e, mut f_emax) = (0.0, 0.0f64);
    if sol.schedules.len() != sol.tours.len() {
        return Err(Error::InvalidSolution("one schedule per tour is required".into()));
    }
    for (tour, sched) in sol.tours.iter().zip(&sol.schedules) {
        if sched.start.len() != tour.stops.len() {
            return Err(Error::InvalidSolution("schedule length differs from tour length".into()));
        }
        if let Some(bad) = tour.stops.iter().find(|s| s.request == 0 || s.request > n) {
            return Err(Error::InvalidSolution(format!("unknown request {}", bad.request)));
        }
        let locs = tour.locations(inst);
        for w in locs.windows(2) {
            f_c += inst.travel(w[0], w[1])?.0;
        }
        for (stop, &t) in tour.stops.iter().zip(&sched.start) {
            if stop.kind == crate::solve::StopKind::Dropoff {
                let d = (t - inst.request(stop.request).dropoff.window.earliest).max(0.0);
                f_e += d;
                f_emax = f_emax.max(d);
            }
        }
    }
    let f_n = (inst.n() - sol.accepted.len()) as f64;
    let total = obj.combine(f_c, f_e, f_emax, f_n);
    Ok(ObjectiveValues { total, f_c, f_e, f_emax, f_n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_request_count() {
        let spec = ObjectiveSpec::new(ObjectiveKind::CostMaxExcess, 25);
        assert_eq!((spec.alpha, spec.beta, spec.gamma), (3.0, 15.0, 60.0));
        assert!(spec.validate().is_ok());
        let bad = ObjectiveSpec { beta: 0.0, ..spec };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in ObjectiveKind::ALL {
            assert_eq!(k.cli_name().parse::<ObjectiveKind>().unwrap(), k);
        }
        assert!("bogus".parse::<ObjectiveKind>().is_err());
    }

    #[test]
    fn combine_matches_formulas() {
        let mut spec = ObjectiveSpec::new(ObjectiveKind::RequestCostExcess, 10);
        assert_eq!(spec.combine(0.0, 0.0, 0.0, 10.0), 600.0);
        assert_eq!(spec.combine(100.0, 10.0, 4.0, 1.0), 100.0 + 30.0 + 60.0);
        spec.kind = ObjectiveKind::CostMaxExcess;
        assert_eq!(spec.combine(100.0, 10.0, 4.0, 1.0), 100.0 + 6.0 * 4.0);
        spec.kind = ObjectiveKind::MaxExcess;
        assert_eq!(spec.combine(100.0, 10.0, 4.0, 1.0), 4.0);
    }
}
