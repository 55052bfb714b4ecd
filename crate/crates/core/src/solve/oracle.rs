use std::cmp::Ordering;

use super::schedule::TimingProblem;
use super::{Schedule, Solution, Stop, StopKind, Tour};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{evaluate_objective, ObjectiveSpec, Weights};

pub const DEFAULT_ORACLE_LIMIT: usize = 6;

const TIE: f64 = 1e-9;

/// One feasible tour with its minimal schedule.
struct Candidate {
    mask: usize,
    tour: Tour,
    times: Vec<f64>,
    cost: f64,
    excess: f64,
    max_excess: f64,
}

/// Every feasible tour, in lexicographic order of stop codes.
fn enumerate_tours(inst: &Instance) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    let mut stops = Vec::new();
    dfs(inst, &mut stops, 0, 0, 0, &mut out)?;
    Ok(out)
}

fn dfs(inst: &Instance, stops: &mut Vec<Stop>, picked: usize, dropped: usize, load: u32, out: &mut Vec<Candidate>) -> Result<()> {
    let n = inst.n();
    for i in 1..=n as u32 {
        let bit = 1usize << (i - 1);
        let r = inst.request(i);
        for kind in [StopKind::Pickup, StopKind::Dropoff] {
            let (np, nd, nl) = match kind {
                StopKind::Pickup if picked & bit == 0 && load + r.seats <= inst.capacity => (picked | bit, dropped, load + r.seats),
                StopKind::Dropoff if picked & bit != 0 && dropped & bit == 0 => (picked, dropped | bit, load - r.seats),
                _ => continue,
            };
            stops.push(Stop { request: i, kind });
            let tour = Tour::new(stops.clone());
            if TimingProblem::new(&tour, inst, false)?.solve().is_some() {
                if np == nd {
                    if let Some(times) = TimingProblem::new(&tour, inst, true)?.solve() {
                        let sched = Schedule::from_times(&tour, times, inst)?;
                        let excess = sched.excess.values().sum();
                        let max_excess = sched.excess.values().fold(0.0f64, |a, &b| a.max(b));
                        out.push(Candidate { mask: np, cost: tour.cost(inst)?, tour, times: sched.start, excess, max_excess });
                    }
                }
                dfs(inst, stops, np, nd, nl, out)?;
            }
            stops.pop();
        }
    }
    Ok(())
}

/// Value and sorted candidate indices of a partial selection.
#[derive(Clone, Debug)]
struct Pick {
    value: f64,
    tours: Vec<usize>,
}

fn better(a: &Pick, b: &Pick) -> bool {
    if a.value < b.value - TIE {
        return true;
    }
    if a.value > b.value + TIE {
        return false;
    }
    a.tours < b.tours
}

fn key(w: &Weights, c: &Candidate) -> f64 {
    w.cost * c.cost + w.excess * c.excess
}

/// Best cover of every request subset by at most `k` tours, one table per
/// vehicle count.
fn partition_dp(best: &[Option<usize>], keys: &[f64], n: usize, fleet: usize) -> Vec<Option<Pick>> {
    let full = 1usize << n;
    let mut prev: Vec<Option<Pick>> = vec![None; full];
    prev[0] = Some(Pick { value: 0.0, tours: Vec::new() });
    let mut cur = prev.clone();
    for _ in 0..fleet {
        cur = prev.clone();
        for s in 1..full {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            // subsets of s containing its lowest bit
            let mut sub = rest;
            loop {
                let t = sub | low;
                if let (Some(c), Some(p)) = (best[t], prev[s ^ t].as_ref()) {
                    let mut tours = p.tours.clone();
                    let at = tours.partition_point(|&x| x < c);
                    tours.insert(at, c);
                    let cand = Pick { value: p.value + keys[c], tours };
                    if cur[s].as_ref().is_none_or(|old| better(&cand, old)) {
                        cur[s] = Some(cand);
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        prev = cur.clone();
    }
    cur
}

/// Exact optimum of a tiny instance by exhaustive enumeration.
///
/// Every feasible tour is enumerated once with its minimal schedule. Because
/// tours share no timing constraints, the weighted sum of cost and excess
/// decomposes over tours and a subset dynamic program over at most `K` tours
/// finds the best selection. A maximum-excess term is handled by sweeping a
/// threshold over all tour maxima. Ties go to the lexicographically smallest
/// list of tour encodings.
pub fn oracle_solve(inst: &Instance, obj: &ObjectiveSpec, allow_denial: bool, limit: usize) -> Result<Solution> {
    let n = inst.n();
    if n > limit {
        return Err(Error::OracleLimit { n, limit });
    }
    obj.validate()?;
    if obj.kind.penalizes_denial() && !allow_denial {
        return Err(Error::Model(format!("objective {} requires request denial to be enabled", obj.kind)));
    }
    let w = obj.weights();
    let tours = enumerate_tours(inst)?;
    let keys: Vec<f64> = tours.iter().map(|c| key(&w, c)).collect();
    let full = (1usize << n) - 1;
    let fleet = inst.fleet_size.min(n);

    let mut thresholds: Vec<f64> = if w.max_excess != 0.0 {
        let mut v: Vec<f64> = tours.iter().map(|c| c.max_excess).collect();
        v.push(0.0);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    } else {
        vec![f64::INFINITY]
    };
    if thresholds.is_empty() {
        thresholds.push(0.0);
    }
    let mut order: Vec<usize> = (0..tours.len()).collect();
    order.sort_by(|&a, &b| tours[a].max_excess.total_cmp(&tours[b].max_excess).then(a.cmp(&b)));

    let mut best: Vec<Option<usize>> = vec![None; full + 1];
    let mut next = 0;
    let mut winner: Option<(Pick, usize)> = None;
    for &theta in &thresholds {
        while next < order.len() && tours[order[next]].max_excess <= theta {
            let c = order[next];
            let m = tours[c].mask;
            let replace = match best[m] {
                None => true,
                Some(old) => keys[c] < keys[old] - TIE || (keys[c] <= keys[old] + TIE && c < old),
            };
            if replace {
                best[m] = Some(c);
            }
            next += 1;
        }
        let table = partition_dp(&best, &keys, n, fleet);
        for (s, pick) in table.iter().enumerate() {
            let Some(pick) = pick else { continue };
            if !allow_denial && s != full {
                continue;
            }
            let denied = (n - s.count_ones() as usize) as f64;
            let max_ex = pick.tours.iter().map(|&c| tours[c].max_excess).fold(0.0f64, f64::max);
            let total = Pick { value: pick.value + w.max_excess * max_ex + w.denied * denied, tours: pick.tours.clone() };
            if winner.as_ref().is_none_or(|(old, _)| better(&total, old)) {
                winner = Some((total, s));
            }
        }
    }

    let Some((pick, _)) = winner else {
        return Err(Error::Infeasible("no solution serves every request with the available fleet".into()));
    };
    let chosen = pick.tours.iter().map(|&c| (tours[c].tour.clone(), tours[c].times.clone())).collect();
    let mut sol = Solution::from_tours(inst, chosen)?;
    sol.objective = Some(evaluate_objective(inst, &sol, obj)?);
    Ok(sol)
}

/// Order of two solutions under the oracle's tie-breaking, for tests.
#[allow(dead_code)]
pub(crate) fn compare_encodings(a: &Solution, b: &Solution) -> Ordering {
    let enc = |s: &Solution| {
        let mut v: Vec<Vec<u32>> = s.tours.iter().map(Tour::encoding).collect();
        v.sort();
        v
    };
    enc(a).cmp(&enc(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::line_instance;
    use crate::instance::TimeWindow;
    use crate::model::ObjectiveKind;

    #[test]
    fn single_request_round_trip() {
        let mut inst = line_instance(&[(3.0, 7.0)], 1, 1);
        inst.requests[0].dropoff.window = TimeWindow::new(7.0, 1000.0);
        let obj = ObjectiveSpec::new(ObjectiveKind::Cost, 1);
        let sol = oracle_solve(&inst, &obj, false, 6).unwrap();
        assert_eq!(sol.tours, vec![Tour::new(vec![Stop::pickup(1), Stop::dropoff(1)])]);
        let v = sol.objective.unwrap();
        assert_eq!((v.total, v.f_e), (14.0, 0.0));
    }

    #[test]
    fn limit_is_enforced() {
        let inst = line_instance(&[(1.0, 2.0); 3], 1, 1);
        let obj = ObjectiveSpec::new(ObjectiveKind::Cost, 3);
        assert!(matches!(oracle_solve(&inst, &obj, false, 2), Err(Error::OracleLimit { n: 3, limit: 2 })));
    }

    #[test]
    fn infeasible_without_denial() {
        // one vehicle, two requests whose windows cannot both be met
        let mut inst = line_instance(&[(10.0, 11.0), (-10.0, -11.0)], 2, 1);
        inst.requests[0].pickup.window = TimeWindow::new(10.0, 10.0);
        inst.requests[1].pickup.window = TimeWindow::new(10.0, 10.0);
        let obj = ObjectiveSpec::new(ObjectiveKind::Cost, 2);
        assert!(matches!(oracle_solve(&inst, &obj, false, 6), Err(Error::Infeasible(_))));
        let rce = ObjectiveSpec::new(ObjectiveKind::RequestCostExcess, 2);
        let sol = oracle_solve(&inst, &rce, true, 6).unwrap();
        assert_eq!(sol.accepted.len(), 1);
        assert_eq!(sol.accepted.iter().next(), Some(&1));
    }

    #[test]
    fn deterministic() {
        let inst = line_instance(&[(1.0, 5.0), (2.0, 4.0), (3.0, 6.0)], 2, 2);
        let obj = ObjectiveSpec::new(ObjectiveKind::CostMaxExcess, 3);
        let a = oracle_solve(&inst, &obj, false, 6).unwrap();
        let b = oracle_solve(&inst, &obj, false, 6).unwrap();
        assert_eq!(a, b);
        assert_eq!(compare_encodings(&a, &b), Ordering::Equal);
    }
}
