//! Brute-force reference solver for tiny instances.
//!
//! Every route is a sequence of one-direction blocks of requests. The oracle
//! enumerates all ordered sequences of disjoint blocks, every waypoint order a
//! block admits (up to reorderings that provably do not matter), inserts an
//! empty opposite subroute wherever the vehicle has to drive back, and decides
//! feasibility with [`check_route`]. The best collection of up to `k` routes is
//! found by a subset DP over the served sets.

use serde::Serialize;
use thiserror::Error;

use crate::feasibility::check_route;
use crate::model::{Direction, Instance, Route, Solution, Subroute, Time, Waypoint, WaypointKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleLimits {
    pub max_requests: usize,
    pub max_vehicles: usize,
    /// Only checked when the horizon is finite.
    pub max_horizon: Time,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_requests: 6, max_vehicles: 2, max_horizon: 20 }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {0}")]
    LimitsExceeded(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub max_served: usize,
    pub tau: usize,
    pub solution: Solution,
    pub routes_checked: u64,
}

pub fn brute_solve(instance: &Instance, limits: &OracleLimits) -> Result<OracleResult, OracleError> {
    let n = instance.len();
    if n > limits.max_requests {
        return Err(OracleError::LimitsExceeded(format!(
            "{n} requests > {}",
            limits.max_requests
        )));
    }
    if instance.vehicles > limits.max_vehicles {
        return Err(OracleError::LimitsExceeded(format!(
            "{} vehicles > {}",
            instance.vehicles, limits.max_vehicles
        )));
    }
    if let Some(t) = instance.horizon() {
        if t > limits.max_horizon {
            return Err(OracleError::LimitsExceeded(format!(
                "horizon {t} > {}",
                limits.max_horizon
            )));
        }
    }
    let mut search = Search { inst: instance, best: vec![None; 1 << n], checked: 0 };
    search.extend(&mut Vec::new(), 0, None);
    let Search { best, checked, .. } = search;

    // cost[j][mask]: least max-turns over collections of at most j routes serving exactly mask
    let full = 1usize << n;
    let k = instance.vehicles;
    let mut cost = vec![vec![None::<usize>; full]; k + 1];
    let mut pick = vec![vec![0usize; full]; k + 1];
    for row in cost.iter_mut() {
        row[0] = Some(0);
    }
    for j in 1..=k {
        for mask in 1..full {
            let mut s = mask;
            while s > 0 {
                if let (Some((turns, _)), Some(rest)) = (&best[s], cost[j - 1][mask ^ s]) {
                    let c = (*turns).max(rest);
                    if cost[j][mask].is_none_or(|cur| c < cur) {
                        cost[j][mask] = Some(c);
                        pick[j][mask] = s;
                    }
                }
                s = (s - 1) & mask;
            }
        }
    }
    let mut chosen = 0usize;
    for mask in 0..full {
        let Some(c) = cost[k][mask] else { continue };
        let (served, old_served) = (mask.count_ones(), chosen.count_ones());
        if served > old_served || (served == old_served && c < cost[k][chosen].unwrap()) {
            chosen = mask;
        }
    }
    let tau = cost[k][chosen].unwrap();
    let mut tours = Vec::new();
    let (mut mask, mut j) = (chosen, k);
    while mask != 0 {
        let s = pick[j][mask];
        let (_, route) = best[s].as_ref().unwrap();
        tours.push(check_route(route, instance).expect("recorded routes are feasible"));
        mask ^= s;
        j -= 1;
    }
    Ok(OracleResult {
        max_served: chosen.count_ones() as usize,
        tau,
        solution: Solution::new(tours),
        routes_checked: checked,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    best: Vec<Option<(usize, Route)>>,
    checked: u64,
}

impl Search<'_> {
    fn extend(&mut self, subroutes: &mut Vec<Subroute>, used: usize, last: Option<(Direction, usize)>) {
        let n = self.inst.len();
        for dir in [Direction::Ascending, Direction::Descending] {
            let avail = (0..n)
                .filter(|&i| used & (1 << i) == 0 && self.inst.requests[i].direction() == dir)
                .fold(0usize, |m, i| m | (1 << i));
            let mut block = avail;
            while block > 0 {
                for order in block_orders(self.inst, dir, block) {
                    let first = stop_of(self.inst, &order[0]);
                    let before = subroutes.len();
                    if let Some((ldir, lstop)) = last {
                        if ldir == dir {
                            if !dir.is_behind(lstop, first) {
                                // same as one merged block, enumerated elsewhere
                                continue;
                            }
                            subroutes.push(Subroute::artificial(dir.opposite()));
                        }
                    }
                    let end = stop_of(self.inst, order.last().unwrap());
                    subroutes.push(Subroute::new(dir, order));
                    let route = Route::new(subroutes.clone());
                    self.checked += 1;
                    if check_route(&route, self.inst).is_ok() {
                        let mask = used | block;
                        let turns = route.turns();
                        if self.best[mask].as_ref().is_none_or(|(t, _)| turns < *t) {
                            self.best[mask] = Some((turns, route));
                        }
                        self.extend(subroutes, mask, Some((dir, end)));
                    }
                    subroutes.truncate(before);
                }
                block = (block - 1) & avail;
            }
        }
    }
}

fn stop_of(inst: &Instance, w: &Waypoint) -> usize {
    let r = inst.request(w.request).unwrap();
    match w.kind {
        WaypointKind::Pickup => r.origin,
        WaypointKind::Dropoff => r.destination,
    }
}

/// All waypoint orders of a one-direction block: sorted along the direction with
/// drop-offs first at a shared stop. Events of one kind at one stop happen at the
/// same moment when service time is zero, so they are only permuted otherwise.
fn block_orders(inst: &Instance, dir: Direction, block: usize) -> Vec<Vec<Waypoint>> {
    let mut events: Vec<(i64, WaypointKind, usize)> = Vec::new();
    for (i, r) in inst.requests.iter().enumerate() {
        if block & (1 << i) != 0 {
            events.push((dir.key(r.origin), WaypointKind::Pickup, i));
            events.push((dir.key(r.destination), WaypointKind::Dropoff, i));
        }
    }
    events.sort();
    let mut groups: Vec<(WaypointKind, Vec<usize>)> = Vec::new();
    for (j, e) in events.iter().enumerate() {
        if j > 0 && (events[j - 1].0, events[j - 1].1) == (e.0, e.1) {
            groups.last_mut().unwrap().1.push(e.2);
        } else {
            groups.push((e.1, vec![e.2]));
        }
    }
    let mut out = vec![Vec::new()];
    for (kind, g) in groups {
        let perms = if inst.service_time > 0 { permutations(&g) } else { vec![g] };
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for prefix in &out {
            for p in &perms {
                let mut o: Vec<Waypoint> = prefix.clone();
                o.extend(p.iter().map(|&i| Waypoint {
                    request: inst.requests[i].id,
                    kind,
                    time: None,
                }));
                next.push(o);
            }
        }
        out = next;
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}
