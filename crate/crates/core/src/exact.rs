//! Exact solver for the general (time-windowed) problem.
//!
//! Routes are enumerated as paths in the event graph: states are the waypoints
//! visited so far plus the set of passengers on board, and an edge is taken only
//! if the extended prefix still admits timestamps. Identical requests are
//! interchangeable, so a route is identified by how many copies of each request
//! class it serves, and copies are always picked up in id order.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::feasibility::{check_route, schedule, Event};
use crate::model::{
    Direction, Instance, Request, RequestId, Route, Solution, Stop, Subroute, Time, Waypoint,
    WaypointKind,
};

pub const DEFAULT_ROUTE_CAP: u64 = 5_000_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("instance has an infinite horizon")]
    InfiniteHorizon,
    #[error("instance has time windows")]
    Windowed,
    #[error("enumeration budget of {cap} route prefixes exceeded")]
    BudgetExceeded { cap: u64 },
}

/// Bounds on a single route and a collection implied by a finite horizon `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumBudget {
    pub max_waypoints: usize,
    pub max_requests_per_route: usize,
    pub max_per_collection: usize,
    /// Cap on explored route prefixes; exceeding it aborts the search.
    pub max_routes: u64,
}

impl EnumBudget {
    pub fn for_instance(instance: &Instance, max_routes: u64) -> Result<EnumBudget, SolveError> {
        let t = instance.horizon().ok_or(SolveError::InfiniteHorizon)? as usize;
        let per_route = t.saturating_mul(instance.capacity);
        Ok(EnumBudget {
            max_waypoints: per_route.saturating_mul(2),
            max_requests_per_route: per_route,
            max_per_collection: per_route.saturating_mul(instance.vehicles),
            max_routes,
        })
    }
}

/// Requests grouped into classes of identical copies.
#[derive(Clone, Debug)]
pub struct Classes {
    pub class_of: Vec<usize>,
    /// Request indices of each class in increasing id order.
    pub members: Vec<Vec<usize>>,
}

impl Classes {
    /// Copies share origin, destination and window.
    pub fn by_window(instance: &Instance) -> Classes {
        Classes::group(instance, |r| (r.origin, r.destination, r.earliest, r.latest))
    }

    fn group<K: std::hash::Hash + Eq>(instance: &Instance, key: impl Fn(&Request) -> K) -> Classes {
        let mut index: HashMap<K, usize> = HashMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut order: Vec<usize> = (0..instance.len()).collect();
        order.sort_by_key(|&i| instance.requests[i].id);
        let mut class_of = vec![0; instance.len()];
        for i in order {
            let next = members.len();
            let c = *index.entry(key(&instance.requests[i])).or_insert(next);
            if c == next {
                members.push(Vec::new());
            }
            members[c].push(i);
            class_of[i] = c;
        }
        Classes { class_of, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Instance reduced to at most `t·c·k` copies per class.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub instance: Instance,
    /// Copies removed by the kernel; they are reported unserved.
    pub dropped: Vec<RequestId>,
}

pub fn dedup_kernel(instance: &Instance) -> Result<Kernel, SolveError> {
    let t = instance.horizon().ok_or(SolveError::InfiniteHorizon)? as usize;
    let keep = t.saturating_mul(instance.capacity).saturating_mul(instance.vehicles);
    let classes = Classes::by_window(instance);
    let mut dropped = Vec::new();
    let mut kept = vec![true; instance.len()];
    for m in &classes.members {
        for &i in m.iter().skip(keep) {
            kept[i] = false;
            dropped.push(instance.requests[i].id);
        }
    }
    if dropped.is_empty() {
        return Ok(Kernel { instance: instance.clone(), dropped });
    }
    let requests = instance
        .requests
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.clone())
        .collect();
    dropped.sort();
    let instance = instance.with_requests(requests).expect("subset of a valid instance");
    Ok(Kernel { instance, dropped })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    Routes,
    /// One subroute in the given direction.
    Subroute(Direction),
}

/// A feasible route found by the enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibleRoute {
    /// Served copies per class; the route serves the first copies of each class.
    pub counts: Vec<u32>,
    pub served: usize,
    pub turns: usize,
    pub route: Route,
}

/// Depth-first search over the event graph.
pub(crate) struct Engine<'a> {
    inst: &'a Instance,
    classes: &'a Classes,
    mode: Mode,
    max_waypoints: usize,
    cap: u64,
    pub nodes: u64,
    dirs: Vec<Direction>,
    events: Vec<Event>,
    onboard: Vec<usize>,
    taken: Vec<u32>,
    found: HashMap<Vec<u32>, (usize, Vec<Direction>, Vec<Event>)>,
}

impl<'a> Engine<'a> {
    pub fn new(inst: &'a Instance, classes: &'a Classes, mode: Mode, max_waypoints: usize, cap: u64) -> Self {
        Engine {
            inst,
            classes,
            mode,
            max_waypoints,
            cap,
            nodes: 0,
            dirs: Vec::new(),
            events: Vec::new(),
            onboard: Vec::new(),
            taken: vec![0; classes.len()],
            found: HashMap::new(),
        }
    }

    /// Runs the search and returns the distinct routes, fewest turns per class vector.
    pub fn run(mut self) -> Result<(Vec<FeasibleRoute>, u64), SolveError> {
        self.dfs()?;
        let mut out: Vec<FeasibleRoute> = self
            .found
            .iter()
            .map(|(counts, (turns, dirs, events))| FeasibleRoute {
                counts: counts.clone(),
                served: counts.iter().map(|&c| c as usize).sum(),
                turns: *turns,
                route: build_route(self.inst, dirs, events),
            })
            .collect();
        out.sort_by(|a, b| {
            b.served.cmp(&a.served).then(a.turns.cmp(&b.turns)).then(a.counts.cmp(&b.counts))
        });
        Ok((out, self.nodes))
    }

    fn stop(&self, e: &Event) -> Stop {
        e.stop(self.inst)
    }

    fn next_copy(&self, class: usize) -> Option<usize> {
        self.classes.members[class].get(self.taken[class] as usize).copied()
    }

    fn dfs(&mut self) -> Result<(), SolveError> {
        let Some(&last) = self.events.last() else {
            for class in 0..self.classes.len() {
                let Some(p) = self.next_copy(class) else { continue };
                let dir = self.inst.requests[p].direction();
                if let Mode::Subroute(d) = self.mode {
                    if d != dir {
                        continue;
                    }
                }
                self.dirs.push(dir);
                self.try_event(Event { req: p, kind: WaypointKind::Pickup, sub: 0 })?;
                self.dirs.pop();
            }
            return Ok(());
        };
        let sub = self.dirs.len() - 1;
        let dir = self.dirs[sub];
        for q in self.onboard.clone() {
            self.try_event(Event { req: q, kind: WaypointKind::Dropoff, sub })?;
        }
        if self.onboard.len() < self.inst.capacity {
            for class in 0..self.classes.len() {
                let Some(p) = self.next_copy(class) else { continue };
                if self.inst.requests[p].direction() == dir {
                    self.try_event(Event { req: p, kind: WaypointKind::Pickup, sub })?;
                }
            }
        }
        if self.onboard.is_empty() && self.mode == Mode::Routes {
            let here = self.stop(&last);
            for class in 0..self.classes.len() {
                let Some(p) = self.next_copy(class) else { continue };
                let r = &self.inst.requests[p];
                let pdir = r.direction();
                let pushed = if pdir != dir {
                    self.dirs.push(pdir);
                    1
                } else if dir.is_behind(here, r.origin) {
                    self.dirs.push(dir.opposite());
                    self.dirs.push(dir);
                    2
                } else {
                    continue;
                };
                let sub = self.dirs.len() - 1;
                self.try_event(Event { req: p, kind: WaypointKind::Pickup, sub })?;
                self.dirs.truncate(self.dirs.len() - pushed);
            }
        }
        Ok(())
    }

    /// Canonical order inside a subroute: along the direction, drop-offs first at a
    /// shared stop, and id order among equal events when their order cannot matter.
    fn ordered_after(&self, last: &Event, next: &Event) -> bool {
        if last.sub != next.sub {
            return true;
        }
        let dir = self.dirs[next.sub];
        let (a, b) = (dir.key(self.stop(last)), dir.key(self.stop(next)));
        if b != a {
            return b > a;
        }
        if last.kind != next.kind {
            return last.kind == WaypointKind::Dropoff;
        }
        let same_class = self.classes.class_of[last.req] == self.classes.class_of[next.req];
        if self.inst.service_time == 0 || same_class {
            self.inst.requests[last.req].id < self.inst.requests[next.req].id
        } else {
            true
        }
    }

    fn try_event(&mut self, ev: Event) -> Result<(), SolveError> {
        if let Some(last) = self.events.last() {
            if !self.ordered_after(last, &ev) {
                return Ok(());
            }
        }
        // each served request contributes two waypoints
        if ev.kind == WaypointKind::Pickup && self.events.len() + 2 * self.onboard.len() + 2 > self.max_waypoints {
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(SolveError::BudgetExceeded { cap: self.cap });
        }
        self.events.push(ev);
        let class = self.classes.class_of[ev.req];
        match ev.kind {
            WaypointKind::Pickup => {
                self.onboard.push(ev.req);
                self.taken[class] += 1;
            }
            WaypointKind::Dropoff => self.onboard.retain(|&q| q != ev.req),
        }
        let res = match schedule(self.inst, &self.dirs, &self.events, true) {
            Some(times) if self.deadlines_reachable(&times) => {
                if self.onboard.is_empty() {
                    self.record();
                }
                self.dfs()
            }
            _ => Ok(()),
        };
        self.events.pop();
        match ev.kind {
            WaypointKind::Pickup => {
                self.onboard.pop();
                self.taken[class] -= 1;
            }
            WaypointKind::Dropoff => self.onboard.push(ev.req),
        }
        res
    }

    /// Every passenger on board can still reach their destination in time.
    fn deadlines_reachable(&self, times: &[Time]) -> bool {
        let last = self.events.last().unwrap();
        let (now, here) = (times[times.len() - 1], self.stop(last));
        self.onboard.iter().all(|&q| {
            let r = &self.inst.requests[q];
            r.latest.is_none_or(|l| {
                now + self.inst.line.dist(here, r.destination) + self.inst.service_time <= l
            })
        })
    }

    fn record(&mut self) {
        let turns = self.dirs.len();
        let better = self.found.get(&self.taken).is_none_or(|(t, _, _)| turns < *t);
        if better {
            self.found
                .insert(self.taken.clone(), (turns, self.dirs.clone(), self.events.clone()));
        }
    }
}

fn build_route(inst: &Instance, dirs: &[Direction], events: &[Event]) -> Route {
    let mut subroutes: Vec<Subroute> = dirs.iter().map(|&d| Subroute::artificial(d)).collect();
    for e in events {
        let id = inst.requests[e.req].id;
        subroutes[e.sub].waypoints.push(Waypoint { request: id, kind: e.kind, time: None });
    }
    Route::new(subroutes)
}

/// All feasible routes up to the canonical-order and copy quotient, with at most
/// `2·t·c` waypoints.
#[derive(Clone, Debug)]
pub struct RouteSet {
    pub classes: Classes,
    pub routes: Vec<FeasibleRoute>,
    pub nodes: u64,
}

pub fn enumerate_feasible_routes(instance: &Instance, max_routes: u64) -> Result<RouteSet, SolveError> {
    let budget = EnumBudget::for_instance(instance, max_routes)?;
    let classes = Classes::by_window(instance);
    let engine = Engine::new(instance, &classes, Mode::Routes, budget.max_waypoints, budget.max_routes);
    let (routes, nodes) = engine.run()?;
    Ok(RouteSet { classes, routes, nodes })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollectionResult {
    pub max_served: usize,
    pub tau: usize,
    pub solution: Solution,
    pub collections: u64,
}

/// Best collection of at most `k` routes: most served requests, then fewest
/// turns on the busiest vehicle. Routes may repeat if enough copies exist.
pub fn best_collections(instance: &Instance, set: &RouteSet, k: usize) -> CollectionResult {
    let mut search = Collections {
        routes: &set.routes,
        mult: set.classes.members.iter().map(|m| m.len() as u32).collect(),
        used: vec![0; set.classes.len()],
        k,
        chosen: Vec::new(),
        best: (0, 0, Vec::new()),
        visited: 0,
    };
    search.go(0, 0, 0);
    let (max_served, tau, picks) = search.best;
    let mut next = vec![0usize; set.classes.len()];
    let tours = picks
        .iter()
        .map(|&i| {
            let route = instantiate(instance, &set.classes, &set.routes[i], &mut next);
            check_route(&route, instance).expect("copies of a feasible route are feasible")
        })
        .collect();
    CollectionResult { max_served, tau, solution: Solution::new(tours), collections: search.visited }
}

/// Renames the first copies a route serves to the next unused copies of each class.
pub(crate) fn instantiate(
    instance: &Instance,
    classes: &Classes,
    fr: &FeasibleRoute,
    next: &mut [usize],
) -> Route {
    let mut rename: HashMap<RequestId, RequestId> = HashMap::new();
    for (c, &n) in fr.counts.iter().enumerate() {
        let m = &classes.members[c];
        for j in 0..n as usize {
            rename.insert(instance.requests[m[j]].id, instance.requests[m[next[c] + j]].id);
        }
        next[c] += n as usize;
    }
    let mut route = fr.route.clone();
    for s in &mut route.subroutes {
        for w in &mut s.waypoints {
            w.request = rename[&w.request];
        }
    }
    route
}

struct Collections<'a> {
    routes: &'a [FeasibleRoute],
    mult: Vec<u32>,
    used: Vec<u32>,
    k: usize,
    chosen: Vec<usize>,
    best: (usize, usize, Vec<usize>),
    visited: u64,
}

impl Collections<'_> {
    fn go(&mut self, start: usize, served: usize, turns: usize) {
        self.visited += 1;
        let (bs, bt) = (self.best.0, self.best.1);
        if served > bs || (served == bs && turns < bt) {
            self.best = (served, turns, self.chosen.clone());
        }
        let left = self.k - self.chosen.len();
        if left == 0 {
            return;
        }
        for i in start..self.routes.len() {
            let r = &self.routes[i];
            // routes are sorted by served count, so this bounds every extension
            let bound = served + left * r.served;
            if bound < self.best.0 {
                break;
            }
            if bound == self.best.0 && turns.max(r.turns) >= self.best.1 {
                continue;
            }
            let fits = r.counts.iter().zip(&self.used).zip(&self.mult).all(|((&a, &u), &m)| a + u <= m);
            if !fits {
                continue;
            }
            for (u, &a) in self.used.iter_mut().zip(&r.counts) {
                *u += a;
            }
            self.chosen.push(i);
            self.go(i, served + r.served, turns.max(r.turns));
            self.chosen.pop();
            for (u, &a) in self.used.iter_mut().zip(&r.counts) {
                *u -= a;
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExactStats {
    pub kernel_dropped: usize,
    pub nodes: u64,
    pub routes: usize,
    pub collections: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactResult {
    pub max_served: usize,
    pub tau: usize,
    pub solution: Solution,
    pub stats: ExactStats,
}

pub fn solve_fpt(instance: &Instance) -> Result<ExactResult, SolveError> {
    solve_fpt_capped(instance, DEFAULT_ROUTE_CAP)
}

pub fn solve_fpt_capped(instance: &Instance, max_routes: u64) -> Result<ExactResult, SolveError> {
    let kernel = dedup_kernel(instance)?;
    let set = enumerate_feasible_routes(&kernel.instance, max_routes)?;
    let best = best_collections(&kernel.instance, &set, instance.vehicles);
    Ok(ExactResult {
        max_served: best.max_served,
        tau: best.tau,
        solution: best.solution,
        stats: ExactStats {
            kernel_dropped: kernel.dropped.len(),
            nodes: set.nodes,
            routes: set.routes.len(),
            collections: best.collections,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::verify_solution;
    use crate::model::Line;
    use crate::oracle::{brute_solve, OracleLimits};

    fn line(h: usize) -> Line {
        Line::from_gaps(&vec![1; h - 1]).unwrap()
    }

    fn inst(h: usize, reqs: Vec<Request>, k: usize, c: usize) -> Instance {
        Instance::new(line(h), reqs, k, c, 0, 0, None).unwrap()
    }

    fn solve(i: &Instance) -> ExactResult {
        let res = solve_fpt(i).unwrap();
        let rep = verify_solution(&res.solution, i);
        assert!(rep.is_clean(), "{:?}", rep.violations);
        assert_eq!((rep.served, rep.max_turns), (res.max_served, res.tau));
        res
    }

    #[test]
    fn kernel_caps_copies() {
        let reqs = (0..100).map(|i| Request::new(i, 0, 1).with_window(0, Some(1))).collect();
        let k = dedup_kernel(&inst(2, reqs, 1, 1)).unwrap();
        assert_eq!(k.instance.len(), 2);
        assert_eq!(k.dropped.len(), 98);

        let distinct = inst(3, vec![
            Request::new(0, 0, 1).with_window(0, Some(5)),
            Request::new(1, 1, 2).with_window(0, Some(5)),
        ], 1, 1);
        assert_eq!(dedup_kernel(&distinct).unwrap().instance, distinct);
    }

    #[test]
    fn infinite_horizon() {
        let i = inst(2, vec![Request::new(0, 0, 1)], 1, 1);
        assert_eq!(solve_fpt(&i), Err(SolveError::InfiniteHorizon));
    }

    #[test]
    fn single_route_examples() {
        let one = inst(3, vec![Request::new(0, 0, 2).with_window(0, Some(20))], 1, 1);
        let set = enumerate_feasible_routes(&one, 1000).unwrap();
        assert_eq!(set.routes.len(), 1);
        assert_eq!(set.routes[0].turns, 1);

        let two = inst(4, vec![
            Request::new(0, 0, 1).with_window(0, Some(10)),
            Request::new(1, 2, 3).with_window(0, Some(10)),
        ], 1, 1);
        let set = enumerate_feasible_routes(&two, 1000).unwrap();
        assert!(set.routes.iter().any(|r| r.served == 2 && r.turns == 1));

        let apart = inst(11, vec![
            Request::new(0, 0, 1).with_window(0, Some(1)),
            Request::new(1, 10, 9).with_window(0, Some(1)),
        ], 1, 1);
        let set = enumerate_feasible_routes(&apart, 1000).unwrap();
        assert!(set.routes.iter().all(|r| r.served == 1));
    }

    #[test]
    fn collections() {
        let two = inst(3, vec![
            Request::new(0, 0, 1).with_window(0, Some(1)),
            Request::new(1, 2, 1).with_window(0, Some(1)),
        ], 2, 1);
        let res = solve(&two);
        assert_eq!((res.max_served, res.tau), (2, 1));
        let res = solve(&two.with_vehicles(1).unwrap());
        assert_eq!((res.max_served, res.tau), (1, 1));
    }

    #[test]
    fn forced_pickup() {
        let i = inst(4, vec![Request::new(0, 0, 3).with_window(5, Some(8))], 1, 1);
        let res = solve(&i);
        assert_eq!(res.max_served, 1);
        assert_eq!(res.solution.tours[0].subroutes[0].waypoints[0].time, Some(5));
    }

    #[test]
    fn identical_copies_share_routes() {
        // three copies, two vehicles of capacity one: two copies served at the same time
        let reqs = (0..3).map(|i| Request::new(10 - i, 0, 2).with_window(0, Some(2))).collect();
        let i = inst(3, reqs, 2, 1);
        let res = solve(&i);
        assert_eq!((res.max_served, res.tau), (2, 1));
        assert_eq!(res, solve_fpt(&i).unwrap());
    }

    #[test]
    fn budget() {
        let reqs = (0..4).map(|i| Request::new(i, i as usize, i as usize + 1).with_window(0, Some(9))).collect();
        let i = inst(5, reqs, 1, 1);
        assert_eq!(solve_fpt_capped(&i, 3), Err(SolveError::BudgetExceeded { cap: 3 }));
    }

    #[test]
    fn matches_oracle_on_small_cases() {
        let reqs = vec![
            Request::new(0, 0, 2).with_window(0, Some(6)),
            Request::new(1, 3, 1).with_window(1, Some(8)),
            Request::new(2, 1, 3).with_window(2, Some(9)),
            Request::new(3, 2, 0).with_window(0, Some(9)),
        ];
        for k in 1..=2 {
            for c in 1..=2 {
                let i = inst(4, reqs.clone(), k, c);
                let o = brute_solve(&i, &OracleLimits::default()).unwrap();
                let e = solve(&i);
                assert_eq!((e.max_served, e.tau), (o.max_served, o.tau), "k={k} c={c}");
            }
        }
    }
}
