//! Route feasibility: inter-waypoint gaps, timestamping, the full check with
//! time windows and service promise, route joining, and solution verification.
//!
//! Timestamps of a route are decided as a system of difference constraints:
//! consecutive waypoints are at least one gap apart, pick-ups respect the
//! earliest time, drop-offs the latest time, and ride times are bounded by the
//! service promise. The least solution of the lower-bound constraints is the
//! earliest tour; the system is feasible iff that fixpoint exists and meets
//! every upper bound.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    Direction, Instance, Request, RequestId, Route, Solution, Stop, Subroute, Time, Tour,
    WaypointKind,
};

/// Minimum time between the starts of two consecutive waypoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapSpec {
    pub travel: Time,
    pub service: Time,
    pub turns: u32,
    pub turn_time: Time,
}

impl GapSpec {
    pub fn total(&self) -> Time {
        self.travel + self.service + self.turns as Time * self.turn_time
    }
}

/// Number of turns between two consecutive waypoints.
///
/// `directions` lists the directions of the subroutes from the one holding the
/// earlier waypoint to the one holding the later waypoint (inclusive). Each
/// direction change is a turn. Two subroutes of equal direction without a change
/// in between need two turns when the vehicle has to drive back.
pub fn turns_between(directions: &[Direction], prev: Stop, next: Stop) -> u32 {
    let changes = directions.windows(2).filter(|w| w[0] != w[1]).count() as u32;
    if changes > 0 || directions.len() < 2 {
        return changes;
    }
    if directions[0].is_behind(prev, next) {
        2
    } else {
        0
    }
}

pub fn gap(instance: &Instance, prev: Stop, next: Stop, directions: &[Direction]) -> GapSpec {
    GapSpec {
        travel: instance.line.dist(prev, next),
        service: instance.service_time,
        turns: turns_between(directions, prev, next),
        turn_time: instance.turn_time,
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Infeasibility {
    #[error("malformed route: {0}")]
    Structure(String),
    #[error("request {0} is picked up more than once")]
    DoubleService(RequestId),
    #[error("capacity exceeded at waypoint {0}")]
    Capacity(usize),
    #[error("time windows cannot be met")]
    Window,
    #[error("service promise cannot be met")]
    Promise,
}

/// A waypoint resolved to instance indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Event {
    pub req: usize,
    pub kind: WaypointKind,
    pub sub: usize,
}

impl Event {
    pub fn stop(&self, inst: &Instance) -> Stop {
        let r = &inst.requests[self.req];
        match self.kind {
            WaypointKind::Pickup => r.origin,
            WaypointKind::Dropoff => r.destination,
        }
    }
}

pub(crate) struct Resolved {
    pub dirs: Vec<Direction>,
    pub events: Vec<Event>,
    pub times: Vec<Option<Time>>,
}

/// Checks the structural route invariants and maps waypoints to request indices.
pub(crate) fn resolve(route: &Route, inst: &Instance) -> Result<Resolved, Infeasibility> {
    let dirs: Vec<Direction> = route.subroutes.iter().map(|s| s.direction).collect();
    let mut events = Vec::new();
    let mut times = Vec::new();
    let mut picked: HashMap<usize, usize> = HashMap::new();
    let mut dropped: HashMap<usize, usize> = HashMap::new();
    for (sub, subroute) in route.subroutes.iter().enumerate() {
        let mut last_key: Option<i64> = None;
        for w in &subroute.waypoints {
            let req = inst
                .index_of(w.request)
                .ok_or_else(|| Infeasibility::Structure(format!("unknown request {}", w.request)))?;
            let r = &inst.requests[req];
            if r.direction() != subroute.direction {
                return Err(Infeasibility::Structure(format!(
                    "request {} served in a subroute of the wrong direction",
                    r.id
                )));
            }
            match w.kind {
                WaypointKind::Pickup => {
                    if picked.insert(req, sub).is_some() {
                        return Err(Infeasibility::DoubleService(r.id));
                    }
                }
                WaypointKind::Dropoff => {
                    if picked.get(&req) != Some(&sub) {
                        return Err(Infeasibility::Structure(format!(
                            "request {} dropped off without a pick-up in the same subroute",
                            r.id
                        )));
                    }
                    if dropped.insert(req, sub).is_some() {
                        return Err(Infeasibility::Structure(format!(
                            "request {} dropped off twice",
                            r.id
                        )));
                    }
                }
            }
            let ev = Event { req, kind: w.kind, sub };
            let key = subroute.direction.key(ev.stop(inst));
            if last_key.is_some_and(|k| key < k) {
                return Err(Infeasibility::Structure(format!(
                    "stops not monotone in subroute {sub} at request {}",
                    r.id
                )));
            }
            last_key = Some(key);
            events.push(ev);
            times.push(w.time);
        }
    }
    if let Some((&req, _)) = picked.iter().find(|(req, _)| !dropped.contains_key(req)) {
        return Err(Infeasibility::Structure(format!(
            "request {} is never dropped off",
            inst.requests[req].id
        )));
    }
    Ok(Resolved { dirs, events, times })
}

/// Index of the first waypoint after which more than `capacity` passengers are on board.
pub(crate) fn capacity_violation(events: &[Event], capacity: usize) -> Option<usize> {
    let mut load = 0usize;
    for (i, e) in events.iter().enumerate() {
        match e.kind {
            WaypointKind::Pickup => {
                load += 1;
                if load > capacity {
                    return Some(i);
                }
            }
            WaypointKind::Dropoff => load -= 1,
        }
    }
    None
}

pub(crate) fn event_gap(inst: &Instance, dirs: &[Direction], prev: &Event, next: &Event) -> Time {
    gap(inst, prev.stop(inst), next.stop(inst), &dirs[prev.sub..=next.sub]).total()
}

/// Earliest timestamps ignoring windows and promise: the first waypoint at 0,
/// every following one exactly one gap later.
pub(crate) fn earliest_times(inst: &Instance, dirs: &[Direction], events: &[Event]) -> Vec<Time> {
    let mut times = Vec::with_capacity(events.len());
    for (i, e) in events.iter().enumerate() {
        let t = if i == 0 { 0 } else { times[i - 1] + event_gap(inst, dirs, &events[i - 1], e) };
        times.push(t);
    }
    times
}

fn ride_bound(inst: &Instance, r: &Request) -> Option<Time> {
    inst.max_ride(r).map(|m| m + inst.service_time)
}

/// Least timestamps satisfying gaps, windows and (optionally) ride-time bounds.
///
/// Requests picked up but not yet dropped off are allowed; their ride bound is
/// simply not constrained yet. Returns `None` if no integer timestamps exist.
pub(crate) fn schedule(
    inst: &Instance,
    dirs: &[Direction],
    events: &[Event],
    with_promise: bool,
) -> Option<Vec<Time>> {
    let m = events.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let gaps: Vec<i64> = (1..m)
        .map(|i| event_gap(inst, dirs, &events[i - 1], &events[i]) as i64)
        .collect();
    // (pickup position, dropoff position, max start-to-start distance)
    let mut rides: Vec<(usize, usize, i64)> = Vec::new();
    if with_promise && inst.alpha.is_some() {
        let mut pick_at = HashMap::new();
        for (i, e) in events.iter().enumerate() {
            match e.kind {
                WaypointKind::Pickup => {
                    pick_at.insert(e.req, i);
                }
                WaypointKind::Dropoff => {
                    if let (Some(&p), Some(b)) =
                        (pick_at.get(&e.req), ride_bound(inst, &inst.requests[e.req]))
                    {
                        rides.push((p, i, b as i64));
                    }
                }
            }
        }
    }
    let lower: Vec<i64> = events
        .iter()
        .map(|e| match e.kind {
            WaypointKind::Pickup => inst.requests[e.req].earliest as i64,
            WaypointKind::Dropoff => 0,
        })
        .collect();
    let mut t = lower.clone();
    let mut rounds = 0;
    loop {
        for i in 1..m {
            t[i] = t[i].max(t[i - 1] + gaps[i - 1]);
        }
        let mut changed = false;
        for &(p, d, bound) in &rides {
            if t[p] < t[d] - bound {
                t[p] = t[d] - bound;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        rounds += 1;
        if rounds > m + 1 {
            return None;
        }
    }
    for (i, e) in events.iter().enumerate() {
        if e.kind == WaypointKind::Dropoff {
            if let Some(l) = inst.requests[e.req].latest {
                if t[i] > l as i64 {
                    return None;
                }
            }
        }
    }
    Some(t.into_iter().map(|x| x as Time).collect())
}

fn timed(route: &Route, times: &[Time]) -> Tour {
    let mut tour = route.clone();
    let mut it = times.iter();
    for s in &mut tour.subroutes {
        for w in &mut s.waypoints {
            w.time = it.next().copied();
        }
    }
    tour
}

/// Timestamps a route with the earliest tour that honours all gaps, ignoring
/// time windows and the service promise.
pub fn earliest_tour(route: &Route, instance: &Instance) -> Result<Tour, Infeasibility> {
    let res = resolve(route, instance)?;
    Ok(timed(route, &earliest_times(instance, &res.dirs, &res.events)))
}

fn promise_kept(inst: &Instance, events: &[Event], times: &[Time]) -> bool {
    let mut pick_at = HashMap::new();
    for (i, e) in events.iter().enumerate() {
        match e.kind {
            WaypointKind::Pickup => {
                pick_at.insert(e.req, i);
            }
            WaypointKind::Dropoff => {
                let p = pick_at[&e.req];
                if let Some(b) = ride_bound(inst, &inst.requests[e.req]) {
                    if times[i] - times[p] > b {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Decides whether the route can be complemented to a feasible tour and returns
/// the earliest such tour.
pub fn check_route(route: &Route, instance: &Instance) -> Result<Tour, Infeasibility> {
    let res = resolve(route, instance)?;
    if let Some(i) = capacity_violation(&res.events, instance.capacity) {
        return Err(Infeasibility::Capacity(i));
    }
    let windowed = res.events.iter().any(|e| instance.requests[e.req].has_window());
    if windowed {
        return solve_constraints(route, instance, &res);
    }
    let times = earliest_times(instance, &res.dirs, &res.events);
    if !promise_kept(instance, &res.events, &times) {
        return Err(Infeasibility::Promise);
    }
    Ok(timed(route, &times))
}

/// Same decision as [`check_route`] but always through the general
/// difference-constraint solver, even without time windows.
pub fn check_route_constraints(route: &Route, instance: &Instance) -> Result<Tour, Infeasibility> {
    let res = resolve(route, instance)?;
    if let Some(i) = capacity_violation(&res.events, instance.capacity) {
        return Err(Infeasibility::Capacity(i));
    }
    solve_constraints(route, instance, &res)
}

fn solve_constraints(route: &Route, inst: &Instance, res: &Resolved) -> Result<Tour, Infeasibility> {
    match schedule(inst, &res.dirs, &res.events, true) {
        Some(times) => Ok(timed(route, &times)),
        None if schedule(inst, &res.dirs, &res.events, false).is_none() => {
            Err(Infeasibility::Window)
        }
        None => Err(Infeasibility::Promise),
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum JoinError {
    #[error("request {0} is served by more than one of the joined routes")]
    DuplicateRequest(RequestId),
}

/// Concatenates the subroute sequences of the given routes, dropping timestamps.
pub fn join_routes(routes: &[Route]) -> Result<Route, JoinError> {
    let mut seen = std::collections::HashSet::new();
    let mut subroutes: Vec<Subroute> = Vec::new();
    for r in routes {
        for id in r.served() {
            if !seen.insert(id) {
                return Err(JoinError::DuplicateRequest(id));
            }
        }
        subroutes.extend(r.untimed().subroutes);
    }
    Ok(Route::new(subroutes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownRequest,
    Structure,
    MissingTimestamp,
    Gap,
    Window,
    Promise,
    Capacity,
    DoubleService,
    TooManyTours,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub tour: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tour {
            Some(t) => write!(f, "tour {t}: {:?}: {}", self.kind, self.detail),
            None => write!(f, "{:?}: {}", self.kind, self.detail),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub served: usize,
    pub max_turns: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Independent referee: re-checks every tour against its given timestamps.
pub fn verify_solution(solution: &Solution, instance: &Instance) -> VerifyReport {
    let mut violations = Vec::new();
    let mut push = |tour: Option<usize>, kind, detail: String| {
        violations.push(Violation { tour, kind, detail })
    };
    if solution.tours.len() > instance.vehicles {
        push(
            None,
            ViolationKind::TooManyTours,
            format!("{} tours for {} vehicles", solution.tours.len(), instance.vehicles),
        );
    }
    let mut pickups: HashMap<RequestId, usize> = HashMap::new();
    for (ti, tour) in solution.tours.iter().enumerate() {
        for id in tour.served() {
            *pickups.entry(id).or_default() += 1;
        }
        if let Some(w) = tour.waypoints().find(|w| instance.index_of(w.request).is_none()) {
            push(Some(ti), ViolationKind::UnknownRequest, format!("request {}", w.request));
            continue;
        }
        let res = match resolve(tour, instance) {
            Ok(res) => res,
            Err(Infeasibility::DoubleService(id)) => {
                push(Some(ti), ViolationKind::DoubleService, format!("request {id}"));
                continue;
            }
            Err(e) => {
                push(Some(ti), ViolationKind::Structure, e.to_string());
                continue;
            }
        };
        if let Some(i) = capacity_violation(&res.events, instance.capacity) {
            push(Some(ti), ViolationKind::Capacity, format!("after waypoint {i}"));
        }
        if res.times.iter().any(Option::is_none) {
            push(Some(ti), ViolationKind::MissingTimestamp, "waypoint without time".into());
            continue;
        }
        let times: Vec<Time> = res.times.iter().map(|t| t.unwrap()).collect();
        let mut pick_time = HashMap::new();
        for (i, e) in res.events.iter().enumerate() {
            let r = &instance.requests[e.req];
            if i > 0 {
                let need = event_gap(instance, &res.dirs, &res.events[i - 1], e);
                if times[i] < times[i - 1] + need {
                    push(
                        Some(ti),
                        ViolationKind::Gap,
                        format!("waypoint {i} at {} but needs >= {}", times[i], times[i - 1] + need),
                    );
                }
            }
            match e.kind {
                WaypointKind::Pickup => {
                    if times[i] < r.earliest {
                        push(Some(ti), ViolationKind::Window, format!("request {} picked up early", r.id));
                    }
                    pick_time.insert(e.req, times[i]);
                }
                WaypointKind::Dropoff => {
                    if r.latest.is_some_and(|l| times[i] > l) {
                        push(Some(ti), ViolationKind::Window, format!("request {} dropped off late", r.id));
                    }
                    if let Some(bound) = ride_bound(instance, r) {
                        let start = pick_time[&e.req];
                        if times[i] < start || times[i] - start > bound {
                            push(
                                Some(ti),
                                ViolationKind::Promise,
                                format!("request {} rides too long", r.id),
                            );
                        }
                    }
                }
            }
        }
    }
    let mut doubles: Vec<_> = pickups.into_iter().filter(|&(_, n)| n > 1).map(|(id, _)| id).collect();
    doubles.sort();
    for id in doubles {
        push(None, ViolationKind::DoubleService, format!("request {id} served more than once"));
    }
    VerifyReport { served: solution.served(), max_turns: solution.max_turns(), violations }
}

/// Ride time of a request in a tour: from the end of the pick-up to the start of the drop-off.
pub fn ride_time(tour: &Tour, id: RequestId, service_time: Time) -> Option<Time> {
    let mut pick = None;
    for w in tour.waypoints().filter(|w| w.request == id) {
        match w.kind {
            WaypointKind::Pickup => pick = w.time,
            WaypointKind::Dropoff => return Some(w.time? - pick? - service_time),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Line, Request, ServicePromise, Waypoint};

    fn inst(gaps: &[Time], reqs: Vec<Request>, c: usize, ts: Time, tt: Time) -> Instance {
        Instance::new(Line::from_gaps(gaps).unwrap(), reqs, 1, c, ts, tt, None).unwrap()
    }

    fn single(id: u64, dir: Direction) -> Subroute {
        Subroute::new(dir, vec![Waypoint::pickup(RequestId(id)), Waypoint::dropoff(RequestId(id))])
    }

    fn times(t: &Tour) -> Vec<Time> {
        t.waypoints().map(|w| w.time.unwrap()).collect()
    }

    #[test]
    fn gap_examples() {
        let i = inst(&[1; 6], vec![], 1, 1, 3);
        let asc = [Direction::Ascending];
        assert_eq!(gap(&i, 2, 5, &asc).total(), 3 + 1);
        let turn = [Direction::Ascending, Direction::Descending];
        assert_eq!(gap(&i, 5, 5, &turn).total(), 4);
        let i0 = inst(&[1; 6], vec![], 1, 1, 0);
        assert_eq!(gap(&i0, 3, 3, &asc).total(), 1);
        let same = [Direction::Ascending, Direction::Ascending];
        assert_eq!(gap(&i, 4, 1, &same).turns, 2);
        assert_eq!(gap(&i, 1, 4, &same).turns, 0);
        let art = [Direction::Ascending, Direction::Descending, Direction::Ascending];
        assert_eq!(gap(&i, 1, 4, &art).turns, 2);
    }

    #[test]
    fn earliest_tour_examples() {
        let i = inst(&[1], vec![Request::new(0, 0, 1)], 1, 0, 0);
        let r = Route::new(vec![single(0, Direction::Ascending)]);
        assert_eq!(times(&earliest_tour(&r, &i).unwrap()), vec![0, 1]);

        let i = inst(&[1], vec![Request::new(0, 0, 1)], 1, 2, 0);
        assert_eq!(times(&earliest_tour(&r, &i).unwrap()), vec![0, 3]);

        let i = inst(&[1], vec![Request::new(0, 0, 1), Request::new(1, 1, 0)], 1, 0, 5);
        let r = Route::new(vec![single(0, Direction::Ascending), single(1, Direction::Descending)]);
        assert_eq!(times(&earliest_tour(&r, &i).unwrap()), vec![0, 1, 6, 7]);
    }

    #[test]
    fn capacity_and_double_service() {
        let i = inst(&[1, 1], vec![Request::new(0, 0, 2), Request::new(1, 0, 2)], 1, 0, 0);
        let r = Route::new(vec![Subroute::new(
            Direction::Ascending,
            vec![
                Waypoint::pickup(RequestId(0)),
                Waypoint::pickup(RequestId(1)),
                Waypoint::dropoff(RequestId(0)),
                Waypoint::dropoff(RequestId(1)),
            ],
        )]);
        assert_eq!(check_route(&r, &i), Err(Infeasibility::Capacity(1)));

        let r = Route::new(vec![
            single(0, Direction::Ascending),
            Subroute::artificial(Direction::Descending),
            single(0, Direction::Ascending),
        ]);
        assert_eq!(check_route(&r, &i), Err(Infeasibility::DoubleService(RequestId(0))));
    }

    #[test]
    fn filter_requests_break_the_promise() {
        let mut i = inst(&[1, 1, 1], vec![Request::new(0, 1, 2), Request::new(1, 1, 2)], 2, 1, 0);
        i.alpha = Some(ServicePromise::new(213, 183).unwrap());
        let r = Route::new(vec![Subroute::new(
            Direction::Ascending,
            vec![
                Waypoint::pickup(RequestId(0)),
                Waypoint::pickup(RequestId(1)),
                Waypoint::dropoff(RequestId(0)),
                Waypoint::dropoff(RequestId(1)),
            ],
        )]);
        assert_eq!(check_route(&r, &i), Err(Infeasibility::Promise));
        assert_eq!(check_route_constraints(&r, &i), Err(Infeasibility::Promise));
        let alone = Route::new(vec![single(0, Direction::Ascending)]);
        assert!(check_route(&alone, &i).is_ok());
    }

    #[test]
    fn windows_force_waiting() {
        let reqs = vec![Request::new(0, 0, 1).with_window(5, Some(6))];
        let i = inst(&[1], reqs, 1, 0, 0);
        let r = Route::new(vec![single(0, Direction::Ascending)]);
        assert_eq!(times(&check_route(&r, &i).unwrap()), vec![5, 6]);

        let reqs = vec![Request::new(0, 0, 1).with_window(5, Some(5))];
        let i = inst(&[1], reqs, 1, 0, 0);
        assert_eq!(check_route(&r, &i), Err(Infeasibility::Window));
    }

    #[test]
    fn promise_pushes_pickup_later() {
        // request 1 must wait for e=10 while request 0 is on board; 0's pickup
        // has to move later so that its ride stays within the promise.
        let reqs = vec![Request::new(0, 0, 3), Request::new(1, 1, 2).with_window(10, None)];
        let mut i = inst(&[1, 1, 1], reqs, 2, 0, 0);
        i.alpha = Some(ServicePromise::new(2, 1).unwrap());
        let r = Route::new(vec![Subroute::new(
            Direction::Ascending,
            vec![
                Waypoint::pickup(RequestId(0)),
                Waypoint::pickup(RequestId(1)),
                Waypoint::dropoff(RequestId(1)),
                Waypoint::dropoff(RequestId(0)),
            ],
        )]);
        let tour = check_route(&r, &i).unwrap();
        assert_eq!(times(&tour), vec![6, 10, 11, 12]);
        assert!(verify_solution(&Solution::new(vec![tour]), &i).is_clean());
    }

    #[test]
    fn structural_errors() {
        let i = inst(&[1, 1], vec![Request::new(0, 0, 2), Request::new(1, 2, 0)], 1, 0, 0);
        let wrong_dir = Route::new(vec![single(1, Direction::Ascending)]);
        assert!(matches!(check_route(&wrong_dir, &i), Err(Infeasibility::Structure(_))));
        let reversed = Route::new(vec![Subroute::new(
            Direction::Ascending,
            vec![Waypoint::dropoff(RequestId(0)), Waypoint::pickup(RequestId(0))],
        )]);
        assert!(matches!(check_route(&reversed, &i), Err(Infeasibility::Structure(_))));
        let unknown = Route::new(vec![single(9, Direction::Ascending)]);
        assert!(matches!(check_route(&unknown, &i), Err(Infeasibility::Structure(_))));
    }

    #[test]
    fn degenerate_route_is_feasible() {
        let i = inst(&[1], vec![], 1, 0, 0);
        let r = Route::new(vec![
            Subroute::artificial(Direction::Ascending),
            Subroute::artificial(Direction::Descending),
        ]);
        let tour = check_route(&r, &i).unwrap();
        assert_eq!(tour.turns(), 2);
    }

    #[test]
    fn join_examples() {
        let reqs = vec![Request::new(0, 0, 2), Request::new(1, 2, 0), Request::new(2, 1, 3)];
        let i = inst(&[1, 1, 1], reqs, 1, 0, 2);
        let a = Route::new(vec![single(0, Direction::Ascending)]);
        let b = Route::new(vec![single(1, Direction::Descending)]);
        let joined = join_routes(&[a.clone(), b]).unwrap();
        assert_eq!(joined.turns(), 2);
        assert!(check_route(&joined, &i).is_ok());

        // B starts at stop 1, behind A's last stop 2: two turns at the junction.
        let b = Route::new(vec![single(2, Direction::Ascending)]);
        let joined = join_routes(&[a.clone(), b]).unwrap();
        let tour = check_route(&joined, &i).unwrap();
        assert_eq!(times(&tour), vec![0, 2, 2 + 1 + 2 * 2, 2 + 1 + 4 + 2]);

        assert_eq!(join_routes(&[a.clone(), a]), Err(JoinError::DuplicateRequest(RequestId(0))));
    }

    #[test]
    fn verify_flags_bad_gaps_and_double_service() {
        let i = inst(&[2], vec![Request::new(0, 0, 1)], 1, 0, 0);
        let good = Route::new(vec![Subroute::new(
            Direction::Ascending,
            vec![Waypoint::pickup(RequestId(0)).at(0), Waypoint::dropoff(RequestId(0)).at(2)],
        )]);
        assert!(verify_solution(&Solution::new(vec![good.clone()]), &i).is_clean());

        let mut bad = good.clone();
        bad.subroutes[0].waypoints[1].time = Some(1);
        assert!(verify_solution(&Solution::new(vec![bad]), &i).has(ViolationKind::Gap));

        let two = Instance::new(i.line.clone(), i.requests.clone(), 2, 1, 0, 0, None).unwrap();
        let rep = verify_solution(&Solution::new(vec![good.clone(), good]), &two);
        assert!(rep.has(ViolationKind::DoubleService));
    }
}
