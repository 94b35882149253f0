//! Polynomial cases without time windows.
//!
//! Without windows every request can be served by one vehicle, and the minimum
//! turn count follows from the minimum number of ascending and descending
//! subroutes. When subroute feasibility is decided by capacity alone, that
//! number is `ceil(chi / c)` where `chi` is the maximum number of pairwise
//! overlapping requests of a direction (an interval-graph clique).

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::feasibility::{check_route, earliest_tour, join_routes};
use crate::model::{Direction, Instance, Request, RequestId, Route, Solution, Subroute};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("instance has time windows")]
    Windowed,
    #[error("instance matches none of the polynomial cases")]
    NotPolyCase,
}

/// Maximum cliques of the ascending and descending overlap graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapProfile {
    pub ascending: usize,
    pub descending: usize,
    pub clique_ascending: Vec<RequestId>,
    pub clique_descending: Vec<RequestId>,
}

impl OverlapProfile {
    pub fn of(requests: &[Request]) -> OverlapProfile {
        let (ascending, clique_ascending) = max_overlap(requests, Direction::Ascending);
        let (descending, clique_descending) = max_overlap(requests, Direction::Descending);
        OverlapProfile { ascending, descending, clique_ascending, clique_descending }
    }
}

/// Serves every request with a single tour: one subroute per request, joined in
/// input order and timestamped with the earliest tour.
pub fn serve_all_no_tw(instance: &Instance) -> Result<Solution, PolyError> {
    if instance.has_time_windows() {
        return Err(PolyError::Windowed);
    }
    if instance.is_empty() {
        return Ok(Solution::default());
    }
    let singles: Vec<Route> = instance
        .requests
        .iter()
        .map(|r| Route::new(vec![Subroute::canonical(r.direction(), [r])]))
        .collect();
    let route = join_routes(&singles).expect("request ids are unique");
    let tour = earliest_tour(&route, instance).expect("joined route is well formed");
    Ok(Solution::new(vec![tour]))
}

/// Maximum number of pairwise overlapping requests of one direction, with a witness clique.
///
/// Sweeps the open intervals `(min(o,d), max(o,d))`; at a shared coordinate
/// intervals close before others open.
pub fn max_overlap(requests: &[Request], direction: Direction) -> (usize, Vec<RequestId>) {
    // (coordinate, 0 = close / 1 = open, id)
    let mut events: Vec<(usize, u8, RequestId)> = Vec::new();
    for r in requests.iter().filter(|r| r.direction() == direction) {
        let (lo, hi) = r.span();
        events.push((lo, 1, r.id));
        events.push((hi, 0, r.id));
    }
    events.sort();
    let mut active = BTreeSet::new();
    let mut best: Vec<RequestId> = Vec::new();
    for (_, kind, id) in events {
        if kind == 1 {
            active.insert(id);
            if active.len() > best.len() {
                best = active.iter().copied().collect();
            }
        } else {
            active.remove(&id);
        }
    }
    (best.len(), best)
}

/// Subroutes of one direction from a greedy interval colouring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubroutePlan {
    pub count: usize,
    pub assignment: Vec<(RequestId, usize)>,
    pub subroutes: Vec<Subroute>,
}

/// Colours the overlap intervals greedily by left endpoint (optimal on interval
/// graphs) and packs `capacity` colours into each subroute.
pub fn min_subroutes(requests: &[Request], direction: Direction, capacity: usize) -> SubroutePlan {
    let mut reqs: Vec<&Request> = requests.iter().filter(|r| r.direction() == direction).collect();
    reqs.sort_by_key(|r| (r.span(), r.id));
    let mut free: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
    let mut busy: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    let mut colours = 0;
    let mut assignment = Vec::with_capacity(reqs.len());
    for r in &reqs {
        let (lo, hi) = r.span();
        while let Some(&Reverse((end, c))) = busy.peek() {
            if end > lo {
                break;
            }
            busy.pop();
            free.push(Reverse(c));
        }
        let colour = match free.pop() {
            Some(Reverse(c)) => c,
            None => {
                colours += 1;
                colours - 1
            }
        };
        busy.push(Reverse((hi, colour)));
        assignment.push((r.id, colour / capacity));
    }
    let count = colours.div_ceil(capacity);
    let subroutes = (0..count)
        .map(|s| {
            let members = reqs
                .iter()
                .zip(&assignment)
                .filter(|(_, &(_, sub))| sub == s)
                .map(|(r, _)| *r);
            Subroute::canonical(direction, members)
        })
        .collect();
    SubroutePlan { count, assignment, subroutes }
}

/// Minimum of the maximum turns per vehicle given `a` ascending and `b`
/// descending subroutes and `k` vehicles.
pub fn tau_formula(a: usize, b: usize, k: usize) -> usize {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    if a == 0 {
        return 0;
    }
    (a + b).div_ceil(k).max(2 * a.div_ceil(k) - 1)
}

/// Length of the shortest alternating route holding `x` major and `y` minor subroutes.
fn alternating_len(x: usize, y: usize) -> usize {
    if x == 0 && y == 0 {
        0
    } else {
        (x + y).max(2 * x.max(y) - 1)
    }
}

fn layout(
    x: usize,
    y: usize,
    major_dir: Direction,
    major: &mut impl Iterator<Item = Subroute>,
    minor: &mut impl Iterator<Item = Subroute>,
) -> Route {
    let len = alternating_len(x, y);
    let (first_dir, second_n, major_first) =
        if x >= y { (major_dir, y, true) } else { (major_dir.opposite(), x, false) };
    let mut subroutes = Vec::with_capacity(len);
    let mut second_used = 0;
    for pos in 0..len {
        let dir = if pos % 2 == 0 { first_dir } else { first_dir.opposite() };
        let take_first = pos % 2 == 0;
        let from_major = take_first == major_first;
        let sub = if take_first {
            if from_major { major.next() } else { minor.next() }
        } else if second_used < second_n {
            second_used += 1;
            if from_major { major.next() } else { minor.next() }
        } else {
            None
        };
        subroutes.push(sub.unwrap_or_else(|| Subroute::artificial(dir)));
    }
    Route::new(subroutes)
}

/// Combines feasible subroutes into `k` alternating routes whose maximum
/// number of subroutes equals [`tau_formula`], padding with artificial subroutes.
pub fn build_min_turn_collection(
    ascending: Vec<Subroute>,
    descending: Vec<Subroute>,
    k: usize,
) -> Vec<Route> {
    let (major, minor, major_dir) = if ascending.len() >= descending.len() {
        (ascending, descending, Direction::Ascending)
    } else {
        (descending, ascending, Direction::Descending)
    };
    let (a, b) = (major.len(), minor.len());
    let tau = tau_formula(a, b, k);
    if a == 0 {
        return vec![Route::default(); k];
    }
    let q = a.div_ceil(k);
    let full = a - k * (q - 1);
    let majors: Vec<usize> = (0..k).map(|r| if r < full { q } else { q - 1 }).collect();
    let mut left = b;
    let minors: Vec<usize> = majors
        .iter()
        .map(|&x| {
            let mut y = 0;
            while y < left && alternating_len(x, y + 1) <= tau {
                y += 1;
            }
            left -= y;
            y
        })
        .collect();
    debug_assert_eq!(left, 0, "subroute counts exceed the turn bound");
    let mut major = major.into_iter();
    let mut minor = minor.into_iter();
    majors
        .iter()
        .zip(&minors)
        .map(|(&x, &y)| layout(x, y, major_dir, &mut major, &mut minor))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyCase {
    /// No time windows and no service promise.
    NoPromise,
    /// No time windows, no shortcuts and no service time.
    NoShortcutsNoServiceTime,
    /// No time windows and capacity 1.
    UnitCapacity,
}

/// Which polynomial case (if any) the instance falls into.
pub fn poly_case(instance: &Instance) -> Option<PolyCase> {
    if instance.has_time_windows() {
        None
    } else if instance.alpha.is_none() {
        Some(PolyCase::NoPromise)
    } else if instance.service_time == 0 && instance.line.is_shortcut_free() {
        Some(PolyCase::NoShortcutsNoServiceTime)
    } else if instance.capacity == 1 {
        Some(PolyCase::UnitCapacity)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyResult {
    pub case: PolyCase,
    pub tau: usize,
    pub ascending_subroutes: usize,
    pub descending_subroutes: usize,
    pub profile: OverlapProfile,
    pub solution: Solution,
}

pub fn solve_minturn_poly(instance: &Instance) -> Result<PolyResult, PolyError> {
    let case = poly_case(instance).ok_or(PolyError::NotPolyCase)?;
    let profile = OverlapProfile::of(&instance.requests);
    let c = instance.capacity;
    let asc = min_subroutes(&instance.requests, Direction::Ascending, c);
    let desc = min_subroutes(&instance.requests, Direction::Descending, c);
    debug_assert_eq!(asc.count, profile.ascending.div_ceil(c));
    debug_assert_eq!(desc.count, profile.descending.div_ceil(c));
    let (a, b) = (asc.count, desc.count);
    let k = instance.vehicles.min(instance.len().max(1));
    let tau = tau_formula(a, b, k);
    let routes = build_min_turn_collection(asc.subroutes, desc.subroutes, k);
    let tours = routes
        .iter()
        .filter(|r| r.turns() > 0)
        .map(|r| check_route(r, instance).expect("capacity-feasible subroutes join feasibly"))
        .collect();
    Ok(PolyResult {
        case,
        tau,
        ascending_subroutes: a,
        descending_subroutes: b,
        profile,
        solution: Solution::new(tours),
    })
}
