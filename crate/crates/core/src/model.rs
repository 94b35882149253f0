//! Domain types shared by every solver, plus the on-disk JSON formats.
//!
//! Stops are 0-based indices along the line. Times and distances are
//! non-negative integers. A request without a latest drop-off time has an
//! unbounded window; an instance without a service promise has `alpha = None`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Time = u64;
pub type Stop = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line needs at least 2 stops, got {0}")]
    TooFewStops(usize),
    #[error("distance data does not describe {expected} stops")]
    BadShape { expected: usize },
    #[error("distances are not symmetric: dist[{i}][{j}] != dist[{j}][{i}]")]
    NonSymmetricDistances { i: Stop, j: Stop },
    #[error("distance between distinct stops {i} and {j} is zero (or diagonal entry non-zero)")]
    ZeroDistance { i: Stop, j: Stop },
    #[error("monotone consistency violated: dist[{i}][{j}] > dist[{i}][{via}] + dist[{via}][{j}]")]
    MonotoneViolation { i: Stop, via: Stop, j: Stop },
    #[error("request {0} has an empty time window (l < e)")]
    BadWindow(RequestId),
    #[error("request {0} has an invalid origin/destination")]
    BadStopIndex(RequestId),
    #[error("service promise factor must be a rational >= 1 with non-zero denominator, got {num}/{den}")]
    BadAlpha { num: u64, den: u64 },
    #[error("request id {0} appears more than once")]
    DuplicateId(RequestId),
    #[error("{0} must be at least 1")]
    BadFleet(&'static str),
    #[error("invalid 3-Partition instance: {0}")]
    BadThreePartition(String),
    #[error("malformed JSON: {0}")]
    Json(String),
}

/// Opaque request identifier; unique within an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u64);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "asc")]
    Ascending,
    #[serde(rename = "desc")]
    Descending,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Ascending => Direction::Descending,
            Direction::Descending => Direction::Ascending,
        }
    }

    /// True if `to` lies strictly behind `from` when driving in this direction.
    pub fn is_behind(self, from: Stop, to: Stop) -> bool {
        match self {
            Direction::Ascending => to < from,
            Direction::Descending => to > from,
        }
    }

    /// Position of a stop along the travel direction; increases as the vehicle advances.
    pub fn key(self, stop: Stop) -> i64 {
        match self {
            Direction::Ascending => stop as i64,
            Direction::Descending => -(stop as i64),
        }
    }
}

/// Exact rational service promise factor `num/den >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServicePromise {
    pub num: u64,
    pub den: u64,
}

impl ServicePromise {
    pub fn new(num: u64, den: u64) -> Result<Self, ModelError> {
        if den == 0 || num < den {
            return Err(ModelError::BadAlpha { num, den });
        }
        Ok(ServicePromise { num, den })
    }

    /// Largest integer ride time allowed for a request with the given direct distance.
    pub fn max_ride(&self, direct: Time) -> Time {
        ((self.num as u128 * direct as u128) / self.den as u128) as Time
    }
}

/// A line of stops with a symmetric time-distance matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    dist: Vec<Vec<Time>>,
}

impl Line {
    /// Shortcut-free line from consecutive gaps; `gaps.len() + 1` stops.
    pub fn from_gaps(gaps: &[Time]) -> Result<Line, ModelError> {
        Line::from_forward_edges(gaps.len() + 1, gaps, &[])
    }

    /// Line whose distances are shortest forward paths over consecutive gaps
    /// plus the given shortcut edges `(i, j, d)` with `i < j`.
    pub fn from_forward_edges(
        stops: usize,
        gaps: &[Time],
        shortcuts: &[(Stop, Stop, Time)],
    ) -> Result<Line, ModelError> {
        if stops < 2 {
            return Err(ModelError::TooFewStops(stops));
        }
        if gaps.len() + 1 != stops {
            return Err(ModelError::BadShape { expected: stops });
        }
        if let Some(i) = gaps.iter().position(|&g| g == 0) {
            return Err(ModelError::ZeroDistance { i, j: i + 1 });
        }
        let mut out: Vec<Vec<(Stop, Time)>> = vec![Vec::new(); stops];
        for (i, &g) in gaps.iter().enumerate() {
            out[i].push((i + 1, g));
        }
        for &(i, j, d) in shortcuts {
            if i >= j || j >= stops {
                return Err(ModelError::BadShape { expected: stops });
            }
            if d == 0 {
                return Err(ModelError::ZeroDistance { i, j });
            }
            out[i].push((j, d));
        }
        let mut dist = vec![vec![0; stops]; stops];
        for src in 0..stops {
            let mut best = vec![Time::MAX; stops];
            best[src] = 0;
            // stops are already in topological order
            for v in src..stops {
                if best[v] == Time::MAX {
                    continue;
                }
                for &(w, d) in &out[v] {
                    best[w] = best[w].min(best[v] + d);
                }
            }
            for j in src + 1..stops {
                dist[src][j] = best[j];
                dist[j][src] = best[j];
            }
        }
        Ok(Line { dist })
    }

    /// Validates a full matrix against symmetry, positivity and monotone consistency.
    pub fn from_matrix(dist: Vec<Vec<Time>>) -> Result<Line, ModelError> {
        let h = dist.len();
        if h < 2 {
            return Err(ModelError::TooFewStops(h));
        }
        if dist.iter().any(|row| row.len() != h) {
            return Err(ModelError::BadShape { expected: h });
        }
        #[allow(clippy::needless_range_loop)] // symmetric pairs read clearer by index
        for i in 0..h {
            if dist[i][i] != 0 {
                return Err(ModelError::ZeroDistance { i, j: i });
            }
            for j in i + 1..h {
                if dist[i][j] != dist[j][i] {
                    return Err(ModelError::NonSymmetricDistances { i, j });
                }
                if dist[i][j] == 0 {
                    return Err(ModelError::ZeroDistance { i, j });
                }
            }
        }
        for i in 0..h {
            for via in i + 1..h {
                for j in via + 1..h {
                    if dist[i][j] > dist[i][via] + dist[via][j] {
                        return Err(ModelError::MonotoneViolation { i, via, j });
                    }
                }
            }
        }
        Ok(Line { dist })
    }

    pub fn stops(&self) -> usize {
        self.dist.len()
    }

    #[inline]
    pub fn dist(&self, i: Stop, j: Stop) -> Time {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Time>] {
        &self.dist
    }

    pub fn consecutive_gaps(&self) -> Vec<Time> {
        (0..self.stops() - 1).map(|i| self.dist[i][i + 1]).collect()
    }

    /// Every distance equals the sum of consecutive gaps in between.
    pub fn is_shortcut_free(&self) -> bool {
        let h = self.stops();
        let mut prefix = vec![0; h];
        for i in 1..h {
            prefix[i] = prefix[i - 1] + self.dist[i - 1][i];
        }
        (0..h).all(|i| (i + 1..h).all(|j| self.dist[i][j] == prefix[j] - prefix[i]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub id: RequestId,
    pub origin: Stop,
    pub destination: Stop,
    pub earliest: Time,
    /// `None` is an unbounded latest drop-off time.
    pub latest: Option<Time>,
}

impl Request {
    pub fn new(id: u64, origin: Stop, destination: Stop) -> Request {
        Request { id: RequestId(id), origin, destination, earliest: 0, latest: None }
    }

    pub fn with_window(mut self, earliest: Time, latest: Option<Time>) -> Request {
        self.earliest = earliest;
        self.latest = latest;
        self
    }

    pub fn direction(&self) -> Direction {
        direction_of(self)
    }

    pub fn has_window(&self) -> bool {
        self.earliest > 0 || self.latest.is_some()
    }

    /// Endpoints as `(min, max)` stop indices.
    pub fn span(&self) -> (Stop, Stop) {
        (self.origin.min(self.destination), self.origin.max(self.destination))
    }

    /// Identical requests (copies) share origin, destination and window.
    pub fn same_class(&self, other: &Request) -> bool {
        self.origin == other.origin
            && self.destination == other.destination
            && self.earliest == other.earliest
            && self.latest == other.latest
    }
}

pub fn direction_of(request: &Request) -> Direction {
    if request.origin < request.destination {
        Direction::Ascending
    } else {
        Direction::Descending
    }
}

/// Same direction and the open intervals between origin and destination intersect.
pub fn overlaps(p: &Request, q: &Request) -> bool {
    if p.direction() != q.direction() {
        return false;
    }
    let (a0, a1) = p.span();
    let (b0, b1) = q.span();
    a0.max(b0) < a1.min(b1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub line: Line,
    pub requests: Vec<Request>,
    pub vehicles: usize,
    pub capacity: usize,
    pub service_time: Time,
    pub turn_time: Time,
    pub alpha: Option<ServicePromise>,
    index: HashMap<RequestId, usize>,
}

impl Instance {
    pub fn new(
        line: Line,
        requests: Vec<Request>,
        vehicles: usize,
        capacity: usize,
        service_time: Time,
        turn_time: Time,
        alpha: Option<ServicePromise>,
    ) -> Result<Instance, ModelError> {
        if vehicles == 0 {
            return Err(ModelError::BadFleet("vehicles"));
        }
        if capacity == 0 {
            return Err(ModelError::BadFleet("capacity"));
        }
        if let Some(a) = alpha {
            ServicePromise::new(a.num, a.den)?;
        }
        let h = line.stops();
        let mut index = HashMap::with_capacity(requests.len());
        for (i, r) in requests.iter().enumerate() {
            if r.origin >= h || r.destination >= h || r.origin == r.destination {
                return Err(ModelError::BadStopIndex(r.id));
            }
            if r.latest.is_some_and(|l| l < r.earliest) {
                return Err(ModelError::BadWindow(r.id));
            }
            if index.insert(r.id, i).is_some() {
                return Err(ModelError::DuplicateId(r.id));
            }
        }
        Ok(Instance { line, requests, vehicles, capacity, service_time, turn_time, alpha, index })
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn index_of(&self, id: RequestId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn request(&self, id: RequestId) -> Option<&Request> {
        self.index_of(id).map(|i| &self.requests[i])
    }

    pub fn has_time_windows(&self) -> bool {
        self.requests.iter().any(Request::has_window)
    }

    /// `max l + 1` when every request has a finite latest drop-off time.
    pub fn horizon(&self) -> Option<Time> {
        self.requests
            .iter()
            .try_fold(0, |acc: Time, r| r.latest.map(|l| acc.max(l + 1)))
    }

    /// Maximum ride time of a request, `None` without a service promise.
    pub fn max_ride(&self, request: &Request) -> Option<Time> {
        self.alpha
            .map(|a| a.max_ride(self.line.dist(request.origin, request.destination)))
    }

    /// Same instance with a different request list (ids must stay unique).
    pub fn with_requests(&self, requests: Vec<Request>) -> Result<Instance, ModelError> {
        Instance::new(
            self.line.clone(),
            requests,
            self.vehicles,
            self.capacity,
            self.service_time,
            self.turn_time,
            self.alpha,
        )
    }

    pub fn with_vehicles(&self, vehicles: usize) -> Result<Instance, ModelError> {
        let mut inst = self.clone();
        if vehicles == 0 {
            return Err(ModelError::BadFleet("vehicles"));
        }
        inst.vehicles = vehicles;
        Ok(inst)
    }

    pub fn from_json(text: &str) -> Result<Instance, ModelError> {
        let raw: RawInstance =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        validate_instance(raw)
    }

    pub fn to_raw(&self) -> RawInstance {
        let distances = if self.line.is_shortcut_free() {
            RawDistances::Consecutive(self.line.consecutive_gaps())
        } else {
            RawDistances::Matrix(self.line.matrix().to_vec())
        };
        RawInstance {
            stops: self.line.stops(),
            distances,
            vehicles: self.vehicles,
            capacity: self.capacity,
            service_time: self.service_time,
            turn_time: self.turn_time,
            alpha: self.alpha,
            requests: self
                .requests
                .iter()
                .map(|r| RawRequest {
                    id: r.id,
                    o: r.origin,
                    d: r.destination,
                    e: r.earliest,
                    l: r.latest,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("instance serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawDistances {
    Consecutive(Vec<Time>),
    Matrix(Vec<Vec<Time>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRequest {
    pub id: RequestId,
    pub o: Stop,
    pub d: Stop,
    #[serde(default)]
    pub e: Time,
    #[serde(default)]
    pub l: Option<Time>,
}

/// Instance exactly as it appears on disk, before validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInstance {
    pub stops: usize,
    pub distances: RawDistances,
    pub vehicles: usize,
    pub capacity: usize,
    pub service_time: Time,
    pub turn_time: Time,
    pub alpha: Option<ServicePromise>,
    pub requests: Vec<RawRequest>,
}

pub fn validate_instance(raw: RawInstance) -> Result<Instance, ModelError> {
    let line = match raw.distances {
        RawDistances::Consecutive(gaps) => {
            if gaps.len() + 1 != raw.stops {
                return Err(ModelError::BadShape { expected: raw.stops });
            }
            Line::from_gaps(&gaps)?
        }
        RawDistances::Matrix(m) => {
            if m.len() != raw.stops {
                return Err(ModelError::BadShape { expected: raw.stops });
            }
            Line::from_matrix(m)?
        }
    };
    let requests = raw
        .requests
        .into_iter()
        .map(|r| Request { id: r.id, origin: r.o, destination: r.d, earliest: r.e, latest: r.l })
        .collect();
    Instance::new(
        line,
        requests,
        raw.vehicles,
        raw.capacity,
        raw.service_time,
        raw.turn_time,
        raw.alpha,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaypointKind {
    Dropoff,
    Pickup,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Waypoint {
    #[serde(rename = "req")]
    pub request: RequestId,
    pub kind: WaypointKind,
    /// Start of the pick-up / drop-off; absent in an untimed route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Time>,
}

impl Waypoint {
    pub fn pickup(request: RequestId) -> Waypoint {
        Waypoint { request, kind: WaypointKind::Pickup, time: None }
    }

    pub fn dropoff(request: RequestId) -> Waypoint {
        Waypoint { request, kind: WaypointKind::Dropoff, time: None }
    }

    pub fn at(mut self, time: Time) -> Waypoint {
        self.time = Some(time);
        self
    }
}

/// A one-direction segment of a route; may be empty ("artificial").
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subroute {
    pub direction: Direction,
    pub waypoints: Vec<Waypoint>,
}

impl Subroute {
    pub fn new(direction: Direction, waypoints: Vec<Waypoint>) -> Subroute {
        Subroute { direction, waypoints }
    }

    /// Serves the given same-direction requests in canonical order: by stop along
    /// the direction, drop-offs before pick-ups at a shared stop, then by id.
    pub fn canonical<'a>(
        direction: Direction,
        requests: impl IntoIterator<Item = &'a Request>,
    ) -> Subroute {
        let mut events: Vec<(i64, WaypointKind, RequestId)> = Vec::new();
        for r in requests {
            events.push((direction.key(r.origin), WaypointKind::Pickup, r.id));
            events.push((direction.key(r.destination), WaypointKind::Dropoff, r.id));
        }
        events.sort();
        let waypoints = events
            .into_iter()
            .map(|(_, kind, request)| Waypoint { request, kind, time: None })
            .collect();
        Subroute { direction, waypoints }
    }

    pub fn artificial(direction: Direction) -> Subroute {
        Subroute { direction, waypoints: Vec::new() }
    }

    pub fn is_artificial(&self) -> bool {
        self.waypoints.is_empty()
    }
}

/// Sequence of subroutes. A route whose waypoints all carry timestamps is a tour.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub subroutes: Vec<Subroute>,
}

pub type Tour = Route;

impl Route {
    pub fn new(subroutes: Vec<Subroute>) -> Route {
        Route { subroutes }
    }

    /// Number of subroutes; the vehicle turns at the end of each one.
    pub fn turns(&self) -> usize {
        self.subroutes.len()
    }

    pub fn waypoints(&self) -> impl Iterator<Item = &Waypoint> {
        self.subroutes.iter().flat_map(|s| s.waypoints.iter())
    }

    pub fn served(&self) -> impl Iterator<Item = RequestId> + '_ {
        self.waypoints()
            .filter(|w| w.kind == WaypointKind::Pickup)
            .map(|w| w.request)
    }

    pub fn is_timed(&self) -> bool {
        self.waypoints().all(|w| w.time.is_some())
    }

    /// Same route with every timestamp removed.
    pub fn untimed(&self) -> Route {
        let mut r = self.clone();
        for s in &mut r.subroutes {
            for w in &mut s.waypoints {
                w.time = None;
            }
        }
        r
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub tours: Vec<Tour>,
}

impl Solution {
    pub fn new(tours: Vec<Tour>) -> Solution {
        Solution { tours }
    }

    /// Distinct requests picked up by some tour.
    pub fn served(&self) -> usize {
        let mut ids: Vec<RequestId> = self.tours.iter().flat_map(|t| t.served()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    pub fn max_turns(&self) -> usize {
        self.tours.iter().map(Route::turns).max().unwrap_or(0)
    }

    pub fn from_json(text: &str) -> Result<Solution, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }
}

/// Input of the 3-Partition problem: `3m` positive integers summing to `m * target`,
/// each strictly between `target / 4` and `target / 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreePartitionInstance {
    pub values: Vec<u64>,
    pub groups: usize,
    pub target: u64,
}

impl ThreePartitionInstance {
    pub fn new(values: Vec<u64>, groups: usize, target: u64) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::BadThreePartition(msg));
        if groups == 0 {
            return bad("m must be at least 1".into());
        }
        if values.len() != 3 * groups {
            return bad(format!("expected 3m = {} values, got {}", 3 * groups, values.len()));
        }
        if let Some(&s) = values.iter().find(|&&s| !(4 * s > target && 2 * s < target)) {
            return bad(format!("value {s} violates T/4 < s < T/2 for T = {target}"));
        }
        let sum: u64 = values.iter().sum();
        if sum != groups as u64 * target {
            return bad(format!("sum of values {sum} != m*T = {}", groups as u64 * target));
        }
        Ok(ThreePartitionInstance { values, groups, target })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
