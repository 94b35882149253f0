//! 3-Partition reductions: instance generators, optimal witnesses for
//! yes-instances, and small no-certificates.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::check_route;
use crate::model::{
    Direction, Instance, Line, ModelError, Request, RequestId, Route, ServicePromise, Solution,
    Stop, Subroute, ThreePartitionInstance, Time,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("capacity must be at least 2, got {0}")]
    BadCapacity(usize),
    #[error("at least one vehicle is required")]
    BadVehicles,
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("witness route is infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    ServiceTime,
    Shortcut,
    TimeWindows,
    GapServiceTime,
    GapShortcut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum RoleTag {
    Value { i: usize, j: usize },
    LongPlug { i: usize },
    ShortPlug { i: usize },
    Promise,
    Filter { j: usize },
    Separator { j: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutput {
    pub kind: ReductionKind,
    pub tp: ThreePartitionInstance,
    pub k: usize,
    pub c: usize,
    pub instance: Instance,
    pub tags: BTreeMap<RequestId, RoleTag>,
    pub expected_tau_yes: usize,
    /// Lower bound on tau for no-instances. Without it (time windows) a
    /// no-instance shows as fewer served requests instead.
    pub expected_tau_no_lower_bound: Option<usize>,
    /// Stop names in the construction's own notation.
    pub stop_labels: Vec<String>,
}

#[derive(Serialize)]
struct Meta<'a> {
    kind: ReductionKind,
    values: &'a [u64],
    groups: usize,
    target: u64,
    vehicles: usize,
    capacity: usize,
    expected_tau_yes: usize,
    expected_tau_no_lower_bound: Option<usize>,
    stop_labels: &'a [String],
    tags: Vec<TagEntry>,
}

#[derive(Serialize)]
struct TagEntry {
    id: RequestId,
    #[serde(flatten)]
    tag: RoleTag,
}

impl ReductionOutput {
    /// Sidecar metadata with role tags and expected values.
    pub fn meta_json(&self) -> String {
        let meta = Meta {
            kind: self.kind,
            values: &self.tp.values,
            groups: self.tp.groups,
            target: self.tp.target,
            vehicles: self.instance.vehicles,
            capacity: self.c,
            expected_tau_yes: self.expected_tau_yes,
            expected_tau_no_lower_bound: self.expected_tau_no_lower_bound,
            stop_labels: &self.stop_labels,
            tags: self.tags.iter().map(|(&id, &tag)| TagEntry { id, tag }).collect(),
        };
        serde_json::to_string_pretty(&meta).expect("metadata serializes")
    }

    pub fn ids_where(&self, pred: impl Fn(&RoleTag) -> bool) -> Vec<RequestId> {
        self.tags.iter().filter(|(_, t)| pred(t)).map(|(&id, _)| id).collect()
    }

    pub fn total_requests(&self) -> usize {
        self.instance.len()
    }
}

/// Groups of value indices, one group per target-sum set.
pub type Partition = Vec<Vec<usize>>;

/// Exhaustive search for a 3-partition.
pub fn solve_3partition(tp: &ThreePartitionInstance) -> Option<Partition> {
    fn go(tp: &ThreePartitionInstance, used: &mut [bool], groups: &mut Partition) -> bool {
        let Some(first) = used.iter().position(|&u| !u) else {
            return true;
        };
        used[first] = true;
        let n = tp.values.len();
        for a in first + 1..n {
            if used[a] {
                continue;
            }
            for b in a + 1..n {
                if used[b] || tp.values[first] + tp.values[a] + tp.values[b] != tp.target {
                    continue;
                }
                used[a] = true;
                used[b] = true;
                groups.push(vec![first, a, b]);
                if go(tp, used, groups) {
                    return true;
                }
                groups.pop();
                used[a] = false;
                used[b] = false;
            }
        }
        used[first] = false;
        false
    }
    let mut groups = Vec::new();
    go(tp, &mut vec![false; tp.values.len()], &mut groups).then_some(groups)
}

struct Builder {
    requests: Vec<Request>,
    tags: BTreeMap<RequestId, RoleTag>,
}

impl Builder {
    fn new() -> Self {
        Builder { requests: Vec::new(), tags: BTreeMap::new() }
    }

    fn add(&mut self, o: Stop, d: Stop, window: Option<(Time, Time)>, tag: RoleTag) {
        let id = self.requests.len() as u64;
        let mut r = Request::new(id, o, d);
        if let Some((e, l)) = window {
            r = r.with_window(e, Some(l));
        }
        self.requests.push(r);
        self.tags.insert(RequestId(id), tag);
    }
}

fn check_fleet(k: usize, c: usize) -> Result<(), ReductionError> {
    if c < 2 {
        return Err(ReductionError::BadCapacity(c));
    }
    if k == 0 {
        return Err(ReductionError::BadVehicles);
    }
    Ok(())
}

/// Service-time construction: unit line, `t_s = 1`, a service promise below 2.
pub fn gen_service_time(tp: &ThreePartitionInstance, k: usize, c: usize) -> Result<ReductionOutput, ReductionError> {
    check_fleet(k, c)?;
    let (m, n, t) = (tp.groups, tp.len(), tp.target as usize);
    let stops = 4 + 4 * t * n + (c - 2);
    // the construction numbers stops from 1
    let at = |x: usize| x - 1;
    let mut b = Builder::new();
    for (i0, &s) in tp.values.iter().enumerate() {
        let base = 4 + t * i0;
        for j in 1..=s as usize {
            b.add(at(base + j - 1), at(base + j), None, RoleTag::Value { i: i0 + 1, j });
        }
    }
    for (i0, &s) in tp.values.iter().enumerate() {
        let (base, end) = (4 + t * i0, 4 + t * (i0 + 1));
        for _ in 1..m {
            b.add(at(base), at(end), None, RoleTag::LongPlug { i: i0 + 1 });
        }
        b.add(at(base + s as usize), at(end), None, RoleTag::ShortPlug { i: i0 + 1 });
    }
    for _ in 0..(c - 1) * m + (k - 1) * m * c {
        b.add(at(1), at(stops), None, RoleTag::Promise);
    }
    for j in 1..=m {
        b.add(at(2), at(3), None, RoleTag::Filter { j });
    }
    let a = (3 + 4 * t * n + (c - 2)) as u64;
    let extra = (2 * (1 + t + n) + (c - 2)) as u64;
    let line = Line::from_gaps(&vec![1; stops - 1])?;
    let alpha = ServicePromise::new(a + extra, a)?;
    let instance = Instance::new(line, b.requests, k, c, 1, 0, Some(alpha))?;
    Ok(ReductionOutput {
        kind: ReductionKind::ServiceTime,
        tp: tp.clone(),
        k,
        c,
        instance,
        tags: b.tags,
        expected_tau_yes: 2 * m - 1,
        expected_tau_no_lower_bound: Some(2 * m + 1),
        stop_labels: (1..=stops).map(|s| s.to_string()).collect(),
    })
}

struct ShortcutStops {
    m: usize,
    n: usize,
}

impl ShortcutStops {
    const START: Stop = 0;
    fn filter(&self, j: usize) -> Stop {
        j
    }
    fn filter_end(&self) -> Stop {
        self.m + 1
    }
    fn gadget(&self, i: usize, q: usize) -> Stop {
        self.m + 2 + 4 * (i - 1) + (q - 1)
    }
    fn end(&self) -> Stop {
        self.m + 4 * self.n + 2
    }
    fn labels(&self) -> Vec<String> {
        let mut l = vec!["h_s".to_string()];
        l.extend((1..=self.m).map(|j| format!("h_f^{j}")));
        l.push("h_f^e".into());
        for i in 1..=self.n {
            l.extend((1..=4).map(|q| format!("h_{i}^{q}")));
        }
        l.push("h_e".into());
        l
    }
}

/// Shortcut construction: no service time, shortcuts around every value gadget.
pub fn gen_shortcut(tp: &ThreePartitionInstance, k: usize, c: usize) -> Result<ReductionOutput, ReductionError> {
    check_fleet(k, c)?;
    let (m, n, t) = (tp.groups, tp.len(), tp.target);
    let h = ShortcutStops { m, n };
    let stops = h.end() + 1;
    let mut gaps = vec![1; stops - 1];
    for (i0, &s) in tp.values.iter().enumerate() {
        gaps[h.gadget(i0 + 1, 1)] = s;
        gaps[h.gadget(i0 + 1, 3)] = s;
    }
    gaps[h.gadget(n, 4)] = 2 * t;
    let mut shortcuts = Vec::new();
    for j in 1..=m {
        shortcuts.push((ShortcutStops::START, h.filter(j), 1));
        shortcuts.push((h.filter(j), h.filter_end(), 1));
    }
    for i in 1..=n {
        shortcuts.push((h.gadget(i, 1), h.gadget(i, 4), 1));
    }
    let line = Line::from_forward_edges(stops, &gaps, &shortcuts)?;
    let a = 2 + 2 * n as u64 + 2 * t;
    debug_assert_eq!(line.dist(ShortcutStops::START, h.end()), a);
    let mut b = Builder::new();
    for i in 1..=n {
        b.add(h.gadget(i, 2), h.gadget(i, 3), None, RoleTag::Value { i, j: 1 });
    }
    for _ in 0..(c - 1) * m + (k - 1) * m * c {
        b.add(ShortcutStops::START, h.end(), None, RoleTag::Promise);
    }
    for j in 1..=m {
        b.add(h.filter(j), h.filter_end(), None, RoleTag::Filter { j });
    }
    let alpha = ServicePromise::new(a + 2 * t, a)?;
    let instance = Instance::new(line, b.requests, k, c, 0, 0, Some(alpha))?;
    Ok(ReductionOutput {
        kind: ReductionKind::Shortcut,
        tp: tp.clone(),
        k,
        c,
        instance,
        tags: b.tags,
        expected_tau_yes: 2 * m - 1,
        expected_tau_no_lower_bound: Some(2 * m + 1),
        stop_labels: h.labels(),
    })
}

/// Time-window construction: one service area per vehicle, every request
/// starting at the first stop of its area.
pub fn gen_time_windows(tp: &ThreePartitionInstance, k: usize, c: usize) -> Result<ReductionOutput, ReductionError> {
    if k == 0 {
        return Err(ReductionError::BadVehicles);
    }
    if c == 0 {
        return Err(ReductionError::BadCapacity(c));
    }
    let (m, n, t) = (tp.groups as u64, tp.len(), tp.target);
    let smax = *tp.values.iter().max().unwrap() as usize + 1;
    let between = 2 * m * t + 2 * m;
    let gaps: Vec<Time> = (1..k * smax).map(|g| if g % smax == 0 { between } else { 1 }).collect();
    let line = Line::from_gaps(&gaps)?;
    let mut b = Builder::new();
    for area in 0..k {
        let off = area * smax;
        for (i0, &s) in tp.values.iter().enumerate() {
            for _ in 0..c {
                b.add(off, off + s as usize, Some((0, between - 1)), RoleTag::Value { i: i0 + 1, j: 1 });
            }
        }
        for j in 1..=m {
            let window = (2 * j * t + 2 * (j - 1), 2 * j * t + 2 * j - 1);
            for _ in 0..c {
                b.add(off, off + 1, Some(window), RoleTag::Separator { j: j as usize });
            }
        }
    }
    let instance = Instance::new(line, b.requests, k, c, 0, 0, None)?;
    let labels = (0..k)
        .flat_map(|area| (0..smax).map(move |s| if k == 1 { s.to_string() } else { format!("{}:{s}", area + 1) }))
        .collect();
    Ok(ReductionOutput {
        kind: ReductionKind::TimeWindows,
        tp: tp.clone(),
        k,
        c,
        instance,
        tags: b.tags,
        expected_tau_yes: 2 * tp.groups + 2 * n - 1,
        expected_tau_no_lower_bound: None,
        stop_labels: labels,
    })
}

/// Single-vehicle construction handed to `m` vehicles: tau is 1 for
/// yes-instances and at least 3 otherwise.
pub fn gen_gap(tp: &ThreePartitionInstance, c: usize, base: ReductionKind) -> Result<ReductionOutput, ReductionError> {
    let mut red = match base {
        ReductionKind::ServiceTime | ReductionKind::GapServiceTime => {
            let mut r = gen_service_time(tp, 1, c)?;
            r.kind = ReductionKind::GapServiceTime;
            r
        }
        ReductionKind::Shortcut | ReductionKind::GapShortcut => {
            let mut r = gen_shortcut(tp, 1, c)?;
            r.kind = ReductionKind::GapShortcut;
            r
        }
        ReductionKind::TimeWindows => {
            return Err(ReductionError::BadPartition("no gap variant with time windows".into()))
        }
    };
    red.instance = red.instance.with_vehicles(tp.groups)?;
    red.k = tp.groups;
    red.expected_tau_yes = 1;
    red.expected_tau_no_lower_bound = Some(3);
    Ok(red)
}

fn check_partition(tp: &ThreePartitionInstance, p: &Partition) -> Result<(), ReductionError> {
    if p.len() != tp.groups {
        return Err(ReductionError::BadPartition(format!("{} groups, expected {}", p.len(), tp.groups)));
    }
    let mut seen = vec![false; tp.len()];
    for g in p {
        for &i in g {
            if i >= tp.len() || std::mem::replace(&mut seen[i], true) {
                return Err(ReductionError::BadPartition(format!("index {i} missing or repeated")));
            }
        }
        let sum: u64 = g.iter().map(|&i| tp.values[i]).sum();
        if sum != tp.target {
            return Err(ReductionError::BadPartition(format!("group {g:?} sums to {sum}")));
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(ReductionError::BadPartition(format!("index {i} unassigned")));
    }
    Ok(())
}

/// Alternates the given subroutes with empty subroutes of the other direction.
fn alternate(subs: Vec<Subroute>) -> Route {
    let mut out = Vec::with_capacity(2 * subs.len());
    for s in subs {
        if !out.is_empty() {
            out.push(Subroute::artificial(s.direction.opposite()));
        }
        out.push(s);
    }
    Route::new(out)
}

/// The optimal solution for a yes-instance built from `partition`.
pub fn witness_solution(red: &ReductionOutput, partition: &Partition) -> Result<Solution, ReductionError> {
    check_partition(&red.tp, partition)?;
    let inst = &red.instance;
    let req = |id: &RequestId| inst.request(*id).unwrap();
    let routes = match red.kind {
        ReductionKind::TimeWindows => {
            let smax = *red.tp.values.iter().max().unwrap() as usize + 1;
            let mut values: HashMap<(usize, usize), Vec<&Request>> = HashMap::new();
            let mut seps: HashMap<(usize, usize), Vec<&Request>> = HashMap::new();
            for (id, tag) in &red.tags {
                let r = req(id);
                let area = r.origin / smax;
                match *tag {
                    RoleTag::Value { i, .. } => values.entry((area, i)).or_default().push(r),
                    RoleTag::Separator { j } => seps.entry((area, j)).or_default().push(r),
                    _ => unreachable!("time-window construction has no other roles"),
                }
            }
            (0..red.k)
                .map(|area| {
                    let mut subs = Vec::new();
                    for (j0, group) in partition.iter().enumerate() {
                        for &i0 in group {
                            let batch = values[&(area, i0 + 1)].iter().copied();
                            subs.push(Subroute::canonical(Direction::Ascending, batch));
                        }
                        let batch = seps[&(area, j0 + 1)].iter().copied();
                        subs.push(Subroute::canonical(Direction::Ascending, batch));
                    }
                    alternate(subs)
                })
                .collect::<Vec<_>>()
        }
        _ => {
            let c = red.c;
            let mut promise: Vec<&Request> = red.ids_where(|t| *t == RoleTag::Promise).iter().map(req).collect();
            promise.reverse();
            let mut long: HashMap<usize, Vec<&Request>> = HashMap::new();
            let mut short: HashMap<usize, &Request> = HashMap::new();
            let mut values: HashMap<usize, Vec<&Request>> = HashMap::new();
            let mut filters: HashMap<usize, &Request> = HashMap::new();
            for (id, tag) in &red.tags {
                match *tag {
                    RoleTag::LongPlug { i } => long.entry(i).or_default().push(req(id)),
                    RoleTag::ShortPlug { i } => {
                        short.insert(i, req(id));
                    }
                    RoleTag::Value { i, .. } => values.entry(i).or_default().push(req(id)),
                    RoleTag::Filter { j } => {
                        filters.insert(j, req(id));
                    }
                    _ => {}
                }
            }
            let n = red.tp.len();
            let mut base = Vec::new();
            for (j0, group) in partition.iter().enumerate() {
                let mut rs: Vec<&Request> = Vec::new();
                for _ in 0..c - 1 {
                    rs.push(promise.pop().expect("enough promise requests"));
                }
                rs.push(filters[&(j0 + 1)]);
                for i in 1..=n {
                    if group.contains(&(i - 1)) {
                        rs.extend(values[&i].iter().copied());
                        if let Some(s) = short.get(&i) {
                            rs.push(s);
                        }
                    } else if let Some(l) = long.get_mut(&i) {
                        rs.push(l.pop().expect("one long plug per other subroute"));
                    }
                }
                base.push(Subroute::canonical(Direction::Ascending, rs));
            }
            let m = red.tp.groups;
            let mut extra = Vec::new();
            while !promise.is_empty() {
                let batch: Vec<&Request> = (0..c).filter_map(|_| promise.pop()).collect();
                extra.push(Subroute::canonical(Direction::Ascending, batch));
            }
            let mut routes: Vec<Route> = if matches!(red.kind, ReductionKind::GapServiceTime | ReductionKind::GapShortcut) {
                base.into_iter().map(|s| Route::new(vec![s])).collect()
            } else {
                vec![alternate(base)]
            };
            let mut extra = extra.into_iter().peekable();
            while extra.peek().is_some() {
                routes.push(alternate(extra.by_ref().take(m).collect()));
            }
            routes
        }
    };
    let tours = routes
        .iter()
        .map(|r| check_route(r, inst).map_err(|e| ReductionError::Infeasible(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Solution::new(tours))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Certificate {
    /// No way to split the value gadgets over the `m` filter subroutes.
    Confirmed { tau_lower_bound: usize },
    /// A split exists, given as value indices (from 1) per subroute.
    Refuted { assignment: Vec<Vec<usize>> },
    Inconclusive { reason: String },
}

const CERTIFY_NODE_CAP: u64 = 10_000_000;

/// Executes the structural argument for the service-time and shortcut
/// constructions: with `m` ascending subroutes each one serves exactly one
/// filter request, so the value gadgets have to be split over `m` subroutes
/// without exceeding the delay each promise request allows.
pub fn certify_no(red: &ReductionOutput) -> Certificate {
    let inst = &red.instance;
    let Some(alpha) = inst.alpha else {
        return Certificate::Inconclusive { reason: "construction has no service promise".into() };
    };
    let promise = red.ids_where(|t| *t == RoleTag::Promise);
    let Some(p) = promise.first().and_then(|id| inst.request(*id)) else {
        return Certificate::Inconclusive { reason: "no promise request".into() };
    };
    let direct = inst.line.dist(p.origin, p.destination);
    let delay = alpha.max_ride(direct) - direct;
    let bins = red.ids_where(|t| matches!(t, RoleTag::Filter { .. })).len();
    let mut by_gadget: BTreeMap<usize, Vec<&Request>> = BTreeMap::new();
    for (id, tag) in &red.tags {
        if let RoleTag::Value { i, .. } = tag {
            by_gadget.entry(*i).or_default().push(inst.request(*id).unwrap());
        }
    }
    let gadgets: Vec<usize> = by_gadget.keys().copied().collect();
    let (items, budget): (Vec<u64>, u64) = match red.kind {
        ReductionKind::ServiceTime | ReductionKind::GapServiceTime => {
            // every waypoint between a promise pick-up and drop-off delays it by t_s:
            // the filter request, one plug per gadget and the other promise requests
            let ts = inst.service_time;
            let fixed = 2 * (1 + gadgets.len() as u64) * ts + (inst.capacity as u64 - 2);
            if ts == 0 || delay < fixed {
                return Certificate::Inconclusive { reason: "delay budget below fixed cost".into() };
            }
            let items = by_gadget.values().map(|v| v.len() as u64).collect();
            (items, (delay - fixed) / (2 * ts))
        }
        ReductionKind::Shortcut | ReductionKind::GapShortcut => {
            // serving a gadget's value request replaces its shortcut by the full path
            let items = by_gadget
                .values()
                .map(|v| {
                    let r = v[0];
                    let (o, d) = (r.origin, r.destination);
                    let full = inst.line.dist(o - 1, o) + inst.line.dist(o, d) + inst.line.dist(d, d + 1);
                    full - inst.line.dist(o - 1, d + 1)
                })
                .collect();
            (items, delay)
        }
        ReductionKind::TimeWindows => {
            return Certificate::Inconclusive { reason: "no certificate for the time-window construction".into() };
        }
    };
    let tau_lower_bound = match red.kind {
        ReductionKind::GapServiceTime | ReductionKind::GapShortcut => 3,
        _ => 2 * red.tp.groups + 1,
    };
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(items[i]));
    let mut load = vec![0u64; bins];
    let mut assign = vec![0usize; items.len()];
    let mut nodes = 0u64;
    match pack(&items, &order, 0, budget, &mut load, &mut assign, &mut nodes) {
        Some(true) => {
            let mut groups = vec![Vec::new(); bins];
            for (idx, &b) in assign.iter().enumerate() {
                groups[b].push(gadgets[idx]);
            }
            Certificate::Refuted { assignment: groups }
        }
        Some(false) => Certificate::Confirmed { tau_lower_bound },
        None => Certificate::Inconclusive { reason: format!("search exceeded {CERTIFY_NODE_CAP} nodes") },
    }
}

/// Bin packing by depth-first search; `None` if the node cap is hit.
fn pack(
    items: &[u64],
    order: &[usize],
    pos: usize,
    budget: u64,
    load: &mut [u64],
    assign: &mut [usize],
    nodes: &mut u64,
) -> Option<bool> {
    *nodes += 1;
    if *nodes > CERTIFY_NODE_CAP {
        return None;
    }
    let Some(&item) = order.get(pos) else {
        return Some(true);
    };
    for b in 0..load.len() {
        // bins with equal load are interchangeable
        if load[..b].contains(&load[b]) || load[b] + items[item] > budget {
            continue;
        }
        load[b] += items[item];
        assign[item] = b;
        let r = pack(items, order, pos + 1, budget, load, assign, nodes);
        load[b] -= items[item];
        if r != Some(false) {
            return r;
        }
    }
    Some(false)
}
