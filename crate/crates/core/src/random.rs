//! Seeded random instances for tests and benchmarks.

use std::ops::RangeInclusive;

use rand::Rng;

use crate::model::{Instance, Line, Request, ServicePromise, Time};

#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub requests: RangeInclusive<usize>,
    pub stops: RangeInclusive<usize>,
    pub vehicles: RangeInclusive<usize>,
    pub capacity: RangeInclusive<usize>,
    pub gap: RangeInclusive<Time>,
    pub service_time: RangeInclusive<Time>,
    pub turn_time: RangeInclusive<Time>,
    /// Probability of a service promise.
    pub promise: f64,
    /// Probability of shortcut edges.
    pub shortcuts: f64,
    /// Time windows with every latest drop-off below this horizon.
    pub horizon: Option<Time>,
    /// Probability that a request copies an earlier one.
    pub duplicates: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            requests: 1..=5,
            stops: 2..=4,
            vehicles: 1..=2,
            capacity: 1..=2,
            gap: 1..=1,
            service_time: 0..=0,
            turn_time: 0..=0,
            promise: 0.0,
            shortcuts: 0.0,
            horizon: None,
            duplicates: 0.0,
        }
    }
}

pub fn random_line(rng: &mut impl Rng, stops: usize, gap: RangeInclusive<Time>, shortcuts: f64) -> Line {
    let gaps: Vec<Time> = (1..stops).map(|_| rng.gen_range(gap.clone())).collect();
    let mut edges = Vec::new();
    if stops > 2 && rng.gen_bool(shortcuts) {
        for _ in 0..rng.gen_range(1..=stops - 2) {
            let i = rng.gen_range(0..stops - 2);
            let j = rng.gen_range(i + 2..stops);
            let along: Time = gaps[i..j].iter().sum();
            edges.push((i, j, rng.gen_range(1..=along)));
        }
    }
    Line::from_forward_edges(stops, &gaps, &edges).expect("generated line is valid")
}

pub fn random_promise(rng: &mut impl Rng) -> ServicePromise {
    let den = rng.gen_range(1..=4);
    ServicePromise::new(rng.gen_range(den..=2 * den), den).unwrap()
}

pub fn random_instance(rng: &mut impl Rng, cfg: &RandomConfig) -> Instance {
    let stops = rng.gen_range(cfg.stops.clone());
    let line = random_line(rng, stops, cfg.gap.clone(), cfg.shortcuts);
    let n = rng.gen_range(cfg.requests.clone());
    let mut requests: Vec<Request> = Vec::with_capacity(n);
    for id in 0..n as u64 {
        if !requests.is_empty() && rng.gen_bool(cfg.duplicates) {
            let src = &requests[rng.gen_range(0..requests.len())];
            let mut copy = src.clone();
            copy.id = crate::model::RequestId(id);
            requests.push(copy);
            continue;
        }
        let o = rng.gen_range(0..stops);
        let mut d = rng.gen_range(0..stops - 1);
        if d >= o {
            d += 1;
        }
        let mut r = Request::new(id, o, d);
        if let Some(t) = cfg.horizon {
            let e = rng.gen_range(0..=t / 2);
            let lo = (e + line.dist(o, d)).min(t - 1);
            r = r.with_window(e, Some(rng.gen_range(lo..t)));
        }
        requests.push(r);
    }
    let alpha = rng.gen_bool(cfg.promise).then(|| random_promise(rng));
    Instance::new(
        line,
        requests,
        rng.gen_range(cfg.vehicles.clone()),
        rng.gen_range(cfg.capacity.clone()),
        rng.gen_range(cfg.service_time.clone()),
        rng.gen_range(cfg.turn_time.clone()),
        alpha,
    )
    .expect("generated instance is valid")
}

/// A random instance in one of the polynomial cases without time windows.
pub fn random_poly_instance(rng: &mut impl Rng, cfg: &RandomConfig) -> Instance {
    let mut inst = random_instance(rng, &RandomConfig { horizon: None, ..cfg.clone() });
    match rng.gen_range(0..3) {
        0 => inst.alpha = None,
        1 => {
            inst.alpha = Some(random_promise(rng));
            inst.service_time = 0;
            let gaps = inst.line.consecutive_gaps();
            inst.line = Line::from_gaps(&gaps).unwrap();
        }
        _ => {
            inst.alpha = Some(random_promise(rng));
            inst.capacity = 1;
        }
    }
    inst
}
