use lidarp::feasibility::{check_route, check_route_constraints, join_routes, ride_time, verify_solution};
use lidarp::model::{
    Direction, Instance, Request, Route, Solution, Subroute, Time, Waypoint, WaypointKind,
};
use lidarp::polycase::{max_overlap, min_subroutes, solve_minturn_poly, PolyCase};
use lidarp::random::{random_instance, RandomConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A structurally valid route over all requests of `inst`: requests are grouped
/// into one-direction blocks (randomly merged), each block sorted along its
/// direction with random tie-breaking, and blocks of equal direction separated
/// by an empty subroute.
fn random_route(rng: &mut impl Rng, inst: &Instance) -> Route {
    let mut idx: Vec<usize> = (0..inst.len()).collect();
    idx.shuffle(rng);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        let dir = inst.requests[i].direction();
        match blocks.last_mut() {
            Some(b) if inst.requests[b[0]].direction() == dir && rng.gen_bool(0.5) => b.push(i),
            _ => blocks.push(vec![i]),
        }
    }
    let mut subs: Vec<Subroute> = Vec::new();
    for b in blocks {
        let dir = inst.requests[b[0]].direction();
        let mut events: Vec<(i64, WaypointKind, u32, usize)> = Vec::new();
        for &i in &b {
            let r = &inst.requests[i];
            events.push((dir.key(r.origin), WaypointKind::Pickup, rng.gen(), i));
            events.push((dir.key(r.destination), WaypointKind::Dropoff, rng.gen(), i));
        }
        events.sort();
        if subs.last().is_some_and(|s| s.direction == dir) {
            subs.push(Subroute::artificial(dir.opposite()));
        }
        let wps = events
            .into_iter()
            .map(|(_, kind, _, i)| Waypoint { request: inst.requests[i].id, kind, time: None })
            .collect();
        subs.push(Subroute::new(dir, wps));
    }
    Route::new(subs)
}

fn times_of(tour: &Route) -> Vec<Time> {
    tour.waypoints().map(|w| w.time.unwrap()).collect()
}

fn with_times(route: &Route, times: &[Time]) -> Route {
    let mut t = route.clone();
    let mut it = times.iter();
    for s in &mut t.subroutes {
        for w in &mut s.waypoints {
            w.time = it.next().copied();
        }
    }
    t
}

/// All nondecreasing timestamp vectors of length `w` in `0..limit` that verify clean.
fn feasible_timestamps(inst: &Instance, route: &Route, limit: Time) -> Vec<Vec<Time>> {
    fn go(w: usize, from: Time, limit: Time, acc: &mut Vec<Time>, out: &mut Vec<Vec<Time>>) {
        if acc.len() == w {
            out.push(acc.clone());
            return;
        }
        for t in from..limit {
            acc.push(t);
            go(w, t, limit, acc, out);
            acc.pop();
        }
    }
    let w = route.waypoints().count();
    let mut all = Vec::new();
    go(w, 0, limit, &mut Vec::new(), &mut all);
    all.into_iter()
        .filter(|ts| {
            let sol = Solution::new(vec![with_times(route, ts)]);
            verify_solution(&sol, inst).is_clean()
        })
        .collect()
}

fn windowed_small(rng: &mut ChaCha8Rng) -> Instance {
    let cfg = RandomConfig {
        requests: 1..=2,
        stops: 2..=4,
        gap: 1..=2,
        capacity: 1..=2,
        vehicles: 1..=1,
        service_time: 0..=1,
        turn_time: 0..=1,
        promise: 0.5,
        shortcuts: 0.3,
        horizon: Some(20),
        duplicates: 0.2,
    };
    random_instance(rng, &cfg)
}

fn no_window(rng: &mut ChaCha8Rng, n: std::ops::RangeInclusive<usize>) -> Instance {
    let cfg = RandomConfig {
        requests: n,
        stops: 2..=6,
        gap: 1..=3,
        capacity: 1..=3,
        service_time: 0..=2,
        turn_time: 0..=2,
        promise: 0.7,
        shortcuts: 0.4,
        ..Default::default()
    };
    random_instance(rng, &cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn check_route_matches_exhaustive_timestamps(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = windowed_small(&mut rng);
        let route = random_route(&mut rng, &inst);
        let found = feasible_timestamps(&inst, &route, 20);
        match check_route(&route, &inst) {
            Ok(tour) => {
                let least = times_of(&tour);
                prop_assert!(found.contains(&least), "least tour not feasible: {least:?}");
                for ts in &found {
                    prop_assert!(least.iter().zip(ts).all(|(a, b)| a <= b));
                }
            }
            Err(e) => prop_assert!(found.is_empty(), "{e}: but {:?} verifies", found[0]),
        }
    }

    #[test]
    fn linear_and_general_paths_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = no_window(&mut rng, 1..=6);
        let route = random_route(&mut rng, &inst);
        prop_assert_eq!(check_route(&route, &inst), check_route_constraints(&route, &inst));
    }

    #[test]
    fn joined_feasible_routes_stay_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = no_window(&mut rng, 2..=8);
        let cut = rng.gen_range(1..inst.len());
        let (a, b) = inst.requests.split_at(cut);
        let ra = random_route(&mut rng, &inst.with_requests(a.to_vec()).unwrap());
        let rb = random_route(&mut rng, &inst.with_requests(b.to_vec()).unwrap());
        prop_assume!(check_route(&ra, &inst).is_ok() && check_route(&rb, &inst).is_ok());
        let joined = join_routes(&[ra, rb]).unwrap();
        prop_assert!(check_route(&joined, &inst).is_ok());
    }

    #[test]
    fn sweep_matches_brute_force_clique(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rng.gen_range(2..=8);
        let n = rng.gen_range(0..=12);
        let reqs: Vec<Request> = (0..n)
            .map(|id| {
                let o = rng.gen_range(0..h);
                let d = (o + rng.gen_range(1..h)) % h;
                Request::new(id as u64, o, d)
            })
            .collect();
        for dir in [Direction::Ascending, Direction::Descending] {
            let (chi, clique) = max_overlap(&reqs, dir);
            let same: Vec<&Request> = reqs.iter().filter(|r| r.direction() == dir).collect();
            let mut best = 0;
            for mask in 0u32..1 << same.len() {
                let members: Vec<&&Request> =
                    same.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, r)| r).collect();
                let pairwise = members.iter().enumerate().all(|(i, p)| {
                    members[i + 1..].iter().all(|q| lidarp::model::overlaps(p, q))
                });
                if pairwise {
                    best = best.max(members.len());
                }
            }
            prop_assert_eq!(chi, best);
            prop_assert_eq!(clique.len(), chi);
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = RandomConfig {
            requests: 0..=8,
            stops: 2..=6,
            gap: 1..=4,
            promise: 0.5,
            shortcuts: 0.5,
            horizon: if rng.gen_bool(0.5) { Some(30) } else { None },
            ..Default::default()
        };
        let inst = random_instance(&mut rng, &cfg);
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
        let tour = check_route(&random_route(&mut rng, &inst), &inst);
        if let Ok(tour) = tour {
            let sol = Solution::new(vec![tour]);
            prop_assert_eq!(Solution::from_json(&sol.to_json()).unwrap(), sol);
        }
    }
}

/// Fewest groups such that no group holds more than `c` pairwise overlapping requests.
fn brute_min_partition(reqs: &[Request], dir: Direction, c: usize) -> usize {
    let same: Vec<Request> = reqs.iter().filter(|r| r.direction() == dir).cloned().collect();
    if same.is_empty() {
        return 0;
    }
    fn go(same: &[Request], c: usize, groups: &mut Vec<Vec<Request>>, i: usize, k: usize) -> bool {
        if i == same.len() {
            return true;
        }
        for g in 0..groups.len().min(k) {
            groups[g].push(same[i].clone());
            let ok = max_overlap(&groups[g], same[i].direction()).0 <= c;
            if ok && go(same, c, groups, i + 1, k) {
                return true;
            }
            groups[g].pop();
        }
        if groups.len() < k {
            groups.push(vec![same[i].clone()]);
            if go(same, c, groups, i + 1, k) {
                return true;
            }
            groups.pop();
        }
        false
    }
    (1..=same.len()).find(|&k| go(&same, c, &mut Vec::new(), 0, k)).unwrap()
}

#[test]
fn subroute_counts_match_exhaustive_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let h = rng.gen_range(3..=7);
        let reqs: Vec<Request> = (0..10)
            .map(|id| {
                let o = rng.gen_range(0..h);
                let d = (o + rng.gen_range(1..h)) % h;
                Request::new(id, o, d)
            })
            .collect();
        for dir in [Direction::Ascending, Direction::Descending] {
            assert_eq!(min_subroutes(&reqs, dir, 2).count, brute_min_partition(&reqs, dir, 2));
        }
    }
}

#[test]
fn case_two_rides_are_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut checked = 0;
    for _ in 0..300 {
        let mut inst = no_window(&mut rng, 1..=10);
        inst.service_time = 0;
        inst.line = lidarp::model::Line::from_gaps(&inst.line.consecutive_gaps()).unwrap();
        let Ok(res) = solve_minturn_poly(&inst) else { continue };
        if res.case != PolyCase::NoShortcutsNoServiceTime {
            continue;
        }
        for tour in &res.solution.tours {
            for id in tour.served() {
                let r = inst.request(id).unwrap();
                assert_eq!(ride_time(tour, id, 0), Some(inst.line.dist(r.origin, r.destination)));
            }
        }
        checked += 1;
    }
    assert!(checked > 50);
}
