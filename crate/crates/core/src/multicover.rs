//! Turn minimization without time windows for general lines.
//!
//! Per direction, the minimum number of subroutes is a multiset multicover
//! problem: each distinct feasible subroute covers some copies of each request
//! class, and the demand is the multiplicity of every class. The two counts are
//! then combined into routes as in the polynomial cases.

use std::collections::HashMap;

use crate::exact::{Classes, Engine, Mode, SolveError, DEFAULT_ROUTE_CAP};
use crate::feasibility::check_route;
use crate::model::{Direction, Instance, RequestId, Solution, Stop, Subroute, WaypointKind};
use crate::polycase::{build_min_turn_collection, tau_formula};

/// Required copies per request class `(o, d)` of one direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandVector {
    pub direction: Direction,
    pub classes: Vec<(Stop, Stop)>,
    pub demand: Vec<u32>,
}

/// A distinct feasible subroute, abstracted to the copies it serves per class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverMultiset {
    pub counts: Vec<u32>,
    pub witness: Subroute,
}

/// Classes of one direction: instance class indices plus their demand.
fn direction_classes(instance: &Instance, classes: &Classes, direction: Direction) -> (Vec<usize>, DemandVector) {
    let picked: Vec<usize> = (0..classes.len())
        .filter(|&c| instance.requests[classes.members[c][0]].direction() == direction)
        .collect();
    let demand = DemandVector {
        direction,
        classes: picked
            .iter()
            .map(|&c| {
                let r = &instance.requests[classes.members[c][0]];
                (r.origin, r.destination)
            })
            .collect(),
        demand: picked.iter().map(|&c| classes.members[c].len() as u32).collect(),
    };
    (picked, demand)
}

/// Enumerates distinct feasible subroutes of one direction with at most `2·c·h` waypoints.
pub fn enumerate_distinct_subroutes(
    instance: &Instance,
    direction: Direction,
    max_routes: u64,
) -> Result<(DemandVector, Vec<CoverMultiset>), SolveError> {
    if instance.has_time_windows() {
        return Err(SolveError::Windowed);
    }
    let classes = Classes::by_window(instance);
    let (picked, demand) = direction_classes(instance, &classes, direction);
    let bound = 2 * instance.capacity * instance.line.stops();
    let engine = Engine::new(instance, &classes, Mode::Subroute(direction), bound, max_routes);
    let (routes, _) = engine.run()?;
    let covers = routes
        .into_iter()
        .map(|fr| CoverMultiset {
            counts: picked.iter().map(|&c| fr.counts[c]).collect(),
            witness: fr.route.subroutes.into_iter().next().expect("one subroute"),
        })
        .collect();
    Ok((demand, covers))
}

/// Minimum number of covers (repetition allowed) whose sum meets `demand`,
/// with one optimal selection of cover indices.
pub fn multiset_multicover(demand: &[u32], covers: &[Vec<u32>]) -> (usize, Vec<usize>) {
    // clamp to demand, then drop duplicates and componentwise-dominated covers
    let clamped: Vec<Vec<u32>> = covers
        .iter()
        .map(|c| c.iter().zip(demand).map(|(&x, &d)| x.min(d)).collect())
        .collect();
    let mut keep: Vec<usize> = Vec::new();
    for (i, c) in clamped.iter().enumerate() {
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let dominated = clamped.iter().enumerate().any(|(j, o)| {
            j != i
                && o.iter().zip(c).all(|(a, b)| a >= b)
                && (o != c || j < i)
        });
        if !dominated {
            keep.push(i);
        }
    }
    let mut memo: HashMap<Vec<u32>, (usize, usize)> = HashMap::new();
    let count = cover_rec(demand.to_vec(), &clamped, &keep, &mut memo);
    let mut selection = Vec::with_capacity(count);
    let mut residual = demand.to_vec();
    while residual.iter().any(|&x| x > 0) {
        let (_, pick) = memo[&residual];
        selection.push(pick);
        residual = subtract(&residual, &clamped[pick]);
    }
    selection.sort();
    (count, selection)
}

fn subtract(residual: &[u32], cover: &[u32]) -> Vec<u32> {
    residual.iter().zip(cover).map(|(&r, &c)| r.saturating_sub(c)).collect()
}

fn cover_rec(
    residual: Vec<u32>,
    covers: &[Vec<u32>],
    keep: &[usize],
    memo: &mut HashMap<Vec<u32>, (usize, usize)>,
) -> usize {
    let Some(first) = residual.iter().position(|&x| x > 0) else {
        return 0;
    };
    if let Some(&(n, _)) = memo.get(&residual) {
        return n;
    }
    // some cover in every solution serves the first open class
    let mut best = (usize::MAX, usize::MAX);
    for &i in keep {
        if covers[i][first] == 0 {
            continue;
        }
        let n = cover_rec(subtract(&residual, &covers[i]), covers, keep, memo);
        if n != usize::MAX && n + 1 < best.0 {
            best = (n + 1, i);
        }
    }
    memo.insert(residual, best);
    best.0
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XpResult {
    pub max_served: usize,
    pub tau: usize,
    pub ascending_subroutes: usize,
    pub descending_subroutes: usize,
    pub covers: usize,
    pub solution: Solution,
}

pub fn solve_xp_no_tw(instance: &Instance) -> Result<XpResult, SolveError> {
    solve_xp_capped(instance, DEFAULT_ROUTE_CAP)
}

pub fn solve_xp_capped(instance: &Instance, max_routes: u64) -> Result<XpResult, SolveError> {
    if instance.has_time_windows() {
        return Err(SolveError::Windowed);
    }
    let classes = Classes::by_window(instance);
    let mut next = vec![0usize; classes.len()];
    let mut per_dir: Vec<Vec<Subroute>> = Vec::new();
    let mut total_covers = 0;
    for dir in [Direction::Ascending, Direction::Descending] {
        let (demand, covers) = enumerate_distinct_subroutes(instance, dir, max_routes)?;
        total_covers += covers.len();
        let (picked, _) = direction_classes(instance, &classes, dir);
        let vectors: Vec<Vec<u32>> = covers.iter().map(|c| c.counts.clone()).collect();
        let (_, selection) = multiset_multicover(&demand.demand, &vectors);
        let subs = selection
            .iter()
            .map(|&i| rename_cover(instance, &classes, &picked, &covers[i], &mut next))
            .collect();
        per_dir.push(subs);
    }
    let desc = per_dir.pop().unwrap();
    let asc = per_dir.pop().unwrap();
    let (a, b) = (asc.len(), desc.len());
    let k = instance.vehicles.min(instance.len().max(1));
    let tours = build_min_turn_collection(asc, desc, k)
        .iter()
        .filter(|r| r.turns() > 0)
        .map(|r| check_route(r, instance).expect("feasible subroutes join without windows"))
        .collect();
    Ok(XpResult {
        max_served: instance.len(),
        tau: tau_formula(a, b, k),
        ascending_subroutes: a,
        descending_subroutes: b,
        covers: total_covers,
        solution: Solution::new(tours),
    })
}

/// Fills a cover with the next unused copies of each class. Copies beyond the
/// remaining demand are left out, which keeps a subroute feasible without windows.
fn rename_cover(
    instance: &Instance,
    classes: &Classes,
    picked: &[usize],
    cover: &CoverMultiset,
    next: &mut [usize],
) -> Subroute {
    let mut rename: HashMap<RequestId, Option<RequestId>> = HashMap::new();
    for &c in picked {
        let m = &classes.members[c];
        let mut j = 0;
        for w in &cover.witness.waypoints {
            if w.kind == WaypointKind::Pickup && classes.class_of[instance.index_of(w.request).unwrap()] == c {
                let target = m.get(next[c] + j).map(|&i| instance.requests[i].id);
                rename.insert(w.request, target);
                j += 1;
            }
        }
        next[c] = (next[c] + j).min(m.len());
    }
    let waypoints = cover
        .witness
        .waypoints
        .iter()
        .filter_map(|w| {
            rename[&w.request].map(|id| {
                let mut w = w.clone();
                w.request = id;
                w
            })
        })
        .collect();
    Subroute::new(cover.witness.direction, waypoints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::verify_solution;
    use crate::model::{Line, Request, ServicePromise};
    use crate::oracle::{brute_solve, OracleLimits};
    use crate::polycase::solve_minturn_poly;

    fn inst(h: usize, pairs: &[(usize, usize)], k: usize, c: usize) -> Instance {
        let reqs = pairs.iter().enumerate().map(|(i, &(o, d))| Request::new(i as u64, o, d)).collect();
        Instance::new(Line::from_gaps(&vec![1; h - 1]).unwrap(), reqs, k, c, 0, 0, None).unwrap()
    }

    fn counts_of(covers: &[CoverMultiset]) -> Vec<Vec<u32>> {
        let mut v: Vec<Vec<u32>> = covers.iter().map(|c| c.counts.clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn one_class_one_cover() {
        let i = inst(2, &[(0, 1)], 1, 1);
        let (d, covers) = enumerate_distinct_subroutes(&i, Direction::Ascending, 1000).unwrap();
        assert_eq!(d.classes, vec![(0, 1)]);
        assert_eq!(counts_of(&covers), vec![vec![1]]);
    }

    #[test]
    fn covers_of_three_classes() {
        // two copies of each class so that a cover can take two of one class
        let i = inst(3, &[(0, 1), (1, 2), (0, 2), (0, 1), (1, 2), (0, 2)], 1, 2);
        let (d, covers) = enumerate_distinct_subroutes(&i, Direction::Ascending, 100_000).unwrap();
        assert_eq!(d.classes, vec![(0, 1), (1, 2), (0, 2)]);
        let cs = counts_of(&covers);
        assert!(cs.contains(&vec![0, 0, 2]));
        assert!(cs.contains(&vec![1, 1, 1]));
        assert!(cs.contains(&vec![2, 2, 0]));
        assert!(!cs.contains(&vec![1, 0, 2]));
    }

    #[test]
    fn promise_excludes_covers() {
        // alone each ride is direct; together with t_s = 1 the long ride gets two extra stops
        let reqs = vec![Request::new(0, 0, 2), Request::new(1, 1, 2)];
        let i = Instance::new(
            Line::from_gaps(&[1, 1]).unwrap(),
            reqs,
            1,
            2,
            1,
            0,
            Some(ServicePromise::new(3, 2).unwrap()),
        )
        .unwrap();
        let (_, covers) = enumerate_distinct_subroutes(&i, Direction::Ascending, 1000).unwrap();
        assert_eq!(counts_of(&covers), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn multicover_examples() {
        assert_eq!(multiset_multicover(&[2], &[vec![1], vec![2]]).0, 1);
        assert_eq!(multiset_multicover(&[1, 1], &[vec![1, 0], vec![0, 1]]).0, 2);
        assert_eq!(multiset_multicover(&[0, 0], &[vec![1, 0]]), (0, vec![]));
        let (n, sel) = multiset_multicover(&[3, 1], &[vec![1, 1], vec![2, 0]]);
        assert_eq!(n, 2);
        assert_eq!(sel, vec![0, 1]);
    }

    fn brute_cover(demand: &[u32], covers: &[Vec<u32>]) -> usize {
        let total: u32 = demand.iter().sum();
        // multisets of size s as nondecreasing index sequences
        fn go(demand: &[u32], covers: &[Vec<u32>], start: usize, left: usize, acc: &mut Vec<u32>) -> bool {
            if acc.iter().zip(demand).all(|(a, d)| a >= d) {
                return true;
            }
            if left == 0 {
                return false;
            }
            for i in start..covers.len() {
                for (a, c) in acc.iter_mut().zip(&covers[i]) {
                    *a += c;
                }
                let ok = go(demand, covers, i, left - 1, acc);
                for (a, c) in acc.iter_mut().zip(&covers[i]) {
                    *a -= c;
                }
                if ok {
                    return true;
                }
            }
            false
        }
        (0..=total as usize)
            .find(|&s| go(demand, covers, 0, s, &mut vec![0; demand.len()]))
            .unwrap()
    }

    #[test]
    fn multicover_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let demand: Vec<u32> = (0..3).map(|_| rng.gen_range(0..=3)).collect();
            let mut covers: Vec<Vec<u32>> = (0..3)
                .map(|j| (0..3).map(|i| u32::from(i == j)).collect())
                .collect();
            for _ in 0..rng.gen_range(0..5) {
                covers.push((0..3).map(|_| rng.gen_range(0..=2)).collect());
            }
            let (n, sel) = multiset_multicover(&demand, &covers);
            assert_eq!(n, brute_cover(&demand, &covers), "{demand:?} {covers:?}");
            let mut sum = [0; 3];
            for &i in &sel {
                for (s, c) in sum.iter_mut().zip(&covers[i]) {
                    *s += c;
                }
            }
            assert!(sum.iter().zip(&demand).all(|(s, d)| s >= d));
        }
    }

    #[test]
    fn empty_instance() {
        let i = inst(2, &[], 1, 1);
        let r = solve_xp_no_tw(&i).unwrap();
        assert_eq!((r.tau, r.max_served), (0, 0));
        assert!(r.solution.tours.is_empty());
    }

    #[test]
    fn agrees_with_poly_and_oracle() {
        let i = inst(4, &[(0, 3), (1, 2), (1, 3), (3, 0), (2, 0)], 2, 2);
        let xp = solve_xp_no_tw(&i).unwrap();
        let poly = solve_minturn_poly(&i).unwrap();
        assert_eq!(xp.tau, poly.tau);
        assert_eq!((xp.ascending_subroutes, xp.descending_subroutes), (poly.ascending_subroutes, poly.descending_subroutes));
        let rep = verify_solution(&xp.solution, &i);
        assert!(rep.is_clean(), "{:?}", rep.violations);
        assert_eq!((rep.served, rep.max_turns), (5, xp.tau));
        let o = brute_solve(&i, &OracleLimits::default()).unwrap();
        assert_eq!(o.tau, xp.tau);
    }

    #[test]
    fn windowed_rejected() {
        let i = inst(2, &[(0, 1)], 1, 1);
        let w = i.with_requests(vec![Request::new(0, 0, 1).with_window(1, None)]).unwrap();
        assert_eq!(solve_xp_no_tw(&w), Err(SolveError::Windowed));
    }
}
