use lidarp::exact::{dedup_kernel, solve_fpt};
use lidarp::feasibility::verify_solution;
use lidarp::model::Instance;
use lidarp::multicover::solve_xp_no_tw;
use lidarp::oracle::{brute_solve, OracleLimits};
use lidarp::polycase::{solve_minturn_poly, OverlapProfile};
use lidarp::random::{random_instance, random_poly_instance, RandomConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_clean(inst: &Instance, sol: &lidarp::model::Solution, served: usize, tau: usize) {
    let rep = verify_solution(sol, inst);
    assert!(rep.is_clean(), "{:?}\n{}", rep.violations, inst.to_json());
    assert_eq!((rep.served, rep.max_turns), (served, tau), "{}", inst.to_json());
}

#[test]
fn fpt_matches_oracle_on_windowed_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = RandomConfig {
        horizon: Some(8),
        service_time: 0..=1,
        turn_time: 0..=1,
        promise: 0.5,
        shortcuts: 0.3,
        stops: 2..=5,
        ..Default::default()
    };
    for _ in 0..300 {
        let inst = random_instance(&mut rng, &cfg);
        let o = brute_solve(&inst, &OracleLimits::default()).unwrap();
        let e = solve_fpt(&inst).unwrap();
        assert_eq!((e.max_served, e.tau), (o.max_served, o.tau), "{}", inst.to_json());
        assert_clean(&inst, &e.solution, e.max_served, e.tau);
        assert_clean(&inst, &o.solution, o.max_served, o.tau);
    }
}

#[test]
fn kernel_keeps_optimum_with_duplicates() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = RandomConfig {
        horizon: Some(3),
        duplicates: 0.7,
        requests: 4..=6,
        stops: 2..=3,
        vehicles: 1..=1,
        capacity: 1..=1,
        ..Default::default()
    };
    let mut shrunk = 0;
    for _ in 0..200 {
        let inst = random_instance(&mut rng, &cfg);
        let kernel = dedup_kernel(&inst).unwrap();
        shrunk += usize::from(!kernel.dropped.is_empty());
        let full = brute_solve(&inst, &OracleLimits::default()).unwrap();
        let reduced = brute_solve(&kernel.instance, &OracleLimits::default()).unwrap();
        assert_eq!((full.max_served, full.tau), (reduced.max_served, reduced.tau), "{}", inst.to_json());
    }
    assert!(shrunk > 10, "kernel dropped copies in only {shrunk} instances");
}

#[test]
fn xp_and_poly_match_oracle_without_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = RandomConfig {
        service_time: 0..=1,
        turn_time: 0..=1,
        promise: 0.6,
        shortcuts: 0.4,
        gap: 1..=3,
        ..Default::default()
    };
    for round in 0..300 {
        let inst = if round % 2 == 0 {
            random_instance(&mut rng, &cfg)
        } else {
            random_poly_instance(&mut rng, &cfg)
        };
        let o = brute_solve(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(o.max_served, inst.len());
        let xp = solve_xp_no_tw(&inst).unwrap();
        assert_eq!(xp.tau, o.tau, "{}", inst.to_json());
        assert_clean(&inst, &xp.solution, inst.len(), xp.tau);
        if let Ok(p) = solve_minturn_poly(&inst) {
            assert_eq!(p.tau, o.tau, "{}", inst.to_json());
            assert_clean(&inst, &p.solution, inst.len(), p.tau);
            let prof = OverlapProfile::of(&inst.requests);
            assert_eq!(xp.ascending_subroutes, prof.ascending.div_ceil(inst.capacity));
            assert_eq!(xp.descending_subroutes, prof.descending.div_ceil(inst.capacity));
        }
    }
}

#[test]
fn more_vehicles_and_wider_windows_never_hurt() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = RandomConfig { horizon: Some(8), vehicles: 1..=1, capacity: 1..=2, ..Default::default() };
    for _ in 0..150 {
        let inst = random_instance(&mut rng, &cfg);
        let one = solve_fpt(&inst).unwrap();
        let two = solve_fpt(&inst.with_vehicles(2).unwrap()).unwrap();
        assert!(two.max_served >= one.max_served);
        if two.max_served == one.max_served {
            assert!(two.tau <= one.tau);
        }
        let wider: Vec<_> = inst
            .requests
            .iter()
            .map(|r| r.clone().with_window(r.earliest.saturating_sub(1), r.latest.map(|l| l + 1)))
            .collect();
        let widened = brute_solve(&inst.with_requests(wider).unwrap(), &OracleLimits::default()).unwrap();
        assert!(widened.max_served >= one.max_served);
    }
}
