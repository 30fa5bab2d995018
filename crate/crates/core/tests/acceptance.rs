//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 4 5`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{approx_eq, constraints, diamond, heuristic_trap, ten_node_instances, weights};
use ostp_core::bench::{by_instance, emit, run_benchmark, run_solver, BenchSuite, Format, Scale, SolverConfig};
use ostp_core::graph::{extract_subnetwork, generate_graph, GeneratorSpec, NodeId};
use ostp_core::heuristics::mfpb_hostp;
use ostp_core::moves::{propose_move, PathSpace};
use ostp_core::oracle::optimal_path;
use ostp_core::outcome::{derive_seed, SolverId, Status};
use ostp_core::qa::{
    coupling_jt, coupling_jt_uncapped, decode_path, effective_hamiltonian, encode_spins, gamma_schedule,
    local_move_delta, qa_accept, qa_solve, Potential, QaParams, ReplicaSystem,
};
use ostp_core::qot::{delta, is_feasible, QoTConstraints, QoTVector, TrustPath};
use ostp_core::sa::sa_accept;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// QA against the exhaustive optimum on 50 ten-node instances.
fn oracle_equivalence_qa() -> Outcome {
    let instances = ten_node_instances(50, 0xA11CE);
    let (w, c) = (weights(), constraints());
    let base = QaParams::default();
    let mut single_hits = 0;
    let mut best_hits = 0;
    let mut restarts_run = 0;
    let mut misses = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let target = inst.oracle.utility;
        let run = |r: u64| {
            let seed = derive_seed(derive_seed(0xB0B, i as u64), r);
            qa_solve(&inst.sub, &w, &c, &QaParams { seed, ..base }).unwrap()
        };
        let first = run(0);
        restarts_run += 1;
        if let (Some(u), Some(o)) = (first.result.utility, target) {
            if u > o + 1e-9 {
                return Err(format!("instance {i}: QA utility {u} exceeds the optimum {o}"));
            }
        }
        if approx_eq(first.result.utility, target, 1e-9) {
            single_hits += 1;
        }
        // The optimum bounds every restart, so the best of 100 equals it
        // exactly when some restart reaches it; later restarts cannot
        // change the outcome once one has.
        let mut found = approx_eq(first.result.utility, target, 1e-9);
        for r in 1..100 {
            if found {
                break;
            }
            let out = run(r);
            restarts_run += 1;
            found = approx_eq(out.result.utility, target, 1e-9);
        }
        if found {
            best_hits += 1;
        } else {
            misses.push(i);
        }
    }
    let n = instances.len();
    check(
        single_hits * 10 >= n * 9 && best_hits == n,
        format!(
            "single runs optimal {single_hits}/{n} (need >= 90%), best of 100 optimal {best_hits}/{n} \
             ({restarts_run} runs executed), misses {misses:?}"
        ),
    )
}

/// QA never loses to MFPB_HOSTP on the desk-scale suite.
fn desk_scale_dominance() -> Outcome {
    let suite = BenchSuite::desk_scale();
    let rows = run_benchmark(&suite).map_err(|e| e.to_string())?;
    let mut both = 0;
    let mut worse = Vec::new();
    let mut feasible: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
    for ((scale, weight, pair), group) in by_instance(&rows) {
        let find = |s: SolverId| group.iter().find(|r| r.solver == s).copied();
        let (Some(qa), Some(mf)) = (find(SolverId::Qa), find(SolverId::Mfpb)) else {
            return Err(format!("instance {scale}/{weight}/{pair} lacks a row"));
        };
        let e = feasible.entry(scale).or_default();
        e.0 += qa.feasible as usize;
        e.1 += mf.feasible as usize;
        if qa.feasible && mf.feasible {
            both += 1;
            if qa.utility.unwrap() < mf.utility.unwrap() {
                worse.push(format!("{scale}/{weight}/{pair}"));
            }
        }
    }
    let rate_fail: Vec<usize> = feasible
        .iter()
        .filter(|(_, (q, m))| q < m)
        .map(|(s, _)| *s)
        .collect();
    let qa_total: usize = feasible.values().map(|v| v.0).sum();
    let mf_total: usize = feasible.values().map(|v| v.1).sum();
    check(
        worse.is_empty() && rate_fail.is_empty(),
        format!(
            "{} instances, both feasible on {both}, QA worse on {worse:?}; feasible QA {qa_total} vs MFPB \
             {mf_total}, scales where QA's rate is lower: {rate_fail:?}",
            rows.len() / 2
        ),
    )
}

/// A feasible instance that MFPB_HOSTP declares infeasible.
fn heuristic_incompleteness() -> Outcome {
    let g = heuristic_trap();
    let sub = extract_subnetwork(&g, NodeId(1), NodeId(5), 6).unwrap();
    let (w, c) = (weights(), constraints());
    let oracle = optimal_path(&sub, &w, &c).unwrap();
    let mfpb = mfpb_hostp(&sub, &w, &c);
    let mut qa_found = None;
    for r in 0..100 {
        let out = qa_solve(&sub, &w, &c, &QaParams { seed: derive_seed(3, r), ..Default::default() }).unwrap();
        if out.result.feasible {
            qa_found = Some((r, out.result.path.unwrap().display_ids(&sub)));
            break;
        }
    }
    let oracle_path = oracle.path.as_ref().map(|p| p.display_ids(&sub));
    check(
        oracle.feasible && mfpb.status == Status::InfeasibleInstance && qa_found.is_some(),
        format!(
            "oracle {:?} ({:?}), MFPB_HOSTP {}, QA feasible path at restart {:?}",
            oracle_path,
            oracle.utility,
            mfpb.status,
            qa_found
        ),
    )
}

/// `is_feasible` agrees with `delta <= 1` on random samples.
fn delta_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut violations = 0;
    let mut boundary_samples = 0;
    for i in 0..10_000 {
        let c = QoTConstraints::new(rng.gen_range(0.0..0.99), rng.gen_range(0.0..0.99), rng.gen_range(0.0..0.99))
            .unwrap();
        let mut q = QoTVector::new(rng.gen(), rng.gen(), rng.gen());
        // A share of samples sits exactly on a bound.
        if i % 4 == 0 {
            boundary_samples += 1;
            match rng.gen_range(0..3) {
                0 => q.trust = c.trust,
                1 => q.intimacy = c.intimacy,
                _ => q.rho = c.rho,
            }
        }
        if is_feasible(&q, &c) != (delta(&q, &c) <= 1.0) {
            violations += 1;
        }
    }
    let c = constraints();
    let q = QoTVector::new(c.trust, c.intimacy, c.rho);
    let at_bound = delta(&q, &c);
    check(
        violations == 0 && at_bound == 1.0 && is_feasible(&q, &c),
        format!("10000 samples ({boundary_samples} on a bound), {violations} disagreements; delta(c, c) = {at_bound}"),
    )
}

/// Schedule endpoints and the coupling value and monotonicity.
fn schedule_numerics() -> Outcome {
    let (eta, g0, xi) = (500.0, 300.0, 0.1);
    let start = gamma_schedule(0.0, eta, g0, xi);
    let end = gamma_schedule(eta, eta, g0, xi);
    // -(5/3) ln tanh(3), evaluated independently at 50 significant digits.
    let reference = 0.008_262_524_177_816_628_851_095_837_851_820_368_731_4_f64;
    let jt = coupling_jt(300.0, 30, 10.0 / 3.0, 1e6);
    let rel = ((jt - reference) / reference).abs();
    let samples: Vec<f64> = (0..1000)
        .map(|k| coupling_jt_uncapped(300.0 * (1.0 - k as f64 / 1000.0), 30, 10.0 / 3.0))
        .collect();
    let increasing = samples.windows(2).all(|p| p[1] > p[0]);
    check(
        start == 300.0 && end == 0.0 && rel <= 1e-12 && increasing,
        format!(
            "Gamma(0) = {start}, Gamma(eta) = {end}, J_T = {jt:.17e} (rel err {rel:.1e}), \
             uncapped J_T strictly increasing over 1000 samples: {increasing}"
        ),
    )
}

/// Incremental energy change against full recomputation.
fn incremental_energy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (w, c) = (weights(), constraints());
    let mut trials = 0;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut graph_seed = 0u64;
    while trials < 10_000 {
        graph_seed += 1;
        let n = rng.gen_range(6..=14);
        let e = rng.gen_range(n..=(n * (n - 1) / 2).min(3 * n));
        let g = generate_graph(&GeneratorSpec::new(n, e, derive_seed(66, graph_seed))).unwrap();
        let sub = extract_subnetwork(&g, NodeId(1), NodeId(n as u64), 6).unwrap();
        if sub.is_empty() {
            continue;
        }
        let space = PathSpace::new(&sub, 20, &w);
        let p = rng.gen_range(2..=8);
        let paths: Vec<TrustPath> = (0..p).map(|_| space.random_path(&mut rng).unwrap()).collect();
        let pot = Potential {
            weights: w,
            constraints: c,
            beta: rng.gen_range(0.0..5.0),
        };
        let mut sys = ReplicaSystem::new(&space, pot, paths).unwrap();
        for _ in 0..200 {
            let jt = match rng.gen_range(0..3) {
                0 => 0.0,
                1 => rng.gen_range(0.0..1.0),
                _ => rng.gen_range(1.0..20.0),
            };
            let r = rng.gen_range(0..p);
            let cand = propose_move(&sys.replica(r).path, &space, &mut rng);
            let local = local_move_delta(&sys, r, &cand, jt);
            let before = effective_hamiltonian(&sys, jt);
            let prop = sys.propose(r, cand, jt);
            let mut after_sys = sys.clone();
            after_sys.apply(prop);
            let full = effective_hamiltonian(&after_sys, jt) - before;
            let err = (local - full).abs();
            worst = worst.max(err);
            if err > 1e-9 {
                failures += 1;
            }
            trials += 1;
            if rng.gen_bool(0.5) {
                sys = after_sys;
            }
        }
    }
    check(
        failures == 0,
        format!("{trials} fuzzed moves, {failures} above 1e-9, worst |error| {worst:.2e}"),
    )
}

/// Empirical Metropolis acceptance within three standard errors.
fn metropolis_calibration() -> Outcome {
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut lines = Vec::new();
    let mut ok = true;
    for ratio in [0.5, 1.0, 2.0] {
        let t = 0.7;
        let p = (-ratio as f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let sa = (0..n).filter(|_| sa_accept(0.2, 0.2 + ratio * t, t, &mut rng)).count() as f64 / n as f64;
        let qa = (0..n).filter(|_| qa_accept(ratio * t, t, &mut rng)).count() as f64 / n as f64;
        let z_sa = (sa - p).abs() / se;
        let z_qa = (qa - p).abs() / se;
        ok &= z_sa <= 3.0 && z_qa <= 3.0;
        lines.push(format!("dE/t={ratio}: exp={p:.4} sa={sa:.4} ({z_sa:.2} se) qa={qa:.4} ({z_qa:.2} se)"));
    }
    check(ok, lines.join("; "))
}

/// Success probability does not drop as the annealing gets longer.
fn convergence_proxy() -> Outcome {
    let instances = ten_node_instances(3, 0xC0FFEE);
    let (w, c) = (weights(), constraints());
    let runs = 100;
    let z = 2.326;
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let mut rates = Vec::new();
        for steps in [50usize, 200, 800] {
            let hits = (0..runs)
                .filter(|&r| {
                    let params = QaParams {
                        max_steps: steps,
                        seed: derive_seed(derive_seed(88, i as u64), r as u64),
                        ..Default::default()
                    };
                    let out = qa_solve(&inst.sub, &w, &c, &params).unwrap();
                    approx_eq(out.result.utility, inst.oracle.utility, 1e-9)
                })
                .count();
            rates.push(hits as f64 / runs as f64);
        }
        for pair in rates.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let se = (a * (1.0 - a) / runs as f64 + b * (1.0 - b) / runs as f64).sqrt();
            ok &= b >= a - z * se;
        }
        lines.push(format!("instance {i}: {:?}", rates));
    }
    check(ok, format!("optimal fraction at 50/200/800 steps: {}", lines.join(", ")))
}

/// Every solver and a full benchmark rerun identically.
fn determinism() -> Outcome {
    let (w, c) = (weights(), constraints());
    let cfg = SolverConfig {
        qa: QaParams {
            max_steps: 100,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut solver_runs = 0;
    for inst in ten_node_instances(5, 0xD0D0) {
        for solver in SolverId::ALL {
            let a = run_solver(solver, &inst.sub, &w, &c, &cfg, inst.seed)?;
            let b = run_solver(solver, &inst.sub, &w, &c, &cfg, inst.seed)?;
            if !a.same_run(&b) {
                return Err(format!("{solver} differs between reruns on instance seed {}", inst.seed));
            }
            solver_runs += 1;
        }
    }
    let suite = BenchSuite {
        scales: vec![Scale { nodes: 12, edges: 24 }, Scale { nodes: 16, edges: 34 }],
        weight_groups: ostp_core::bench::default_weight_groups()[..2].to_vec(),
        constraints: constraints(),
        pairs_per_scale: 2,
        solvers: SolverId::ALL.to_vec(),
        restarts: 2,
        master_seed: 99,
        max_hops: 6,
        solver_config: cfg,
    };
    let render = || -> Result<Vec<u8>, String> {
        let mut rows = run_benchmark(&suite).map_err(|e| e.to_string())?;
        for r in &mut rows {
            r.wall_time = 0.0;
        }
        let mut buf = Vec::new();
        emit(&rows, Format::Csv, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let (a, b) = (render()?, render()?);
    let lines = a.iter().filter(|&&x| x == b'\n').count() - 1;
    check(
        a == b,
        format!("{solver_runs} solver reruns identical; benchmark of {lines} rows byte-identical: {}", a == b),
    )
}

/// Path to spin vector and back.
fn encoding_fidelity() -> Outcome {
    let g = diamond();
    let sub = extract_subnetwork(&g, NodeId(1), NodeId(4), 2).unwrap();
    let space = PathSpace::new(&sub, 20, &weights());
    let independent = [0, 1];
    let label = |ids: &[u64]| {
        let ids: Vec<NodeId> = ids.iter().map(|&i| NodeId(i)).collect();
        let p = TrustPath::from_ids(&ids, &sub).unwrap();
        let s = encode_spins(&p, &space).unwrap();
        let back = decode_path(&s, &space).unwrap();
        (s.values().to_vec(), s.basis_label(&independent), back == Some(p))
    };
    let a = label(&[1, 2, 4]);
    let b = label(&[1, 3, 4]);
    let fixture_ok = a == (vec![1, -1, 1, -1], "01".to_string(), true) && b == (vec![-1, 1, -1, 1], "10".to_string(), true);

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut checked = 0;
    let mut failures = 0;
    let mut k = 0u64;
    while checked < 1000 {
        k += 1;
        let graph = generate_graph(&GeneratorSpec::new(12, 26, derive_seed(1010, k))).unwrap();
        let sub = extract_subnetwork(&graph, NodeId(1), NodeId(12), 6).unwrap();
        if sub.is_empty() {
            continue;
        }
        let space = PathSpace::new(&sub, 20, &weights());
        for _ in 0..50 {
            let p = space.random_path(&mut rng).unwrap();
            let spins = encode_spins(&p, &space).unwrap();
            let up = spins.up_slots().len();
            if decode_path(&spins, &space).unwrap() != Some(p.clone()) || up != p.hops() {
                failures += 1;
            }
            checked += 1;
        }
    }
    check(
        fixture_ok && failures == 0,
        format!("1-2-4 -> {:?} \"{}\", 1-3-4 -> {:?} \"{}\"; {checked} random paths, {failures} roundtrip failures", a.0, a.1, b.0, b.1),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "oracle equivalence (QA)", oracle_equivalence_qa),
        (2, "QA dominates MFPB_HOSTP on the desk-scale suite", desk_scale_dominance),
        (3, "heuristic incompleteness exhibit", heuristic_incompleteness),
        (4, "delta-feasibility duality", delta_duality),
        (5, "schedule and coupling numerics", schedule_numerics),
        (6, "incremental energy", incremental_energy),
        (7, "Metropolis calibration", metropolis_calibration),
        (8, "convergence with annealing length", convergence_proxy),
        (9, "determinism", determinism),
        (10, "encoding fidelity", encoding_fidelity),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS [{secs:.1}s] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL [{secs:.1}s] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
