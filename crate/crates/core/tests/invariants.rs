mod common;

use common::{constraints, weights};
use ostp_core::graph::{extract_subnetwork, generate_graph, GeneratorSpec, NodeId, SubNetwork};
use ostp_core::moves::{apply_kind, propose_move, MoveKind, PathSpace};
use ostp_core::qa::{decode_path, effective_hamiltonian, encode_spins, local_move_delta, Potential, ReplicaSystem};
use ostp_core::qot::{delta, g_lambda, is_feasible, utility, QoTConstraints, QoTVector, QoTWeights};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(n: usize, extra: usize, seed: u64, hops: usize) -> Option<SubNetwork> {
    let e = (n + extra).min(n * (n - 1) / 2);
    let g = generate_graph(&GeneratorSpec::new(n, e, seed)).unwrap();
    let sub = extract_subnetwork(&g, NodeId(1), NodeId(n as u64), hops).unwrap();
    (!sub.is_empty()).then_some(sub)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moves_preserve_validity(n in 5usize..25, extra in 0usize..40, seed: u64, hops in 2usize..7, prune in 1usize..8) {
        let Some(sub) = instance(n, extra, seed, hops) else { return Ok(()); };
        let space = PathSpace::new(&sub, prune, &weights());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        let mut path = space.random_path(&mut rng).unwrap();
        for _ in 0..100 {
            for kind in [MoveKind::Substitute, MoveKind::Minus, MoveKind::Plus, MoveKind::Reroute] {
                if let Some(next) = apply_kind(kind, &path, &space, &mut rng) {
                    prop_assert!(next.validate(&sub).is_ok(), "{kind:?} broke {:?}", next);
                    prop_assert!(next != path);
                    let (a, b) = (path.nodes(), next.nodes());
                    match kind {
                        MoveKind::Substitute => {
                            prop_assert_eq!(a.len(), b.len());
                            prop_assert_eq!(a.iter().zip(b).filter(|(x, y)| x != y).count(), 1);
                        }
                        MoveKind::Minus => {
                            prop_assert_eq!(a.len(), b.len() + 1);
                            prop_assert!(b.iter().all(|v| a.contains(v)));
                        }
                        MoveKind::Plus => {
                            prop_assert_eq!(a.len() + 1, b.len());
                            prop_assert!(a.iter().all(|v| b.contains(v)));
                        }
                        MoveKind::Reroute => prop_assert_eq!(a[0], b[0]),
                    }
                }
            }
            path = propose_move(&path, &space, &mut rng);
            prop_assert!(path.validate(&sub).is_ok());
            prop_assert!(space.is_valid(path.nodes()));
        }
    }

    #[test]
    fn feasibility_and_delta_agree(
        q in (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0),
        c in (0.0f64..0.999, 0.0f64..0.999, 0.0f64..0.999),
    ) {
        let q = QoTVector::new(q.0, q.1, q.2);
        let c = QoTConstraints::new(c.0, c.1, c.2).unwrap();
        let d = delta(&q, &c);
        prop_assert_eq!(is_feasible(&q, &c), d <= 1.0);
        prop_assert!(d >= 0.0);
        // g_lambda bounds delta^lambda from above and 3 delta^lambda from below.
        let g = g_lambda(&q, &c, 2.0);
        prop_assert!(g + 1e-12 >= d * d && g <= 3.0 * d * d + 1e-12);
    }

    #[test]
    fn utility_is_a_convex_combination(
        q in (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0),
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
    ) {
        let (wt, wr) = (a * (1.0 - b), (1.0 - a) * (1.0 - b));
        let w = QoTWeights::new(wt, wr, 1.0 - wt - wr).unwrap();
        let u = utility(&QoTVector::new(q.0, q.1, q.2), &w);
        let lo = q.0.min(q.1).min(q.2);
        let hi = q.0.max(q.1).max(q.2);
        prop_assert!(u >= lo - 1e-12 && u <= hi + 1e-12);
    }

    #[test]
    fn spins_roundtrip(n in 5usize..30, extra in 0usize..60, seed: u64) {
        let Some(sub) = instance(n, extra, seed, 6) else { return Ok(()); };
        let space = PathSpace::new(&sub, 20, &weights());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let p = space.random_path(&mut rng).unwrap();
            let s = encode_spins(&p, &space).unwrap();
            prop_assert_eq!(s.len(), space.edge_count());
            prop_assert_eq!(s.up_slots().len(), p.hops());
            prop_assert_eq!(decode_path(&s, &space).unwrap(), Some(p));
        }
    }

    #[test]
    fn incremental_hamiltonian_matches_full(
        n in 5usize..16,
        extra in 0usize..30,
        seed: u64,
        replicas in 2usize..7,
        jt in 0.0f64..10.0,
        beta in 0.0f64..4.0,
    ) {
        let Some(sub) = instance(n, extra, seed, 6) else { return Ok(()); };
        let space = PathSpace::new(&sub, 20, &weights());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let paths = (0..replicas).map(|_| space.random_path(&mut rng).unwrap()).collect();
        let pot = Potential { weights: weights(), constraints: constraints(), beta };
        let mut sys = ReplicaSystem::new(&space, pot, paths).unwrap();
        for k in 0..30 {
            let r = k % replicas;
            let cand = propose_move(&sys.replica(r).path, &space, &mut rng);
            let d = local_move_delta(&sys, r, &cand, jt);
            let before = effective_hamiltonian(&sys, jt);
            let prop = sys.propose(r, cand, jt);
            sys.apply(prop);
            let after = effective_hamiltonian(&sys, jt);
            prop_assert!((d - (after - before)).abs() <= 1e-9, "{} vs {}", d, after - before);
        }
    }
}
