//! Cross-module invariants: the reduction chain, fixpoint minimality, scale
//! invariance, and document round-trips under randomized inputs.

use num_rational::Rational64;
use proptest::prelude::*;

use cstn::dc::{check_edc, construct_h_epsilon, solve_h_epsilon, verify_strategy, ExpansionOutcome};
use cstn::format::{parse_cstn, parse_strategy, serialize_cstn, serialize_strategy};
use cstn::generators::{gen_random_cstn, RandomCstnParams};
use cstn::hytn::Hytn;
use cstn::mpg::{hytn_to_mpg, lifting_round, solve_energy, Energy, Mpg, Owner};
use cstn::network::DEFAULT_EXPANSION_NODE_CAP;
use cstn::rational::EpsilonRational;

fn eps(n: i64, d: i64) -> EpsilonRational {
    EpsilonRational::new(n, d).unwrap()
}

/// Deciding the scaled expansion directly agrees with the full check, and
/// extracted strategies verify at the same bound.
#[test]
fn reduction_chain_agreement() {
    for seed in 0..30u64 {
        let g = gen_random_cstn(&RandomCstnParams {
            nodes: 4 + (seed % 3) as usize,
            props: (seed % 3) as usize,
            arc_density: 0.3,
            weight_range: 6,
            seed: 7000 + seed,
        });
        for e in [eps(1, 1), eps(1, 6)] {
            let h = construct_h_epsilon(&g, &e).unwrap();
            let scaled = h.hytn().scale_to_integer(e.denominator()).unwrap();
            let (verdict, _) = cstn::mpg::check_hytn_consistency(&scaled);

            let report = check_edc(&g, &e).unwrap();
            assert_eq!(
                verdict.is_consistent(),
                report.is_positive(),
                "seed {seed} at {e}"
            );
            if let Some(sigma) = &report.strategy {
                let v = verify_strategy(&g, sigma, Some(&e)).unwrap();
                assert!(v.all_ok(), "seed {seed} at {e}");
            } else {
                let cert = report.certificate.as_ref().unwrap();
                assert!(!cert.is_empty(), "seed {seed} at {e}");
            }
        }
    }
}

/// Feasible expansion schedules stay feasible when every weight and time is
/// scaled by the same positive integer, and the verdict is unchanged.
#[test]
fn verdict_is_scale_invariant() {
    let mut checked_consistent = 0;
    let mut checked_inconsistent = 0;
    for seed in 0..40u64 {
        let g = gen_random_cstn(&RandomCstnParams {
            nodes: 5,
            props: (seed % 3) as usize,
            arc_density: 0.35,
            weight_range: 5,
            seed: 8000 + seed,
        });
        let e = eps(1, 4);
        let h = construct_h_epsilon(&g, &e).unwrap();
        let base = h.hytn().scale_to_integer(4).unwrap();
        let (v1, _) = cstn::mpg::check_hytn_consistency(&base);
        for k in [2i64, 5] {
            let mut scaled = Hytn::new();
            for name in base.node_names() {
                scaled.add_node(name.clone()).unwrap();
            }
            for arc in base.hyperarcs() {
                let heads: Vec<(usize, i64)> =
                    arc.heads().map(|(h2, w)| (h2, w * k)).collect();
                scaled.add_hyperarc_by_id(arc.tail(), heads).unwrap();
            }
            let (v2, _) = cstn::mpg::check_hytn_consistency(&scaled);
            assert_eq!(v1.is_consistent(), v2.is_consistent(), "seed {seed} x{k}");
        }
        if v1.is_consistent() {
            checked_consistent += 1;
        } else {
            checked_inconsistent += 1;
        }
    }
    assert!(checked_consistent > 0 && checked_inconsistent > 0);
}

/// The energy function is the least fixpoint: lowering any finite positive
/// value breaks some node's lifting equation.
#[test]
fn energy_is_a_least_fixpoint() {
    let games: Vec<Mpg> = vec![
        Mpg::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![Owner::Min, Owner::Max, Owner::Min],
            vec![(0, 1, -2), (1, 2, 1), (1, 0, -1), (2, 0, 3), (2, 2, 0)],
        )
        .unwrap(),
        Mpg::new(
            vec!["a".into(), "b".into()],
            vec![Owner::Max, Owner::Min],
            vec![(0, 1, -1), (1, 0, 2), (0, 0, 0)],
        )
        .unwrap(),
    ];
    for g in &games {
        let (energy, _) = solve_energy(&g);
        // Fixpoint: one more round changes nothing.
        assert_eq!(
            lifting_round(&g, energy.values(), energy.cap()),
            energy.values()
        );
        // Minimality: decrement any positive finite value and observe the
        // round undoing it.
        for u in 0..g.node_count() {
            if let Energy::Finite(v) = energy.value(u) {
                if v == 0 {
                    continue;
                }
                let mut lowered = energy.values().to_vec();
                lowered[u] = Energy::Finite(v - 1);
                let relifted = lifting_round(&g, &lowered, energy.cap());
                assert_ne!(relifted, lowered, "node {u} could be lowered");
            }
        }
    }
}

/// Certificates on negative verdicts name events whose energy diverged;
/// every one of them must be a real expansion node.
#[test]
fn certificates_name_expansion_nodes() {
    let g = parse_cstn(
        "props p\nnode Op observes p\nnode C\nconstraint C - C <= -1 label p\n",
    )
    .unwrap();
    let e = eps(1, 4);
    let report = check_edc(&g, &e).unwrap();
    assert!(!report.is_positive());
    let cert = report.certificate.unwrap();
    assert!(!cert.is_empty());
    let h = construct_h_epsilon(&g, &e).unwrap();
    for name in &cert {
        assert!(
            h.hytn().node_names().contains(name),
            "{name} is not an expansion node"
        );
    }

    let (_, outcome, _) = solve_h_epsilon(&g, &e, DEFAULT_EXPANSION_NODE_CAP).unwrap();
    match outcome {
        ExpansionOutcome::Infeasible(tops) => assert_eq!(tops, cert),
        ExpansionOutcome::Feasible(_) => panic!("expected infeasible"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Serialize-parse round trip for generated networks.
    #[test]
    fn network_documents_round_trip(seed in 0u64..10_000, nodes in 2usize..7, props in 0usize..3) {
        let g = gen_random_cstn(&RandomCstnParams {
            nodes,
            props: props.min(nodes),
            arc_density: 0.3,
            weight_range: 9,
            seed,
        });
        let text = serialize_cstn(&g);
        let h = parse_cstn(&text).unwrap();
        prop_assert_eq!(g.propositions(), h.propositions());
        prop_assert_eq!(g.nodes(), h.nodes());
        prop_assert_eq!(g.constraints(), h.constraints());
        prop_assert_eq!(serialize_cstn(&h), text);
    }

    /// Strategy documents round trip through text exactly.
    #[test]
    fn strategy_documents_round_trip(seed in 0u64..10_000) {
        let g = gen_random_cstn(&RandomCstnParams {
            nodes: 4,
            props: (seed % 3) as usize,
            arc_density: 0.2,
            weight_range: 5,
            seed,
        });
        if let Ok(report) = check_edc(&g, &eps(1, 3)) {
            if let Some(sigma) = report.strategy {
                let text = serialize_strategy(&sigma);
                let again = parse_strategy(&text).unwrap();
                prop_assert_eq!(&sigma, &again);
                prop_assert_eq!(serialize_strategy(&again), text);
            }
        }
    }

    /// Random small games: solver finiteness equals the brute-force oracle.
    #[test]
    fn small_games_match_oracle(seed in 0u64..5_000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=5usize);
        let names = (0..n).map(|i| format!("n{i}")).collect();
        let owners = (0..n)
            .map(|_| if rng.gen_bool(0.5) { Owner::Min } else { Owner::Max })
            .collect();
        let mut edges = Vec::new();
        for u in 0..n {
            for _ in 0..rng.gen_range(1..=2usize) {
                edges.push((u, rng.gen_range(0..n), rng.gen_range(-3i64..=3)));
            }
        }
        let g = Mpg::new(names, owners, edges).unwrap();
        let (energy, _) = solve_energy(&g);
        let wins = cstn::mpg::brute_force_winners(&g, 1 << 16).unwrap();
        for u in 0..g.node_count() {
            prop_assert_eq!(wins[u], energy.value(u).is_finite());
        }
    }

    /// Consistent games produce schedules; times divided by the scale factor
    /// remain feasible for the rational expansion.
    #[test]
    fn rescaled_schedules_stay_feasible(seed in 0u64..2_000) {
        let g = gen_random_cstn(&RandomCstnParams {
            nodes: 4,
            props: (seed % 2) as usize,
            arc_density: 0.3,
            weight_range: 4,
            seed: 50_000 + seed,
        });
        let e = eps(1, 5);
        let h = construct_h_epsilon(&g, &e).unwrap();
        let scaled = h.hytn().scale_to_integer(5).unwrap();
        let (verdict, _) = cstn::mpg::check_hytn_consistency(&scaled);
        if let cstn::mpg::HytnVerdict::Consistent(phi) = verdict {
            let rescaled: cstn::hytn::HytnSchedule = phi
                .into_iter()
                .map(|(k, v)| (k, v / Rational64::from_integer(5)))
                .collect();
            prop_assert!(h.hytn().is_feasible_schedule(&rescaled).unwrap());
        }
    }
}
