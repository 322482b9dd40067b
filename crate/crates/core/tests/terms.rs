use partlat::certificate::GeneratorCertificate;
use partlat::power::{build_four_generators, build_order_type_generators};
use partlat::term::{random_term, GrowthPolicy, Node, Op};
use partlat::zadori::{certify_table, EntryRule, FTermTable, ZadoriConfig};
use partlat::{LatticeShape, Partition, ShiftRng, Term, TermArena};
use proptest::prelude::*;

/// Nodes of the form `x P (y Q z)` with `Q` dual to `P` and `x` in `{y, z}`.
fn absorption_sites(term: &Term) -> usize {
    let arena = term.arena();
    let live = arena.reachable(&[term.root()]);
    let mut count = 0;
    for id in arena.ids().filter(|id| live[id.index()]) {
        let Node::Apply(op, a, b) = arena.node(id) else { continue };
        for (var, other) in [(a, b), (b, a)] {
            let (Node::Var(x), Node::Apply(inner, c, d)) = (arena.node(var), arena.node(other)) else { continue };
            if inner == op.dual() && (arena.node(c) == Node::Var(x) || arena.node(d) == Node::Var(x)) {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn random_terms_avoid_absorption() {
    for seed in 0..200 {
        for policy in [GrowthPolicy::Uniform, GrowthPolicy::DepthWeighted] {
            let grown = random_term(8, 1000, &mut ShiftRng::new(seed), policy).unwrap();
            assert_eq!(grown.steps.len(), 1000);
            assert!(grown.steps.iter().all(|s| !s.absorbs() && s.left != s.right));
            assert_eq!(absorption_sites(&grown.term), 0, "seed {seed}");
            assert_eq!(grown.term.operation_count(), 1000u32.into());
        }
    }
}

#[test]
fn absorption_detector_sees_planted_sites() {
    let t = Term::parse("(+ x1 (* x1 x2))", 2).unwrap();
    assert_eq!(absorption_sites(&t), 1);
    let t = Term::parse("(* (+ x2 x3) x3)", 3).unwrap();
    assert_eq!(absorption_sites(&t), 1);
    assert_eq!(absorption_sites(&Term::parse("(+ x1 (+ x1 x2))", 2).unwrap()), 0);
}

fn atoms_with_delta(config: &ZadoriConfig, rule: EntryRule, delta: &Partition) -> GeneratorCertificate {
    let mut arena = TermArena::new();
    let table = FTermTable::build(&mut arena, config, rule);
    let mut cert = GeneratorCertificate::new(LatticeShape::new(config.n(), 1).unwrap(), vec![]);
    certify_table(&arena, &table, &config.quadruple_with(delta), None, &mut cert).unwrap();
    cert
}

#[test]
fn delta_substitution_keeps_atoms() {
    // With only the entry terms seeing delta, any enlargement that leaves
    // those entries unchanged yields the same atoms.
    for n in [7, 8, 9, 10, 11] {
        let set = build_four_generators(n, None).unwrap();
        let config = ZadoriConfig::new(n).unwrap();
        for dh in &set.delta_hats {
            let cert = atoms_with_delta(&config, EntryRule::Direct, dh);
            assert!(cert.is_valid(), "n={n} delta={dh}: {:?}", cert.first_failure());
        }
    }
}

#[test]
fn delta_substitution_in_order_type_sets() {
    for n in 7..=13 {
        let set = build_order_type_generators(n).unwrap();
        for dh in &set.delta_hats {
            let cert = atoms_with_delta(&set.config, EntryRule::ViaComplement, dh);
            assert!(cert.is_valid(), "n={n} delta={dh}: {:?}", cert.first_failure());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sexpr_round_trip(seed in any::<u64>(), steps in 0usize..200, p in 2usize..10) {
        let t = random_term(p, steps, &mut ShiftRng::new(seed), GrowthPolicy::Uniform).unwrap().term;
        let text = t.to_sexpr();
        let back = Term::parse(&text, p).unwrap();
        prop_assert_eq!(back.to_sexpr(), text);
        prop_assert_eq!(back.occurrences(), t.occurrences());
    }

    #[test]
    fn meets_and_joins_evaluate_like_lattice_ops(seed in any::<u64>()) {
        let mut rng = ShiftRng::new(seed);
        let args: Vec<_> = (0..3)
            .map(|_| partlat::partition::random_partition(6, &mut rng).unwrap().into())
            .collect::<Vec<partlat::PartitionTuple>>();
        for (text, want) in [
            ("(* x1 x2)", args[0].meet(&args[1]).unwrap()),
            ("(+ x1 x2)", args[0].join(&args[1]).unwrap()),
            ("(* x3 (+ x1 x2))", args[2].meet(&args[0].join(&args[1]).unwrap()).unwrap()),
        ] {
            prop_assert_eq!(Term::parse(text, 3).unwrap().eval(&args).unwrap(), want);
        }
    }
}

#[test]
fn ops_are_dual() {
    assert_eq!(Op::Meet.dual(), Op::Join);
    assert_eq!(Op::Join.dual(), Op::Meet);
}
