//! Property tests over the core invariants: canonical keys are
//! order-insensitive, conforming schema documents always decode into
//! well-typed values, the atom universe matches its counting formula,
//! and problem emission round-trips through the parser.

use proptest::prelude::*;

use symbolizer_core::pddl::{emit_problem, parse_problem};
use symbolizer_core::schema::{
    compile_predicate_schema, decode_state, SchemaLimits,
};
use symbolizer_core::sim::{make_instance, DomainId, InstanceParams};
use symbolizer_core::vocab::{
    check_atom, ground_atom_universe, GroundAtom, LiftedVocabulary, ObjectInstance, ObjectSet,
    PredicateSignature, SymbolicState, TypeName,
};

fn ty(s: &str) -> TypeName {
    TypeName::new(s).unwrap()
}

fn blocks_vocab() -> LiftedVocabulary {
    LiftedVocabulary::new(
        [ty("block")],
        [
            PredicateSignature::new("on", vec![ty("block"), ty("block")], false).unwrap(),
            PredicateSignature::new("on-table", vec![ty("block")], false).unwrap(),
            PredicateSignature::new("clear", vec![ty("block")], false).unwrap(),
        ],
    )
    .unwrap()
}

fn blocks_objects(vocab: &LiftedVocabulary, n: usize) -> ObjectSet {
    ObjectSet::new(
        vocab,
        (1..=n).map(|i| ObjectInstance::new(&format!("b{i}"), ty("block")).unwrap()),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn canonical_key_is_order_insensitive(
        n in 1usize..5,
        picks in proptest::collection::vec(0usize..100, 0..12),
        shuffle_seed in any::<u64>(),
    ) {
        let vocab = blocks_vocab();
        let objs = blocks_objects(&vocab, n);
        let universe = ground_atom_universe(&vocab, &objs);
        let atoms: Vec<GroundAtom> = picks
            .iter()
            .map(|p| universe[p % universe.len()].clone())
            .collect();
        let forward = SymbolicState::new(&vocab, &objs, atoms.clone()).unwrap();
        // Deterministic permutation driven by the seed.
        let mut shuffled = atoms;
        let mut s = shuffle_seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let backward = SymbolicState::new(&vocab, &objs, shuffled).unwrap();
        prop_assert_eq!(forward.canonical_key(), backward.canonical_key());
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn universe_size_matches_counting_formula(
        blocks in 1usize..6,
        extra_unary in 0usize..3,
    ) {
        let mut preds = vec![
            PredicateSignature::new("on", vec![ty("block"), ty("block")], false).unwrap(),
        ];
        for i in 0..extra_unary {
            preds.push(
                PredicateSignature::new(&format!("flag{i}"), vec![ty("block")], false).unwrap(),
            );
        }
        let vocab = LiftedVocabulary::new([ty("block")], preds).unwrap();
        let objs = blocks_objects(&vocab, blocks);
        let expected: usize = vocab
            .predicates()
            .map(|sig| {
                sig.arg_types()
                    .iter()
                    .map(|t| objs.of_type(t).len())
                    .product::<usize>()
            })
            .sum();
        prop_assert_eq!(ground_atom_universe(&vocab, &objs).len(), expected);
    }

    /// Soundness: any document that samples only from the compiled slot
    /// enumerations decodes, and every decoded atom type-checks.
    #[test]
    fn conforming_documents_decode_well_typed(
        n in 1usize..5,
        picks in proptest::collection::vec((0usize..3, 0usize..25, 0usize..25), 0..20),
    ) {
        let vocab = blocks_vocab();
        let objs = blocks_objects(&vocab, n);
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let names: Vec<&str> = objs.names().collect();
        let preds = ["on", "on-table", "clear"];
        let records: Vec<serde_json::Value> = picks
            .iter()
            .map(|(p, a, b)| {
                let pred = preds[p % preds.len()];
                let arity = vocab.predicate(pred).unwrap().arity();
                let mut args = vec![names[a % names.len()]];
                if arity == 2 {
                    args.push(names[b % names.len()]);
                }
                serde_json::json!({"predicate": pred, "args": args})
            })
            .collect();
        let raw = serde_json::to_string(&serde_json::json!({"atoms": records})).unwrap();
        let state = decode_state(&doc, &raw).unwrap();
        for atom in state.atoms() {
            prop_assert!(check_atom(&vocab, &objs, atom).is_ok());
        }
    }

    /// Emission then parsing reproduces objects, init, and goal exactly
    /// on generated instances across all bundled domains.
    #[test]
    fn emitted_problems_round_trip(
        domain_pick in 0usize..3,
        size in 2usize..5,
        depth in 0usize..10,
        seed in any::<u64>(),
    ) {
        let domain = [DomainId::Blocksworld, DomainId::Hanoi, DomainId::HanoiColor][domain_pick];
        let inst = make_instance(domain, &InstanceParams::scrambled(size, depth), seed).unwrap();
        let text = emit_problem(
            &inst.id,
            domain.as_str(),
            &inst.objects,
            &inst.initial,
            &inst.goal,
        )
        .unwrap();
        let parsed = parse_problem(&text).unwrap();
        prop_assert_eq!(&parsed.name, &inst.id);
        prop_assert_eq!(parsed.domain.as_str(), domain.as_str());
        let object_names: Vec<&str> = inst.objects.names().collect();
        let parsed_names: Vec<&str> = parsed.objects.keys().map(|s| s.as_str()).collect();
        prop_assert_eq!(parsed_names, object_names);
        let init_atoms: Vec<&GroundAtom> = inst.initial.atoms().collect();
        let parsed_atoms: Vec<&GroundAtom> = parsed.init.iter().collect();
        prop_assert_eq!(parsed_atoms, init_atoms);
        prop_assert_eq!(parsed.goal.len(), inst.goal.len());
        for lit in inst.goal.literals() {
            prop_assert!(parsed.goal.contains(lit));
        }
    }
}
