//! Byte-for-byte golden checks on the wire renderings.

use symbolizer_core::schema::{compile_predicate_schema, SchemaLimits};
use symbolizer_core::vocab::{
    LiftedVocabulary, ObjectInstance, ObjectSet, PredicateSignature, TypeName,
};

const PREDICATE_SCHEMA_GOLDEN: &str = include_str!("fixtures/predicate_schema.golden.json");

fn fixture() -> (LiftedVocabulary, ObjectSet) {
    let disk = TypeName::new("disk").unwrap();
    let peg = TypeName::new("peg").unwrap();
    let vocab = LiftedVocabulary::new(
        [disk.clone(), peg.clone()],
        [
            PredicateSignature::new("on", vec![disk.clone(), peg.clone()], false).unwrap(),
            PredicateSignature::new("clear", vec![disk.clone()], false).unwrap(),
        ],
    )
    .unwrap();
    let objs = ObjectSet::new(
        &vocab,
        [
            ObjectInstance::new("d1", disk.clone()).unwrap(),
            ObjectInstance::new("d2", disk).unwrap(),
            ObjectInstance::new("p1", peg).unwrap(),
        ],
    )
    .unwrap();
    (vocab, objs)
}

#[test]
fn predicate_schema_rendering_is_byte_stable() {
    let (vocab, objs) = fixture();
    let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
    assert_eq!(doc.render(), PREDICATE_SCHEMA_GOLDEN);
    assert_eq!(
        doc.vocab_hash(),
        "79f8e5e2b7720f5482ca7adc29d2157e4161acf48c4ab8da113dfaea9a5cb34a"
    );
}
