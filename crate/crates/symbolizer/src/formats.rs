//! On-disk formats: vocabulary files, instance records (single JSON
//! documents and JSON-lines datasets), plan files with their stats
//! sidecars, and the bundled domain fixtures.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use symbolizer_core::planner::PlanResult;
use symbolizer_core::sim::{DomainId, SimInstance};
use symbolizer_core::vocab::{
    Goal, GroundAtom, LiftedVocabulary, Literal, ObjectInstance, ObjectSet,
    PredicateSignature, SymbolicState, TypeName,
};

pub const BLOCKSWORLD_PDDL: &str = include_str!("../assets/blocksworld.pddl");
pub const HANOI_PDDL: &str = include_str!("../assets/hanoi.pddl");

/// Fixture domain text for a bundled domain (the color variant shares
/// the hanoi mechanics).
pub fn bundled_domain_pddl(domain: DomainId) -> &'static str {
    match domain {
        DomainId::Blocksworld => BLOCKSWORLD_PDDL,
        DomainId::Hanoi | DomainId::HanoiColor => HANOI_PDDL,
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error("unknown domain {0:?} (expected blocksworld, hanoi, or hanoi-color)")]
    UnknownDomain(String),
}

fn malformed(path: &str, message: impl std::fmt::Display) -> FormatError {
    FormatError::Malformed {
        path: path.to_string(),
        message: message.to_string(),
    }
}

// ── Vocabulary files ──────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct VocabFile {
    types: Vec<String>,
    predicates: Vec<PredicateEntry>,
}

#[derive(Serialize, Deserialize)]
struct PredicateEntry {
    name: String,
    args: Vec<String>,
    #[serde(default, rename = "static")]
    static_flag: bool,
}

/// Deterministic JSON rendering of a vocabulary.
pub fn vocab_to_json(vocab: &LiftedVocabulary) -> String {
    let file = VocabFile {
        types: vocab.types().map(|t| t.as_str().to_string()).collect(),
        predicates: vocab
            .predicates()
            .map(|sig| PredicateEntry {
                name: sig.name().to_string(),
                args: sig.arg_types().iter().map(|t| t.as_str().to_string()).collect(),
                static_flag: sig.is_static(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("vocabulary serializes");
    out.push('\n');
    out
}

pub fn vocab_from_json(text: &str, origin: &str) -> Result<LiftedVocabulary, FormatError> {
    let file: VocabFile =
        serde_json::from_str(text).map_err(|e| malformed(origin, e))?;
    let types: Vec<TypeName> = file
        .types
        .iter()
        .map(|t| TypeName::new(t))
        .collect::<Result<_, _>>()
        .map_err(|e| malformed(origin, e))?;
    let predicates: Vec<PredicateSignature> = file
        .predicates
        .iter()
        .map(|p| {
            let args: Vec<TypeName> = p
                .args
                .iter()
                .map(|t| TypeName::new(t))
                .collect::<Result<_, _>>()?;
            PredicateSignature::new(&p.name, args, p.static_flag)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| malformed(origin, e))?;
    LiftedVocabulary::new(types, predicates).map_err(|e| malformed(origin, e))
}

pub fn load_vocab(path: &Path) -> Result<LiftedVocabulary, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    vocab_from_json(&text, &path.display().to_string())
}

// ── Instance records ──────────────────────────────────────────────────

/// How the observation for a row is supplied.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum ObservationRef {
    Text { text: String },
    Image { image_path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ObjectEntry {
    pub name: String,
    #[serde(rename = "type")]
    pub type_name: String,
}

/// One evaluation row: observation, goal text, and ground-truth
/// annotations, all in textual form. This is also the single-instance
/// file format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceRecord {
    pub id: String,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_path: Option<String>,
    pub observation: ObservationRef,
    pub goal_text: String,
    pub gt_objects: Vec<ObjectEntry>,
    pub gt_atoms: Vec<String>,
    pub gt_goal: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_plan_len: Option<usize>,
}

impl InstanceRecord {
    pub fn from_instance(inst: &SimInstance) -> Self {
        InstanceRecord {
            id: inst.id.clone(),
            domain: inst.domain.as_str().to_string(),
            vocab_path: None,
            observation: ObservationRef::Text {
                text: inst.observation_text.clone(),
            },
            goal_text: inst.goal_text.clone(),
            gt_objects: inst
                .objects
                .iter()
                .map(|(n, t)| ObjectEntry {
                    name: n.to_string(),
                    type_name: t.as_str().to_string(),
                })
                .collect(),
            gt_atoms: inst.initial.atoms().map(|a| a.to_string()).collect(),
            gt_goal: inst.goal.literals().map(|l| l.to_string()).collect(),
            gt_plan_len: None,
        }
    }
}

/// An instance record with its ground truth parsed into typed values.
#[derive(Debug, Clone)]
pub struct ResolvedInstance {
    pub record: InstanceRecord,
    pub vocab: LiftedVocabulary,
    pub objects: ObjectSet,
    pub state: SymbolicState,
    pub goal: Goal,
    /// Present when the row's domain is bundled, enabling planning.
    pub simulator: Option<SimInstance>,
}

/// Parses a record's ground truth against its vocabulary. Rows naming a
/// bundled domain resolve the vocabulary internally and rebuild a
/// simulator; other rows must carry `vocab_path`.
pub fn resolve_record(
    record: &InstanceRecord,
    base_dir: &Path,
) -> Result<ResolvedInstance, FormatError> {
    let origin = record.id.as_str();
    let domain = DomainId::parse(&record.domain);
    let vocab = match (&record.vocab_path, domain) {
        (Some(rel), _) => load_vocab(&base_dir.join(rel))?,
        (None, Some(d)) => symbolizer_core::sim::vocabulary(d),
        (None, None) => return Err(FormatError::UnknownDomain(record.domain.clone())),
    };
    let objects = ObjectSet::new(
        &vocab,
        record
            .gt_objects
            .iter()
            .map(|o| {
                let ty = TypeName::new(&o.type_name)?;
                ObjectInstance::new(&o.name, ty)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| malformed(origin, e))?,
    )
    .map_err(|e| malformed(origin, e))?;
    let atoms: Vec<GroundAtom> = record
        .gt_atoms
        .iter()
        .map(|a| GroundAtom::parse(a))
        .collect::<Result<_, _>>()
        .map_err(|e| malformed(origin, e))?;
    let state =
        SymbolicState::new(&vocab, &objects, atoms).map_err(|e| malformed(origin, e))?;
    let literals: Vec<Literal> = record
        .gt_goal
        .iter()
        .map(|l| Literal::parse(l))
        .collect::<Result<_, _>>()
        .map_err(|e| malformed(origin, e))?;
    let goal = Goal::new(&vocab, &objects, literals).map_err(|e| malformed(origin, e))?;
    let simulator = match domain {
        Some(d) => Some(
            SimInstance::reconstruct(
                d,
                record.id.clone(),
                objects.clone(),
                state.clone(),
                goal.clone(),
                record.goal_text.clone(),
                match &record.observation {
                    ObservationRef::Text { text } => text.clone(),
                    ObservationRef::Image { .. } => String::new(),
                },
            )
            .map_err(|e| malformed(origin, e))?,
        ),
        None => None,
    };
    Ok(ResolvedInstance {
        record: record.clone(),
        vocab,
        objects,
        state,
        goal,
        simulator,
    })
}

pub fn write_instance(path: &Path, record: &InstanceRecord) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(record).expect("record serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn read_instance(path: &Path) -> Result<InstanceRecord, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| malformed(&path.display().to_string(), e))
}

/// Reads a JSON-lines dataset, one record per non-empty line.
pub fn read_dataset(path: &Path) -> Result<Vec<InstanceRecord>, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut rows = Vec::new();
    let mut ids: BTreeSet<String> = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: InstanceRecord = serde_json::from_str(line)
            .map_err(|e| malformed(&format!("{}:{}", path.display(), i + 1), e))?;
        if !ids.insert(record.id.clone()) {
            return Err(malformed(
                &path.display().to_string(),
                format!("duplicate instance id {:?}", record.id),
            ));
        }
        rows.push(record);
    }
    Ok(rows)
}

pub fn write_dataset(path: &Path, rows: &[InstanceRecord]) -> Result<(), FormatError> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

// ── Plan files ─────────────────────────────────────────────────────────

/// Plan file: a comment header with deterministic stats, then one label
/// per line. Wall time is deliberately omitted so repeated runs are
/// byte-identical.
pub fn render_plan_file(result: &PlanResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("# outcome: {}\n", result.outcome));
    out.push_str(&format!("# plan-length: {}\n", result.plan.len()));
    out.push_str(&format!("# expansions: {}\n", result.stats.expansions));
    out.push_str(&format!("# generated: {}\n", result.stats.generated));
    out.push_str(&format!("# duplicates: {}\n", result.stats.duplicates));
    out.push_str(&format!("# peak-frontier: {}\n", result.stats.peak_frontier));
    for label in &result.plan {
        out.push_str(&label.to_string());
        out.push('\n');
    }
    out
}

/// Machine-readable stats sidecar matching the plan file header.
pub fn render_stats_json(result: &PlanResult) -> String {
    let value = serde_json::json!({
        "outcome": result.outcome.as_str(),
        "plan_length": result.plan.len(),
        "expansions": result.stats.expansions,
        "generated": result.stats.generated,
        "duplicates": result.stats.duplicates,
        "peak_frontier": result.stats.peak_frontier,
    });
    let mut out = serde_json::to_string_pretty(&value).expect("stats serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use symbolizer_core::sim::{make_instance, InstanceParams};

    #[test]
    fn vocab_json_round_trip() {
        let vocab = symbolizer_core::sim::vocabulary(DomainId::Hanoi);
        let text = vocab_to_json(&vocab);
        let parsed = vocab_from_json(&text, "test").unwrap();
        assert_eq!(parsed, vocab);
    }

    #[test]
    fn bundled_domains_parse() {
        for domain in [DomainId::Blocksworld, DomainId::Hanoi] {
            let parsed = symbolizer_core::pddl::parse_domain(bundled_domain_pddl(domain));
            assert!(parsed.is_ok(), "{domain}: {parsed:?}");
        }
    }

    #[test]
    fn record_round_trip_through_resolution() {
        for domain in [DomainId::Blocksworld, DomainId::Hanoi, DomainId::HanoiColor] {
            let inst = make_instance(domain, &InstanceParams::scrambled(3, 6), 11).unwrap();
            let record = InstanceRecord::from_instance(&inst);
            let resolved = resolve_record(&record, Path::new(".")).unwrap();
            assert_eq!(resolved.state, inst.initial, "{domain}");
            assert_eq!(resolved.goal, inst.goal);
            assert_eq!(resolved.objects, inst.objects);
            // The rebuilt simulator agrees with the original.
            let sim = resolved.simulator.expect("bundled domain");
            assert_eq!(
                sim.successors(&inst.initial).unwrap(),
                inst.successors(&inst.initial).unwrap()
            );
        }
    }

    #[test]
    fn unknown_domain_without_vocab_is_rejected() {
        let inst =
            make_instance(DomainId::Blocksworld, &InstanceParams::canonical(2), 0).unwrap();
        let mut record = InstanceRecord::from_instance(&inst);
        record.domain = "warehouse".into();
        let err = resolve_record(&record, Path::new(".")).unwrap_err();
        assert!(matches!(err, FormatError::UnknownDomain(_)));
    }

    #[test]
    fn dataset_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let rows: Vec<InstanceRecord> = (0..3)
            .map(|seed| {
                let inst = make_instance(
                    DomainId::Hanoi,
                    &InstanceParams::scrambled(3, 4),
                    seed,
                )
                .unwrap();
                InstanceRecord::from_instance(&inst)
            })
            .collect();
        write_dataset(&path, &rows).unwrap();
        let read = read_dataset(&path).unwrap();
        assert_eq!(read, rows);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let inst =
            make_instance(DomainId::Hanoi, &InstanceParams::canonical(3), 0).unwrap();
        let row = InstanceRecord::from_instance(&inst);
        write_dataset(&path, &[row.clone(), row]).unwrap();
        assert!(read_dataset(&path).is_err());
    }

    #[test]
    fn plan_file_lists_labels_after_header() {
        let inst =
            make_instance(DomainId::Hanoi, &InstanceParams::canonical(2), 0).unwrap();
        let result = symbolizer_core::planner::bfs_oracle(
            &inst.initial,
            &inst.goal,
            |s| inst.successors(s),
            &Default::default(),
        )
        .unwrap();
        let text = render_plan_file(&result);
        assert!(text.starts_with("# outcome: solved\n# plan-length: 3\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
        assert!(!text.contains("elapsed"));
    }
}
