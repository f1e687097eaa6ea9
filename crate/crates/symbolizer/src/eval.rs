//! Scoring and sweeps: per-stage grounding F1 against ground truth,
//! planning success rates under three protocols, and noise sweeps with
//! the mock grounder. Rows are evaluated independently (optionally in
//! parallel); reports are deterministic given (dataset, seed, config).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use symbolizer_core::pddl::{self, PddlError};
use symbolizer_core::planner::{self, Outcome, SearchBudget, Tiebreak};
use symbolizer_core::sim::ActionLabel;
use symbolizer_core::vocab::{Goal, Observation, ObjectSet, SymbolicState};

use crate::formats::{
    bundled_domain_pddl, resolve_record, FormatError, InstanceRecord, ObservationRef,
    ResolvedInstance,
};
use crate::grounder::{GroundError, HttpGrounder, MockGrounder};

/// Per-instance precision/recall/F1 over canonicalized element sets.
/// Empty-vs-empty scores 1.0; an empty side against a non-empty one
/// scores 0 for that direction; F1 is 0 when both components are.
pub fn set_f1<T: Ord>(predicted: &BTreeSet<T>, truth: &BTreeSet<T>) -> (f64, f64, f64) {
    if predicted.is_empty() && truth.is_empty() {
        return (1.0, 1.0, 1.0);
    }
    let overlap = predicted.intersection(truth).count() as f64;
    let precision = if predicted.is_empty() {
        0.0
    } else {
        overlap / predicted.len() as f64
    };
    let recall = if truth.is_empty() {
        0.0
    } else {
        overlap / truth.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FailureKind {
    SchemaViolation,
    EmptyResult,
    Transport,
    Unsolved,
    ReplayFailure,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::SchemaViolation => "schema-violation",
            FailureKind::EmptyResult => "empty-result",
            FailureKind::Transport => "transport",
            FailureKind::Unsolved => "unsolved",
            FailureKind::ReplayFailure => "replay-failure",
        }
    }

    fn from_ground_error(e: &GroundError) -> Self {
        match e {
            GroundError::Schema(_) => FailureKind::SchemaViolation,
            GroundError::EmptyResult => FailureKind::EmptyResult,
            GroundError::Sim(_) | GroundError::NoSuchSuccessor { .. } => FailureKind::Unsolved,
            GroundError::Transport(_)
            | GroundError::Prompt(_)
            | GroundError::Cache(_)
            | GroundError::Config(_) => FailureKind::Transport,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl StageScore {
    fn from_tuple((precision, recall, f1): (f64, f64, f64)) -> Self {
        StageScore {
            precision,
            recall,
            f1,
        }
    }

    fn zero() -> Self {
        StageScore {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundRow {
    pub id: String,
    pub domain: String,
    pub objects: Option<StageScore>,
    pub predicates: Option<StageScore>,
    pub goal: Option<StageScore>,
    /// Predicted object names absent from the ground truth.
    pub name_mismatches: usize,
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone)]
pub struct PlanRow {
    pub id: String,
    pub domain: String,
    pub outcome: Option<Outcome>,
    pub plan_length: usize,
    pub expansions: u64,
    pub generated: u64,
    pub duplicates: u64,
    pub replay_ok: bool,
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone, Default)]
pub struct ScoreReport {
    pub grounding: Vec<GroundRow>,
    pub planning: Vec<PlanRow>,
    pub taxonomy: BTreeMap<&'static str, usize>,
}

impl ScoreReport {
    /// Fraction of rows whose plan replayed to the goal.
    pub fn success_rate(&self) -> Option<f64> {
        if self.planning.is_empty() {
            return None;
        }
        let solved = self.planning.iter().filter(|r| r.replay_ok).count();
        Some(solved as f64 / self.planning.len() as f64)
    }

    /// Unweighted per-instance means per stage (failed stages count as
    /// zero).
    pub fn stage_means(&self) -> BTreeMap<&'static str, StageScore> {
        let mut out = BTreeMap::new();
        for (key, pick) in stage_accessors() {
            let scores: Vec<StageScore> = self
                .grounding
                .iter()
                .filter_map(|row| pick(row))
                .collect();
            if scores.is_empty() {
                continue;
            }
            let n = scores.len() as f64;
            out.insert(
                key,
                StageScore {
                    precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
                    recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
                    f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
                },
            );
        }
        out
    }

    /// Domains in row order with per-domain stage means and success
    /// rates.
    pub fn domain_means(&self) -> BTreeMap<String, DomainSummary> {
        let mut out: BTreeMap<String, DomainSummary> = BTreeMap::new();
        for row in &self.grounding {
            let entry = out.entry(row.domain.clone()).or_default();
            entry.grounding_rows += 1;
            for (key, pick) in stage_accessors() {
                if let Some(score) = pick(row) {
                    let sums = entry.stage_sums.entry(key).or_insert((0.0, 0));
                    sums.0 += score.f1;
                    sums.1 += 1;
                }
            }
        }
        for row in &self.planning {
            let entry = out.entry(row.domain.clone()).or_default();
            entry.planning_rows += 1;
            if row.replay_ok {
                entry.solved += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct DomainSummary {
    pub grounding_rows: usize,
    pub planning_rows: usize,
    pub solved: usize,
    stage_sums: BTreeMap<&'static str, (f64, usize)>,
}

impl DomainSummary {
    pub fn mean_f1(&self, stage: &str) -> Option<f64> {
        self.stage_sums
            .get(stage)
            .map(|(sum, n)| sum / *n as f64)
    }

    pub fn success_rate(&self) -> Option<f64> {
        if self.planning_rows == 0 {
            None
        } else {
            Some(self.solved as f64 / self.planning_rows as f64)
        }
    }
}

fn stage_accessors() -> [(&'static str, fn(&GroundRow) -> Option<StageScore>); 3] {
    [
        ("objects", |r: &GroundRow| r.objects),
        ("predicates", |r: &GroundRow| r.predicates),
        ("goal", |r: &GroundRow| r.goal),
    ]
}

/// Which grounding stages to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageSelection {
    pub objects: bool,
    pub predicates: bool,
    pub goal: bool,
}

impl Default for StageSelection {
    fn default() -> Self {
        StageSelection {
            objects: true,
            predicates: true,
            goal: true,
        }
    }
}

/// Grounding source for evaluation rows.
pub enum GroundingBackend<'a> {
    Mock(MockGrounder),
    Live(&'a HttpGrounder<'a>),
}

fn load_observation(
    record: &InstanceRecord,
    base_dir: &Path,
) -> Result<Observation, GroundError> {
    match &record.observation {
        ObservationRef::Text { text } => Ok(Observation::text(text)),
        ObservationRef::Image { image_path } => {
            let path = base_dir.join(image_path);
            let bytes = std::fs::read(&path)
                .map_err(|e| GroundError::Transport(format!("{}: {e}", path.display())))?;
            let media_type = match path.extension().and_then(|e| e.to_str()) {
                Some("png") => "image/png",
                Some("jpg") | Some("jpeg") => "image/jpeg",
                Some("webp") => "image/webp",
                _ => "application/octet-stream",
            };
            Ok(Observation::Image {
                bytes,
                media_type: media_type.to_string(),
            })
        }
    }
}

impl GroundingBackend<'_> {
    fn ground_objects(
        &self,
        resolved: &ResolvedInstance,
        base_dir: &Path,
    ) -> Result<ObjectSet, GroundError> {
        match self {
            GroundingBackend::Mock(mock) => {
                mock.ground_objects(&resolved.record.id, &resolved.objects)
            }
            GroundingBackend::Live(grounder) => {
                let obs = load_observation(&resolved.record, base_dir)?;
                grounder.ground_objects(&obs, &resolved.vocab)
            }
        }
    }

    fn ground_state(
        &self,
        resolved: &ResolvedInstance,
        objects: &ObjectSet,
        base_dir: &Path,
    ) -> Result<SymbolicState, GroundError> {
        match self {
            GroundingBackend::Mock(mock) => mock.ground_state(
                &resolved.record.id,
                &resolved.state,
                &resolved.vocab,
                objects,
            ),
            GroundingBackend::Live(grounder) => {
                let obs = load_observation(&resolved.record, base_dir)?;
                grounder.ground_state(&obs, &resolved.vocab, objects)
            }
        }
    }

    fn ground_goal(
        &self,
        resolved: &ResolvedInstance,
        objects: &ObjectSet,
    ) -> Result<Goal, GroundError> {
        match self {
            GroundingBackend::Mock(mock) => mock.ground_goal(
                &resolved.record.id,
                &resolved.goal,
                &resolved.vocab,
                objects,
            ),
            GroundingBackend::Live(grounder) => {
                grounder.ground_goal(&resolved.record.goal_text, &resolved.vocab, objects)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("planning over {0:?} needs a bundled simulator domain")]
    NoSimulator(String),
}

fn object_elements(objects: &ObjectSet) -> BTreeSet<String> {
    objects
        .iter()
        .map(|(n, t)| format!("{n}:{t}"))
        .collect()
}

fn atom_elements(state: &SymbolicState) -> BTreeSet<String> {
    state.atoms().map(|a| a.to_string()).collect()
}

fn goal_elements(goal: &Goal) -> BTreeSet<String> {
    goal.literals().map(|l| l.to_string()).collect()
}

/// Objects first, then predicates conditioned on the predicted object
/// set, goals in a separate step. Per-row failures are recorded and
/// never abort the run; a failed stage scores zero.
pub fn evaluate_grounding(
    rows: &[InstanceRecord],
    backend: &GroundingBackend<'_>,
    stages: StageSelection,
    base_dir: &Path,
) -> Result<ScoreReport, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let resolved: Vec<ResolvedInstance> = rows
        .iter()
        .map(|r| resolve_record(r, base_dir))
        .collect::<Result<_, _>>()?;
    let mut grounding: Vec<GroundRow> = resolved
        .par_iter()
        .map(|inst| ground_one(inst, backend, stages, base_dir))
        .collect();
    grounding.sort_by(|a, b| a.id.cmp(&b.id));
    let mut taxonomy: BTreeMap<&'static str, usize> = BTreeMap::new();
    for row in &grounding {
        if let Some(kind) = row.failure {
            *taxonomy.entry(kind.as_str()).or_insert(0) += 1;
        }
    }
    Ok(ScoreReport {
        grounding,
        planning: Vec::new(),
        taxonomy,
    })
}

fn ground_one(
    inst: &ResolvedInstance,
    backend: &GroundingBackend<'_>,
    stages: StageSelection,
    base_dir: &Path,
) -> GroundRow {
    let mut row = GroundRow {
        id: inst.record.id.clone(),
        domain: inst.record.domain.clone(),
        objects: None,
        predicates: None,
        goal: None,
        name_mismatches: 0,
        failure: None,
    };
    let truth_objects = object_elements(&inst.objects);
    let predicted_objects = match backend.ground_objects(inst, base_dir) {
        Ok(objs) => objs,
        Err(e) => {
            row.failure = Some(FailureKind::from_ground_error(&e));
            if stages.objects {
                row.objects = Some(StageScore::zero());
            }
            if stages.predicates {
                row.predicates = Some(StageScore::zero());
            }
            if stages.goal {
                row.goal = Some(StageScore::zero());
            }
            return row;
        }
    };
    if stages.objects {
        row.objects = Some(StageScore::from_tuple(set_f1(
            &object_elements(&predicted_objects),
            &truth_objects,
        )));
    }
    row.name_mismatches = predicted_objects
        .names()
        .filter(|n| !inst.objects.contains(n))
        .count();
    if stages.predicates {
        match backend.ground_state(inst, &predicted_objects, base_dir) {
            Ok(state) => {
                row.predicates = Some(StageScore::from_tuple(set_f1(
                    &atom_elements(&state),
                    &atom_elements(&inst.state),
                )));
            }
            Err(e) => {
                row.failure = Some(FailureKind::from_ground_error(&e));
                row.predicates = Some(StageScore::zero());
            }
        }
    }
    if stages.goal {
        match backend.ground_goal(inst, &predicted_objects) {
            Ok(goal) => {
                row.goal = Some(StageScore::from_tuple(set_f1(
                    &goal_elements(&goal),
                    &goal_elements(&inst.goal),
                )));
            }
            Err(e) => {
                row.failure = Some(FailureKind::from_ground_error(&e));
                row.goal = Some(StageScore::zero());
            }
        }
    }
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanningMode {
    ModelFree,
    WithModel,
    DirectVlm,
}

impl PlanningMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "model-free" => Some(PlanningMode::ModelFree),
            "with-model" => Some(PlanningMode::WithModel),
            "direct-vlm" => Some(PlanningMode::DirectVlm),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlanningMode::ModelFree => "model-free",
            PlanningMode::WithModel => "with-model",
            PlanningMode::DirectVlm => "direct-vlm",
        }
    }
}

/// Supplies the proposed plan for the direct-VLM protocol (live call or
/// scripted mock).
pub type DirectPlanSupplier<'a> =
    &'a (dyn Fn(&ResolvedInstance) -> Result<Vec<ActionLabel>, GroundError> + Sync);

pub struct PlanningOptions<'a> {
    pub budget: SearchBudget,
    pub tiebreak: Tiebreak,
    pub direct: Option<DirectPlanSupplier<'a>>,
}

/// Grounds each row, plans under the chosen protocol, and counts
/// success only when the plan replays from the ground-truth initial
/// state to the ground-truth goal.
pub fn evaluate_planning(
    rows: &[InstanceRecord],
    mode: PlanningMode,
    backend: &GroundingBackend<'_>,
    options: &PlanningOptions<'_>,
    base_dir: &Path,
) -> Result<ScoreReport, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let resolved: Vec<ResolvedInstance> = rows
        .iter()
        .map(|r| resolve_record(r, base_dir))
        .collect::<Result<_, _>>()?;
    for inst in &resolved {
        if inst.simulator.is_none() {
            return Err(EvalError::NoSimulator(inst.record.domain.clone()));
        }
    }
    let mut planning: Vec<PlanRow> = resolved
        .par_iter()
        .map(|inst| plan_one(inst, mode, backend, options, base_dir))
        .collect();
    planning.sort_by(|a, b| a.id.cmp(&b.id));
    let mut taxonomy: BTreeMap<&'static str, usize> = BTreeMap::new();
    for row in &planning {
        if let Some(kind) = row.failure {
            *taxonomy.entry(kind.as_str()).or_insert(0) += 1;
        }
    }
    Ok(ScoreReport {
        grounding: Vec::new(),
        planning,
        taxonomy,
    })
}

fn plan_one(
    inst: &ResolvedInstance,
    mode: PlanningMode,
    backend: &GroundingBackend<'_>,
    options: &PlanningOptions<'_>,
    base_dir: &Path,
) -> PlanRow {
    let sim = inst.simulator.as_ref().expect("checked by caller");
    let mut row = PlanRow {
        id: inst.record.id.clone(),
        domain: inst.record.domain.clone(),
        outcome: None,
        plan_length: 0,
        expansions: 0,
        generated: 0,
        duplicates: 0,
        replay_ok: false,
        failure: None,
    };

    let fail = |row: &mut PlanRow, kind: FailureKind| {
        row.failure = Some(kind);
    };

    // Direct planning skips grounding entirely.
    if mode == PlanningMode::DirectVlm {
        let supplier = options
            .direct
            .expect("direct-vlm evaluation needs a plan supplier");
        match supplier(inst) {
            Ok(labels) => {
                let report = crate::vlm::validate_direct_plan(sim, labels);
                row.outcome = Some(report.result.outcome);
                row.plan_length = report.result.plan.len();
                if report.result.outcome == Outcome::Solved {
                    row.replay_ok = true;
                } else {
                    fail(&mut row, FailureKind::ReplayFailure);
                }
            }
            Err(e) => fail(&mut row, FailureKind::from_ground_error(&e)),
        }
        return row;
    }

    let predicted_objects = match backend.ground_objects(inst, base_dir) {
        Ok(objs) => objs,
        Err(e) => {
            fail(&mut row, FailureKind::from_ground_error(&e));
            return row;
        }
    };
    let state = match backend.ground_state(inst, &predicted_objects, base_dir) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut row, FailureKind::from_ground_error(&e));
            return row;
        }
    };
    let goal = match backend.ground_goal(inst, &predicted_objects) {
        Ok(g) => g,
        Err(e) => {
            fail(&mut row, FailureKind::from_ground_error(&e));
            return row;
        }
    };

    let result = match mode {
        PlanningMode::ModelFree => {
            match planner::plan(
                &state,
                &goal,
                |s| sim.successors(s),
                &options.budget,
                options.tiebreak,
            ) {
                Ok(r) => r,
                Err(_) => {
                    // The grounded state broke the simulator's rules.
                    fail(&mut row, FailureKind::Unsolved);
                    return row;
                }
            }
        }
        PlanningMode::WithModel => {
            match plan_with_model_protocol(inst, &predicted_objects, &state, &goal, options) {
                Ok(r) => r,
                Err(_) => {
                    fail(&mut row, FailureKind::Unsolved);
                    return row;
                }
            }
        }
        PlanningMode::DirectVlm => unreachable!("handled above"),
    };
    row.outcome = Some(result.outcome);
    row.plan_length = result.plan.len();
    row.expansions = result.stats.expansions;
    row.generated = result.stats.generated;
    row.duplicates = result.stats.duplicates;
    if result.outcome != Outcome::Solved {
        fail(&mut row, FailureKind::Unsolved);
        return row;
    }
    // Validity is judged on the true world: replay from the GT initial
    // state against the GT goal.
    match sim.replay(&sim.initial, &result.plan) {
        Ok(end) if sim.goal_reached(&end) => row.replay_ok = true,
        _ => fail(&mut row, FailureKind::ReplayFailure),
    }
    row
}

/// Emit a problem from the grounded state and goal, pair it with the
/// fixture domain, and solve with A* over the parsed model.
fn plan_with_model_protocol(
    inst: &ResolvedInstance,
    objects: &ObjectSet,
    state: &SymbolicState,
    goal: &Goal,
    options: &PlanningOptions<'_>,
) -> Result<planner::PlanResult, PddlError> {
    let sim = inst.simulator.as_ref().expect("checked by caller");
    let domain = pddl::parse_domain(bundled_domain_pddl(sim.domain))?;
    // The grounded state may mention objects dropped from the predicted
    // set; the problem file must declare every mentioned object.
    let mentioned = ObjectSet::infer_from_atoms(
        &inst.vocab,
        state
            .atoms()
            .chain(goal.literals().map(|l| l.atom())),
    )
    .map_err(|e| PddlError::Validation {
        message: e.to_string(),
    })?;
    let declared = objects.union(&mentioned).map_err(|e| PddlError::Validation {
        message: e.to_string(),
    })?;
    let text = pddl::emit_problem(&inst.record.id, domain.name(), &declared, state, goal)?;
    let problem = pddl::parse_problem(&text)?;
    pddl::plan_with_model(&domain, &problem, &options.budget)
}

/// One sweep point per epsilon: mean per-stage scores with `spurious`
/// and the seed held fixed.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub means: BTreeMap<&'static str, StageScore>,
    pub failures: usize,
}

pub fn sweep_grounding(
    rows: &[InstanceRecord],
    epsilons: &[f64],
    spurious: usize,
    seed: u64,
    base_dir: &Path,
) -> Result<Vec<SweepPoint>, EvalError> {
    let mut points = Vec::new();
    for &epsilon in epsilons {
        let backend = GroundingBackend::Mock(MockGrounder::new(crate::grounder::MockNoise {
            epsilon,
            spurious,
            seed,
        }));
        let report =
            evaluate_grounding(rows, &backend, StageSelection::default(), base_dir)?;
        points.push(SweepPoint {
            epsilon,
            means: report.stage_means(),
            failures: report.taxonomy.values().sum(),
        });
    }
    Ok(points)
}

// ── Report rendering ──────────────────────────────────────────────────

fn fmt_opt_score(score: Option<StageScore>) -> String {
    match score {
        Some(s) => format!("{:.6},{:.6},{:.6}", s.precision, s.recall, s.f1),
        None => ",,".to_string(),
    }
}

/// Per-instance grounding scores, one CSV row per instance.
pub fn grounding_csv(report: &ScoreReport) -> String {
    let mut out = String::from(
        "id,domain,objects_precision,objects_recall,objects_f1,\
         predicates_precision,predicates_recall,predicates_f1,\
         goal_precision,goal_recall,goal_f1,name_mismatches,failure\n",
    );
    for row in &report.grounding {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.id,
            row.domain,
            fmt_opt_score(row.objects),
            fmt_opt_score(row.predicates),
            fmt_opt_score(row.goal),
            row.name_mismatches,
            row.failure.map(|f| f.as_str()).unwrap_or(""),
        ));
    }
    out
}

/// Per-instance planning rows.
pub fn planning_csv(report: &ScoreReport) -> String {
    let mut out = String::from(
        "id,domain,outcome,plan_length,expansions,generated,duplicates,replay_ok,failure\n",
    );
    for row in &report.planning {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.id,
            row.domain,
            row.outcome.map(|o| o.as_str()).unwrap_or(""),
            row.plan_length,
            row.expansions,
            row.generated,
            row.duplicates,
            row.replay_ok,
            row.failure.map(|f| f.as_str()).unwrap_or(""),
        ));
    }
    out
}

/// One CSV row per sweep epsilon with per-stage means.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(
        "epsilon,objects_precision,objects_recall,objects_f1,\
         predicates_precision,predicates_recall,predicates_f1,\
         goal_precision,goal_recall,goal_f1,failures\n",
    );
    for point in points {
        out.push_str(&format!("{:.3}", point.epsilon));
        for key in ["objects", "predicates", "goal"] {
            out.push(',');
            out.push_str(&fmt_opt_score(point.means.get(key).copied()));
        }
        out.push_str(&format!(",{}\n", point.failures));
    }
    out
}

/// Markdown summary: per-domain means in the shape of the evaluation
/// tables, plus the failure taxonomy.
pub fn markdown_summary(report: &ScoreReport, title: &str) -> String {
    let mut out = format!("# {title}\n\n");
    let domains = report.domain_means();
    if !report.grounding.is_empty() {
        out.push_str("| domain | instances | objects F1 | predicates F1 | goal F1 |\n");
        out.push_str("|---|---|---|---|---|\n");
        for (domain, summary) in &domains {
            if summary.grounding_rows == 0 {
                continue;
            }
            let cell = |stage: &str| {
                summary
                    .mean_f1(stage)
                    .map(|v| format!("{v:.3}"))
                    .unwrap_or_else(|| "-".to_string())
            };
            out.push_str(&format!(
                "| {domain} | {} | {} | {} | {} |\n",
                summary.grounding_rows,
                cell("objects"),
                cell("predicates"),
                cell("goal"),
            ));
        }
        let means = report.stage_means();
        let cell = |stage: &str| {
            means
                .get(stage)
                .map(|s| format!("{:.3}", s.f1))
                .unwrap_or_else(|| "-".to_string())
        };
        out.push_str(&format!(
            "| all | {} | {} | {} | {} |\n\n",
            report.grounding.len(),
            cell("objects"),
            cell("predicates"),
            cell("goal"),
        ));
    }
    if !report.planning.is_empty() {
        out.push_str("| domain | instances | success rate |\n|---|---|---|\n");
        for (domain, summary) in &domains {
            if summary.planning_rows == 0 {
                continue;
            }
            out.push_str(&format!(
                "| {domain} | {} | {:.3} |\n",
                summary.planning_rows,
                summary.success_rate().unwrap_or(0.0),
            ));
        }
        out.push_str(&format!(
            "| all | {} | {:.3} |\n\n",
            report.planning.len(),
            report.success_rate().unwrap_or(0.0),
        ));
    }
    out.push_str("## Failures\n\n");
    if report.taxonomy.is_empty() {
        out.push_str("none\n");
    } else {
        out.push_str("| kind | count |\n|---|---|\n");
        for (kind, count) in &report.taxonomy {
            out.push_str(&format!("| {kind} | {count} |\n"));
        }
    }
    out
}
