//! Symbolic environments exposed to the planner only as black-box
//! successor generators: given a state, enumerate the legal
//! `(label, successor)` pairs. No action schema is exported; labels are
//! opaque to the planner and exist for plan output and replay.

mod blocksworld;
mod hanoi;

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::vocab::{
    goal_satisfied, Goal, LiftedVocabulary, NameError, ObjectSet, SymbolicState,
};

/// A named action instance, rendered `name(a,b)`. Opaque to the planner.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionLabel {
    name: String,
    args: Vec<String>,
}

impl ActionLabel {
    pub fn new(name: &str, args: &[&str]) -> Result<Self, NameError> {
        Ok(ActionLabel {
            name: crate::vocab::normalize_name(name)?,
            args: args
                .iter()
                .map(|a| crate::vocab::normalize_name(a))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    /// Parses the rendered form `name(a,b)`; a bare `name` has no
    /// arguments.
    pub fn parse(text: &str) -> Result<Self, NameError> {
        let (name, args) = crate::vocab::split_call(text)?;
        ActionLabel::new(name, &args)
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a)?;
        }
        f.write_str(")")
    }
}

/// Simulator failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    /// The queried state violates the domain's structural rules; the
    /// reason names the first violation found.
    InconsistentState { reason: String },
    UnsupportedSize {
        domain: DomainId,
        size: usize,
        min: usize,
        max: usize,
    },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InconsistentState { reason } => write!(f, "inconsistent state: {reason}"),
            SimError::UnsupportedSize {
                domain,
                size,
                min,
                max,
            } => write!(f, "{domain} size {size} outside supported range {min}..={max}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SimError {}

/// Replay failure: the label at `step` matched no legal move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayError {
    InapplicableAction { step: usize, label: ActionLabel },
    Sim(SimError),
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayError::InapplicableAction { step, label } => {
                write!(f, "action {label} at step {step} is not applicable")
            }
            ReplayError::Sim(e) => e.fmt(f),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ReplayError {}

impl From<SimError> for ReplayError {
    fn from(e: SimError) -> Self {
        ReplayError::Sim(e)
    }
}

/// Bundled domain identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomainId {
    Blocksworld,
    Hanoi,
    HanoiColor,
}

impl DomainId {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainId::Blocksworld => "blocksworld",
            DomainId::Hanoi => "hanoi",
            DomainId::HanoiColor => "hanoi-color",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "blocksworld" => Some(DomainId::Blocksworld),
            "hanoi" => Some(DomainId::Hanoi),
            "hanoi-color" => Some(DomainId::HanoiColor),
            _ => None,
        }
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
enum DomainData {
    Blocksworld { blocks: Vec<String> },
    /// `disks` ordered smallest to largest.
    Hanoi { disks: Vec<String>, pegs: Vec<String> },
}

/// One problem instance: vocabulary, objects, initial state, goal, and
/// ground-truth annotations for evaluation.
#[derive(Debug, Clone)]
pub struct SimInstance {
    pub id: String,
    pub domain: DomainId,
    pub vocab: LiftedVocabulary,
    pub objects: ObjectSet,
    pub initial: SymbolicState,
    pub goal: Goal,
    /// Natural-language goal phrasing, for goal grounding.
    pub goal_text: String,
    /// Deterministic text rendering of the initial scene, for text
    /// observations.
    pub observation_text: String,
    data: DomainData,
}

impl SimInstance {
    /// Exactly the legal moves from `state`, sorted by label rendering,
    /// each successor consistent, no duplicates.
    pub fn successors(
        &self,
        state: &SymbolicState,
    ) -> Result<Vec<(ActionLabel, SymbolicState)>, SimError> {
        match &self.data {
            DomainData::Blocksworld { blocks } => blocksworld::successors(blocks, state),
            DomainData::Hanoi { disks, pegs } => hanoi::successors(disks, pegs, state),
        }
    }

    /// Applies each label by matching it against `successors` output,
    /// failing at the first label with no match.
    pub fn replay(
        &self,
        initial: &SymbolicState,
        plan: &[ActionLabel],
    ) -> Result<SymbolicState, ReplayError> {
        let mut current = initial.clone();
        for (step, label) in plan.iter().enumerate() {
            let succs = self.successors(&current)?;
            match succs.into_iter().find(|(l, _)| l == label) {
                Some((_, next)) => current = next,
                None => {
                    return Err(ReplayError::InapplicableAction {
                        step,
                        label: label.clone(),
                    })
                }
            }
        }
        Ok(current)
    }

    pub fn goal_reached(&self, state: &SymbolicState) -> bool {
        goal_satisfied(state, &self.goal)
    }
}

/// The lifted vocabulary of a bundled domain.
pub fn vocabulary(domain: DomainId) -> LiftedVocabulary {
    match domain {
        DomainId::Blocksworld => blocksworld::vocabulary(),
        DomainId::Hanoi | DomainId::HanoiColor => hanoi::vocabulary(),
    }
}

impl SimInstance {
    /// Rebuilds a simulator instance from externally supplied parts
    /// (dataset rows). Blocksworld takes every object as a block; the
    /// Hanoi variants recover pegs and the disk size order from the
    /// static `smaller-than` atoms of the initial state: pegs are never
    /// smaller than anything, and smaller disks are smaller than more
    /// things.
    pub fn reconstruct(
        domain: DomainId,
        id: String,
        objects: ObjectSet,
        initial: SymbolicState,
        goal: Goal,
        goal_text: String,
        observation_text: String,
    ) -> Result<Self, SimError> {
        let vocab = vocabulary(domain);
        let data = match domain {
            DomainId::Blocksworld => DomainData::Blocksworld {
                blocks: objects.names().map(|s| s.to_owned()).collect(),
            },
            DomainId::Hanoi | DomainId::HanoiColor => {
                let mut degree: alloc::collections::BTreeMap<&str, usize> =
                    objects.names().map(|n| (n, 0)).collect();
                for atom in initial.atoms() {
                    if atom.predicate() == "smaller-than" {
                        if let Some(d) = degree.get_mut(atom.args()[0].as_str()) {
                            *d += 1;
                        }
                    }
                }
                let pegs: Vec<String> = objects
                    .names()
                    .filter(|n| degree.get(n) == Some(&0))
                    .map(|s| s.to_owned())
                    .collect();
                let mut disks: Vec<String> = objects
                    .names()
                    .filter(|n| degree.get(n).copied().unwrap_or(0) > 0)
                    .map(|s| s.to_owned())
                    .collect();
                // Smallest disks are smaller than the most items.
                disks.sort_by_key(|d| core::cmp::Reverse(degree.get(d.as_str()).copied()));
                if pegs.is_empty() || disks.is_empty() {
                    return Err(SimError::InconsistentState {
                        reason: "cannot recover disks and pegs from smaller-than facts".into(),
                    });
                }
                DomainData::Hanoi { disks, pegs }
            }
        };
        let instance = SimInstance {
            id,
            domain,
            vocab,
            objects,
            initial,
            goal,
            goal_text,
            observation_text,
            data,
        };
        // The initial state must be structurally valid for the domain.
        instance.successors(&instance.initial)?;
        Ok(instance)
    }
}

/// Size and layout parameters for [`make_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceParams {
    pub size: usize,
    /// `None` builds the canonical layout for the domain; `Some(depth)`
    /// generates a random goal configuration and scrambles it backwards
    /// by `depth` legal moves to produce the initial state, so the goal
    /// is satisfiable by construction.
    pub scramble_depth: Option<usize>,
}

impl InstanceParams {
    pub fn canonical(size: usize) -> Self {
        InstanceParams {
            size,
            scramble_depth: None,
        }
    }

    pub fn scrambled(size: usize, depth: usize) -> Self {
        InstanceParams {
            size,
            scramble_depth: Some(depth),
        }
    }
}

/// Builds a reproducible instance. Blocksworld supports 2–10 blocks;
/// Hanoi variants support 2–8 disks over 3 pegs.
pub fn make_instance(
    domain: DomainId,
    params: &InstanceParams,
    seed: u64,
) -> Result<SimInstance, SimError> {
    let (min, max) = match domain {
        DomainId::Blocksworld => (2, 10),
        DomainId::Hanoi | DomainId::HanoiColor => (2, 8),
    };
    if params.size < min || params.size > max {
        return Err(SimError::UnsupportedSize {
            domain,
            size: params.size,
            min,
            max,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match domain {
        DomainId::Blocksworld => blocksworld::make_instance(params, seed, &mut rng),
        DomainId::Hanoi => hanoi::make_instance(false, params, seed, &mut rng),
        DomainId::HanoiColor => hanoi::make_instance(true, params, seed, &mut rng),
    }
}

/// Walks `depth` uniformly random legal moves from `start`. Used to
/// scramble a goal state into an initial state; every bundled domain's
/// moves are reversible, so the start stays reachable.
fn scramble(
    instance_like: &dyn Fn(&SymbolicState) -> Result<Vec<(ActionLabel, SymbolicState)>, SimError>,
    start: &SymbolicState,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SymbolicState, SimError> {
    let mut current = start.clone();
    for _ in 0..depth {
        let succs = instance_like(&current)?;
        if succs.is_empty() {
            break;
        }
        let pick = rng.gen_range(0..succs.len());
        current = succs.into_iter().nth(pick).expect("index in range").1;
    }
    Ok(current)
}

pub(crate) fn instance_id(domain: DomainId, params: &InstanceParams, seed: u64) -> String {
    match params.scramble_depth {
        None => format!("{}-n{}-canonical", domain, params.size),
        Some(depth) => format!("{}-n{}-s{}-d{}", domain, params.size, seed, depth),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_label_round_trip() {
        let label = ActionLabel::new("move", &["d1", "peg1", "peg3"]).unwrap();
        assert_eq!(label.to_string(), "move(d1,peg1,peg3)");
        assert_eq!(ActionLabel::parse("move(d1,peg1,peg3)").unwrap(), label);
    }

    #[test]
    fn unsupported_sizes_rejected() {
        for (domain, size) in [
            (DomainId::Blocksworld, 1),
            (DomainId::Blocksworld, 11),
            (DomainId::Hanoi, 1),
            (DomainId::Hanoi, 9),
            (DomainId::HanoiColor, 0),
        ] {
            let err = make_instance(domain, &InstanceParams::canonical(size), 0).unwrap_err();
            assert!(matches!(err, SimError::UnsupportedSize { .. }));
        }
    }

    #[test]
    fn seeded_instances_are_identical() {
        let a = make_instance(DomainId::Blocksworld, &InstanceParams::scrambled(4, 12), 7)
            .unwrap();
        let b = make_instance(DomainId::Blocksworld, &InstanceParams::scrambled(4, 12), 7)
            .unwrap();
        assert_eq!(a.initial, b.initial);
        assert_eq!(a.goal, b.goal);
        assert_eq!(a.id, b.id);
    }

    #[test]
    fn scramble_depth_zero_initial_satisfies_goal() {
        for domain in [DomainId::Blocksworld, DomainId::Hanoi, DomainId::HanoiColor] {
            let inst = make_instance(domain, &InstanceParams::scrambled(3, 0), 3).unwrap();
            assert!(inst.goal_reached(&inst.initial), "{domain}");
        }
    }

    #[test]
    fn replay_empty_plan_returns_initial() {
        let inst = make_instance(DomainId::Hanoi, &InstanceParams::canonical(3), 0).unwrap();
        let end = inst.replay(&inst.initial, &[]).unwrap();
        assert_eq!(end, inst.initial);
    }

    #[test]
    fn replay_reports_first_illegal_step() {
        let inst = make_instance(DomainId::Hanoi, &InstanceParams::canonical(3), 0).unwrap();
        let succs = inst.successors(&inst.initial).unwrap();
        let legal = succs[0].0.clone();
        let illegal = ActionLabel::new("move", &["d3", "peg1", "peg2"]).unwrap();
        let err = inst
            .replay(&inst.initial, &[legal, illegal])
            .unwrap_err();
        assert!(matches!(err, ReplayError::InapplicableAction { step: 1, .. }));
    }
}
