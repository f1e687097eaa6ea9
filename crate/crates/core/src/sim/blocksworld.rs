//! Blocksworld with the classical four-operator formulation:
//! `pick-up`, `put-down`, `stack`, `unstack` over predicates
//! `on(x,y)`, `on-table(x)`, `clear(x)`, `holding(x)`, `hand-empty`.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::vocab::{
    Goal, GroundAtom, LiftedVocabulary, Literal, ObjectInstance, ObjectSet,
    PredicateSignature, SymbolicState, TypeName,
};

use super::{
    instance_id, scramble, ActionLabel, DomainData, DomainId, InstanceParams, SimError,
    SimInstance,
};

pub(super) fn vocabulary() -> LiftedVocabulary {
    let block = TypeName::new("block").expect("valid type name");
    LiftedVocabulary::new(
        [block.clone()],
        [
            PredicateSignature::new("on", alloc::vec![block.clone(), block.clone()], false)
                .expect("valid signature"),
            PredicateSignature::new("on-table", alloc::vec![block.clone()], false)
                .expect("valid signature"),
            PredicateSignature::new("clear", alloc::vec![block.clone()], false)
                .expect("valid signature"),
            PredicateSignature::new("holding", alloc::vec![block.clone()], false)
                .expect("valid signature"),
            PredicateSignature::new("hand-empty", alloc::vec![], false).expect("valid signature"),
        ],
    )
    .expect("valid vocabulary")
}

fn atom(pred: &str, args: &[&str]) -> GroundAtom {
    GroundAtom::new(pred, args).expect("valid atom")
}

fn inconsistent(reason: impl core::fmt::Display) -> SimError {
    SimError::InconsistentState {
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Support {
    Table,
    On(String),
}

struct View {
    support: BTreeMap<String, Support>,
    held: Option<String>,
    clear: BTreeSet<String>,
}

/// Parses and validates a state: every block has exactly one support or
/// is held, at most one block is held, `hand-empty` agrees with the
/// hand, `clear` is exactly the set of unburied unheld blocks, and
/// towers are acyclic.
fn parse_state(blocks: &[String], state: &SymbolicState) -> Result<View, SimError> {
    let known: BTreeSet<&str> = blocks.iter().map(|b| b.as_str()).collect();
    let mut support: BTreeMap<String, Support> = BTreeMap::new();
    let mut held: Option<String> = None;
    let mut clear: BTreeSet<String> = BTreeSet::new();
    let mut hand_empty_atom = false;

    let check_block = |name: &str| -> Result<(), SimError> {
        if known.contains(name) {
            Ok(())
        } else {
            Err(inconsistent(format!("unknown block {name}")))
        }
    };

    for a in state.atoms() {
        let args = a.args();
        match a.predicate() {
            "on" => {
                check_block(&args[0])?;
                check_block(&args[1])?;
                if args[0] == args[1] {
                    return Err(inconsistent(format!("{} is on itself", args[0])));
                }
                if support
                    .insert(args[0].clone(), Support::On(args[1].clone()))
                    .is_some()
                {
                    return Err(inconsistent(format!("{} has two supports", args[0])));
                }
            }
            "on-table" => {
                check_block(&args[0])?;
                if support.insert(args[0].clone(), Support::Table).is_some() {
                    return Err(inconsistent(format!("{} has two supports", args[0])));
                }
            }
            "clear" => {
                check_block(&args[0])?;
                clear.insert(args[0].clone());
            }
            "holding" => {
                check_block(&args[0])?;
                if held.replace(args[0].clone()).is_some() {
                    return Err(inconsistent("two blocks held at once"));
                }
            }
            "hand-empty" => hand_empty_atom = true,
            other => return Err(inconsistent(format!("unknown predicate {other}"))),
        }
    }

    if hand_empty_atom == held.is_some() {
        return Err(inconsistent("hand-empty disagrees with holding"));
    }
    for b in blocks {
        let supported = support.contains_key(b);
        let is_held = held.as_deref() == Some(b.as_str());
        if supported == is_held {
            return Err(inconsistent(format!(
                "{b} must be held or have exactly one support"
            )));
        }
    }
    // Towers must bottom out at the table.
    for b in blocks {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut cur = b.as_str();
        loop {
            if !seen.insert(cur) {
                return Err(inconsistent(format!("cyclic tower through {b}")));
            }
            match support.get(cur) {
                Some(Support::On(below)) => cur = below,
                Some(Support::Table) | None => break,
            }
        }
    }
    let buried: BTreeSet<&str> = support
        .values()
        .filter_map(|s| match s {
            Support::On(below) => Some(below.as_str()),
            Support::Table => None,
        })
        .collect();
    let expected_clear: BTreeSet<String> = blocks
        .iter()
        .filter(|b| !buried.contains(b.as_str()) && held.as_deref() != Some(b.as_str()))
        .cloned()
        .collect();
    if clear != expected_clear {
        return Err(inconsistent("clear set disagrees with tower structure"));
    }
    Ok(View {
        support,
        held,
        clear,
    })
}

fn apply_edit(
    state: &SymbolicState,
    remove: &[GroundAtom],
    add: &[GroundAtom],
) -> SymbolicState {
    let mut atoms = state.atom_set().clone();
    for r in remove {
        atoms.remove(r);
    }
    for a in add {
        atoms.insert(a.clone());
    }
    SymbolicState::from_atoms_unchecked(atoms)
}

pub(super) fn successors(
    blocks: &[String],
    state: &SymbolicState,
) -> Result<Vec<(ActionLabel, SymbolicState)>, SimError> {
    let view = parse_state(blocks, state)?;
    let mut out: Vec<(ActionLabel, SymbolicState)> = Vec::new();
    match &view.held {
        Some(h) => {
            out.push((
                ActionLabel::new("put-down", &[h]).expect("valid label"),
                apply_edit(
                    state,
                    &[atom("holding", &[h])],
                    &[
                        atom("on-table", &[h]),
                        atom("clear", &[h]),
                        atom("hand-empty", &[]),
                    ],
                ),
            ));
            for y in &view.clear {
                out.push((
                    ActionLabel::new("stack", &[h, y]).expect("valid label"),
                    apply_edit(
                        state,
                        &[atom("holding", &[h]), atom("clear", &[y])],
                        &[
                            atom("on", &[h, y]),
                            atom("clear", &[h]),
                            atom("hand-empty", &[]),
                        ],
                    ),
                ));
            }
        }
        None => {
            for c in &view.clear {
                match view.support.get(c).expect("clear block has a support") {
                    Support::Table => out.push((
                        ActionLabel::new("pick-up", &[c]).expect("valid label"),
                        apply_edit(
                            state,
                            &[
                                atom("on-table", &[c]),
                                atom("clear", &[c]),
                                atom("hand-empty", &[]),
                            ],
                            &[atom("holding", &[c])],
                        ),
                    )),
                    Support::On(y) => out.push((
                        ActionLabel::new("unstack", &[c, y]).expect("valid label"),
                        apply_edit(
                            state,
                            &[
                                atom("on", &[c, y]),
                                atom("clear", &[c]),
                                atom("hand-empty", &[]),
                            ],
                            &[atom("holding", &[c]), atom("clear", &[y])],
                        ),
                    )),
                }
            }
        }
    }
    out.sort_by(|(a, _), (b, _)| a.to_string().cmp(&b.to_string()));
    Ok(out)
}

/// State atoms for a full tower configuration: `layout[b]` is the
/// support of block `b`, the hand is empty.
fn state_from_layout(blocks: &[String], layout: &BTreeMap<String, Support>) -> SymbolicState {
    let mut atoms: BTreeSet<GroundAtom> = BTreeSet::new();
    let buried: BTreeSet<&str> = layout
        .values()
        .filter_map(|s| match s {
            Support::On(b) => Some(b.as_str()),
            Support::Table => None,
        })
        .collect();
    for b in blocks {
        match layout.get(b).expect("every block placed") {
            Support::Table => {
                atoms.insert(atom("on-table", &[b]));
            }
            Support::On(y) => {
                atoms.insert(atom("on", &[b, y]));
            }
        }
        if !buried.contains(b.as_str()) {
            atoms.insert(atom("clear", &[b]));
        }
    }
    atoms.insert(atom("hand-empty", &[]));
    SymbolicState::from_atoms_unchecked(atoms)
}

/// Uniform random tower configuration: blocks are shuffled, then each
/// is placed on the table or on one of the current tower tops.
fn random_layout(blocks: &[String], rng: &mut ChaCha8Rng) -> BTreeMap<String, Support> {
    let mut order: Vec<String> = blocks.to_owned();
    order.shuffle(rng);
    let mut layout: BTreeMap<String, Support> = BTreeMap::new();
    let mut tops: Vec<String> = Vec::new();
    for b in order {
        let choice = rng.gen_range(0..=tops.len());
        if choice == tops.len() {
            layout.insert(b.clone(), Support::Table);
        } else {
            let below = tops[choice].clone();
            layout.insert(b.clone(), Support::On(below));
            tops.remove(choice);
        }
        tops.push(b);
    }
    layout
}

fn goal_from_state(
    vocab: &LiftedVocabulary,
    objects: &ObjectSet,
    goal_state: &SymbolicState,
) -> (Goal, String) {
    let mut literals: Vec<Literal> = Vec::new();
    let mut phrases: Vec<String> = Vec::new();
    for a in goal_state.atoms() {
        match a.predicate() {
            "on" => {
                literals.push(Literal::positive(a.clone()));
                phrases.push(format!("{} on {}", a.args()[0], a.args()[1]));
            }
            "on-table" => {
                literals.push(Literal::positive(a.clone()));
                phrases.push(format!("{} on the table", a.args()[0]));
            }
            _ => {}
        }
    }
    let goal = Goal::new(vocab, objects, literals).expect("goal atoms come from a valid state");
    (goal, phrases.join(", "))
}

fn observation_text(blocks: &[String], state: &SymbolicState) -> String {
    let mut sentences: Vec<String> = Vec::new();
    for b in blocks {
        if state.contains(&atom("on-table", &[b])) {
            sentences.push(format!("block {b} is on the table."));
        }
        for other in blocks {
            if state.contains(&atom("on", &[b, other])) {
                sentences.push(format!("block {b} is on block {other}."));
            }
        }
        if state.contains(&atom("holding", &[b])) {
            sentences.push(format!("the hand is holding block {b}."));
        }
    }
    if state.contains(&atom("hand-empty", &[])) {
        sentences.push("the hand is empty.".to_owned());
    }
    sentences.join(" ")
}

pub(super) fn make_instance(
    params: &InstanceParams,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<SimInstance, SimError> {
    let n = params.size;
    let blocks: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    let vocab = vocabulary();
    let block_ty = TypeName::new("block").expect("valid type name");
    let objects = ObjectSet::new(
        &vocab,
        blocks
            .iter()
            .map(|b| ObjectInstance::new(b, block_ty.clone()).expect("valid object")),
    )
    .expect("valid object set");

    let goal_layout: BTreeMap<String, Support> = match params.scramble_depth {
        // Canonical goal: the single tower b1 on b2 on ... on bn.
        None => blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let support = if i + 1 < blocks.len() {
                    Support::On(blocks[i + 1].clone())
                } else {
                    Support::Table
                };
                (b.clone(), support)
            })
            .collect(),
        Some(_) => random_layout(&blocks, rng),
    };
    let goal_state = state_from_layout(&blocks, &goal_layout);

    let initial = match params.scramble_depth {
        None => {
            // Canonical initial: everything on the table.
            let layout = blocks
                .iter()
                .map(|b| (b.clone(), Support::Table))
                .collect();
            state_from_layout(&blocks, &layout)
        }
        Some(depth) => {
            let succ =
                |s: &SymbolicState| successors(&blocks, s);
            let mut scrambled = scramble(&succ, &goal_state, depth, rng)?;
            // Finish any in-flight move so the initial scene is at rest.
            if !scrambled.contains(&atom("hand-empty", &[])) {
                let succs = successors(&blocks, &scrambled)?;
                let (_, next) = succs
                    .into_iter()
                    .find(|(l, _)| l.name() == "put-down")
                    .expect("a held block can always be put down");
                scrambled = next;
            }
            scrambled
        }
    };

    let (goal, goal_text) = goal_from_state(&vocab, &objects, &goal_state);
    let observation_text = observation_text(&blocks, &initial);
    Ok(SimInstance {
        id: instance_id(DomainId::Blocksworld, params, seed),
        domain: DomainId::Blocksworld,
        vocab,
        objects,
        initial,
        goal,
        goal_text,
        observation_text,
        data: DomainData::Blocksworld { blocks },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::goal_satisfied;
    use rand_chacha::rand_core::SeedableRng;

    fn canonical(n: usize) -> SimInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        make_instance(&InstanceParams::canonical(n), 0, &mut rng).unwrap()
    }

    #[test]
    fn three_on_table_has_three_successors() {
        let inst = canonical(3);
        let succs = inst.successors(&inst.initial).unwrap();
        let labels: Vec<String> = succs.iter().map(|(l, _)| l.to_string()).collect();
        assert_eq!(labels, ["pick-up(b1)", "pick-up(b2)", "pick-up(b3)"]);
    }

    #[test]
    fn pick_up_then_stack_reaches_two_tower() {
        let inst = canonical(2);
        let plan = [
            ActionLabel::new("pick-up", &["b1"]).unwrap(),
            ActionLabel::new("stack", &["b1", "b2"]).unwrap(),
        ];
        let end = inst.replay(&inst.initial, &plan).unwrap();
        assert!(goal_satisfied(&end, &inst.goal));
    }

    #[test]
    fn held_block_offers_put_down_and_stacks() {
        let inst = canonical(3);
        let succs = inst.successors(&inst.initial).unwrap();
        let (_, after_pick) = &succs[0]; // pick-up(b1)
        let labels: Vec<String> = inst
            .successors(after_pick)
            .unwrap()
            .iter()
            .map(|(l, _)| l.to_string())
            .collect();
        assert_eq!(labels, ["put-down(b1)", "stack(b1,b2)", "stack(b1,b3)"]);
    }

    #[test]
    fn inconsistent_states_are_rejected() {
        let inst = canonical(2);
        let vocab = vocabulary();
        let no_hand = SymbolicState::new(
            &inst.vocab,
            &inst.objects,
            [
                atom("on-table", &["b1"]),
                atom("on-table", &["b2"]),
                atom("clear", &["b1"]),
                atom("clear", &["b2"]),
            ],
        )
        .unwrap();
        assert!(matches!(
            successors(&["b1".into(), "b2".into()], &no_hand),
            Err(SimError::InconsistentState { .. })
        ));
        let cyclic = SymbolicState::new(
            &vocab,
            &inst.objects,
            [
                atom("on", &["b1", "b2"]),
                atom("on", &["b2", "b1"]),
                atom("hand-empty", &[]),
            ],
        )
        .unwrap();
        assert!(matches!(
            successors(&["b1".into(), "b2".into()], &cyclic),
            Err(SimError::InconsistentState { .. })
        ));
    }

    /// Independent legal-move count: with the hand empty the legal moves
    /// are exactly one per clear block; with a block held they are one
    /// put-down plus one stack per clear block.
    #[test]
    fn successor_counts_match_enumerator_to_depth_4() {
        let inst = canonical(3);
        let mut frontier = alloc::vec![inst.initial.clone()];
        let mut seen = BTreeSet::new();
        seen.insert(inst.initial.clone());
        for _ in 0..4 {
            let mut next_frontier = Vec::new();
            for state in frontier {
                let succs = inst.successors(&state).unwrap();
                let held = state.atoms().any(|a| a.predicate() == "holding");
                let clear_count = state.atoms().filter(|a| a.predicate() == "clear").count();
                let expected = if held { clear_count + 1 } else { clear_count };
                assert_eq!(succs.len(), expected, "at {}", state.canonical_key());
                for (_, s) in succs {
                    if seen.insert(s.clone()) {
                        next_frontier.push(s);
                    }
                }
            }
            frontier = next_frontier;
        }
    }

    #[test]
    fn scrambled_instances_rest_with_hand_empty() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst =
                make_instance(&InstanceParams::scrambled(4, 9), seed, &mut rng).unwrap();
            assert!(inst.initial.contains(&atom("hand-empty", &[])));
            // The scramble walks legal moves backwards from the goal
            // state, so the goal stays reachable; successors accept the
            // initial state.
            assert!(inst.successors(&inst.initial).is_ok());
        }
    }
}
