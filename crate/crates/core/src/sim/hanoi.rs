//! Towers of Hanoi over `on(x,y)`, `clear(x)`, and static
//! `smaller-than(x,y)` atoms, with supports being disks and pegs alike.
//! The color variant is mechanically identical; disks are named by
//! color, so size ordering is carried only by the static atoms.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

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

/// Disk names for the color variant, smallest first.
const PALETTE: [&str; 8] = [
    "red", "green", "blue", "yellow", "purple", "orange", "pink", "cyan",
];

pub(super) fn vocabulary() -> LiftedVocabulary {
    let item = TypeName::new("item").expect("valid type name");
    LiftedVocabulary::new(
        [item.clone()],
        [
            PredicateSignature::new("on", alloc::vec![item.clone(), item.clone()], false)
                .expect("valid signature"),
            PredicateSignature::new("clear", alloc::vec![item.clone()], false)
                .expect("valid signature"),
            PredicateSignature::new("smaller-than", alloc::vec![item.clone(), item.clone()], true)
                .expect("valid signature"),
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

/// `smaller-than(a,b)` facts: every disk is smaller than every later
/// (larger) disk and smaller than every peg.
fn static_atoms(disks: &[String], pegs: &[String]) -> BTreeSet<GroundAtom> {
    let mut out = BTreeSet::new();
    for (i, d) in disks.iter().enumerate() {
        for larger in &disks[i + 1..] {
            out.insert(atom("smaller-than", &[d, larger]));
        }
        for p in pegs {
            out.insert(atom("smaller-than", &[d, p]));
        }
    }
    out
}

struct View {
    /// Disk -> its direct support.
    support: BTreeMap<String, String>,
    clear: BTreeSet<String>,
    smaller: BTreeSet<GroundAtom>,
}

fn parse_state(
    disks: &[String],
    pegs: &[String],
    state: &SymbolicState,
) -> Result<View, SimError> {
    let disk_set: BTreeSet<&str> = disks.iter().map(|d| d.as_str()).collect();
    let peg_set: BTreeSet<&str> = pegs.iter().map(|p| p.as_str()).collect();
    let mut support: BTreeMap<String, String> = BTreeMap::new();
    let mut clear: BTreeSet<String> = BTreeSet::new();
    let mut smaller: BTreeSet<GroundAtom> = BTreeSet::new();

    for a in state.atoms() {
        let args = a.args();
        match a.predicate() {
            "on" => {
                let (d, s) = (&args[0], &args[1]);
                if !disk_set.contains(d.as_str()) {
                    return Err(inconsistent(format!("{d} is not a disk and cannot rest on anything")));
                }
                if !disk_set.contains(s.as_str()) && !peg_set.contains(s.as_str()) {
                    return Err(inconsistent(format!("unknown support {s}")));
                }
                if d == s {
                    return Err(inconsistent(format!("{d} is on itself")));
                }
                if support.insert(d.clone(), s.clone()).is_some() {
                    return Err(inconsistent(format!("{d} has two supports")));
                }
            }
            "clear" => {
                let s = &args[0];
                if !disk_set.contains(s.as_str()) && !peg_set.contains(s.as_str()) {
                    return Err(inconsistent(format!("unknown item {s}")));
                }
                clear.insert(s.clone());
            }
            "smaller-than" => {
                smaller.insert(a.clone());
            }
            other => return Err(inconsistent(format!("unknown predicate {other}"))),
        }
    }

    let expected_static = static_atoms(disks, pegs);
    if smaller != expected_static {
        return Err(inconsistent("smaller-than facts disagree with the size order"));
    }
    for d in disks {
        if !support.contains_key(d) {
            return Err(inconsistent(format!("{d} rests on nothing")));
        }
    }
    // Size legality: a disk may only rest on something it is smaller
    // than, so a larger disk atop a smaller one is rejected here.
    let mut occupancy: BTreeMap<&str, &str> = BTreeMap::new();
    for (d, s) in &support {
        if !expected_static.contains(&atom("smaller-than", &[d, s])) {
            return Err(inconsistent(format!("{d} rests on the smaller {s}")));
        }
        if occupancy.insert(s.as_str(), d.as_str()).is_some() {
            return Err(inconsistent(format!("{s} carries two disks directly")));
        }
    }
    // Every tower must bottom out at a peg.
    for d in disks {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut cur = d.as_str();
        while let Some(next) = support.get(cur) {
            if !seen.insert(cur) {
                return Err(inconsistent(format!("cyclic stack through {d}")));
            }
            cur = next;
        }
        if !peg_set.contains(cur) {
            return Err(inconsistent(format!("the stack under {d} reaches no peg")));
        }
    }
    let expected_clear: BTreeSet<String> = disks
        .iter()
        .chain(pegs.iter())
        .filter(|s| !occupancy.contains_key(s.as_str()))
        .cloned()
        .collect();
    if clear != expected_clear {
        return Err(inconsistent("clear set disagrees with the stacks"));
    }
    Ok(View {
        support,
        clear,
        smaller,
    })
}

pub(super) fn successors(
    disks: &[String],
    pegs: &[String],
    state: &SymbolicState,
) -> Result<Vec<(ActionLabel, SymbolicState)>, SimError> {
    let view = parse_state(disks, pegs, state)?;
    let mut out: Vec<(ActionLabel, SymbolicState)> = Vec::new();
    for d in disks {
        if !view.clear.contains(d) {
            continue;
        }
        let from = view.support.get(d).expect("every disk has a support");
        for to in view.clear.iter() {
            if to == d || to == from {
                continue;
            }
            if !view.smaller.contains(&atom("smaller-than", &[d, to])) {
                continue;
            }
            let mut atoms = state.atom_set().clone();
            atoms.remove(&atom("on", &[d, from]));
            atoms.remove(&atom("clear", &[to]));
            atoms.insert(atom("on", &[d, to]));
            atoms.insert(atom("clear", &[from]));
            out.push((
                ActionLabel::new("move", &[d, from, to]).expect("valid label"),
                SymbolicState::from_atoms_unchecked(atoms),
            ));
        }
    }
    out.sort_by(|(a, _), (b, _)| a.to_string().cmp(&b.to_string()));
    Ok(out)
}

/// State atoms for a full configuration: `peg_of[i]` is the peg of disk
/// `i`; disks on the same peg stack in size order.
fn state_from_pegs(
    disks: &[String],
    pegs: &[String],
    peg_of: &[usize],
) -> SymbolicState {
    let mut atoms = static_atoms(disks, pegs);
    let mut tops: BTreeMap<usize, String> = BTreeMap::new();
    // Largest first: each disk lands on the current top of its peg.
    for (i, d) in disks.iter().enumerate().rev() {
        let peg = peg_of[i];
        let below = tops.get(&peg).cloned().unwrap_or_else(|| pegs[peg].clone());
        atoms.insert(atom("on", &[d, &below]));
        tops.insert(peg, d.clone());
    }
    let occupied: BTreeSet<String> = tops.values().cloned().collect();
    for (peg_idx, p) in pegs.iter().enumerate() {
        if !tops.contains_key(&peg_idx) {
            atoms.insert(atom("clear", &[p]));
        }
    }
    for d in &occupied {
        atoms.insert(atom("clear", &[d]));
    }
    SymbolicState::from_atoms_unchecked(atoms)
}

fn goal_from_state(
    vocab: &LiftedVocabulary,
    objects: &ObjectSet,
    goal_state: &SymbolicState,
) -> (Goal, String) {
    let mut literals: Vec<Literal> = Vec::new();
    let mut phrases: Vec<String> = Vec::new();
    for a in goal_state.atoms() {
        if a.predicate() == "on" {
            literals.push(Literal::positive(a.clone()));
            phrases.push(format!("{} on {}", a.args()[0], a.args()[1]));
        }
    }
    let goal = Goal::new(vocab, objects, literals).expect("goal atoms come from a valid state");
    (goal, phrases.join(", "))
}

fn observation_text(disks: &[String], pegs: &[String], state: &SymbolicState) -> String {
    let mut sentences: Vec<String> = Vec::new();
    sentences.push(format!(
        "the disks from smallest to largest are: {}.",
        disks.join(", ")
    ));
    sentences.push(format!("the pegs are: {}.", pegs.join(", ")));
    for a in state.atoms() {
        if a.predicate() == "on" {
            sentences.push(format!("{} is on {}.", a.args()[0], a.args()[1]));
        }
    }
    sentences.join(" ")
}

pub(super) fn make_instance(
    color: bool,
    params: &InstanceParams,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<SimInstance, SimError> {
    let n = params.size;
    let disks: Vec<String> = if color {
        PALETTE[..n].iter().map(|c| (*c).to_owned()).collect()
    } else {
        (1..=n).map(|i| format!("d{i}")).collect()
    };
    let pegs: Vec<String> = (1..=3).map(|i| format!("peg{i}")).collect();
    let vocab = vocabulary();
    let item_ty = TypeName::new("item").expect("valid type name");
    let objects = ObjectSet::new(
        &vocab,
        disks
            .iter()
            .chain(pegs.iter())
            .map(|o| ObjectInstance::new(o, item_ty.clone()).expect("valid object")),
    )
    .expect("valid object set");

    let goal_pegs: Vec<usize> = match params.scramble_depth {
        // Canonical goal: everything on peg3.
        None => alloc::vec![2; n],
        Some(_) => (0..n).map(|_| rng.gen_range(0..3)).collect(),
    };
    let goal_state = state_from_pegs(&disks, &pegs, &goal_pegs);

    let initial = match params.scramble_depth {
        None => state_from_pegs(&disks, &pegs, &alloc::vec![0; n]),
        Some(depth) => {
            let succ = |s: &SymbolicState| successors(&disks, &pegs, s);
            scramble(&succ, &goal_state, depth, rng)?
        }
    };

    let (goal, goal_text) = goal_from_state(&vocab, &objects, &goal_state);
    let observation_text = observation_text(&disks, &pegs, &initial);
    let domain = if color {
        DomainId::HanoiColor
    } else {
        DomainId::Hanoi
    };
    Ok(SimInstance {
        id: instance_id(domain, params, seed),
        domain,
        vocab,
        objects,
        initial,
        goal,
        goal_text,
        observation_text,
        data: DomainData::Hanoi { disks, pegs },
    })
}
