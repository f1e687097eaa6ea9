//! Domain-independent forward search over black-box successor
//! functions.
//!
//! The model-free search is greedy best-first ordered by
//! `(h, novelty_rank, insertion_seq)`: goal count as the primary
//! heuristic, novelty as a tie-breaker that favors states introducing
//! unseen atoms (or atom pairs, when pair tracking is on), and FIFO
//! order last so expansion is fully deterministic. Novelty never
//! prunes, so the search stays complete over finite reachable spaces.
//! A breadth-first oracle provides optimal plan lengths for tests, and
//! A* over `f = g + goal_count` serves the model-based protocol.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;
use core::time::Duration;

use crate::sim::ActionLabel;
use crate::vocab::{goal_satisfied, Goal, GroundAtom, SymbolicState};

/// Number of goal literals not satisfied in the state; zero exactly
/// when the goal holds.
pub fn goal_count(state: &SymbolicState, goal: &Goal) -> usize {
    goal.literals()
        .filter(|lit| state.contains(lit.atom()) == lit.is_negated())
        .count()
}

/// Seen atoms (and, optionally, unordered atom pairs) across all states
/// ranked so far. Entries are only ever added.
#[derive(Debug, Clone, Default)]
pub struct NoveltyTable {
    atoms: BTreeSet<GroundAtom>,
    pairs: Option<BTreeSet<(GroundAtom, GroundAtom)>>,
}

impl NoveltyTable {
    /// Pair tracking is optional because its memory grows quadratically
    /// in the atoms seen.
    pub fn new(track_pairs: bool) -> Self {
        NoveltyTable {
            atoms: BTreeSet::new(),
            pairs: track_pairs.then(BTreeSet::new),
        }
    }

    /// Ranks a state and absorbs it: 0 if it contains an unseen atom,
    /// else 1 if pair tracking is on and it contains an unseen pair,
    /// else 2.
    pub fn rank(&mut self, state: &SymbolicState) -> u8 {
        let new_atom = state.atoms().any(|a| !self.atoms.contains(a));
        let new_pair = match &self.pairs {
            Some(seen) if !new_atom => {
                let atoms: Vec<&GroundAtom> = state.atoms().collect();
                let mut found = false;
                'outer: for i in 0..atoms.len() {
                    for j in i + 1..atoms.len() {
                        if !seen.contains(&(atoms[i].clone(), atoms[j].clone())) {
                            found = true;
                            break 'outer;
                        }
                    }
                }
                found
            }
            _ => false,
        };
        for a in state.atoms() {
            self.atoms.insert(a.clone());
        }
        if let Some(seen) = &mut self.pairs {
            let atoms: Vec<&GroundAtom> = state.atoms().collect();
            for i in 0..atoms.len() {
                for j in i + 1..atoms.len() {
                    seen.insert((atoms[i].clone(), atoms[j].clone()));
                }
            }
        }
        if new_atom {
            0
        } else if new_pair {
            1
        } else {
            2
        }
    }
}

/// How equally scored frontier states are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tiebreak {
    /// Novelty over single atoms, then FIFO.
    Novelty,
    /// Novelty over atoms and unordered atom pairs, then FIFO.
    NoveltyPairs,
    /// FIFO only.
    Fifo,
}

impl Tiebreak {
    pub fn as_str(self) -> &'static str {
        match self {
            Tiebreak::Novelty => "novelty",
            Tiebreak::NoveltyPairs => "novelty-pairs",
            Tiebreak::Fifo => "fifo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "novelty" => Some(Tiebreak::Novelty),
            "novelty-pairs" => Some(Tiebreak::NoveltyPairs),
            "fifo" => Some(Tiebreak::Fifo),
            _ => None,
        }
    }
}

/// Resource limits for one search. The wall-clock limit needs the `std`
/// feature; without it the limit is inert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_expansions: u64,
    pub max_wall: Option<Duration>,
    pub max_plan_length: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_expansions: 1_000_000,
            max_wall: None,
            max_plan_length: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Solved,
    Exhausted,
    BudgetExceeded,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Solved => "solved",
            Outcome::Exhausted => "exhausted",
            Outcome::BudgetExceeded => "budget-exceeded",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Search counters. `elapsed` is informational and excluded from
/// deterministic serializations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub duplicates: u64,
    pub peak_frontier: usize,
    pub elapsed: Duration,
}

/// A plan (non-empty only when solved, or empty when the initial state
/// already satisfies the goal) plus search counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanResult {
    pub outcome: Outcome,
    pub plan: Vec<ActionLabel>,
    pub stats: SearchStats,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.outcome == Outcome::Solved
    }
}

struct Node {
    state: Rc<SymbolicState>,
    parent: Option<usize>,
    label: Option<ActionLabel>,
    g: usize,
}

fn reconstruct(nodes: &[Node], mut idx: usize) -> Vec<ActionLabel> {
    let mut plan = Vec::new();
    while let Some(parent) = nodes[idx].parent {
        plan.push(nodes[idx].label.clone().expect("non-root has a label"));
        idx = parent;
    }
    plan.reverse();
    plan
}

struct Timer {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Timer {
    fn start() -> Self {
        Timer {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed(&self) -> Duration {
        #[cfg(feature = "std")]
        {
            self.start.elapsed()
        }
        #[cfg(not(feature = "std"))]
        {
            Duration::ZERO
        }
    }

    fn over(&self, budget: &SearchBudget) -> bool {
        match budget.max_wall {
            Some(limit) => self.elapsed() > limit,
            None => false,
        }
    }
}

/// Heap key ordered ascending by (h, novelty, seq). `h` is finite by
/// contract.
#[derive(PartialEq)]
struct Key(f64, u8, u64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0
            .total_cmp(&other.0)
            .then(self.1.cmp(&other.1))
            .then(self.2.cmp(&other.2))
    }
}

/// Greedy best-first search with the goal-count heuristic.
pub fn plan<E>(
    initial: &SymbolicState,
    goal: &Goal,
    succ: impl FnMut(&SymbolicState) -> Result<Vec<(ActionLabel, SymbolicState)>, E>,
    budget: &SearchBudget,
    tiebreak: Tiebreak,
) -> Result<PlanResult, E> {
    plan_with_heuristic(
        initial,
        goal,
        succ,
        |s| Ok(goal_count(s, goal) as f64),
        budget,
        tiebreak,
    )
}

/// Greedy best-first search under an arbitrary heuristic (used for the
/// model-scored heuristic baseline). Expansion order is by
/// `(h, novelty_rank, insertion_seq)` ascending; duplicate states are
/// never re-expanded; novelty only breaks ties, so every reachable
/// state is eventually expanded within budget.
pub fn plan_with_heuristic<E>(
    initial: &SymbolicState,
    goal: &Goal,
    mut succ: impl FnMut(&SymbolicState) -> Result<Vec<(ActionLabel, SymbolicState)>, E>,
    mut heuristic: impl FnMut(&SymbolicState) -> Result<f64, E>,
    budget: &SearchBudget,
    tiebreak: Tiebreak,
) -> Result<PlanResult, E> {
    let timer = Timer::start();
    let mut stats = SearchStats::default();
    if goal_satisfied(initial, goal) {
        stats.elapsed = timer.elapsed();
        return Ok(PlanResult {
            outcome: Outcome::Solved,
            plan: Vec::new(),
            stats,
        });
    }

    let mut novelty = match tiebreak {
        Tiebreak::Novelty => Some(NoveltyTable::new(false)),
        Tiebreak::NoveltyPairs => Some(NoveltyTable::new(true)),
        Tiebreak::Fifo => None,
    };
    let rank = |table: &mut Option<NoveltyTable>, s: &SymbolicState| -> u8 {
        table.as_mut().map(|t| t.rank(s)).unwrap_or(0)
    };

    let root = Rc::new(initial.clone());
    let mut nodes: Vec<Node> = Vec::new();
    nodes.push(Node {
        state: root.clone(),
        parent: None,
        label: None,
        g: 0,
    });
    let mut seen: BTreeSet<Rc<SymbolicState>> = BTreeSet::new();
    seen.insert(root.clone());
    let mut frontier: BinaryHeap<Reverse<(Key, usize)>> = BinaryHeap::new();
    let root_h = heuristic(&root)?;
    let root_rank = rank(&mut novelty, &root);
    let mut seq: u64 = 0;
    frontier.push(Reverse((Key(root_h, root_rank, seq), 0)));
    stats.peak_frontier = 1;
    let mut pruned_by_length = false;

    while let Some(Reverse((_, idx))) = frontier.pop() {
        if stats.expansions >= budget.max_expansions || timer.over(budget) {
            stats.elapsed = timer.elapsed();
            return Ok(PlanResult {
                outcome: Outcome::BudgetExceeded,
                plan: Vec::new(),
                stats,
            });
        }
        stats.expansions += 1;
        let state = nodes[idx].state.clone();
        let g = nodes[idx].g;
        for (label, next) in succ(&state)? {
            if seen.contains(&next) {
                stats.duplicates += 1;
                continue;
            }
            if let Some(max_len) = budget.max_plan_length {
                if g + 1 > max_len {
                    pruned_by_length = true;
                    continue;
                }
            }
            let next = Rc::new(next);
            seen.insert(next.clone());
            stats.generated += 1;
            nodes.push(Node {
                state: next.clone(),
                parent: Some(idx),
                label: Some(label),
                g: g + 1,
            });
            let node_idx = nodes.len() - 1;
            if goal_satisfied(&next, goal) {
                stats.elapsed = timer.elapsed();
                return Ok(PlanResult {
                    outcome: Outcome::Solved,
                    plan: reconstruct(&nodes, node_idx),
                    stats,
                });
            }
            let h = heuristic(&next)?;
            let r = rank(&mut novelty, &next);
            seq += 1;
            frontier.push(Reverse((Key(h, r, seq), node_idx)));
        }
        stats.peak_frontier = stats.peak_frontier.max(frontier.len());
    }

    stats.elapsed = timer.elapsed();
    Ok(PlanResult {
        outcome: if pruned_by_length {
            Outcome::BudgetExceeded
        } else {
            Outcome::Exhausted
        },
        plan: Vec::new(),
        stats,
    })
}

/// Breadth-first search with duplicate detection: solved plans are
/// shortest. Kept independent of the best-first machinery so it can
/// serve as an oracle for it.
pub fn bfs_oracle<E>(
    initial: &SymbolicState,
    goal: &Goal,
    mut succ: impl FnMut(&SymbolicState) -> Result<Vec<(ActionLabel, SymbolicState)>, E>,
    budget: &SearchBudget,
) -> Result<PlanResult, E> {
    let timer = Timer::start();
    let mut stats = SearchStats::default();
    if goal_satisfied(initial, goal) {
        stats.elapsed = timer.elapsed();
        return Ok(PlanResult {
            outcome: Outcome::Solved,
            plan: Vec::new(),
            stats,
        });
    }
    let root = Rc::new(initial.clone());
    let mut nodes: Vec<Node> = Vec::new();
    nodes.push(Node {
        state: root.clone(),
        parent: None,
        label: None,
        g: 0,
    });
    let mut seen: BTreeSet<Rc<SymbolicState>> = BTreeSet::new();
    seen.insert(root);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    stats.peak_frontier = 1;
    let mut pruned_by_length = false;

    while let Some(idx) = queue.pop_front() {
        if stats.expansions >= budget.max_expansions || timer.over(budget) {
            stats.elapsed = timer.elapsed();
            return Ok(PlanResult {
                outcome: Outcome::BudgetExceeded,
                plan: Vec::new(),
                stats,
            });
        }
        stats.expansions += 1;
        let state = nodes[idx].state.clone();
        let g = nodes[idx].g;
        for (label, next) in succ(&state)? {
            if seen.contains(&next) {
                stats.duplicates += 1;
                continue;
            }
            if let Some(max_len) = budget.max_plan_length {
                if g + 1 > max_len {
                    pruned_by_length = true;
                    continue;
                }
            }
            let next = Rc::new(next);
            seen.insert(next.clone());
            stats.generated += 1;
            nodes.push(Node {
                state: next.clone(),
                parent: Some(idx),
                label: Some(label),
                g: g + 1,
            });
            let node_idx = nodes.len() - 1;
            if goal_satisfied(&next, goal) {
                stats.elapsed = timer.elapsed();
                return Ok(PlanResult {
                    outcome: Outcome::Solved,
                    plan: reconstruct(&nodes, node_idx),
                    stats,
                });
            }
            queue.push_back(node_idx);
        }
        stats.peak_frontier = stats.peak_frontier.max(queue.len());
    }

    stats.elapsed = timer.elapsed();
    Ok(PlanResult {
        outcome: if pruned_by_length {
            Outcome::BudgetExceeded
        } else {
            Outcome::Exhausted
        },
        plan: Vec::new(),
        stats,
    })
}

/// A* over `f = g + goal_count` with unit action costs, for the
/// model-based protocol. Goal count may overestimate, so plans are
/// validated rather than claimed optimal.
pub fn astar<E>(
    initial: &SymbolicState,
    goal: &Goal,
    mut succ: impl FnMut(&SymbolicState) -> Result<Vec<(ActionLabel, SymbolicState)>, E>,
    budget: &SearchBudget,
) -> Result<PlanResult, E> {
    let timer = Timer::start();
    let mut stats = SearchStats::default();
    if goal_satisfied(initial, goal) {
        stats.elapsed = timer.elapsed();
        return Ok(PlanResult {
            outcome: Outcome::Solved,
            plan: Vec::new(),
            stats,
        });
    }
    let root = Rc::new(initial.clone());
    let mut nodes: Vec<Node> = Vec::new();
    nodes.push(Node {
        state: root.clone(),
        parent: None,
        label: None,
        g: 0,
    });
    let mut best_g: BTreeMap<Rc<SymbolicState>, usize> = BTreeMap::new();
    best_g.insert(root.clone(), 0);
    let mut frontier: BinaryHeap<Reverse<(Key, usize)>> = BinaryHeap::new();
    let root_h = goal_count(&root, goal) as f64;
    let mut seq: u64 = 0;
    frontier.push(Reverse((Key(root_h, 0, seq), 0)));
    stats.peak_frontier = 1;
    let mut pruned_by_length = false;

    while let Some(Reverse((_, idx))) = frontier.pop() {
        let state = nodes[idx].state.clone();
        let g = nodes[idx].g;
        if best_g.get(&state).copied() != Some(g) {
            continue; // stale entry superseded by a cheaper path
        }
        if goal_satisfied(&state, goal) {
            stats.elapsed = timer.elapsed();
            return Ok(PlanResult {
                outcome: Outcome::Solved,
                plan: reconstruct(&nodes, idx),
                stats,
            });
        }
        if stats.expansions >= budget.max_expansions || timer.over(budget) {
            stats.elapsed = timer.elapsed();
            return Ok(PlanResult {
                outcome: Outcome::BudgetExceeded,
                plan: Vec::new(),
                stats,
            });
        }
        stats.expansions += 1;
        for (label, next) in succ(&state)? {
            let next_g = g + 1;
            if let Some(max_len) = budget.max_plan_length {
                if next_g > max_len {
                    pruned_by_length = true;
                    continue;
                }
            }
            let next = Rc::new(next);
            match best_g.get(&next) {
                Some(&known) if known <= next_g => {
                    stats.duplicates += 1;
                    continue;
                }
                _ => {}
            }
            best_g.insert(next.clone(), next_g);
            stats.generated += 1;
            nodes.push(Node {
                state: next.clone(),
                parent: Some(idx),
                label: Some(label),
                g: next_g,
            });
            let node_idx = nodes.len() - 1;
            let h = goal_count(&next, goal) as f64;
            seq += 1;
            frontier.push(Reverse((Key(next_g as f64 + h, 0, seq), node_idx)));
        }
        stats.peak_frontier = stats.peak_frontier.max(frontier.len());
    }

    stats.elapsed = timer.elapsed();
    Ok(PlanResult {
        outcome: if pruned_by_length {
            Outcome::BudgetExceeded
        } else {
            Outcome::Exhausted
        },
        plan: Vec::new(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{make_instance, DomainId, InstanceParams, SimError, SimInstance};
    use crate::vocab::{
        GroundAtom, LiftedVocabulary, Literal, ObjectInstance, ObjectSet,
        PredicateSignature, TypeName,
    };
    use alloc::vec;

    fn hanoi(n: usize) -> SimInstance {
        make_instance(DomainId::Hanoi, &InstanceParams::canonical(n), 0).unwrap()
    }

    fn blocks(n: usize) -> SimInstance {
        make_instance(DomainId::Blocksworld, &InstanceParams::canonical(n), 0).unwrap()
    }

    fn ty(s: &str) -> TypeName {
        TypeName::new(s).unwrap()
    }

    /// Vocabulary of three nullary predicates for novelty tracing.
    fn flag_vocab() -> (LiftedVocabulary, ObjectSet) {
        let vocab = LiftedVocabulary::new(
            [ty("unit")],
            [
                PredicateSignature::new("p", vec![], false).unwrap(),
                PredicateSignature::new("q", vec![], false).unwrap(),
                PredicateSignature::new("r", vec![], false).unwrap(),
            ],
        )
        .unwrap();
        let objs = ObjectSet::new(
            &vocab,
            [ObjectInstance::new("u", ty("unit")).unwrap()],
        )
        .unwrap();
        (vocab, objs)
    }

    fn flag_state(vocab: &LiftedVocabulary, objs: &ObjectSet, preds: &[&str]) -> SymbolicState {
        SymbolicState::new(
            vocab,
            objs,
            preds.iter().map(|p| GroundAtom::new(p, &[]).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn goal_count_counts_unsatisfied_literals() {
        let inst = blocks(3);
        // Canonical initial is all-on-table; the tower goal has three
        // literals: on(b1,b2), on(b2,b3), on-table(b3). The last already
        // holds, so two remain unsatisfied.
        assert_eq!(goal_count(&inst.initial, &inst.goal), 2);
        let vocab = inst.vocab.clone();
        let clear_b1 = GroundAtom::new("clear", &["b1"]).unwrap();
        let neg_goal = Goal::new(&vocab, &inst.objects, [Literal::negative(clear_b1)]).unwrap();
        assert_eq!(goal_count(&inst.initial, &neg_goal), 1);
    }

    #[test]
    fn goal_count_zero_iff_satisfied() {
        let inst = hanoi(2);
        let solved = bfs_oracle(&inst.initial, &inst.goal, |s| inst.successors(s), &SearchBudget::default())
            .unwrap();
        let end = inst.replay(&inst.initial, &solved.plan).unwrap();
        assert_eq!(goal_count(&end, &inst.goal), 0);
    }

    #[test]
    fn novelty_everything_new_in_empty_table() {
        let (vocab, objs) = flag_vocab();
        let mut table = NoveltyTable::new(false);
        assert_eq!(table.rank(&flag_state(&vocab, &objs, &["p"])), 0);
    }

    #[test]
    fn novelty_repeat_state_ranks_two_without_pairs() {
        let (vocab, objs) = flag_vocab();
        let state = flag_state(&vocab, &objs, &["p", "q"]);
        let mut table = NoveltyTable::new(false);
        assert_eq!(table.rank(&state), 0);
        assert_eq!(table.rank(&state), 2);
    }

    #[test]
    fn novelty_pair_trace() {
        let (vocab, objs) = flag_vocab();
        let mut table = NoveltyTable::new(true);
        assert_eq!(table.rank(&flag_state(&vocab, &objs, &["p", "q"])), 0);
        assert_eq!(table.rank(&flag_state(&vocab, &objs, &["p", "r"])), 0);
        // No new atom, but the pair {q,r} is unseen.
        assert_eq!(table.rank(&flag_state(&vocab, &objs, &["q", "r"])), 1);
    }

    #[test]
    fn bfs_lengths_match_closed_form() {
        for n in 2..=5 {
            let inst = hanoi(n);
            let result = bfs_oracle(
                &inst.initial,
                &inst.goal,
                |s| inst.successors(s),
                &SearchBudget::default(),
            )
            .unwrap();
            assert!(result.solved());
            assert_eq!(result.plan.len(), (1 << n) - 1, "hanoi({n})");
        }
    }

    #[test]
    fn gbfs_solves_hanoi_3_and_replays() {
        let inst = hanoi(3);
        let oracle = bfs_oracle(&inst.initial, &inst.goal, |s| inst.successors(s), &SearchBudget::default())
            .unwrap();
        let result = plan(
            &inst.initial,
            &inst.goal,
            |s| inst.successors(s),
            &SearchBudget::default(),
            Tiebreak::Novelty,
        )
        .unwrap();
        assert!(result.solved());
        assert!(result.plan.len() >= oracle.plan.len());
        let end = inst.replay(&inst.initial, &result.plan).unwrap();
        assert!(inst.goal_reached(&end));
    }

    #[test]
    fn satisfied_initial_solves_in_zero_expansions() {
        let inst = make_instance(DomainId::Hanoi, &InstanceParams::scrambled(3, 0), 1).unwrap();
        let result = plan(
            &inst.initial,
            &inst.goal,
            |s| inst.successors(s),
            &SearchBudget::default(),
            Tiebreak::Novelty,
        )
        .unwrap();
        assert!(result.solved());
        assert!(result.plan.is_empty());
        assert_eq!(result.stats.expansions, 0);
    }

    #[test]
    fn eight_block_tower_within_budget() {
        let inst = blocks(8);
        let budget = SearchBudget {
            max_expansions: 100_000,
            ..SearchBudget::default()
        };
        let result = plan(
            &inst.initial,
            &inst.goal,
            |s| inst.successors(s),
            &budget,
            Tiebreak::Novelty,
        )
        .unwrap();
        assert!(result.solved(), "{:?}", result.outcome);
        let end = inst.replay(&inst.initial, &result.plan).unwrap();
        assert!(inst.goal_reached(&end));
    }

    #[test]
    fn tiny_budget_reports_exceeded() {
        let inst = hanoi(3);
        let budget = SearchBudget {
            max_expansions: 1,
            ..SearchBudget::default()
        };
        let result = plan(
            &inst.initial,
            &inst.goal,
            |s| inst.successors(s),
            &budget,
            Tiebreak::Novelty,
        )
        .unwrap();
        assert_eq!(result.outcome, Outcome::BudgetExceeded);
        assert!(result.plan.is_empty());
    }

    #[test]
    fn unreachable_goal_exhausts() {
        let inst = hanoi(2);
        // A goal over an object the instance never stacks this way:
        // d2 on d1 violates the size order, so no reachable state
        // satisfies it.
        let atom = GroundAtom::new("on", &["d2", "d1"]).unwrap();
        let goal = Goal::new(&inst.vocab, &inst.objects, [Literal::positive(atom)]).unwrap();
        let result = bfs_oracle(
            &inst.initial,
            &goal,
            |s| inst.successors(s),
            &SearchBudget::default(),
        )
        .unwrap();
        assert_eq!(result.outcome, Outcome::Exhausted);
    }

    #[test]
    fn gbfs_solves_whenever_oracle_does() {
        for (domain, sizes) in [
            (DomainId::Blocksworld, &[2usize, 3, 4, 5][..]),
            (DomainId::Hanoi, &[2, 3, 4, 5][..]),
        ] {
            for &n in sizes {
                for seed in [1u64, 2] {
                    let inst =
                        make_instance(domain, &InstanceParams::scrambled(n, 2 * n), seed).unwrap();
                    let oracle = bfs_oracle(
                        &inst.initial,
                        &inst.goal,
                        |s| inst.successors(s),
                        &SearchBudget::default(),
                    )
                    .unwrap();
                    assert!(oracle.solved());
                    for tiebreak in [Tiebreak::Novelty, Tiebreak::NoveltyPairs, Tiebreak::Fifo] {
                        let result = plan(
                            &inst.initial,
                            &inst.goal,
                            |s| inst.successors(s),
                            &SearchBudget::default(),
                            tiebreak,
                        )
                        .unwrap();
                        assert!(result.solved(), "{domain} n={n} seed={seed} {tiebreak:?}");
                        assert!(result.plan.len() >= oracle.plan.len());
                        let end = inst.replay(&inst.initial, &result.plan).unwrap();
                        assert!(inst.goal_reached(&end));
                    }
                }
            }
        }
    }

    #[test]
    fn expansion_order_is_deterministic() {
        let inst = blocks(4);
        let run = || {
            plan(
                &inst.initial,
                &inst.goal,
                |s| inst.successors(s),
                &SearchBudget::default(),
                Tiebreak::NoveltyPairs,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.stats.expansions, b.stats.expansions);
        assert_eq!(a.stats.generated, b.stats.generated);
        assert_eq!(a.stats.duplicates, b.stats.duplicates);
        assert_eq!(a.stats.peak_frontier, b.stats.peak_frontier);
    }

    #[test]
    fn succ_errors_propagate() {
        let inst = hanoi(2);
        let result: Result<PlanResult, SimError> = plan(
            &inst.initial,
            &inst.goal,
            |_| {
                Err(SimError::InconsistentState {
                    reason: "boom".into(),
                })
            },
            &SearchBudget::default(),
            Tiebreak::Novelty,
        );
        assert!(result.is_err());
    }

    #[test]
    fn astar_solves_and_validates() {
        let inst = hanoi(3);
        let result = astar(
            &inst.initial,
            &inst.goal,
            |s| inst.successors(s),
            &SearchBudget::default(),
        )
        .unwrap();
        assert!(result.solved());
        let end = inst.replay(&inst.initial, &result.plan).unwrap();
        assert!(inst.goal_reached(&end));
    }
}
