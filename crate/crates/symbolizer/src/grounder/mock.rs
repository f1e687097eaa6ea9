//! Deterministic offline grounder: perturbs simulator ground truth
//! instead of calling a model. Each true element is dropped
//! independently with probability epsilon; `spurious` extra atoms are
//! drawn uniformly without replacement from the atom universe minus the
//! ground truth. All randomness derives from (seed, row id, stage), so
//! results are reproducible regardless of evaluation order.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use symbolizer_core::sim::{ActionLabel, SimInstance};
use symbolizer_core::vocab::{
    ground_atom_universe, Goal, GroundAtom, LiftedVocabulary, Literal, ObjectSet,
    SymbolicState,
};

use super::{GroundError, MockNoise};

#[derive(Debug, Clone)]
pub struct MockGrounder {
    pub noise: MockNoise,
}

impl MockGrounder {
    pub fn new(noise: MockNoise) -> Self {
        MockGrounder { noise }
    }

    pub fn exact(seed: u64) -> Self {
        MockGrounder {
            noise: MockNoise {
                epsilon: 0.0,
                spurious: 0,
                seed,
            },
        }
    }

    /// Stream seeded by (run seed, row id, stage tag): independent of
    /// evaluation order and thread scheduling.
    fn rng(&self, row_id: &str, stage: &str) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.noise.seed.to_le_bytes());
        hasher.update(row_id.as_bytes());
        hasher.update(b"/");
        hasher.update(stage.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }

    /// Ground-truth objects with each one dropped at epsilon. Dropping
    /// everything from a non-empty scene is an empty result.
    pub fn ground_objects(
        &self,
        row_id: &str,
        gt: &ObjectSet,
    ) -> Result<ObjectSet, GroundError> {
        let mut rng = self.rng(row_id, "objects");
        let kept = gt.filter(|_| !(rng.gen::<f64>() < self.noise.epsilon));
        if kept.is_empty() && !gt.is_empty() {
            return Err(GroundError::EmptyResult);
        }
        Ok(kept)
    }

    /// Ground-truth state with atoms dropped at epsilon plus spurious
    /// atoms sampled from the universe over `universe_objects` (the
    /// object set the predicate stage was conditioned on) minus the
    /// ground truth.
    pub fn ground_state(
        &self,
        row_id: &str,
        gt: &SymbolicState,
        vocab: &LiftedVocabulary,
        universe_objects: &ObjectSet,
    ) -> Result<SymbolicState, GroundError> {
        let mut rng = self.rng(row_id, "predicates");
        let mut atoms: Vec<GroundAtom> = gt
            .atoms()
            .filter(|_| !(rng.gen::<f64>() < self.noise.epsilon))
            .cloned()
            .collect();
        atoms.extend(self.sample_spurious(
            &mut rng,
            vocab,
            universe_objects,
            &|a| gt.contains(a),
        ));
        if atoms.is_empty() && !gt.is_empty() {
            return Err(GroundError::EmptyResult);
        }
        let typing = merged_objects(universe_objects, gt.atoms(), vocab);
        Ok(SymbolicState::new(vocab, &typing, atoms).expect("perturbed atoms stay well-typed"))
    }

    /// Ground-truth goal with literals dropped at epsilon plus spurious
    /// positive literals.
    pub fn ground_goal(
        &self,
        row_id: &str,
        gt: &Goal,
        vocab: &LiftedVocabulary,
        universe_objects: &ObjectSet,
    ) -> Result<Goal, GroundError> {
        let mut rng = self.rng(row_id, "goal");
        let mut literals: Vec<Literal> = gt
            .literals()
            .filter(|_| !(rng.gen::<f64>() < self.noise.epsilon))
            .cloned()
            .collect();
        let gt_atoms: Vec<&GroundAtom> = gt.literals().map(|l| l.atom()).collect();
        literals.extend(
            self.sample_spurious(&mut rng, vocab, universe_objects, &|a| {
                gt_atoms.contains(&a)
            })
            .into_iter()
            .map(Literal::positive),
        );
        if literals.is_empty() && !gt.is_empty() {
            return Err(GroundError::EmptyResult);
        }
        let typing = merged_objects(universe_objects, gt.literals().map(|l| l.atom()), vocab);
        Ok(Goal::new(vocab, &typing, literals).expect("perturbed literals stay well-typed"))
    }

    fn sample_spurious(
        &self,
        rng: &mut ChaCha8Rng,
        vocab: &LiftedVocabulary,
        objects: &ObjectSet,
        in_gt: &dyn Fn(&GroundAtom) -> bool,
    ) -> Vec<GroundAtom> {
        if self.noise.spurious == 0 {
            return Vec::new();
        }
        let pool: Vec<GroundAtom> = ground_atom_universe(vocab, objects)
            .into_iter()
            .filter(|a| !in_gt(a))
            .collect();
        let k = self.noise.spurious.min(pool.len());
        sample(rng, pool.len(), k)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect()
    }

    /// The simulator is the transition oracle: the action must match a
    /// legal move of the given state.
    pub fn predict_successor(
        &self,
        sim: &SimInstance,
        state: &SymbolicState,
        action: &ActionLabel,
    ) -> Result<SymbolicState, GroundError> {
        let succs = sim
            .successors(state)
            .map_err(|e| GroundError::Sim(e.to_string()))?;
        succs
            .into_iter()
            .find(|(l, _)| l == action)
            .map(|(_, s)| s)
            .ok_or_else(|| GroundError::NoSuchSuccessor {
                action: action.clone(),
            })
    }
}

/// The mock may keep ground-truth atoms whose objects were dropped at
/// the object stage, so typing for the perturbed output is checked
/// against the union of the universe objects and the objects the
/// ground truth itself mentions.
fn merged_objects<'a>(
    universe: &ObjectSet,
    gt_atoms: impl IntoIterator<Item = &'a GroundAtom>,
    vocab: &LiftedVocabulary,
) -> ObjectSet {
    let inferred = ObjectSet::infer_from_atoms(vocab, gt_atoms)
        .expect("ground truth values are well-typed");
    universe
        .union(&inferred)
        .expect("ground truth agrees with its own object types")
}

#[cfg(test)]
mod tests {
    use super::*;
    use symbolizer_core::sim::{make_instance, DomainId, InstanceParams};

    fn hanoi3() -> SimInstance {
        make_instance(DomainId::Hanoi, &InstanceParams::canonical(3), 0).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let inst = hanoi3();
        let mock = MockGrounder::exact(7);
        let objs = mock.ground_objects(&inst.id, &inst.objects).unwrap();
        assert_eq!(objs, inst.objects);
        let state = mock
            .ground_state(&inst.id, &inst.initial, &inst.vocab, &objs)
            .unwrap();
        assert_eq!(state, inst.initial);
        let goal = mock
            .ground_goal(&inst.id, &inst.goal, &inst.vocab, &objs)
            .unwrap();
        assert_eq!(goal, inst.goal);
    }

    #[test]
    fn full_drop_is_empty_result() {
        let inst = hanoi3();
        let mock = MockGrounder::new(MockNoise {
            epsilon: 1.0,
            spurious: 0,
            seed: 0,
        });
        assert!(matches!(
            mock.ground_objects(&inst.id, &inst.objects),
            Err(GroundError::EmptyResult)
        ));
    }

    #[test]
    fn spurious_count_is_exact() {
        // Universe of 9 on-atoms, |GT| = 3, k = 2 => exactly 5 atoms.
        use symbolizer_core::vocab::{
            LiftedVocabulary, ObjectInstance, PredicateSignature, TypeName,
        };
        let disk = TypeName::new("disk").unwrap();
        let peg = TypeName::new("peg").unwrap();
        let vocab = LiftedVocabulary::new(
            [disk.clone(), peg.clone()],
            [PredicateSignature::new("on", vec![disk.clone(), peg.clone()], false).unwrap()],
        )
        .unwrap();
        let objs = ObjectSet::new(
            &vocab,
            [
                ObjectInstance::new("d1", disk.clone()).unwrap(),
                ObjectInstance::new("d2", disk.clone()).unwrap(),
                ObjectInstance::new("d3", disk).unwrap(),
                ObjectInstance::new("p1", peg.clone()).unwrap(),
                ObjectInstance::new("p2", peg.clone()).unwrap(),
                ObjectInstance::new("p3", peg).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(ground_atom_universe(&vocab, &objs).len(), 9);
        let gt = SymbolicState::new(
            &vocab,
            &objs,
            [
                GroundAtom::new("on", &["d1", "p1"]).unwrap(),
                GroundAtom::new("on", &["d2", "p2"]).unwrap(),
                GroundAtom::new("on", &["d3", "p3"]).unwrap(),
            ],
        )
        .unwrap();
        let mock = MockGrounder::new(MockNoise {
            epsilon: 0.0,
            spurious: 2,
            seed: 3,
        });
        let out = mock.ground_state("row", &gt, &vocab, &objs).unwrap();
        assert_eq!(out.len(), 5);
        for atom in gt.atoms() {
            assert!(out.contains(atom));
        }
    }

    #[test]
    fn fixed_seed_is_byte_identical() {
        let inst = hanoi3();
        let mock = MockGrounder::new(MockNoise {
            epsilon: 0.5,
            spurious: 1,
            seed: 42,
        });
        let a = mock
            .ground_state(&inst.id, &inst.initial, &inst.vocab, &inst.objects)
            .unwrap();
        let b = mock
            .ground_state(&inst.id, &inst.initial, &inst.vocab, &inst.objects)
            .unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());
        // A different row id draws a different stream.
        let c = mock
            .ground_state("other-row", &inst.initial, &inst.vocab, &inst.objects)
            .unwrap();
        let _ = c;
    }

    #[test]
    fn drop_rate_converges_to_epsilon() {
        // Binomial check at 99% confidence over seeded trials.
        let inst = hanoi3();
        let epsilon = 0.3;
        let mut dropped = 0usize;
        let mut total = 0usize;
        let n_trials = 1200;
        for trial in 0..n_trials {
            let mock = MockGrounder::new(MockNoise {
                epsilon,
                spurious: 0,
                seed: trial,
            });
            match mock.ground_state(&inst.id, &inst.initial, &inst.vocab, &inst.objects) {
                Ok(state) => {
                    dropped += inst.initial.len() - state.len();
                }
                Err(GroundError::EmptyResult) => dropped += inst.initial.len(),
                Err(e) => panic!("{e}"),
            }
            total += inst.initial.len();
        }
        let observed = dropped as f64 / total as f64;
        let margin = 2.576 * (epsilon * (1.0 - epsilon) / total as f64).sqrt();
        assert!(
            (observed - epsilon).abs() <= margin,
            "observed {observed:.4} vs {epsilon} (margin {margin:.4}, n {total})"
        );
    }

    #[test]
    fn successor_oracle_and_inapplicable_action() {
        let inst = hanoi3();
        let mock = MockGrounder::exact(0);
        let succs = inst.successors(&inst.initial).unwrap();
        let (label, expected) = &succs[1]; // move(d1,d2,peg3)
        let predicted = mock
            .predict_successor(&inst, &inst.initial, label)
            .unwrap();
        assert_eq!(&predicted, expected);
        assert!(predicted.contains(&GroundAtom::new("on", &["d1", "peg3"]).unwrap()));
        assert!(predicted.contains(&GroundAtom::new("clear", &["d2"]).unwrap()));

        let illegal = ActionLabel::new("move", &["d3", "peg1", "peg2"]).unwrap();
        assert!(matches!(
            mock.predict_successor(&inst, &inst.initial, &illegal),
            Err(GroundError::NoSuchSuccessor { .. })
        ));
    }
}
