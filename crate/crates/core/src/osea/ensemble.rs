//! Ensemble construction, subset selection rules and zero-agreement fixing.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MilpInstance, Solution};
use crate::osea::scaling::ScalingIterate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    SeededIncumbent,
    ScalingBest,
    ScalingWorst,
    ScalingMedian,
    ScalingIterate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub solution: Solution,
    /// Every role this member was selected for.
    pub provenance: Vec<Provenance>,
    /// Scaling iteration the member came from, if any.
    pub iteration: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
}

impl Ensemble {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn push(&mut self, member: EnsembleMember) {
        self.members.push(member);
    }

    /// Adds selected scaling iterates, merging repeated picks of the same
    /// iteration into one member.
    pub fn add_selection(
        &mut self,
        instance: &MilpInstance,
        history: &[ScalingIterate],
        picks: &[(usize, Provenance)],
    ) -> Result<()> {
        let mut grouped: BTreeMap<usize, Vec<Provenance>> = BTreeMap::new();
        let mut order = Vec::new();
        for &(idx, tag) in picks {
            if idx >= history.len() {
                return Err(Error::Dimension { expected: history.len(), got: idx });
            }
            let tags = grouped.entry(idx).or_insert_with(|| {
                order.push(idx);
                Vec::new()
            });
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        for idx in order {
            let it = &history[idx];
            self.members.push(EnsembleMember {
                solution: Solution::assess(instance, it.x.clone())?,
                provenance: grouped.remove(&idx).unwrap_or_default(),
                iteration: Some(it.iteration),
            });
        }
        Ok(())
    }

    /// Lowest objective among feasible members.
    pub fn best_feasible(&self) -> Option<&Solution> {
        self.members
            .iter()
            .map(|m| &m.solution)
            .filter(|s| s.is_feasible())
            .min_by(|a, b| a.objective.total_cmp(&b.objective))
    }
}

/// Chooses which scaling iterates join the ensemble.
pub trait SubsetRule: Send + Sync {
    fn name(&self) -> &'static str;
    /// Indices into `history` with the role each was picked for.
    fn select(&self, history: &[ScalingIterate]) -> Vec<(usize, Provenance)>;
}

/// Best, worst and lower-median iterate by original objective; equal
/// objectives rank by earliest iteration.
#[derive(Debug, Clone, Copy, Default)]
pub struct BestWorstMedian;

impl SubsetRule for BestWorstMedian {
    fn name(&self) -> &'static str {
        "best-worst-median"
    }

    fn select(&self, history: &[ScalingIterate]) -> Vec<(usize, Provenance)> {
        if history.is_empty() {
            return Vec::new();
        }
        let mut ranked: Vec<usize> = (0..history.len()).collect();
        ranked.sort_by(|&a, &b| {
            history[a]
                .original_objective
                .total_cmp(&history[b].original_objective)
                .then(a.cmp(&b))
        });
        let best = ranked[0];
        let worst_obj = history[ranked[ranked.len() - 1]].original_objective;
        let worst = *ranked
            .iter()
            .find(|&&i| history[i].original_objective == worst_obj)
            .unwrap();
        let median = ranked[(ranked.len() - 1) / 2];
        vec![
            (best, Provenance::ScalingBest),
            (worst, Provenance::ScalingWorst),
            (median, Provenance::ScalingMedian),
        ]
    }
}

/// Every scaling iterate.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllIterates;

impl SubsetRule for AllIterates {
    fn name(&self) -> &'static str {
        "all"
    }

    fn select(&self, history: &[ScalingIterate]) -> Vec<(usize, Provenance)> {
        (0..history.len()).map(|i| (i, Provenance::ScalingIterate)).collect()
    }
}

/// Subset rules by name.
#[derive(Clone)]
pub struct SubsetRegistry {
    rules: BTreeMap<&'static str, Arc<dyn SubsetRule>>,
}

impl Default for SubsetRegistry {
    fn default() -> Self {
        let mut reg = SubsetRegistry { rules: BTreeMap::new() };
        reg.register(Arc::new(BestWorstMedian));
        reg.register(Arc::new(AllIterates));
        reg
    }
}

impl SubsetRegistry {
    pub fn register(&mut self, rule: Arc<dyn SubsetRule>) {
        self.rules.insert(rule.name(), rule);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SubsetRule>> {
        self.rules.get(name).cloned().ok_or_else(|| {
            Error::Input(format!(
                "unknown subset rule `{name}` (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.rules.keys().copied().collect()
    }
}

/// Best, worst and median history entries by original objective.
pub fn select_subset(history: &[ScalingIterate]) -> Vec<&ScalingIterate> {
    let mut seen = BTreeSet::new();
    BestWorstMedian
        .select(history)
        .into_iter()
        .filter(|(i, _)| seen.insert(*i))
        .map(|(i, _)| &history[i])
        .collect()
}

/// Integer columns that are zero in every member and whose bounds admit zero.
pub fn aggregate_fix_set(
    ensemble: &Ensemble,
    instance: &MilpInstance,
    support_tol: f64,
) -> BTreeSet<usize> {
    if ensemble.is_empty() {
        return BTreeSet::new();
    }
    let (lower, upper) = (instance.lower(), instance.upper());
    instance
        .integer_indices()
        .into_iter()
        .filter(|&j| lower[j] <= 0.0 && upper[j] >= 0.0)
        .filter(|&j| {
            ensemble
                .members
                .iter()
                .all(|m| m.solution.x[j].abs() <= support_tol)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarKind;

    fn hist(objs: &[f64]) -> Vec<ScalingIterate> {
        objs.iter()
            .enumerate()
            .map(|(i, &z)| ScalingIterate {
                iteration: i,
                x: vec![i as f64],
                scaled_objective: z,
                original_objective: z,
            })
            .collect()
    }

    fn picked(h: &[ScalingIterate]) -> Vec<f64> {
        BestWorstMedian.select(h).iter().map(|&(i, _)| h[i].original_objective).collect()
    }

    #[test]
    fn rank_of_three() {
        assert_eq!(picked(&hist(&[5.0, 1.0, 9.0])), vec![1.0, 9.0, 5.0]);
    }

    #[test]
    fn lower_median() {
        assert_eq!(picked(&hist(&[4.0, 2.0, 8.0, 6.0])), vec![2.0, 8.0, 4.0]);
    }

    #[test]
    fn single_entry_dedup() {
        let h = hist(&[3.0]);
        assert_eq!(BestWorstMedian.select(&h).len(), 3);
        assert_eq!(select_subset(&h).len(), 1);
        let inst = {
            let mut b = MilpInstance::builder("one");
            b.add_column("x", 1.0, 0.0, 1.0, VarKind::Binary);
            b.build().unwrap()
        };
        let h = vec![ScalingIterate { iteration: 0, x: vec![0.0], scaled_objective: 0.0, original_objective: 0.0 }];
        let mut e = Ensemble::default();
        e.add_selection(&inst, &h, &BestWorstMedian.select(&h)).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(
            e.members[0].provenance,
            vec![Provenance::ScalingBest, Provenance::ScalingWorst, Provenance::ScalingMedian]
        );
    }

    #[test]
    fn ties_prefer_earliest() {
        let h = hist(&[2.0, 2.0, 7.0, 7.0]);
        let sel = BestWorstMedian.select(&h);
        assert_eq!(sel[0].0, 0);
        assert_eq!(sel[1].0, 2);
        assert_eq!(sel[2].0, 1);
        assert!(BestWorstMedian.select(&[]).is_empty());
    }

    #[test]
    fn registry_lookup() {
        let reg = SubsetRegistry::default();
        assert_eq!(reg.get("best-worst-median").unwrap().name(), "best-worst-median");
        assert_eq!(reg.get("all").unwrap().select(&hist(&[1.0, 2.0])).len(), 2);
        assert!(reg.get("nope").is_err());
    }

    fn member(x: Vec<f64>) -> EnsembleMember {
        EnsembleMember {
            solution: Solution { objective: 0.0, x, status: crate::SolutionStatus::Unknown },
            provenance: vec![Provenance::ScalingIterate],
            iteration: None,
        }
    }

    #[test]
    fn fix_set_rules() {
        let mut b = MilpInstance::builder("f");
        b.add_column("a", 1.0, 0.0, 1.0, VarKind::Binary);
        b.add_column("b", 1.0, 0.0, 4.0, VarKind::Integer);
        b.add_column("c", 1.0, 0.0, 4.0, VarKind::Continuous);
        b.add_column("d", 1.0, 1.0, 4.0, VarKind::Integer);
        let inst = b.build().unwrap();

        let zeros = Ensemble { members: vec![member(vec![0.0; 4])] };
        assert_eq!(aggregate_fix_set(&zeros, &inst, 1e-9), BTreeSet::from([0, 1]));

        let disjoint = Ensemble {
            members: vec![member(vec![1.0, 0.0, 0.0, 1.0]), member(vec![0.0, 2.0, 0.0, 1.0])],
        };
        assert!(aggregate_fix_set(&disjoint, &inst, 1e-9).is_empty());

        let noisy = Ensemble { members: vec![member(vec![1e-10, 0.5, 0.0, 1.0])] };
        assert_eq!(aggregate_fix_set(&noisy, &inst, 1e-9), BTreeSet::from([0]));
    }
}
