//! Archive of distinct located peaks.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bench::{euclidean, evaluate, FitnessBudget, Individual, Phase, ProblemSpec};
use crate::engine::repair_bounds;
use crate::error::Result;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakArchive {
    pub entries: Vec<Individual>,
}

/// What a merge did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeOutcome {
    Inserted,
    /// Same basin; the stored representative was replaced.
    Replaced,
    /// Same basin; the stored representative was kept.
    Kept,
}

impl PeakArchive {
    pub fn new() -> Self {
        PeakArchive::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index and distance of the Euclidean-nearest entry, lowest index on ties.
    pub fn nearest_entry(&self, point: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let d = euclidean(&e.genome, point);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }

    /// Merges `localbest` using a midpoint valley test against its nearest
    /// entry. On budget exhaustion the archive is left unchanged.
    pub fn merge(
        &mut self,
        localbest: Individual,
        budget: &mut FitnessBudget,
        spec: &ProblemSpec,
    ) -> Result<MergeOutcome> {
        let Some((k, _)) = self.nearest_entry(&localbest.genome) else {
            self.entries.push(localbest);
            return Ok(MergeOutcome::Inserted);
        };
        let nearest = &self.entries[k];
        let mid: Vec<f64> = localbest
            .genome
            .iter()
            .zip(&nearest.genome)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let mid = repair_bounds(&mid, &spec.lower_bounds, &spec.upper_bounds);
        let previous = budget.phase();
        budget.set_phase(Phase::Archive);
        let f_mid = evaluate(spec, &mid, budget);
        budget.set_phase(previous);
        let f_mid = f_mid?;

        if f_mid < localbest.fitness && f_mid < nearest.fitness {
            self.entries.push(localbest);
            Ok(MergeOutcome::Inserted)
        } else if f_mid > localbest.fitness && f_mid > nearest.fitness {
            self.entries[k] = Individual::new(mid, f_mid);
            Ok(MergeOutcome::Replaced)
        } else if localbest.fitness > nearest.fitness {
            self.entries[k] = localbest;
            Ok(MergeOutcome::Replaced)
        } else {
            Ok(MergeOutcome::Kept)
        }
    }

    /// One line per entry: genome components, then fitness, comma separated.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.entries {
            let mut line: Vec<String> = e.genome.iter().map(|v| v.to_string()).collect();
            line.push(e.fitness.to_string());
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::problem_spec;

    fn ind(x: &[f64], f: f64) -> Individual {
        Individual::new(x.to_vec(), f)
    }

    #[test]
    fn nearest() {
        let mut a = PeakArchive::new();
        assert_eq!(a.nearest_entry(&[1.0]), None);
        a.entries = vec![ind(&[0.0], 0.0), ind(&[10.0], 0.0)];
        assert_eq!(a.nearest_entry(&[3.0]), Some((0, 3.0)));
        assert_eq!(a.nearest_entry(&[5.0]), Some((0, 5.0)));
    }

    #[test]
    fn first_insert_is_free() {
        let spec = problem_spec(1).unwrap();
        let mut a = PeakArchive::new();
        let mut budget = FitnessBudget::new(10);
        assert_eq!(
            a.merge(ind(&[0.0], 200.0), &mut budget, &spec).unwrap(),
            MergeOutcome::Inserted
        );
        assert_eq!((a.len(), budget.used()), (1, 0));
    }

    #[test]
    fn trap_peaks_are_distinct() {
        let spec = problem_spec(1).unwrap();
        let mut a = PeakArchive::new();
        let mut budget = FitnessBudget::new(10);
        a.merge(ind(&[0.0], 200.0), &mut budget, &spec).unwrap();
        a.merge(ind(&[30.0], 200.0), &mut budget, &spec).unwrap();
        assert_eq!((a.len(), budget.used()), (2, 1));
    }

    #[test]
    fn same_camel_basin_keeps_fitter() {
        let spec = problem_spec(5).unwrap();
        let x1 = [0.0898, -0.7126];
        let x2 = [0.15, -0.65];
        let (f1, f2) = (spec.objective_value(&x1), spec.objective_value(&x2));
        assert!(f1 > f2);
        let mut a = PeakArchive::new();
        let mut budget = FitnessBudget::new(10);
        a.merge(ind(&x2, f2), &mut budget, &spec).unwrap();
        a.merge(ind(&x1, f1), &mut budget, &spec).unwrap();
        assert_eq!(a.len(), 1);
        assert!(a.entries[0].fitness >= f1);
    }

    #[test]
    fn exhausted_budget_leaves_archive() {
        let spec = problem_spec(1).unwrap();
        let mut a = PeakArchive::new();
        let mut budget = FitnessBudget::new(0);
        a.merge(ind(&[0.0], 200.0), &mut budget, &spec).unwrap();
        let before = a.clone();
        assert!(a.merge(ind(&[30.0], 200.0), &mut budget, &spec).is_err());
        assert_eq!(a, before);
    }

    #[test]
    fn csv_lines() {
        let a = PeakArchive {
            entries: vec![ind(&[0.1, 0.2], -1.5)],
        };
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0.1,0.2,-1.5\n");
    }
}
