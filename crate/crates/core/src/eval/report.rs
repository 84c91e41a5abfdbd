use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::{mean, paired_ttest, sem, TTest};
use super::{gain_and_error_reduction, AccuracyCell};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    /// Setting every other setting is compared against; with `None`, or
    /// when absent from the cells, all pairs are compared.
    pub reference_setting: Option<String>,
    /// Repetitions a complete group must hold; defaults to the largest
    /// count seen in any group.
    pub expected_repetitions: Option<usize>,
    /// Bonferroni family size; defaults to the number of tests in the report.
    pub num_comparisons: Option<usize>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            reference_setting: Some("plain".into()),
            expected_repetitions: None,
            num_comparisons: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub setting: String,
    pub budget: usize,
    pub repetitions: usize,
    pub mean: f64,
    pub sem: f64,
    pub missing_repetitions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub budget: usize,
    pub base_setting: String,
    pub setting: String,
    pub base_mean: f64,
    pub mean: f64,
    /// `None` when the base accuracy is 0 or 1.
    pub gain: Option<f64>,
    pub error_reduction: Option<f64>,
    /// `None` with fewer than two repetitions.
    pub ttest: Option<TTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub nmi_normalization: String,
    pub logarithm: String,
    pub sem: String,
    pub test: String,
    pub num_comparisons: usize,
    pub expected_repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: ReportMetadata,
    pub cells: Vec<AccuracyCell>,
    pub groups: Vec<GroupSummary>,
    /// Groups missing repetitions; left out of every comparison.
    pub excluded: Vec<GroupSummary>,
    pub comparisons: Vec<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_nmi: Option<f64>,
}

pub fn build_report(mut cells: Vec<AccuracyCell>, config: &ReportConfig) -> Result<EvalReport> {
    cells.sort_by(|a, b| {
        (&a.setting, a.budget, a.repetition).cmp(&(&b.setting, b.budget, b.repetition))
    });
    if let Some(w) = cells
        .windows(2)
        .find(|w| (&w[0].setting, w[0].budget, w[0].repetition) == (&w[1].setting, w[1].budget, w[1].repetition))
    {
        return Err(Error::InvalidPredictions(format!(
            "repetition {} of (setting {}, budget {}) appears twice",
            w[0].repetition, w[0].setting, w[0].budget
        )));
    }
    let mut grouped: BTreeMap<(String, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    for c in &cells {
        grouped
            .entry((c.setting.clone(), c.budget))
            .or_default()
            .insert(c.repetition, c.accuracy);
    }
    let expected = config
        .expected_repetitions
        .unwrap_or_else(|| grouped.values().map(BTreeMap::len).max().unwrap_or(0));

    let mut groups = Vec::new();
    let mut excluded = Vec::new();
    let mut complete: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for ((setting, budget), reps) in &grouped {
        let values: Vec<f64> = reps.values().copied().collect();
        let missing: Vec<usize> = (0..expected).filter(|r| !reps.contains_key(r)).collect();
        let summary = GroupSummary {
            setting: setting.clone(),
            budget: *budget,
            repetitions: values.len(),
            mean: mean(&values),
            sem: sem(&values),
            missing_repetitions: missing.clone(),
        };
        if missing.is_empty() {
            complete.insert((setting.clone(), *budget), reps.range(0..expected).map(|(_, &v)| v).collect());
            groups.push(summary);
        } else {
            excluded.push(summary);
        }
    }

    let settings: BTreeSet<&String> = complete.keys().map(|(s, _)| s).collect();
    let budgets: BTreeSet<usize> = complete.keys().map(|(_, b)| *b).collect();
    let reference = config.reference_setting.as_ref().filter(|r| settings.contains(r));
    let mut pairs: Vec<(String, String)> = Vec::new();
    match reference {
        Some(base) => {
            for s in &settings {
                if *s != base {
                    pairs.push((base.clone(), (*s).clone()));
                }
            }
        }
        None => {
            let list: Vec<&&String> = settings.iter().collect();
            for (i, a) in list.iter().enumerate() {
                for b in &list[i + 1..] {
                    pairs.push(((**a).clone(), (**b).clone()));
                }
            }
        }
    }
    let mut planned = Vec::new();
    for &budget in &budgets {
        for (base, other) in &pairs {
            if let (Some(a), Some(b)) = (
                complete.get(&(base.clone(), budget)),
                complete.get(&(other.clone(), budget)),
            ) {
                planned.push((budget, base, other, a, b));
            }
        }
    }
    let tests = planned.iter().filter(|p| p.3.len() >= 2).count();
    let num_comparisons = config.num_comparisons.unwrap_or(tests).max(1);
    let comparisons = planned
        .into_iter()
        .map(|(budget, base, other, a, b)| {
            let (base_mean, new_mean) = (mean(a), mean(b));
            let ratio = gain_and_error_reduction(base_mean, new_mean).ok();
            let ttest = if a.len() >= 2 { Some(paired_ttest(b, a, num_comparisons)?) } else { None };
            Ok(Comparison {
                budget,
                base_setting: base.clone(),
                setting: other.clone(),
                base_mean,
                mean: new_mean,
                gain: ratio.map(|r| r.0),
                error_reduction: ratio.map(|r| r.1),
                ttest,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EvalReport {
        metadata: ReportMetadata {
            nmi_normalization: "geometric mean of entropies".into(),
            logarithm: "natural".into(),
            sem: "sample standard deviation / sqrt(n)".into(),
            test: "two-sided paired t-test, Bonferroni-corrected".into(),
            num_comparisons,
            expected_repetitions: expected,
        },
        cells,
        groups,
        excluded,
        comparisons,
        cluster_nmi: None,
    })
}

impl EvalReport {
    pub fn results_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(c)?;
        }
        Ok(w.into_inner().expect("in-memory writer"))
    }

    pub fn summary_json(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Mean and SEM per complete group, with the budget also on a log2 scale.
    pub fn plotdata_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["setting", "budget", "log2_budget", "mean", "sem", "repetitions"])?;
        for g in &self.groups {
            w.write_record([
                g.setting.clone(),
                g.budget.to_string(),
                (g.budget as f64).log2().to_string(),
                g.mean.to_string(),
                g.sem.to_string(),
                g.repetitions.to_string(),
            ])?;
        }
        Ok(w.into_inner().expect("in-memory writer"))
    }

    /// Write `results.csv`, `summary.json` and `plotdata.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let files = [
            ("results.csv", self.results_csv()?),
            ("summary.json", self.summary_json()?),
            ("plotdata.csv", self.plotdata_csv()?),
        ];
        files
            .into_iter()
            .map(|(name, bytes)| {
                let path = dir.join(name);
                crate::corpus::io::write_bytes(&path, &bytes)?;
                Ok(path)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(setting: &str, budget: usize, repetition: usize, accuracy: f64) -> AccuracyCell {
        AccuracyCell { setting: setting.into(), budget, repetition, accuracy }
    }

    #[test]
    fn means_sems_and_exclusion() {
        let mut cells = vec![cell("plain", 64, 0, 0.2), cell("plain", 64, 1, 0.4)];
        cells.extend([cell("it_clust", 64, 0, 0.5), cell("it_clust", 64, 1, 0.7)]);
        cells.push(cell("it_mlm", 64, 1, 0.9));
        let r = build_report(cells, &ReportConfig::default()).unwrap();
        let plain = r.groups.iter().find(|g| g.setting == "plain").unwrap();
        assert!((plain.mean - 0.3).abs() < 1e-15 && (plain.sem - 0.1).abs() < 1e-15);
        assert_eq!(r.excluded.len(), 1);
        assert_eq!(r.excluded[0].missing_repetitions, vec![0]);
        assert_eq!(r.comparisons.len(), 1);
        let c = &r.comparisons[0];
        assert_eq!((c.base_setting.as_str(), c.setting.as_str()), ("plain", "it_clust"));
        assert!((c.gain.unwrap() - 1.0).abs() < 1e-12);
        let t = c.ttest.unwrap();
        assert_eq!(t.degenerate, Some(super::super::Degeneracy::ZeroVariance));
        assert_eq!(r.metadata.num_comparisons, 1);
    }

    #[test]
    fn identical_repetitions_have_zero_sem() {
        let cells = (0..5).map(|r| cell("plain", 128, r, 0.61)).collect();
        let r = build_report(cells, &ReportConfig::default()).unwrap();
        assert_eq!(r.groups[0].sem, 0.0);
        assert!(r.comparisons.is_empty());
    }

    #[test]
    fn duplicates_rejected_and_outputs_stable() {
        assert!(build_report(vec![cell("a", 1, 0, 0.1), cell("a", 1, 0, 0.2)], &ReportConfig::default()).is_err());
        let cells = vec![cell("b", 64, 0, 0.3), cell("a", 64, 0, 0.2), cell("a", 64, 1, 0.25), cell("b", 64, 1, 0.35)];
        let config = ReportConfig { reference_setting: None, ..ReportConfig::default() };
        let r = build_report(cells.clone(), &config).unwrap();
        assert_eq!(r.comparisons[0].base_setting, "a");
        let csv = String::from_utf8(r.results_csv().unwrap()).unwrap();
        assert!(csv.starts_with("setting,budget,repetition,accuracy\na,64,0,0.2\n"));
        let plot = String::from_utf8(r.plotdata_csv().unwrap()).unwrap();
        assert!(plot.contains("a,64,6,0.225,"));
        let again = build_report(cells.into_iter().rev().collect(), &config).unwrap();
        assert_eq!(r.summary_json().unwrap(), again.summary_json().unwrap());
    }
}
