//! Aggregation across examples and seeds.

use super::ExampleReport;
use std::fmt;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricSummary {
    pub f1_mean: f64,
    pub f1_std: f64,
    pub allcorrect_mean: f64,
    pub allcorrect_std: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreReport {
    pub leaves: MetricSummary,
    pub steps: MetricSummary,
    pub intermediates: MetricSummary,
    pub seeds: usize,
    pub examples_per_seed: Vec<usize>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divide by n).
fn pop_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// F1 is averaged over examples within a seed, then over seeds; AllCorrect
/// is the fraction of examples with `all_correct = 1`. The `(std)` is the
/// population standard deviation across seeds.
pub fn aggregate(per_seed: &[Vec<ExampleReport>]) -> ScoreReport {
    assert!(!per_seed.is_empty(), "aggregate needs at least one seed");
    assert!(per_seed.iter().all(|s| !s.is_empty()), "aggregate needs at least one example");

    let summarize = |f1_of: &dyn Fn(&ExampleReport) -> f64, all_of: &dyn Fn(&ExampleReport) -> bool| {
        let f1s: Vec<f64> = per_seed
            .iter()
            .map(|reports| mean(&reports.iter().map(|r| f1_of(r)).collect::<Vec<_>>()))
            .collect();
        let alls: Vec<f64> = per_seed
            .iter()
            .map(|reports| {
                reports.iter().filter(|r| all_of(r)).count() as f64 / reports.len() as f64
            })
            .collect();
        MetricSummary {
            f1_mean: mean(&f1s),
            f1_std: pop_std(&f1s),
            allcorrect_mean: mean(&alls),
            allcorrect_std: pop_std(&alls),
        }
    };

    ScoreReport {
        leaves: summarize(&|r| r.leaves_f1, &|r| r.leaves_all),
        steps: summarize(&|r| r.steps_f1, &|r| r.steps_all),
        intermediates: summarize(&|r| r.intermediates_f1, &|r| r.intermediates_all),
        seeds: per_seed.len(),
        examples_per_seed: per_seed.iter().map(|s| s.len()).collect(),
    }
}

impl ScoreReport {
    pub fn rows(&self) -> [(&'static str, MetricSummary); 3] {
        [("leaves", self.leaves), ("steps", self.steps), ("intermediates", self.intermediates)]
    }

    /// `metric,f1_mean,f1_std,allcorrect_mean,allcorrect_std` with values
    /// on the conventional x100 scale.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,f1_mean,f1_std,allcorrect_mean,allcorrect_std\n");
        for (name, m) in self.rows() {
            out.push_str(&format!(
                "{},{:.2},{:.2},{:.2},{:.2}\n",
                name,
                m.f1_mean * 100.0,
                m.f1_std * 100.0,
                m.allcorrect_mean * 100.0,
                m.allcorrect_std * 100.0
            ));
        }
        out
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<15} {:>16} {:>16}", "metric", "F1", "AllCorrect")?;
        for (name, m) in self.rows() {
            writeln!(
                f,
                "{:<15} {:>9.2} ({:.2}) {:>9.2} ({:.2})",
                name,
                m.f1_mean * 100.0,
                m.f1_std * 100.0,
                m.allcorrect_mean * 100.0,
                m.allcorrect_std * 100.0
            )?;
        }
        Ok(())
    }
}
