use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::PolicyKind;
use super::eval::{EvalSummary, Stats};
use super::io::{with_hash_header, write_atomic};
use crate::error::{Error, Result};

pub const COMPARISON_FILE: &str = "comparison.csv";
pub const RATIOS_FILE: &str = "ratios.csv";
pub const TABLE_FILE: &str = "comparison.txt";

type Column = fn(&Stats) -> f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub policy: PolicyKind,
    pub stats: Stats,
}

/// `numerator` average utility divided by `denominator`'s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageRatio {
    pub numerator: PolicyKind,
    pub denominator: PolicyKind,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub config_hash: String,
    pub scenario_hash: String,
    pub horizon: usize,
    pub rows: Vec<ComparisonRow>,
    pub ratios: Vec<AverageRatio>,
}

/// Tabulates summaries of one scenario in Random, Over allocation, MADDPG,
/// Static slicing order, with ratios for every ordered pair of rows.
pub fn compare(summaries: &[EvalSummary]) -> Result<ComparisonTable> {
    let first = summaries
        .first()
        .filter(|_| summaries.len() >= 2)
        .ok_or_else(|| Error::Config(format!("compare needs at least two summaries, got {}", summaries.len())))?;
    for s in &summaries[1..] {
        if s.scenario_hash != first.scenario_hash || s.horizon != first.horizon {
            return Err(Error::MismatchedScenario(format!(
                "{} (scenario {}, horizon {}) vs {} (scenario {}, horizon {})",
                first.policy,
                &first.scenario_hash[..12.min(first.scenario_hash.len())],
                first.horizon,
                s.policy,
                &s.scenario_hash[..12.min(s.scenario_hash.len())],
                s.horizon
            )));
        }
    }
    let mut rows: Vec<ComparisonRow> = summaries
        .iter()
        .map(|s| ComparisonRow {
            policy: s.policy,
            stats: s.stats,
        })
        .collect();
    rows.sort_by_key(|r| r.policy.table_rank());
    let mut ratios = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            if i != j {
                ratios.push(AverageRatio {
                    numerator: a.policy,
                    denominator: b.policy,
                    ratio: a.stats.average / b.stats.average,
                });
            }
        }
    }
    Ok(ComparisonTable {
        config_hash: first.config_hash.clone(),
        scenario_hash: first.scenario_hash.clone(),
        horizon: first.horizon,
        rows,
        ratios,
    })
}

impl ComparisonTable {
    pub fn ratio(&self, numerator: PolicyKind, denominator: PolicyKind) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.numerator == numerator && r.denominator == denominator)
            .map(|r| r.ratio)
    }

    pub fn rows_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["policy", "max", "min", "average", "variance"])?;
        for r in &self.rows {
            let s = r.stats;
            w.write_record([
                r.policy.as_str().to_string(),
                s.max.to_string(),
                s.min.to_string(),
                s.average.to_string(),
                s.variance.to_string(),
            ])?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(with_hash_header(&self.config_hash, &body))
    }

    pub fn ratios_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["numerator", "denominator", "ratio"])?;
        for r in &self.ratios {
            w.write_record([r.numerator.as_str(), r.denominator.as_str(), &r.ratio.to_string()])?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(with_hash_header(&self.config_hash, &body))
    }

    /// Writes both CSVs and the rendered text table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(COMPARISON_FILE), &self.rows_csv()?)?;
        write_atomic(&dir.join(RATIOS_FILE), &self.ratios_csv()?)?;
        write_atomic(&dir.join(TABLE_FILE), self.to_string().as_bytes())
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "horizon {} slots, config {}",
            self.horizon,
            &self.config_hash[..12.min(self.config_hash.len())]
        )?;
        write!(f, "{:<10}", "")?;
        for r in &self.rows {
            write!(f, "{:>17}", r.policy.label())?;
        }
        writeln!(f)?;
        let lines: [(&str, Column); 4] = [
            ("Maximum", |s| s.max),
            ("Minimum", |s| s.min),
            ("Average", |s| s.average),
            ("Variance", |s| s.variance),
        ];
        for (name, get) in lines {
            write!(f, "{name:<10}")?;
            for r in &self.rows {
                write!(f, "{:>17.4}", get(&r.stats))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
