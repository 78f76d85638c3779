//! Seeded synthetic tables with uniform or Zipf-skewed categorical columns.
//!
//! Each column draws from its own ChaCha8 stream (the spec seed, stream =
//! column index), so output depends only on the spec and not on how many
//! threads generate it.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Zipf};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassificationRules, ColumnClass, Rule};
use crate::error::{Error, Result};
use crate::table::{CellValue, Table};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Each of the distinct values equally likely, drawn with replacement.
    #[default]
    Uniform,
    /// Rank `k` drawn with probability proportional to `k^-s`.
    Zipf(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticColumn {
    pub name: String,
    pub distinct_values: usize,
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_hint: Option<ColumnClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    #[serde(default = "default_table_name")]
    pub name: String,
    pub rows: usize,
    pub columns: Vec<SyntheticColumn>,
    #[serde(default)]
    pub seed: u64,
}

fn default_table_name() -> String {
    "synthetic".to_owned()
}

impl SyntheticSpec {
    /// `columns` uniform columns `c0..`, each with `distinct` values.
    pub fn uniform(rows: usize, columns: usize, distinct: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            name: default_table_name(),
            rows,
            columns: (0..columns)
                .map(|i| SyntheticColumn {
                    name: format!("c{i}"),
                    distinct_values: distinct,
                    distribution: Distribution::Uniform,
                    class_hint: None,
                })
                .collect(),
            seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SyntheticSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
        SyntheticSpec::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return Err(Error::InvalidSpec("rows must be positive".into()));
        }
        if self.rows > u32::MAX as usize {
            return Err(Error::InvalidSpec(format!(
                "rows must not exceed {}",
                u32::MAX
            )));
        }
        if self.columns.is_empty() {
            return Err(Error::InvalidSpec("at least one column is required".into()));
        }
        for c in &self.columns {
            if c.name.trim().is_empty() {
                return Err(Error::InvalidSpec("column names must be non-empty".into()));
            }
            if c.distinct_values == 0 || c.distinct_values > u32::MAX as usize {
                return Err(Error::InvalidSpec(format!(
                    "column {}: distinct_values must be in 1..={}",
                    c.name,
                    u32::MAX
                )));
            }
            if let Distribution::Zipf(s) = c.distribution {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "column {}: zipf exponent must be positive, got {s}",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact-name rules reproducing every column's class hint.
    pub fn hint_rules(&self) -> ClassificationRules {
        let rules = self
            .columns
            .iter()
            .filter_map(|c| {
                c.class_hint.map(|class| {
                    Rule::new(&c.name, class)
                        .expect("validated column name")
                        .with_note("synthetic class hint")
                })
            })
            .collect();
        ClassificationRules::new(rules)
    }
}

fn sample_codes(column: &SyntheticColumn, rows: usize, seed: u64, stream: u64) -> Result<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = column.distinct_values;
    match column.distribution {
        Distribution::Uniform => Ok((0..rows).map(|_| rng.random_range(0..n as u32)).collect()),
        Distribution::Zipf(s) => {
            let zipf = Zipf::new(n as f64, s)
                .map_err(|e| Error::InvalidSpec(format!("column {}: {e}", column.name)))?;
            Ok((0..rows)
                .map(|_| {
                    let rank = zipf.sample(&mut rng) as u64;
                    (rank.clamp(1, n as u64) - 1) as u32
                })
                .collect())
        }
    }
}

/// Generates the table described by `spec`. Value `k` of a column renders as
/// the decimal string of `k`, so rank 0 is the most frequent Zipf value.
pub fn generate(spec: &SyntheticSpec) -> Result<Table> {
    spec.validate()?;
    let columns = spec
        .columns
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let codes = sample_codes(c, spec.rows, spec.seed, i as u64)?;
            let symbols: Vec<CellValue> = (0..c.distinct_values)
                .map(|k| CellValue::Present(k.to_string()))
                .collect();
            Ok((c.name.clone(), symbols, codes))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::from_coded_columns(spec.name.clone(), columns)
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
    for c in &spec.columns {
        if let Some(class) = c.class_hint {
            table = table.with_declared_class(&c.name, class)?;
        }
    }
    Ok(table)
}
