//! Brute-force reference implementation of the risk metrics.
//!
//! Everything here works on materialized rows and compares cell values
//! pairwise, O(n²·m). It shares nothing with the code-based grouping engine
//! in [`crate::metrics`] except the [`CellValue`] type, and exists so the
//! engine can be checked against it (see [`verify`]).

use std::fmt;

use crate::error::Result;
use crate::metrics::{self, Execution, RiskScore};
use crate::table::{CellValue, Table};

/// Number of equivalence classes of `rows` projected onto `subset`.
pub fn pairwise_class_count(rows: &[Vec<CellValue>], subset: &[usize]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let same = |a: &[CellValue], b: &[CellValue]| subset.iter().all(|&c| a[c] == b[c]);
    (0..rows.len())
        .filter(|&i| !(0..i).any(|j| same(&rows[i], &rows[j])))
        .count()
}

pub fn pairwise_uniqueness(rows: &[Vec<CellValue>], column: usize) -> f64 {
    let n = rows.len();
    let singletons = (0..n)
        .filter(|&i| {
            (0..n)
                .filter(|&j| rows[j][column] == rows[i][column])
                .count()
                == 1
        })
        .count();
    singletons as f64 / n as f64
}

pub fn pairwise_influence(rows: &[Vec<CellValue>], column: usize, universe: &[usize]) -> f64 {
    let without: Vec<usize> = universe.iter().copied().filter(|&c| c != column).collect();
    let full = pairwise_class_count(rows, universe);
    let reduced = pairwise_class_count(rows, &without);
    1.0 - reduced as f64 / full as f64
}

/// The computations a grouping engine must agree with the oracle on.
pub trait MetricEngine {
    fn class_count(&self, table: &Table, subset: &[usize]) -> Result<usize>;
    /// Scores for every column of `universe`, against `universe`.
    fn scores(&self, table: &Table, universe: &[usize]) -> Result<Vec<RiskScore>>;
}

/// The production engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct GroupingEngine {
    pub execution: Execution,
}

impl MetricEngine for GroupingEngine {
    fn class_count(&self, table: &Table, subset: &[usize]) -> Result<usize> {
        let names: Vec<&str> = subset.iter().map(|&p| table.columns()[p].name()).collect();
        metrics::equivalence_class_count(table, &names)
    }

    fn scores(&self, table: &Table, universe: &[usize]) -> Result<Vec<RiskScore>> {
        metrics::score_positions(table, universe, universe, self.execution)
    }
}

/// An engine that miscounts whenever two or more columns are grouped. Used
/// to confirm that [`verify`] actually detects divergence.
#[derive(Debug, Clone, Copy, Default)]
pub struct MutantEngine;

impl MetricEngine for MutantEngine {
    fn class_count(&self, table: &Table, subset: &[usize]) -> Result<usize> {
        let honest = GroupingEngine::default().class_count(table, subset)?;
        Ok(if subset.len() >= 2 {
            honest + 1
        } else {
            honest
        })
    }

    fn scores(&self, table: &Table, universe: &[usize]) -> Result<Vec<RiskScore>> {
        let mut scores = GroupingEngine::default().scores(table, universe)?;
        for s in &mut scores {
            *s = RiskScore::new(
                s.column.clone(),
                s.position,
                s.uniqueness,
                s.influence * 0.5,
            );
        }
        Ok(scores)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Divergence {
    ClassCount {
        subset: Vec<String>,
        engine: usize,
        oracle: usize,
    },
    Metric {
        column: String,
        metric: &'static str,
        engine: f64,
        oracle: f64,
    },
    ScoreSet {
        engine: Vec<String>,
        oracle: Vec<String>,
    },
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::ClassCount {
                subset,
                engine,
                oracle,
            } => write!(
                f,
                "equivalence-class count over {{{}}}: engine {engine}, oracle {oracle}",
                subset.join(", ")
            ),
            Divergence::Metric {
                column,
                metric,
                engine,
                oracle,
            } => write!(
                f,
                "{metric} of {column}: engine {engine:?}, oracle {oracle:?}"
            ),
            Divergence::ScoreSet { engine, oracle } => write!(
                f,
                "scored columns differ: engine [{}], oracle [{}]",
                engine.join(", "),
                oracle.join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub class_counts_checked: usize,
    pub columns_checked: usize,
}

/// Subsets are enumerated exhaustively up to this many universe columns;
/// wider universes check only the full and leave-one-out subsets.
pub const EXHAUSTIVE_SUBSET_LIMIT: usize = 10;

/// Compares `engine` with the oracle on `table`: equivalence-class counts,
/// and every column's uniqueness, influence and sum against the whole table.
/// Values must match exactly. Returns the first divergence found.
pub fn verify(
    table: &Table,
    engine: &dyn MetricEngine,
) -> Result<std::result::Result<VerifyReport, Divergence>> {
    let universe: Vec<usize> = (0..table.column_count()).collect();
    let rows = table.rows();
    let name = |p: usize| table.columns()[p].name().to_owned();
    let mut report = VerifyReport::default();

    let subsets: Vec<Vec<usize>> = if universe.len() <= EXHAUSTIVE_SUBSET_LIMIT {
        (0u32..1 << universe.len())
            .map(|mask| {
                universe
                    .iter()
                    .copied()
                    .filter(|&c| mask & (1 << c) != 0)
                    .collect()
            })
            .collect()
    } else {
        std::iter::once(universe.clone())
            .chain(
                universe
                    .iter()
                    .map(|&drop| universe.iter().copied().filter(|&c| c != drop).collect()),
            )
            .collect()
    };
    for subset in subsets {
        let engine_count = engine.class_count(table, &subset)?;
        let oracle_count = pairwise_class_count(&rows, &subset);
        report.class_counts_checked += 1;
        if engine_count != oracle_count {
            return Ok(Err(Divergence::ClassCount {
                subset: subset.iter().map(|&p| name(p)).collect(),
                engine: engine_count,
                oracle: oracle_count,
            }));
        }
    }

    let scores = engine.scores(table, &universe)?;
    let scored: Vec<String> = scores.iter().map(|s| s.column.clone()).collect();
    let expected: Vec<String> = universe.iter().map(|&p| name(p)).collect();
    if scored != expected {
        return Ok(Err(Divergence::ScoreSet {
            engine: scored,
            oracle: expected,
        }));
    }
    for (score, &p) in scores.iter().zip(&universe) {
        let u = pairwise_uniqueness(&rows, p);
        let i = pairwise_influence(&rows, p, &universe);
        for (metric, engine_value, oracle_value) in [
            ("uniqueness", score.uniqueness, u),
            ("influence", score.influence, i),
            ("sum", score.sum, u + i),
        ] {
            if engine_value.to_bits() != oracle_value.to_bits() {
                return Ok(Err(Divergence::Metric {
                    column: name(p),
                    metric,
                    engine: engine_value,
                    oracle: oracle_value,
                }));
            }
        }
        report.columns_checked += 1;
    }
    Ok(Ok(report))
}
