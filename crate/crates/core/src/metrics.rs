//! Per-column re-identification risk: uniqueness, equivalence-class influence
//! and their sum.
//!
//! * uniqueness(C) = |values of C occurring exactly once| / row_count
//! * N_E(S) = number of distinct row projections onto the column set S,
//!   with N_E(∅) = 1
//! * influence(C) = 1 − N_E(U − {C}) / N_E(U) for an influence universe U
//!   (all table columns unless a narrower universe is requested)
//!
//! Grouping works on the dictionary codes held by [`Table`]. A grouping over
//! a column list is built by successive refinement: each step maps the pair
//! (group id so far, next column's code) to a dense new id. Scoring a whole
//! universe computes one prefix chain and one suffix chain of refinements;
//! the grouping of U − {C_i} is then the pairing of prefix `i` with suffix
//! `i + 1`, so every leave-one-out count costs a single pass over the rows.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::classify::ClassifiedTable;
use crate::error::{Error, Result};
use crate::table::{Column, Table};

/// Above this many possible (group, code) pairs a refinement switches from a
/// direct lookup table to hashing.
const DIRECT_TABLE_LIMIT: u64 = 1 << 22;
const UNSEEN: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskScore {
    pub column: String,
    pub position: usize,
    pub uniqueness: f64,
    pub influence: f64,
    /// Re-identifiability score, always exactly `uniqueness + influence`.
    pub sum: f64,
}

impl RiskScore {
    pub fn new(
        column: impl Into<String>,
        position: usize,
        uniqueness: f64,
        influence: f64,
    ) -> Self {
        RiskScore {
            column: column.into(),
            position,
            uniqueness,
            influence,
            sum: uniqueness + influence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceCount {
    pub subset: Vec<String>,
    pub count: usize,
}

/// Which columns make up the universe U for influence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniversePolicy {
    #[default]
    AllColumns,
    PrimaryQisOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Dense group labels over the rows of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Grouping {
    ids: Vec<u32>,
    count: u32,
}

impl Grouping {
    fn single(rows: usize) -> Grouping {
        Grouping {
            ids: vec![0; rows],
            count: 1,
        }
    }

    fn of_column(col: &Column) -> Grouping {
        Grouping {
            ids: col.codes().to_vec(),
            count: col.cardinality() as u32,
        }
    }

    fn rows(&self) -> usize {
        self.ids.len()
    }

    fn is_discrete(&self) -> bool {
        self.count as usize == self.rows()
    }
}

fn refine(prev: &Arc<Grouping>, col: &Column) -> Arc<Grouping> {
    if prev.is_discrete() {
        return Arc::clone(prev);
    }
    if prev.count == 1 {
        return Arc::new(Grouping::of_column(col));
    }
    let card = col.cardinality() as u64;
    let codes = col.codes();
    let mut next = 0u32;
    let ids: Vec<u32> = if prev.count as u64 * card <= DIRECT_TABLE_LIMIT {
        let mut table = vec![UNSEEN; (prev.count as u64 * card) as usize];
        prev.ids
            .iter()
            .zip(codes)
            .map(|(&g, &c)| {
                let slot = &mut table[(g as u64 * card + c as u64) as usize];
                if *slot == UNSEEN {
                    *slot = next;
                    next += 1;
                }
                *slot
            })
            .collect()
    } else {
        let mut map: FxHashMap<u64, u32> = FxHashMap::default();
        map.reserve(prev.rows().min(1 << 20));
        prev.ids
            .iter()
            .zip(codes)
            .map(|(&g, &c)| {
                *map.entry(((g as u64) << 32) | c as u64).or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    Arc::new(Grouping { ids, count: next })
}

/// Number of distinct (left, right) label pairs, i.e. the class count of the
/// union of the two column sets.
fn joint_count(left: &Grouping, right: &Grouping) -> usize {
    if left.count == 1 {
        return right.count as usize;
    }
    if right.count == 1 {
        return left.count as usize;
    }
    if left.is_discrete() || right.is_discrete() {
        return left.rows();
    }
    let width = right.count as u64;
    let domain = left.count as u64 * width;
    if domain <= DIRECT_TABLE_LIMIT {
        let mut seen = vec![false; domain as usize];
        let mut count = 0usize;
        for (&l, &r) in left.ids.iter().zip(&right.ids) {
            let slot = &mut seen[(l as u64 * width + r as u64) as usize];
            if !*slot {
                *slot = true;
                count += 1;
            }
        }
        count
    } else {
        let mut seen: FxHashSet<u64> = FxHashSet::default();
        seen.reserve(left.rows().min(1 << 20));
        for (&l, &r) in left.ids.iter().zip(&right.ids) {
            seen.insert(((l as u64) << 32) | r as u64);
        }
        seen.len()
    }
}

fn group_columns(table: &Table, positions: &[usize]) -> Arc<Grouping> {
    let mut g = Arc::new(Grouping::single(table.row_count()));
    for &p in positions {
        g = refine(&g, &table.columns()[p]);
    }
    g
}

fn require_rows(table: &Table) -> Result<()> {
    if table.row_count() == 0 {
        Err(Error::MetricUndefined(format!(
            "table {} has no rows",
            table.name()
        )))
    } else {
        Ok(())
    }
}

fn resolve<S: AsRef<str>>(table: &Table, names: &[S]) -> Result<Vec<usize>> {
    let mut positions = names
        .iter()
        .map(|n| table.column_index(n.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    positions.sort_unstable();
    positions.dedup();
    Ok(positions)
}

/// Fraction of the column's cells whose value occurs exactly once.
pub fn uniqueness(table: &Table, column: &str) -> Result<f64> {
    let col = table.column(column)?;
    require_rows(table)?;
    Ok(column_uniqueness(col))
}

fn column_uniqueness(col: &Column) -> f64 {
    let mut freq = vec![0u32; col.cardinality()];
    for &c in col.codes() {
        freq[c as usize] = freq[c as usize].saturating_add(1);
    }
    let singletons = freq.iter().filter(|&&f| f == 1).count();
    singletons as f64 / col.len() as f64
}

/// N_E over `subset` (a set; duplicates are ignored). The empty subset has one class.
pub fn equivalence_class_count<S: AsRef<str>>(table: &Table, subset: &[S]) -> Result<usize> {
    let positions = resolve(table, subset)?;
    require_rows(table)?;
    Ok(class_count_at(table, &positions))
}

pub(crate) fn class_count_at(table: &Table, positions: &[usize]) -> usize {
    group_columns(table, positions).count as usize
}

pub fn equivalence_count<S: AsRef<str>>(table: &Table, subset: &[S]) -> Result<EquivalenceCount> {
    let positions = resolve(table, subset)?;
    require_rows(table)?;
    Ok(EquivalenceCount {
        subset: positions
            .iter()
            .map(|&p| table.columns()[p].name().to_owned())
            .collect(),
        count: class_count_at(table, &positions),
    })
}

/// `1 − N_E(universe − {column}) / N_E(universe)`.
pub fn influence<S: AsRef<str>>(table: &Table, column: &str, universe: &[S]) -> Result<f64> {
    let target = table.column_index(column)?;
    let universe = resolve(table, universe)?;
    if !universe.contains(&target) {
        return Err(Error::NotInUniverse {
            column: column.to_owned(),
        });
    }
    require_rows(table)?;
    let without: Vec<usize> = universe.iter().copied().filter(|&p| p != target).collect();
    let full = class_count_at(table, &universe);
    let reduced = class_count_at(table, &without);
    Ok(influence_ratio(reduced, full))
}

/// Influence of a column given N_E with and without it.
pub fn influence_ratio(reduced: usize, full: usize) -> f64 {
    1.0 - reduced as f64 / full as f64
}

/// Influence against every column of the table.
pub fn influence_all(table: &Table, column: &str) -> Result<f64> {
    let all: Vec<&str> = table.column_names().collect();
    influence(table, column, &all)
}

/// Scores `targets` (column positions) against the influence universe
/// `universe` (column positions). Every target must be in the universe.
/// Output follows column position.
pub fn score_positions(
    table: &Table,
    targets: &[usize],
    universe: &[usize],
    execution: Execution,
) -> Result<Vec<RiskScore>> {
    require_rows(table)?;
    let mut universe = universe.to_vec();
    universe.sort_unstable();
    universe.dedup();
    let mut targets = targets.to_vec();
    targets.sort_unstable();
    targets.dedup();
    if let Some(&bad) = universe.iter().find(|&&p| p >= table.column_count()) {
        return Err(Error::NoSuchColumn(format!("position {bad}")));
    }
    let mut slots = Vec::with_capacity(targets.len());
    for &t in &targets {
        match universe.binary_search(&t) {
            Ok(i) => slots.push(i),
            Err(_) => {
                let column = table
                    .columns()
                    .get(t)
                    .map(|c| c.name().to_owned())
                    .unwrap_or_else(|| format!("position {t}"));
                return Err(Error::NotInUniverse { column });
            }
        }
    }
    if targets.is_empty() {
        return Ok(Vec::new());
    }

    let columns = table.columns();
    let k = universe.len();
    let needs_suffix: Vec<bool> = {
        let mut v = vec![false; k + 1];
        for &i in &slots {
            v[i + 1] = true;
        }
        v
    };
    let needs_prefix: Vec<bool> = {
        let mut v = vec![false; k + 1];
        for &i in &slots {
            v[i] = true;
        }
        v
    };

    // suffix[j] groups universe[j..]
    let suffix_chain = || {
        let mut kept: Vec<Option<Arc<Grouping>>> = vec![None; k + 1];
        let mut g = Arc::new(Grouping::single(table.row_count()));
        if needs_suffix[k] {
            kept[k] = Some(Arc::clone(&g));
        }
        for j in (0..k).rev() {
            g = refine(&g, &columns[universe[j]]);
            if needs_suffix[j] {
                kept[j] = Some(Arc::clone(&g));
            }
        }
        kept
    };
    // prefix[j] groups universe[..j]; the full-universe count comes last.
    let prefix_chain = || {
        let mut kept: Vec<Option<Arc<Grouping>>> = vec![None; k + 1];
        let mut g = Arc::new(Grouping::single(table.row_count()));
        for j in 0..k {
            if needs_prefix[j] {
                kept[j] = Some(Arc::clone(&g));
            }
            g = refine(&g, &columns[universe[j]]);
        }
        (kept, g.count as usize)
    };

    let (counts, full) = match execution {
        Execution::Serial => {
            let suffixes = suffix_chain();
            let (prefixes, full) = prefix_chain();
            let counts = slots
                .iter()
                .map(|&i| joint(&prefixes[i], &suffixes[i + 1]))
                .collect();
            (counts, full)
        }
        Execution::Parallel => {
            let (suffixes, (prefixes, full)) = rayon::join(suffix_chain, prefix_chain);
            let counts = slots
                .par_iter()
                .map(|&i| joint(&prefixes[i], &suffixes[i + 1]))
                .collect();
            (counts, full)
        }
    };
    Ok(assemble(table, &targets, counts, full))
}

fn joint(left: &Option<Arc<Grouping>>, right: &Option<Arc<Grouping>>) -> usize {
    joint_count(
        left.as_deref().expect("prefix kept for every target"),
        right.as_deref().expect("suffix kept for every target"),
    )
}

fn assemble(table: &Table, targets: &[usize], reduced: Vec<usize>, full: usize) -> Vec<RiskScore> {
    targets
        .iter()
        .zip(reduced)
        .map(|(&p, r)| {
            let col = &table.columns()[p];
            RiskScore::new(
                col.name(),
                p,
                column_uniqueness(col),
                influence_ratio(r, full),
            )
        })
        .collect()
}

/// Scores every primary QI of `classified`, using `Execution::Parallel`.
pub fn score_columns(
    classified: &ClassifiedTable,
    policy: UniversePolicy,
) -> Result<Vec<RiskScore>> {
    score_columns_with(classified, policy, Execution::Parallel)
}

pub fn score_columns_with(
    classified: &ClassifiedTable,
    policy: UniversePolicy,
    execution: Execution,
) -> Result<Vec<RiskScore>> {
    let table = classified.table();
    let targets: Vec<usize> = classified
        .assignments()
        .iter()
        .filter(|a| a.class == crate::classify::ColumnClass::Qi)
        .map(|a| a.position)
        .collect();
    let universe: Vec<usize> = match policy {
        UniversePolicy::AllColumns => (0..table.column_count()).collect(),
        UniversePolicy::PrimaryQisOnly => targets.clone(),
    };
    score_positions(table, &targets, &universe, execution)
}

/// Scores every column of `table` against the whole table.
pub fn score_all_columns(table: &Table, execution: Execution) -> Result<Vec<RiskScore>> {
    let all: Vec<usize> = (0..table.column_count()).collect();
    score_positions(table, &all, &all, execution)
}

/// Columns with a strictly positive re-identifiability score, in input order.
pub fn secondary_qis(scores: &[RiskScore]) -> Vec<String> {
    scores
        .iter()
        .filter(|s| s.sum > 0.0)
        .map(|s| s.column.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify, ClassificationRules, ColumnClass, Rule};
    use crate::table::{ingest_delimited, CellValue, IngestOptions};

    const EXAMPLE: &str = "Weight,Age,Gender,Zipcode\n\
        72,45,M,75145\n\
        72,45,M,75145\n\
        58,21,M,47853\n\
        45,21,F,47853\n\
        45,64,F,47853\n";

    fn worked_example() -> Table {
        ingest_delimited(EXAMPLE.as_bytes(), &IngestOptions::named("worked_example")).unwrap()
    }

    fn single(values: &[&str]) -> Table {
        Table::from_columns(
            "t",
            vec![(
                "c",
                values
                    .iter()
                    .map(|&v| CellValue::from(v))
                    .collect::<Vec<_>>(),
            )],
        )
        .unwrap()
    }

    #[test]
    fn worked_example_uniqueness() {
        let t = worked_example();
        assert_eq!(uniqueness(&t, "Weight").unwrap(), 0.2);
        assert_eq!(uniqueness(&t, "Age").unwrap(), 0.2);
        assert_eq!(uniqueness(&t, "Gender").unwrap(), 0.0);
        assert_eq!(uniqueness(&t, "Zipcode").unwrap(), 0.0);
    }

    #[test]
    fn uniqueness_edge_cases() {
        assert_eq!(uniqueness(&single(&["a", "a", "a"]), "c").unwrap(), 0.0);
        assert_eq!(uniqueness(&single(&["a"]), "c").unwrap(), 1.0);
        assert_eq!(
            uniqueness(&single(&["a", "b", "c", "d"]), "c").unwrap(),
            1.0
        );
        // Missing cells share one symbol
        assert_eq!(
            uniqueness(&single(&["", "NA", "x"]), "c").unwrap(),
            1.0 / 3.0
        );
        assert!(matches!(
            uniqueness(&worked_example(), "Height"),
            Err(Error::NoSuchColumn(_))
        ));
        let empty = ingest_delimited("c\n".as_bytes(), &IngestOptions::default()).unwrap();
        assert!(matches!(
            uniqueness(&empty, "c"),
            Err(Error::MetricUndefined(_))
        ));
    }

    #[test]
    fn worked_example_equivalence_classes() {
        let t = worked_example();
        assert_eq!(
            equivalence_class_count(&t, &["Weight", "Age", "Gender", "Zipcode"]).unwrap(),
            4
        );
        assert_eq!(
            equivalence_class_count(&t, &["Age", "Gender", "Zipcode"]).unwrap(),
            4
        );
        assert_eq!(
            equivalence_class_count(&t, &["Weight", "Gender", "Zipcode"]).unwrap(),
            3
        );
        assert_eq!(equivalence_class_count::<&str>(&t, &[]).unwrap(), 1);
        assert_eq!(equivalence_class_count(&t, &["Age", "age"]).unwrap(), 3);
        let e = equivalence_count(&t, &["Zipcode", "Gender"]).unwrap();
        assert_eq!(e.subset, vec!["Gender", "Zipcode"]);
        assert_eq!(e.count, 3);
        let empty = ingest_delimited("c\n".as_bytes(), &IngestOptions::default()).unwrap();
        assert!(matches!(
            equivalence_class_count::<&str>(&empty, &[]),
            Err(Error::MetricUndefined(_))
        ));
    }

    #[test]
    fn worked_example_influence() {
        let t = worked_example();
        assert_eq!(influence_all(&t, "Weight").unwrap(), 0.0);
        assert_eq!(influence_all(&t, "Age").unwrap(), 0.25);
        assert_eq!(influence_all(&t, "Gender").unwrap(), 0.0);
        assert_eq!(influence_all(&t, "Zipcode").unwrap(), 0.0);
    }

    #[test]
    fn single_column_influence_uses_empty_subset() {
        let t = single(&["a", "b", "c"]);
        let v = influence_all(&t, "c").unwrap();
        assert_eq!(v, 1.0 - 1.0 / 3.0);
    }

    #[test]
    fn influence_requires_membership() {
        let t = worked_example();
        assert!(matches!(
            influence(&t, "Age", &["Weight", "Gender"]),
            Err(Error::NotInUniverse { .. })
        ));
        assert!(matches!(
            influence(&t, "Age", &["Age", "Height"]),
            Err(Error::NoSuchColumn(_))
        ));
    }

    fn all_qi(table: Table) -> ClassifiedTable {
        classify(
            table,
            &ClassificationRules::new(vec![Rule::new("*", ColumnClass::Qi).unwrap()]),
        )
    }

    #[test]
    fn worked_example_scores_and_secondary_selection() {
        let scores = score_columns(&all_qi(worked_example()), UniversePolicy::AllColumns).unwrap();
        let got: Vec<_> = scores
            .iter()
            .map(|s| (s.column.as_str(), s.uniqueness, s.influence, s.sum))
            .collect();
        assert_eq!(
            got,
            vec![
                ("Weight", 0.2, 0.0, 0.2),
                ("Age", 0.2, 0.25, 0.45),
                ("Gender", 0.0, 0.0, 0.0),
                ("Zipcode", 0.0, 0.0, 0.0),
            ]
        );
        assert_eq!(secondary_qis(&scores), vec!["Weight", "Age"]);
    }

    #[test]
    fn distinct_single_column_scores() {
        for k in 1..6usize {
            let values: Vec<String> = (0..k).map(|i| i.to_string()).collect();
            let refs: Vec<&str> = values.iter().map(String::as_str).collect();
            let scores = score_columns(&all_qi(single(&refs)), UniversePolicy::AllColumns).unwrap();
            let inv = 1.0 / k as f64;
            assert_eq!(scores[0].uniqueness, 1.0);
            assert_eq!(scores[0].influence, 1.0 - inv);
            assert_eq!(scores[0].sum, 1.0 + (1.0 - inv));
        }
    }

    #[test]
    fn universe_policy_narrows_influence() {
        // id is unique and therefore makes every other column irrelevant in the full universe
        let t = Table::from_columns(
            "t",
            vec![
                ("id", vec!["1".into(), "2".into(), "3".into(), "4".into()]),
                ("sex", vec!["M".into(), "M".into(), "F".into(), "F".into()]),
                ("zip", vec!["1".into(), "2".into(), "1".into(), "2".into()]),
            ],
        )
        .unwrap()
        .with_declared_class("id", ColumnClass::Did)
        .unwrap();
        let rules = ClassificationRules::new(vec![Rule::new("*", ColumnClass::Qi).unwrap()]);
        let c = classify(t, &rules);
        let all = score_columns(&c, UniversePolicy::AllColumns).unwrap();
        assert_eq!(
            all.iter().map(|s| s.influence).collect::<Vec<_>>(),
            vec![0.0, 0.0]
        );
        let qi = score_columns(&c, UniversePolicy::PrimaryQisOnly).unwrap();
        assert_eq!(
            qi.iter().map(|s| s.influence).collect::<Vec<_>>(),
            vec![0.5, 0.5]
        );
    }

    #[test]
    fn no_primary_qis_means_no_scores() {
        let c = classify(worked_example(), &ClassificationRules::default());
        assert!(score_columns(&c, UniversePolicy::AllColumns)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn secondary_threshold_is_strict() {
        let scores = vec![
            RiskScore::new("a", 0, 0.0, 0.0),
            RiskScore::new("b", 1, 0.0, 0.0008),
            RiskScore::new("c", 2, 0.0003, 0.0),
        ];
        assert_eq!(secondary_qis(&scores), vec!["b", "c"]);
        assert!(secondary_qis(&scores[..1]).is_empty());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let t = worked_example();
        let a = score_all_columns(&t, Execution::Serial).unwrap();
        let b = score_all_columns(&t, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn direct_and_hashed_refinement_agree() {
        // wide cardinalities force the hashed path
        let n = 5000usize;
        let a: Vec<CellValue> = (0..n)
            .map(|i| CellValue::Present((i % 2500).to_string()))
            .collect();
        let b: Vec<CellValue> = (0..n)
            .map(|i| CellValue::Present((i % 2003).to_string()))
            .collect();
        let t = Table::from_columns("t", vec![("a", a), ("b", b)]).unwrap();
        let naive: FxHashSet<(String, String)> = t
            .rows()
            .into_iter()
            .map(|r| (r[0].to_string(), r[1].to_string()))
            .collect();
        assert_eq!(
            equivalence_class_count(&t, &["a", "b"]).unwrap(),
            naive.len()
        );
    }
}
