//! Property checks shared by the core property tests and the acceptance gate.
//! Each `check_*` runs one invariant through a caller-supplied runner.

#![allow(dead_code)]

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use qi_sentry::metrics::{self, Execution};
use qi_sentry::oracle::{self, GroupingEngine};
use qi_sentry::{
    classify, equivalence_class_count, ingest_delimited, score_reid_ability, score_understanding,
    select_final_qis, threshold_for, write_delimited, AssessmentForm, CellValue,
    ClassificationRules, ColumnClass, IngestOptions, LinkageGrade, RequestorScore, RiskScore, Rule,
    SelectionThreshold, Table, UserGrade,
};

pub const CASES: u32 = 500;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn deterministic_runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        config(cases),
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

pub type Check = fn(&mut TestRunner) -> Result<(), String>;

/// Row-major cells; symbol 0 is a missing cell.
pub type Grid = Vec<Vec<u8>>;

pub fn grid(max_rows: usize, max_cols: usize, alphabet: u8) -> impl Strategy<Value = Grid> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| vec(vec(0..alphabet, c), r))
}

pub fn small_grid() -> impl Strategy<Value = Grid> {
    grid(20, 6, 4)
}

pub fn table_from_grid(name: &str, grid: &Grid) -> Table {
    let cols = grid[0].len();
    let header: Vec<String> = (0..cols).map(|c| format!("c{c}")).collect();
    let rows = grid
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| match v {
                    0 => CellValue::Missing,
                    v => CellValue::Present(format!("v{v}")),
                })
                .collect()
        })
        .collect();
    Table::from_rows(name, &header, rows).unwrap()
}

fn scores(table: &Table, execution: Execution) -> Vec<RiskScore> {
    metrics::score_all_columns(table, execution).unwrap()
}

fn same_bits(a: &RiskScore, b: &RiskScore) -> bool {
    a.column == b.column
        && a.uniqueness.to_bits() == b.uniqueness.to_bits()
        && a.influence.to_bits() == b.influence.to_bits()
        && a.sum.to_bits() == b.sum.to_bits()
}

fn outcome(
    result: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>,
) -> Result<(), String> {
    result.map_err(|e| e.to_string())
}

pub fn check_oracle_agreement(runner: &mut TestRunner) -> Result<(), String> {
    outcome(runner.run(&(small_grid(), any::<bool>()), |(g, serial)| {
        let t = table_from_grid("t", &g);
        let execution = if serial {
            Execution::Serial
        } else {
            Execution::Parallel
        };
        let verdict = oracle::verify(&t, &GroupingEngine { execution }).unwrap();
        prop_assert!(verdict.is_ok(), "{}", verdict.unwrap_err());
        Ok(())
    }))
}

pub fn check_metric_ranges(runner: &mut TestRunner) -> Result<(), String> {
    outcome(runner.run(&small_grid(), |g| {
        let t = table_from_grid("t", &g);
        for s in scores(&t, Execution::Serial) {
            prop_assert!(
                (0.0..=1.0).contains(&s.uniqueness),
                "uniqueness {}",
                s.uniqueness
            );
            prop_assert!(
                (0.0..1.0).contains(&s.influence),
                "influence {}",
                s.influence
            );
            prop_assert_eq!(s.sum.to_bits(), (s.uniqueness + s.influence).to_bits());
        }
        Ok(())
    }))
}

pub fn check_subset_monotone(runner: &mut TestRunner) -> Result<(), String> {
    outcome(
        runner.run(&(small_grid(), any::<u8>(), any::<u8>()), |(g, a, b)| {
            let t = table_from_grid("t", &g);
            let pick = |mask: u8| -> Vec<String> {
                (0..t.column_count())
                    .filter(|c| mask & (1 << c) != 0)
                    .map(|c| format!("c{c}"))
                    .collect()
            };
            let smaller = pick(a & b);
            let larger = pick(b);
            let small_count = equivalence_class_count(&t, &smaller).unwrap();
            let large_count = equivalence_class_count(&t, &larger).unwrap();
            prop_assert!(
                small_count <= large_count,
                "{smaller:?}={small_count} > {larger:?}={large_count}"
            );
            prop_assert!(small_count >= 1 && large_count <= t.row_count());
            Ok(())
        }),
    )
}

pub fn check_row_permutation(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = small_grid().prop_flat_map(|g| (Just(g.clone()), Just(g).prop_shuffle()));
    outcome(runner.run(&strategy, |(g, shuffled)| {
        let before = scores(&table_from_grid("t", &g), Execution::Serial);
        let after = scores(&table_from_grid("t", &shuffled), Execution::Serial);
        for (x, y) in before.iter().zip(&after) {
            prop_assert!(same_bits(x, y), "{x:?} vs {y:?}");
        }
        Ok(())
    }))
}

pub fn check_column_permutation(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = small_grid().prop_flat_map(|g| {
        let order: Vec<usize> = (0..g[0].len()).collect();
        (Just(g), Just(order).prop_shuffle())
    });
    outcome(runner.run(&strategy, |(g, order)| {
        let t = table_from_grid("t", &g);
        let header: Vec<String> = order.iter().map(|&c| format!("c{c}")).collect();
        let rows = t
            .rows()
            .into_iter()
            .map(|r| order.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let permuted = Table::from_rows("t", &header, rows).unwrap();
        let before = scores(&t, Execution::Serial);
        let after = scores(&permuted, Execution::Serial);
        for s in &before {
            let other = after.iter().find(|o| o.column == s.column).unwrap();
            prop_assert!(same_bits(s, other), "{s:?} vs {other:?}");
        }
        Ok(())
    }))
}

pub fn check_duplication(runner: &mut TestRunner) -> Result<(), String> {
    outcome(runner.run(&small_grid(), |g| {
        let doubled: Grid = g.iter().chain(&g).cloned().collect();
        let before = scores(&table_from_grid("t", &g), Execution::Serial);
        let after = scores(&table_from_grid("t", &doubled), Execution::Serial);
        for (x, y) in before.iter().zip(&after) {
            prop_assert_eq!(y.uniqueness, 0.0);
            prop_assert_eq!(x.influence.to_bits(), y.influence.to_bits());
        }
        Ok(())
    }))
}

pub fn check_serial_parallel(runner: &mut TestRunner) -> Result<(), String> {
    outcome(runner.run(&grid(200, 8, 6), |g| {
        let t = table_from_grid("t", &g);
        let serial = scores(&t, Execution::Serial);
        let parallel = scores(&t, Execution::Parallel);
        prop_assert_eq!(serial.len(), parallel.len());
        for (x, y) in serial.iter().zip(&parallel) {
            prop_assert!(same_bits(x, y), "{x:?} vs {y:?}");
        }
        Ok(())
    }))
}

fn sums() -> impl Strategy<Value = Vec<RiskScore>> {
    vec(0.0f64..2.0, 0..12).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, s)| RiskScore::new(format!("q{i}"), i, s / 2.0, s / 2.0))
            .collect()
    })
}

pub fn check_threshold_anti_monotone(runner: &mut TestRunner) -> Result<(), String> {
    outcome(
        runner.run(&(sums(), 0.0f64..=2.0, 0.0f64..=2.0), |(scores, x, y)| {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let loose = select_final_qis(&scores, SelectionThreshold::custom(lo).unwrap());
            let strict = select_final_qis(&scores, SelectionThreshold::custom(hi).unwrap());
            prop_assert!(strict.iter().all(|c| loose.contains(c)));
            let by_grade = |g| select_final_qis(&scores, threshold_for(g));
            let (low, middle, high) = (
                by_grade(UserGrade::Low),
                by_grade(UserGrade::Middle),
                by_grade(UserGrade::High),
            );
            prop_assert!(low.iter().all(|c| middle.contains(c)));
            prop_assert!(middle.iter().all(|c| high.contains(c)));
            Ok(())
        }),
    )
}

pub fn form() -> impl Strategy<Value = AssessmentForm> {
    (
        prop_oneof![
            Just(LinkageGrade::Low),
            Just(LinkageGrade::Mid),
            Just(LinkageGrade::High)
        ],
        any::<[bool; 3]>(),
        any::<bool>(),
        any::<[bool; 6]>(),
        any::<[bool; 3]>(),
        0.0f64..15.0,
    )
        .prop_map(
            |(linkage, intent, external_linkage, protection, knowledge, tenure_years)| {
                AssessmentForm {
                    linkage,
                    intent,
                    external_linkage,
                    protection,
                    knowledge,
                    tenure_years,
                }
            },
        )
}

fn components(f: &AssessmentForm) -> RequestorScore {
    RequestorScore::from_components(
        f.linkage.points(),
        score_reid_ability(&f.intent, f.external_linkage, &f.protection),
        score_understanding(&f.knowledge, f.tenure_years).unwrap(),
    )
}

/// Moves indicator `which` (0..=15) one step towards the risky answer.
fn riskier(f: &AssessmentForm, which: usize, extra_years: f64) -> AssessmentForm {
    let mut g = f.clone();
    match which {
        0 => {
            g.linkage = match f.linkage {
                LinkageGrade::Low => LinkageGrade::Mid,
                _ => LinkageGrade::High,
            }
        }
        1..=3 => g.intent[which - 1] = true,
        4 => g.external_linkage = true,
        5..=10 => g.protection[which - 5] = false,
        11..=13 => g.knowledge[which - 11] = true,
        _ => g.tenure_years += extra_years,
    }
    g
}

pub fn check_assessment_monotone(runner: &mut TestRunner) -> Result<(), String> {
    outcome(
        runner.run(&(form(), 0usize..15, 0.0f64..12.0), |(f, which, years)| {
            let before = components(&f);
            let after = components(&riskier(&f, which, years));
            prop_assert!(after.linkage_points >= before.linkage_points);
            prop_assert!(after.reid_ability_points >= before.reid_ability_points);
            prop_assert!(after.understanding_points >= before.understanding_points);
            prop_assert!(after.average >= before.average);
            prop_assert!(
                after.grade >= before.grade,
                "{:?} -> {:?}",
                before.grade,
                after.grade
            );
            prop_assert!([1, 5, 10].contains(&before.linkage_points));
            prop_assert!(before.reid_ability_points <= 10 && before.understanding_points <= 10);
            prop_assert!(before.average >= 1.0 / 3.0 && before.average <= 10.0);
            Ok(())
        }),
    )
}

fn raw_cell() -> impl Strategy<Value = String> {
    prop_oneof![
        8 => "[ a-zA-Z0-9,;\"'\t\\.-]{0,8}",
        1 => Just("NA".to_owned()),
        1 => Just(" NA ".to_owned()),
        1 => "[a-z]{1,3}\n[a-z]{1,3}",
    ]
}

fn raw_table() -> impl Strategy<Value = (usize, Vec<Vec<String>>)> {
    (1usize..6, 0usize..12).prop_flat_map(|(c, r)| (Just(c), vec(vec(raw_cell(), c), r)))
}

pub fn check_ingest_round_trip(runner: &mut TestRunner) -> Result<(), String> {
    outcome(runner.run(&raw_table(), |(cols, rows)| {
        let header: Vec<String> = (0..cols).map(|c| format!("h{c}")).collect();
        let cells = rows
            .iter()
            .map(|r| r.iter().map(|v| CellValue::canonical(v, "NA")).collect())
            .collect();
        let table = Table::from_rows("t", &header, cells).unwrap();
        let options = IngestOptions::named("t");
        let mut bytes = Vec::new();
        write_delimited(&table, &mut bytes, b',', "NA").unwrap();
        let first = ingest_delimited(bytes.as_slice(), &options).unwrap();
        let second = ingest_delimited(bytes.as_slice(), &options).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(&first, &table);
        Ok(())
    }))
}

pub fn check_canonical_idempotent(runner: &mut TestRunner) -> Result<(), String> {
    outcome(runner.run(&"\\PC{0,12}", |raw| {
        let once = CellValue::canonical(&raw, "NA");
        let again = match &once {
            CellValue::Present(v) => CellValue::canonical(v, "NA"),
            CellValue::Missing => CellValue::canonical("NA", "NA"),
        };
        prop_assert_eq!(&once, &again);
        if let CellValue::Present(v) = &once {
            prop_assert_eq!(v.trim_ascii(), v.as_str());
        }
        Ok(())
    }))
}

fn class() -> impl Strategy<Value = ColumnClass> {
    prop::sample::select(ColumnClass::ALL.to_vec())
}

fn rules() -> impl Strategy<Value = ClassificationRules> {
    (vec(("[ab]{1,2}[*?]?", class()), 0..6), class()).prop_map(|(rules, default_class)| {
        let mut r = ClassificationRules::new(
            rules
                .into_iter()
                .map(|(p, c)| Rule::new(&p, c).unwrap())
                .collect(),
        );
        r.default_class = default_class;
        r
    })
}

pub fn check_classification_partition(runner: &mut TestRunner) -> Result<(), String> {
    let names = prop::collection::btree_set("[ab]{1,3}", 1..8);
    outcome(runner.run(&(names, rules()), |(names, rules)| {
        let n = names.len();
        let columns: Vec<(String, Vec<CellValue>)> = names
            .into_iter()
            .map(|c| (c, vec![CellValue::from("x")]))
            .collect();
        let table = Table::from_columns("t", columns).unwrap();
        let first = classify(table.clone(), &rules);
        let second = classify(table, &rules);
        prop_assert_eq!(first.assignments(), second.assignments());
        prop_assert_eq!(first.assignments().len(), n);
        prop_assert_eq!(first.census().total(), n);
        for (i, a) in first.assignments().iter().enumerate() {
            prop_assert_eq!(a.position, i);
            let expected = rules
                .first_match(&a.column)
                .map(|k| rules.rules[k].assign)
                .unwrap_or(rules.default_class);
            prop_assert_eq!(a.class, expected);
        }
        let qis: Vec<&str> = first
            .assignments()
            .iter()
            .filter(|a| a.class == ColumnClass::Qi)
            .map(|a| a.column.as_str())
            .collect();
        prop_assert_eq!(first.primary_qis(), qis);
        Ok(())
    }))
}

/// Every property the acceptance gate requires, by name.
pub const ACCEPTANCE_PROPERTIES: &[(&str, Check)] = &[
    ("metric ranges", check_metric_ranges),
    ("subset monotonicity", check_subset_monotone),
    ("row permutation invariance", check_row_permutation),
    ("column permutation invariance", check_column_permutation),
    ("row duplication", check_duplication),
    ("threshold anti-monotonicity", check_threshold_anti_monotone),
    ("assessment monotonicity", check_assessment_monotone),
];
