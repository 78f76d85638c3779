//! Table builders shared by the scoring benchmarks.

use qi_sentry::synth::{Distribution, SyntheticColumn};
use qi_sentry::{generate, SyntheticSpec, Table};

/// Column cardinalities cycled across the mixed-shape tables: from binary
/// flags up to near-identifiers.
pub const CARDINALITIES: [usize; 8] = [2, 5, 12, 100, 365, 2_000, 50_000, 1_000_000];

/// `columns` columns of mixed cardinality; every third column is Zipf-skewed.
pub fn mixed_table(rows: usize, columns: usize, seed: u64) -> Table {
    let spec = SyntheticSpec {
        name: format!("mixed_{rows}x{columns}"),
        rows,
        seed,
        columns: (0..columns)
            .map(|i| SyntheticColumn {
                name: format!("c{i}"),
                distinct_values: CARDINALITIES[i % CARDINALITIES.len()].min(rows.max(1)),
                distribution: if i % 3 == 0 {
                    Distribution::Zipf(1.1)
                } else {
                    Distribution::Uniform
                },
                class_hint: None,
            })
            .collect(),
    };
    generate(&spec).expect("valid benchmark spec")
}

/// Low-cardinality columns, so leave-one-out groupings stay far from discrete.
pub fn coarse_table(rows: usize, columns: usize, seed: u64) -> Table {
    generate(&SyntheticSpec::uniform(rows, columns, 3, seed)).expect("valid benchmark spec")
}
