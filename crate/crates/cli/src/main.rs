//! `qi-sentry`: classify columns, score quasi-identifiers, grade a data
//! requestor and select the quasi-identifiers to de-identify.
//!
//! Exit status is 0 on success, 1 when the oracle finds a divergence and 2 on
//! any input or configuration error.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qi_sentry::metrics::{self, Execution, UniversePolicy};
use qi_sentry::oracle::{self, GroupingEngine, MetricEngine, MutantEngine};
use qi_sentry::render::{self, TableScores};
use qi_sentry::synth::Distribution;
use qi_sentry::{
    build_report, classify, generate, grade_requestor, ingest_delimited, write_delimited,
    AssessmentForm, ClassificationRules, ClassifiedTable, IngestOptions, SyntheticSpec, Table,
};

#[derive(Parser)]
#[command(
    name = "qi-sentry",
    version,
    about = "Quasi-identifier selection for tabular clinical data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every column as DID, QI, SA or NSA and print the census.
    Classify {
        #[command(flatten)]
        input: Inputs,
        #[command(flatten)]
        rules: RulesArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Score each primary QI by uniqueness plus influence.
    Score {
        #[command(flatten)]
        input: Inputs,
        #[command(flatten)]
        rules: RulesArg,
        #[arg(long, value_enum, default_value_t = Universe::All)]
        universe: Universe,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Grade a data requestor from an assessment form.
    Assess {
        #[arg(long)]
        assessment: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the whole pipeline and report the final QIs.
    Select {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        rules: RulesArg,
        #[arg(long)]
        assessment: PathBuf,
        /// Use this threshold instead of the grade-derived one; must be in [0, 2].
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value_t = Universe::All)]
        universe: Universe,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Omit the generation timestamp so identical inputs give identical output.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Write a seeded synthetic table as delimited text.
    Generate(GenerateArgs),
    /// Check the grouping engine against the pairwise oracle on a table.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Check a deliberately wrong engine instead, to confirm divergence is caught.
        #[arg(long, hide = true)]
        mutant: bool,
    },
}

#[derive(Args)]
struct ReadOptions {
    /// Field delimiter: one ASCII character, or "tab".
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Cell text read as a missing value, besides the empty cell.
    #[arg(long, default_value = qi_sentry::table::DEFAULT_NA_TOKEN)]
    na_token: String,
}

#[derive(Args)]
struct Inputs {
    /// Delimited table with a header row; "-" reads stdin. Repeatable.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    read: ReadOptions,
}

#[derive(Args)]
struct Input {
    /// Delimited table with a header row; "-" reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    read: ReadOptions,
}

#[derive(Args)]
struct RulesArg {
    /// Classification rules file; the built-in rules apply when neither this nor QI_SENTRY_RULES is set.
    #[arg(long, env = "QI_SENTRY_RULES")]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON table spec; overrides the shape flags.
    #[arg(long, conflicts_with_all = ["rows", "columns", "distinct", "zipf"])]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    rows: usize,
    #[arg(long, default_value_t = 4)]
    columns: usize,
    /// Distinct values per column.
    #[arg(long, default_value_t = 10)]
    distinct: usize,
    /// Zipf exponent; values are uniform when absent.
    #[arg(long)]
    zipf: Option<f64>,
    /// Overrides the spec seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    #[arg(long, default_value = qi_sentry::table::DEFAULT_NA_TOKEN)]
    na_token: String,
    /// Also write rules reproducing the spec's class hints to this file.
    #[arg(long)]
    rules_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Universe {
    /// Every column of the table.
    All,
    /// Only the primary quasi-identifiers.
    Qi,
}

impl From<Universe> for UniversePolicy {
    fn from(u: Universe) -> Self {
        match u {
            Universe::All => UniversePolicy::AllColumns,
            Universe::Qi => UniversePolicy::PrimaryQisOnly,
        }
    }
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!(
            "expected one ASCII character or \"tab\", got {s:?}"
        )),
    }
}

enum Failure {
    Divergence(String),
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|out| {
        let mut stdout = io::stdout().lock();
        stdout.write_all(out.as_bytes())?;
        stdout.flush()?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Divergence(msg)) => {
            eprintln!("divergence: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Classify {
            input,
            rules,
            format,
        } => {
            let rules = load_rules(&rules)?;
            let classified = input
                .load()?
                .into_iter()
                .map(|t| classify(t, &rules))
                .collect::<Vec<_>>();
            Ok(match format {
                Format::Json => render::classification_json(&classified),
                Format::Tsv => render::classification_tsv(&classified),
                Format::Text => render::classification_text(&classified),
            })
        }
        Command::Score {
            input,
            rules,
            universe,
            format,
        } => {
            let rules = load_rules(&rules)?;
            let mut scored = Vec::new();
            for table in input.load()? {
                let classified = classify(table, &rules);
                let scores = metrics::score_columns(&classified, universe.into())?;
                scored.push((classified, scores));
            }
            let views: Vec<TableScores<'_>> = scored
                .iter()
                .map(|(c, s)| TableScores {
                    table: c.table().name(),
                    scores: s,
                })
                .collect();
            Ok(match format {
                Format::Json => render::scores_json(&views),
                Format::Tsv => render::scores_tsv(&views),
                Format::Text => render::scores_text(&views),
            })
        }
        Command::Assess { assessment, format } => {
            let score = grade_requestor(&AssessmentForm::from_path(&assessment)?)?;
            Ok(match format {
                Format::Json => render::requestor_json(&score),
                Format::Tsv => render::requestor_tsv(&score),
                Format::Text => render::requestor_text(&score),
            })
        }
        Command::Select {
            input,
            rules,
            assessment,
            threshold,
            universe,
            format,
            no_timestamp,
        } => {
            let rules = load_rules(&rules)?;
            let requestor = grade_requestor(&AssessmentForm::from_path(&assessment)?)?;
            let classified: ClassifiedTable = classify(input.load()?, &rules);
            let scores = metrics::score_columns(&classified, universe.into())?;
            let mut report = build_report(&classified, &scores, &requestor, threshold)?;
            if !no_timestamp {
                report =
                    report.with_timestamp(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true));
            }
            Ok(match format {
                Format::Json => render::report_json(&report),
                Format::Tsv => render::report_tsv(&report),
                Format::Text => render::report_text(&report),
            })
        }
        Command::Generate(args) => run_generate(args),
        Command::Oracle { input, mutant } => {
            let table = input.load()?;
            let engine: &dyn MetricEngine = if mutant {
                &MutantEngine
            } else {
                &GroupingEngine {
                    execution: Execution::Parallel,
                }
            };
            match oracle::verify(&table, engine)? {
                Ok(report) => Ok(format!(
                    "{}: engine agrees with oracle ({} class counts, {} columns)\n",
                    table.name(),
                    report.class_counts_checked,
                    report.columns_checked
                )),
                Err(divergence) => Err(Failure::Divergence(format!(
                    "{}: {divergence}",
                    table.name()
                ))),
            }
        }
    }
}

fn run_generate(args: GenerateArgs) -> Outcome {
    let mut spec = match &args.spec {
        Some(path) => SyntheticSpec::from_path(path)?,
        None => {
            let mut spec = SyntheticSpec::uniform(args.rows, args.columns, args.distinct, 0);
            if let Some(s) = args.zipf {
                for c in &mut spec.columns {
                    c.distribution = Distribution::Zipf(s);
                }
            }
            spec
        }
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let table = generate(&spec)?;
    if let Some(path) = &args.rules_out {
        std::fs::write(path, spec.hint_rules().to_json())
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let mut out = Vec::new();
    write_delimited(&table, &mut out, args.delimiter, &args.na_token)?;
    Ok(String::from_utf8(out)?)
}

fn load_rules(arg: &RulesArg) -> Result<ClassificationRules, Failure> {
    Ok(match &arg.rules {
        Some(path) => ClassificationRules::from_path(path)?,
        None => ClassificationRules::builtin(),
    })
}

fn read_table(path: &Path, options: &ReadOptions) -> Result<Table, Failure> {
    let name = if path == Path::new("-") {
        "stdin".to_owned()
    } else {
        path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        )
    };
    let options = IngestOptions {
        delimiter: options.delimiter,
        table_name: name,
        na_token: options.na_token.clone(),
        ..IngestOptions::default()
    };
    let source: Box<dyn Read> = if path == Path::new("-") {
        Box::new(io::stdin().lock())
    } else {
        Box::new(File::open(path).map_err(|e| format!("{}: {e}", path.display()))?)
    };
    ingest_delimited(source, &options)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

impl Inputs {
    fn load(&self) -> Result<Vec<Table>, Failure> {
        self.inputs
            .iter()
            .map(|p| read_table(p, &self.read))
            .collect()
    }
}

impl Input {
    fn load(&self) -> Result<Table, Failure> {
        read_table(&self.input, &self.read)
    }
}
