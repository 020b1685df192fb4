//! Run settings merged from command-line flags, an optional config file and
//! the environment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use inkfatigue::features::Catalog;
use inkfatigue::ink::TaskId;
use inkfatigue::protocol::{canonical_set_pairs, parse_pairs, table2_rows, SetPair};
use inkfatigue::stats::{rows_for, Alternative, MatrixRow, TestOptions, TestVariant, DEFAULT_ALPHA};

use crate::{CliError, CliResult};

pub const OUT_ENV: &str = "INKFATIGUE_OUT";
pub const DEFAULT_OUT: &str = "inkfatigue-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Tsv,
    Json,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Sided {
    Two,
    /// First set of each pair larger.
    #[value(alias = "one")]
    Greater,
    Less,
}

impl From<Sided> for Alternative {
    fn from(s: Sided) -> Self {
        match s {
            Sided::Two => Alternative::TwoSided,
            Sided::Greater => Alternative::Greater,
            Sided::Less => Alternative::Less,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Test {
    SignedRank,
    RankSum,
}

impl From<Test> for TestVariant {
    fn from(t: Test) -> Self {
        match t {
            Test::SignedRank => TestVariant::SignedRank,
            Test::RankSum => TestVariant::RankSum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Rows {
    /// Every task crossed with every catalog feature.
    All,
    /// The published table's 29 rows.
    Table2,
}

/// Settings that can come from flags or from a config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Settings {
    /// Corpus root (`<subject>/<set>/task<k>.ink`).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output directory [default: $INKFATIGUE_OUT, else ./inkfatigue-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significance level [default: 0.05].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated set pairs such as S1-S2,S1-S4 [default: all ten].
    #[arg(long)]
    pub pairs: Option<String>,
    /// Comma-separated feature names, or `standard` / `pen-down` [default: standard].
    #[arg(long)]
    pub features: Option<String>,
    /// Output format [default: tsv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Test variant [default: signed-rank].
    #[arg(long, value_enum)]
    pub test: Option<Test>,
    /// Alternative hypothesis [default: two].
    #[arg(long, value_enum)]
    pub sided: Option<Sided>,
    /// Matrix rows [default: all].
    #[arg(long, value_enum)]
    pub rows: Option<Rows>,
    /// Scale rate features to per-second units in exported tables.
    #[arg(long)]
    pub per_second: bool,
    /// Config file of `key = value` lines; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 10] = [
    "corpus",
    "out",
    "alpha",
    "pairs",
    "features",
    "format",
    "test",
    "sided",
    "rows",
    "per_second",
];

fn parse_config(text: &str, path: &Path) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("{}:{}: {msg}", path.display(), i + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return Err(bad(format!("unknown key {key:?}")));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(bad(format!("duplicate key {key:?}")));
        }
    }
    Ok(map)
}

fn enum_value<T: clap::ValueEnum>(key: &str, text: &str) -> CliResult<T> {
    T::from_str(text, true).map_err(|_| CliError::Usage(format!("config {key}: invalid value {text:?}")))
}

/// Fills unset flags from the config file. Conflicting values keep the flag
/// and print a warning.
fn merge<T: PartialEq + std::fmt::Debug>(
    key: &str,
    flag: Option<T>,
    file: Option<&String>,
    parse: impl Fn(&str) -> CliResult<T>,
) -> CliResult<Option<T>> {
    let from_file = file.map(|v| parse(v)).transpose()?;
    match (flag, from_file) {
        (Some(f), Some(c)) => {
            if f != c {
                eprintln!(
                    "warning: --{} {f:?} overrides config value {c:?}",
                    key.replace('_', "-")
                );
            }
            Ok(Some(f))
        }
        (f, c) => Ok(f.or(c)),
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub out: PathBuf,
    pub alpha: f64,
    pub pairs: Vec<SetPair>,
    pub catalog: Catalog,
    pub format: Format,
    pub options: TestOptions,
    pub rows: Rows,
    pub per_second: bool,
}

impl RunConfig {
    pub fn resolve(settings: Settings) -> CliResult<Self> {
        let file = match &settings.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                parse_config(&text, path)?
            }
            None => BTreeMap::new(),
        };
        let text = |s: &str| Ok(s.to_string());
        let path = |s: &str| Ok(PathBuf::from(s));
        let corpus = merge("corpus", settings.corpus, file.get("corpus"), path)?;
        let out = merge("out", settings.out, file.get("out"), path)?;
        let alpha = merge("alpha", settings.alpha, file.get("alpha"), |s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("config alpha: invalid number {s:?}")))
        })?;
        let pairs = merge("pairs", settings.pairs, file.get("pairs"), text)?;
        let features = merge("features", settings.features, file.get("features"), text)?;
        let format = merge("format", settings.format, file.get("format"), |s| {
            enum_value("format", s)
        })?;
        let test = merge("test", settings.test, file.get("test"), |s| enum_value("test", s))?;
        let sided = merge("sided", settings.sided, file.get("sided"), |s| enum_value("sided", s))?;
        let rows = merge("rows", settings.rows, file.get("rows"), |s| enum_value("rows", s))?;
        let per_second_file = file
            .get("per_second")
            .map(|s| {
                s.parse::<bool>()
                    .map_err(|_| CliError::Usage(format!("config per_second: expected true or false, got {s:?}")))
            })
            .transpose()?;
        let per_second = settings.per_second || per_second_file.unwrap_or(false);

        let alpha = alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha {alpha} must lie in (0, 1)")));
        }
        let pairs = match pairs {
            Some(list) => parse_pairs(&list).map_err(|e| CliError::Usage(format!("--pairs: {e}")))?,
            None => canonical_set_pairs(),
        };
        let catalog = match features {
            Some(list) => Catalog::parse_list(&list).map_err(|e| CliError::Usage(format!("--features: {e}")))?,
            None => Catalog::standard(),
        };
        let out = out
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

        Ok(RunConfig {
            corpus,
            out,
            alpha,
            pairs,
            catalog,
            format: format.unwrap_or(Format::Tsv),
            options: TestOptions {
                variant: test.unwrap_or(Test::SignedRank).into(),
                alternative: sided.unwrap_or(Sided::Two).into(),
            },
            rows: rows.unwrap_or(Rows::All),
            per_second,
        })
    }

    pub fn corpus(&self) -> CliResult<&Path> {
        let path = self
            .corpus
            .as_deref()
            .ok_or_else(|| CliError::Usage("--corpus is required".into()))?;
        if !path.is_dir() {
            return Err(CliError::Data(anyhow::anyhow!(
                "corpus directory {} does not exist",
                path.display()
            )));
        }
        Ok(path)
    }

    /// Matrix rows restricted to features the catalog provides.
    pub fn matrix_rows(&self) -> CliResult<Vec<MatrixRow>> {
        let rows = match self.rows {
            Rows::All => rows_for(TaskId::all(), &self.catalog),
            Rows::Table2 => table2_rows()
                .into_iter()
                .filter(|r| self.catalog.contains(r.feature))
                .collect(),
        };
        if rows.is_empty() {
            return Err(CliError::Usage(
                "no matrix rows: the feature selection excludes every table row".into(),
            ));
        }
        Ok(rows)
    }
}
