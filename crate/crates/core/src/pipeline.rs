//! File-level plumbing shared by the command line and the bindings:
//! loading inputs, rendering tables, atomic writes and the full
//! measure, pair, correlate and fit run.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::code::{link_units, parse_code_unlinked, CodeUnit};
use crate::code_metrics::{measure_units, CodeMetrics};
use crate::error::{Error, ErrorKind, Result};
use crate::pairing::{
    assemble_observations, extract_trace_units, match_pairs, Aggregation, PairedObservation,
    PairingReport, TraceLink, DEFAULT_EDIT_DISTANCE,
};
use crate::regression::{
    backward_eliminate_with, check_variable_budget, emit_formula, screen_predictors, BudgetCheck,
    EliminationMode, ObservationMatrix, RegressionModel, DEFAULT_THRESHOLD,
};
use crate::spec::{load_specification, ResolvedSpec};
use crate::spec_metrics::{measure_specification, SpecMetrics};
use crate::stats::{correlation_matrix, CorrelationRow};

/// Targets fitted by [`run_all`].
pub const RUN_ALL_TARGETS: [&str; 5] = ["CL", "CLCE", "CYC", "KNOTS", "FOUT"];

/// Extension of code files picked up from a directory.
pub const CODE_EXTENSION: &str = "mil";

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn load_spec(path: &Path) -> Result<ResolvedSpec> {
    load_specification(&read_text(path)?).map_err(|e| Error::from_spec(path, e))
}

pub fn measure_spec_file(path: &Path) -> Result<(ResolvedSpec, Vec<(String, SpecMetrics)>)> {
    let spec = load_spec(path)?;
    let rows = measure_specification(&spec);
    Ok((spec, rows))
}

/// Linked units of several files together with their trace links.
#[derive(Debug, Clone, Default)]
pub struct CodeCorpus {
    pub units: Vec<CodeUnit>,
    pub traces: Vec<TraceLink>,
}

impl CodeCorpus {
    pub fn metrics(&self) -> Vec<(String, CodeMetrics)> {
        measure_units(&self.units)
    }
}

pub fn load_code(paths: &[PathBuf]) -> Result<CodeCorpus> {
    let mut corpus = CodeCorpus::default();
    for path in paths {
        let src = read_text(path)?;
        let units = parse_code_unlinked(&src).map_err(|e| Error::from_code(path, e))?;
        let traces = extract_trace_units(&units, &src).map_err(|e| Error::from_pairing(path, e))?;
        corpus.units.extend(units);
        corpus.traces.extend(traces);
    }
    link_units(&mut corpus.units)
        .map_err(|e| Error::new(ErrorKind::Parse, format!("code corpus: {e}")))?;
    Ok(corpus)
}

/// Code files directly inside `dir`, sorted by name.
pub fn code_files_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::usage(format!("cannot list {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Error::usage(format!("cannot list {}: {e}", dir.display())))?
            .path();
        if path.is_file() && path.extension().is_some_and(|x| x == CODE_EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOptions {
    pub max_edit_distance: usize,
    pub aggregation: Aggregation,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            max_edit_distance: DEFAULT_EDIT_DISTANCE,
            aggregation: Aggregation::Strict,
        }
    }
}

pub fn pair(
    spec_metrics: &[(String, SpecMetrics)],
    corpus: &CodeCorpus,
    opts: PairOptions,
) -> Result<(PairingReport, Vec<PairedObservation>)> {
    let schemas: Vec<String> = spec_metrics.iter().map(|(n, _)| n.clone()).collect();
    let report = match_pairs(&schemas, &corpus.traces, opts.max_edit_distance, opts.aggregation);
    let obs = assemble_observations(&report, spec_metrics, &corpus.metrics())
        .map_err(|e| Error::data(e.to_string()))?;
    Ok((report, obs))
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn header(lead: &[&'static str], names: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(names).copied().collect()
}

fn fmt_values<T: ToString>(values: impl IntoIterator<Item = T>) -> impl Iterator<Item = String> {
    values.into_iter().map(|v| v.to_string())
}

pub fn spec_metrics_csv(rows: &[(String, SpecMetrics)]) -> String {
    csv_string(
        &header(&["schema"], &SpecMetrics::NAMES),
        rows.iter()
            .map(|(name, m)| std::iter::once(name.clone()).chain(fmt_values(m.values())).collect()),
    )
}

pub fn code_metrics_csv(rows: &[(String, CodeMetrics)]) -> String {
    csv_string(
        &header(&["unit"], &CodeMetrics::NAMES),
        rows.iter()
            .map(|(name, m)| std::iter::once(name.clone()).chain(fmt_values(m.values())).collect()),
    )
}

pub fn pairs_header() -> Vec<&'static str> {
    let mut h = header(&["pair_id", "schema", "unit"], &SpecMetrics::NAMES);
    h.extend(CodeMetrics::NAMES);
    h
}

pub fn pairs_csv(obs: &[PairedObservation]) -> String {
    csv_string(
        &pairs_header(),
        obs.iter().map(|o| {
            [o.pair_id.to_string(), o.schema.clone(), o.unit.clone()]
                .into_iter()
                .chain(fmt_values(o.spec.values()))
                .chain(fmt_values(o.code.values()))
                .collect()
        }),
    )
}

pub fn correlations_csv(rows: &[CorrelationRow]) -> String {
    csv_string(
        &["spec_metric", "code_metric", "test", "r", "p", "association", "n"],
        rows.iter().map(|r| {
            vec![
                r.spec_metric.clone(),
                r.code_metric.clone(),
                r.test.name().to_string(),
                r.r.to_string(),
                r.p.to_string(),
                r.association.name().to_string(),
                r.n.to_string(),
            ]
        }),
    )
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct NamedSpecRow<'a> {
    schema: &'a str,
    #[serde(flatten)]
    metrics: &'a SpecMetrics,
}

#[derive(Serialize)]
struct NamedCodeRow<'a> {
    unit: &'a str,
    #[serde(flatten)]
    metrics: &'a CodeMetrics,
}

pub fn spec_metrics_json(rows: &[(String, SpecMetrics)]) -> String {
    let named: Vec<_> = rows
        .iter()
        .map(|(n, m)| NamedSpecRow { schema: n, metrics: m })
        .collect();
    to_json(&named)
}

pub fn code_metrics_json(rows: &[(String, CodeMetrics)]) -> String {
    let named: Vec<_> = rows
        .iter()
        .map(|(n, m)| NamedCodeRow { unit: n, metrics: m })
        .collect();
    to_json(&named)
}

/// Observations as read back from a pairs file: three label columns and
/// any number of numeric measure columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairsTable {
    pub pair_ids: Vec<String>,
    pub schemas: Vec<String>,
    pub units: Vec<String>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl PairsTable {
    pub fn n(&self) -> usize {
        self.pair_ids.len()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn from_observations(obs: &[PairedObservation]) -> Self {
        let names = SpecMetrics::NAMES.iter().chain(&CodeMetrics::NAMES);
        PairsTable {
            pair_ids: obs.iter().map(|o| o.pair_id.to_string()).collect(),
            schemas: obs.iter().map(|o| o.schema.clone()).collect(),
            units: obs.iter().map(|o| o.unit.clone()).collect(),
            columns: names
                .enumerate()
                .map(|(j, n)| (n.to_string(), obs.iter().map(|o| o.values()[j]).collect()))
                .collect(),
        }
    }

    pub fn parse_csv(path: &Path, text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let perr = |line: Option<u64>, msg: String| Error::parse(path, line.map(|l| l as usize), msg);
        let headers = reader
            .headers()
            .map_err(|e| perr(Some(1), e.to_string()))?
            .clone();
        let head: Vec<&str> = headers.iter().collect();
        if head.len() < 3 || head[..3] != ["pair_id", "schema", "unit"] {
            return Err(perr(Some(1), "header must start with pair_id,schema,unit".into()));
        }
        let mut table = PairsTable {
            columns: head[3..].iter().map(|h| (h.to_string(), Vec::new())).collect(),
            ..PairsTable::default()
        };
        for record in reader.records() {
            let record = record.map_err(|e| perr(e.position().map(|p| p.line()), e.to_string()))?;
            let line = record.position().map(|p| p.line());
            table.pair_ids.push(record[0].to_string());
            table.schemas.push(record[1].to_string());
            table.units.push(record[2].to_string());
            for (j, (name, col)) in table.columns.iter_mut().enumerate() {
                let raw = record[j + 3].trim();
                let v: f64 = raw
                    .parse()
                    .map_err(|_| perr(line, format!("column {name}: `{raw}` is not a number")))?;
                if !v.is_finite() {
                    return Err(perr(line, format!("column {name}: non-finite value")));
                }
                col.push(v);
            }
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_csv(path, &read_text(path)?)
    }

    fn present(&self, names: &[&str]) -> Vec<(String, Vec<f64>)> {
        names
            .iter()
            .filter_map(|n| self.column(n).map(|c| (n.to_string(), c.to_vec())))
            .collect()
    }

    pub fn observation_matrix(&self, target: &str, predictors: &[String]) -> Result<ObservationMatrix> {
        let response = self
            .column(target)
            .ok_or_else(|| Error::data(format!("no column `{target}`")))?
            .to_vec();
        let cols = predictors
            .iter()
            .map(|p| self.column(p).ok_or_else(|| Error::data(format!("no column `{p}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ObservationMatrix {
            target: target.to_string(),
            predictors: predictors.to_vec(),
            rows: (0..self.n()).map(|i| cols.iter().map(|c| c[i]).collect()).collect(),
            response,
        })
    }
}

/// Every spec measure column against every code measure column, in the
/// canonical measure order.
pub fn correlate_table(table: &PairsTable) -> Result<Vec<CorrelationRow>> {
    let spec = table.present(&SpecMetrics::NAMES);
    let code = table.present(&CodeMetrics::NAMES);
    if spec.is_empty() || code.is_empty() {
        return Err(Error::data("pairs table needs at least one spec and one code measure column"));
    }
    Ok(correlation_matrix(&spec, &code)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub target: String,
    /// Defaults to every spec measure present in the table.
    pub predictors: Option<Vec<String>>,
    pub threshold: f64,
    pub mode: EliminationMode,
    /// Drop constant, dependent and surplus predictors before fitting.
    pub screen: bool,
}

impl FitOptions {
    pub fn new(target: impl Into<String>) -> Self {
        FitOptions {
            target: target.into(),
            predictors: None,
            threshold: DEFAULT_THRESHOLD,
            mode: EliminationMode::AllAbove,
            screen: false,
        }
    }
}

pub fn fit_table(table: &PairsTable, opts: &FitOptions) -> Result<RegressionModel> {
    let predictors = match &opts.predictors {
        Some(p) => p.clone(),
        None => table
            .present(&SpecMetrics::NAMES)
            .into_iter()
            .map(|(n, _)| n)
            .collect(),
    };
    let data = table.observation_matrix(&opts.target, &predictors)?;
    let budget = check_variable_budget(data.n(), data.predictors.len());
    let (data, excluded) = if opts.screen {
        screen_predictors(&data)
    } else {
        (data, Vec::new())
    };
    let mut model = backward_eliminate_with(&data, opts.threshold, opts.mode)?;
    model.excluded = excluded;
    if let BudgetCheck::Warning(w) = budget {
        model.warnings.push(w);
    }
    Ok(model)
}

/// Predicted target value for every schema of a measured specification.
pub fn predict_rows(model: &RegressionModel, rows: &[(String, SpecMetrics)]) -> Result<Vec<(String, f64)>> {
    rows.iter()
        .map(|(name, m)| {
            let y = crate::regression::predict(model, |p| m.get(p))?;
            Ok((name.clone(), y))
        })
        .collect()
}

pub fn predictions_csv(target: &str, rows: &[(String, f64)]) -> String {
    csv_string(
        &["schema", target],
        rows.iter().map(|(n, y)| vec![n.clone(), y.to_string()]),
    )
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| Error::usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunAllOptions {
    pub pair: PairOptions,
    pub threshold: f64,
    pub mode: EliminationMode,
}

impl Default for RunAllOptions {
    fn default() -> Self {
        RunAllOptions {
            pair: PairOptions::default(),
            threshold: DEFAULT_THRESHOLD,
            mode: EliminationMode::AllAbove,
        }
    }
}

/// In-memory result of [`run_all`]: file names with their contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub files: Vec<(String, String)>,
    pub observations: usize,
    pub correlations: usize,
    pub models: Vec<RegressionModel>,
}

impl Bundle {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::usage(format!("cannot create {}: {e}", dir.display())))?;
        for (name, contents) in &self.files {
            write_atomic(&dir.join(name), contents.as_bytes())?;
        }
        Ok(())
    }
}

/// Measures both documents, pairs them, builds the correlation matrix and
/// fits one screened, backward-eliminated model per target in
/// [`RUN_ALL_TARGETS`]. Errors name the failing stage.
pub fn run_all(spec_path: &Path, code_dir: &Path, opts: RunAllOptions) -> Result<Bundle> {
    let (_, spec_rows) = measure_spec_file(spec_path).map_err(|e| e.at_stage("measure-spec"))?;
    let corpus = code_files_in(code_dir)
        .and_then(|files| load_code(&files))
        .map_err(|e| e.at_stage("measure-code"))?;
    let code_rows = corpus.metrics();
    let (report, obs) = pair(&spec_rows, &corpus, opts.pair).map_err(|e| e.at_stage("pair"))?;
    if obs.is_empty() {
        return Err(Error::data("no paired observations").at_stage("pair"));
    }
    let table = PairsTable::from_observations(&obs);
    let correlations = correlate_table(&table).map_err(|e| e.at_stage("correlate"))?;

    let mut files = vec![
        ("spec_metrics.csv".to_string(), spec_metrics_csv(&spec_rows)),
        ("code_metrics.csv".to_string(), code_metrics_csv(&code_rows)),
        ("pairs.csv".to_string(), pairs_csv(&obs)),
        ("pairing_report.json".to_string(), to_json(&report)),
        ("correlations.csv".to_string(), correlations_csv(&correlations)),
    ];
    let mut models = Vec::new();
    let mut formulas = String::new();
    for target in RUN_ALL_TARGETS {
        let fit = FitOptions {
            threshold: opts.threshold,
            mode: opts.mode,
            screen: true,
            ..FitOptions::new(target)
        };
        let model = fit_table(&table, &fit).map_err(|e| e.at_stage("fit"))?;
        files.push((format!("model_{target}.json"), to_json(&model)));
        formulas.push_str(&emit_formula(&model));
        formulas.push('\n');
        models.push(model);
    }
    files.push(("formulas.txt".to_string(), formulas));
    Ok(Bundle {
        files,
        observations: obs.len(),
        correlations: correlations.len(),
        models,
    })
}
