//! Result summaries, quartiles and file output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{IterationStats, RunConfig, RunResult, Termination};
use crate::error::{Error, Result};
use crate::tsplib::Length;

pub const DEFAULT_WINDOW: usize = 50;

pub const CSV_HEADER: &str = "dataset,algorithm,best,best_dev_pct,avg,avg_dev_pct,mean_elite,m,seeds";

/// Rounds half away from zero to two decimals.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Percentage deviation from the optimum, rounded to two decimals.
/// Lengths below the optimum give a negative value.
pub fn deviation_pct(length: f64, optimum: Option<Length>) -> Option<f64> {
    let opt = optimum.filter(|&o| o > 0)? as f64;
    Some(round2(100.0 * (length - opt) / opt))
}

/// Mean of the last `k` iteration-best lengths (the whole trace if shorter).
pub fn average_last_k(iteration_bests: &[Length], k: usize) -> Result<f64> {
    if iteration_bests.is_empty() {
        return Err(Error::Empty("iteration-best trace"));
    }
    let k = k.max(1).min(iteration_bests.len());
    let tail = &iteration_bests[iteration_bests.len() - k..];
    Ok(tail.iter().map(|&l| l as f64).sum::<f64>() / k as f64)
}

/// Five-number summary with Tukey hinges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl QuartileSummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Hinges are medians of the lower and upper halves; an odd sample's
/// median belongs to both halves.
pub fn five_number(values: &[f64]) -> Result<QuartileSummary> {
    if values.is_empty() {
        return Err(Error::Empty("quartile sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let half = n.div_ceil(2);
    Ok(QuartileSummary {
        min: v[0],
        q1: median_sorted(&v[..half]),
        median: median_sorted(&v),
        q3: median_sorted(&v[n - half..]),
        max: v[n - 1],
    })
}

/// Pooled mean and quartiles of elite counts over every iteration of every run.
pub fn elite_count_summary(traces: &[Vec<usize>]) -> Result<(f64, QuartileSummary)> {
    let pooled: Vec<f64> = traces.iter().flatten().map(|&c| c as f64).collect();
    if pooled.is_empty() {
        return Err(Error::Empty("elite-count traces"));
    }
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    Ok((mean, five_number(&pooled)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub algorithm: String,
    pub best: f64,
    pub best_dev_pct: Option<f64>,
    pub avg: f64,
    pub avg_dev_pct: Option<f64>,
    pub mean_elite: f64,
    pub m: usize,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileRow {
    pub dataset: String,
    pub algorithm: String,
    pub m: usize,
    #[serde(flatten)]
    pub summary: QuartileSummary,
}

fn group_key(c: &RunConfig, annotate: bool) -> (String, String) {
    let mut label = c.label();
    if annotate {
        label = format!(
            "{label}@a{}b{}r{}",
            c.params.alpha, c.params.beta, c.params.rho
        );
    }
    (c.instance.clone(), label)
}

/// Groups runs by dataset and algorithm, in order of first appearance.
fn grouped(results: &[RunResult]) -> Vec<((String, String), Vec<&RunResult>)> {
    let points: std::collections::BTreeSet<String> = results
        .iter()
        .map(|r| format!("{:?}", (r.config.params.alpha, r.config.params.beta, r.config.params.rho)))
        .collect();
    let annotate = points.len() > 1;
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        let key = group_key(&r.config, annotate);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let v = groups.remove(&k).unwrap();
            (k, v)
        })
        .collect()
}

/// Builds one summary row for a group of runs of the same configuration.
pub fn summarize_group(dataset: &str, algorithm: &str, runs: &[&RunResult], window: usize) -> Result<SummaryRow> {
    let first = runs.first().ok_or(Error::Empty("run group"))?;
    let optimum = first.config.optimum;
    let best = runs.iter().map(|r| r.best_length).min().unwrap() as f64;
    let mut avg_sum = 0.0;
    for r in runs {
        avg_sum += average_last_k(&r.iteration_bests(), window)?;
    }
    let avg = avg_sum / runs.len() as f64;
    let traces: Vec<Vec<usize>> = runs.iter().map(|r| r.elite_counts()).collect();
    let (mean_elite, _) = elite_count_summary(&traces)?;
    Ok(SummaryRow {
        dataset: dataset.to_string(),
        algorithm: algorithm.to_string(),
        best,
        best_dev_pct: deviation_pct(best, optimum),
        avg,
        avg_dev_pct: deviation_pct(avg, optimum),
        mean_elite,
        m: first.config.params.num_ants,
        seeds: runs.len(),
    })
}

pub fn summarize(results: &[RunResult], window: usize) -> Result<Vec<SummaryRow>> {
    grouped(results)
        .into_iter()
        .map(|((dataset, algorithm), runs)| summarize_group(&dataset, &algorithm, &runs, window))
        .collect()
}

pub fn quartile_rows(results: &[RunResult]) -> Result<Vec<QuartileRow>> {
    grouped(results)
        .into_iter()
        .map(|((dataset, algorithm), runs)| {
            let traces: Vec<Vec<usize>> = runs.iter().map(|r| r.elite_counts()).collect();
            let (_, summary) = elite_count_summary(&traces)?;
            Ok(QuartileRow {
                dataset,
                algorithm,
                m: runs[0].config.params.num_ants,
                summary,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

fn opt2(x: Option<f64>) -> String {
    x.map(|v| format!("{:.2}", round2(v))).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders summary rows; lengths get one decimal, percentages and elite means two.
pub fn render(rows: &[SummaryRow], format: Format) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("summary rows"));
    }
    match format {
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in rows {
                writeln!(
                    out,
                    "{},{},{:.1},{},{:.1},{},{:.2},{},{}",
                    csv_field(&r.dataset),
                    csv_field(&r.algorithm),
                    r.best,
                    opt2(r.best_dev_pct),
                    r.avg,
                    opt2(r.avg_dev_pct),
                    round2(r.mean_elite),
                    r.m,
                    r.seeds
                )
                .unwrap();
            }
            Ok(out)
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn render_quartiles(rows: &[QuartileRow], format: Format) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("quartile rows"));
    }
    match format {
        Format::Csv => {
            let mut out = String::from("# five-number summary of elite counts per iteration, Tukey hinges\n");
            out.push_str("dataset,algorithm,m,min,q1,median,q3,max\n");
            for r in rows {
                let s = &r.summary;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    csv_field(&r.dataset),
                    csv_field(&r.algorithm),
                    r.m,
                    s.min,
                    s.q1,
                    s.median,
                    s.q3,
                    s.max
                )
                .unwrap();
            }
            Ok(out)
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// One JSON object per iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TraceLine {
    index: usize,
    best: Length,
    threshold: Option<f64>,
    elite_count: usize,
    best_so_far: Length,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    branching: Option<f64>,
}

impl From<&IterationStats> for TraceLine {
    fn from(s: &IterationStats) -> Self {
        TraceLine {
            index: s.index,
            best: s.best,
            threshold: s.threshold,
            elite_count: s.elite_count,
            best_so_far: s.best_so_far,
            branching: s.branching,
        }
    }
}

impl From<TraceLine> for IterationStats {
    fn from(t: TraceLine) -> Self {
        IterationStats {
            index: t.index,
            best: t.best,
            threshold: t.threshold,
            elite_count: t.elite_count,
            best_so_far: t.best_so_far,
            branching: t.branching,
        }
    }
}

/// Run metadata stored next to a trace so summaries can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunHeader {
    config: RunConfig,
    best_tour: Vec<usize>,
    best_length: Length,
    iterations: usize,
    termination: Termination,
}

/// File stem for a run: `<dataset>_<label>_seed<k>`.
pub fn run_stem(result: &RunResult) -> String {
    let label: String = result
        .label()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' })
        .collect();
    format!("{}_{}_seed{}", result.config.instance, label, result.config.seed)
}

pub fn trace_to_string(trace: &[IterationStats]) -> Result<String> {
    let mut out = String::new();
    for s in trace {
        out.push_str(&serde_json::to_string(&TraceLine::from(s))?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes `<stem>.jsonl` (per-iteration trace) and `<stem>.run.json` (metadata)
/// into `dir`, returning the trace path.
pub fn save_run(dir: &Path, result: &RunResult) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = run_stem(result);
    let trace_path = dir.join(format!("{stem}.jsonl"));
    write_file(&trace_path, &trace_to_string(&result.trace)?)?;
    let header = RunHeader {
        config: result.config.clone(),
        best_tour: result.best_tour.clone(),
        best_length: result.best_length,
        iterations: result.iterations,
        termination: result.termination,
    };
    let mut meta = serde_json::to_string_pretty(&header)?;
    meta.push('\n');
    write_file(&dir.join(format!("{stem}.run.json")), &meta)?;
    Ok(trace_path)
}

pub fn read_trace(path: &Path) -> Result<Vec<IterationStats>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TraceLine = serde_json::from_str(&line)?;
        out.push(t.into());
    }
    Ok(out)
}

/// Loads every run saved by [`save_run`] in `dir`, sorted by file name.
pub fn load_runs(dir: &Path) -> Result<Vec<RunResult>> {
    let mut metas: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".run.json"))
        .collect();
    metas.sort();
    let mut runs = Vec::with_capacity(metas.len());
    for meta in metas {
        let text = fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
        let header: RunHeader = serde_json::from_str(&text)?;
        let name = meta.to_string_lossy().trim_end_matches(".run.json").to_string();
        let trace = read_trace(Path::new(&format!("{name}.jsonl")))?;
        runs.push(RunResult {
            config: header.config,
            best_tour: header.best_tour,
            best_length: header.best_length,
            iterations: header.iterations,
            trace,
            termination: header.termination,
        });
    }
    Ok(runs)
}

/// Writes `contents` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(contents.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}
