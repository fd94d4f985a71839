//! Query engines behind one interface, per-query reports and the benchmark
//! sweep.
//!
//! Sweep output is long-format CSV: one row per (dataset, preset, spatial
//! ratio, distribution, selectivity, metric). Wall-clock metrics are the only
//! nondeterministic values; [`is_timing_metric`] names them.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{build_spareach, build_tc, spareach_query, tc_query, traversal_query, SpaReach, TransitiveClosure};
use crate::error::{Error, Result};
use crate::graph::{load_graph, DirectedPropertyGraph, VertexId};
use crate::grid::Rect;
use crate::index::{IndexConfig, Preset, SpaGraph, DEFAULT_RESOLUTION};
use crate::query::range_reach;
use crate::workload::{assign_spatial, gen_queries, random_graph, Distribution, QuerySpec, SpatialAssignment, RNG_NAME};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Spa,
    Traversal,
    Tc,
    SpaReach,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Spa, Engine::Traversal, Engine::Tc, Engine::SpaReach];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Spa => "spa",
            Engine::Traversal => "traversal",
            Engine::Tc => "tc",
            Engine::SpaReach => "spareach",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown engine {s:?}")))
    }
}

/// One engine ready to answer queries over an index's graph.
pub enum Prepared<'a> {
    Spa(&'a SpaGraph),
    Traversal(&'a SpaGraph),
    Tc(TransitiveClosure),
    SpaReach(SpaReach),
}

impl<'a> Prepared<'a> {
    /// Builds whatever the engine needs beyond the index itself. Fails for TC
    /// on graphs above its size guard.
    pub fn new(engine: Engine, s: &'a SpaGraph) -> Result<Self> {
        Ok(match engine {
            Engine::Spa => Prepared::Spa(s),
            Engine::Traversal => Prepared::Traversal(s),
            Engine::Tc => Prepared::Tc(build_tc(s.graph())?),
            Engine::SpaReach => Prepared::SpaReach(build_spareach(s.graph(), s.config().top_resolution as usize)),
        })
    }

    pub fn run(&self, v: VertexId, r: &Rect) -> Result<QueryRecord> {
        let start = Instant::now();
        let mut rec = match self {
            Prepared::Spa(s) => QueryRecord::from_outcome(range_reach(s, v, r)?),
            Prepared::Traversal(s) => QueryRecord::from_outcome(traversal_query(s.condensation(), v, r)?),
            Prepared::Tc(tc) => QueryRecord {
                answer: tc_query(tc, v, r)?,
                ..QueryRecord::default()
            },
            Prepared::SpaReach(idx) => {
                let (answer, checks) = spareach_query(idx, v, r)?;
                QueryRecord {
                    answer,
                    checks: Some(checks),
                    ..QueryRecord::default()
                }
            }
        };
        rec.time_us = start.elapsed().as_secs_f64() * 1e6;
        Ok(rec)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryRecord {
    pub answer: bool,
    pub expanded: Option<usize>,
    pub edges_relaxed: Option<usize>,
    pub pruned_b: Option<usize>,
    pub pruned_r_disjoint: Option<usize>,
    pub pruned_g_disjoint: Option<usize>,
    pub checks: Option<usize>,
    pub terminated_by: Option<&'static str>,
    pub time_us: f64,
}

impl QueryRecord {
    fn from_outcome(o: crate::query::QueryOutcome) -> Self {
        QueryRecord {
            answer: o.answer,
            expanded: Some(o.expanded),
            edges_relaxed: Some(o.edges_relaxed),
            pruned_b: Some(o.pruned_b),
            pruned_r_disjoint: Some(o.pruned_r_disjoint),
            pruned_g_disjoint: Some(o.pruned_g_disjoint),
            checks: None,
            terminated_by: Some(o.terminated_by.name()),
            time_us: 0.0,
        }
    }
}

pub fn run_queries(engine: &Prepared<'_>, queries: &[(VertexId, Rect)]) -> Result<Vec<QueryRecord>> {
    queries.iter().map(|(v, r)| engine.run(*v, r)).collect()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub const QUERY_CSV_HEADER: [&str; 16] = [
    "engine",
    "query",
    "vertex",
    "min_x",
    "min_y",
    "max_x",
    "max_y",
    "answer",
    "expanded",
    "edges_relaxed",
    "pruned_b",
    "pruned_r_disjoint",
    "pruned_g_disjoint",
    "checks",
    "terminated_by",
    "time_us",
];

fn opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn mean_of(records: &[QueryRecord], f: impl Fn(&QueryRecord) -> Option<usize>) -> String {
    let vals: Vec<f64> = records.iter().filter_map(|r| f(r).map(|x| x as f64)).collect();
    if vals.is_empty() {
        String::new()
    } else {
        mean(&vals).to_string()
    }
}

/// Per-query rows followed by `median` and `mean` summary rows. Zero queries
/// produce the header alone.
pub fn write_query_csv<W: Write>(w: W, engine: Engine, queries: &[(VertexId, Rect)], records: &[QueryRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(QUERY_CSV_HEADER)?;
    for (i, ((v, r), rec)) in queries.iter().zip(records).enumerate() {
        out.write_record([
            engine.name().to_string(),
            i.to_string(),
            v.to_string(),
            r.min_x.to_string(),
            r.min_y.to_string(),
            r.max_x.to_string(),
            r.max_y.to_string(),
            rec.answer.to_string(),
            opt(rec.expanded),
            opt(rec.edges_relaxed),
            opt(rec.pruned_b),
            opt(rec.pruned_r_disjoint),
            opt(rec.pruned_g_disjoint),
            opt(rec.checks),
            rec.terminated_by.unwrap_or_default().to_string(),
            rec.time_us.to_string(),
        ])?;
    }
    if !records.is_empty() {
        let times: Vec<f64> = records.iter().map(|r| r.time_us).collect();
        let trues = records.iter().filter(|r| r.answer).count() as f64 / records.len() as f64;
        for (label, time) in [("median", median(&times)), ("mean", mean(&times))] {
            let mut row = vec![engine.name().to_string(), label.to_string()];
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(trues.to_string());
            row.push(mean_of(records, |r| r.expanded));
            row.push(mean_of(records, |r| r.edges_relaxed));
            row.push(mean_of(records, |r| r.pruned_b));
            row.push(mean_of(records, |r| r.pruned_r_disjoint));
            row.push(mean_of(records, |r| r.pruned_g_disjoint));
            row.push(mean_of(records, |r| r.checks));
            row.push(String::new());
            row.push(time.to_string());
            out.write_record(&row)?;
        }
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// A sweep column: one of the five index presets or the SpaReach baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchPreset {
    Index(Preset),
    SpaReach,
}

impl BenchPreset {
    pub const ALL: [BenchPreset; 6] = [
        BenchPreset::Index(Preset::GeoMT0),
        BenchPreset::Index(Preset::GeoMT2),
        BenchPreset::Index(Preset::GeoMT3),
        BenchPreset::Index(Preset::GeoP),
        BenchPreset::Index(Preset::GeoRMBR),
        BenchPreset::SpaReach,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchPreset::Index(p) => p.name(),
            BenchPreset::SpaReach => "SpaReach",
        }
    }
}

impl FromStr for BenchPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("spareach") {
            Ok(BenchPreset::SpaReach)
        } else {
            s.parse().map(BenchPreset::Index)
        }
    }
}

/// Where the sweep's graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Random { vertices: usize, avg_degree: f64, acyclic: bool },
    /// Edge list plus optional point file. Without a point file the sweep's
    /// spatial assignments apply; with one the file's points are used as-is.
    File { edges: PathBuf, spatial: Option<PathBuf> },
}

/// Parsed sweep configuration.
///
/// Grammar: one `key = value` per line; `#` starts a comment; list values
/// are comma separated. Keys:
///
/// | key | value | default |
/// |---|---|---|
/// | `dataset` | label for the CSV | `random` |
/// | `graph`, `spatial` | edge list and point file paths | random graph |
/// | `vertices`, `avg_degree`, `acyclic` | random graph shape | 2000, 2.3, false |
/// | `bounds` | `min_x min_y max_x max_y` | `0 0 1 1` |
/// | `spatial_ratio` | list of fractions | `0.2, 0.8` |
/// | `distribution` | list of `uniform`, `zipf`, `clustered` | `uniform` |
/// | `selectivity` | list of area fractions | `0.0001, 0.001, 0.01, 0.1` |
/// | `presets` | list of preset names | all six |
/// | `queries` | queries per cell | 500 |
/// | `seed` | master seed | 42 |
/// | `resolution`, `max_rmbr`, `max_reach_grids`, `merge_count` | index overrides | preset values |
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub dataset: String,
    pub source: GraphSource,
    pub bounds: Rect,
    pub spatial_ratios: Vec<f64>,
    pub distributions: Vec<Distribution>,
    pub selectivities: Vec<f64>,
    pub presets: Vec<BenchPreset>,
    pub queries: usize,
    pub seed: u64,
    pub resolution: u32,
    pub max_rmbr: Option<f64>,
    pub max_reach_grids: Option<Option<usize>>,
    pub merge_count: Option<u8>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dataset: "random".into(),
            source: GraphSource::Random {
                vertices: 2000,
                avg_degree: 2.3,
                acyclic: false,
            },
            bounds: Rect::unit(),
            spatial_ratios: vec![0.2, 0.8],
            distributions: vec![Distribution::Uniform],
            selectivities: vec![0.0001, 0.001, 0.01, 0.1],
            presets: BenchPreset::ALL.to_vec(),
            queries: 500,
            seed: 42,
            resolution: DEFAULT_RESOLUTION,
            max_rmbr: None,
            max_reach_grids: None,
            merge_count: None,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid value {v:?} for {key}"),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| parse_value(line, key, x.trim())).collect()
}

/// Parses a `min_x min_y max_x max_y` rectangle.
pub fn parse_bounds(v: &str) -> Result<Rect> {
    let c: Vec<f64> = v
        .split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Config(format!("invalid bounds {v:?}"))))
        .collect::<Result<_>>()?;
    if c.len() != 4 || c.iter().any(|x| !x.is_finite()) || c[0] >= c[2] || c[1] >= c[3] {
        return Err(Error::Config(format!("bounds {v:?} must be `min_x min_y max_x max_y` with min < max")));
    }
    Ok(Rect::new(c[0], c[1], c[2], c[3]))
}

impl BenchConfig {
    /// Parses the flat key-value format. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = BenchConfig::default();
        let mut seen = BTreeMap::new();
        let (mut vertices, mut avg_degree, mut acyclic) = (2000usize, 2.3f64, false);
        let (mut edges, mut spatial) = (None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            if seen.insert(key.clone(), line).is_some() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key {key}"),
                });
            }
            match key.as_str() {
                "dataset" => cfg.dataset = value.to_string(),
                "graph" => edges = Some(base.join(value)),
                "spatial" => spatial = Some(base.join(value)),
                "vertices" => vertices = parse_value(line, &key, value)?,
                "avg_degree" => avg_degree = parse_value(line, &key, value)?,
                "acyclic" => acyclic = parse_value(line, &key, value)?,
                "bounds" => cfg.bounds = parse_bounds(value)?,
                "spatial_ratio" => cfg.spatial_ratios = parse_list(line, &key, value)?,
                "distribution" => cfg.distributions = parse_list(line, &key, value)?,
                "selectivity" => cfg.selectivities = parse_list(line, &key, value)?,
                "presets" | "preset" => cfg.presets = parse_list(line, &key, value)?,
                "queries" => cfg.queries = parse_value(line, &key, value)?,
                "seed" => cfg.seed = parse_value(line, &key, value)?,
                "resolution" => cfg.resolution = parse_value(line, &key, value)?,
                "max_rmbr" => cfg.max_rmbr = Some(parse_value(line, &key, value)?),
                "max_reach_grids" => {
                    cfg.max_reach_grids = Some(if value.eq_ignore_ascii_case("none") || value.eq_ignore_ascii_case("unlimited") {
                        None
                    } else {
                        Some(parse_value(line, &key, value)?)
                    })
                }
                "merge_count" => cfg.merge_count = Some(parse_value(line, &key, value)?),
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key {key}"),
                    })
                }
            }
        }
        cfg.source = match edges {
            Some(edges) => GraphSource::File { edges, spatial },
            None if spatial.is_some() => return Err(Error::Config("`spatial` requires `graph`".into())),
            None => GraphSource::Random {
                vertices,
                avg_degree,
                acyclic,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Error::Config(format!("{what} list is empty"));
        if self.spatial_ratios.is_empty() {
            return Err(empty("spatial_ratio"));
        }
        if self.distributions.is_empty() {
            return Err(empty("distribution"));
        }
        if self.selectivities.is_empty() {
            return Err(empty("selectivity"));
        }
        if self.presets.is_empty() {
            return Err(empty("presets"));
        }
        if let Some(r) = self.spatial_ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Config(format!("spatial ratio {r} must lie in [0, 1]")));
        }
        if let Some(s) = self.selectivities.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            return Err(Error::Config(format!("selectivity {s} must lie strictly between 0 and 1")));
        }
        for p in Preset::ALL {
            self.index_config(p).validate()?;
        }
        Ok(())
    }

    /// Preset thresholds with this sweep's overrides applied.
    pub fn index_config(&self, preset: Preset) -> IndexConfig {
        let mut c = preset.config().with_resolution(self.resolution);
        if let Some(m) = self.max_rmbr {
            c.max_rmbr = m;
        }
        if let Some(k) = self.max_reach_grids {
            c.max_reach_grids = k;
        }
        if let Some(k) = self.merge_count {
            c.merge_count = k;
        }
        c
    }
}

/// One long-format CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub preset: String,
    pub spatial_ratio: String,
    pub distribution: String,
    /// Empty for metrics that do not depend on the query workload.
    pub selectivity: String,
    pub metric: String,
    pub value: String,
    pub seed: u64,
}

pub const BENCH_CSV_HEADER: [&str; 10] = [
    "schema_version",
    "dataset",
    "preset",
    "spatial_ratio",
    "distribution",
    "selectivity",
    "metric",
    "value",
    "seed",
    "rng",
];

const TIMING_METRICS: [&str; 3] = ["init_ms", "query_us_median", "query_us_mean"];

pub fn is_timing_metric(metric: &str) -> bool {
    TIMING_METRICS.contains(&metric)
}

pub fn write_bench_csv<W: Write>(w: W, rows: &[BenchRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BENCH_CSV_HEADER)?;
    for r in rows {
        out.write_record([
            SCHEMA_VERSION.to_string().as_str(),
            &r.dataset,
            &r.preset,
            &r.spatial_ratio,
            &r.distribution,
            &r.selectivity,
            &r.metric,
            &r.value,
            &r.seed.to_string(),
            RNG_NAME,
        ])?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// The CSV with every timing row's value blanked, for replay comparisons.
pub fn strip_timing(csv_text: &str) -> Result<String> {
    let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rd.headers()?.clone();
    let metric = headers.iter().position(|h| h == "metric");
    let value = headers.iter().position(|h| h == "value");
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(&headers)?;
    for rec in rd.records() {
        let rec = rec?;
        let mut fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if let (Some(m), Some(v)) = (metric, value) {
            if is_timing_metric(&fields[m]) {
                fields[v].clear();
            }
        }
        out.write_record(&fields)?;
    }
    let bytes = out.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Independent stream seeds derived from the master seed.
fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const STREAM_GRAPH: u64 = 1;
const STREAM_SPATIAL: u64 = 2;
const STREAM_QUERIES: u64 = 3;

/// Queries for one selectivity; shared by every preset so that each column of
/// the sweep answers the same workload.
pub fn sweep_queries(cfg: &BenchConfig, g: &DirectedPropertyGraph, selectivity_index: usize) -> Result<Vec<(VertexId, Rect)>> {
    gen_queries(
        g,
        &QuerySpec {
            selectivity: cfg.selectivities[selectivity_index],
            count: cfg.queries,
            seed: derive_seed(cfg.seed, STREAM_QUERIES + 16 * selectivity_index as u64),
        },
    )
}

struct Dataset {
    ratio: String,
    distribution: String,
    graph: std::result::Result<DirectedPropertyGraph, String>,
}

fn datasets(cfg: &BenchConfig) -> Result<Vec<Dataset>> {
    let base = match &cfg.source {
        GraphSource::Random {
            vertices,
            avg_degree,
            acyclic,
        } => random_graph(*vertices, *avg_degree, *acyclic, derive_seed(cfg.seed, STREAM_GRAPH), cfg.bounds)?,
        GraphSource::File { edges, spatial } => {
            let (g, _) = load_graph(edges, spatial.as_deref(), cfg.bounds)?;
            if spatial.is_some() {
                let ratio = if g.vertex_count() == 0 {
                    0.0
                } else {
                    g.spatial_count() as f64 / g.vertex_count() as f64
                };
                return Ok(vec![Dataset {
                    ratio: ratio.to_string(),
                    distribution: "file".into(),
                    graph: Ok(g),
                }]);
            }
            g
        }
    };
    let mut out = Vec::new();
    for (i, &ratio) in cfg.spatial_ratios.iter().enumerate() {
        for (j, &distribution) in cfg.distributions.iter().enumerate() {
            let spec = SpatialAssignment {
                distribution: match distribution {
                    Distribution::Zipf { exponent, .. } => Distribution::Zipf {
                        exponent,
                        resolution: cfg.resolution,
                    },
                    d => d,
                },
                ratio,
                seed: derive_seed(cfg.seed, STREAM_SPATIAL + 16 * (i * cfg.distributions.len() + j) as u64),
            };
            out.push(Dataset {
                ratio: ratio.to_string(),
                distribution: distribution.name().into(),
                graph: assign_spatial(base.clone(), &spec).map_err(|e| e.to_string()),
            });
        }
    }
    Ok(out)
}

fn metric_row(cfg: &BenchConfig, d: &Dataset, preset: BenchPreset, selectivity: Option<f64>, metric: &str, value: impl ToString) -> BenchRow {
    BenchRow {
        dataset: cfg.dataset.clone(),
        preset: preset.name().into(),
        spatial_ratio: d.ratio.clone(),
        distribution: d.distribution.clone(),
        selectivity: selectivity.map(|s| s.to_string()).unwrap_or_default(),
        metric: metric.into(),
        value: value.to_string(),
        seed: cfg.seed,
    }
}

fn mean_usize(records: &[QueryRecord], f: impl Fn(&QueryRecord) -> Option<usize>) -> f64 {
    mean(&records.iter().filter_map(|r| f(r).map(|x| x as f64)).collect::<Vec<_>>())
}

fn run_cell(cfg: &BenchConfig, d: &Dataset, preset: BenchPreset) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    let error = |rows: &mut Vec<BenchRow>, msg: String| rows.push(metric_row(cfg, d, preset, None, "error", msg));
    let g = match &d.graph {
        Ok(g) => g,
        Err(e) => {
            error(&mut rows, e.clone());
            return rows;
        }
    };
    let config = cfg.index_config(match preset {
        BenchPreset::Index(p) => p,
        BenchPreset::SpaReach => Preset::GeoMT0,
    });
    let start = Instant::now();
    let built = match preset {
        BenchPreset::Index(_) => SpaGraph::build(g.clone(), config).map(|s| (Some(s), None)),
        BenchPreset::SpaReach => Ok((None, Some(build_spareach(g, cfg.resolution as usize)))),
    };
    let init_ms = start.elapsed().as_secs_f64() * 1e3;
    let (index, spareach) = match built {
        Ok(b) => b,
        Err(e) => {
            error(&mut rows, e.to_string());
            return rows;
        }
    };
    rows.push(metric_row(cfg, d, preset, None, "init_ms", init_ms));
    match (&index, &spareach) {
        (Some(s), _) => {
            let rep = s.storage_report();
            rows.push(metric_row(cfg, d, preset, None, "storage_bytes", rep.bytes_total));
            rows.push(metric_row(cfg, d, preset, None, "b_vertices", rep.counts_by_kind.b));
            rows.push(metric_row(cfg, d, preset, None, "r_vertices", rep.counts_by_kind.r));
            rows.push(metric_row(cfg, d, preset, None, "g_vertices", rep.counts_by_kind.g));
            rows.push(metric_row(cfg, d, preset, None, "cells_stored", rep.cells_stored));
        }
        (None, Some(sr)) => rows.push(metric_row(cfg, d, preset, None, "storage_bytes", sr.bytes())),
        (None, None) => unreachable!("one of the two is always built"),
    }
    let is_index = index.is_some();
    let engine = match (&index, spareach) {
        (Some(s), _) => Prepared::Spa(s),
        (None, Some(sr)) => Prepared::SpaReach(sr),
        (None, None) => unreachable!(),
    };
    for (k, &sel) in cfg.selectivities.iter().enumerate() {
        let result = sweep_queries(cfg, g, k).and_then(|qs| run_queries(&engine, &qs));
        let records = match result {
            Ok(r) => r,
            Err(e) => {
                rows.push(metric_row(cfg, d, preset, Some(sel), "error", e));
                continue;
            }
        };
        let times: Vec<f64> = records.iter().map(|r| r.time_us).collect();
        let mut put = |metric: &str, value: String| rows.push(metric_row(cfg, d, preset, Some(sel), metric, value));
        put("query_us_median", median(&times).to_string());
        put("query_us_mean", mean(&times).to_string());
        put("true_answers", records.iter().filter(|r| r.answer).count().to_string());
        if is_index {
            put("expanded_mean", mean_usize(&records, |r| r.expanded).to_string());
            put("pruned_b_mean", mean_usize(&records, |r| r.pruned_b).to_string());
            put("pruned_r_mean", mean_usize(&records, |r| r.pruned_r_disjoint).to_string());
            put("pruned_g_mean", mean_usize(&records, |r| r.pruned_g_disjoint).to_string());
        } else {
            put("checks_mean", mean_usize(&records, |r| r.checks).to_string());
        }
    }
    rows
}

/// Runs every (spatial ratio × distribution × preset) cell, in parallel, and
/// returns the rows in configuration order. Failures inside a cell become
/// `error` rows; only a failure to obtain the base graph aborts the sweep.
pub fn run_sweep(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let data = datasets(cfg)?;
    let cells: Vec<(&Dataset, BenchPreset)> = data.iter().flat_map(|d| cfg.presets.iter().map(move |&p| (d, p))).collect();
    let rows: Vec<Vec<BenchRow>> = cells.par_iter().map(|(d, p)| run_cell(cfg, d, *p)).collect();
    Ok(rows.into_iter().flatten().collect())
}
