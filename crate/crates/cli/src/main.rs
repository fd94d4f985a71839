use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rangereach::bench::{
    parse_bounds, run_queries, run_sweep, write_bench_csv, write_query_csv, BenchConfig, Engine, Prepared,
};
use rangereach::graph::{load_graph, VertexId};
use rangereach::grid::Rect;
use rangereach::index::{load_snapshot, save_snapshot, IndexConfig, Preset, SpaGraph};
use rangereach::query::range_reach;
use rangereach::workload::{
    assign_spatial, gen_queries, random_graph, read_queries, write_queries, Distribution, QuerySpec, SpatialAssignment,
};

#[derive(Parser)]
#[command(name = "rangereach", version, about = "Spatial range reachability index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from graph files and write a snapshot.
    Build(BuildArgs),
    /// Answer queries against a snapshot with one engine and write a CSV.
    Query(QueryArgs),
    /// Apply `add u v` / `del u v` operations to a snapshot.
    Mutate(MutateArgs),
    /// Run a benchmark sweep described by a config file.
    Bench(BenchArgs),
    /// Generate a random graph, point file and query file.
    Gen(GenArgs),
}

#[derive(Args)]
struct IndexArgs {
    /// Starting preset; the flags below override its fields.
    #[arg(long, default_value = "GeoMT0")]
    preset: Preset,
    #[arg(long)]
    max_rmbr: Option<f64>,
    /// Cell budget per vertex, or `none` for unlimited.
    #[arg(long, value_parser = parse_budget)]
    max_reach_grids: Option<Budget>,
    #[arg(long)]
    merge_count: Option<u8>,
    #[arg(long)]
    resolution: Option<u32>,
}

#[derive(Clone, Copy)]
struct Budget(Option<usize>);

fn parse_budget(s: &str) -> Result<Budget, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(Budget(None));
    }
    s.parse().map(|n| Budget(Some(n))).map_err(|_| format!("expected a count or `none`, got {s:?}"))
}

impl IndexArgs {
    fn config(&self) -> IndexConfig {
        let mut c = self.preset.config();
        if let Some(v) = self.max_rmbr {
            c.max_rmbr = v;
        }
        if let Some(Budget(v)) = self.max_reach_grids {
            c.max_reach_grids = v;
        }
        if let Some(v) = self.merge_count {
            c.merge_count = v;
        }
        if let Some(v) = self.resolution {
            c.top_resolution = v;
        }
        c
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Edge list file.
    #[arg(long)]
    graph: PathBuf,
    /// Point file (`vertex x y` per line).
    #[arg(long)]
    spatial: Option<PathBuf>,
    /// Space bounds as `min_x min_y max_x max_y`.
    #[arg(long, default_value = "0 0 1 1", value_parser = bounds_arg)]
    bounds: Rect,
    #[command(flatten)]
    index: IndexArgs,
    /// Snapshot path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    snapshot: PathBuf,
    #[arg(long, default_value = "spa")]
    engine: Engine,
    /// Query file (`vertex min_x min_y max_x max_y` per line). Without it,
    /// queries are generated from the selectivity, count and seed.
    #[arg(long, conflicts_with = "selectivity")]
    queries: Option<PathBuf>,
    #[arg(long)]
    selectivity: Option<f64>,
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MutateArgs {
    snapshot: PathBuf,
    /// Operations file.
    #[arg(long)]
    ops: PathBuf,
    /// Where to write the updated snapshot; defaults to overwriting the input.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare against a fresh build on 1000 random queries.
    #[arg(long)]
    verify_rebuild: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2000)]
    vertices: usize,
    #[arg(long, default_value_t = 2.3)]
    avg_degree: f64,
    #[arg(long)]
    acyclic: bool,
    /// Fraction of vertices that get a point.
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value = "uniform")]
    distribution: Distribution,
    #[arg(long, default_value = "0 0 1 1", value_parser = bounds_arg)]
    bounds: Rect,
    #[arg(long, default_value_t = 0.001)]
    selectivity: f64,
    /// Number of queries to generate.
    #[arg(long, default_value_t = 500)]
    queries: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory; receives `graph.edges`, `graph.spatial`, `queries.txt`.
    #[arg(long)]
    out: PathBuf,
}

fn bounds_arg(s: &str) -> Result<Rect, String> {
    parse_bounds(s).map_err(|e| e.to_string())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn build(a: BuildArgs) -> Result<()> {
    let config = a.index.config();
    config.validate()?;
    let (g, report) = load_graph(&a.graph, a.spatial.as_deref(), a.bounds)?;
    if report.self_loops + report.duplicate_edges > 0 {
        eprintln!(
            "skipped {} self-loops and {} duplicate edges",
            report.self_loops, report.duplicate_edges
        );
    }
    let start = Instant::now();
    let s = SpaGraph::build(g, config)?;
    let init_ms = start.elapsed().as_secs_f64() * 1e3;
    save_snapshot(&s, &a.out)?;
    let st = s.storage_report();
    println!("vertices {}", s.graph().vertex_count());
    println!("edges {}", s.graph().edge_count());
    println!("components {}", s.condensation().num_components());
    println!("init_ms {init_ms:.3}");
    println!("storage_bytes {}", st.bytes_total);
    println!(
        "payloads B={} R={} G={}",
        st.counts_by_kind.b, st.counts_by_kind.r, st.counts_by_kind.g
    );
    Ok(())
}

fn query(a: QueryArgs) -> Result<()> {
    let s = load_snapshot(&a.snapshot)?;
    let queries = match (&a.queries, a.selectivity) {
        (Some(path), _) => read_queries(path)?,
        (None, Some(selectivity)) => gen_queries(
            s.graph(),
            &QuerySpec {
                selectivity,
                count: a.count,
                seed: a.seed,
            },
        )?,
        (None, None) => bail!("either --queries or --selectivity is required"),
    };
    let engine = Prepared::new(a.engine, &s)?;
    let records = run_queries(&engine, &queries)?;
    let mut w = output(a.out.as_deref())?;
    write_query_csv(&mut w, a.engine, &queries, &records)?;
    w.flush()?;
    Ok(())
}

enum Op {
    Add(VertexId, VertexId),
    Del(VertexId, VertexId),
}

fn parse_ops(text: &str) -> Result<Vec<Op>> {
    let mut ops = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        let edge = |u: &str, v: &str| -> Result<(VertexId, VertexId)> {
            Ok((u.parse()?, v.parse()?))
        };
        let op = match t.as_slice() {
            ["add", u, v] => edge(u, v).map(|(u, v)| Op::Add(u, v)),
            ["del", u, v] => edge(u, v).map(|(u, v)| Op::Del(u, v)),
            _ => bail!("line {}: expected `add u v` or `del u v`, got {line:?}", i + 1),
        };
        ops.push(op.with_context(|| format!("line {}: bad vertex id", i + 1))?);
    }
    Ok(ops)
}

/// 1000 queries spread evenly over four selectivities.
fn verification_queries(s: &SpaGraph, seed: u64) -> Result<Vec<(VertexId, Rect)>> {
    let mut out = Vec::new();
    for (k, selectivity) in [0.0001, 0.001, 0.01, 0.1].into_iter().enumerate() {
        out.extend(gen_queries(
            s.graph(),
            &QuerySpec {
                selectivity,
                count: 250,
                seed: seed.wrapping_add(k as u64),
            },
        )?);
    }
    Ok(out)
}

fn mutate(a: MutateArgs) -> Result<()> {
    let mut s = load_snapshot(&a.snapshot)?;
    let text = fs::read_to_string(&a.ops).with_context(|| format!("reading {}", a.ops.display()))?;
    let ops = parse_ops(&text)?;
    let (mut updates, mut changed) = (0, 0);
    for (i, op) in ops.iter().enumerate() {
        let stats = match *op {
            Op::Add(u, v) => s.add_edge(u, v),
            Op::Del(u, v) => s.delete_edge(u, v),
        }
        .with_context(|| format!("operation {}", i + 1))?;
        updates += stats.updates;
        changed += stats.changed;
    }
    println!("operations {}", ops.len());
    println!("payload_updates {updates}");
    println!("payload_changes {changed}");
    if a.verify_rebuild && s.graph().vertex_count() > 0 {
        let fresh = s.rebuild()?;
        let queries = verification_queries(&s, a.seed)?;
        let mismatches = queries
            .iter()
            .filter(|(v, r)| {
                range_reach(&s, *v, r).map(|o| o.answer).ok() != range_reach(&fresh, *v, r).map(|o| o.answer).ok()
            })
            .count();
        println!("verified_queries {}", queries.len());
        println!("mismatches {mismatches}");
        if mismatches > 0 {
            bail!("maintained index disagrees with a rebuild on {mismatches} queries");
        }
    }
    save_snapshot(&s, a.out.as_deref().unwrap_or(&a.snapshot))?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let rows = run_sweep(&cfg)?;
    let errors = rows.iter().filter(|r| r.metric == "error").count();
    let mut w = output(a.out.as_deref())?;
    write_bench_csv(&mut w, &rows)?;
    w.flush()?;
    if errors > 0 {
        eprintln!("{errors} sweep cells failed; see the error rows");
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let g = random_graph(a.vertices, a.avg_degree, a.acyclic, a.seed, a.bounds)?;
    let g = assign_spatial(
        g,
        &SpatialAssignment {
            distribution: a.distribution,
            ratio: a.ratio,
            seed: a.seed.wrapping_add(1),
        },
    )?;
    let queries = gen_queries(
        &g,
        &QuerySpec {
            selectivity: a.selectivity,
            count: a.queries,
            seed: a.seed.wrapping_add(2),
        },
    )?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let write = |name: &str, f: &dyn Fn(&mut dyn Write) -> io::Result<()>| -> Result<()> {
        let path = a.out.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    };
    write("graph.edges", &|w| g.write_edges(w))?;
    write("graph.spatial", &|w| g.write_spatial(w))?;
    write("queries.txt", &|w| write_queries(w, &queries))?;
    println!("vertices {} edges {} points {} queries {}", g.vertex_count(), g.edge_count(), g.spatial_count(), queries.len());
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Mutate(a) => mutate(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
