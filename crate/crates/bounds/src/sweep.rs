use std::io;

use masim_protocols::{derive_seed, run, AgentFactory, Family, ProtocolSpec};
use masim_tasks::InstanceParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::BoundsError;

/// CSV column order; never reordered.
pub const CSV_HEADER: [&str; 10] =
    ["family", "N", "w", "b", "k", "replications", "depth_mean", "size_mean", "comm_mean", "accuracy"];

/// Grid of cells, each run `replications` times.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub protocol: Family,
    /// Template for instance generation; `n` and `k` come from the grid.
    pub instance: InstanceParams,
    pub ns: Vec<usize>,
    /// Widths, or replica counts for majority voting.
    pub ws: Vec<usize>,
    pub bs: Vec<usize>,
    pub ks: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub theory_variant: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub w: usize,
    pub b: usize,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub family: String,
    pub protocol: ProtocolSpec,
    pub cell: Cell,
    pub replications: usize,
    pub depth_mean: f64,
    pub size_mean: f64,
    pub comm_mean: f64,
    pub accuracy: f64,
    /// Largest per-metric spread (max - min) across replications.
    pub spread: usize,
    /// Depth/size inequality held on every replication.
    pub depth_size_inequality: bool,
}

impl SweepRecord {
    fn csv_row(&self) -> [String; 10] {
        [
            self.family.clone(),
            self.cell.n.to_string(),
            self.cell.w.to_string(),
            self.cell.b.to_string(),
            self.cell.k.to_string(),
            self.replications.to_string(),
            fmt_mean(self.depth_mean),
            fmt_mean(self.size_mean),
            fmt_mean(self.comm_mean),
            fmt_mean(self.accuracy),
        ]
    }
}

fn fmt_mean(x: f64) -> String {
    format!("{x:.6}")
}

pub fn cell_spec(protocol: Family, w: usize, b: usize, theory_variant: bool) -> ProtocolSpec {
    match protocol {
        Family::RecallBroadcast => ProtocolSpec::recall_broadcast(w, theory_variant),
        Family::PrefixSum => ProtocolSpec::prefix_sum(w, b),
        Family::ChainOfAgents => ProtocolSpec::chain_of_agents(w),
        Family::MajorityVote => ProtocolSpec::majority_vote(w),
        Family::IterativeQuery => ProtocolSpec::iterative_query(w),
    }
}

/// Seed of a cell, independent of grid order.
pub fn cell_seed(seed: u64, cell: Cell) -> u64 {
    [cell.n, cell.w, cell.b, cell.k].iter().fold(seed, |s, &x| derive_seed(s, x as u64))
}

impl SweepConfig {
    /// Grid cells in row-major order; widths exceeding the input length are
    /// skipped for partitioning protocols.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &w in &self.ws {
                for &b in &self.bs {
                    for &k in &self.ks {
                        let partitioned = !matches!(self.protocol, Family::MajorityVote | Family::IterativeQuery);
                        if partitioned && w > n {
                            continue;
                        }
                        out.push(Cell { n, w, b, k });
                    }
                }
            }
        }
        out
    }
}

/// Runs every cell in parallel. Records come back sorted by mean comm budget,
/// ties in grid order.
pub fn sweep(config: &SweepConfig, factory: &dyn AgentFactory) -> Result<Vec<SweepRecord>, BoundsError> {
    if config.replications == 0 {
        return Err(BoundsError::InvalidParams("replications must be at least 1".into()));
    }
    let cells = config.cells();
    if cells.is_empty() {
        return Err(BoundsError::EmptyGrid);
    }
    let mut records =
        cells.par_iter().map(|&cell| run_cell(config, factory, cell)).collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| a.comm_mean.total_cmp(&b.comm_mean));
    Ok(records)
}

fn run_cell(config: &SweepConfig, factory: &dyn AgentFactory, cell: Cell) -> Result<SweepRecord, BoundsError> {
    let spec = cell_spec(config.protocol, cell.w, cell.b, config.theory_variant);
    let params = InstanceParams { n: cell.n, k: cell.k, ..config.instance.clone() };
    let base = cell_seed(config.seed, cell);
    let reps = config.replications;
    let mut sums = [0usize; 3];
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut correct = 0usize;
    let mut inequality = true;
    for r in 0..reps as u64 {
        let instance = params.generate(derive_seed(base, 2 * r))?;
        let result = run(&spec, &instance, factory, derive_seed(base, 2 * r + 1))?;
        let m = result.metrics;
        for (i, x) in [m.depth, m.size, m.comm_budget].into_iter().enumerate() {
            sums[i] += x;
            lo[i] = lo[i].min(x);
            hi[i] = hi[i].max(x);
        }
        correct += usize::from(result.correct);
        inequality &= m.satisfies_depth_size_inequality();
    }
    let mean = |s: usize| s as f64 / reps as f64;
    Ok(SweepRecord {
        family: config.instance.kind.as_str().to_string(),
        protocol: spec,
        cell,
        replications: reps,
        depth_mean: mean(sums[0]),
        size_mean: mean(sums[1]),
        comm_mean: mean(sums[2]),
        accuracy: mean(correct),
        spread: (0..3).map(|i| hi[i] - lo[i]).max().unwrap_or(0),
        depth_size_inequality: inequality,
    })
}

/// Non-dominated records when minimising both comm and depth, comm ascending.
/// Of records with equal (comm, depth) the first is kept.
pub fn pareto_frontier(records: &[SweepRecord]) -> Vec<SweepRecord> {
    frontier(records, |r| (r.comm_mean, r.depth_mean))
}

/// [`pareto_frontier`] over rows read back from a sweep CSV.
pub fn pareto_rows(rows: &[CsvRow]) -> Vec<CsvRow> {
    frontier(rows, |r| (r.comm_mean, r.depth_mean))
}

fn frontier<T: Clone>(items: &[T], key: impl Fn(&T) -> (f64, f64)) -> Vec<T> {
    let mut sorted: Vec<&T> = items.iter().collect();
    sorted.sort_by(|a, b| {
        let (ca, da) = key(a);
        let (cb, db) = key(b);
        ca.total_cmp(&cb).then(da.total_cmp(&db))
    });
    let mut out: Vec<T> = Vec::new();
    for r in sorted {
        if out.last().is_none_or(|best| key(r).1 < key(best).1) {
            out.push(r.clone());
        }
    }
    out
}

pub fn write_csv<W: io::Write>(records: &[SweepRecord], out: W) -> Result<(), BoundsError> {
    write_lines(records.iter().map(SweepRecord::csv_row), out)
}

/// Writes rows read by [`read_csv`] back in the same format.
pub fn write_rows<W: io::Write>(rows: &[CsvRow], out: W) -> Result<(), BoundsError> {
    write_lines(rows.iter().map(CsvRow::csv_row), out)
}

fn write_lines<W: io::Write>(rows: impl Iterator<Item = [String; 10]>, out: W) -> Result<(), BoundsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parsed CSV row, as written by [`write_csv`].
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub w: usize,
    pub b: usize,
    pub k: usize,
    pub replications: usize,
    pub depth_mean: f64,
    pub size_mean: f64,
    pub comm_mean: f64,
    pub accuracy: f64,
}

impl CsvRow {
    fn csv_row(&self) -> [String; 10] {
        [
            self.family.clone(),
            self.n.to_string(),
            self.w.to_string(),
            self.b.to_string(),
            self.k.to_string(),
            self.replications.to_string(),
            fmt_mean(self.depth_mean),
            fmt_mean(self.size_mean),
            fmt_mean(self.comm_mean),
            fmt_mean(self.accuracy),
        ]
    }
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<CsvRow>, BoundsError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(BoundsError::InvalidParams(format!("unexpected CSV header {header:?}")));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
