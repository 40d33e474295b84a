//! Benchmark bookkeeping: run status classification, per-run metric rows,
//! CSV output, and the two cross-strategy comparison scores used in reports.
//!
//! A run is *solved* when the whole stream was processed inside the time
//! limit, *unsolved* when the limit expired first, and *hard-unsolved* when
//! it additionally produced fewer than [`HARD_UNSOLVED_THRESHOLD`] matches —
//! a timeout that cannot be blamed on result volume. Out-of-memory runs are
//! index-cap aborts and are kept apart from the time-based statuses.

use std::fmt::Write as _;
use std::time::Duration;

use crate::ivm::RunStatus;

/// Unsolved runs below this many results count as hard-unsolved.
pub const HARD_UNSOLVED_THRESHOLD: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Solved,
    Unsolved,
    HardUnsolved,
    OutOfMemory,
}

impl Status {
    pub fn classify(run: RunStatus, results: u64, threshold: u64) -> Status {
        match run {
            RunStatus::Solved => Status::Solved,
            RunStatus::OutOfMemory => Status::OutOfMemory,
            RunStatus::Unsolved if results < threshold => Status::HardUnsolved,
            RunStatus::Unsolved => Status::Unsolved,
        }
    }

    /// Hard-unsolved is a refinement of unsolved; both exceeded the limit.
    pub fn is_unsolved(self) -> bool {
        matches!(self, Status::Unsolved | Status::HardUnsolved)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Solved => "solved",
            Status::Unsolved => "unsolved",
            Status::HardUnsolved => "hard-unsolved",
            Status::OutOfMemory => "out-of-memory",
        }
    }
}

/// One benchmark cell: timings and counters of a single (query, strategy)
/// run. Offline time covers index construction on the initial graph; index
/// and enumeration time are stream totals split at the maintain/enumerate
/// boundary of each update.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub query_id: String,
    pub algo: String,
    pub status: Status,
    pub offline: Duration,
    pub index_time: Duration,
    pub enum_time: Duration,
    pub results: u64,
    pub emp: u64,
    pub vis: u64,
    pub inv: u64,
    pub candidates_total: u64,
    /// 95th-percentile per-update processing time.
    pub p95_update: Duration,
    /// Peak cached join tuples, for strategies that materialize tables.
    pub peak_cached: Option<usize>,
}

pub const CSV_HEADER: &str = "query_id,algo,status,offline_ms,index_ms,enum_ms,\
results,emp,vis,inv,candidates_total,p95_update_us,peak_cached";

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

impl RunMetrics {
    pub fn csv_row(&self) -> String {
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{},{},{},{},{},{},{},{:.3},",
            self.query_id,
            self.algo,
            self.status.as_str(),
            ms(self.offline),
            ms(self.index_time),
            ms(self.enum_time),
            self.results,
            self.emp,
            self.vis,
            self.inv,
            self.candidates_total,
            self.p95_update.as_secs_f64() * 1e6,
        )
        .unwrap();
        if let Some(peak) = self.peak_cached {
            write!(row, "{peak}").unwrap();
        }
        row
    }
}

pub fn write_csv(rows: &[RunMetrics]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

/// Nearest-rank 95th percentile; zero for an empty sample.
pub fn p95(samples: &[Duration]) -> Duration {
    if samples.is_empty() {
        return Duration::ZERO;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let rank = (sorted.len() as f64 * 0.95).ceil() as usize;
    sorted[rank - 1]
}

/// Individual speedup of A over B: the mean over queries of t_B / t_A, where
/// t is each strategy's online time for the query. Inputs are aligned by
/// position and must cover the same query set; values above 1 mean A was
/// faster. An empty query set yields the neutral 1.0.
pub fn individual_speedup(times_a: &[Duration], times_b: &[Duration]) -> f64 {
    assert_eq!(times_a.len(), times_b.len(), "query sets differ");
    if times_a.is_empty() {
        return 1.0;
    }
    let sum: f64 = times_a
        .iter()
        .zip(times_b)
        .map(|(ta, tb)| tb.as_secs_f64() / ta.as_secs_f64().max(1e-9))
        .sum();
    sum / times_a.len() as f64
}

/// Relative performance per method: the mean over queries of X_A(Q) / X*(Q)
/// where X*(Q) is the maximum of the (nonnegative) metric across methods on
/// that query. Rows are methods, columns queries. Queries on which every
/// method scored zero contribute a full ratio for everyone.
pub fn relative_performance(values: &[Vec<f64>]) -> Vec<f64> {
    let queries = match values.first() {
        Some(row) => row.len(),
        None => return Vec::new(),
    };
    assert!(values.iter().all(|row| row.len() == queries), "ragged value table");
    if queries == 0 {
        return vec![1.0; values.len()];
    }
    let best: Vec<f64> = (0..queries)
        .map(|j| values.iter().map(|row| row[j]).fold(0.0, f64::max))
        .collect();
    values
        .iter()
        .map(|row| {
            let sum: f64 = row
                .iter()
                .zip(&best)
                .map(|(&x, &top)| if top <= 0.0 { 1.0 } else { x / top })
                .sum();
            sum / queries as f64
        })
        .collect()
}
