//! Monte Carlo parameter sweeps.
//!
//! A sweep is the cross product of robot counts, spans `d`, expansion radii
//! and placements. Each cell runs `trials_per_cell` independent executions;
//! every trial is scored by the worst robot (largest distance) before the
//! trials are averaged.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run, WorldConfig, DEFAULT_MAX_ROUNDS};
use crate::error::{Error, Result};
use crate::strategy::CoinSource;
use crate::util::{hash_words, mix64, moments};

pub const DEFAULT_TRIALS_PER_CELL: usize = 100;

pub const CSV_HEADER: [&str; 13] = [
    "n",
    "d",
    "r",
    "placement",
    "trials",
    "censored",
    "mean_dist_ratio",
    "max_dist_ratio",
    "sd_dist_ratio",
    "mean_time_ratio",
    "mean_rounds",
    "mean_total_time",
    "mean_max_distance",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Outer robots at `0` and `d`, the rest i.i.d. uniform in between.
    UniformRandom,
    Equidistant,
}

impl Placement {
    fn tag(self) -> u64 {
        match self {
            Placement::UniformRandom => 1,
            Placement::Equidistant => 2,
        }
    }

    /// Initial positions for `n` robots over `[0, d]`.
    pub fn positions(self, n: usize, d: f64, seed: u64) -> Vec<f64> {
        match self {
            Placement::Equidistant => WorldConfig::equidistant(n, d, 2.0).initial_positions,
            Placement::UniformRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut xs: Vec<f64> = Vec::with_capacity(n);
                xs.push(0.0);
                for _ in 0..n.saturating_sub(2) {
                    xs.push(rng.random::<f64>() * d);
                }
                xs.push(d);
                xs.sort_by(f64::total_cmp);
                xs
            }
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::UniformRandom => "uniform",
            Placement::Equidistant => "equidistant",
        })
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uniform_random" | "random" => Ok(Placement::UniformRandom),
            "equidistant" | "equal" => Ok(Placement::Equidistant),
            other => Err(Error::Config(format!("unknown placement {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    pub d_values: Vec<f64>,
    pub r_values: Vec<f64>,
    pub placements: Vec<Placement>,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub max_rounds: u32,
}

impl SweepSpec {
    pub fn new(n_values: Vec<usize>, d_values: Vec<f64>, r_values: Vec<f64>) -> Self {
        Self {
            n_values,
            d_values,
            r_values,
            placements: vec![Placement::UniformRandom],
            trials_per_cell: DEFAULT_TRIALS_PER_CELL,
            base_seed: 0,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty()
            || self.d_values.is_empty()
            || self.r_values.is_empty()
            || self.placements.is_empty()
        {
            return Err(Error::Config("sweep has an empty axis".into()));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n <= 2) {
            return Err(Error::Config(format!("n must exceed 2, got {n}")));
        }
        if let Some(d) = self.d_values.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::Config(format!("d must be positive, got {d}")));
        }
        if let Some(r) = self.r_values.iter().find(|&&r| !(r > 1.0 && r < 2.0)) {
            return Err(Error::Config(format!("r must lie in (1, 2), got {r}")));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be positive".into()));
        }
        Ok(())
    }

    /// Cells in output order: n outermost, then d, r, placement.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.n_values {
            for &d in &self.d_values {
                for &r in &self.r_values {
                    for &placement in &self.placements {
                        out.push(Cell { n, d, r, placement });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub d: f64,
    pub r: f64,
    pub placement: Placement,
}

/// Seed of trial `index` in `cell`; a cell can be rerun in isolation.
pub fn trial_seed(base_seed: u64, cell: &Cell, index: usize) -> u64 {
    hash_words(&[
        base_seed,
        cell.n as u64,
        cell.d.to_bits(),
        cell.r.to_bits(),
        cell.placement.tag(),
        index as u64,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub censored: bool,
    pub distance_ratio: f64,
    pub time_ratio: f64,
    pub rounds: u32,
    pub total_time: f64,
    pub max_distance: f64,
}

/// Coins for a run whose placement was drawn from `seed`. The coin stream is
/// decorrelated from the placement stream.
pub fn coins_for(seed: u64) -> CoinSource {
    CoinSource::seeded(mix64(seed))
}

pub fn run_trial(cell: &Cell, seed: u64, max_rounds: u32) -> Result<TrialResult> {
    let positions = cell.placement.positions(cell.n, cell.d, seed);
    let config = WorldConfig::new(positions, cell.r).with_max_rounds(max_rounds);
    let trace = run(config, coins_for(seed))?;
    let half = cell.d / 2.0;
    Ok(TrialResult {
        censored: !trace.rendezvous_achieved,
        distance_ratio: trace.max_distance() / half,
        time_ratio: trace.end_time / half,
        rounds: trace.rounds_used,
        total_time: trace.end_time,
        max_distance: trace.max_distance(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub max: f64,
    pub sd: f64,
    /// Standard error of the mean.
    pub se: f64,
}

impl MetricStats {
    fn of(xs: &[f64]) -> Self {
        let m = moments(xs);
        Self {
            mean: m.mean,
            max: m.max,
            sd: m.sd,
            se: m.sd / (m.count as f64).sqrt(),
        }
    }
}

/// Aggregates over the uncensored trials of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub cell: Cell,
    pub trials: usize,
    pub censored: usize,
    pub distance_ratio: MetricStats,
    pub time_ratio: MetricStats,
    pub rounds: MetricStats,
    pub total_time: MetricStats,
    pub max_distance: MetricStats,
}

impl CellStats {
    pub fn from_trials(cell: Cell, trials: &[TrialResult]) -> Self {
        let done: Vec<&TrialResult> = trials.iter().filter(|t| !t.censored).collect();
        let col = |f: fn(&TrialResult) -> f64| -> MetricStats {
            MetricStats::of(&done.iter().map(|t| f(t)).collect::<Vec<_>>())
        };
        Self {
            cell,
            trials: trials.len(),
            censored: trials.len() - done.len(),
            distance_ratio: col(|t| t.distance_ratio),
            time_ratio: col(|t| t.time_ratio),
            rounds: col(|t| t.rounds as f64),
            total_time: col(|t| t.total_time),
            max_distance: col(|t| t.max_distance),
        }
    }

    fn csv_row(&self) -> [String; 13] {
        [
            self.cell.n.to_string(),
            self.cell.d.to_string(),
            self.cell.r.to_string(),
            self.cell.placement.to_string(),
            self.trials.to_string(),
            self.censored.to_string(),
            self.distance_ratio.mean.to_string(),
            self.distance_ratio.max.to_string(),
            self.distance_ratio.sd.to_string(),
            self.time_ratio.mean.to_string(),
            self.rounds.mean.to_string(),
            self.total_time.mean.to_string(),
            self.max_distance.mean.to_string(),
        ]
    }
}

/// Flat row matching the CSV schema; the JSON mirror serializes these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub n: usize,
    pub d: f64,
    pub r: f64,
    pub placement: Placement,
    pub trials: usize,
    pub censored: usize,
    pub mean_dist_ratio: f64,
    pub max_dist_ratio: f64,
    pub sd_dist_ratio: f64,
    pub mean_time_ratio: f64,
    pub mean_rounds: f64,
    pub mean_total_time: f64,
    pub mean_max_distance: f64,
}

impl From<&CellStats> for CellRow {
    fn from(s: &CellStats) -> Self {
        Self {
            n: s.cell.n,
            d: s.cell.d,
            r: s.cell.r,
            placement: s.cell.placement,
            trials: s.trials,
            censored: s.censored,
            mean_dist_ratio: s.distance_ratio.mean,
            max_dist_ratio: s.distance_ratio.max,
            sd_dist_ratio: s.distance_ratio.sd,
            mean_time_ratio: s.time_ratio.mean,
            mean_rounds: s.rounds.mean,
            mean_total_time: s.total_time.mean,
            mean_max_distance: s.max_distance.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub cells: Vec<CellStats>,
}

impl SweepTable {
    pub fn total_censored(&self) -> usize {
        self.cells.iter().map(|c| c.censored).sum()
    }

    pub fn find(&self, n: usize, d: f64, r: f64, placement: Placement) -> Option<&CellStats> {
        self.cells.iter().find(|c| {
            c.cell.n == n && c.cell.d == d && c.cell.r == r && c.cell.placement == placement
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for c in &self.cells {
            w.write_record(c.csv_row())?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<CellRow> = self.cells.iter().map(CellRow::from).collect();
        Ok(serde_json::to_string_pretty(&rows)?)
    }
}

/// Runs every trial of every cell on the ambient rayon pool. Results are
/// collected in (cell, trial) order, so the table does not depend on
/// scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials_per_cell).map(move |t| (c, t)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(c, t)| {
            run_trial(
                &cells[c],
                trial_seed(spec.base_seed, &cells[c], t),
                spec.max_rounds,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let per_cell = spec.trials_per_cell.max(1);
    let stats = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let slice = if spec.trials_per_cell == 0 {
                &results[0..0]
            } else {
                &results[c * per_cell..(c + 1) * per_cell]
            };
            CellStats::from_trials(*cell, slice)
        })
        .collect();
    Ok(SweepTable { cells: stats })
}

/// Restricts a summary to matching cells; `None` fields match everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CellFilter {
    pub n: Option<usize>,
    pub d: Option<f64>,
    pub r: Option<f64>,
    pub placement: Option<Placement>,
}

impl CellFilter {
    fn matches(&self, c: &Cell) -> bool {
        self.n.is_none_or(|n| n == c.n)
            && self.d.is_none_or(|d| d == c.d)
            && self.r.is_none_or(|r| r == c.r)
            && self.placement.is_none_or(|p| p == c.placement)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub d: f64,
    pub r: f64,
    pub placement: Placement,
    /// `(n, value)` sorted by `n`.
    pub points: Vec<(usize, f64)>,
}

/// One figure family: a metric plotted against `n`, one series per
/// `(d, r, placement)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureDataset {
    pub name: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl FigureDataset {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["series", "d", "r", "placement", "n", &self.name])?;
        for s in &self.series {
            for (n, y) in &s.points {
                w.write_record([
                    s.label.clone(),
                    s.d.to_string(),
                    s.r.to_string(),
                    s.placement.to_string(),
                    n.to_string(),
                    y.to_string(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub datasets: Vec<FigureDataset>,
}

type MetricFn = fn(&CellStats) -> f64;

const FIGURES: [(&str, &str, MetricFn); 5] = [
    (
        "mean_dist_ratio",
        "average distance competitive ratio",
        |c| c.distance_ratio.mean,
    ),
    ("mean_rounds", "average number of rounds", |c| c.rounds.mean),
    ("mean_total_time", "average total time", |c| {
        c.total_time.mean
    }),
    ("mean_time_ratio", "average time competitive ratio", |c| {
        c.time_ratio.mean
    }),
    ("mean_max_distance", "average distance traveled", |c| {
        c.max_distance.mean
    }),
];

/// Plot-ready datasets, one per figure family.
pub fn summarize(table: &SweepTable, filter: &CellFilter) -> Result<Summary> {
    let cells: Vec<&CellStats> = table
        .cells
        .iter()
        .filter(|c| filter.matches(&c.cell))
        .collect();
    if cells.is_empty() {
        return Err(Error::Config("no sweep cells match the filter".into()));
    }
    let mut keys: Vec<(f64, f64, Placement)> = Vec::new();
    for c in &cells {
        let key = (c.cell.d, c.cell.r, c.cell.placement);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let datasets = FIGURES
        .iter()
        .map(|(name, y_label, metric)| FigureDataset {
            name: name.to_string(),
            y_label: y_label.to_string(),
            series: keys
                .iter()
                .map(|&(d, r, placement)| {
                    let mut points: Vec<(usize, f64)> = cells
                        .iter()
                        .filter(|c| c.cell.d == d && c.cell.r == r && c.cell.placement == placement)
                        .map(|c| (c.cell.n, metric(c)))
                        .collect();
                    points.sort_by_key(|p| p.0);
                    Series {
                        label: format!("d={d} r={r} {placement}"),
                        d,
                        r,
                        placement,
                        points,
                    }
                })
                .collect(),
        })
        .collect();
    Ok(Summary { datasets })
}
