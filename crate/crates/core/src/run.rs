//! Batch pipelines behind the CLI subcommands: reproducible sampling runs
//! with logged records, statistical reports, theory and volume tables, and
//! stable-graph listings. All randomness flows from the configured seed;
//! outputs are byte-identical across reruns and worker counts.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::cycles::{spectrum_counts, CensusError, SpectrumRecord};
use crate::poisson::{
    expected_count, girth_cdf, intensity, intervals_disjoint, IntensityParams, IntervalSpec,
    ModelError,
};
use crate::sampler::{sample_map, SampleError, SamplerConfig};
use crate::scaled::ScaledReal;
use crate::stablegraph::{
    enumerate_stable_graphs, lemma_kk_check, sum_emleq_bound, StableGraphError,
};
use crate::stats::{
    empirical_factorial_moment, ks_test, poisson_count_test, HistogramAccumulator, StatsError,
};
use crate::volumes::{asymptotic_volume, exact_volume_g1, saddle_point_estimate, sinh_product_coeff};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Graph(#[from] StableGraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Settings for a sampling run and its report. The boundary total defaults
/// to 12·genus, the scaling that keeps the mean edge length near one.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub genus: u32,
    pub trials: u64,
    pub boundary_total: Option<f64>,
    pub intervals: Vec<IntervalSpec<f64>>,
    /// Histogram bin count over [0, b_max).
    pub bins: usize,
    pub b_max: f64,
    pub d_max: usize,
    pub seed: u64,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(genus: u32, seed: u64) -> Self {
        let unit = |a: f64| IntervalSpec { a, b: a + 1.0, r: 1 };
        Self {
            genus,
            trials: 1000,
            boundary_total: None,
            intervals: vec![unit(0.0), unit(1.0), unit(2.0), unit(3.0)],
            bins: 50,
            b_max: 4.0,
            d_max: 12,
            seed,
            workers: 1,
        }
    }

    pub fn boundary_total(&self) -> f64 {
        self.boundary_total.unwrap_or(12.0 * self.genus as f64)
    }

    /// Boundary scaling constant mu = L / (12 g).
    pub fn mu(&self) -> f64 {
        self.boundary_total() / (12.0 * self.genus as f64)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let fail = |m: &str| Err(RunError::Config(m.to_string()));
        if self.genus < 1 {
            return fail("genus must be at least 1");
        }
        if self.trials < 1 {
            return fail("trials must be at least 1");
        }
        if self.trials >= 1 << 48 {
            return fail("trials must stay below 2^48");
        }
        if let Some(l) = self.boundary_total {
            if !(l > 0.0) {
                return fail("boundary total must be positive");
            }
        }
        if self.intervals.iter().any(|s| !(s.a >= 0.0 && s.a < s.b)) {
            return fail("intervals must satisfy 0 <= a < b");
        }
        if !intervals_disjoint(&self.intervals) {
            return fail("intervals must be pairwise disjoint");
        }
        if self.bins < 1 {
            return fail("bins must be at least 1");
        }
        if !(self.b_max > 0.0) {
            return fail("b_max must be positive");
        }
        if self.d_max < 1 {
            return fail("d_max must be at least 1");
        }
        if self.workers < 1 {
            return fail("workers must be at least 1");
        }
        Ok(())
    }

    fn histogram(&self) -> HistogramAccumulator {
        HistogramAccumulator::new(0.0, self.b_max / self.bins as f64, self.bins)
    }
}

/// One cycle of a logged census: its length and edge count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleEntry {
    pub len: f64,
    pub edges: usize,
}

/// One logged trial: the sampled map plus its cycle census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub genus: u32,
    #[serde(rename = "L")]
    pub boundary_total: f64,
    pub sigma: Vec<usize>,
    pub alpha: Vec<usize>,
    pub lengths: Vec<f64>,
    pub rejections: u64,
    pub cycles: Vec<CycleEntry>,
    pub girth: f64,
    pub b_max: f64,
    pub d_max: usize,
}

impl TrialRecord {
    pub fn spectrum(&self) -> SpectrumRecord<f64> {
        SpectrumRecord::from_entries(
            self.cycles.iter().map(|c| (c.len, c.edges)).collect(),
            self.girth,
            self.b_max,
            self.d_max,
        )
    }
}

/// Samples, censuses, and logs one trial. Deterministic in (seed, trial).
pub fn run_trial(cfg: &RunConfig, trial: u64) -> Result<TrialRecord, RunError> {
    let l = cfg.boundary_total();
    let sc = SamplerConfig::new(cfg.genus, cfg.seed).with_boundary_total(l).with_trial(trial);
    let sample = sample_map(&sc)?;
    let spectrum = SpectrumRecord::from_map(&sample.map, cfg.b_max, cfg.d_max)?;
    Ok(TrialRecord {
        trial,
        seed: cfg.seed,
        genus: cfg.genus,
        boundary_total: l,
        sigma: sample.map.graph().sigma().to_vec(),
        alpha: sample.map.graph().alpha().to_vec(),
        lengths: sample.map.lengths().to_vec(),
        rejections: sample.rejections,
        cycles: spectrum.entries().iter().map(|&(len, edges)| CycleEntry { len, edges }).collect(),
        girth: spectrum.girth(),
        b_max: cfg.b_max,
        d_max: cfg.d_max,
    })
}

/// Runs all trials across the configured worker count. Records come back
/// sorted by trial index, identical for any worker count.
pub fn run_trials(cfg: &RunConfig) -> Result<Vec<TrialRecord>, RunError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;
    pool.install(|| (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect())
}

fn sample_meta(cfg: &RunConfig) -> String {
    json!({
        "meta": {
            "tool": "ribbonlab",
            "command": "sample",
            "genus": cfg.genus,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "L": cfg.boundary_total(),
            "b_max": cfg.b_max,
            "d_max": cfg.d_max,
        }
    })
    .to_string()
}

/// Writes records as JSON lines sorted by trial, optionally preceded by a
/// deterministic metadata line.
pub fn write_sample_jsonl(
    cfg: &RunConfig,
    records: &[TrialRecord],
    with_meta: bool,
    out: &mut impl Write,
) -> Result<(), RunError> {
    if with_meta {
        writeln!(out, "{}", sample_meta(cfg))?;
    }
    debug_assert!(records.windows(2).all(|w| w[0].trial < w[1].trial));
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r).expect("record serializes"))?;
    }
    Ok(())
}

/// Reads a sample log, skipping a leading metadata line when present.
pub fn read_sample_jsonl(input: impl BufRead) -> Result<Vec<TrialRecord>, RunError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || (i == 0 && text.starts_with("{\"meta\":")) {
            continue;
        }
        let rec: TrialRecord = serde_json::from_str(text)
            .map_err(|e| RunError::Parse { line: i + 1, msg: e.to_string() })?;
        records.push(rec);
    }
    Ok(records)
}

/// Per-interval comparison of empirical counts against the limiting Poisson
/// law: the factorial-moment statistic and the pooled-count z-score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalReport {
    pub a: f64,
    pub b: f64,
    pub r: u32,
    pub empirical: f64,
    pub se: f64,
    pub predicted: f64,
    pub z: f64,
    pub poisson_z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsReport {
    pub stat: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub g: u32,
    pub trials: u64,
    pub intervals: Vec<IntervalReport>,
    pub girth_ks: KsReport,
}

/// Aggregates logged records into the statistical report plus the cycle
/// length histogram. Needs at least 10 records (girth test) drawn from one
/// run configuration; interval ends must stay within the records' census
/// bound.
pub fn build_report(
    cfg: &RunConfig,
    records: &[TrialRecord],
) -> Result<(Report, HistogramAccumulator), RunError> {
    let first = records
        .first()
        .ok_or_else(|| RunError::Config("no records to report on".into()))?;
    if records.iter().any(|r| {
        r.genus != first.genus
            || r.boundary_total != first.boundary_total
            || r.b_max != first.b_max
            || r.d_max != first.d_max
    }) {
        return Err(RunError::Config("records mix incompatible run settings".into()));
    }
    let params = IntensityParams::new(first.boundary_total / (12.0 * first.genus as f64));
    let pairs: Vec<(f64, f64)> = cfg.intervals.iter().map(|s| (s.a, s.b)).collect();
    let mut hist = cfg.histogram();
    let mut counts: Vec<Vec<u64>> = Vec::with_capacity(records.len());
    let mut girths: Vec<f64> = Vec::with_capacity(records.len());
    for rec in records {
        counts.push(spectrum_counts(&rec.spectrum(), &pairs)?);
        girths.push(rec.girth);
        hist.observe_trial(rec.cycles.iter().map(|c| c.len));
    }
    let trials = records.len() as u64;
    let mut intervals = Vec::with_capacity(cfg.intervals.len());
    for (i, spec) in cfg.intervals.iter().enumerate() {
        let column: Vec<Vec<u64>> = counts.iter().map(|c| vec![c[i]]).collect();
        let moment = empirical_factorial_moment(&column, std::slice::from_ref(spec), &params)?;
        let total: u64 = counts.iter().map(|c| c[i]).sum();
        let mean = expected_count(spec.a, spec.b, &params);
        intervals.push(IntervalReport {
            a: spec.a,
            b: spec.b,
            r: spec.r,
            empirical: moment.empirical,
            se: moment.se,
            predicted: moment.predicted,
            z: moment.z,
            poisson_z: poisson_count_test(total, trials as f64 * mean),
        });
    }
    girths.sort_by(|x, y| x.partial_cmp(y).expect("finite girth"));
    let (stat, p) = ks_test(&girths, |t| girth_cdf(t, &params))?;
    let report = Report { g: first.genus, trials, intervals, girth_ks: KsReport { stat, p } };
    Ok((report, hist))
}

/// 17-significant-digit decimal scientific form, bit-stable across reruns.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bin_left,bin_right,count,count_per_trial_per_unit` rows.
pub fn write_histogram_csv(
    h: &HistogramAccumulator,
    meta: Option<&str>,
    out: &mut impl Write,
) -> Result<(), RunError> {
    assert!(h.trials() >= 1, "histogram density needs at least one trial");
    if let Some(m) = meta {
        writeln!(out, "# {m}")?;
    }
    writeln!(out, "bin_left,bin_right,count,count_per_trial_per_unit")?;
    let norm = h.trials() as f64 * h.bin_width();
    for (i, &c) in h.counts().iter().enumerate() {
        let (left, right) = h.bin_edges(i);
        writeln!(out, "{},{},{},{}", fmt17(left), fmt17(right), c, fmt17(c as f64 / norm))?;
    }
    Ok(())
}

/// Inclusive evaluation grid `start:stop:step`; the span must be a whole
/// number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step).round() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

pub fn parse_grid(text: &str) -> Result<GridSpec, RunError> {
    let err = |m: &str| RunError::Config(format!("grid {text:?}: {m}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(err("expected start:stop:step"));
    }
    let mut nums = [0.0; 3];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| err("not a number"))?;
    }
    let grid = GridSpec { start: nums[0], stop: nums[1], step: nums[2] };
    if !(grid.step > 0.0) || !(grid.start >= 0.0) || grid.stop <= grid.start {
        return Err(err("need 0 <= start < stop and step > 0"));
    }
    let steps = ((grid.stop - grid.start) / grid.step).round();
    if (grid.start + steps * grid.step - grid.stop).abs() > 1e-9 * grid.step.max(1.0) {
        return Err(err("span is not a whole number of steps"));
    }
    Ok(grid)
}

/// Parses `a:b[:r]` into a half-open interval with count multiplicity
/// (default 1).
pub fn parse_interval(text: &str) -> Result<IntervalSpec<f64>, RunError> {
    let err = |m: &str| RunError::Config(format!("interval {text:?}: {m}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(err("expected a:b[:r]"));
    }
    let a: f64 = parts[0].parse().map_err(|_| err("bad lower end"))?;
    let b: f64 = parts[1].parse().map_err(|_| err("bad upper end"))?;
    let r: u32 = match parts.get(2) {
        Some(p) => p.parse().map_err(|_| err("bad multiplicity"))?,
        None => 1,
    };
    IntervalSpec::new(a, b, r).map_err(RunError::Model)
}

/// Writes `ell,lambda` rows of the limiting intensity over the grid.
pub fn write_theory_csv(
    mu: f64,
    grid: GridSpec,
    with_meta: bool,
    out: &mut impl Write,
) -> Result<(), RunError> {
    if !(mu > 0.0) {
        return Err(RunError::Config("mu must be positive".into()));
    }
    let params = IntensityParams::new(mu);
    if with_meta {
        writeln!(
            out,
            "# tool=ribbonlab command=theory mu={mu} grid={}:{}:{}",
            grid.start, grid.stop, grid.step
        )?;
    }
    writeln!(out, "ell,lambda")?;
    for ell in grid.points() {
        writeln!(out, "{},{}", fmt17(ell), fmt17(intensity(ell, &params)))?;
    }
    Ok(())
}

/// Exact-vs-asymptotic volume rows over the doubling ladder 8, 16, .., gmax,
/// each with one boundary of length 12g.
pub fn volume_ratio_rows(gmax: u32) -> Vec<(u32, ScaledReal, ScaledReal, f64)> {
    let mut rows = Vec::new();
    let mut g = 8u32;
    while g <= gmax {
        let l = 12.0 * g as f64;
        let exact = exact_volume_g1(g, l);
        let asym = asymptotic_volume(g, 1, &[l]);
        rows.push((g, exact, asym, (exact / asym).as_f64()));
        g *= 2;
    }
    rows
}

/// Leading-coefficient-vs-saddle-point rows over the ladder 16, 32, .., gmax.
pub fn saddle_ratio_rows(gmax: u32) -> Vec<(u32, ScaledReal, ScaledReal, f64)> {
    let mut rows = Vec::new();
    let mut g = 16u32;
    while g <= gmax {
        let l = 12.0 * g as f64;
        let coeff = sinh_product_coeff(&[l], &[], 6 * g as usize - 3);
        let saddle = saddle_point_estimate(g, 1, &[l], &[]);
        rows.push((g, coeff, saddle, (coeff / saddle).as_f64()));
        g *= 2;
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeTable {
    Volume,
    Saddle,
    Both,
}

/// Writes the volume comparison tables: `g,exact,asymptotic,ratio` and/or
/// `g,coeff,saddle,ratio`, blank-line separated when both are requested.
pub fn write_volumes_csv(
    gmax: u32,
    table: VolumeTable,
    with_meta: bool,
    out: &mut impl Write,
) -> Result<(), RunError> {
    if gmax < 8 {
        return Err(RunError::Config("gmax must be at least 8".into()));
    }
    if with_meta {
        let family = match table {
            VolumeTable::Volume => "g1",
            VolumeTable::Saddle => "saddle",
            VolumeTable::Both => "both",
        };
        writeln!(out, "# tool=ribbonlab command=volumes family={family} gmax={gmax}")?;
    }
    if table != VolumeTable::Saddle {
        writeln!(out, "g,exact,asymptotic,ratio")?;
        for (g, exact, asym, ratio) in volume_ratio_rows(gmax) {
            writeln!(out, "{g},{exact},{asym},{}", fmt17(ratio))?;
        }
    }
    if table == VolumeTable::Both {
        writeln!(out)?;
    }
    if table != VolumeTable::Volume {
        writeln!(out, "g,coeff,saddle,ratio")?;
        for (g, coeff, saddle, ratio) in saddle_ratio_rows(gmax) {
            writeln!(out, "{g},{coeff},{saddle},{}", fmt17(ratio))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KkReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// One enumerated stable graph class in listing form.
#[derive(Debug, Clone, Serialize)]
pub struct GraphEntry {
    pub vertices: usize,
    pub edges: usize,
    pub aut: u64,
    pub separating: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kk: Option<KkReport>,
}

pub fn stablegraph_entries(
    genus: u32,
    leaves: usize,
    separating_only: bool,
    check_kk: bool,
) -> Result<Vec<GraphEntry>, RunError> {
    let mut entries = Vec::new();
    for (graph, aut) in enumerate_stable_graphs(genus, leaves)? {
        let separating = graph.is_separating();
        if separating_only && !separating {
            continue;
        }
        let kk = if check_kk && separating {
            let (lhs, rhs, holds) = lemma_kk_check(&graph)?;
            Some(KkReport { lhs: lhs.as_f64(), rhs: rhs.as_f64(), holds })
        } else {
            None
        };
        entries.push(GraphEntry {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            aut,
            separating,
            kk,
        });
    }
    Ok(entries)
}

/// Writes the graph listing as a JSON array, one entry per line; with a
/// bound constant the summed separating bound is appended as a final
/// `{"sum_bound": ..}` element.
pub fn write_stablegraphs_json(
    genus: u32,
    leaves: usize,
    separating_only: bool,
    check_kk: bool,
    sum_bound: Option<f64>,
    out: &mut impl Write,
) -> Result<(), RunError> {
    if let Some(c) = sum_bound {
        if !(c > 0.0) {
            return Err(RunError::Config("bound constant must be positive".into()));
        }
    }
    let entries = stablegraph_entries(genus, leaves, separating_only, check_kk)?;
    writeln!(out, "[")?;
    let mut first = true;
    for entry in &entries {
        if !first {
            writeln!(out, ",")?;
        }
        write!(out, "{}", serde_json::to_string(entry).expect("entry serializes"))?;
        first = false;
    }
    if let Some(c) = sum_bound {
        let total = sum_emleq_bound(genus, leaves, c)?;
        if !first {
            writeln!(out, ",")?;
        }
        write!(out, "{}", json!({ "sum_bound": total.as_f64() }))?;
        first = false;
    }
    if !first {
        writeln!(out)?;
    }
    writeln!(out, "]")?;
    Ok(())
}
