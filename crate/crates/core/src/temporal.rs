//! Temporal views of a statement corpus: snapshot series over calendar-month
//! periods, core-rank trajectories, top-core emergence, hierarchy buckets
//! with their overlap series, and daily edge-event counts.
//!
//! Periods are anchored at the first calendar month holding any dated item
//! and are `months_per_period` long. A final period that runs past the last
//! month of data is kept and flagged partial.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStats, DateRange};
use crate::error::{Error, Result};
use crate::extract::StatementSentence;
use crate::graph::{k_core_decompose, CoreDecomposition, StatementNetwork};

/// A calendar month, stored as months since year 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth(i32);

impl YearMonth {
    pub fn of(date: NaiveDate) -> Self {
        YearMonth(date.year() * 12 + date.month0() as i32)
    }

    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month));
        YearMonth(year * 12 + month as i32 - 1)
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    pub fn month(self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    pub fn plus(self, months: i32) -> Self {
        YearMonth(self.0 + months)
    }

    pub fn months_since(self, earlier: YearMonth) -> i32 {
        self.0 - earlier.0
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year(), self.month(), 1).expect("valid month")
    }

    pub fn last_day(self) -> NaiveDate {
        self.plus(1).first_day().pred_opt().expect("valid date")
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Period {
    /// 1-based position in the series.
    pub index: usize,
    pub start: YearMonth,
    /// Last month of the period (inclusive).
    pub end: YearMonth,
    /// The data ends before `end`.
    pub partial: bool,
}

impl Period {
    pub fn range(&self) -> DateRange {
        DateRange::new(self.start.first_day(), self.end.last_day())
    }

    /// `2013-04` for one-month periods, `2013-04/2013-09` otherwise; partial
    /// periods get a ` (partial)` suffix.
    pub fn label(&self) -> String {
        let mut label = if self.start == self.end {
            self.start.to_string()
        } else {
            format!("{}/{}", self.start, self.end)
        };
        if self.partial {
            label.push_str(" (partial)");
        }
        label
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Consecutive periods of `months_per_period` months covering `span`.
pub fn periods(span: DateRange, months_per_period: u32) -> Result<Vec<Period>> {
    if months_per_period == 0 {
        return Err(Error::Config("period length must be at least one month".into()));
    }
    let len = months_per_period as i32;
    let anchor = YearMonth::of(span.first);
    let last = YearMonth::of(span.last);
    let count = last.months_since(anchor) / len + 1;
    Ok((0..count)
        .map(|i| {
            let start = anchor.plus(i * len);
            let end = start.plus(len - 1);
            Period {
                index: i as usize + 1,
                start,
                end,
                partial: end > last,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesMode {
    /// Snapshot i holds every event up to the end of period i.
    Cumulative,
    /// Snapshot i holds only the events of period i.
    PerPeriod,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub period: Period,
    pub network: StatementNetwork,
    pub cores: CoreDecomposition,
}

#[derive(Debug, Clone)]
pub struct SnapshotSeries {
    pub months_per_period: u32,
    pub mode: SeriesMode,
    pub snapshots: Vec<Snapshot>,
}

impl SnapshotSeries {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

fn statement_span(statements: &[StatementSentence]) -> Option<DateRange> {
    let mut iter = statements.iter().map(|s| s.published);
    let first = iter.next()?;
    Some(iter.fold(DateRange::day(first), |mut r, d| {
        r.extend(d);
        r
    }))
}

/// Splits statements into periods over `span` (widened to cover every
/// statement) and builds one network per period. An empty statement list
/// gives an empty series.
pub fn build_snapshot_series(
    statements: &[StatementSentence],
    span: Option<DateRange>,
    months_per_period: u32,
    mode: SeriesMode,
) -> Result<SnapshotSeries> {
    let mut series = SnapshotSeries {
        months_per_period,
        mode,
        snapshots: Vec::new(),
    };
    let Some(data_span) = statement_span(statements) else {
        if months_per_period == 0 {
            return Err(Error::Config("period length must be at least one month".into()));
        }
        return Ok(series);
    };
    let span = match span {
        Some(mut s) => {
            s.extend(data_span.first);
            s.extend(data_span.last);
            s
        }
        None => data_span,
    };
    let periods = periods(span, months_per_period)?;
    let anchor = periods[0].start;

    let mut buckets: Vec<Vec<&StatementSentence>> = vec![Vec::new(); periods.len()];
    for s in statements {
        let idx = YearMonth::of(s.published).months_since(anchor) / months_per_period as i32;
        buckets[idx as usize].push(s);
    }

    let mut running = StatementNetwork::new();
    for (period, mut members) in periods.into_iter().zip(buckets) {
        members.sort_by(|a, b| {
            (a.published, &a.article_id, a.sentence_index).cmp(&(b.published, &b.article_id, b.sentence_index))
        });
        let network = match mode {
            SeriesMode::Cumulative => {
                for s in members {
                    running.add_statement(s)?;
                }
                running.sort_events();
                running.clone()
            }
            SeriesMode::PerPeriod => StatementNetwork::build(members, None)?,
        };
        let cores = k_core_decompose(&network);
        series.snapshots.push(Snapshot {
            period,
            network,
            cores,
        });
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrajectoryPoint {
    pub period: String,
    pub core_rank: usize,
}

/// Core number of one node across a series (0 where absent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub node: String,
    pub values: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn ranks(&self) -> Vec<usize> {
        self.values.iter().map(|p| p.core_rank).collect()
    }
}

pub fn core_rank_trajectories<'a, I>(series: &SnapshotSeries, nodes: I) -> Vec<Trajectory>
where
    I: IntoIterator<Item = &'a str>,
{
    nodes
        .into_iter()
        .map(|node| Trajectory {
            node: node.to_owned(),
            values: series
                .snapshots
                .iter()
                .map(|s| TrajectoryPoint {
                    period: s.period.label(),
                    core_rank: s.cores.rank(node),
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emergence {
    pub period: Period,
    /// Members of the final snapshot's top core.
    pub top_core: BTreeSet<String>,
    /// False when only the final period contains the final top core.
    pub before_final: bool,
}

/// Earliest period whose top core contains the final snapshot's top core.
pub fn top_core_emergence(series: &SnapshotSeries) -> Result<Emergence> {
    if series.mode != SeriesMode::Cumulative {
        return Err(Error::Unsupported(
            "top-core emergence needs a cumulative series".into(),
        ));
    }
    let last = series.last().ok_or(Error::EmptySeries)?;
    let final_top = last.cores.top_core()?;
    let position = series
        .snapshots
        .iter()
        .position(|s| {
            s.cores
                .top_core()
                .is_ok_and(|top| final_top.is_subset(&top))
        })
        .expect("final snapshot contains its own top core");
    Ok(Emergence {
        period: series.snapshots[position].period,
        top_core: final_top,
        before_final: position + 1 < series.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyBucket {
    pub period: Period,
    pub threshold: usize,
    /// Nodes with core number strictly above `threshold`.
    pub members: BTreeSet<String>,
}

pub fn buckets_from_series(series: &SnapshotSeries, threshold: usize) -> Vec<HierarchyBucket> {
    series
        .snapshots
        .iter()
        .map(|s| HierarchyBucket {
            period: s.period,
            threshold,
            members: s
                .cores
                .core_number
                .iter()
                .filter(|(_, &c)| c > threshold)
                .map(|(n, _)| n.clone())
                .collect(),
        })
        .collect()
}

/// One bucket per non-cumulative period network.
pub fn hierarchy_buckets(
    statements: &[StatementSentence],
    span: Option<DateRange>,
    period_months: u32,
    threshold: usize,
) -> Result<Vec<HierarchyBucket>> {
    let series = build_snapshot_series(statements, span, period_months, SeriesMode::PerPeriod)?;
    Ok(buckets_from_series(&series, threshold))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMetric {
    /// `|A ∩ B| / |A ∪ B|`
    #[default]
    Jaccard,
    /// `|A ∩ B| / |A|`
    Containment,
}

/// Percentage overlap of two sets and whether the result is the
/// empty-denominator fallback of 0.
pub fn overlap_percent(a: &BTreeSet<String>, b: &BTreeSet<String>, metric: OverlapMetric) -> (f64, bool) {
    let common = a.intersection(b).count();
    let denominator = match metric {
        OverlapMetric::Jaccard => a.union(b).count(),
        OverlapMetric::Containment => a.len(),
    };
    if denominator == 0 {
        (0.0, true)
    } else {
        (100.0 * common as f64 / denominator as f64, false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapPoint {
    pub from: String,
    pub to: String,
    pub percent: f64,
    /// Denominator was empty; `percent` is the 0 fallback.
    pub empty: bool,
}

impl OverlapPoint {
    pub fn label(&self) -> String {
        format!("{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapSeries {
    pub metric: OverlapMetric,
    pub points: Vec<OverlapPoint>,
}

impl OverlapSeries {
    pub fn percents(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.percent).collect()
    }
}

/// Overlap of each consecutive bucket pair, in period order.
pub fn overlap_series(buckets: &[HierarchyBucket], metric: OverlapMetric) -> Result<OverlapSeries> {
    if buckets.len() < 2 {
        return Err(Error::TooFewBuckets(buckets.len()));
    }
    let points = buckets
        .windows(2)
        .map(|w| {
            let (percent, empty) = overlap_percent(&w[0].members, &w[1].members, metric);
            if empty {
                log::warn!(
                    "overlap {} -> {}: empty bucket, reporting 0",
                    w[0].period,
                    w[1].period
                );
            }
            OverlapPoint {
                from: w[0].period.label(),
                to: w[1].period.label(),
                percent,
                empty,
            }
        })
        .collect();
    Ok(OverlapSeries { metric, points })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DailyEdgeCounts {
    pub source: String,
    /// Every day of the source's date range, zero-filled.
    pub counts: BTreeMap<NaiveDate, usize>,
}

impl DailyEdgeCounts {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Edge events per day for `source`, counted with multiplicity.
pub fn daily_edge_counts(
    statements: &[StatementSentence],
    stats: &CorpusStats,
    source: &str,
) -> Result<DailyEdgeCounts> {
    let mut range = stats
        .sources
        .get(source)
        .ok_or_else(|| Error::UnknownSource(source.to_owned()))?
        .range();
    let mine: Vec<&StatementSentence> = statements.iter().filter(|s| s.source == source).collect();
    for s in &mine {
        range.extend(s.published);
    }
    let mut counts: BTreeMap<NaiveDate, usize> = range.days().map(|d| (d, 0)).collect();
    for s in mine {
        *counts.get_mut(&s.published).expect("day in range") += s.pair_count();
    }
    Ok(DailyEdgeCounts {
        source: source.to_owned(),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub value: usize,
    pub days: usize,
}

/// Shape of a daily-count distribution. Quantiles use the nearest-rank rule
/// on the sorted values; all statistics are 0 when there are no days.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub source: String,
    pub days: usize,
    pub total_events: usize,
    pub min: usize,
    pub median: usize,
    pub mean: f64,
    pub p90: usize,
    pub p99: usize,
    pub max: usize,
    pub histogram: Vec<HistogramBin>,
}

fn nearest_rank(sorted: &[usize], q: f64) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn distribution_summary(counts: &DailyEdgeCounts) -> DistributionSummary {
    let mut values: Vec<usize> = counts.counts.values().copied().collect();
    values.sort_unstable();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in &values {
        *histogram.entry(v).or_default() += 1;
    }
    let total: usize = values.iter().sum();
    DistributionSummary {
        source: counts.source.clone(),
        days: values.len(),
        total_events: total,
        min: values.first().copied().unwrap_or(0),
        median: nearest_rank(&values, 0.5),
        mean: if values.is_empty() {
            0.0
        } else {
            total as f64 / values.len() as f64
        },
        p90: nearest_rank(&values, 0.9),
        p99: nearest_rank(&values, 0.99),
        max: values.last().copied().unwrap_or(0),
        histogram: histogram
            .into_iter()
            .map(|(value, days)| HistogramBin { value, days })
            .collect(),
    }
}
