//! Session metrics: zero-order-hold resampling, Interpersonal Perception (IP),
//! Pearson correlation, click rate, rating range and dyad disagreement.
//!
//! IP is the slope of an ordinary least-squares line fitted to the
//! cumulative sum of a resampled rating trace. The abscissa is the sample
//! index, so a session held at a constant rating `c` has IP exactly `c`, and
//! the value does not depend on the resampling period (the cumulative sum
//! grows by one sample's rating per sample whatever the period).
//! [`interpersonal_perception_timed`] fits the time integral of the rating
//! against seconds instead; its slope is in the same units and serves as the
//! cross-period check.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Cause, SessionLog};

/// 10 Hz, the resolution the IP measure is defined on.
pub const DEFAULT_PERIOD: f64 = 0.1;

/// Timecodes within this many seconds of a grid point count as at or before it.
const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("log has no events")]
    EmptyLog,
    #[error("resampling period must be a positive number of seconds, got {0}")]
    InvalidPeriod(f64),
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined: an input has zero variance")]
    ZeroVariance,
    #[error("click rate needs at least two rating changes, found {0}")]
    TooFewChanges(usize),
    #[error("series periods differ ({0} s vs {1} s)")]
    PeriodMismatch(f64, f64),
    #[error("series have no overlapping samples")]
    EmptyOverlap,
}

/// A rating trace sampled on a uniform grid `origin + k * period`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSeries {
    pub period: f64,
    pub origin: f64,
    pub values: Vec<i32>,
}

impl RatingSeries {
    pub fn new(period: f64, values: Vec<i32>) -> Result<Self, AnalysisError> {
        check_period(period)?;
        Ok(Self {
            period,
            origin: 0.0,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.origin + index as f64 * self.period
    }

    /// Running sum `S_n = values[0] + ... + values[n]`.
    pub fn cumulative_sum(&self) -> Vec<i64> {
        self.values
            .iter()
            .scan(0i64, |acc, &v| {
                *acc += i64::from(v);
                Some(*acc)
            })
            .collect()
    }
}

/// A least-squares line and its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IpResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn check_period(period: f64) -> Result<(), AnalysisError> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(AnalysisError::InvalidPeriod(period))
    }
}

/// Zero-order hold of the log's ratings onto `k * period` for every grid
/// point in `[0, media_duration]`.
pub fn resample(log: &SessionLog, period: f64) -> Result<RatingSeries, AnalysisError> {
    check_period(period)?;
    if log.events.is_empty() {
        return Err(AnalysisError::EmptyLog);
    }
    let count = (log.media_duration.max(0.0) / period + GRID_EPS).floor() as usize + 1;
    let mut values = Vec::with_capacity(count);
    let mut current = log.scale.neutral();
    let mut events = log.events.iter().peekable();
    for k in 0..count {
        let t = k as f64 * period;
        while let Some(e) = events.next_if(|e| e.timecode.to_seconds() <= t + GRID_EPS) {
            current = e.rating;
        }
        values.push(current);
    }
    Ok(RatingSeries {
        period,
        origin: 0.0,
        values,
    })
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Ordinary least squares of `y` on `x` using centered two-pass sums.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<IpResult, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(AnalysisError::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean_x = compensated_sum(x.iter().copied()) / nf;
    let mean_y = compensated_sum(y.iter().copied()) / nf;
    let sxx = compensated_sum(x.iter().map(|&a| (a - mean_x) * (a - mean_x)));
    let syy = compensated_sum(y.iter().map(|&b| (b - mean_y) * (b - mean_y)));
    let sxy = compensated_sum(x.iter().zip(y).map(|(&a, &b)| (a - mean_x) * (b - mean_y)));
    if sxx == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    // a constant dependent variable is fitted exactly by a flat line
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        ((sxy / sxx) * (sxy / syy)).min(1.0)
    };
    Ok(IpResult {
        slope,
        intercept,
        r_squared,
    })
}

/// Fits the cumulative sum of the series against the 0-based sample index.
pub fn interpersonal_perception(series: &RatingSeries) -> Result<IpResult, AnalysisError> {
    let n = series.len();
    if n < 2 {
        return Err(AnalysisError::TooShort { needed: 2, got: n });
    }
    let y: Vec<f64> = series
        .cumulative_sum()
        .into_iter()
        .map(|s| s as f64)
        .collect();
    let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    linear_fit(&x, &y)
}

/// Fits the rating's time integral `period * S_n` against elapsed seconds.
///
/// The slope is in rating units and, unlike the index-based fit, the
/// intercept is in rating-seconds.
pub fn interpersonal_perception_timed(series: &RatingSeries) -> Result<IpResult, AnalysisError> {
    let n = series.len();
    if n < 2 {
        return Err(AnalysisError::TooShort { needed: 2, got: n });
    }
    let y: Vec<f64> = series
        .cumulative_sum()
        .into_iter()
        .map(|s| s as f64 * series.period)
        .collect();
    let x: Vec<f64> = (0..n).map(|i| series.time_at(i)).collect();
    linear_fit(&x, &y)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(AnalysisError::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean_x = compensated_sum(x.iter().copied()) / nf;
    let mean_y = compensated_sum(y.iter().copied()) / nf;
    let sxx = compensated_sum(x.iter().map(|&a| (a - mean_x) * (a - mean_x)));
    let syy = compensated_sum(y.iter().map(|&b| (b - mean_y) * (b - mean_y)));
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    let sxy = compensated_sum(x.iter().zip(y).map(|(&a, &b)| (a - mean_x) * (b - mean_y)));
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mean time in seconds between successive rating changes.
pub fn click_rate(log: &SessionLog) -> Result<f64, AnalysisError> {
    let times: Vec<f64> = log
        .change_events()
        .map(|e| e.timecode.to_seconds())
        .collect();
    if times.len() < 2 {
        return Err(AnalysisError::TooFewChanges(times.len()));
    }
    let gaps = times.windows(2).map(|w| w[1] - w[0]);
    Ok(compensated_sum(gaps) / (times.len() - 1) as f64)
}

/// Highest minus lowest rating seen in the session.
pub fn rating_range(log: &SessionLog) -> Result<i32, AnalysisError> {
    let ratings = log.events.iter().map(|e| e.rating);
    let max = ratings.clone().max().ok_or(AnalysisError::EmptyLog)?;
    let min = ratings.min().ok_or(AnalysisError::EmptyLog)?;
    Ok(max - min)
}

/// Mean squared difference between two raters over their common prefix.
pub fn dyad_disagreement(a: &RatingSeries, b: &RatingSeries) -> Result<f64, AnalysisError> {
    if a.period != b.period {
        return Err(AnalysisError::PeriodMismatch(a.period, b.period));
    }
    let n = a.len().min(b.len());
    if n == 0 {
        return Err(AnalysisError::EmptyOverlap);
    }
    let sum: i64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            d * d
        })
        .sum();
    Ok(sum as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyCorrelation {
    pub r: f64,
    /// IP of each session, in input order.
    pub ip: Vec<f64>,
}

/// Correlates each session's IP (at 10 Hz) with its static post-session rating.
pub fn validate_against_survey(
    sessions: &[(SessionLog, i32)],
) -> Result<SurveyCorrelation, AnalysisError> {
    if sessions.len() < 3 {
        return Err(AnalysisError::TooShort {
            needed: 3,
            got: sessions.len(),
        });
    }
    let mut ip = Vec::with_capacity(sessions.len());
    for (log, _) in sessions {
        let series = resample(log, DEFAULT_PERIOD)?;
        ip.push(interpersonal_perception(&series)?.slope);
    }
    let statics: Vec<f64> = sessions.iter().map(|(_, s)| f64::from(*s)).collect();
    let r = pearson(&ip, &statics)?;
    Ok(SurveyCorrelation { r, ip })
}

/// One row of the per-session analysis table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionMetrics {
    pub token: String,
    pub participant_id: Option<String>,
    pub ip: IpResult,
    /// `None` when the session has fewer than two rating changes.
    pub click_rate: Option<f64>,
    pub rating_range: i32,
}

impl SessionMetrics {
    pub fn compute(log: &SessionLog, series: &RatingSeries) -> Result<Self, AnalysisError> {
        Ok(Self {
            token: log.session_token.clone(),
            participant_id: log.participant_id.clone(),
            ip: interpersonal_perception(series)?,
            click_rate: match click_rate(log) {
                Ok(rate) => Some(rate),
                Err(AnalysisError::TooFewChanges(_)) => None,
                Err(e) => return Err(e),
            },
            rating_range: rating_range(log)?,
        })
    }
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Writes the session table: `token,participant_id,ip_slope,intercept,r_squared,click_rate,rating_range`.
/// Missing values are written as empty fields.
pub fn write_metrics_table<W: Write>(rows: &[SessionMetrics], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "token",
        "participant_id",
        "ip_slope",
        "intercept",
        "r_squared",
        "click_rate",
        "rating_range",
    ])
    .map_err(csv_error)?;
    for row in rows {
        w.write_record([
            row.token.clone(),
            row.participant_id.clone().unwrap_or_default(),
            row.ip.slope.to_string(),
            row.ip.intercept.to_string(),
            row.ip.r_squared.to_string(),
            row.click_rate.map(|c| c.to_string()).unwrap_or_default(),
            row.rating_range.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()
}

/// Writes `sample_index,time_seconds,cumulative_sum` for plotting.
pub fn write_cumulative_series<W: Write>(series: &RatingSeries, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_index", "time_seconds", "cumulative_sum"])
        .map_err(csv_error)?;
    for (i, s) in series.cumulative_sum().into_iter().enumerate() {
        w.write_record([i.to_string(), series.time_at(i).to_string(), s.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()
}

/// Counts events by cause, for quick summaries.
pub fn cause_counts(log: &SessionLog) -> [(Cause, usize); 3] {
    let count = |c| log.events.iter().filter(|e| e.cause == c).count();
    [
        (Cause::IntervalTick, count(Cause::IntervalTick)),
        (Cause::RatingChange, count(Cause::RatingChange)),
        (Cause::PlaybackToggle, count(Cause::PlaybackToggle)),
    ]
}
