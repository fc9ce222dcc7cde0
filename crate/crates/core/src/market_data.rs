//! Candle ingestion, resampling, and training/testing period selection.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Length of a training/testing window in seconds (30 days).
pub const WINDOW_SECONDS: i64 = 30 * 86_400;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarketDataError {
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    #[error("non-uniform candle spacing at timestamp {0}")]
    NonUniformSpacing(i64),
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(i64),
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("series has no candles")]
    EmptySeries,
    #[error("invalid candle (timestamp {timestamp}, close {close})")]
    InvalidCandle { timestamp: i64, close: i64 },
    #[error("period {period} is not a positive multiple of {base}")]
    NotAMultiple { period: i64, base: i64 },
    #[error("series spans less than {WINDOW_SECONDS} seconds")]
    SeriesTooShort,
    #[error("stride must be positive, got {0}")]
    InvalidStride(i64),
    #[error("window list is empty")]
    EmptyList,
    #[error("io error: {0}")]
    Io(String),
}

/// One price candle. `close` is the only field the pipeline computes on;
/// open/high/low/volume ride along when the source provides them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candle {
    pub timestamp: i64,
    /// Close price in integer cents of the quote asset.
    pub close: i64,
    pub open: Option<i64>,
    pub high: Option<i64>,
    pub low: Option<i64>,
    pub volume: Option<i64>,
}

impl Candle {
    pub fn new(timestamp: i64, close: i64) -> Result<Self, MarketDataError> {
        if close <= 0 || timestamp < 0 {
            return Err(MarketDataError::InvalidCandle { timestamp, close });
        }
        Ok(Self { timestamp, close, open: None, high: None, low: None, volume: None })
    }
}

/// A gapless, uniformly spaced series of candles for one asset pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceSeries {
    pair: String,
    period_seconds: i64,
    candles: Vec<Candle>,
}

impl PriceSeries {
    /// Validates every series invariant: non-empty, positive closes,
    /// strictly increasing timestamps spaced exactly `period_seconds` apart.
    pub fn new(
        pair: impl Into<String>,
        period_seconds: i64,
        candles: Vec<Candle>,
    ) -> Result<Self, MarketDataError> {
        if period_seconds <= 0 {
            return Err(MarketDataError::NotAMultiple { period: period_seconds, base: 1 });
        }
        if candles.is_empty() {
            return Err(MarketDataError::EmptySeries);
        }
        for c in &candles {
            if c.close <= 0 || c.timestamp < 0 {
                return Err(MarketDataError::InvalidCandle {
                    timestamp: c.timestamp,
                    close: c.close,
                });
            }
        }
        for pair_w in candles.windows(2) {
            let gap = pair_w[1].timestamp - pair_w[0].timestamp;
            if gap == 0 {
                return Err(MarketDataError::DuplicateTimestamp(pair_w[1].timestamp));
            }
            if gap != period_seconds {
                return Err(MarketDataError::NonUniformSpacing(pair_w[1].timestamp));
            }
        }
        Ok(Self { pair: pair.into(), period_seconds, candles })
    }

    pub fn pair(&self) -> &str {
        &self.pair
    }

    pub fn period_seconds(&self) -> i64 {
        self.period_seconds
    }

    pub fn candles(&self) -> &[Candle] {
        &self.candles
    }

    pub fn len(&self) -> usize {
        self.candles.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty series
    }

    pub fn first(&self) -> &Candle {
        &self.candles[0]
    }

    pub fn last(&self) -> &Candle {
        &self.candles[self.candles.len() - 1]
    }

    /// Seconds between the first and last candle.
    pub fn span_seconds(&self) -> i64 {
        self.last().timestamp - self.first().timestamp
    }

    /// Index of the candle at `timestamp`, if one exists. O(1) because the
    /// grid is uniform.
    pub fn index_of(&self, timestamp: i64) -> Option<usize> {
        let first = self.first().timestamp;
        if timestamp < first || (timestamp - first) % self.period_seconds != 0 {
            return None;
        }
        let idx = ((timestamp - first) / self.period_seconds) as usize;
        (idx < self.candles.len()).then_some(idx)
    }

    pub fn close_at(&self, timestamp: i64) -> Option<i64> {
        self.index_of(timestamp).map(|i| self.candles[i].close)
    }
}

/// Role of a 30-day window in the train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Train,
    Test,
}

/// A 30-day window aligned to the candle grid. `select_periods` tags every
/// window `Train` provisionally; `split_periods` assigns the final roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodWindow {
    pub start: i64,
    pub end: i64,
    pub role: Role,
}

/// Parse a non-negative decimal string into integer cents, rounding half to
/// even at the cent boundary. Exact: no float arithmetic.
pub fn price_to_cents(text: &str) -> Option<i64> {
    let text = text.trim();
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits_only = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !digits_only(int_part) || !digits_only(frac_part) {
        return None;
    }
    let whole: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let mut frac = frac_part.bytes();
    let d1 = frac.next().map_or(0, |b| i64::from(b - b'0'));
    let d2 = frac.next().map_or(0, |b| i64::from(b - b'0'));
    let mut cents = whole.checked_mul(100)?.checked_add(d1 * 10 + d2)?;
    let rest: Vec<u8> = frac.collect();
    if let Some((&head, tail)) = rest.split_first() {
        let head = head - b'0';
        let round_up = match head.cmp(&5) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                tail.iter().any(|&b| b != b'0') || cents % 2 == 1
            }
        };
        if round_up {
            cents = cents.checked_add(1)?;
        }
    }
    Some(cents)
}

/// Load a candle CSV (`timestamp,open,high,low,close,volume` header; only
/// `timestamp` and `close` are required). Rows are sorted by timestamp,
/// duplicates rejected, spacing must be exactly `period_seconds`.
pub fn load_candles(
    path: impl AsRef<Path>,
    pair: &str,
    period_seconds: i64,
) -> Result<PriceSeries, MarketDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path.as_ref())
        .map_err(|e| MarketDataError::Io(e.to_string()))?;

    let headers = reader
        .headers()
        .map_err(|e| MarketDataError::Io(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let ts_col = col("timestamp").ok_or(MarketDataError::MalformedRow(1))?;
    let close_col = col("close").ok_or(MarketDataError::MalformedRow(1))?;
    let open_col = col("open");
    let high_col = col("high");
    let low_col = col("low");
    let volume_col = col("volume");

    let mut candles = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|_| MarketDataError::MalformedRow(line))?;
        let field = |idx: usize| record.get(idx).filter(|s| !s.is_empty());
        let optional = |idx: Option<usize>| -> Result<Option<i64>, MarketDataError> {
            match idx.and_then(field) {
                Some(s) => price_to_cents(s)
                    .map(Some)
                    .ok_or(MarketDataError::MalformedRow(line)),
                None => Ok(None),
            }
        };

        let timestamp: i64 = field(ts_col)
            .and_then(|s| s.parse().ok())
            .ok_or(MarketDataError::MalformedRow(line))?;
        let close = field(close_col)
            .and_then(price_to_cents)
            .ok_or(MarketDataError::MalformedRow(line))?;
        if close <= 0 || timestamp < 0 {
            return Err(MarketDataError::MalformedRow(line));
        }
        candles.push(Candle {
            timestamp,
            close,
            open: optional(open_col)?,
            high: optional(high_col)?,
            low: optional(low_col)?,
            volume: optional(volume_col)?,
        });
    }
    if candles.is_empty() {
        return Err(MarketDataError::EmptyFile);
    }
    candles.sort_by_key(|c| c.timestamp);
    PriceSeries::new(pair, period_seconds, candles)
}

/// Downsample to a coarser period. Each output candle closes at the last
/// close of its bucket; a trailing partial bucket is dropped.
pub fn resample(
    series: &PriceSeries,
    new_period_seconds: i64,
) -> Result<PriceSeries, MarketDataError> {
    let base = series.period_seconds();
    if new_period_seconds <= 0 || new_period_seconds % base != 0 {
        return Err(MarketDataError::NotAMultiple { period: new_period_seconds, base });
    }
    let factor = (new_period_seconds / base) as usize;
    let mut out = Vec::with_capacity(series.len() / factor);
    for bucket in series.candles().chunks_exact(factor) {
        let first = &bucket[0];
        let last = &bucket[bucket.len() - 1];
        let all = |f: fn(&Candle) -> Option<i64>| {
            bucket.iter().map(f).collect::<Option<Vec<i64>>>()
        };
        out.push(Candle {
            timestamp: first.timestamp,
            close: last.close,
            open: first.open,
            high: all(|c| c.high).map(|v| v.into_iter().max().unwrap()),
            low: all(|c| c.low).map(|v| v.into_iter().min().unwrap()),
            volume: all(|c| c.volume).map(|v| v.into_iter().sum()),
        });
    }
    PriceSeries::new(series.pair(), new_period_seconds, out)
}

/// Every 30-day window (stride `step_seconds`) over which buy-and-hold loses
/// money, i.e. the window's last close is strictly below its first close.
/// Candidate starts that do not land on the candle grid are skipped.
pub fn select_periods(
    series: &PriceSeries,
    step_seconds: i64,
) -> Result<Vec<PeriodWindow>, MarketDataError> {
    if step_seconds <= 0 {
        return Err(MarketDataError::InvalidStride(step_seconds));
    }
    if series.span_seconds() < WINDOW_SECONDS {
        return Err(MarketDataError::SeriesTooShort);
    }
    let first_ts = series.first().timestamp;
    let last_ts = series.last().timestamp;
    let period = series.period_seconds();

    let mut windows = Vec::new();
    let mut start = first_ts;
    while start + WINDOW_SECONDS <= last_ts {
        if (start - first_ts) % period == 0 {
            let end = start + WINDOW_SECONDS;
            let first_close = series.close_at(start).expect("aligned start");
            let last_idx = ((end - first_ts) / period) as usize;
            let last_close = series.candles()[last_idx.min(series.len() - 1)].close;
            if last_close < first_close {
                windows.push(PeriodWindow { start, end, role: Role::Train });
            }
        }
        start += step_seconds;
    }
    Ok(windows)
}

/// Render cents as a two-decimal price string ("200012" → "2000.12").
pub fn cents_to_decimal(cents: i64) -> String {
    format!("{}.{:02}", cents / 100, cents % 100)
}

/// Canonical CSV rendering of a series; `load_candles` round-trips it.
pub fn series_to_csv(series: &PriceSeries) -> String {
    let mut out = String::from("timestamp,open,high,low,close,volume\n");
    let cell = |v: Option<i64>| v.map(cents_to_decimal).unwrap_or_default();
    for c in series.candles() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.timestamp,
            cell(c.open),
            cell(c.high),
            cell(c.low),
            cents_to_decimal(c.close),
            cell(c.volume),
        ));
    }
    out
}

/// Split windows into training and testing halves, order preserved. Odd
/// counts put the extra window in training.
pub fn split_periods(
    windows: &[PeriodWindow],
) -> Result<(Vec<PeriodWindow>, Vec<PeriodWindow>), MarketDataError> {
    if windows.is_empty() {
        return Err(MarketDataError::EmptyList);
    }
    let train_len = windows.len().div_ceil(2);
    let train = windows[..train_len]
        .iter()
        .map(|w| PeriodWindow { role: Role::Train, ..*w })
        .collect();
    let test = windows[train_len..]
        .iter()
        .map(|w| PeriodWindow { role: Role::Test, ..*w })
        .collect();
    Ok((train, test))
}
