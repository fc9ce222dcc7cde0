//! Simple moving average, population standard deviation, and Bollinger bands
//! over integer cent prices.
//!
//! All values truncate toward zero the way the on-chain bot would compute
//! them. The standard deviation is the truncation of the exact real value:
//! `⌊sqrt(Σ(x − mean)²/n)⌋` with the exact rational mean, computed here as
//! `isqrt(n·Σx² − (Σx)²) / n` in integers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::PriceSeries;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndicatorError {
    #[error("insufficient history: need {needed} candles, have {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("timestamp {0} is not on the series grid")]
    UnknownTimestamp(i64),
    #[error("window size must be at least 1")]
    EmptyWindow,
    #[error("standard deviation count must be non-negative, got {0}")]
    NegativeDeviations(i64),
}

/// Bollinger bands at one candle, all in integer cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BollingerBands {
    pub sma: i64,
    pub stddev: i64,
    pub upper: i64,
    pub lower: i64,
}

/// Truncated mean of the last `window_n` closes ending at `at` inclusive.
pub fn sma(series: &PriceSeries, at: i64, window_n: usize) -> Result<i64, IndicatorError> {
    let window = trailing_window(series, at, window_n)?;
    let sum: i128 = window.iter().map(|c| i128::from(c.close)).sum();
    Ok((sum / window_n as i128) as i64)
}

/// Bollinger bands of the last `n` closes ending at `at`, with `d` standard
/// deviations on each side.
pub fn bollinger(
    series: &PriceSeries,
    at: i64,
    n: usize,
    d: i64,
) -> Result<BollingerBands, IndicatorError> {
    if d < 0 {
        return Err(IndicatorError::NegativeDeviations(d));
    }
    let window = trailing_window(series, at, n)?;
    let (sum, sum_sq) = window.iter().fold((0i128, 0i128), |(s, q), c| {
        let x = i128::from(c.close);
        (s + x, q + x * x)
    });
    Ok(bands_from_sums(n, sum, sum_sq, d))
}

/// Bands from precomputed window sums. Shared by [`bollinger`] and the
/// backtester's rolling window so band math has a single definition.
pub fn bands_from_sums(n: usize, sum: i128, sum_sq: i128, d: i64) -> BollingerBands {
    let n = n as i128;
    let sma = (sum / n) as i64;
    // n·Σx² − (Σx)² = n²·variance, so ⌊sqrt(variance)⌋ = isqrt(·)/n.
    let scaled_var = n * sum_sq - sum * sum;
    let stddev = ((scaled_var as u128).isqrt() / n as u128) as i64;
    BollingerBands { sma, stddev, upper: sma + d * stddev, lower: sma - d * stddev }
}

fn trailing_window(
    series: &PriceSeries,
    at: i64,
    n: usize,
) -> Result<&[crate::market_data::Candle], IndicatorError> {
    if n == 0 {
        return Err(IndicatorError::EmptyWindow);
    }
    let idx = series.index_of(at).ok_or(IndicatorError::UnknownTimestamp(at))?;
    if idx + 1 < n {
        return Err(IndicatorError::InsufficientHistory { needed: n, available: idx + 1 });
    }
    Ok(&series.candles()[idx + 1 - n..=idx])
}
