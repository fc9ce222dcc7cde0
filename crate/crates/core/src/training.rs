//! Grid-search training: backtest every parameter configuration over the
//! training windows, rank by Sharpe ratio or average relative return, then
//! re-run the winners over the testing windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::bands_from_sums;
use crate::market_data::{resample, select_periods, split_periods, MarketDataError, PeriodWindow, PriceSeries};
use crate::strategy::{decide_raw, ParamConfig, StrategyError, TradeDecision, D_RANGE, L_RANGE, N_RANGE, U_RANGE};
use crate::BASE_UNIT_SCALE;

#[derive(Debug, Error, PartialEq)]
pub enum TrainingError {
    #[error("invalid grid range: min {0} > max {1}")]
    InvalidRange(i64, i64),
    #[error("window [{start}, {end}] not covered by the series")]
    WindowOutOfRange { start: i64, end: i64 },
    #[error("initial balance must be positive")]
    InvalidInitial,
    #[error("fees must be within [0, 10000] bps, got {0}")]
    InvalidFees(i64),
    #[error("results compare different windows or balances")]
    WindowMismatch,
    #[error("all returns are equal; Sharpe ratio is undefined")]
    ZeroVariance,
    #[error("need at least 2 return samples, got {0}")]
    TooFewSamples(usize),
    #[error("no test windows supplied")]
    EmptyTestSet,
    #[error("no configurations to rank")]
    EmptyGrid,
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    MarketData(#[from] MarketDataError),
}

/// Candidate values per parameter axis: `{min, ⌊mean⌋, max}` of the allowed
/// range, duplicates collapsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpace {
    pub n_values: Vec<i64>,
    pub d_values: Vec<i64>,
    pub u_values: Vec<i64>,
    pub l_values: Vec<i64>,
}

impl GridSpace {
    /// The grid spanning the full allowed parameter ranges (81 configs).
    pub fn full() -> Self {
        Self {
            n_values: grid_values(N_RANGE.0, N_RANGE.1).expect("static range"),
            d_values: grid_values(D_RANGE.0, D_RANGE.1).expect("static range"),
            u_values: grid_values(U_RANGE.0, U_RANGE.1).expect("static range"),
            l_values: grid_values(L_RANGE.0, L_RANGE.1).expect("static range"),
        }
    }

    pub fn config_count(&self) -> usize {
        self.n_values.len() * self.d_values.len() * self.u_values.len() * self.l_values.len()
    }
}

/// `{min, max, ⌊(min+max)/2⌋}` sorted ascending, duplicates collapsed.
pub fn grid_values(min: i64, max: i64) -> Result<Vec<i64>, TrainingError> {
    if min > max {
        return Err(TrainingError::InvalidRange(min, max));
    }
    let mean = (min + max).div_euclid(2);
    let mut values = vec![min, mean, max];
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

/// Cartesian product of the grid axes in lexicographic (n, d, u, l) order.
pub fn enumerate_configs(space: &GridSpace) -> Vec<ParamConfig> {
    let mut configs = Vec::with_capacity(space.config_count());
    for &n in &space.n_values {
        for &d in &space.d_values {
            for &u in &space.u_values {
                for &l in &space.l_values {
                    configs.push(
                        ParamConfig::new(n, d, u, l).expect("grid drawn from valid ranges"),
                    );
                }
            }
        }
    }
    configs
}

/// Outcome of one simulated window. Balances are integer quote cents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub config: Option<ParamConfig>,
    pub window: PeriodWindow,
    pub initial: i64,
    pub end_balance: i64,
    pub return_pct: f64,
    /// Percentage points over buy-and-hold on the same window.
    pub relative_return_pp: f64,
    pub trade_count: u32,
}

fn window_bounds(
    series: &PriceSeries,
    window: &PeriodWindow,
) -> Result<(usize, usize), TrainingError> {
    let out_of_range = || TrainingError::WindowOutOfRange { start: window.start, end: window.end };
    let start_idx = series.index_of(window.start).ok_or_else(out_of_range)?;
    if window.end <= window.start || window.end > series.last().timestamp {
        return Err(out_of_range());
    }
    let first = series.first().timestamp;
    let end_idx = ((window.end - first) / series.period_seconds()) as usize;
    Ok((start_idx, end_idx.min(series.len() - 1)))
}

fn apply_fee(amount: i128, fees_bps: i64) -> i128 {
    amount * i128::from(10_000 - fees_bps) / 10_000
}

/// All-in/all-out simulation of `config` over one window.
///
/// At each candle inside the window with at least `n` candles of series
/// history, the bands are computed and the rule consulted. A buy converts
/// the whole quote balance to base at the close (minus fees); a sell does
/// the reverse. A signal in a direction the position cannot trade (buy with
/// no quote, sell with no base) is a no-op, which makes consecutive
/// identical signals no-ops. The final balance marks base to market at the
/// window's last close.
pub fn backtest(
    series: &PriceSeries,
    window: &PeriodWindow,
    config: &ParamConfig,
    fees_bps: i64,
    initial: i64,
) -> Result<BacktestResult, TrainingError> {
    if initial <= 0 {
        return Err(TrainingError::InvalidInitial);
    }
    if !(0..=10_000).contains(&fees_bps) {
        return Err(TrainingError::InvalidFees(fees_bps));
    }
    let (start_idx, end_idx) = window_bounds(series, window)?;
    let candles = series.candles();
    let n = config.n();
    let scale = i128::from(BASE_UNIT_SCALE);

    let mut quote = i128::from(initial);
    let mut base: i128 = 0;
    let mut trades = 0u32;
    // Rolling sums over the trailing n closes, advanced candle by candle.
    let mut sum: i128 = 0;
    let mut sum_sq: i128 = 0;
    let warmup = start_idx.saturating_sub(n - 1);
    for (i, candle) in candles.iter().enumerate().skip(warmup).take(end_idx + 1 - warmup) {
        let x = i128::from(candle.close);
        sum += x;
        sum_sq += x * x;
        if i >= warmup + n {
            let old = i128::from(candles[i - n].close);
            sum -= old;
            sum_sq -= old * old;
        }
        if i < start_idx || i + 1 < n {
            continue;
        }
        let bands = bands_from_sums(n, sum, sum_sq, config.d());
        let price = candle.close;
        match decide_raw(price, bands.upper, bands.lower, config) {
            TradeDecision::Buy if quote > 0 => {
                base += apply_fee(quote, fees_bps) * scale / i128::from(price);
                quote = 0;
                trades += 1;
            }
            TradeDecision::Sell if base > 0 => {
                quote += apply_fee(base * i128::from(price) / scale, fees_bps);
                base = 0;
                trades += 1;
            }
            _ => {}
        }
    }

    let last_close = i128::from(candles[end_idx].close);
    let end_balance = (quote + base * last_close / scale) as i64;
    let return_pct = percent_return(initial, end_balance);
    let baseline = buy_and_hold(series, window, initial)?;
    Ok(BacktestResult {
        config: Some(*config),
        window: *window,
        initial,
        end_balance,
        return_pct,
        relative_return_pp: return_pct - baseline.return_pct,
        trade_count: trades,
    })
}

/// Buy at the window's first close, hold to its last close, fee-free.
pub fn buy_and_hold(
    series: &PriceSeries,
    window: &PeriodWindow,
    initial: i64,
) -> Result<BacktestResult, TrainingError> {
    if initial <= 0 {
        return Err(TrainingError::InvalidInitial);
    }
    let (start_idx, end_idx) = window_bounds(series, window)?;
    let first = i128::from(series.candles()[start_idx].close);
    let last = i128::from(series.candles()[end_idx].close);
    let scale = i128::from(BASE_UNIT_SCALE);
    let base = i128::from(initial) * scale / first;
    let end_balance = (base * last / scale) as i64;
    Ok(BacktestResult {
        config: None,
        window: *window,
        initial,
        end_balance,
        return_pct: percent_return(initial, end_balance),
        relative_return_pp: 0.0,
        trade_count: 1,
    })
}

fn percent_return(initial: i64, end: i64) -> f64 {
    (end - initial) as f64 / initial as f64 * 100.0
}

/// Strategy return minus baseline return, in percentage points.
pub fn relative_return(
    strategy: &BacktestResult,
    baseline: &BacktestResult,
) -> Result<f64, TrainingError> {
    if strategy.window != baseline.window || strategy.initial != baseline.initial {
        return Err(TrainingError::WindowMismatch);
    }
    Ok(strategy.return_pct - baseline.return_pct)
}

/// Sharpe ratio: mean excess return over the population standard deviation
/// of excess returns.
pub fn sharpe(per_window_returns: &[f64], riskless: f64) -> Result<f64, TrainingError> {
    if per_window_returns.len() < 2 {
        return Err(TrainingError::TooFewSamples(per_window_returns.len()));
    }
    let excess: Vec<f64> = per_window_returns.iter().map(|r| r - riskless).collect();
    let m = mean(&excess);
    let sd = population_stddev(&excess, m);
    if sd == 0.0 {
        return Err(TrainingError::ZeroVariance);
    }
    Ok(m / sd)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_stddev(xs: &[f64], mean: f64) -> f64 {
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankingMethod {
    SharpeRatio,
    AverageReturn,
}

impl RankingMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sharpe" => Some(Self::SharpeRatio),
            "avg" | "average" => Some(Self::AverageReturn),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::SharpeRatio => "sharpe",
            Self::AverageReturn => "avg",
        }
    }
}

/// Max/min/mean/stddev summary of a set of relative returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub stddev: f64,
}

impl ReturnStats {
    pub fn from_returns(returns: &[f64]) -> Self {
        let m = mean(returns);
        Self {
            max: returns.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: returns.iter().copied().fold(f64::INFINITY, f64::min),
            mean: m,
            stddev: population_stddev(returns, m),
        }
    }
}

/// One ranked configuration with its per-window relative returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub config: ParamConfig,
    /// Training score under the report's method; preserved by `evaluate` so
    /// testing reports keep the training rank order.
    pub score: f64,
    pub stats: ReturnStats,
    pub relative_returns_pp: Vec<f64>,
}

/// A top-k table plus the aggregate row over the union of the k rows'
/// per-window returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub method: RankingMethod,
    pub rows: Vec<RankingRow>,
    pub overall: ReturnStats,
}

/// Per-config relative returns over the training windows, window-ordered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigReturns {
    pub config: ParamConfig,
    pub relative_returns_pp: Vec<f64>,
}

/// Backtest every config over every window. Configs run in parallel; the
/// result order matches the input config order regardless of scheduling.
pub fn training_returns(
    series: &PriceSeries,
    windows: &[PeriodWindow],
    configs: &[ParamConfig],
    fees_bps: i64,
    initial: i64,
) -> Result<Vec<ConfigReturns>, TrainingError> {
    configs
        .par_iter()
        .map(|config| {
            let returns = windows
                .iter()
                .map(|w| backtest(series, w, config, fees_bps, initial).map(|r| r.relative_return_pp))
                .collect::<Result<Vec<f64>, TrainingError>>()?;
            Ok(ConfigReturns { config: *config, relative_returns_pp: returns })
        })
        .collect()
}

/// Rank configurations and keep the top `k`. Ties break toward the
/// lexicographically smaller config so reports are reproducible.
pub fn rank(
    results: &[ConfigReturns],
    method: RankingMethod,
    k: usize,
) -> Result<RankingReport, TrainingError> {
    if results.is_empty() {
        return Err(TrainingError::EmptyGrid);
    }
    let mut scored: Vec<(f64, &ConfigReturns)> = results
        .iter()
        .map(|r| {
            let score = match method {
                RankingMethod::SharpeRatio => sharpe(&r.relative_returns_pp, 0.0)?,
                RankingMethod::AverageReturn => {
                    if r.relative_returns_pp.is_empty() {
                        return Err(TrainingError::TooFewSamples(0));
                    }
                    mean(&r.relative_returns_pp)
                }
            };
            Ok((score, r))
        })
        .collect::<Result<_, TrainingError>>()?;
    scored.sort_by(|(sa, ra), (sb, rb)| {
        sb.partial_cmp(sa).unwrap().then_with(|| ra.config.cmp(&rb.config))
    });

    let rows: Vec<RankingRow> = scored
        .into_iter()
        .take(k)
        .map(|(score, r)| RankingRow {
            config: r.config,
            score,
            stats: ReturnStats::from_returns(&r.relative_returns_pp),
            relative_returns_pp: r.relative_returns_pp.clone(),
        })
        .collect();
    let overall = overall_stats(&rows);
    Ok(RankingReport { method, rows, overall })
}

fn overall_stats(rows: &[RankingRow]) -> ReturnStats {
    let pooled: Vec<f64> = rows.iter().flat_map(|r| r.relative_returns_pp.iter().copied()).collect();
    ReturnStats::from_returns(&pooled)
}

/// Re-run the ranked configs over the testing windows. Row order and scores
/// carry over from training; the stats columns are recomputed on the test
/// returns.
pub fn evaluate(
    top: &RankingReport,
    series: &PriceSeries,
    test_windows: &[PeriodWindow],
    fees_bps: i64,
    initial: i64,
) -> Result<RankingReport, TrainingError> {
    if test_windows.is_empty() {
        return Err(TrainingError::EmptyTestSet);
    }
    let rows = top
        .rows
        .iter()
        .map(|row| {
            let returns = test_windows
                .iter()
                .map(|w| {
                    backtest(series, w, &row.config, fees_bps, initial)
                        .map(|r| r.relative_return_pp)
                })
                .collect::<Result<Vec<f64>, TrainingError>>()?;
            Ok(RankingRow {
                config: row.config,
                score: row.score,
                stats: ReturnStats::from_returns(&returns),
                relative_returns_pp: returns,
            })
        })
        .collect::<Result<Vec<RankingRow>, TrainingError>>()?;
    let overall = overall_stats(&rows);
    Ok(RankingReport { method: top.method, rows, overall })
}

/// Train on one series: select windows, split, backtest the grid, rank.
/// Returns the training report plus the windows used.
pub fn train(
    series: &PriceSeries,
    space: &GridSpace,
    method: RankingMethod,
    k: usize,
    stride_seconds: i64,
    fees_bps: i64,
    initial: i64,
) -> Result<(RankingReport, Vec<PeriodWindow>, Vec<PeriodWindow>), TrainingError> {
    let windows = select_periods(series, stride_seconds)?;
    let (train_windows, test_windows) = split_periods(&windows)?;
    let configs = enumerate_configs(space);
    let results = training_returns(series, &train_windows, &configs, fees_bps, initial)?;
    let report = rank(&results, method, k)?;
    Ok((report, train_windows, test_windows))
}

/// One period's evaluated report in a frequency study.
pub type PeriodReport = (i64, RankingReport);

/// Re-run the whole train→test pipeline at each trading period. Window
/// selection happens per period, so the windows themselves may change.
#[allow(clippy::too_many_arguments)]
pub fn frequency_study(
    series: &PriceSeries,
    periods: &[i64],
    space: &GridSpace,
    method: RankingMethod,
    k: usize,
    stride_seconds: i64,
    fees_bps: i64,
    initial: i64,
) -> Result<Vec<PeriodReport>, TrainingError> {
    periods
        .iter()
        .map(|&period| {
            let resampled = resample(series, period)?;
            let (report, _train_w, test_w) =
                train(&resampled, space, method, k, stride_seconds, fees_bps, initial)?;
            let tested = evaluate(&report, &resampled, &test_w, fees_bps, initial)?;
            Ok((period, tested))
        })
        .collect()
}
