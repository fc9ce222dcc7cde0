//! Layered run configuration: CLI flags override the config file, which
//! overrides the built-in defaults.

use serde::{Deserialize, Serialize};
use std::path::Path;

use zktrade_core::chain_sim::ChainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub pair: String,
    /// Native candle period of the input CSV, seconds.
    pub period_seconds: i64,
    /// Trading period the pipeline runs at; resampled from the input when
    /// it differs.
    pub trading_period_seconds: i64,
    /// Window-selection stride, seconds.
    pub stride_seconds: i64,
    pub fees_bps: i64,
    /// Backtest starting balance, quote cents.
    pub initial_cents: i64,
    pub top_k: usize,
    /// "sharpe", "avg", or "both".
    pub method: String,
    pub users: u32,
    /// Per-user deposit, quote cents.
    pub deposit_cents: i64,
    pub rounds: u32,
    pub slippage_bps: i64,
    /// Base-asset subunits the bot holds at epoch start.
    pub initial_base: i64,
    pub chain: ChainConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            pair: "ETH:USDC".into(),
            period_seconds: 600,
            trading_period_seconds: 600,
            stride_seconds: 86_400,
            fees_bps: 0,
            initial_cents: 100_000,
            top_k: 5,
            method: "both".into(),
            users: 1_000,
            deposit_cents: 100_000,
            rounds: 100,
            slippage_bps: 0,
            initial_base: 0,
            chain: ChainConfig::default(),
        }
    }
}

/// A config file is either a bare `AppConfig` or a previously written run
/// manifest (whose `config` field is reused, so a run can be replayed from
/// its own manifest).
pub fn load_config(path: &Path) -> Result<AppConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("bad config JSON: {e}"))?;
    let config_value = match value.get("config") {
        Some(embedded) if value.get("command").is_some() => embedded.clone(),
        _ => value,
    };
    serde_json::from_value(config_value).map_err(|e| format!("bad config: {e}"))
}
