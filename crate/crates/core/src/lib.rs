//! Core library for a privacy-preserving on-chain trading bot simulator.
//!
//! The pipeline runs end to end on a desk machine: ingest candle data,
//! train a parametrized Bollinger-band strategy by grid search, prove each
//! trade decision with a public/private-input proof scheme, and replay the
//! full oracle → on-chain bot → prover → verifier → private DEX round with
//! gas and latency accounting.
//!
//! Prices are integer cents end to end; the indicator and strategy math is
//! truncating integer arithmetic, identical to what the decision circuit
//! evaluates, so backtests and proofs can never disagree.

pub mod chain_sim;
pub mod dex_sim;
pub mod indicators;
pub mod market_data;
pub mod orchestrator;
pub mod strategy;
pub mod synthetic;
pub mod training;
pub mod zkproof;

/// Subunits per base-asset unit (1e8, satoshi-style). Quote assets use cents.
pub const BASE_UNIT_SCALE: i64 = 100_000_000;
