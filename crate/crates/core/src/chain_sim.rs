//! Simulated on-chain environment: price oracle, on-chain bot contract
//! (public parameters, subscriptions, settlement), verifier contract, gas
//! ledger, and latency sampling.
//!
//! The chain is a single logical actor; contract calls are serialized in
//! round order, and the gas ledger is the only mutable state.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::{bollinger, IndicatorError};
use crate::market_data::PriceSeries;
use crate::strategy::{PublicParams, StrategyError};
use crate::zkproof::{verify, Proof, VerificationKey};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("oracle has no candle at timestamp {0}")]
    NoData(i64),
    #[error("verifier contract not deployed")]
    VerifierNotDeployed,
    #[error("user {0} already subscribed")]
    DuplicateUser(String),
    #[error("deposit amount must be positive")]
    ZeroAmount,
    #[error("no subscriptions to settle")]
    EmptyPool,
    #[error("final pool must be non-negative, got {0}")]
    NegativePool(i64),
    #[error("unknown latency phase '{0}'")]
    UnknownPhase(String),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Per-call gas constants and the conversion rates to USD.
///
/// The defaults reproduce the measured round: 281,715 + 191,687 = 473,402
/// gas ≈ 0.04592 ETH ≈ $150 at 97 gwei and $3,267 per ETH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GasSchedule {
    pub public_params_gas: u64,
    pub verifier_gas_mean: u64,
    pub gas_price_gwei: f64,
    pub eth_usd: f64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self {
            public_params_gas: 281_715,
            verifier_gas_mean: 191_687,
            gas_price_gwei: 97.0,
            eth_usd: 3_267.0,
        }
    }
}

impl GasSchedule {
    pub fn gas_to_eth(&self, gas: u64) -> f64 {
        gas as f64 * self.gas_price_gwei * 1e-9
    }

    pub fn gas_to_usd(&self, gas: u64) -> f64 {
        self.gas_to_eth(gas) * self.eth_usd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Contract {
    OnChainBot,
    Verifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasEntry {
    pub round_id: u64,
    pub contract: Contract,
    pub gas: u64,
    pub timestamp: i64,
}

/// Append-only log of gas charged per contract call.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GasLedger {
    entries: Vec<GasEntry>,
}

impl GasLedger {
    pub fn push(&mut self, entry: GasEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[GasEntry] {
        &self.entries
    }

    pub fn total_gas(&self) -> u64 {
        self.entries.iter().map(|e| e.gas).sum()
    }

    pub fn total_for(&self, contract: Contract) -> u64 {
        self.entries.iter().filter(|e| e.contract == contract).map(|e| e.gas).sum()
    }

    /// CSV export with header `round,contract,gas,seconds` (seconds is the
    /// unix timestamp of the candle that triggered the call).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,contract,gas,seconds\n");
        for e in &self.entries {
            let contract = match e.contract {
                Contract::OnChainBot => "on_chain_bot",
                Contract::Verifier => "verifier",
            };
            out.push_str(&format!("{},{},{},{}\n", e.round_id, contract, e.gas, e.timestamp));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subscription {
    pub user_id: String,
    pub deposit: i64,
}

/// Protocol phases with measured latency distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    PublicParams,
    ProofGeneration,
    Verification,
    Trade,
}

impl Phase {
    pub const ALL: [Phase; 4] =
        [Phase::PublicParams, Phase::ProofGeneration, Phase::Verification, Phase::Trade];

    pub fn parse(s: &str) -> Result<Self, ChainError> {
        match s {
            "public_params" => Ok(Phase::PublicParams),
            "proof_generation" => Ok(Phase::ProofGeneration),
            "verification" => Ok(Phase::Verification),
            "trade" => Ok(Phase::Trade),
            other => Err(ChainError::UnknownPhase(other.to_string())),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Phase::PublicParams => "public_params",
            Phase::ProofGeneration => "proof_generation",
            Phase::Verification => "verification",
            Phase::Trade => "trade",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LatencyFamily {
    /// Log-normal with the phase mean, clipped to [min, max].
    LogNormal,
    /// Uniform over [min, max]; ignores the mean.
    Uniform,
}

/// One phase's latency distribution, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLatency {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Log-space shape parameter; larger values skew harder to the right.
    pub sigma: f64,
}

/// Latency distributions for every protocol phase. Defaults follow the
/// measured means and observed bounds; on-chain phases are heavy-tailed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyModel {
    pub family: LatencyFamily,
    pub public_params: PhaseLatency,
    pub proof_generation: PhaseLatency,
    pub verification: PhaseLatency,
    pub trade: PhaseLatency,
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            family: LatencyFamily::LogNormal,
            public_params: PhaseLatency { mean: 22.8, min: 1.2, max: 415.8, sigma: 1.0 },
            proof_generation: PhaseLatency { mean: 0.5, min: 0.2, max: 0.8, sigma: 0.25 },
            verification: PhaseLatency { mean: 23.0, min: 1.6, max: 317.2, sigma: 1.0 },
            trade: PhaseLatency { mean: 2.3, min: 1.0, max: 10.0, sigma: 0.3 },
        }
    }
}

impl LatencyModel {
    pub fn phase(&self, phase: Phase) -> &PhaseLatency {
        match phase {
            Phase::PublicParams => &self.public_params,
            Phase::ProofGeneration => &self.proof_generation,
            Phase::Verification => &self.verification,
            Phase::Trade => &self.trade,
        }
    }

    /// Draw one latency sample for `phase`, clipped to the phase bounds.
    pub fn sample(&self, phase: Phase, rng: &mut impl Rng) -> f64 {
        let p = self.phase(phase);
        let raw = match self.family {
            LatencyFamily::LogNormal => {
                // mu chosen so the unclipped mean is the phase mean.
                let mu = p.mean.ln() - p.sigma * p.sigma / 2.0;
                LogNormal::new(mu, p.sigma).expect("finite parameters").sample(rng)
            }
            LatencyFamily::Uniform => rng.random_range(p.min..=p.max),
        };
        raw.clamp(p.min, p.max)
    }
}

/// Chain-level configuration: gas constants, latency model, and whether the
/// verifier gas jitters around its mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub gas: GasSchedule,
    pub latency: LatencyModel,
    pub jitter: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { gas: GasSchedule::default(), latency: LatencyModel::default(), jitter: true }
    }
}

/// Verifier gas jitter half-width (fraction of the mean).
const VERIFIER_JITTER: f64 = 0.02;

/// The simulated chain: oracle feed, on-chain bot, verifier, gas ledger.
#[derive(Debug, Clone)]
pub struct Chain {
    feed: PriceSeries,
    schedule: GasSchedule,
    ledger: GasLedger,
    subscriptions: Vec<Subscription>,
    verifier: Option<VerificationKey>,
    jitter: bool,
    rng: ChaCha8Rng,
}

impl Chain {
    pub fn new(feed: PriceSeries, schedule: GasSchedule, jitter: bool, seed: u64) -> Self {
        Self {
            feed,
            schedule,
            ledger: GasLedger::default(),
            subscriptions: Vec::new(),
            verifier: None,
            jitter,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    pub fn ledger(&self) -> &GasLedger {
        &self.ledger
    }

    pub fn feed(&self) -> &PriceSeries {
        &self.feed
    }

    pub fn deploy_verifier(&mut self, vk: VerificationKey) {
        self.verifier = Some(vk);
    }

    /// The oracle's close at `t`; fails between candles (assumption: the
    /// oracle serves exact feed data).
    pub fn oracle_get_price(&self, t: i64) -> Result<i64, ChainError> {
        self.feed.close_at(t).ok_or(ChainError::NoData(t))
    }

    /// On-chain bot call: fetch the oracle price and compute the bands.
    /// Charges `public_params_gas` — the same every call.
    pub fn get_public_params(
        &mut self,
        round_id: u64,
        t: i64,
        n: usize,
        d: i64,
    ) -> Result<PublicParams, ChainError> {
        let price = self.oracle_get_price(t)?;
        let bands = bollinger(&self.feed, t, n, d)?;
        let params = PublicParams::new(price, bands.upper, bands.lower)?;
        self.ledger.push(GasEntry {
            round_id,
            contract: Contract::OnChainBot,
            gas: self.schedule.public_params_gas,
            timestamp: t,
        });
        Ok(params)
    }

    /// Verifier contract call: proof verification plus the on-chain bot's
    /// field-wise comparison of the proof's plaintext public inputs against
    /// the values it provided. Gas jitters ±2% around the verifier mean
    /// unless jitter is disabled.
    pub fn verify_and_check(
        &mut self,
        round_id: u64,
        t: i64,
        proof: &Proof,
        expected: &PublicParams,
    ) -> Result<bool, ChainError> {
        let vk = self.verifier.as_ref().ok_or(ChainError::VerifierNotDeployed)?;
        let gas = if self.jitter {
            let factor = 1.0 + self.rng.random_range(-VERIFIER_JITTER..=VERIFIER_JITTER);
            (self.schedule.verifier_gas_mean as f64 * factor).round() as u64
        } else {
            self.schedule.verifier_gas_mean
        };
        self.ledger.push(GasEntry { round_id, contract: Contract::Verifier, gas, timestamp: t });
        Ok(verify(vk, proof) && proof.public_inputs == *expected)
    }

    /// Subscribe a user by pooling their deposit into the on-chain bot.
    pub fn subscribe(&mut self, user_id: &str, amount: i64) -> Result<(), ChainError> {
        if amount <= 0 {
            return Err(ChainError::ZeroAmount);
        }
        if self.subscriptions.iter().any(|s| s.user_id == user_id) {
            return Err(ChainError::DuplicateUser(user_id.to_string()));
        }
        self.subscriptions.push(Subscription { user_id: user_id.to_string(), deposit: amount });
        Ok(())
    }

    pub fn subscriptions(&self) -> &[Subscription] {
        &self.subscriptions
    }

    pub fn total_pool(&self) -> i64 {
        self.subscriptions.iter().map(|s| s.deposit).sum()
    }

    pub fn settle_epoch(&self, final_pool: i64) -> Result<SettlementReport, ChainError> {
        settle_epoch(final_pool, &self.subscriptions, &self.ledger, &self.schedule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSettlement {
    pub user_id: String,
    pub deposit: i64,
    /// Share of the final pool, proportional to the deposit, cents.
    pub gross_payout: i64,
    /// Equal share of the epoch's total gas cost, cents.
    pub gas_share: i64,
    pub net_payout: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementReport {
    pub final_pool: i64,
    pub total_gas: u64,
    pub total_gas_usd_cents: i64,
    pub users: Vec<UserSettlement>,
}

/// Split the final pool pro-rata by deposit and the epoch's gas cost
/// equally per user. Both splits conserve money to the cent: leftover
/// cents after integer division are assigned one per user starting from
/// the first subscriber, so no share drifts more than one cent from the
/// exact split.
pub fn settle_epoch(
    final_pool: i64,
    subscriptions: &[Subscription],
    ledger: &GasLedger,
    schedule: &GasSchedule,
) -> Result<SettlementReport, ChainError> {
    if subscriptions.is_empty() {
        return Err(ChainError::EmptyPool);
    }
    if final_pool < 0 {
        return Err(ChainError::NegativePool(final_pool));
    }
    let total_deposits: i128 = subscriptions.iter().map(|s| i128::from(s.deposit)).sum();
    let mut gross: Vec<i64> = subscriptions
        .iter()
        .map(|s| (i128::from(final_pool) * i128::from(s.deposit) / total_deposits) as i64)
        .collect();
    let gross_remainder = (final_pool - gross.iter().sum::<i64>()) as usize;
    for g in gross.iter_mut().take(gross_remainder) {
        *g += 1;
    }

    let total_gas = ledger.total_gas();
    let total_gas_usd_cents = (schedule.gas_to_usd(total_gas) * 100.0).round() as i64;
    let n = subscriptions.len() as i64;
    let base_share = total_gas_usd_cents / n;
    let gas_remainder = (total_gas_usd_cents - base_share * n) as usize;

    let users = subscriptions
        .iter()
        .zip(gross)
        .enumerate()
        .map(|(i, (sub, gross_payout))| {
            let gas_share = base_share + i64::from(i < gas_remainder);
            UserSettlement {
                user_id: sub.user_id.clone(),
                deposit: sub.deposit,
                gross_payout,
                gas_share,
                net_payout: gross_payout - gas_share,
            }
        })
        .collect();

    Ok(SettlementReport { final_pool, total_gas, total_gas_usd_cents, users })
}
