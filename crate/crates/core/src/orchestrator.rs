//! End-to-end trade rounds and multi-round epochs: oracle price → on-chain
//! public parameters → decision → proof → on-chain verification → private
//! DEX swap, with every step traced, timed, and gas-accounted.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain_sim::{
    Chain, ChainConfig, Contract, GasEntry, LatencyModel, Phase, SettlementReport,
};
use crate::dex_sim::{Dex, DexError};
use crate::market_data::PriceSeries;
use crate::strategy::{decide, ParamConfig, TradeDecision};
use crate::zkproof::{prove, setup, ProvingKey, Witness};
use crate::BASE_UNIT_SCALE;

#[derive(Debug, Error, PartialEq)]
pub enum OrchestratorError {
    #[error("feed too short: need {needed} candles, have {available}")]
    FeedExhausted { needed: usize, available: usize },
    #[error("invalid epoch config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Chain(#[from] crate::chain_sim::ChainError),
    #[error(transparent)]
    Dex(#[from] DexError),
}

/// Fault injection for binding tests: mutate one public-input field of the
/// proof after proving, before on-chain verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TamperMode {
    #[default]
    None,
    Price,
    Upper,
    Lower,
}

/// One message of the round sequence. `Decide` deliberately carries no
/// payload: a serialized trace must not reveal which way the bot decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "msg", rename_all = "snake_case")]
pub enum TraceMessage {
    GetPublicParams,
    Decide,
    Prove,
    SubmitProof,
    PublicParamCheck,
    VerifyResult { ok: bool },
    Swap { commitment: String },
    Abort { reason: String },
}

/// Latency samples drawn for one round, seconds. Phases that never ran
/// (hold rounds, aborted rounds) stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundLatencies {
    pub public_params: Option<f64>,
    pub proof_generation: Option<f64>,
    pub verification: Option<f64>,
    pub trade: Option<f64>,
}

impl RoundLatencies {
    pub fn get(&self, phase: Phase) -> Option<f64> {
        match phase {
            Phase::PublicParams => self.public_params,
            Phase::ProofGeneration => self.proof_generation,
            Phase::Verification => self.verification,
            Phase::Trade => self.trade,
        }
    }

    /// End-to-end time when every phase ran.
    pub fn end_to_end(&self) -> Option<f64> {
        Some(self.public_params? + self.proof_generation? + self.verification? + self.trade?)
    }
}

/// Ordered record of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRoundTrace {
    pub round_id: u64,
    pub timestamp: i64,
    pub messages: Vec<TraceMessage>,
    pub latencies: RoundLatencies,
    pub gas: Vec<GasEntry>,
}

impl TradeRoundTrace {
    pub fn completed_swap(&self) -> bool {
        self.messages.iter().any(|m| matches!(m, TraceMessage::Swap { .. }))
    }

    pub fn aborted(&self) -> bool {
        self.messages.iter().any(|m| matches!(m, TraceMessage::Abort { .. }))
    }

    /// A hold: the round stopped right after the decision.
    pub fn held(&self) -> bool {
        self.messages.last() == Some(&TraceMessage::Decide)
    }
}

#[derive(Serialize)]
struct TraceLine<'a> {
    round: u64,
    #[serde(flatten)]
    message: &'a TraceMessage,
}

/// JSON-lines rendering of traces, one message per line.
pub fn traces_to_jsonl(traces: &[TradeRoundTrace]) -> String {
    let mut out = String::new();
    for trace in traces {
        for message in &trace.messages {
            let line = TraceLine { round: trace.round_id, message };
            out.push_str(&serde_json::to_string(&line).expect("trace serializes"));
            out.push('\n');
        }
    }
    out
}

/// Check a trace against the round automaton:
///
/// ```text
/// GetPublicParams → Decide → Prove → SubmitProof → PublicParamCheck
///   → VerifyResult(true)  → Swap
///   → VerifyResult(false) → Abort
/// ```
///
/// Every prefix of the path is valid (a hold stops after `Decide`), an
/// `Abort` may terminate the round at any non-terminal point, and `Swap`
/// is reachable only through `VerifyResult(true)`.
pub fn conformance_check(trace: &TradeRoundTrace) -> bool {
    use TraceMessage::*;

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Start,
        GotParams,
        Decided,
        Proved,
        Submitted,
        Checked,
        Accepted,
        Rejected,
        Done,
    }
    let mut state = State::Start;
    for message in &trace.messages {
        state = match (state, message) {
            (State::Start, GetPublicParams) => State::GotParams,
            (State::GotParams, Decide) => State::Decided,
            (State::Decided, Prove) => State::Proved,
            (State::Proved, SubmitProof) => State::Submitted,
            (State::Submitted, PublicParamCheck) => State::Checked,
            (State::Checked, VerifyResult { ok: true }) => State::Accepted,
            (State::Checked, VerifyResult { ok: false }) => State::Rejected,
            (State::Accepted, Swap { .. }) => State::Done,
            (State::Rejected, Abort { .. }) => State::Done,
            (
                State::Start
                | State::GotParams
                | State::Decided
                | State::Proved
                | State::Submitted
                | State::Checked
                | State::Accepted,
                Abort { .. },
            ) => State::Done,
            _ => return false,
        };
    }
    true
}

/// Epoch parameters: the trained config plus chain, DEX, and pool settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochConfig {
    pub params: ParamConfig,
    pub rounds: u32,
    pub users: u32,
    /// Per-user deposit, quote cents.
    pub deposit: i64,
    pub chain: ChainConfig,
    pub slippage_bps: i64,
    pub seed: u64,
    /// Base-asset subunits the bot starts with (besides the quote pool).
    pub initial_base: i64,
    pub tamper: TamperMode,
}

impl EpochConfig {
    pub fn new(params: ParamConfig, rounds: u32, users: u32, deposit: i64, seed: u64) -> Self {
        Self {
            params,
            rounds,
            users,
            deposit,
            chain: ChainConfig::default(),
            slippage_bps: 0,
            seed,
            initial_base: 0,
            tamper: TamperMode::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStat {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl LatencyStat {
    fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        Some(Self {
            count: samples.len(),
            mean: samples.iter().sum::<f64>() / samples.len() as f64,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Per-phase and end-to-end latency summaries over an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLatency {
    pub public_params: Option<LatencyStat>,
    pub proof_generation: Option<LatencyStat>,
    pub verification: Option<LatencyStat>,
    pub trade: Option<LatencyStat>,
    /// Sum of all four phases, over rounds that completed a trade.
    pub end_to_end: Option<LatencyStat>,
}

/// Headline numbers of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub rounds: u32,
    pub trades: u32,
    pub holds: u32,
    pub aborts: u32,
    pub latency: EpochLatency,
    pub total_gas: u64,
    pub on_chain_bot_gas: u64,
    pub verifier_gas: u64,
    pub gas_eth: f64,
    pub gas_usd: f64,
    pub initial_pool: i64,
    pub final_pool: i64,
    pub pool_return_pct: f64,
    pub settlement: SettlementReport,
}

/// An executed epoch: the aggregate report, every round trace, and what a
/// chain observer saw of the DEX.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRun {
    pub report: EpochReport,
    pub traces: Vec<TradeRoundTrace>,
    pub observer: crate::dex_sim::ObserverView,
}

const BOT_USER: &str = "bot";
const LIQUIDITY_USER: &str = "liquidity";
const BASE_ASSET: &str = "ETH";
const QUOTE_ASSET: &str = "USDC";
/// Liquidity-desk funding per side; effectively infinite at desk scale.
const LIQUIDITY_FUNDING: i64 = 10_000_000_000_000_000;

/// Drives rounds against one chain and one DEX instance.
pub struct Orchestrator {
    chain: Chain,
    dex: Dex,
    proving: ProvingKey,
    params: ParamConfig,
    latency: LatencyModel,
    latency_rng: ChaCha8Rng,
    nonce_rng: ChaCha8Rng,
    tamper: TamperMode,
}

impl Orchestrator {
    /// Wire a chain, DEX, keys, and bot funds from an epoch config.
    pub fn new(feed: &PriceSeries, cfg: &EpochConfig) -> Result<Self, OrchestratorError> {
        if cfg.rounds == 0 {
            return Err(OrchestratorError::BadConfig("round count must be >= 1".into()));
        }
        if cfg.users == 0 {
            return Err(OrchestratorError::BadConfig("need at least one subscriber".into()));
        }
        if cfg.deposit <= 0 {
            return Err(OrchestratorError::BadConfig("deposit must be positive".into()));
        }
        let needed = cfg.params.n() - 1 + cfg.rounds as usize;
        if needed > feed.len() {
            return Err(OrchestratorError::FeedExhausted { needed, available: feed.len() });
        }

        let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
        let chain_seed = master.next_u64();
        let latency_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let nonce_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let mut setup_seed = [0u8; 16];
        master.fill_bytes(&mut setup_seed);

        let mut chain = Chain::new(feed.clone(), cfg.chain.gas, cfg.chain.jitter, chain_seed);
        let keys = setup(&setup_seed);
        chain.deploy_verifier(keys.verification.clone());
        for i in 0..cfg.users {
            chain.subscribe(&format!("user-{i:05}"), cfg.deposit)?;
        }

        let mut dex =
            Dex::new(BASE_ASSET, QUOTE_ASSET, BASE_UNIT_SCALE, cfg.slippage_bps, LIQUIDITY_USER);
        dex.deposit(LIQUIDITY_USER, BASE_ASSET, LIQUIDITY_FUNDING)?;
        dex.deposit(LIQUIDITY_USER, QUOTE_ASSET, LIQUIDITY_FUNDING)?;
        dex.deposit(BOT_USER, QUOTE_ASSET, chain.total_pool())?;
        if cfg.initial_base > 0 {
            dex.deposit(BOT_USER, BASE_ASSET, cfg.initial_base)?;
        }

        Ok(Self {
            chain,
            dex,
            proving: keys.proving,
            params: cfg.params,
            latency: cfg.chain.latency,
            latency_rng,
            nonce_rng,
            tamper: cfg.tamper,
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn dex(&self) -> &Dex {
        &self.dex
    }

    /// Bot holdings marked to market at `price_cents`, in quote cents.
    pub fn pool_value(&self, price_cents: i64) -> i64 {
        let quote = i128::from(self.dex.balance_of(BOT_USER, QUOTE_ASSET));
        let base = i128::from(self.dex.balance_of(BOT_USER, BASE_ASSET));
        (quote + base * i128::from(price_cents) / i128::from(BASE_UNIT_SCALE)) as i64
    }

    /// Execute one round at candle time `t`. Failures never propagate: they
    /// terminate the trace with an `Abort` message.
    pub fn run_round(&mut self, round_id: u64, t: i64) -> TradeRoundTrace {
        let mut trace = TradeRoundTrace {
            round_id,
            timestamp: t,
            messages: Vec::with_capacity(7),
            latencies: RoundLatencies::default(),
            gas: Vec::new(),
        };
        let gas_mark = self.chain.ledger().entries().len();
        let abort = |trace: &mut TradeRoundTrace, chain: &Chain, reason: String| {
            trace.messages.push(TraceMessage::Abort { reason });
            trace.gas = chain.ledger().entries()[gas_mark..].to_vec();
        };

        trace.messages.push(TraceMessage::GetPublicParams);
        trace.latencies.public_params =
            Some(self.latency.sample(Phase::PublicParams, &mut self.latency_rng));
        let params = match self.chain.get_public_params(
            round_id,
            t,
            self.params.n(),
            self.params.d(),
        ) {
            Ok(p) => p,
            Err(e) => {
                abort(&mut trace, &self.chain, e.to_string());
                return trace;
            }
        };

        trace.messages.push(TraceMessage::Decide);
        let decision = decide(&params, &self.params);
        let quote = self.dex.balance_of(BOT_USER, QUOTE_ASSET);
        let base = self.dex.balance_of(BOT_USER, BASE_ASSET);
        // A signal the position cannot execute (buy with no quote, sell with
        // no base) is a hold: the bot pays no gas proving a no-op trade.
        let plan = match decision {
            TradeDecision::Buy if quote > 0 => Some((1u8, self.params.l(), QUOTE_ASSET, quote)),
            TradeDecision::Sell if base > 0 => Some((0u8, self.params.u(), BASE_ASSET, base)),
            _ => None,
        };
        let Some((flag, bound, give_asset, give_amount)) = plan else {
            trace.gas = self.chain.ledger().entries()[gas_mark..].to_vec();
            return trace;
        };

        trace.messages.push(TraceMessage::Prove);
        trace.latencies.proof_generation =
            Some(self.latency.sample(Phase::ProofGeneration, &mut self.latency_rng));
        let witness = Witness { buy_sell_flag: flag, bound_percentage: bound };
        let mut nonce = [0u8; 16];
        self.nonce_rng.fill_bytes(&mut nonce);
        let mut proof = match prove(&self.proving, &params, &witness, &nonce) {
            Ok(p) => p,
            Err(e) => {
                abort(&mut trace, &self.chain, e.to_string());
                return trace;
            }
        };
        match self.tamper {
            TamperMode::None => {}
            TamperMode::Price => proof.public_inputs.price += 1,
            TamperMode::Upper => proof.public_inputs.upper += 1,
            TamperMode::Lower => proof.public_inputs.lower += 1,
        }

        trace.messages.push(TraceMessage::SubmitProof);
        trace.messages.push(TraceMessage::PublicParamCheck);
        trace.latencies.verification =
            Some(self.latency.sample(Phase::Verification, &mut self.latency_rng));
        let ok = match self.chain.verify_and_check(round_id, t, &proof, &params) {
            Ok(ok) => ok,
            Err(e) => {
                abort(&mut trace, &self.chain, e.to_string());
                return trace;
            }
        };
        trace.messages.push(TraceMessage::VerifyResult { ok });
        if !ok {
            abort(&mut trace, &self.chain, "public parameter check failed".into());
            return trace;
        }

        trace.latencies.trade = Some(self.latency.sample(Phase::Trade, &mut self.latency_rng));
        match self.dex.swap(BOT_USER, give_asset, give_amount, params.price) {
            Ok(receipt) => trace.messages.push(TraceMessage::Swap {
                commitment: receipt.commitment.digest_hex(),
            }),
            Err(e) => {
                abort(&mut trace, &self.chain, e.to_string());
                return trace;
            }
        }
        trace.gas = self.chain.ledger().entries()[gas_mark..].to_vec();
        trace
    }
}

/// Run a full epoch: one round per candle starting at the first candle with
/// enough indicator history, then settlement at the last round's price.
pub fn run_epoch(feed: &PriceSeries, cfg: &EpochConfig) -> Result<EpochRun, OrchestratorError> {
    let mut orch = Orchestrator::new(feed, cfg)?;
    let warmup = cfg.params.n() - 1;

    let mut traces = Vec::with_capacity(cfg.rounds as usize);
    for k in 0..cfg.rounds {
        let t = feed.candles()[warmup + k as usize].timestamp;
        traces.push(orch.run_round(u64::from(k), t));
    }

    let last_price = feed.candles()[warmup + cfg.rounds as usize - 1].close;
    let initial_pool = orch.chain.total_pool();
    let final_pool = orch.pool_value(last_price);
    let settlement = orch.chain.settle_epoch(final_pool)?;

    let phase_samples = |phase: Phase| -> Vec<f64> {
        traces.iter().filter_map(|tr| tr.latencies.get(phase)).collect()
    };
    let e2e: Vec<f64> = traces.iter().filter_map(|tr| tr.latencies.end_to_end()).collect();
    let latency = EpochLatency {
        public_params: LatencyStat::from_samples(&phase_samples(Phase::PublicParams)),
        proof_generation: LatencyStat::from_samples(&phase_samples(Phase::ProofGeneration)),
        verification: LatencyStat::from_samples(&phase_samples(Phase::Verification)),
        trade: LatencyStat::from_samples(&phase_samples(Phase::Trade)),
        end_to_end: LatencyStat::from_samples(&e2e),
    };

    let ledger = orch.chain.ledger();
    let total_gas = ledger.total_gas();
    let schedule = *orch.chain.schedule();
    let report = EpochReport {
        rounds: cfg.rounds,
        trades: traces.iter().filter(|t| t.completed_swap()).count() as u32,
        holds: traces.iter().filter(|t| t.held()).count() as u32,
        aborts: traces.iter().filter(|t| t.aborted()).count() as u32,
        latency,
        total_gas,
        on_chain_bot_gas: ledger.total_for(Contract::OnChainBot),
        verifier_gas: ledger.total_for(Contract::Verifier),
        gas_eth: schedule.gas_to_eth(total_gas),
        gas_usd: schedule.gas_to_usd(total_gas),
        initial_pool,
        final_pool,
        pool_return_pct: (final_pool - initial_pool) as f64 / initial_pool as f64 * 100.0,
        settlement,
    };
    let observer = orch.dex.observer_view();
    Ok(EpochRun { report, traces, observer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::Candle;

    fn feed(closes: &[i64]) -> PriceSeries {
        let candles = closes
            .iter()
            .enumerate()
            .map(|(i, &c)| Candle::new(i as i64 * 600, c).unwrap())
            .collect();
        PriceSeries::new("ETH:USDC", 600, candles).unwrap()
    }

    /// Alternating closes that trade every round under n=2, d=1, u=1, l=1:
    /// buys at 9,900 and sells at 10,000.
    fn alternating_feed(rounds: usize) -> PriceSeries {
        let closes: Vec<i64> =
            (0..rounds + 1).map(|i| if i % 2 == 0 { 9_900 } else { 10_000 }).collect();
        feed(&closes)
    }

    fn trading_config(rounds: u32, seed: u64) -> EpochConfig {
        let params = ParamConfig::new(2, 1, 1, 1).unwrap();
        let mut cfg = EpochConfig::new(params, rounds, 10, 100_000, seed);
        cfg.initial_base = BASE_UNIT_SCALE; // lets a first-round sell execute
        cfg
    }

    #[test]
    fn constant_feed_round_holds() {
        let params = ParamConfig::new(3, 1, 0, 0).unwrap();
        let cfg = EpochConfig::new(params, 1, 1, 100_000, 7);
        let mut orch = Orchestrator::new(&feed(&[10_000; 5]), &cfg).unwrap();
        let trace = orch.run_round(0, 1_200);
        assert_eq!(trace.messages, vec![TraceMessage::GetPublicParams, TraceMessage::Decide]);
        assert!(trace.held());
        assert_eq!(trace.gas.len(), 1); // params call only, no verifier gas
    }

    #[test]
    fn buy_round_walks_the_full_sequence() {
        let cfg = trading_config(2, 7);
        let mut orch = Orchestrator::new(&alternating_feed(2), &cfg).unwrap();
        let trace = orch.run_round(0, 600); // price 10,000 → sell executes
        assert_eq!(trace.messages.len(), 7);
        assert!(matches!(trace.messages[6], TraceMessage::Swap { .. }));
        let trace = orch.run_round(1, 1_200); // price 9,900 → buy
        assert_eq!(trace.messages.len(), 7);
        assert!(trace.completed_swap());
        assert!(conformance_check(&trace));
    }

    #[test]
    fn tampered_public_inputs_abort_without_swap() {
        for tamper in [TamperMode::Price, TamperMode::Upper, TamperMode::Lower] {
            let mut cfg = trading_config(1, 7);
            cfg.tamper = tamper;
            let mut orch = Orchestrator::new(&alternating_feed(1), &cfg).unwrap();
            let trace = orch.run_round(0, 600);
            assert!(trace.aborted());
            assert!(!trace.completed_swap());
            assert!(trace.messages.contains(&TraceMessage::VerifyResult { ok: false }));
            assert!(conformance_check(&trace));
        }
    }

    #[test]
    fn conformance_rejects_out_of_order_traces() {
        let mut trace = TradeRoundTrace {
            round_id: 0,
            timestamp: 0,
            messages: vec![
                TraceMessage::GetPublicParams,
                TraceMessage::Decide,
                TraceMessage::Prove,
                TraceMessage::SubmitProof,
                TraceMessage::PublicParamCheck,
                TraceMessage::Swap { commitment: "00".into() },
            ],
            latencies: RoundLatencies::default(),
            gas: Vec::new(),
        };
        assert!(!conformance_check(&trace)); // swap before any verify result

        trace.messages = vec![TraceMessage::GetPublicParams, TraceMessage::GetPublicParams];
        assert!(!conformance_check(&trace)); // double params call

        trace.messages = vec![TraceMessage::GetPublicParams, TraceMessage::Decide];
        assert!(conformance_check(&trace)); // hold prefix is a valid path
    }

    #[test]
    fn epoch_is_deterministic_under_a_seed() {
        let cfg = trading_config(40, 99);
        let run1 = run_epoch(&alternating_feed(40), &cfg).unwrap();
        let run2 = run_epoch(&alternating_feed(40), &cfg).unwrap();
        assert_eq!(run1, run2);
        assert_eq!(
            serde_json::to_string(&run1.report).unwrap(),
            serde_json::to_string(&run2.report).unwrap()
        );

        let cfg_other = trading_config(40, 100);
        let run3 = run_epoch(&alternating_feed(40), &cfg_other).unwrap();
        assert_ne!(run1.report.latency, run3.report.latency);
    }

    #[test]
    fn hold_only_epoch_keeps_the_pool() {
        let params = ParamConfig::new(3, 1, 0, 0).unwrap();
        let cfg = EpochConfig::new(params, 5, 10, 100_000, 7);
        let run = run_epoch(&feed(&[10_000; 10]), &cfg).unwrap();
        assert_eq!(run.report.trades, 0);
        assert_eq!(run.report.holds, 5);
        assert_eq!(run.report.final_pool, run.report.initial_pool);
        // Gas comes only from the params calls actually made.
        assert_eq!(run.report.total_gas, 5 * 281_715);
        assert_eq!(run.report.verifier_gas, 0);
    }

    #[test]
    fn twenty_trading_rounds_cost_each_of_a_thousand_users_three_dollars() {
        let params = ParamConfig::new(2, 1, 1, 1).unwrap();
        let mut cfg = EpochConfig::new(params, 20, 1_000, 100_000, 7);
        cfg.initial_base = BASE_UNIT_SCALE;
        cfg.chain.jitter = false;
        let run = run_epoch(&alternating_feed(20), &cfg).unwrap();
        assert_eq!(run.report.trades, 20);
        assert_eq!(run.report.total_gas, 20 * 473_402);
        let shares: Vec<i64> =
            run.report.settlement.users.iter().map(|u| u.gas_share).collect();
        assert!(shares.iter().all(|s| (s - 300).abs() <= 1)); // $3.00 ± $0.01
        assert_eq!(shares.iter().sum::<i64>(), run.report.settlement.total_gas_usd_cents);
    }

    #[test]
    fn epoch_rejects_short_feed() {
        let cfg = trading_config(50, 7);
        let err = run_epoch(&alternating_feed(10), &cfg).unwrap_err();
        assert!(matches!(err, OrchestratorError::FeedExhausted { .. }));
    }

    #[test]
    fn buy_and_sell_traces_are_indistinguishable_except_swap_digest() {
        // Same feed, same public params; only the private config differs.
        // 9,951 with bands collapsed on it: l=30 buys, (l=0, u=30) sells.
        let flat = feed(&[9_951; 4]);
        let buy_params = ParamConfig::new(2, 1, 0, 30).unwrap();
        let sell_params = ParamConfig::new(2, 1, 30, 0).unwrap();

        let mut buy_cfg = EpochConfig::new(buy_params, 1, 4, 100_000, 42);
        buy_cfg.initial_base = BASE_UNIT_SCALE;
        let mut sell_cfg = EpochConfig::new(sell_params, 1, 4, 100_000, 42);
        sell_cfg.initial_base = BASE_UNIT_SCALE;

        let buy_run = run_epoch(&flat, &buy_cfg).unwrap();
        let sell_run = run_epoch(&flat, &sell_cfg).unwrap();
        let (buy_trace, sell_trace) = (&buy_run.traces[0], &sell_run.traces[0]);
        assert!(buy_trace.completed_swap() && sell_trace.completed_swap());

        // Identical latency draws and gas charges.
        assert_eq!(buy_trace.latencies, sell_trace.latencies);
        assert_eq!(buy_trace.gas, sell_trace.gas);

        // Serialized messages differ only inside the swap commitment digest.
        let scrub = |trace: &TradeRoundTrace| {
            let mut t = trace.clone();
            for m in &mut t.messages {
                if let TraceMessage::Swap { commitment } = m {
                    *commitment = "ditto".into();
                }
            }
            traces_to_jsonl(&[t])
        };
        assert_ne!(traces_to_jsonl(std::slice::from_ref(buy_trace)), traces_to_jsonl(std::slice::from_ref(sell_trace)));
        assert_eq!(scrub(buy_trace), scrub(sell_trace));
    }

    #[test]
    fn traces_serialize_one_message_per_line() {
        let cfg = trading_config(1, 7);
        let mut orch = Orchestrator::new(&alternating_feed(1), &cfg).unwrap();
        let trace = orch.run_round(0, 600);
        let jsonl = traces_to_jsonl(std::slice::from_ref(&trace));
        assert_eq!(jsonl.lines().count(), trace.messages.len());
        assert!(jsonl.lines().all(|l| l.starts_with("{\"round\":0,\"msg\":\"")));
    }
}
