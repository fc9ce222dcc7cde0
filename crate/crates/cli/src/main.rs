//! `zktrade` — train, prove, and simulate a private on-chain trading bot
//! from the command line.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_config, AppConfig};
use output::{frequency_csv, ranking_csv, RunManifest, RunWriter};
use zktrade_core::market_data::{
    load_candles, resample, select_periods, series_to_csv, split_periods, PriceSeries,
};
use zktrade_core::orchestrator::{run_epoch, traces_to_jsonl, EpochConfig, TamperMode};
use zktrade_core::strategy::ParamConfig;
use zktrade_core::training::{
    enumerate_configs, evaluate, rank, training_returns, GridSpace, RankingMethod, RankingReport,
};

#[derive(Parser)]
#[command(name = "zktrade", version, about = "Private on-chain trading bot simulator")]
struct Cli {
    /// Seed for every random choice a command makes.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// JSON config file (an earlier run's manifest.json also works).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "zktrade-out")]
    out: PathBuf,
    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a candle CSV and rewrite it in canonical form.
    Ingest {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        pair: Option<String>,
        /// Native candle period of the file, seconds.
        #[arg(long)]
        period: Option<i64>,
    },
    /// List the 30-day windows where buy-and-hold loses, split train/test.
    Periods {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        period: Option<i64>,
        #[arg(long)]
        stride: Option<i64>,
        /// Trading period to resample to before selecting windows.
        #[arg(long)]
        trading_period: Option<i64>,
    },
    /// Grid-search strategy parameters over the training windows.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        period: Option<i64>,
        #[arg(long)]
        trading_period: Option<i64>,
        #[arg(long)]
        stride: Option<i64>,
        /// Ranking method: sharpe, avg, or both.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        fees_bps: Option<i64>,
        /// Starting balance per backtest, quote cents.
        #[arg(long)]
        initial_cents: Option<i64>,
    },
    /// Re-run a training report's configs over the testing windows.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        /// ranking_*.json written by `train`.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        period: Option<i64>,
        #[arg(long)]
        trading_period: Option<i64>,
        #[arg(long)]
        stride: Option<i64>,
        #[arg(long)]
        fees_bps: Option<i64>,
        #[arg(long)]
        initial_cents: Option<i64>,
    },
    /// Train and test at several trading periods and compare.
    Frequency {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        period: Option<i64>,
        /// Comma-separated trading periods, seconds (e.g. 60,600,3600).
        #[arg(long, value_delimiter = ',', required = true)]
        periods: Vec<i64>,
        #[arg(long)]
        stride: Option<i64>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        fees_bps: Option<i64>,
        #[arg(long)]
        initial_cents: Option<i64>,
    },
    /// Run end-to-end trade rounds with gas, latency, and settlement.
    Simulate {
        #[arg(long)]
        data: PathBuf,
        /// Trained parameter config as n.d.u.l (e.g. 20.6.14.14).
        #[arg(long)]
        params: String,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        rounds: Option<u32>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        users: Option<u32>,
        /// Per-user deposit, quote cents.
        #[arg(long)]
        deposit: Option<i64>,
        #[arg(long)]
        period: Option<i64>,
        #[arg(long)]
        trading_period: Option<i64>,
        #[arg(long)]
        slippage_bps: Option<i64>,
        /// Pin verifier gas to its mean instead of jittering ±2%.
        #[arg(long)]
        no_jitter: bool,
        /// Base-asset subunits the bot holds at epoch start.
        #[arg(long)]
        initial_base: Option<i64>,
    },
    /// Summarize a previous run directory.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path).map_err(CliError::Usage)?,
        None => AppConfig::default(),
    };

    if cli.show_config {
        // Reflects the config file but not per-command flag overrides.
        println!("{}", serde_json::to_string_pretty(&cfg).expect("serializable"));
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage("missing subcommand; see --help".into()));
    };

    match command {
        Command::Ingest { data, pair, period } => {
            override_opt(&mut cfg.pair, pair);
            override_opt(&mut cfg.period_seconds, period);
            cfg.trading_period_seconds = cfg.period_seconds;
            cmd_ingest(&cli.out, cli.seed, &cfg, &data)
        }
        Command::Periods { data, period, stride, trading_period } => {
            override_opt(&mut cfg.period_seconds, period);
            cfg.trading_period_seconds = cfg.period_seconds;
            override_opt(&mut cfg.trading_period_seconds, trading_period);
            override_opt(&mut cfg.stride_seconds, stride);
            cmd_periods(&cli.out, cli.seed, &cfg, &data)
        }
        Command::Train { data, period, trading_period, stride, method, top, fees_bps, initial_cents } => {
            override_opt(&mut cfg.period_seconds, period);
            cfg.trading_period_seconds = cfg.period_seconds;
            override_opt(&mut cfg.trading_period_seconds, trading_period);
            override_opt(&mut cfg.stride_seconds, stride);
            override_opt(&mut cfg.method, method);
            override_opt(&mut cfg.top_k, top);
            override_opt(&mut cfg.fees_bps, fees_bps);
            override_opt(&mut cfg.initial_cents, initial_cents);
            cmd_train(&cli.out, cli.seed, &cfg, &data)
        }
        Command::Evaluate { data, report, period, trading_period, stride, fees_bps, initial_cents } => {
            override_opt(&mut cfg.period_seconds, period);
            cfg.trading_period_seconds = cfg.period_seconds;
            override_opt(&mut cfg.trading_period_seconds, trading_period);
            override_opt(&mut cfg.stride_seconds, stride);
            override_opt(&mut cfg.fees_bps, fees_bps);
            override_opt(&mut cfg.initial_cents, initial_cents);
            cmd_evaluate(&cli.out, cli.seed, &cfg, &data, &report)
        }
        Command::Frequency { data, period, periods, stride, method, top, fees_bps, initial_cents } => {
            override_opt(&mut cfg.period_seconds, period);
            override_opt(&mut cfg.stride_seconds, stride);
            override_opt(&mut cfg.method, method);
            override_opt(&mut cfg.top_k, top);
            override_opt(&mut cfg.fees_bps, fees_bps);
            override_opt(&mut cfg.initial_cents, initial_cents);
            cmd_frequency(&cli.out, cli.seed, &cfg, &data, &periods)
        }
        Command::Simulate {
            data,
            params,
            rounds,
            users,
            deposit,
            period,
            trading_period,
            slippage_bps,
            no_jitter,
            initial_base,
        } => {
            override_opt(&mut cfg.period_seconds, period);
            cfg.trading_period_seconds = cfg.period_seconds;
            override_opt(&mut cfg.trading_period_seconds, trading_period);
            override_opt(&mut cfg.rounds, rounds);
            override_opt(&mut cfg.users, users);
            override_opt(&mut cfg.deposit_cents, deposit);
            override_opt(&mut cfg.slippage_bps, slippage_bps);
            override_opt(&mut cfg.initial_base, initial_base);
            if no_jitter {
                cfg.chain.jitter = false;
            }
            let params: ParamConfig =
                params.parse().map_err(|e| CliError::Usage(format!("--params: {e}")))?;
            cmd_simulate(&cli.out, cli.seed, &cfg, &data, params)
        }
        Command::Report { run } => cmd_report(&cli.out, cli.seed, &cfg, &run),
    }
}

fn override_opt<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn parse_methods(cfg: &AppConfig) -> Result<Vec<RankingMethod>, CliError> {
    match cfg.method.as_str() {
        "both" => Ok(vec![RankingMethod::SharpeRatio, RankingMethod::AverageReturn]),
        other => RankingMethod::parse(other)
            .map(|m| vec![m])
            .ok_or_else(|| CliError::Usage(format!("unknown method '{other}'"))),
    }
}

/// Load the input CSV at its native period and resample to the trading
/// period when they differ.
fn load_series(
    writer: &mut RunWriter,
    data: &Path,
    cfg: &AppConfig,
) -> Result<PriceSeries, CliError> {
    writer.record_input(data)?;
    let series = load_candles(data, &cfg.pair, cfg.period_seconds).map_err(data_err)?;
    if cfg.trading_period_seconds != cfg.period_seconds {
        resample(&series, cfg.trading_period_seconds).map_err(data_err)
    } else {
        Ok(series)
    }
}

fn cmd_ingest(out: &Path, seed: u64, cfg: &AppConfig, data: &Path) -> Result<(), CliError> {
    let mut writer = RunWriter::new(out, "ingest", seed, cfg)?;
    let series = load_series(&mut writer, data, cfg)?;
    writer.write("candles.csv", &series_to_csv(&series))?;
    writer.write_json(
        "summary.json",
        &serde_json::json!({
            "pair": series.pair(),
            "period_seconds": series.period_seconds(),
            "candles": series.len(),
            "first_timestamp": series.first().timestamp,
            "last_timestamp": series.last().timestamp,
            "span_days": series.span_seconds() as f64 / 86_400.0,
        }),
    )?;
    writer.finish()?;
    println!("ingested {} candles from {}", series.len(), data.display());
    Ok(())
}

fn cmd_periods(out: &Path, seed: u64, cfg: &AppConfig, data: &Path) -> Result<(), CliError> {
    let mut writer = RunWriter::new(out, "periods", seed, cfg)?;
    let series = load_series(&mut writer, data, cfg)?;
    let windows = select_periods(&series, cfg.stride_seconds).map_err(data_err)?;
    let (train, test) = split_periods(&windows).map_err(data_err)?;

    let mut csv = String::from("index,start,end,role\n");
    for (i, w) in train.iter().chain(test.iter()).enumerate() {
        let role = if i < train.len() { "train" } else { "test" };
        csv.push_str(&format!("{i},{},{},{role}\n", w.start, w.end));
    }
    writer.write("windows.csv", &csv)?;
    writer.write_json("windows.json", &serde_json::json!({ "train": train, "test": test }))?;
    writer.finish()?;
    println!("{} losing windows: {} train, {} test", windows.len(), train.len(), test.len());
    Ok(())
}

fn cmd_train(out: &Path, seed: u64, cfg: &AppConfig, data: &Path) -> Result<(), CliError> {
    let methods = parse_methods(cfg)?;
    let mut writer = RunWriter::new(out, "train", seed, cfg)?;
    let series = load_series(&mut writer, data, cfg)?;
    let windows = select_periods(&series, cfg.stride_seconds).map_err(data_err)?;
    let (train_w, _test_w) = split_periods(&windows).map_err(data_err)?;

    let configs = enumerate_configs(&GridSpace::full());
    let results = training_returns(&series, &train_w, &configs, cfg.fees_bps, cfg.initial_cents)
        .map_err(data_err)?;
    for method in methods {
        let report = rank(&results, method, cfg.top_k).map_err(data_err)?;
        writer.write(&format!("ranking_{}.csv", method.label()), &ranking_csv(&report))?;
        writer.write_json(&format!("ranking_{}.json", method.label()), &report)?;
        println!(
            "{}: top {} of {} configs over {} training windows (best: {})",
            method.label(),
            report.rows.len(),
            configs.len(),
            train_w.len(),
            report.rows[0].config,
        );
    }
    writer.finish()?;
    Ok(())
}

fn cmd_evaluate(
    out: &Path,
    seed: u64,
    cfg: &AppConfig,
    data: &Path,
    report_path: &Path,
) -> Result<(), CliError> {
    let mut writer = RunWriter::new(out, "evaluate", seed, cfg)?;
    let series = load_series(&mut writer, data, cfg)?;
    writer.record_input(report_path)?;
    let report: RankingReport = serde_json::from_str(
        &std::fs::read_to_string(report_path)
            .map_err(|e| CliError::Data(format!("cannot read report: {e}")))?,
    )
    .map_err(|e| CliError::Data(format!("bad report JSON: {e}")))?;

    let windows = select_periods(&series, cfg.stride_seconds).map_err(data_err)?;
    let (_train_w, test_w) = split_periods(&windows).map_err(data_err)?;
    let tested =
        evaluate(&report, &series, &test_w, cfg.fees_bps, cfg.initial_cents).map_err(data_err)?;
    writer.write(&format!("test_{}.csv", tested.method.label()), &ranking_csv(&tested))?;
    writer.write_json(&format!("test_{}.json", tested.method.label()), &tested)?;
    writer.finish()?;
    println!(
        "evaluated {} configs over {} testing windows (best mean {:.4}pp)",
        tested.rows.len(),
        test_w.len(),
        tested.rows.first().map(|r| r.stats.mean).unwrap_or(f64::NAN),
    );
    Ok(())
}

fn cmd_frequency(
    out: &Path,
    seed: u64,
    cfg: &AppConfig,
    data: &Path,
    periods: &[i64],
) -> Result<(), CliError> {
    let methods = parse_methods(cfg)?;
    if methods.len() != 1 {
        return Err(CliError::Usage("frequency needs a single --method (sharpe or avg)".into()));
    }
    let mut writer = RunWriter::new(out, "frequency", seed, cfg)?;
    // Frequency always starts from the file's native period and resamples
    // per entry in --periods.
    let mut base_cfg = cfg.clone();
    base_cfg.trading_period_seconds = base_cfg.period_seconds;
    let series = load_series(&mut writer, data, &base_cfg)?;

    let entries = zktrade_core::training::frequency_study(
        &series,
        periods,
        &GridSpace::full(),
        methods[0],
        cfg.top_k,
        cfg.stride_seconds,
        cfg.fees_bps,
        cfg.initial_cents,
    )
    .map_err(data_err)?;

    for (period, report) in &entries {
        writer.write(&format!("freq_{period}.csv"), &ranking_csv(report))?;
        writer.write_json(&format!("freq_{period}.json"), report)?;
    }
    writer.write("freq_combined.csv", &frequency_csv(&entries))?;
    writer.finish()?;
    println!("frequency study across {} periods written", entries.len());
    Ok(())
}

fn cmd_simulate(
    out: &Path,
    seed: u64,
    cfg: &AppConfig,
    data: &Path,
    params: ParamConfig,
) -> Result<(), CliError> {
    let mut writer = RunWriter::new(out, "simulate", seed, cfg)?;
    let series = load_series(&mut writer, data, cfg)?;

    let epoch = EpochConfig {
        params,
        rounds: cfg.rounds,
        users: cfg.users,
        deposit: cfg.deposit_cents,
        chain: cfg.chain,
        slippage_bps: cfg.slippage_bps,
        seed,
        initial_base: cfg.initial_base,
        tamper: TamperMode::None,
    };
    let run = run_epoch(&series, &epoch).map_err(data_err)?;

    writer.write_json("epoch_report.json", &run.report)?;
    writer.write("traces.jsonl", &traces_to_jsonl(&run.traces))?;
    writer.write_json("observer_view.json", &run.observer)?;

    let mut ledger = String::from("round,contract,gas,seconds\n");
    let mut latency = String::from("round,phase,seconds\n");
    for trace in &run.traces {
        for entry in &trace.gas {
            let contract = match entry.contract {
                zktrade_core::chain_sim::Contract::OnChainBot => "on_chain_bot",
                zktrade_core::chain_sim::Contract::Verifier => "verifier",
            };
            ledger.push_str(&format!(
                "{},{contract},{},{}\n",
                entry.round_id, entry.gas, entry.timestamp
            ));
        }
        for phase in zktrade_core::chain_sim::Phase::ALL {
            if let Some(seconds) = trace.latencies.get(phase) {
                latency.push_str(&format!("{},{},{seconds}\n", trace.round_id, phase.label()));
            }
        }
        if let Some(e2e) = trace.latencies.end_to_end() {
            latency.push_str(&format!("{},end_to_end,{e2e}\n", trace.round_id));
        }
    }
    writer.write("ledger.csv", &ledger)?;
    writer.write("latency.csv", &latency)?;

    let mut settlement = String::from("user_id,deposit_cents,gross_cents,gas_cents,net_cents\n");
    for user in &run.report.settlement.users {
        settlement.push_str(&format!(
            "{},{},{},{},{}\n",
            user.user_id, user.deposit, user.gross_payout, user.gas_share, user.net_payout
        ));
    }
    writer.write("settlement.csv", &settlement)?;
    writer.finish()?;
    println!(
        "{} rounds: {} trades, {} holds, {} aborts; {} gas (${:.2}); pool {:+.2}%; per-user gas ${:.2}",
        run.report.rounds,
        run.report.trades,
        run.report.holds,
        run.report.aborts,
        run.report.total_gas,
        run.report.gas_usd,
        run.report.pool_return_pct,
        run.report.settlement.users.first().map(|u| u.gas_share as f64 / 100.0).unwrap_or(0.0),
    );
    Ok(())
}

fn cmd_report(out: &Path, seed: u64, cfg: &AppConfig, run_dir: &Path) -> Result<(), CliError> {
    let manifest_path = run_dir.join("manifest.json");
    let manifest: RunManifest = serde_json::from_str(
        &std::fs::read_to_string(&manifest_path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", manifest_path.display())))?,
    )
    .map_err(|e| CliError::Data(format!("bad manifest: {e}")))?;

    let mut summary = String::new();
    summary.push_str(&format!("run: {} (seed {})\ninputs:\n", manifest.command, manifest.seed));
    for input in &manifest.inputs {
        summary.push_str(&format!("  {} sha256 {}\n", input.path, input.sha256));
    }
    summary.push_str("outputs:\n");
    for output in &manifest.outputs {
        summary.push_str(&format!("  {output}\n"));
    }

    let epoch_path = run_dir.join("epoch_report.json");
    if let Ok(text) = std::fs::read_to_string(&epoch_path) {
        let report: zktrade_core::orchestrator::EpochReport =
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("bad report: {e}")))?;
        summary.push_str(&format!(
            "\nepoch: {} rounds, {} trades, {} holds, {} aborts\n",
            report.rounds, report.trades, report.holds, report.aborts
        ));
        if let Some(e2e) = report.latency.end_to_end {
            summary.push_str(&format!(
                "end-to-end: mean {:.1}s (min {:.1}, max {:.1}) over {} trades\n",
                e2e.mean, e2e.min, e2e.max, e2e.count
            ));
        }
        summary.push_str(&format!(
            "gas: {} total ({} bot + {} verifier) = {:.5} ETH = ${:.2}\n",
            report.total_gas,
            report.on_chain_bot_gas,
            report.verifier_gas,
            report.gas_eth,
            report.gas_usd
        ));
        summary.push_str(&format!(
            "pool: {} → {} cents ({:+.2}%)\n",
            report.initial_pool, report.final_pool, report.pool_return_pct
        ));
    }
    for name in ["ranking_sharpe.csv", "ranking_avg.csv", "test_sharpe.csv", "test_avg.csv"] {
        if let Ok(table) = std::fs::read_to_string(run_dir.join(name)) {
            summary.push_str(&format!("\n{name}:\n{table}"));
        }
    }

    print!("{summary}");
    let mut writer = RunWriter::new(out, "report", seed, cfg)?;
    writer.record_input(&manifest_path)?;
    writer.write("summary.txt", &summary)?;
    writer.finish()?;
    Ok(())
}
