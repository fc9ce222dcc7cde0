//! Python bindings: the training pipeline, decision proofs, and the epoch
//! simulator, driven in-process from Python.
//!
//! Structured results (reports, audits) cross the boundary as JSON strings;
//! `json.loads` on the Python side keeps the surface small and stable.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use zktrade_core::market_data::{
    load_candles, resample, select_periods, series_to_csv, split_periods, PriceSeries,
};
use zktrade_core::orchestrator::{run_epoch as core_run_epoch, EpochConfig, TamperMode};
use zktrade_core::strategy::{decide_raw, ParamConfig, PublicParams, TradeDecision};
use zktrade_core::synthetic::geometric_walk;
use zktrade_core::training::{
    self, enumerate_configs, evaluate, rank, training_returns, GridSpace, RankingMethod,
};
use zktrade_core::zkproof;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A uniformly spaced close-price series.
#[pyclass(name = "Series", from_py_object)]
#[derive(Clone)]
struct PySeries {
    inner: PriceSeries,
}

#[pymethods]
impl PySeries {
    /// Load a candle CSV (`timestamp,...,close,...` header required).
    #[staticmethod]
    fn load(path: &str, pair: &str, period_seconds: i64) -> PyResult<Self> {
        Ok(Self { inner: load_candles(path, pair, period_seconds).map_err(value_err)? })
    }

    /// Seeded geometric random walk, for demos and tests.
    #[staticmethod]
    fn synthetic_walk(
        seed: u64,
        pair: &str,
        period_seconds: i64,
        steps: usize,
        start_cents: i64,
        drift_per_step: f64,
        vol_per_step: f64,
    ) -> Self {
        Self {
            inner: geometric_walk(
                seed,
                pair,
                period_seconds,
                steps,
                start_cents,
                drift_per_step,
                vol_per_step,
            ),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn pair(&self) -> String {
        self.inner.pair().to_string()
    }

    #[getter]
    fn period_seconds(&self) -> i64 {
        self.inner.period_seconds()
    }

    fn closes(&self) -> Vec<i64> {
        self.inner.candles().iter().map(|c| c.close).collect()
    }

    fn timestamps(&self) -> Vec<i64> {
        self.inner.candles().iter().map(|c| c.timestamp).collect()
    }

    fn resample(&self, new_period_seconds: i64) -> PyResult<Self> {
        Ok(Self { inner: resample(&self.inner, new_period_seconds).map_err(value_err)? })
    }

    /// 30-day windows where buy-and-hold loses, as (start, end, role)
    /// tuples after the train/test split.
    fn select_windows(&self, stride_seconds: i64) -> PyResult<Vec<(i64, i64, String)>> {
        let windows = select_periods(&self.inner, stride_seconds).map_err(value_err)?;
        let (train, test) = split_periods(&windows).map_err(value_err)?;
        Ok(train
            .iter()
            .map(|w| (w.start, w.end, "train".to_string()))
            .chain(test.iter().map(|w| (w.start, w.end, "test".to_string())))
            .collect())
    }

    fn to_csv(&self) -> String {
        series_to_csv(&self.inner)
    }
}

/// The four strategy parameters (n, d public; u, l private).
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ParamConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new(n: i64, d: i64, u: i64, l: i64) -> PyResult<Self> {
        Ok(Self { inner: ParamConfig::new(n, d, u, l).map_err(value_err)? })
    }

    /// Parse the dotted "n.d.u.l" form, e.g. "20.6.14.14".
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: text.parse().map_err(value_err)? })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Config('{}')", self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> i64 {
        self.inner.d()
    }

    #[getter]
    fn u(&self) -> i64 {
        self.inner.u()
    }

    #[getter]
    fn l(&self) -> i64 {
        self.inner.l()
    }
}

/// Bollinger bands at a candle timestamp: (sma, stddev, upper, lower),
/// integer cents, truncating arithmetic.
#[pyfunction]
fn bollinger(series: &PySeries, at: i64, n: usize, d: i64) -> PyResult<(i64, i64, i64, i64)> {
    let b = zktrade_core::indicators::bollinger(&series.inner, at, n, d).map_err(value_err)?;
    Ok((b.sma, b.stddev, b.upper, b.lower))
}

/// The trading rule: "buy", "sell", or "hold".
#[pyfunction]
fn decide(price: i64, upper: i64, lower: i64, config: &PyConfig) -> String {
    match decide_raw(price, upper, lower, &config.inner) {
        TradeDecision::Buy => "buy",
        TradeDecision::Sell => "sell",
        TradeDecision::Hold => "hold",
    }
    .to_string()
}

/// All-in/all-out backtest of one config over [start, end]; returns a dict
/// with end_balance, return_pct, relative_return_pp, and trade_count.
#[pyfunction]
fn backtest(
    py: Python<'_>,
    series: &PySeries,
    start: i64,
    end: i64,
    config: &PyConfig,
    fees_bps: i64,
    initial_cents: i64,
) -> PyResult<Py<PyAny>> {
    let window = zktrade_core::market_data::PeriodWindow {
        start,
        end,
        role: zktrade_core::market_data::Role::Train,
    };
    let result =
        training::backtest(&series.inner, &window, &config.inner, fees_bps, initial_cents)
            .map_err(value_err)?;
    let json = serde_json::to_string(&result).map_err(value_err)?;
    json_to_py(py, &json)
}

/// Grid-search the full parameter space and test the winners. Returns
/// (training_report, testing_report) as dicts.
#[pyfunction]
#[pyo3(signature = (series, method="avg", top_k=5, stride_seconds=86_400, fees_bps=0, initial_cents=100_000))]
fn train_and_evaluate(
    py: Python<'_>,
    series: &PySeries,
    method: &str,
    top_k: usize,
    stride_seconds: i64,
    fees_bps: i64,
    initial_cents: i64,
) -> PyResult<(Py<PyAny>, Py<PyAny>)> {
    let method = RankingMethod::parse(method)
        .ok_or_else(|| value_err(format!("unknown method '{method}'")))?;
    let windows = select_periods(&series.inner, stride_seconds).map_err(value_err)?;
    let (train_w, test_w) = split_periods(&windows).map_err(value_err)?;
    let configs = enumerate_configs(&GridSpace::full());
    let results = training_returns(&series.inner, &train_w, &configs, fees_bps, initial_cents)
        .map_err(value_err)?;
    let report = rank(&results, method, top_k).map_err(value_err)?;
    let tested =
        evaluate(&report, &series.inner, &test_w, fees_bps, initial_cents).map_err(value_err)?;
    Ok((
        json_to_py(py, &serde_json::to_string(&report).map_err(value_err)?)?,
        json_to_py(py, &serde_json::to_string(&tested).map_err(value_err)?)?,
    ))
}

/// Proving/verification key pair from a simulated trusted setup.
#[pyclass(name = "Keys")]
struct PyKeys {
    inner: zkproof::SetupKeys,
}

#[pymethods]
impl PyKeys {
    #[staticmethod]
    fn setup(seed: &[u8]) -> Self {
        Self { inner: zkproof::setup(seed) }
    }

    /// The published description of what the verifier checks.
    #[getter]
    fn circuit_source(&self) -> &'static str {
        self.inner.circuit_source
    }

    /// Prove a decision: flag 1 = buy, 0 = sell; bound is the threshold in
    /// use (l for buys, u for sells). The nonce must be 16 bytes.
    fn prove(
        &self,
        price: i64,
        upper: i64,
        lower: i64,
        buy_sell_flag: u8,
        bound_percentage: i64,
        nonce: &[u8],
    ) -> PyResult<PyProof> {
        let nonce: [u8; 16] =
            nonce.try_into().map_err(|_| value_err("nonce must be exactly 16 bytes"))?;
        let p = PublicParams::new(price, upper, lower).map_err(value_err)?;
        let w = zkproof::Witness::new(buy_sell_flag, bound_percentage).map_err(value_err)?;
        let proof = zkproof::prove(&self.inner.proving, &p, &w, &nonce).map_err(value_err)?;
        Ok(PyProof { inner: proof })
    }

    fn verify(&self, proof: &PyProof) -> bool {
        zkproof::verify(&self.inner.verification, &proof.inner)
    }
}

/// A decision proof: plaintext public inputs plus hiding commitment and tag.
#[pyclass(name = "Proof", from_py_object)]
#[derive(Clone)]
struct PyProof {
    inner: zkproof::Proof,
}

#[pymethods]
impl PyProof {
    #[getter]
    fn price(&self) -> i64 {
        self.inner.public_inputs.price
    }

    #[getter]
    fn upper(&self) -> i64 {
        self.inner.public_inputs.upper
    }

    #[getter]
    fn lower(&self) -> i64 {
        self.inner.public_inputs.lower
    }

    /// Fixed 120-byte wire form.
    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        zkproof::Proof::from_bytes(data)
            .map(|inner| Self { inner })
            .ok_or_else(|| value_err("not a valid proof serialization"))
    }

    /// A copy with one public-input field nudged, for binding demos.
    fn tampered(&self, field: &str) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        match field {
            "price" => inner.public_inputs.price += 1,
            "upper" => inner.public_inputs.upper += 1,
            "lower" => inner.public_inputs.lower += 1,
            other => return Err(value_err(format!("unknown field '{other}'"))),
        }
        Ok(Self { inner })
    }
}

/// Byte-level distinguishability audit between two proof groups (buys vs
/// sells in practice) sharing public inputs. Returns the report as a dict.
#[pyfunction]
fn leak_audit(py: Python<'_>, group_a: Vec<PyProof>, group_b: Vec<PyProof>) -> PyResult<Py<PyAny>> {
    let a: Vec<zkproof::Proof> = group_a.into_iter().map(|p| p.inner).collect();
    let b: Vec<zkproof::Proof> = group_b.into_iter().map(|p| p.inner).collect();
    let report = zkproof::leak_audit(&a, &b);
    json_to_py(py, &serde_json::to_string(&report).map_err(value_err)?)
}

/// Run a full epoch (oracle → on-chain bot → prover → verifier → DEX per
/// round) and return the report as a dict.
#[pyfunction]
#[pyo3(signature = (series, params, rounds, users, deposit_cents, seed, slippage_bps=0, jitter=true, initial_base=0))]
#[allow(clippy::too_many_arguments)]
fn run_epoch(
    py: Python<'_>,
    series: &PySeries,
    params: &str,
    rounds: u32,
    users: u32,
    deposit_cents: i64,
    seed: u64,
    slippage_bps: i64,
    jitter: bool,
    initial_base: i64,
) -> PyResult<Py<PyAny>> {
    let params: ParamConfig = params.parse().map_err(value_err)?;
    let mut cfg = EpochConfig::new(params, rounds, users, deposit_cents, seed);
    cfg.slippage_bps = slippage_bps;
    cfg.chain.jitter = jitter;
    cfg.initial_base = initial_base;
    cfg.tamper = TamperMode::None;
    let run = core_run_epoch(&series.inner, &cfg).map_err(value_err)?;
    json_to_py(py, &serde_json::to_string(&run.report).map_err(value_err)?)
}

fn json_to_py(py: Python<'_>, json: &str) -> PyResult<Py<PyAny>> {
    let module = py.import("json")?;
    Ok(module.call_method1("loads", (json,))?.unbind())
}

#[pymodule]
fn zktrade_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySeries>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyKeys>()?;
    m.add_class::<PyProof>()?;
    m.add_function(wrap_pyfunction!(bollinger, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(backtest, m)?)?;
    m.add_function(wrap_pyfunction!(train_and_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(leak_audit, m)?)?;
    m.add_function(wrap_pyfunction!(run_epoch, m)?)?;
    m.add("CIRCUIT_DESCRIPTION", zkproof::CIRCUIT_DESCRIPTION)?;
    m.add("PROOF_LEN", zkproof::PROOF_LEN)?;
    Ok(())
}
