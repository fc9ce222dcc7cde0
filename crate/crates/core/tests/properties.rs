//! Property tests for the spec-level invariants.

mod common;

use proptest::prelude::*;

use zktrade_core::indicators::{bollinger, sma};
use zktrade_core::market_data::{
    resample, select_periods, split_periods, Candle, PriceSeries, WINDOW_SECONDS,
};
use zktrade_core::strategy::{decide_raw, ParamConfig, PublicParams, TradeDecision};
use zktrade_core::zkproof::{circuit_eval, prove, setup, verify, Witness, ZkError};

fn series_from_closes(period: i64, closes: &[i64]) -> PriceSeries {
    let candles = closes
        .iter()
        .enumerate()
        .map(|(i, &c)| Candle::new(i as i64 * period, c).unwrap())
        .collect();
    PriceSeries::new("ETH:USDC", period, candles).unwrap()
}

prop_compose! {
    fn small_series()(closes in prop::collection::vec(1i64..=1_000_000, 1..=32)) -> Vec<i64> {
        closes
    }
}

proptest! {
    #[test]
    fn indicator_integers_match_exact_rational_oracle(closes in small_series(), d in 0i64..=6) {
        let s = series_from_closes(60, &closes);
        let at = s.last().timestamp;
        let n = closes.len();
        let (oracle_sma, oracle_sd) = common::oracle_sma_stddev(&closes);
        prop_assert_eq!(sma(&s, at, n).unwrap(), oracle_sma);
        let bands = bollinger(&s, at, n, d).unwrap();
        prop_assert_eq!(bands.sma, oracle_sma);
        prop_assert_eq!(bands.stddev, oracle_sd);
        prop_assert_eq!(bands.upper, oracle_sma + d * oracle_sd);
        prop_assert_eq!(bands.lower, oracle_sma - d * oracle_sd);
    }

    #[test]
    fn shifting_closes_shifts_bands_not_spread(
        closes in prop::collection::vec(1_000_000i64..=2_000_000, 2..=16),
        shift in -500_000i64..=500_000,
        d in 0i64..=6,
    ) {
        let n = closes.len();
        let shifted: Vec<i64> = closes.iter().map(|c| c + shift).collect();
        let a = bollinger(&series_from_closes(60, &closes), (n as i64 - 1) * 60, n, d).unwrap();
        let b = bollinger(&series_from_closes(60, &shifted), (n as i64 - 1) * 60, n, d).unwrap();
        prop_assert_eq!(b.sma, a.sma + shift);
        prop_assert_eq!(b.stddev, a.stddev);
        prop_assert_eq!(b.upper, a.upper + shift);
        prop_assert_eq!(b.lower, a.lower + shift);
    }

    #[test]
    fn bands_widen_monotonically_in_d(closes in small_series()) {
        let s = series_from_closes(60, &closes);
        let at = s.last().timestamp;
        let n = closes.len();
        let mut prev = bollinger(&s, at, n, 0).unwrap();
        for d in 1..=6 {
            let next = bollinger(&s, at, n, d).unwrap();
            prop_assert!(next.upper >= prev.upper);
            prop_assert!(next.lower <= prev.lower);
            prev = next;
        }
    }

    #[test]
    fn resampling_at_own_period_is_identity(closes in prop::collection::vec(1i64..=100_000, 1..=64)) {
        let s = series_from_closes(60, &closes);
        prop_assert_eq!(resample(&s, 60).unwrap(), s);
    }

    #[test]
    fn selected_windows_really_lose_money(
        days in 31i64..=75,
        seed_closes in prop::collection::vec(1_000i64..=100_000, 76),
        stride in 1_000i64..=200_000,
    ) {
        let closes = &seed_closes[..=days as usize];
        let s = series_from_closes(86_400, closes);
        for w in select_periods(&s, stride).unwrap() {
            let first = s.close_at(w.start).expect("window start on grid");
            let last_idx = ((w.end - s.first().timestamp) / 86_400) as usize;
            let last = s.candles()[last_idx.min(s.len() - 1)].close;
            prop_assert!(last < first);
            prop_assert_eq!(w.end - w.start, WINDOW_SECONDS);
        }
    }

    #[test]
    fn split_concatenation_reproduces_boundaries(count in 1usize..=40) {
        let windows: Vec<_> = (0..count as i64)
            .map(|i| zktrade_core::market_data::PeriodWindow {
                start: i * 86_400,
                end: i * 86_400 + WINDOW_SECONDS,
                role: zktrade_core::market_data::Role::Train,
            })
            .collect();
        let (train, test) = split_periods(&windows).unwrap();
        prop_assert_eq!(train.len(), count.div_ceil(2));
        let rejoined: Vec<(i64, i64)> =
            train.iter().chain(test.iter()).map(|w| (w.start, w.end)).collect();
        let original: Vec<(i64, i64)> = windows.iter().map(|w| (w.start, w.end)).collect();
        prop_assert_eq!(rejoined, original);
    }

    #[test]
    fn raising_l_never_flips_buy_to_hold(
        price in 1i64..=3_000_000,
        lower in 1i64..=3_000_000,
        upper_pad in 0i64..=1_000_000,
        l in -1i64..30,
    ) {
        let upper = lower + upper_pad;
        let cfg = |l| ParamConfig::new(5, 2, 0, l).unwrap();
        if decide_raw(price, upper, lower, &cfg(l)) == TradeDecision::Buy {
            prop_assert_eq!(decide_raw(price, upper, lower, &cfg(l + 1)), TradeDecision::Buy);
        }
    }

    #[test]
    fn raising_u_never_flips_sell_to_hold(
        price in 1i64..=3_000_000,
        lower in 1i64..=3_000_000,
        upper_pad in 0i64..=1_000_000,
        u in -1i64..30,
    ) {
        let upper = lower + upper_pad;
        let cfg = |u| ParamConfig::new(5, 2, u, 0).unwrap();
        if decide_raw(price, upper, lower, &cfg(u)) == TradeDecision::Sell {
            prop_assert_eq!(decide_raw(price, upper, lower, &cfg(u + 1)), TradeDecision::Sell);
        }
    }

    /// Completeness plus decision agreement: whatever `decide` says maps to
    /// a provable witness, and a hold is unprovable in both directions.
    #[test]
    fn decisions_prove_and_verify(
        price in 1i64..=3_000_000,
        lower in 1i64..=3_000_000,
        upper_pad in 0i64..=1_000_000,
        u in -1i64..=30,
        l in -1i64..=30,
        nonce in prop::array::uniform16(any::<u8>()),
    ) {
        let upper = lower + upper_pad;
        let p = PublicParams::new(price, upper, lower).unwrap();
        let cfg = ParamConfig::new(7, 3, u, l).unwrap();
        let keys = setup(b"property-test");
        let buy = Witness::new(1, l).unwrap();
        let sell = Witness::new(0, u).unwrap();
        match decide_raw(price, upper, lower, &cfg) {
            TradeDecision::Buy => {
                prop_assert!(circuit_eval(&p, &buy));
                let proof = prove(&keys.proving, &p, &buy, &nonce).unwrap();
                prop_assert!(verify(&keys.verification, &proof));
            }
            TradeDecision::Sell => {
                prop_assert!(circuit_eval(&p, &sell));
                let proof = prove(&keys.proving, &p, &sell, &nonce).unwrap();
                prop_assert!(verify(&keys.verification, &proof));
            }
            TradeDecision::Hold => {
                prop_assert!(!circuit_eval(&p, &buy));
                prop_assert!(!circuit_eval(&p, &sell));
                prop_assert_eq!(prove(&keys.proving, &p, &buy, &nonce).unwrap_err(), ZkError::ConstraintUnsatisfied);
            }
        }
    }
}

/// Decisions are invariant under scaling all prices by 10 on a fixture
/// whose bands and thresholds scale exactly: closes are multiples of 200
/// and the window size is 2, so the band spread `|a−b|/2` and the `/100`
/// threshold division are both truncation-free.
#[test]
fn scaling_safe_fixture_keeps_decision_sequence() {
    let closes: Vec<i64> = vec![
        10_000, 10_000, 8_000, 8_000, 12_000, 10_600, 9_800, 9_800, 11_200, 8_400, 8_400, 10_000,
    ];
    let scaled: Vec<i64> = closes.iter().map(|c| c * 10).collect();
    let cfg = ParamConfig::new(2, 1, 1, 1).unwrap();

    let decisions = |closes: &[i64]| -> Vec<TradeDecision> {
        let s = series_from_closes(60, closes);
        (1..closes.len())
            .map(|i| {
                let b = bollinger(&s, i as i64 * 60, 2, cfg.d()).unwrap();
                decide_raw(closes[i], b.upper, b.lower, &cfg)
            })
            .collect()
    };
    let base = decisions(&closes);
    assert!(base.contains(&TradeDecision::Buy));
    assert!(base.contains(&TradeDecision::Sell));
    assert_eq!(base, decisions(&scaled));
}
