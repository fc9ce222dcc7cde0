//! The parametrized Bollinger trading rule, with truncating integer
//! semantics identical to the decision circuit.
//!
//! Buy when the price is below `(lower / 100) * (100 + l)`, sell when it is
//! above `(upper / 100) * (100 - u)`. Division truncates *before* the
//! multiplication, so thresholds snap down in steps of one whole percent of
//! a cent-truncated band.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    ParamOutOfRange { name: &'static str, value: i64, min: i64, max: i64 },
    #[error("cannot parse '{0}' as n.d.u.l")]
    BadConfigString(String),
    #[error("public params invalid: price {price}, upper {upper}, lower {lower}")]
    InvalidPublicParams { price: i64, upper: i64, lower: i64 },
}

pub const N_RANGE: (i64, i64) = (1, 40);
pub const D_RANGE: (i64, i64) = (1, 6);
pub const U_RANGE: (i64, i64) = (-1, 30);
pub const L_RANGE: (i64, i64) = (-1, 30);

/// The four strategy parameters. `n` and `d` shape the bands (public at
/// trade time, derivable on-chain); `u` and `l` are the private thresholds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ParamConfig {
    n: u32,
    d: u32,
    u: i32,
    l: i32,
}

impl ParamConfig {
    pub fn new(n: i64, d: i64, u: i64, l: i64) -> Result<Self, StrategyError> {
        let check = |name: &'static str, value: i64, (min, max): (i64, i64)| {
            if value < min || value > max {
                Err(StrategyError::ParamOutOfRange { name, value, min, max })
            } else {
                Ok(value)
            }
        };
        Ok(Self {
            n: check("n", n, N_RANGE)? as u32,
            d: check("d", d, D_RANGE)? as u32,
            u: check("u", u, U_RANGE)? as i32,
            l: check("l", l, L_RANGE)? as i32,
        })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn d(&self) -> i64 {
        i64::from(self.d)
    }

    pub fn u(&self) -> i64 {
        i64::from(self.u)
    }

    pub fn l(&self) -> i64 {
        i64::from(self.l)
    }
}

impl fmt::Display for ParamConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}.{}", self.n, self.d, self.u, self.l)
    }
}

impl FromStr for ParamConfig {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Dotted n.d.u.l where u and l may be negative, e.g. "20.6.14.-1".
        let bad = || StrategyError::BadConfigString(s.to_string());
        let mut parts = Vec::with_capacity(4);
        let mut rest = s;
        while !rest.is_empty() && parts.len() < 4 {
            let cut = rest
                .char_indices()
                .skip(1) // a leading '-' belongs to the number
                .find(|&(_, c)| c == '.')
                .map(|(i, _)| i);
            match cut {
                Some(i) => {
                    parts.push(&rest[..i]);
                    rest = &rest[i + 1..];
                }
                None => {
                    parts.push(rest);
                    rest = "";
                }
            }
        }
        if parts.len() != 4 || !rest.is_empty() {
            return Err(bad());
        }
        let num = |p: &str| p.parse::<i64>().map_err(|_| bad());
        ParamConfig::new(num(parts[0])?, num(parts[1])?, num(parts[2])?, num(parts[3])?)
    }
}

/// The circuit's public inputs: current price and the two bands, in cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicParams {
    pub price: i64,
    pub upper: i64,
    pub lower: i64,
}

impl PublicParams {
    pub fn new(price: i64, upper: i64, lower: i64) -> Result<Self, StrategyError> {
        if price <= 0 || upper <= 0 || lower <= 0 || upper < lower {
            return Err(StrategyError::InvalidPublicParams { price, upper, lower });
        }
        Ok(Self { price, upper, lower })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TradeDecision {
    Buy,
    Sell,
    Hold,
}

/// Buy threshold: `(lower / 100) * (100 + l)`, truncating division first.
pub fn buy_threshold(lower: i64, l: i64) -> i64 {
    (lower / 100) * (100 + l)
}

/// Sell threshold: `(upper / 100) * (100 - u)`, truncating division first.
pub fn sell_threshold(upper: i64, u: i64) -> i64 {
    (upper / 100) * (100 - u)
}

/// The trading rule. Strict inequalities; when degenerate band values make
/// both conditions hold, buy wins so a run of decisions is reproducible.
pub fn decide(p: &PublicParams, c: &ParamConfig) -> TradeDecision {
    decide_raw(p.price, p.upper, p.lower, c)
}

/// [`decide`] on raw integers, total over any band values (the backtester
/// may produce non-positive lower bands on wild series; such a band simply
/// never triggers a buy).
pub fn decide_raw(price: i64, upper: i64, lower: i64, c: &ParamConfig) -> TradeDecision {
    if price < buy_threshold(lower, c.l()) {
        TradeDecision::Buy
    } else if price > sell_threshold(upper, c.u()) {
        TradeDecision::Sell
    } else {
        TradeDecision::Hold
    }
}
