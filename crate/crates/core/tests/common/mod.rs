//! Shared test oracles, kept independent of the library's integer
//! implementation: exact rational arithmetic via bignums, truncated only at
//! the very end.

use num::{BigInt, BigRational, ToPrimitive};

/// Exact-rational mean and population standard deviation of `closes`,
/// truncated to integers. The mean inside the deviation sum is the exact
/// rational, not the truncated integer.
pub fn oracle_sma_stddev(closes: &[i64]) -> (i64, i64) {
    let n = BigInt::from(closes.len());
    let sum: BigInt = closes.iter().map(|&c| BigInt::from(c)).sum();
    let mean = BigRational::new(sum, n.clone());
    let sma = mean.floor().to_integer().to_i64().expect("fits i64");

    let var: BigRational = closes
        .iter()
        .map(|&c| {
            let d = BigRational::from(BigInt::from(c)) - &mean;
            &d * &d
        })
        .sum::<BigRational>()
        / BigRational::from(n);
    // ⌊sqrt(p/q)⌋ = ⌊⌊sqrt(p·q)⌋ / q⌋ for non-negative p/q.
    let scaled = var.numer() * var.denom();
    let stddev = (scaled.sqrt() / var.denom()).to_i64().expect("fits i64");
    (sma, stddev)
}

#[allow(dead_code)]
pub fn oracle_bands(closes: &[i64], d: i64) -> (i64, i64, i64, i64) {
    let (sma, stddev) = oracle_sma_stddev(closes);
    (sma, stddev, sma + d * stddev, sma - d * stddev)
}
