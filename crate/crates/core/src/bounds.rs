//! Exact upper bounds on the number of stable labeled configurations of a
//! whole tree (`Z`) and of a proper subtree (`T`), plus the combinatorial
//! numbers they are built from. Everything is integer arithmetic.

use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

pub type BigNat = BigUint;

pub const DEFAULT_MAX_ELL: u32 = 16;
pub const MAX_ELL_ENV: &str = "CHIPFIRE_MAX_ELL";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("{what} needs ell >= {min}, got {ell}")]
    EllTooSmall { what: &'static str, ell: u32, min: u32 },
    #[error("ell {ell} is above the cap of {max} (raise it with {MAX_ELL_ENV})")]
    EllTooLarge { ell: u32, max: u32 },
    #[error("multinomial parts sum to {sum}, not {n}")]
    PartSum { n: u64, sum: u64 },
    #[error("{MAX_ELL_ENV}={0:?} is not a positive integer")]
    BadCap(String),
}

/// The largest `ell` the bound functions accept: [`DEFAULT_MAX_ELL`] unless
/// the environment overrides it.
pub fn max_ell() -> Result<u32, BoundsError> {
    match std::env::var(MAX_ELL_ENV) {
        Ok(text) => text.trim().parse().ok().filter(|&c| c > 0).ok_or(BoundsError::BadCap(text)),
        Err(_) => Ok(DEFAULT_MAX_ELL),
    }
}

fn check_ell(what: &'static str, ell: u32, min: u32) -> Result<(), BoundsError> {
    if ell < min {
        return Err(BoundsError::EllTooSmall { what, ell, min });
    }
    let max = max_ell()?;
    if ell > max {
        return Err(BoundsError::EllTooLarge { ell, max });
    }
    Ok(())
}

fn pow2(e: u32) -> u64 {
    1u64 << e
}

/// Product of `lo..=hi`, split in halves so the operands stay balanced.
fn range_product(lo: u64, hi: u64) -> BigNat {
    if lo > hi {
        return BigNat::one();
    }
    if hi - lo < 16 {
        return (lo..=hi).fold(BigNat::one(), |acc, k| acc * k);
    }
    let mid = lo + (hi - lo) / 2;
    range_product(lo, mid) * range_product(mid + 1, hi)
}

pub fn factorial(n: u64) -> BigNat {
    range_product(2, n)
}

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigNat {
    let Ok(k) = u64::try_from(k) else {
        return BigNat::zero();
    };
    if k > n {
        return BigNat::zero();
    }
    let k = k.min(n - k);
    range_product(n - k + 1, n) / factorial(k)
}

pub fn multinomial(n: u64, parts: &[u64]) -> Result<BigNat, BoundsError> {
    let sum = parts.iter().sum::<u64>();
    if sum != n {
        return Err(BoundsError::PartSum { n, sum });
    }
    let denominator = parts.iter().fold(BigNat::one(), |acc, &p| acc * factorial(p));
    Ok(factorial(n) / denominator)
}

pub fn catalan(n: u64) -> BigNat {
    binomial(2 * n, n as i64) / (n + 1)
}

/// Number of alternating permutations of `n` elements that start with a
/// descent (equivalently, by reversal, with an ascent), via the
/// boustrophedon triangle.
pub fn euler_zigzag(n: u32) -> BigNat {
    let mut row = vec![BigNat::one()];
    for k in 1..=n as usize {
        let mut next = Vec::with_capacity(k + 1);
        next.push(BigNat::zero());
        for i in 1..=k {
            let value = &next[i - 1] + &row[k - i];
            next.push(value);
        }
        row = next;
    }
    row.pop().expect("row is never empty")
}

/// `2^n - n - 1`.
pub fn eulerian_a000295(n: u32) -> BigNat {
    (BigNat::one() << n) - BigNat::from(n) - 1u32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPair {
    pub t: BigNat,
    pub z: BigNat,
}

/// `((2^ell - 4)!, (2^ell - 5)!)`.
pub fn naive_bounds(ell: u32) -> Result<BoundPair, BoundsError> {
    check_ell("the naive bound", ell, 3)?;
    Ok(BoundPair { t: factorial(pow2(ell) - 4), z: factorial(pow2(ell) - 5) })
}

/// Chips left to share among the subtrees hanging off a zigzag, for a
/// subtree (`whole_tree = false`) or the whole tree.
fn zigzag_parts(ell: u32, whole_tree: bool) -> (u64, Vec<u64>) {
    let fixed = if whole_tree { 3 } else { 2 };
    let mut parts = vec![pow2(ell - 1) - fixed, pow2(ell - 2) - fixed];
    parts.extend((1..=ell - 3).rev().map(|d| pow2(d) - 1));
    let reserved = if whole_tree { 5 } else { 3 };
    (pow2(ell) - reserved - u64::from(ell), parts)
}

fn zigzag_factor(ell: u32, whole_tree: bool) -> Result<BigNat, BoundsError> {
    let (rest, parts) = zigzag_parts(ell, whole_tree);
    let pool = rest + u64::from(ell);
    Ok(euler_zigzag(ell) * binomial(pool, i64::from(ell)) * multinomial(rest, &parts)?)
}

/// Zigzag count for a subtree of `ell` layers.
pub fn beta(ell: u32) -> Result<BigNat, BoundsError> {
    check_ell("beta", ell, 4)?;
    zigzag_factor(ell, false)
}

/// Zigzag count for the whole tree of `ell` layers.
pub fn gamma(ell: u32) -> Result<BigNat, BoundsError> {
    check_ell("gamma", ell, 4)?;
    zigzag_factor(ell, true)
}

/// Multinomial part lists of `beta` and `gamma`, exposed for inspection.
pub fn zigzag_multinomial_parts(ell: u32) -> Result<[(u64, Vec<u64>); 2], BoundsError> {
    check_ell("the zigzag parts", ell, 4)?;
    Ok([zigzag_parts(ell, false), zigzag_parts(ell, true)])
}

fn ten_pow_pow2(e: u32) -> BigNat {
    BigNat::from(10u32).pow(1u32 << e)
}

pub fn zigzag_bound(ell: u32) -> Result<BoundPair, BoundsError> {
    check_ell("the zigzag bound", ell, 4)?;
    let mut shared = ten_pow_pow2(ell - 4);
    for i in 4..ell {
        shared *= beta(i)?.pow(1u32 << (ell - 1 - i));
    }
    Ok(BoundPair { t: &shared * beta(ell)?, z: shared * gamma(ell)? })
}

/// Ways to split the chips of the whole tree between the two sides of the
/// root as a ballot sequence that neither starts nor ends with a lone vote:
/// `C(2^ell - 6, 2^(ell-1) - 3) - C(2^ell - 6, 2^(ell-1) - 6)`.
pub fn ballot_split_count(ell: u32) -> Result<BigNat, BoundsError> {
    check_ell("the ballot split", ell, 3)?;
    let n = pow2(ell) - 6;
    let half = pow2(ell - 1) as i64;
    Ok(binomial(n, half - 3) - binomial(n, half - 6))
}

/// Bounds that hold if every stable configuration has the ballot property.
pub fn ballot_bound(ell: u32) -> Result<BoundPair, BoundsError> {
    check_ell("the ballot bound", ell, 3)?;
    let factor = |layers: u32| (pow2(layers) - 4) * catalan(pow2(layers - 1) - 1);
    let mut t = ten_pow_pow2(ell - 3);
    if ell >= 4 {
        for i in 0..=ell - 4 {
            t *= factor(ell - i).pow(1u32 << i);
        }
    }
    let mut z = (pow2(ell) - 7) * ballot_split_count(ell)? * ten_pow_pow2(ell - 3);
    if ell >= 5 {
        for i in 0..=ell - 5 {
            z *= factor(ell - 1 - i).pow(1u32 << (i + 1));
        }
    }
    Ok(BoundPair { t, z })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRow {
    pub ell: u32,
    pub naive: BoundPair,
    pub zigzag: BoundPair,
    /// Conditional on the ballot property.
    pub ballot: BoundPair,
    pub zigzag_z_below_t: bool,
    pub ballot_z_below_t: bool,
    /// Both `Z` bounds below `(2^ell - 7)!`; `None` below five layers.
    pub z_below_root_factorial: Option<bool>,
}

pub fn compare_table(ells: RangeInclusive<u32>) -> Result<Vec<BoundRow>, BoundsError> {
    ells.map(|ell| {
        check_ell("the comparison table", ell, 4)?;
        let zigzag = zigzag_bound(ell)?;
        let ballot = ballot_bound(ell)?;
        let z_below_root_factorial = (ell >= 5).then(|| {
            let cap = factorial(pow2(ell) - 7);
            zigzag.z < cap && ballot.z < cap
        });
        Ok(BoundRow {
            ell,
            naive: naive_bounds(ell)?,
            zigzag_z_below_t: zigzag.z < zigzag.t,
            ballot_z_below_t: ballot.z < ballot.t,
            zigzag,
            ballot,
            z_below_root_factorial,
        })
    })
    .collect()
}

/// Scientific notation with `digits` significant digits, rounding half to
/// even: `11240007277776077` with 2 digits is `1.1e16`.
pub fn format_sci(value: &BigNat, digits: usize) -> String {
    let digits = digits.max(1);
    let text = value.to_str_radix(10);
    if text.len() <= digits {
        let mut mantissa = text.clone();
        if text.len() > 1 {
            mantissa.insert(1, '.');
        }
        return format!("{mantissa}e{}", text.len() - 1);
    }
    let bytes = text.as_bytes();
    let mut kept: Vec<u8> = bytes[..digits].iter().map(|b| b - b'0').collect();
    let first_dropped = bytes[digits] - b'0';
    let rest_nonzero = bytes[digits + 1..].iter().any(|&b| b != b'0');
    let round_up = first_dropped > 5
        || (first_dropped == 5 && (rest_nonzero || kept[digits - 1] % 2 == 1));
    let mut exponent = text.len() - 1;
    if round_up {
        let mut i = digits;
        loop {
            if i == 0 {
                kept.insert(0, 1);
                kept.pop();
                exponent += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let mut mantissa: String = kept.iter().map(|d| char::from(b'0' + d)).collect();
    if digits > 1 {
        mantissa.insert(1, '.');
    }
    format!("{mantissa}e{exponent}")
}
