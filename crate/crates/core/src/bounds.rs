//! Effective bounds: torsion of elliptic curves over number fields of
//! degree `m`, and the resulting uniform bound on `Br U / Br k`.
//!
//! The torsion bound is `N(m) = prod_{p <= B(m)} p^{e_p}` with `p^{e_p}` the
//! largest power of `p` not exceeding the prime-power bound for `p`. For the
//! default constants this is `lcm(1..B(m))`, far too large to write down once
//! `m` is moderate (`B(240)` has 130 digits), so bounds are kept in factored
//! form: exact exponents are available for every prime, and the integer
//! itself is produced only when it is small enough.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime limit `B` for which `N` is materialized.
pub const MATERIALIZE_LIMIT: u64 = 1 << 22;

/// `[K : Q] <= 240 m`: at most 240 lines, each defined over a field of
/// degree at most `m`.
pub const LINES_BOUND: u64 = 240;
/// Exponent of 2 in `2^6 N(m)^2`.
pub const COROLLARY_TWO_EXPONENT: u32 = 6;
/// Bound on the order of `Br_1 U / Br k`.
pub const ALGEBRAIC_PART_BOUND: u64 = 256;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub parent_constant_p2: Option<BigUint>,
    pub parent_constant_p3: Option<BigUint>,
    /// Restrict the product defining `N(m)` to these primes.
    pub restrict_primes: Option<Vec<u64>>,
}

impl BoundConfig {
    pub fn new(
        parent_constant_p2: Option<BigUint>,
        parent_constant_p3: Option<BigUint>,
        restrict_primes: Option<Vec<u64>>,
    ) -> Result<Self> {
        for c in [&parent_constant_p2, &parent_constant_p3].into_iter().flatten() {
            if c.is_zero() {
                return Err(Error::InvalidArgument("prime-power constants must be positive".into()));
            }
        }
        if let Some(ps) = &restrict_primes {
            if let Some(&p) = ps.iter().find(|&&p| !is_prime(p)) {
                return Err(Error::InvalidArgument(format!("{p} is not prime")));
            }
        }
        Ok(Self {
            parent_constant_p2,
            parent_constant_p3,
            restrict_primes: restrict_primes.map(|mut ps| {
                ps.sort_unstable();
                ps.dedup();
                ps
            }),
        })
    }

    fn override_for(&self, p: u64) -> Option<&BigUint> {
        match p {
            2 => self.parent_constant_p2.as_ref(),
            3 => self.parent_constant_p3.as_ref(),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    /// `65 (3^m - 1)(2m)^6`, stated for `p > 3`.
    Formula,
    /// Supplied through `BoundConfig`.
    Override,
    /// The `p > 3` formula used for `p = 2, 3` in the absence of an override.
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePowerBound {
    pub prime: u64,
    pub value: BigUint,
    pub source: ConstantSource,
}

pub fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut i = 5u64;
    while i.saturating_mul(i) <= n {
        if n.is_multiple_of(i) || n.is_multiple_of(i + 2) {
            return false;
        }
        i += 6;
    }
    true
}

fn check_m(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("field degree m must be at least 1".into()));
    }
    Ok(())
}

/// `m^{3 m^2}`: primes dividing the order of a torsion point are below it.
pub fn merel_prime_bound(m: u64) -> Result<BigUint> {
    check_m(m)?;
    let e = m
        .checked_mul(m)
        .and_then(|x| x.checked_mul(3))
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| Error::InvalidArgument(format!("m = {m} is too large")))?;
    Ok(BigUint::from(m).pow(e))
}

/// `65 (3^m - 1)(2m)^6`.
pub fn parent_formula(m: u64) -> Result<BigUint> {
    check_m(m)?;
    let e = u32::try_from(m).map_err(|_| Error::InvalidArgument(format!("m = {m} is too large")))?;
    let three = BigUint::from(3u32).pow(e) - 1u32;
    Ok(BigUint::from(65u32) * three * BigUint::from(2 * m).pow(6))
}

/// Bound on `p^n` for a point of order `p^n`.
pub fn parent_prime_power_bound(m: u64, p: u64, config: &BoundConfig) -> Result<PrimePowerBound> {
    check_m(m)?;
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let (value, source) = match (p, config.override_for(p)) {
        (_, Some(c)) => (c.clone(), ConstantSource::Override),
        (2 | 3, None) => (parent_formula(m)?, ConstantSource::Unverified),
        _ => (parent_formula(m)?, ConstantSource::Formula),
    };
    Ok(PrimePowerBound { prime: p, value, source })
}

/// Largest `e` with `p^e <= bound`.
fn floor_log(p: u64, bound: &BigUint) -> u32 {
    let p = BigUint::from(p);
    let mut e = 0;
    let mut acc = p.clone();
    while &acc <= bound {
        e += 1;
        acc *= &p;
    }
    e
}

/// `N(m)` in factored form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionBound {
    pub m: u64,
    /// `B(m)`: every prime in the product is at most this, and so is every
    /// prime power for `p > 3`.
    pub prime_limit: BigUint,
    pub p2: PrimePowerBound,
    pub p3: PrimePowerBound,
    pub restrict_primes: Option<Vec<u64>>,
}

impl TorsionBound {
    /// Exponent of `p` in `N(m)`.
    pub fn exponent_of(&self, p: u64) -> u32 {
        if !is_prime(p) || BigUint::from(p) > self.prime_limit {
            return 0;
        }
        if let Some(ps) = &self.restrict_primes {
            if ps.binary_search(&p).is_err() {
                return 0;
            }
        }
        match p {
            2 => floor_log(2, &self.p2.value),
            3 => floor_log(3, &self.p3.value),
            _ => floor_log(p, &self.prime_limit),
        }
    }

    /// The primes that can occur, if there are few enough to list.
    fn prime_support(&self) -> Result<Vec<u64>> {
        if let Some(ps) = &self.restrict_primes {
            return Ok(ps
                .iter()
                .copied()
                .filter(|&p| BigUint::from(p) <= self.prime_limit)
                .collect());
        }
        let limit = self
            .prime_limit
            .to_u64()
            .filter(|&b| b <= MATERIALIZE_LIMIT)
            .ok_or_else(|| Error::BudgetExceeded {
                budget: MATERIALIZE_LIMIT as usize,
                reached: self.prime_limit.to_usize().unwrap_or(usize::MAX),
            })?;
        Ok(primes_up_to(limit))
    }

    pub fn is_materializable(&self) -> bool {
        self.restrict_primes.is_some() || self.prime_limit <= BigUint::from(MATERIALIZE_LIMIT)
    }

    /// `N(m)` as an integer; refused when the prime limit is above
    /// `MATERIALIZE_LIMIT` and no restriction applies.
    pub fn value(&self) -> Result<BigUint> {
        let factors: Vec<BigUint> = self
            .prime_support()?
            .into_iter()
            .map(|p| BigUint::from(p).pow(self.exponent_of(p)))
            .collect();
        Ok(product_tree(factors))
    }

    pub fn flags(&self) -> Vec<String> {
        source_flags(&self.p2, &self.p3)
    }
}

fn source_flags(p2: &PrimePowerBound, p3: &PrimePowerBound) -> Vec<String> {
    let mut flags = Vec::new();
    for b in [p2, p3] {
        match b.source {
            ConstantSource::Unverified => flags.push(format!("p{}_constant_unverified", b.prime)),
            ConstantSource::Override => flags.push(format!("p{}_constant_override", b.prime)),
            ConstantSource::Formula => {}
        }
    }
    flags
}

fn product_tree(mut v: Vec<BigUint>) -> BigUint {
    if v.is_empty() {
        return BigUint::one();
    }
    while v.len() > 1 {
        v = v
            .chunks(2)
            .map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() })
            .collect();
    }
    v.pop().expect("non-empty")
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn torsion_bound(m: u64, config: &BoundConfig) -> Result<TorsionBound> {
    check_m(m)?;
    Ok(TorsionBound {
        m,
        prime_limit: parent_formula(m)?,
        p2: parent_prime_power_bound(m, 2, config)?,
        p3: parent_prime_power_bound(m, 3, config)?,
        restrict_primes: config.restrict_primes.clone(),
    })
}

/// `2^14 N(240 m)^2`, with the intermediate quantities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrauerBound {
    pub m: u64,
    pub extension_degree: u64,
    pub torsion: TorsionBound,
    /// `2^6` from the bound `2^6 N^2` on the transcendental contribution.
    pub corollary_factor: u64,
    /// Bound on the order of `Br_1 U / Br k`.
    pub algebraic_factor: u64,
}

impl BrauerBound {
    /// `corollary_factor * algebraic_factor`, which is `2^14`.
    pub fn leading_factor(&self) -> u64 {
        self.corollary_factor * self.algebraic_factor
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        let lead = if p == 2 { self.leading_factor().trailing_zeros() } else { 0 };
        lead + 2 * self.torsion.exponent_of(p)
    }

    pub fn value(&self) -> Result<BigUint> {
        let n = self.torsion.value()?;
        Ok(BigUint::from(self.leading_factor()) * &n * &n)
    }

    pub fn flags(&self) -> Vec<String> {
        self.torsion.flags()
    }
}

pub fn brauer_uniform_bound(m: u64, config: &BoundConfig) -> Result<BrauerBound> {
    check_m(m)?;
    let extension_degree = LINES_BOUND
        .checked_mul(m)
        .ok_or_else(|| Error::InvalidArgument(format!("m = {m} is too large")))?;
    Ok(BrauerBound {
        m,
        extension_degree,
        torsion: torsion_bound(extension_degree, config)?,
        corollary_factor: 1 << COROLLARY_TWO_EXPONENT,
        algebraic_factor: ALGEBRAIC_PART_BOUND,
    })
}

/// Exact values, as decimal strings where they could be computed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub m: u64,
    pub extension_degree: u64,
    pub torsion_bound: TorsionSummary,
    pub brauer_bound: BrauerSummary,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionSummary {
    pub field_degree: u64,
    pub prime_limit: String,
    pub exponent_of_2: u32,
    pub exponent_of_3: u32,
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrauerSummary {
    pub leading_factor: u64,
    pub value: Option<String>,
}

pub fn summarize(bound: &BrauerBound) -> BoundSummary {
    let t = &bound.torsion;
    let torsion_value = t.is_materializable().then(|| t.value().ok()).flatten();
    let brauer_value = torsion_value
        .as_ref()
        .map(|n| (BigUint::from(bound.leading_factor()) * n * n).to_string());
    BoundSummary {
        m: bound.m,
        extension_degree: bound.extension_degree,
        torsion_bound: TorsionSummary {
            field_degree: t.m,
            prime_limit: t.prime_limit.to_string(),
            exponent_of_2: t.exponent_of(2),
            exponent_of_3: t.exponent_of(3),
            value: torsion_value.map(|v| v.to_string()),
        },
        brauer_bound: BrauerSummary {
            leading_factor: bound.leading_factor(),
            value: brauer_value,
        },
        flags: bound.flags(),
    }
}

/// Exponent of `p` in `n`, for checks against materialized values.
pub fn valuation(n: &BigUint, p: u64) -> u32 {
    let p = BigUint::from(p);
    let mut n = n.clone();
    let mut e = 0;
    while !n.is_zero() && n.is_multiple_of(&p) {
        n /= &p;
        e += 1;
    }
    e
}
