//! Independent `H^1` computation from explicit 1-cocycles, for small groups.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::{coordinates_in, integer_kernel, smith_normal_form_right, AbelianGroupStructure, IntMatrix};
use crate::error::{Error, Result};

pub const ORACLE_MAX_ORDER: usize = 24;

/// Multiplication table of a finite group; `mult[a * order + b]` is the index
/// of `a * b`.
#[derive(Clone, Debug)]
pub struct FiniteGroupTable {
    order: usize,
    mult: Vec<usize>,
}

impl FiniteGroupTable {
    pub fn new(order: usize, mult: Vec<usize>) -> Result<Self> {
        if mult.len() != order * order || mult.iter().any(|&x| x >= order) {
            return Err(Error::InvalidArgument("malformed multiplication table".into()));
        }
        Ok(Self { order, mult })
    }

    /// Table of a finite set of matrices closed under multiplication.
    pub fn from_matrices(elements: &[IntMatrix]) -> Result<Self> {
        let index: HashMap<&IntMatrix, usize> =
            elements.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let n = elements.len();
        let mut mult = Vec::with_capacity(n * n);
        for a in elements {
            for b in elements {
                let p = a.mul(b)?;
                let k = *index.get(&p).ok_or_else(|| {
                    Error::InvalidArgument("matrix set is not closed under multiplication".into())
                })?;
                mult.push(k);
            }
        }
        Self::new(n, mult)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.order + b]
    }
}

/// `H^1(G, Z^r)` as `Z^1 / B^1`, with cocycle conditions
/// `c(gh) = c(g) + g c(h)` imposed for every pair of elements.
/// `action[i]` is the matrix of element `i` of `table`.
pub fn cocycle_oracle_h1(
    table: &FiniteGroupTable,
    action: &[IntMatrix],
) -> Result<AbelianGroupStructure> {
    let n = table.order();
    if n > ORACLE_MAX_ORDER {
        return Err(Error::OracleTooLarge(n));
    }
    if action.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: action.len(),
        });
    }
    let r = action.first().map_or(0, IntMatrix::rows);
    if r == 0 {
        return Ok(AbelianGroupStructure::trivial());
    }
    let unknowns = n * r;

    // One block of r rows per ordered pair (g, h).
    let mut constraints = IntMatrix::zeros(n * n * r, unknowns);
    for g in 0..n {
        for h in 0..n {
            let gh = table.product(g, h);
            let base = (g * n + h) * r;
            for i in 0..r {
                let row = base + i;
                constraints[(row, gh * r + i)] += BigInt::from(1);
                constraints[(row, g * r + i)] -= BigInt::from(1);
                for j in 0..r {
                    let coeff = action[g][(i, j)].clone();
                    constraints[(row, h * r + j)] -= coeff;
                }
            }
        }
    }
    let cocycles = integer_kernel(&constraints);

    // Coboundaries c(g) = (g - 1) x for x running over the standard basis.
    let mut coboundaries = IntMatrix::zeros(unknowns, r);
    for g in 0..n {
        for i in 0..r {
            for j in 0..r {
                let mut v = action[g][(i, j)].clone();
                if i == j {
                    v -= 1;
                }
                coboundaries[(g * r + i, j)] = v;
            }
        }
    }
    if cocycles.cols() == 0 {
        return Ok(AbelianGroupStructure::trivial());
    }
    let coords = coordinates_in(&cocycles, &coboundaries)?;
    let snf = smith_normal_form_right(&coords);
    let factors = snf.invariant_factors();
    if factors.len() != cocycles.cols() {
        return Err(Error::InvalidArgument(
            "cocycle group is not finite modulo coboundaries".into(),
        ));
    }
    let orders: Vec<u64> = factors
        .iter()
        .map(|d| u64::try_from(d).expect("invariant factor fits in u64"))
        .collect();
    Ok(AbelianGroupStructure::from_cyclic_orders(&orders))
}
