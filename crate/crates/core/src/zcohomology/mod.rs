//! Exact linear algebra over Z and first cohomology of finite groups acting on
//! free Z-modules.
//!
//! `H^1(G, M)` is computed through the annihilation identity: `|G|` kills
//! `H^1`, and for torsion-free `M` the sequence `0 -> M -n-> M -> M/nM -> 0`
//! gives `H^1(G, M) = (M/nM)^G / image(M^G)`. Both sides are presented as a
//! lattice `L` with a sublattice `S` inside `Z^rank`, which also makes induced
//! maps concrete.

mod matrix;
mod oracle;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use matrix::{
    coordinates_in, integer_kernel, lattice_basis, smith_normal_form, smith_normal_form_right,
    unimodular_inverse, IntMatrix, SmithForm,
};
pub use oracle::{cocycle_oracle_h1, FiniteGroupTable, ORACLE_MAX_ORDER};

/// A finite abelian group as its invariant-factor chain `d1 | d2 | ... | dk`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbelianGroupStructure {
    invariant_factors: Vec<u64>,
}

impl AbelianGroupStructure {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_cyclic_orders(&[n])
    }

    /// Validated constructor; factors must form a divisibility chain of
    /// entries `>= 2`.
    pub fn from_invariant_factors(factors: Vec<u64>) -> Result<Self> {
        if factors.iter().any(|&d| d < 2) {
            return Err(Error::InvalidArgument(format!(
                "invariant factors must be at least 2: {factors:?}"
            )));
        }
        if factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidArgument(format!(
                "not a divisibility chain: {factors:?}"
            )));
        }
        Ok(Self {
            invariant_factors: factors,
        })
    }

    /// Canonical form of a product of cyclic groups of the given orders.
    /// Orders equal to 1 are ignored; 0 is not allowed.
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        assert!(orders.iter().all(|&d| d > 0), "cyclic orders must be positive");
        let n = orders.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, &d) in orders.iter().enumerate() {
            m[(i, i)] = BigInt::from(d);
        }
        Self::from_bigint_factors(&smith_normal_form_right(&m).invariant_factors())
    }

    fn from_bigint_factors(diagonal: &[BigInt]) -> Self {
        let invariant_factors = diagonal
            .iter()
            .filter(|d| !d.is_one())
            .map(|d| d.to_u64().expect("invariant factor fits in u64"))
            .collect();
        Self { invariant_factors }
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }

    /// Largest invariant factor (1 for the trivial group).
    pub fn exponent(&self) -> u64 {
        self.invariant_factors.last().copied().unwrap_or(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }
}

/// Renders in the `2^2·4` style: each distinct factor with its multiplicity.
impl fmt::Display for AbelianGroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariant_factors.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.invariant_factors.len() {
            let d = self.invariant_factors[i];
            let run = self.invariant_factors[i..]
                .iter()
                .take_while(|&&x| x == d)
                .count();
            if !first {
                write!(f, "·")?;
            }
            first = false;
            if run == 1 {
                write!(f, "{d}")?;
            } else {
                write!(f, "{d}^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Parses `1`, `6`, `2^2·4`, `2^3*4` (either `·` or `*` as separator).
impl FromStr for AbelianGroupStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::trivial());
        }
        let mut orders = Vec::new();
        for part in s.split(['·', '*']) {
            let part = part.trim();
            let (base, exp) = match part.split_once('^') {
                Some((b, e)) => (b, e),
                None => (part, "1"),
            };
            let base: u64 = base
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad factor '{part}' in '{s}'")))?;
            let exp: usize = exp
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent '{part}' in '{s}'")))?;
            if base == 0 {
                return Err(Error::Parse(format!("zero factor in '{s}'")));
            }
            orders.extend(std::iter::repeat_n(base, exp));
        }
        Ok(Self::from_cyclic_orders(&orders))
    }
}

/// A free Z-module of finite rank with a group acting through the images of
/// a generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GModule {
    rank: usize,
    action: Vec<IntMatrix>,
}

impl GModule {
    pub fn new(rank: usize, action: Vec<IntMatrix>) -> Result<Self> {
        for g in &action {
            if g.rows() != rank || g.cols() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    got: g.rows().max(g.cols()),
                });
            }
            if !g.is_unimodular() {
                return Err(Error::NotUnimodular);
            }
        }
        Ok(Self { rank, action })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn action(&self) -> &[IntMatrix] {
        &self.action
    }

    /// The stacked matrix of all `g - I`.
    fn augmentation(&self) -> IntMatrix {
        let id = IntMatrix::identity(self.rank);
        let blocks: Vec<IntMatrix> = self
            .action
            .iter()
            .map(|g| g.sub(&id).expect("square of module rank"))
            .collect();
        if blocks.is_empty() {
            return IntMatrix::zeros(0, self.rank);
        }
        let refs: Vec<&IntMatrix> = blocks.iter().collect();
        IntMatrix::vstack(&refs).expect("equal column counts")
    }
}

/// `lattice / sublattice` for lattices inside some `Z^n`, with `sublattice`
/// given by generators and contained in `lattice` (full column rank basis).
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub lattice: IntMatrix,
    pub relations: IntMatrix,
}

impl Subquotient {
    pub fn structure(&self) -> Result<AbelianGroupStructure> {
        let k = self.lattice.cols();
        if k == 0 {
            return Ok(AbelianGroupStructure::trivial());
        }
        let coords = coordinates_in(&self.lattice, &self.relations)?;
        let snf = smith_normal_form_right(&coords);
        let factors = snf.invariant_factors();
        if factors.len() != k {
            return Err(Error::InvalidArgument(
                "subquotient is infinite: relations do not have full rank".into(),
            ));
        }
        Ok(AbelianGroupStructure::from_bigint_factors(&factors))
    }
}

/// `H^1(G, M)` together with its presentation as `L / S` inside `Z^rank`,
/// where `L = {x : (g - 1)x = 0 mod n}` and `S = M^G + nZ^rank`.
#[derive(Clone, Debug)]
pub struct H1 {
    pub structure: AbelianGroupStructure,
    pub group_order: u64,
    pub presentation: Subquotient,
    pub fixed_rank: usize,
}

/// Z-basis (as columns) of the sublattice fixed by every generator.
pub fn fixed_sublattice(module: &GModule) -> IntMatrix {
    integer_kernel(&module.augmentation())
}

/// First cohomology of a finite group of order `group_order` whose
/// generators act on `module`.
pub fn h1(module: &GModule, group_order: u64) -> Result<H1> {
    if group_order == 0 {
        return Err(Error::InvalidArgument("group order must be positive".into()));
    }
    let r = module.rank;
    let n = BigInt::from(group_order);
    let a = module.augmentation();
    let snf = smith_normal_form_right(&a);
    let factors = snf.invariant_factors();
    let t = factors.len();
    let v = &snf.right;

    // In coordinates y = V^{-1} x the condition A x = 0 mod n reads
    // s_i y_i = 0 mod n for i < t.
    let mut lattice = v.clone();
    for (j, s) in factors.iter().enumerate() {
        let scale = &n / s.gcd(&n);
        for i in 0..r {
            lattice[(i, j)] *= &scale;
        }
    }
    let fixed = v.select_columns(t..r);
    let relations = IntMatrix::hstack(&[&fixed, &IntMatrix::scalar(r, group_order as i64)])?;
    let presentation = Subquotient { lattice, relations };
    let structure = presentation.structure()?;
    Ok(H1 {
        structure,
        group_order,
        presentation,
        fixed_rank: r - t,
    })
}

/// A homomorphism between finite abelian groups induced by a lattice map
/// on their presentations.
#[derive(Clone, Debug)]
pub struct FiniteAbelianMap {
    pub domain: H1,
    pub codomain: H1,
    pub matrix: IntMatrix,
}

impl FiniteAbelianMap {
    pub fn cokernel(&self) -> Result<AbelianGroupStructure> {
        let image = self.matrix.mul(&self.domain.presentation.lattice)?;
        let relations = IntMatrix::hstack(&[&image, &self.codomain.presentation.relations])?;
        Subquotient {
            lattice: self.codomain.presentation.lattice.clone(),
            relations,
        }
        .structure()
    }

    /// `(L_M ∩ P^{-1}(S_N)) / S_M`.
    pub fn kernel(&self) -> Result<AbelianGroupStructure> {
        let dom = &self.domain.presentation;
        let image = self.matrix.mul(&dom.lattice)?;
        let target_sub = lattice_basis(&self.codomain.presentation.relations);
        let k = dom.lattice.cols();
        let mut neg = target_sub.clone();
        for i in 0..neg.rows() {
            for j in 0..neg.cols() {
                let x = -std::mem::take(&mut neg[(i, j)]);
                neg[(i, j)] = x;
            }
        }
        let combined = IntMatrix::hstack(&[&image, &neg])?;
        let ker = integer_kernel(&combined);
        let coeffs = ker.select_rows(0..k);
        let preimage = dom.lattice.mul(&coeffs)?;
        let basis = lattice_basis(&preimage);
        Subquotient {
            lattice: basis,
            relations: dom.relations.clone(),
        }
        .structure()
    }

    pub fn is_injective(&self) -> Result<bool> {
        Ok(self.kernel()?.is_trivial())
    }
}

/// The map `H^1(G, M) -> H^1(G, N)` induced by an equivariant lattice map
/// `projection: Z^rank(M) -> Z^rank(N)`. Generators of `source` and `target`
/// must correspond one to one.
pub fn h1_induced_map(
    source: &GModule,
    target: &GModule,
    projection: &IntMatrix,
    group_order: u64,
) -> Result<FiniteAbelianMap> {
    if projection.cols() != source.rank || projection.rows() != target.rank {
        return Err(Error::DimensionMismatch {
            expected: source.rank,
            got: projection.cols(),
        });
    }
    if source.action.len() != target.action.len() {
        return Err(Error::NotEquivariant);
    }
    for (g, h) in source.action.iter().zip(&target.action) {
        if projection.mul(g)? != h.mul(projection)? {
            return Err(Error::NotEquivariant);
        }
    }
    Ok(FiniteAbelianMap {
        domain: h1(source, group_order)?,
        codomain: h1(target, group_order)?,
        matrix: projection.clone(),
    })
}
