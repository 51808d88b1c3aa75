//! Integral isometries of the Picard lattice fixing `K`, Weyl groups generated
//! by root reflections, and the faithful permutation action on lines.
//!
//! Group arithmetic runs on line permutations: an element is stored as the
//! permutation it induces on the sorted line list, and is identified by the
//! images of a fixed set of base lines which together with `K` span the
//! lattice over Q.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{pairing, DegreeSpec, DivisorClass, PicardLattice};
use crate::zcohomology::IntMatrix;

pub const ORBIT_SAFETY_CAP: usize = 1_000_000;
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// An integer matrix acting on column vectors of blow-up coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegralIsometry {
    rank: usize,
    matrix: Vec<i64>,
}

impl IntegralIsometry {
    pub fn identity(rank: usize) -> Self {
        let mut matrix = vec![0; rank * rank];
        for i in 0..rank {
            matrix[i * rank + i] = 1;
        }
        Self { rank, matrix }
    }

    /// Validates `M^T G M = G` and `M K = K`.
    pub fn new(lattice: &PicardLattice, matrix: Vec<i64>) -> Result<Self> {
        let rank = lattice.rank();
        if matrix.len() != rank * rank {
            return Err(Error::DimensionMismatch {
                expected: rank * rank,
                got: matrix.len(),
            });
        }
        let g = Self { rank, matrix };
        if !g.is_isometry_of(lattice) {
            return Err(Error::NotAnIsometry);
        }
        Ok(g)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.matrix[i * self.rank + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.matrix
    }

    pub fn apply(&self, v: &DivisorClass) -> DivisorClass {
        let r = self.rank;
        DivisorClass(
            (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| self.matrix[i * r + j] * v.0[j])
                        .sum::<i64>()
                })
                .collect(),
        )
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let r = self.rank;
        let mut m = vec![0i64; r * r];
        for i in 0..r {
            for k in 0..r {
                let a = self.matrix[i * r + k];
                if a == 0 {
                    continue;
                }
                for j in 0..r {
                    m[i * r + j] += a * other.matrix[k * r + j];
                }
            }
        }
        Self { rank: r, matrix: m }
    }

    pub fn is_isometry_of(&self, lattice: &PicardLattice) -> bool {
        let r = self.rank;
        if r != lattice.rank() {
            return false;
        }
        let cols: Vec<DivisorClass> = (0..r)
            .map(|j| DivisorClass((0..r).map(|i| self.matrix[i * r + j]).collect()))
            .collect();
        let diag = lattice.gram_diagonal();
        for i in 0..r {
            for j in 0..r {
                let want = if i == j { diag[i] } else { 0 };
                if pairing(&cols[i].0, &cols[j].0) != want {
                    return false;
                }
            }
        }
        self.apply(lattice.canonical()) == *lattice.canonical()
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        IntMatrix::from_i64(self.rank, self.rank, &self.matrix)
    }

    pub fn from_int_matrix(m: &IntMatrix) -> Option<Self> {
        if !m.is_square() {
            return None;
        }
        Some(Self {
            rank: m.rows(),
            matrix: m.to_i64()?,
        })
    }
}

/// Reflection `x -> x + (x.r) r` in a root `r` (`r.r = -2`, `r.K = 0`).
pub fn reflection(lattice: &PicardLattice, root: &DivisorClass) -> Result<IntegralIsometry> {
    let rr = lattice.intersect(root, root)?;
    let rk = lattice.intersect(root, lattice.canonical())?;
    if rr != -2 || rk != 0 {
        return Err(Error::NotARoot {
            self_pairing: rr,
            canonical_pairing: rk,
        });
    }
    let r = lattice.rank();
    let diag = lattice.gram_diagonal();
    let mut m = vec![0i64; r * r];
    for i in 0..r {
        for j in 0..r {
            // column j is s(e_j) = e_j + (e_j . root) root
            let ej_dot_root = diag[j] * root.0[j];
            m[i * r + j] = i64::from(i == j) + ej_dot_root * root.0[i];
        }
    }
    Ok(IntegralIsometry { rank: r, matrix: m })
}

/// Closure of `{seed}` under the generators, sorted.
pub fn orbit(generators: &[IntegralIsometry], seed: &DivisorClass) -> Result<Vec<DivisorClass>> {
    let mut seen: FxHashSet<DivisorClass> = FxHashSet::default();
    let mut queue = VecDeque::new();
    seen.insert(seed.clone());
    queue.push_back(seed.clone());
    while let Some(v) = queue.pop_front() {
        for g in generators {
            let w = g.apply(&v);
            if !seen.contains(&w) {
                if seen.len() >= ORBIT_SAFETY_CAP {
                    return Err(Error::OrbitTooLarge(ORBIT_SAFETY_CAP));
                }
                seen.insert(w.clone());
                queue.push_back(w);
            }
        }
    }
    let mut out: Vec<DivisorClass> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Permutation action of isometries on the sorted line set.
#[derive(Clone, Debug)]
pub struct LineAction {
    lattice: PicardLattice,
    lines: Vec<DivisorClass>,
    index: FxHashMap<DivisorClass, u8>,
    base: Vec<usize>,
    base_adjugate: IntMatrix,
    base_det: BigInt,
}

impl LineAction {
    pub fn new(lattice: &PicardLattice) -> Self {
        let lines = lattice.lines();
        assert!(lines.len() <= 256, "line indices must fit in u8");
        let index = lines
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u8))
            .collect();
        let r = lattice.rank();
        // Greedy choice of lines which together with K are independent.
        let mut base = Vec::new();
        let mut cols: Vec<Vec<BigInt>> = vec![to_big(lattice.canonical())];
        for (i, l) in lines.iter().enumerate() {
            if base.len() + 1 == r {
                break;
            }
            let mut trial = cols.clone();
            trial.push(to_big(l));
            let m = IntMatrix::from_columns(r, &trial);
            if crate::zcohomology::smith_normal_form_right(&m).rank() == trial.len() {
                cols = trial;
                base.push(i);
            }
        }
        assert_eq!(base.len() + 1, r, "lines and K span the lattice");
        // Columns ordered as [base lines..., K].
        cols.rotate_left(1);
        let b = IntMatrix::from_columns(r, &cols);
        let base_det = b.determinant().expect("square");
        let base_adjugate = adjugate(&b);
        Self {
            lattice: lattice.clone(),
            lines,
            index,
            base,
            base_adjugate,
            base_det,
        }
    }

    pub fn lattice(&self) -> &PicardLattice {
        &self.lattice
    }

    pub fn lines(&self) -> &[DivisorClass] {
        &self.lines
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn line_index(&self, l: &DivisorClass) -> Option<usize> {
        self.index.get(l).map(|&i| i as usize)
    }

    /// Permutation of line indices induced by `g`.
    pub fn perm_of(&self, g: &IntegralIsometry) -> Result<Vec<u8>> {
        self.lines
            .iter()
            .map(|l| self.index.get(&g.apply(l)).copied().ok_or(Error::NotAnIsometry))
            .collect()
    }

    /// Packed images of the base lines; identifies the element.
    pub fn key(&self, perm: &[u8]) -> u64 {
        self.base
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &b)| acc | (u64::from(perm[b]) << (8 * k)))
    }

    /// Key of `a * b` without materializing the product.
    pub fn product_key(&self, a: &[u8], b: &[u8]) -> u64 {
        self.base
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &i)| acc | (u64::from(a[b[i] as usize]) << (8 * k)))
    }

    /// Recovers the matrix of a line permutation.
    pub fn matrix_of_perm(&self, perm: &[u8]) -> IntegralIsometry {
        let r = self.lattice.rank();
        let mut cols: Vec<Vec<BigInt>> = self
            .base
            .iter()
            .map(|&b| to_big(&self.lines[perm[b] as usize]))
            .collect();
        cols.push(to_big(self.lattice.canonical()));
        let images = IntMatrix::from_columns(r, &cols);
        let scaled = images.mul(&self.base_adjugate).expect("square");
        let mut m = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let x = &scaled[(i, j)];
                debug_assert!((x % &self.base_det).is_zero());
                m.push((x / &self.base_det).to_i64().expect("small entries"));
            }
        }
        IntegralIsometry { rank: r, matrix: m }
    }
}

fn to_big(v: &DivisorClass) -> Vec<BigInt> {
    v.0.iter().map(|&x| BigInt::from(x)).collect()
}

fn adjugate(m: &IntMatrix) -> IntMatrix {
    let n = m.rows();
    let mut adj = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut minor = IntMatrix::zeros(n - 1, n - 1);
            for (ii, si) in (0..n).filter(|&x| x != i).enumerate() {
                for (jj, sj) in (0..n).filter(|&x| x != j).enumerate() {
                    minor[(ii, jj)] = m[(si, sj)].clone();
                }
            }
            let c = minor.determinant().expect("square");
            // adj = transpose of the cofactor matrix
            adj[(j, i)] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    adj
}

/// A finite group of isometries, fully enumerated as line permutations.
///
/// Element 0 is the identity; the remaining indices follow breadth-first
/// closure under right multiplication by the generators, in generator order.
#[derive(Clone, Debug)]
pub struct MatrixGroup {
    action: LineAction,
    generators: Vec<IntegralIsometry>,
    generator_indices: Vec<u32>,
    perms: Vec<u8>,
    index: FxHashMap<u64, u32>,
    inverses: Vec<u32>,
}

/// Enumerates the group generated by `generators`, failing past `budget`
/// elements.
pub fn generate_group(
    lattice: &PicardLattice,
    generators: &[IntegralIsometry],
    budget: usize,
) -> Result<MatrixGroup> {
    for g in generators {
        if !g.is_isometry_of(lattice) {
            return Err(Error::NotAnIsometry);
        }
    }
    let action = LineAction::new(lattice);
    let n = action.line_count();
    let gen_perms: Vec<Vec<u8>> = generators
        .iter()
        .map(|g| action.perm_of(g))
        .collect::<Result<_>>()?;

    let mut perms: Vec<u8> = (0..n as u8).collect();
    let mut index: FxHashMap<u64, u32> = FxHashMap::default();
    index.insert(action.key(&perms[..n]), 0);
    let mut scratch = vec![0u8; n];
    let mut next = 0usize;
    while next * n < perms.len() {
        for gp in &gen_perms {
            let cur = &perms[next * n..(next + 1) * n];
            for (j, s) in scratch.iter_mut().enumerate() {
                *s = cur[gp[j] as usize];
            }
            let key = action.key(&scratch);
            if index.contains_key(&key) {
                continue;
            }
            let count = perms.len() / n;
            if count >= budget {
                return Err(Error::BudgetExceeded {
                    budget,
                    reached: count,
                });
            }
            index.insert(key, count as u32);
            perms.extend_from_slice(&scratch);
        }
        next += 1;
    }

    let order = perms.len() / n;
    let generator_indices = gen_perms
        .iter()
        .map(|p| index[&action.key(p)])
        .collect();
    let mut inverses = vec![0u32; order];
    let mut inv = vec![0u8; n];
    for (i, slot) in inverses.iter_mut().enumerate() {
        let p = &perms[i * n..(i + 1) * n];
        for (j, &pj) in p.iter().enumerate() {
            inv[pj as usize] = j as u8;
        }
        *slot = index[&action.key(&inv)];
    }
    Ok(MatrixGroup {
        action,
        generators: generators.to_vec(),
        generator_indices,
        perms,
        index,
        inverses,
    })
}

/// Order of the Weyl group of the root system `K^perp`, without enumerating it:
/// `E8, E7, E6, D5, A4, A2xA1, A1` and the trivial group for `8b`.
pub fn weyl_group_order(degree: DegreeSpec) -> usize {
    match degree.degree() {
        1 => 696_729_600,
        2 => 2_903_040,
        3 => 51_840,
        4 => 1_920,
        5 => 120,
        6 => 12,
        7 => 2,
        _ => 1,
    }
}

/// The Weyl group generated by the simple reflections of `lattice`.
pub fn weyl_group(lattice: &PicardLattice, budget: usize) -> Result<MatrixGroup> {
    generate_group(lattice, &lattice.simple_reflections(), budget)
}

impl MatrixGroup {
    pub fn lattice(&self) -> &PicardLattice {
        self.action.lattice()
    }

    pub fn action(&self) -> &LineAction {
        &self.action
    }

    pub fn order(&self) -> usize {
        self.inverses.len()
    }

    pub fn generators(&self) -> &[IntegralIsometry] {
        &self.generators
    }

    pub fn generator_indices(&self) -> &[u32] {
        &self.generator_indices
    }

    pub fn identity(&self) -> u32 {
        0
    }

    pub fn perm(&self, i: u32) -> &[u8] {
        let n = self.action.line_count();
        &self.perms[i as usize * n..(i as usize + 1) * n]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let key = self.action.product_key(self.perm(a), self.perm(b));
        self.index[&key]
    }

    pub fn inverse(&self, a: u32) -> u32 {
        self.inverses[a as usize]
    }

    /// `g * x * g^{-1}`.
    pub fn conjugate(&self, g: u32, x: u32) -> u32 {
        self.mul(self.mul(g, x), self.inverse(g))
    }

    pub fn matrix(&self, i: u32) -> IntegralIsometry {
        self.action.matrix_of_perm(self.perm(i))
    }

    pub fn index_of_perm(&self, perm: &[u8]) -> Option<u32> {
        self.index.get(&self.action.key(perm)).copied()
    }

    pub fn index_of(&self, g: &IntegralIsometry) -> Option<u32> {
        let p = self.action.perm_of(g).ok()?;
        let i = self.index_of_perm(&p)?;
        (self.perm(i) == p.as_slice()).then_some(i)
    }

    pub fn contains_index(&self, i: usize) -> bool {
        i < self.order()
    }

    /// Order of an element, as the lcm of its cycle lengths on lines.
    pub fn element_order(&self, i: u32) -> u64 {
        let p = self.perm(i);
        let mut seen = vec![false; p.len()];
        let mut order = 1u64;
        for start in 0..p.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = p[j] as usize;
                len += 1;
            }
            order = num_integer::lcm(order, len);
        }
        order
    }

    /// `x^k`.
    pub fn power(&self, x: u32, k: u64) -> u32 {
        let mut result = self.identity();
        for _ in 0..k {
            result = self.mul(result, x);
        }
        result
    }
}
