//! Picard lattices of del Pezzo surfaces in the blow-up basis
//! `e0, e1, ..., e_{9-d}` with intersection form `diag(1, -1, ..., -1)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weyl::{self, IntegralIsometry};
use crate::zcohomology::{self, IntMatrix};

/// Degree of a del Pezzo surface with a free quotient `Pic X / ZK`:
/// degrees 1 through 7, and the blow-up of the plane in one point (`8b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DegreeSpec {
    Degree(u8),
    BlowUpEight,
}

impl DegreeSpec {
    pub fn new(degree: u8) -> Result<Self> {
        match degree {
            1..=7 => Ok(Self::Degree(degree)),
            _ => Err(Error::UnsupportedDegree(degree.to_string())),
        }
    }

    /// `K.K` of the surface.
    pub fn degree(self) -> u8 {
        match self {
            Self::Degree(d) => d,
            Self::BlowUpEight => 8,
        }
    }

    pub fn rank(self) -> usize {
        10 - self.degree() as usize
    }

    /// All accepted degrees, in the order 1..7 then 8b.
    pub fn all() -> Vec<DegreeSpec> {
        (1..=7)
            .map(DegreeSpec::Degree)
            .chain(std::iter::once(DegreeSpec::BlowUpEight))
            .collect()
    }
}

impl fmt::Display for DegreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Degree(d) => write!(f, "{d}"),
            Self::BlowUpEight => write!(f, "8b"),
        }
    }
}

impl FromStr for DegreeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "8b" | "8B" => Ok(Self::BlowUpEight),
            "8" | "8a" | "9" => Err(Error::UnsupportedDegree(s.trim().to_string())),
            other => other
                .parse::<u8>()
                .map_err(|_| Error::Parse(format!("invalid degree '{other}'")))
                .and_then(Self::new),
        }
    }
}

impl Serialize for DegreeSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DegreeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A divisor class in blow-up coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DivisorClass(pub Vec<i64>);

impl DivisorClass {
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Self(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(self.0.iter().map(|x| k * x).collect())
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicardLattice {
    degree: DegreeSpec,
    canonical: DivisorClass,
}

impl PicardLattice {
    pub fn degree_spec(&self) -> DegreeSpec {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.degree.rank()
    }

    pub fn canonical(&self) -> &DivisorClass {
        &self.canonical
    }

    /// Diagonal of the Gram matrix: `+1` then `-1` repeated.
    pub fn gram_diagonal(&self) -> Vec<i64> {
        (0..self.rank()).map(|i| if i == 0 { 1 } else { -1 }).collect()
    }

    pub fn gram(&self) -> IntMatrix {
        let r = self.rank();
        let mut g = IntMatrix::zeros(r, r);
        for (i, d) in self.gram_diagonal().into_iter().enumerate() {
            g[(i, i)] = BigInt::from(d);
        }
        g
    }

    /// Intersection number `u . v`.
    pub fn intersect(&self, u: &DivisorClass, v: &DivisorClass) -> Result<i64> {
        let r = self.rank();
        for w in [u, v] {
            if w.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    got: w.len(),
                });
            }
        }
        Ok(pairing(&u.0, &v.0))
    }

    pub fn simple_roots(&self) -> Vec<DivisorClass> {
        let r = self.rank();
        let mut out = Vec::new();
        for i in 1..r.saturating_sub(1) {
            let mut v = vec![0; r];
            v[i] = 1;
            v[i + 1] = -1;
            out.push(DivisorClass(v));
        }
        if r >= 4 {
            let mut v = vec![0; r];
            v[0] = 1;
            v[1] = -1;
            v[2] = -1;
            v[3] = -1;
            out.push(DivisorClass(v));
        }
        out
    }

    /// Reflections in the simple roots; they generate the Weyl group.
    pub fn simple_reflections(&self) -> Vec<IntegralIsometry> {
        self.simple_roots()
            .iter()
            .map(|r| weyl::reflection(self, r).expect("simple roots are roots"))
            .collect()
    }

    /// All classes with `r.r = -2` and `r.K = 0`, sorted.
    pub fn roots(&self) -> Vec<DivisorClass> {
        let gens = self.simple_reflections();
        let mut out = Vec::new();
        for seed in self.simple_roots() {
            for v in weyl::orbit(&gens, &seed).expect("root orbits are finite") {
                out.push(v);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// All classes with `L.L = L.K = -1` (the lines), sorted.
    pub fn lines(&self) -> Vec<DivisorClass> {
        let r = self.rank();
        let gens = self.simple_reflections();
        let mut seeds = vec![DivisorClass::basis(r, 1)];
        if r >= 3 {
            let mut v = vec![0; r];
            v[0] = 1;
            v[1] = -1;
            v[2] = -1;
            seeds.push(DivisorClass(v));
        }
        let mut out = Vec::new();
        for seed in seeds {
            out.extend(weyl::orbit(&gens, &seed).expect("line orbits are finite"));
        }
        out.sort();
        out.dedup();
        out
    }

    /// Presentation of `Pic U = Pic X / ZK`.
    pub fn quotient_mod_k(&self) -> Result<QuotientPresentation> {
        QuotientPresentation::new(self)
    }

    /// Minimal non-zero `|D.K|` over the sublattice spanned by `basis`,
    /// i.e. the gcd of the pairings of the basis with `K`.
    pub fn delta_invariant(&self, basis: &[DivisorClass]) -> Result<u64> {
        if basis.is_empty() {
            return Err(Error::DegenerateSublattice);
        }
        let mut g: u64 = 0;
        for b in basis {
            let p = self.intersect(b, &self.canonical)?;
            g = num_integer::gcd(g, p.unsigned_abs());
        }
        if g == 0 {
            return Err(Error::DegenerateSublattice);
        }
        Ok(g)
    }

    /// A class `D` in the span of `basis` with `D.K = delta_invariant`.
    pub fn delta_witness(&self, basis: &[DivisorClass]) -> Result<DivisorClass> {
        let delta = self.delta_invariant(basis)? as i64;
        let pairings: Vec<i64> = basis
            .iter()
            .map(|b| self.intersect(b, &self.canonical))
            .collect::<Result<_>>()?;
        // Bezout coefficients by folding the extended gcd.
        let mut acc_gcd = 0i64;
        let mut acc = DivisorClass(vec![0; self.rank()]);
        for (b, &p) in basis.iter().zip(&pairings) {
            let e = num_integer::Integer::extended_gcd(&acc_gcd, &p);
            acc = acc.scale(e.x).add(&b.scale(e.y));
            acc_gcd = e.gcd;
        }
        if acc_gcd < 0 {
            acc = acc.neg();
            acc_gcd = -acc_gcd;
        }
        debug_assert_eq!(acc_gcd, delta);
        debug_assert_eq!(self.intersect(&acc, &self.canonical)?, delta);
        Ok(acc)
    }
}

pub(crate) fn pairing(u: &[i64], v: &[i64]) -> i64 {
    let mut s = 0i64;
    for (i, (a, b)) in u.iter().zip(v).enumerate() {
        let t = a.checked_mul(*b).expect("intersection overflow");
        s = if i == 0 { s + t } else { s - t };
    }
    s
}

/// Build the Picard lattice of a del Pezzo surface of the given degree.
pub fn build_picard_lattice(degree: DegreeSpec) -> PicardLattice {
    let r = degree.rank();
    let mut k = vec![1; r];
    k[0] = -3;
    PicardLattice {
        degree,
        canonical: DivisorClass(k),
    }
}

/// `Pic X -> Pic X / ZK` as an explicit surjection onto `Z^{rank-1}`,
/// together with a section.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientPresentation {
    pub ambient: PicardLattice,
    pub projection: IntMatrix,
    pub section: IntMatrix,
}

impl QuotientPresentation {
    fn new(lattice: &PicardLattice) -> Result<Self> {
        let r = lattice.rank();
        let k = IntMatrix::from_i64(r, 1, lattice.canonical().coords());
        let snf = zcohomology::smith_normal_form(&k);
        let factors = snf.invariant_factors();
        if factors.len() != 1 || !factors[0].is_positive() || factors[0] != BigInt::from(1) {
            return Err(Error::CanonicalNotPrimitive);
        }
        // left * K = e_0, so the remaining rows of `left` kill K and extend it
        // to a basis; the matching columns of left^{-1} are a section.
        let projection = snf.left.select_rows(1..r);
        let inverse = zcohomology::unimodular_inverse(&snf.left);
        let section = inverse.select_columns(1..r);
        Ok(Self {
            ambient: lattice.clone(),
            projection,
            section,
        })
    }

    pub fn quotient_rank(&self) -> usize {
        self.projection.rows()
    }

    /// The matrix of `g` on the quotient: `projection * g * section`.
    pub fn induced_action(&self, g: &IntMatrix) -> Result<IntMatrix> {
        self.projection.mul(g)?.mul(&self.section)
    }

    pub fn project(&self, v: &DivisorClass) -> Result<Vec<i64>> {
        let x: Vec<BigInt> = v.0.iter().map(|&c| BigInt::from(c)).collect();
        Ok(self
            .projection
            .mul_vec(&x)?
            .iter()
            .map(|c| c.to_i64().expect("small coordinates"))
            .collect())
    }

    /// `projection . K == 0`.
    pub fn kills_canonical(&self) -> bool {
        self.project(self.ambient.canonical())
            .map(|v| v.iter().all(|c| *c == 0))
            .unwrap_or(false)
    }
}

/// Columns of an integer basis matrix as divisor classes.
pub fn classes_from_columns(basis: &IntMatrix) -> Vec<DivisorClass> {
    basis
        .columns()
        .into_iter()
        .map(|col| {
            DivisorClass(
                col.iter()
                    .map(|x| {
                        if x.is_zero() {
                            0
                        } else {
                            x.to_i64().expect("small coordinates")
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(d: u8) -> PicardLattice {
        build_picard_lattice(DegreeSpec::new(d).unwrap())
    }

    #[test]
    fn canonical_self_intersection_is_degree() {
        for spec in DegreeSpec::all() {
            let l = build_picard_lattice(spec);
            let k = l.canonical().clone();
            assert_eq!(l.intersect(&k, &k).unwrap(), spec.degree() as i64);
            assert_eq!(l.rank(), 10 - spec.degree() as usize);
        }
    }

    #[test]
    fn degree_one_canonical() {
        assert_eq!(lattice(1).canonical().coords(), &[-3, 1, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn blow_up_eight() {
        let l = build_picard_lattice("8b".parse().unwrap());
        assert_eq!(l.rank(), 2);
        assert!(l.roots().is_empty());
        assert_eq!(l.lines(), vec![DivisorClass(vec![0, 1])]);
    }

    #[test]
    fn excluded_degrees_are_rejected() {
        for s in ["8", "9", "0", "10"] {
            assert!(s.parse::<DegreeSpec>().is_err(), "{s}");
        }
        let msg = "9".parse::<DegreeSpec>().unwrap_err().to_string();
        assert!(msg.contains("torsion in Pic U"));
    }

    #[test]
    fn intersections() {
        let l = lattice(3);
        let e1 = DivisorClass::basis(7, 1);
        assert_eq!(l.intersect(&e1, &e1).unwrap(), -1);
        let line = DivisorClass(vec![1, -1, -1, 0, 0, 0, 0]);
        assert_eq!(l.intersect(&line, l.canonical()).unwrap(), -1);
        assert!(l.intersect(&DivisorClass(vec![1, 2]), &e1).is_err());
    }

    #[test]
    fn line_and_root_counts() {
        let lines: Vec<usize> = (1..=7).map(|d| lattice(d).lines().len()).collect();
        assert_eq!(lines, vec![240, 56, 27, 16, 10, 6, 3]);
        assert_eq!(lattice(6).roots().len(), 8);
        assert_eq!(lattice(3).roots().len(), 72);
    }

    #[test]
    fn degree_seven_lines() {
        let mut want = vec![
            DivisorClass(vec![0, 1, 0]),
            DivisorClass(vec![0, 0, 1]),
            DivisorClass(vec![1, -1, -1]),
        ];
        want.sort();
        assert_eq!(lattice(7).lines(), want);
    }

    #[test]
    fn lines_and_roots_satisfy_defining_equations() {
        for spec in DegreeSpec::all() {
            let l = build_picard_lattice(spec);
            let k = l.canonical().clone();
            for line in l.lines() {
                assert_eq!(l.intersect(&line, &line).unwrap(), -1);
                assert_eq!(l.intersect(&line, &k).unwrap(), -1);
            }
            for r in l.roots() {
                assert_eq!(l.intersect(&r, &r).unwrap(), -2);
                assert_eq!(l.intersect(&r, &k).unwrap(), 0);
            }
        }
    }

    #[test]
    fn quotient_presentation() {
        for spec in DegreeSpec::all() {
            let l = build_picard_lattice(spec);
            let q = l.quotient_mod_k().unwrap();
            assert_eq!(q.quotient_rank(), l.rank() - 1);
            assert!(q.kills_canonical());
            let snf = zcohomology::smith_normal_form(&q.projection);
            assert!(snf.invariant_factors().iter().all(|d| *d == BigInt::from(1)));
            assert_eq!(snf.rank(), l.rank() - 1);
            let id = q.projection.mul(&q.section).unwrap();
            assert_eq!(id, IntMatrix::identity(l.rank() - 1));
        }
    }

    #[test]
    fn delta_examples() {
        let l4 = lattice(4);
        let full: Vec<DivisorClass> = (0..6).map(|i| DivisorClass::basis(6, i)).collect();
        assert_eq!(l4.delta_invariant(&full).unwrap(), 1);
        let l3 = lattice(3);
        assert_eq!(l3.delta_invariant(&[l3.canonical().clone()]).unwrap(), 3);
        assert!(l3.delta_invariant(&[]).is_err());
        assert!(l3
            .delta_invariant(&[DivisorClass(vec![0, 1, -1, 0, 0, 0, 0])])
            .is_err());
    }

    #[test]
    fn delta_witness_achieves_delta() {
        let l = lattice(3);
        let basis = vec![l.canonical().clone(), DivisorClass(vec![1, 0, 0, 0, 0, 0, 0])];
        // K.K = 3, e0.K = -3 -> delta = 3
        let w = l.delta_witness(&basis).unwrap();
        assert_eq!(l.intersect(&w, l.canonical()).unwrap(), 3);
    }
}
