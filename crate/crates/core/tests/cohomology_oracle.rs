//! `h1` against the cocycle computation, on Weyl subgroups and on a corpus of
//! small matrix groups.

use std::collections::{BTreeSet, VecDeque};

use dpbrauer::lattice::{build_picard_lattice, DegreeSpec};
use dpbrauer::subgroups::{enumerate_subgroup_classes, Tier};
use dpbrauer::weyl::{weyl_group, DEFAULT_BUDGET};
use dpbrauer::zcohomology::{cocycle_oracle_h1, h1, AbelianGroupStructure, FiniteGroupTable, GModule, IntMatrix};

/// All products of `gens`, identity first.
fn close(gens: &[IntMatrix], rank: usize) -> Vec<IntMatrix> {
    let id = IntMatrix::identity(rank);
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut out = vec![id.clone()];
    seen.insert(id.to_i64().unwrap());
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g).unwrap();
            if seen.insert(y.to_i64().unwrap()) {
                out.push(y.clone());
                queue.push_back(y);
            }
        }
        assert!(out.len() <= 24, "corpus group too large");
    }
    out
}

fn both(gens: &[IntMatrix], rank: usize) -> (AbelianGroupStructure, AbelianGroupStructure) {
    let elements = close(gens, rank);
    let table = FiniteGroupTable::from_matrices(&elements).unwrap();
    let oracle = cocycle_oracle_h1(&table, &elements).unwrap();
    let module = GModule::new(rank, gens.to_vec()).unwrap();
    let fast = h1(&module, elements.len() as u64).unwrap().structure;
    (fast, oracle)
}

fn m(rows: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn perm(p: &[usize]) -> IntMatrix {
    let n = p.len();
    let mut data = vec![0i64; n * n];
    for (j, &i) in p.iter().enumerate() {
        data[i * n + j] = 1;
    }
    IntMatrix::from_i64(n, n, &data)
}

fn neg(a: &IntMatrix) -> IntMatrix {
    IntMatrix::scalar(a.rows(), -1).mul(a).unwrap()
}

fn block(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.rows() + b.rows();
    let mut data = vec![0i64; n * n];
    let (av, bv) = (a.to_i64().unwrap(), b.to_i64().unwrap());
    for i in 0..a.rows() {
        for j in 0..a.rows() {
            data[i * n + j] = av[i * a.rows() + j];
        }
    }
    for i in 0..b.rows() {
        for j in 0..b.rows() {
            data[(a.rows() + i) * n + a.rows() + j] = bv[i * b.rows() + j];
        }
    }
    IntMatrix::from_i64(n, n, &data)
}

/// Named generator sets; the expected value comes from the oracle only.
fn corpus() -> Vec<(&'static str, Vec<IntMatrix>, usize)> {
    let rot3 = m(&[&[0, -1], &[1, -1]]);
    let rot4 = m(&[&[0, -1], &[1, 0]]);
    let rot6 = m(&[&[1, -1], &[1, 0]]);
    let flip = m(&[&[0, 1], &[1, 0]]);
    let a2_flip = m(&[&[-1, 1], &[0, 1]]);
    let twist = m(&[&[-1, 1], &[0, 1]]);
    let c3 = perm(&[1, 2, 0]);
    let s3t = perm(&[1, 0, 2]);
    let c4 = perm(&[1, 2, 3, 0]);
    let s4t = perm(&[1, 0, 2, 3]);
    let a4a = perm(&[1, 2, 0, 3]);
    let a4b = perm(&[1, 0, 3, 2]);
    let v4a = perm(&[1, 0, 3, 2]);
    let v4b = perm(&[2, 3, 0, 1]);
    let minus1 = m(&[&[-1]]);
    vec![
        ("trivial Z", vec![], 1),
        ("trivial Z^3", vec![IntMatrix::identity(3)], 3),
        ("C2 sign", vec![minus1.clone()], 1),
        ("C2 swap", vec![flip.clone()], 2),
        ("C2 -swap", vec![neg(&flip)], 2),
        ("C2 -1 on Z^2", vec![IntMatrix::scalar(2, -1)], 2),
        ("C2 triangular", vec![twist.clone()], 2),
        ("C2 sign + trivial", vec![block(&minus1, &IntMatrix::identity(1))], 2),
        ("C3 rotation", vec![rot3.clone()], 2),
        ("C3 regular", vec![c3.clone()], 3),
        ("C3 -regular", vec![neg(&c3)], 3),
        ("C4 rotation", vec![rot4.clone()], 2),
        ("C4 regular", vec![c4.clone()], 4),
        ("C4 -regular", vec![neg(&c4)], 4),
        ("C6 rotation", vec![rot6.clone()], 2),
        ("C6 -regular C3", vec![neg(&c3), c3.clone()], 3),
        ("S3 permutation", vec![c3.clone(), s3t.clone()], 3),
        ("S3 sign twisted", vec![c3.clone(), neg(&s3t)], 3),
        ("S3 on A2", vec![rot3.clone(), a2_flip.clone()], 2),
        ("D4 on Z^2", vec![rot4.clone(), flip.clone()], 2),
        ("D6 on Z^2", vec![rot6.clone(), flip.clone()], 2),
        ("C2xC2 signs", vec![m(&[&[-1, 0], &[0, 1]]), m(&[&[1, 0], &[0, -1]])], 2),
        ("C2xC2 regular", vec![v4a.clone(), v4b.clone()], 4),
        ("C2xC2 -regular", vec![neg(&v4a), v4b.clone()], 4),
        ("C2xC2 swap and -1", vec![flip.clone(), IntMatrix::scalar(2, -1)], 2),
        ("A4 permutation", vec![a4a.clone(), a4b.clone()], 4),
        ("S4 permutation", vec![c4.clone(), s4t.clone()], 4),
        ("S4 sign twisted", vec![neg(&c4), neg(&s4t)], 4),
        ("C2 on Z^2 + sign", vec![block(&flip, &minus1)], 3),
        ("C3 rotation + trivial", vec![block(&rot3, &IntMatrix::identity(1))], 3),
        ("C4 rotation + sign", vec![block(&rot4, &minus1)], 3),
        ("C6 on A2 + sign", vec![block(&rot6, &minus1)], 3),
        ("Q8 on Z^4", vec![
            m(&[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]]),
            m(&[&[0, 0, -1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, -1, 0, 0]]),
        ], 4),
    ]
}

#[test]
fn small_matrix_group_corpus() {
    let cases = corpus();
    assert!(cases.len() >= 30);
    let mut nontrivial = 0;
    for (name, gens, rank) in cases {
        let (fast, oracle) = both(&gens, rank);
        assert_eq!(fast, oracle, "{name}");
        if !oracle.is_trivial() {
            nontrivial += 1;
        }
    }
    assert!(nontrivial >= 10);
}

#[test]
fn known_small_values() {
    let c = corpus();
    let get = |n: &str| {
        let (_, g, r) = c.iter().find(|(name, _, _)| *name == n).unwrap();
        both(g, *r).1
    };
    assert_eq!(get("C2 sign").invariant_factors(), &[2]);
    assert!(get("C2 swap").is_trivial());
    assert!(get("C3 regular").is_trivial());
    assert!(get("trivial Z").is_trivial());
}

#[test]
fn weyl_subgroups_of_degrees_six_and_seven() {
    let mut cases = 0;
    for d in [7u8, 6] {
        let lattice = build_picard_lattice(DegreeSpec::new(d).unwrap());
        let quotient = lattice.quotient_mod_k().unwrap();
        let group = weyl_group(&lattice, DEFAULT_BUDGET).unwrap();
        for class in enumerate_subgroup_classes(&group, Tier::Exhaustive).unwrap() {
            let elements: Vec<IntMatrix> =
                class.elements.iter().map(|&e| group.matrix(e).to_int_matrix()).collect();
            let gens: Vec<IntMatrix> =
                class.generators.iter().map(|&e| group.matrix(e).to_int_matrix()).collect();
            let table = FiniteGroupTable::from_matrices(&elements).unwrap();
            let order = class.order as u64;

            let pic_x = GModule::new(lattice.rank(), gens.clone()).unwrap();
            let oracle_x = cocycle_oracle_h1(&table, &elements).unwrap();
            assert_eq!(h1(&pic_x, order).unwrap().structure, oracle_x);

            let induced = |ms: &[IntMatrix]| -> Vec<IntMatrix> {
                ms.iter().map(|g| quotient.induced_action(g).unwrap()).collect()
            };
            let pic_u = GModule::new(quotient.quotient_rank(), induced(&gens)).unwrap();
            let oracle_u = cocycle_oracle_h1(&table, &induced(&elements)).unwrap();
            assert_eq!(h1(&pic_u, order).unwrap().structure, oracle_u);
            cases += 1;
        }
    }
    assert_eq!(cases, 2 + 10);
}
