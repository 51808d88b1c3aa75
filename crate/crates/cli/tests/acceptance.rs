//! One line per acceptance criterion. Limits are fixed here.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dpbrauer::bounds::{brauer_uniform_bound, merel_prime_bound, parent_prime_power_bound, BoundConfig};
use dpbrauer::brauer_table::{
    compare_with_fixture, compute_table, expected_table, verify_lemma_on_samples, verify_lemma_properties,
    verify_prop_bounds, BrauerTable, FixtureComparison,
};
use dpbrauer::lattice::{build_picard_lattice, DegreeSpec};
use dpbrauer::subgroups::{enumerate_subgroup_classes, Tier};
use dpbrauer::weyl::{weyl_group, DEFAULT_BUDGET};
use dpbrauer::zcohomology::{cocycle_oracle_h1, h1, FiniteGroupTable, GModule, IntMatrix};
use num_bigint::BigUint;

const SMALL_DEGREES_LIMIT: Duration = Duration::from_secs(10);
const DEGREE_FOUR_LIMIT: Duration = Duration::from_secs(120);
const DEGREE_THREE_LIMIT: Duration = Duration::from_secs(3600);
const LATTICE_LIMIT: Duration = Duration::from_secs(5);
const LEMMA_SAMPLES: usize = 200;
const LEMMA_ORDER_CAP: usize = 5000;
const STRETCH_ENV: &str = "DPBRAUER_ACCEPT_STRETCH";

enum Status {
    Pass,
    Fail(String),
    Pending(String),
}

struct Ledger {
    failed: usize,
}

impl Ledger {
    fn record(&mut self, n: u32, what: &str, status: Status) {
        match status {
            Status::Pass => println!("criterion {n:>2} PASS  {what}"),
            Status::Pending(why) => println!("criterion {n:>2} PENDING  {what}: {why}"),
            Status::Fail(why) => {
                self.failed += 1;
                println!("criterion {n:>2} FAIL  {what}: {why}");
            }
        }
    }
}

fn d(x: u8) -> DegreeSpec {
    DegreeSpec::new(x).unwrap()
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dpbrauer")
}

fn run_cli(args: &[&str], cache: &Path) -> (i32, String) {
    let out = Command::new(bin())
        .args(args)
        .env("DPBRAUER_CACHE_DIR", cache)
        .output()
        .expect("run binary");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn table_status(degree: DegreeSpec, table: &BrauerTable, elapsed: Duration, limit: Duration) -> Status {
    match compare_with_fixture(degree, Some(table)) {
        FixtureComparison::Match if elapsed <= limit => Status::Pass,
        FixtureComparison::Match => Status::Fail(format!("took {elapsed:?}, limit {limit:?}")),
        other => Status::Fail(format!("{other:?}")),
    }
}

fn criterion_small_degrees(ledger: &mut Ledger) {
    let cache = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let mut problems = Vec::new();
    for deg in [7u8, 6, 5] {
        let (code, out) = run_cli(&["table", "--degree", &deg.to_string(), "--format", "json"], cache.path());
        let want = expected_table(d(deg)).unwrap().to_json() + "\n";
        if code != 0 || out != want {
            problems.push(format!("d={deg}: exit {code}, output {out:?}"));
        }
    }
    let elapsed = start.elapsed();
    let status = if !problems.is_empty() {
        Status::Fail(problems.join("; "))
    } else if elapsed > SMALL_DEGREES_LIMIT {
        Status::Fail(format!("took {elapsed:?}"))
    } else {
        Status::Pass
    };
    ledger.record(1, "degrees 7, 6, 5 reproduce the published rows", status);
}

fn main_tables(ledger: &mut Ledger) -> Vec<BrauerTable> {
    let mut tables = Vec::new();
    for deg in [7u8, 6, 5] {
        tables.push(compute_table(d(deg), Tier::Exhaustive).unwrap());
    }
    let start = Instant::now();
    let t4 = compute_table(d(4), Tier::Exhaustive).unwrap();
    ledger.record(
        2,
        "degree 4 reproduces all three rows",
        table_status(d(4), &t4, start.elapsed(), DEGREE_FOUR_LIMIT),
    );
    tables.push(t4);

    let start = Instant::now();
    match compute_table(d(3), Tier::Extended) {
        Ok(t3) => {
            ledger.record(
                3,
                "degree 3 (extended tier) reproduces all five rows",
                table_status(d(3), &t3, start.elapsed(), DEGREE_THREE_LIMIT),
            );
            tables.push(t3);
        }
        Err(e) => ledger.record(3, "degree 3", Status::Pending(format!("extended tier pending: {e}"))),
    }

    if std::env::var_os(STRETCH_ENV).is_some() {
        match compute_table(d(2), Tier::Stretch) {
            Ok(t2) => {
                let status = match compare_with_fixture(d(2), Some(&t2)) {
                    FixtureComparison::Match if t2.rows.len() == 13 && t2.max_bru_order() == 128 => Status::Pass,
                    other => Status::Fail(format!("{other:?}")),
                };
                ledger.record(4, "degree 2 (stretch tier) reproduces 13 rows", status);
                tables.push(t2);
            }
            Err(e) => ledger.record(4, "degree 2 (stretch tier)", Status::Fail(e.to_string())),
        }
    } else {
        ledger.record(
            4,
            "degree 2 (stretch tier)",
            Status::Pending(format!("not run; set {STRETCH_ENV} to enable")),
        );
    }
    tables
}

fn criterion_prop_bounds(ledger: &mut Ledger, tables: &[BrauerTable]) {
    let report = verify_prop_bounds(tables);
    let brx_from_three = tables
        .iter()
        .filter(|t| t.degree.degree() >= 3)
        .map(BrauerTable::max_brx_order)
        .max()
        .unwrap_or(1);
    let status = if report.all_hold() && brx_from_three <= 64 && report.checks[0].observed <= 256 {
        Status::Pass
    } else {
        Status::Fail(format!("{:?}, Br X max from degree 3: {brx_from_three}", report.checks))
    };
    ledger.record(5, "Br_1 U orders <= 256 and Br X orders <= 64", status);
}

fn criterion_lemma(ledger: &mut Ledger) {
    let mut problems = Vec::new();
    for deg in [7u8, 6, 5, 4] {
        let r = verify_lemma_properties(d(deg), Tier::Exhaustive).unwrap();
        if !r.all_hold() || r.records.is_empty() {
            problems.push(format!("d={deg}: {} failures", r.failures().len()));
        }
    }
    match verify_lemma_properties(d(3), Tier::Extended) {
        Ok(r) if r.all_hold() && r.records.len() == 350 => {}
        Ok(r) => problems.push(format!("d=3: {} failures of {}", r.failures().len(), r.records.len())),
        Err(e) => problems.push(format!("d=3: {e}")),
    }
    for deg in [2u8, 1] {
        match verify_lemma_on_samples(d(deg), LEMMA_SAMPLES, LEMMA_ORDER_CAP, 20_240_601) {
            Ok(r) => {
                let in_range = r.records.iter().all(|x| x.subgroup.order <= LEMMA_ORDER_CAP);
                if r.records.len() < LEMMA_SAMPLES || !r.all_hold() || !in_range {
                    problems.push(format!("d={deg}: {} samples, {} failures", r.records.len(), r.failures().len()));
                }
                if deg == 1 && r.records.iter().any(|x| x.delta != 1 || x.coker_exponent != 1) {
                    problems.push("d=1: a sample has non-trivial cokernel".into());
                }
            }
            Err(e) => problems.push(format!("d={deg}: {e}")),
        }
    }
    let status = if problems.is_empty() { Status::Pass } else { Status::Fail(problems.join("; ")) };
    ledger.record(6, "injectivity and cokernel exponent dividing delta", status);
}

fn criterion_oracle(ledger: &mut Ledger) {
    let mut checked = 0;
    let mut problems = Vec::new();
    for deg in [7u8, 6] {
        let lattice = build_picard_lattice(d(deg));
        let q = lattice.quotient_mod_k().unwrap();
        let group = weyl_group(&lattice, DEFAULT_BUDGET).unwrap();
        for c in enumerate_subgroup_classes(&group, Tier::Exhaustive).unwrap() {
            let elements: Vec<IntMatrix> = c.elements.iter().map(|&e| group.matrix(e).to_int_matrix()).collect();
            let gens: Vec<IntMatrix> = c.generators.iter().map(|&e| group.matrix(e).to_int_matrix()).collect();
            let table = FiniteGroupTable::from_matrices(&elements).unwrap();
            let induced = |ms: &[IntMatrix]| -> Vec<IntMatrix> { ms.iter().map(|g| q.induced_action(g).unwrap()).collect() };
            let fast_x = h1(&GModule::new(lattice.rank(), gens.clone()).unwrap(), c.order as u64).unwrap().structure;
            let fast_u = h1(&GModule::new(q.quotient_rank(), induced(&gens)).unwrap(), c.order as u64).unwrap().structure;
            let slow_x = cocycle_oracle_h1(&table, &elements).unwrap();
            let slow_u = cocycle_oracle_h1(&table, &induced(&elements)).unwrap();
            if fast_x != slow_x || fast_u != slow_u {
                problems.push(format!("d={deg} order {}", c.order));
            }
            checked += 2;
        }
    }
    // Cyclic and dihedral realizations on Z^2 and permutation modules.
    let rot = |k: usize| -> IntMatrix {
        match k {
            3 => IntMatrix::from_rows(&[vec![0, -1], vec![1, -1]]),
            4 => IntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]),
            _ => IntMatrix::from_rows(&[vec![1, -1], vec![1, 0]]),
        }
    };
    let flip = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
    let mut corpus: Vec<(Vec<IntMatrix>, usize)> = Vec::new();
    for k in [3, 4, 6] {
        corpus.push((vec![rot(k)], 2));
        corpus.push((vec![rot(k), flip.clone()], 2));
        corpus.push((vec![rot(k), IntMatrix::scalar(2, -1)], 2));
    }
    for n in 2..=4usize {
        let cyc: Vec<i64> = (0..n * n).map(|i| i64::from((i / n + 1) % n == i % n)).collect();
        let c = IntMatrix::from_i64(n, n, &cyc);
        let mut tr: Vec<i64> = (0..n * n).map(|i| i64::from(i / n == i % n)).collect();
        tr[0] = 0;
        tr[n + 1] = 0;
        tr[1] = 1;
        tr[n] = 1;
        let t = IntMatrix::from_i64(n, n, &tr);
        corpus.push((vec![c.clone()], n));
        corpus.push((vec![IntMatrix::scalar(n, -1).mul(&c).unwrap()], n));
        corpus.push((vec![c.clone(), t.clone()], n));
        corpus.push((vec![c.clone(), IntMatrix::scalar(n, -1)], n));
        if n < 4 {
            corpus.push((vec![c, IntMatrix::scalar(n, -1).mul(&t).unwrap()], n));
        }
    }
    for k in [3, 4, 6] {
        corpus.push((vec![rot(k), IntMatrix::scalar(2, -1).mul(&flip).unwrap()], 2));
    }
    corpus.push((vec![IntMatrix::identity(2)], 2));
    corpus.push((vec![IntMatrix::from_rows(&[vec![-1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])], 3));
    corpus.push((vec![IntMatrix::scalar(1, -1)], 1));
    corpus.push((vec![IntMatrix::scalar(3, -1)], 3));
    corpus.push((vec![IntMatrix::from_rows(&[vec![-1, 1], vec![0, 1]])], 2));
    for (gens, rank) in &corpus {
        let mut elements = vec![IntMatrix::identity(*rank)];
        let mut i = 0;
        while i < elements.len() {
            for g in gens {
                let y = elements[i].mul(g).unwrap();
                if !elements.contains(&y) {
                    elements.push(y);
                }
            }
            i += 1;
        }
        let table = FiniteGroupTable::from_matrices(&elements).unwrap();
        let fast = h1(&GModule::new(*rank, gens.clone()).unwrap(), elements.len() as u64).unwrap().structure;
        if fast != cocycle_oracle_h1(&table, &elements).unwrap() {
            problems.push(format!("corpus group of order {}", elements.len()));
        }
    }
    let status = if !problems.is_empty() {
        Status::Fail(problems.join("; "))
    } else if corpus.len() < 30 || checked != 24 {
        Status::Fail(format!("only {} corpus cases, {checked} Weyl cases", corpus.len()))
    } else {
        Status::Pass
    };
    ledger.record(7, "h1 agrees with the cocycle oracle", status);
}

/// Exhaustive search over `|coefficient| <= bound` for classes with
/// `D.D = -1` and `D.K = -1`.
fn searched_lines(rank: usize, bound: i64) -> Vec<Vec<i64>> {
    fn go(b: &mut Vec<i64>, n: usize, bound: i64, sum: i64, sq: i64, out: &mut Vec<Vec<i64>>, a: i64) {
        let left = (n - b.len()) as i64;
        if left == 0 {
            if sum == 0 && sq == 0 {
                let mut v = vec![a];
                v.extend_from_slice(b);
                out.push(v);
            }
            return;
        }
        if sq < 0 || sum * sum > left * sq {
            return;
        }
        for x in -bound..=bound {
            b.push(x);
            go(b, n, bound, sum - x, sq - x * x, out, a);
            b.pop();
        }
    }
    let mut out = Vec::new();
    for a in -bound..=bound {
        // -3a - sum b = -1, a^2 - sum b^2 = -1
        go(&mut Vec::new(), rank - 1, bound, 1 - 3 * a, a * a + 1, &mut out, a);
    }
    out.sort();
    out
}

fn criterion_lines(ledger: &mut Ledger) {
    let start = Instant::now();
    let counts = [240usize, 56, 27, 16, 10, 6, 3];
    let mut problems = Vec::new();
    for deg in 1..=7u8 {
        let l = build_picard_lattice(d(deg));
        let bound = if deg == 1 { 12 } else { 10 };
        let orbit: Vec<Vec<i64>> = l.lines().into_iter().map(|c| c.0).collect();
        let searched = searched_lines(l.rank(), bound);
        let wider = searched_lines(l.rank(), bound + 2);
        if orbit.len() != counts[deg as usize - 1] || orbit != searched || searched != wider {
            problems.push(format!("d={deg}: orbit {}, search {}, wider {}", orbit.len(), searched.len(), wider.len()));
        }
    }
    let elapsed = start.elapsed();
    let status = if !problems.is_empty() {
        Status::Fail(problems.join("; "))
    } else if elapsed > LATTICE_LIMIT {
        Status::Fail(format!("took {elapsed:?}"))
    } else {
        Status::Pass
    };
    ledger.record(8, "line counts 240, 56, 27, 16, 10, 6, 3 and search agreement", status);
}

fn criterion_bounds(ledger: &mut Ledger) {
    let cfg = BoundConfig::default();
    let mut problems = Vec::new();
    if merel_prime_bound(2).unwrap() != BigUint::from(4096u32) {
        problems.push("merel(2)".to_string());
    }
    if parent_prime_power_bound(1, 5, &cfg).unwrap().value != BigUint::from(8320u32) {
        problems.push("parent(1, 5)".to_string());
    }
    let small_primes: Vec<u64> = (2..200u64).filter(|&n| (2..n).all(|k| n % k != 0)).collect();
    for m in 1..=3u64 {
        let b = brauer_uniform_bound(m, &cfg).unwrap();
        // B(240m) = 65 (3^{240m} - 1)(480m)^6, computed afresh.
        let limit = BigUint::from(65u32)
            * (BigUint::from(3u32).pow(240 * m as u32) - 1u32)
            * BigUint::from(480 * m).pow(6);
        if b.extension_degree != 240 * m || b.torsion.prime_limit != limit || b.leading_factor() != 1 << 14 {
            problems.push(format!("m={m}: intermediate values"));
        }
        for &p in &small_primes {
            let mut e = 0u32;
            let mut acc = BigUint::from(p);
            while acc <= limit {
                e += 1;
                acc *= p;
            }
            let want = 2 * e + if p == 2 { 14 } else { 0 };
            if b.exponent_of(p) != want {
                problems.push(format!("m={m}: exponent of {p}"));
            }
        }
        // Exact integer identity under a finite prime support.
        let restricted = BoundConfig::new(None, None, Some(small_primes.clone())).unwrap();
        let rb = brauer_uniform_bound(m, &restricted).unwrap();
        let mut n = BigUint::from(1u32);
        for &p in &small_primes {
            let mut pe = BigUint::from(1u32);
            while &pe * p <= limit {
                pe *= p;
            }
            n *= pe;
        }
        if rb.value().unwrap() != BigUint::from(16384u32) * &n * &n {
            problems.push(format!("m={m}: 2^14 N^2 identity"));
        }
    }
    let status = if problems.is_empty() { Status::Pass } else { Status::Fail(problems.join("; ")) };
    ledger.record(9, "Merel and Parent values, 2^14 N(240m)^2 identity", status);
}

fn criterion_determinism(ledger: &mut Ledger) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, oa) = run_cli(&["table", "--degree", "4", "--format", "json"], a.path());
    let (cb, ob) = run_cli(&["--jobs", "1", "table", "--degree", "4", "--format", "json"], b.path());
    let (cw, ow) = run_cli(&["table", "--degree", "4", "--format", "json"], a.path());
    let status = if ca == 0 && cb == 0 && cw == 0 && oa == ob && oa == ow && !oa.is_empty() {
        Status::Pass
    } else {
        Status::Fail(format!("exit codes {ca}, {cb}, {cw}; outputs equal: {}", oa == ob))
    };
    ledger.record(10, "cold-cache table runs are byte-identical", status);
}

#[test]
fn acceptance() {
    let mut ledger = Ledger { failed: 0 };
    criterion_small_degrees(&mut ledger);
    let tables = main_tables(&mut ledger);
    criterion_prop_bounds(&mut ledger, &tables);
    criterion_lemma(&mut ledger);
    criterion_oracle(&mut ledger);
    criterion_lines(&mut ledger);
    criterion_bounds(&mut ledger);
    criterion_determinism(&mut ledger);
    assert_eq!(ledger.failed, 0, "acceptance criteria failed");
}
