//! Algebraic Brauer groups `H^1(G, Pic X)` and `H^1(G, Pic U)` over every
//! conjugacy class of subgroups `G` of the Weyl group, aggregated into the
//! table of possible pairs, and checks of the injectivity/cokernel bounds.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_picard_lattice, classes_from_columns, DegreeSpec, DivisorClass, QuotientPresentation};
use crate::subgroups::{enumerate_subgroup_classes, sample_subgroups, SubgroupClass, Tier};
use crate::weyl::{weyl_group, weyl_group_order, MatrixGroup, DEFAULT_BUDGET};
use crate::zcohomology::{fixed_sublattice, h1_induced_map, AbelianGroupStructure, GModule, IntMatrix};

/// Group structures in table order: by order, then invariant factors.
pub fn structure_key(g: &AbelianGroupStructure) -> (u64, Vec<u64>) {
    (g.order(), g.invariant_factors().to_vec())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub degree: DegreeSpec,
    pub brx: AbelianGroupStructure,
    pub bru_possibilities: Vec<AbelianGroupStructure>,
}

impl TableRow {
    pub fn new(degree: DegreeSpec, brx: AbelianGroupStructure, mut bru: Vec<AbelianGroupStructure>) -> Result<Self> {
        bru.sort_by_key(structure_key);
        bru.dedup();
        if bru.is_empty() {
            return Err(Error::InvalidArgument(format!("row {brx} has no possibilities")));
        }
        if let Some(bad) = bru.iter().find(|u| u.order() % brx.order() != 0) {
            return Err(Error::InvalidArgument(format!(
                "order of {bad} is not a multiple of the order of {brx}"
            )));
        }
        Ok(Self {
            degree,
            brx,
            bru_possibilities: bru,
        })
    }
}

/// A subgroup class realizing a table entry: its order and the generators
/// of its canonical representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realizer {
    pub order: usize,
    pub generators: Vec<u32>,
}

impl Realizer {
    fn of(class: &SubgroupClass) -> Self {
        Self {
            order: class.order,
            generators: class.generators.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrauerTable {
    pub degree: DegreeSpec,
    pub rows: Vec<TableRow>,
    /// `provenance[i][j]` lists the classes giving `rows[i].bru_possibilities[j]`.
    pub provenance: Vec<Vec<Vec<Realizer>>>,
}

impl BrauerTable {
    pub fn row(&self, brx: &AbelianGroupStructure) -> Option<&TableRow> {
        self.rows.iter().find(|r| &r.brx == brx)
    }

    pub fn max_bru_order(&self) -> u64 {
        self.rows
            .iter()
            .flat_map(|r| r.bru_possibilities.iter().map(AbelianGroupStructure::order))
            .max()
            .unwrap_or(1)
    }

    pub fn max_brx_order(&self) -> u64 {
        self.rows.iter().map(|r| r.brx.order()).max().unwrap_or(1)
    }

    /// Row equality, ignoring provenance.
    pub fn same_rows(&self, other: &BrauerTable) -> bool {
        self.degree == other.degree
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.brx == b.brx && a.bru_possibilities == b.bru_possibilities
            })
    }

    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.brx.to_string().chars().count())
            .max()
            .unwrap_or(1)
            .max("Br X".len());
        let mut out = String::new();
        let _ = writeln!(out, "d = {}", self.degree);
        let _ = writeln!(out, "{:<width$}  Br_1 U", "Br X");
        for row in &self.rows {
            let bru: Vec<String> = row.bru_possibilities.iter().map(ToString::to_string).collect();
            let brx = row.brx.to_string();
            let pad = width - brx.chars().count();
            let _ = writeln!(out, "{brx}{}  {}", " ".repeat(pad), bru.join("  "));
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct JsonRow<'a> {
            brx: &'a AbelianGroupStructure,
            bru: &'a [AbelianGroupStructure],
        }
        let rows: Vec<JsonRow> = self
            .rows
            .iter()
            .map(|r| JsonRow {
                brx: &r.brx,
                bru: &r.bru_possibilities,
            })
            .collect();
        serde_json::to_string(&rows).expect("serializable")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,brx,bru\n");
        for row in &self.rows {
            for u in &row.bru_possibilities {
                let _ = writeln!(out, "{},{},{}", self.degree, row.brx, u);
            }
        }
        out
    }

    fn from_entries(degree: DegreeSpec, entries: Vec<(AbelianGroupStructure, AbelianGroupStructure, Realizer)>) -> Result<Self> {
        let mut brx_values: Vec<AbelianGroupStructure> = entries.iter().map(|e| e.0.clone()).collect();
        brx_values.sort_by_key(structure_key);
        brx_values.dedup();
        let mut rows = Vec::new();
        let mut provenance = Vec::new();
        for brx in brx_values {
            let bru: Vec<AbelianGroupStructure> =
                entries.iter().filter(|e| e.0 == brx).map(|e| e.1.clone()).collect();
            let row = TableRow::new(degree, brx.clone(), bru)?;
            let realizers = row
                .bru_possibilities
                .iter()
                .map(|u| {
                    entries
                        .iter()
                        .filter(|e| e.0 == brx && &e.1 == u)
                        .map(|e| e.2.clone())
                        .collect()
                })
                .collect();
            rows.push(row);
            provenance.push(realizers);
        }
        Ok(Self {
            degree,
            rows,
            provenance,
        })
    }
}

/// Everything computed for one Galois action on `Pic X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCohomology {
    pub brx: AbelianGroupStructure,
    pub bru: AbelianGroupStructure,
    pub injective: bool,
    pub cokernel: AbelianGroupStructure,
    pub delta: u64,
    /// A fixed class `D` with `D.K = delta`.
    pub delta_witness: DivisorClass,
    /// `s(i(1)) = -K.D` for `s = (. D)` and `i(1) = -K`.
    pub section_value: i64,
}

impl ActionCohomology {
    pub fn coker_exponent(&self) -> u64 {
        self.cokernel.exponent()
    }

    pub fn exponent_divides_delta(&self) -> bool {
        self.delta.is_multiple_of(self.coker_exponent())
    }

    pub fn section_identity_holds(&self) -> bool {
        self.section_value.unsigned_abs() == self.delta
    }

    pub fn orders_multiply(&self) -> bool {
        self.bru.order() == self.brx.order() * self.cokernel.order()
    }
}

/// Cohomology of the group of order `order` generated by `generators`
/// (matrices on `Pic X`), together with the data of the exact sequence
/// `0 -> Z -> Pic X -> Pic U -> 0`.
pub fn analyse_action(
    quotient: &QuotientPresentation,
    generators: &[IntMatrix],
    order: u64,
) -> Result<ActionCohomology> {
    let lattice = &quotient.ambient;
    let r = lattice.rank();
    let pic_x = GModule::new(r, generators.to_vec())?;
    let induced = generators
        .iter()
        .map(|g| quotient.induced_action(g))
        .collect::<Result<Vec<_>>>()?;
    let pic_u = GModule::new(quotient.quotient_rank(), induced)?;
    let map = h1_induced_map(&pic_x, &pic_u, &quotient.projection, order)?;
    let cokernel = map.cokernel()?;
    let injective = map.is_injective()?;

    let fixed = classes_from_columns(&fixed_sublattice(&pic_x));
    let delta = lattice.delta_invariant(&fixed)?;
    let witness = lattice.delta_witness(&fixed)?;
    for g in generators {
        let v: Vec<num_bigint::BigInt> = witness.coords().iter().map(|&c| c.into()).collect();
        let image = g.mul_vec(&v)?;
        if image != v {
            return Err(Error::NotEquivariant);
        }
    }
    let section_value = lattice.intersect(&lattice.canonical().neg(), &witness)?;
    Ok(ActionCohomology {
        brx: map.domain.structure.clone(),
        bru: map.codomain.structure.clone(),
        injective,
        cokernel,
        delta,
        delta_witness: witness,
        section_value,
    })
}

fn class_matrices(group: &MatrixGroup, class: &SubgroupClass) -> Vec<IntMatrix> {
    class.generators.iter().map(|&g| group.matrix(g).to_int_matrix()).collect()
}

/// `(H^1(H, Pic X), H^1(H, Pic U))` for a subgroup of `group`.
pub fn row_for_subgroup(
    group: &MatrixGroup,
    class: &SubgroupClass,
) -> Result<(AbelianGroupStructure, AbelianGroupStructure)> {
    let quotient = group.lattice().quotient_mod_k()?;
    let a = analyse_action(&quotient, &class_matrices(group, class), class.order as u64)?;
    Ok((a.brx, a.bru))
}

/// Analyse every class in parallel; results are in class order.
pub fn analyse_classes(group: &MatrixGroup, classes: &[SubgroupClass]) -> Result<Vec<ActionCohomology>> {
    let quotient = group.lattice().quotient_mod_k()?;
    classes
        .par_iter()
        .map(|c| analyse_action(&quotient, &class_matrices(group, c), c.order as u64))
        .collect()
}

/// Refuses degrees whose Weyl group is beyond `tier` before building it.
pub fn check_tier(degree: DegreeSpec, tier: Tier) -> Result<()> {
    tier.check(weyl_group_order(degree))
}

pub fn table_from_analyses(
    degree: DegreeSpec,
    classes: &[SubgroupClass],
    analyses: &[ActionCohomology],
) -> Result<BrauerTable> {
    if classes.len() != analyses.len() {
        return Err(Error::DimensionMismatch {
            expected: classes.len(),
            got: analyses.len(),
        });
    }
    let entries = classes
        .iter()
        .zip(analyses)
        .map(|(c, a)| (a.brx.clone(), a.bru.clone(), Realizer::of(c)))
        .collect();
    BrauerTable::from_entries(degree, entries)
}

/// The table of possible `(Br X / Br k, Br_1 U / Br k)` for one degree.
pub fn compute_table(degree: DegreeSpec, tier: Tier) -> Result<BrauerTable> {
    check_tier(degree, tier)?;
    let group = weyl_group(&build_picard_lattice(degree), DEFAULT_BUDGET)?;
    let classes = enumerate_subgroup_classes(&group, tier)?;
    let analyses = analyse_classes(&group, &classes)?;
    table_from_analyses(degree, &classes, &analyses)
}

fn parse_structures(s: &str) -> Vec<AbelianGroupStructure> {
    s.split_whitespace()
        .map(|t| t.parse().expect("fixture entry"))
        .collect()
}

const FIXTURE: &[(u8, &[(&str, &str)])] = &[
    (7, &[("1", "1")]),
    (6, &[("1", "1 2 3 6")]),
    (5, &[("1", "1 5")]),
    (
        4,
        &[
            ("1", "1 2 2^2 2^3 2^4 4 2·4"),
            ("2", "2 2^2 2^3 2^4 2·4"),
            ("2^2", "2^3 2^4 2^2·4"),
        ],
    ),
    (
        3,
        &[
            ("1", "1 3 3^2"),
            ("2", "2 6"),
            ("2^2", "2^2 2·6"),
            ("3", "3 3^2"),
            ("3^2", "3^3"),
        ],
    ),
    (
        2,
        &[
            ("1", "1 2"),
            ("2", "2 2^2 2·4 4"),
            ("2^2", "2^2 2^3 2·4 2^2·4 4^2"),
            ("2^3", "2^3 2^4 2^2·4"),
            ("2^4", "2^4 2^5 2^3·4"),
            ("2^5", "2^6"),
            ("2^6", "2^7"),
            ("3", "3 6"),
            ("3^2", "3^2 3·6"),
            ("2·4", "2·4 2^2·4 4^2"),
            ("2^2·4", "2^2·4 2^3·4"),
            ("4", "2·4 4"),
            ("4^2", "2·4^2"),
        ],
    ),
];

/// The published table of possible Brauer groups, for degrees 2 to 7.
pub fn expected_table(degree: DegreeSpec) -> Option<BrauerTable> {
    let DegreeSpec::Degree(d) = degree else {
        return None;
    };
    let (_, rows) = FIXTURE.iter().find(|(fd, _)| *fd == d)?;
    let mut rows: Vec<TableRow> = rows
        .iter()
        .map(|(brx, bru)| {
            TableRow::new(degree, brx.parse().expect("fixture entry"), parse_structures(bru))
                .expect("fixture rows are consistent")
        })
        .collect();
    rows.sort_by_key(|r| structure_key(&r.brx));
    let provenance = vec![Vec::new(); rows.len()];
    Some(BrauerTable {
        degree,
        rows,
        provenance,
    })
}

pub fn expected_tables() -> Vec<BrauerTable> {
    (2..=7)
        .rev()
        .filter_map(|d| expected_table(DegreeSpec::Degree(d)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FixtureComparison {
    Match,
    Mismatch {
        missing: Vec<(AbelianGroupStructure, AbelianGroupStructure)>,
        unexpected: Vec<(AbelianGroupStructure, AbelianGroupStructure)>,
    },
    NotComputed,
    NoFixture,
}

impl FixtureComparison {
    pub fn is_failure(&self) -> bool {
        matches!(self, FixtureComparison::Mismatch { .. })
    }
}

fn pairs(table: &BrauerTable) -> Vec<(AbelianGroupStructure, AbelianGroupStructure)> {
    table
        .rows
        .iter()
        .flat_map(|r| r.bru_possibilities.iter().map(move |u| (r.brx.clone(), u.clone())))
        .collect()
}

pub fn compare_with_fixture(degree: DegreeSpec, computed: Option<&BrauerTable>) -> FixtureComparison {
    let Some(expected) = expected_table(degree) else {
        return FixtureComparison::NoFixture;
    };
    let Some(computed) = computed else {
        return FixtureComparison::NotComputed;
    };
    let want = pairs(&expected);
    let got = pairs(computed);
    let missing: Vec<_> = want.iter().filter(|p| !got.contains(p)).cloned().collect();
    let unexpected: Vec<_> = got.iter().filter(|p| !want.contains(p)).cloned().collect();
    if missing.is_empty() && unexpected.is_empty() {
        FixtureComparison::Match
    } else {
        FixtureComparison::Mismatch { missing, unexpected }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaRecord {
    /// Canonical generators for enumerated classes, sample position otherwise.
    pub subgroup: Realizer,
    pub injective: bool,
    pub coker_exponent: u64,
    pub delta: u64,
    pub divides: bool,
    pub section_identity: bool,
    pub orders_multiply: bool,
}

impl LemmaRecord {
    fn new(subgroup: Realizer, a: &ActionCohomology) -> Self {
        Self {
            subgroup,
            injective: a.injective,
            coker_exponent: a.coker_exponent(),
            delta: a.delta,
            divides: a.exponent_divides_delta(),
            section_identity: a.section_identity_holds(),
            orders_multiply: a.orders_multiply(),
        }
    }

    pub fn holds(&self) -> bool {
        self.injective && self.divides && self.section_identity && self.orders_multiply
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LemmaSource {
    Exhaustive { tier: Tier },
    Sampled { seed: u64, requested: usize, order_cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub degree: DegreeSpec,
    pub source: LemmaSource,
    pub records: Vec<LemmaRecord>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.records.iter().all(LemmaRecord::holds)
    }

    pub fn failures(&self) -> Vec<&LemmaRecord> {
        self.records.iter().filter(|r| !r.holds()).collect()
    }
}

pub fn lemma_report_from_analyses(
    degree: DegreeSpec,
    tier: Tier,
    classes: &[SubgroupClass],
    analyses: &[ActionCohomology],
) -> LemmaReport {
    LemmaReport {
        degree,
        source: LemmaSource::Exhaustive { tier },
        records: classes
            .iter()
            .zip(analyses)
            .map(|(c, a)| LemmaRecord::new(Realizer::of(c), a))
            .collect(),
    }
}

/// Lemma checks over every subgroup class of the Weyl group.
pub fn verify_lemma_properties(degree: DegreeSpec, tier: Tier) -> Result<LemmaReport> {
    check_tier(degree, tier)?;
    let group = weyl_group(&build_picard_lattice(degree), DEFAULT_BUDGET)?;
    let classes = enumerate_subgroup_classes(&group, tier)?;
    let analyses = analyse_classes(&group, &classes)?;
    Ok(lemma_report_from_analyses(degree, tier, &classes, &analyses))
}

/// Lemma checks over seeded random subgroups, for degrees whose Weyl group is
/// too large to enumerate.
pub fn verify_lemma_on_samples(
    degree: DegreeSpec,
    count: usize,
    order_cap: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let samples = sample_subgroups(degree, 1..=3, order_cap, count, seed)?;
    let quotient = build_picard_lattice(degree).quotient_mod_k()?;
    let records = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let gens: Vec<IntMatrix> = s.generators.iter().map(|g| g.to_int_matrix()).collect();
            let a = analyse_action(&quotient, &gens, s.order as u64)?;
            let subgroup = Realizer {
                order: s.order,
                generators: vec![i as u32],
            };
            Ok(LemmaRecord::new(subgroup, &a))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaReport {
        degree,
        source: LemmaSource::Sampled {
            seed,
            requested: count,
            order_cap,
        },
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub observed: u64,
    pub limit: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropBoundsReport {
    pub degrees: Vec<DegreeSpec>,
    pub checks: Vec<ClaimCheck>,
}

impl PropBoundsReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

pub const BRU_ORDER_LIMIT: u64 = 256;
pub const BRX_ORDER_LIMIT: u64 = 64;

/// Order bounds over the computed tables: every `Br_1 U` has order at most
/// 256, and every `Br X` from degree 2 on has order at most 64.
pub fn verify_prop_bounds(tables: &[BrauerTable]) -> PropBoundsReport {
    let max_bru = tables.iter().map(BrauerTable::max_bru_order).max().unwrap_or(1);
    let max_brx = tables
        .iter()
        .filter(|t| t.degree.degree() >= 2)
        .map(BrauerTable::max_brx_order)
        .max()
        .unwrap_or(1);
    PropBoundsReport {
        degrees: tables.iter().map(|t| t.degree).collect(),
        checks: vec![
            ClaimCheck {
                claim: "order of Br_1 U / Br k".into(),
                observed: max_bru,
                limit: BRU_ORDER_LIMIT,
                holds: max_bru <= BRU_ORDER_LIMIT,
            },
            ClaimCheck {
                claim: "order of Br X / Br k".into(),
                observed: max_brx,
                limit: BRX_ORDER_LIMIT,
                holds: max_brx <= BRX_ORDER_LIMIT,
            },
        ],
    }
}
