//! Conjugacy classes of subgroups of an enumerated `MatrixGroup`.
//!
//! Classes are found by layered generator augmentation. Starting from the
//! trivial subgroup, every class representative `H` is extended by one
//! element `g` of prime-power order; candidates are reduced modulo
//! `g ~ hg ~ gh ~ g^k ~ ngn^{-1}` (`h` in `H`, `k` a unit, `n` in `N(H)`),
//! none of which change the conjugacy class of `<H, g>`. Every subgroup is
//! generated by its prime-power-order elements, so iterating to a fixpoint
//! reaches every class.
//!
//! Each new class is orbited under conjugation by the parent generators.
//! The orbit yields the canonical representative (the lexicographically
//! least element set), the normalizer (from Schreier generators), and the
//! set hashes of every conjugate, which are registered so that later
//! candidates are identified by a single lookup.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_picard_lattice, DegreeSpec};
use crate::weyl::{reflection, IntegralIsometry, LineAction, MatrixGroup};

/// Size limits of the enumeration tiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Exhaustive,
    Extended,
    Stretch,
}

impl Tier {
    pub fn max_order(self) -> usize {
        match self {
            Tier::Exhaustive => 2_000,
            Tier::Extended => 60_000,
            Tier::Stretch => 3_000_000,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Exhaustive => "exhaustive",
            Tier::Extended => "extended",
            Tier::Stretch => "stretch",
        }
    }

    pub fn check(self, order: usize) -> Result<()> {
        if order > self.max_order() {
            return Err(Error::TierExceeded {
                tier: self.name().to_string(),
                order,
                limit: self.max_order(),
            });
        }
        Ok(())
    }
}

impl std::str::FromStr for Tier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Tier::Exhaustive),
            "extended" => Ok(Tier::Extended),
            "stretch" => Ok(Tier::Stretch),
            _ => Err(Error::Parse(format!("unknown tier '{s}'"))),
        }
    }
}

/// A subgroup of an enumerated parent group, by element indices.
///
/// `fingerprint` is the lexicographically least sorted element set among all
/// conjugates. Enumerated class representatives are chosen to be that
/// conjugate, so for them `elements == fingerprint`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupClass {
    pub parent_degree: DegreeSpec,
    pub generators: Vec<u32>,
    pub elements: Vec<u32>,
    pub order: usize,
    pub fingerprint: Vec<u32>,
    pub normalizer_order: usize,
}

impl SubgroupClass {
    /// The subgroup generated by `generators`, with its fingerprint.
    pub fn from_generators(group: &MatrixGroup, generators: &[u32]) -> Result<Self> {
        let elements = closure(group, generators)?;
        let orbit = conjugacy_orbit(group, &elements, generators, None);
        Ok(Self {
            parent_degree: group.lattice().degree_spec(),
            generators: generators.to_vec(),
            order: elements.len(),
            elements,
            fingerprint: orbit.min_set,
            normalizer_order: orbit.normalizer_order,
        })
    }

    /// `g H g^{-1}`, keeping the fingerprint.
    pub fn conjugated_by(&self, group: &MatrixGroup, g: u32) -> Self {
        let mut elements: Vec<u32> = self.elements.iter().map(|&x| group.conjugate(g, x)).collect();
        elements.sort_unstable();
        Self {
            generators: self.generators.iter().map(|&x| group.conjugate(g, x)).collect(),
            elements,
            ..self.clone()
        }
    }

    /// Number of subgroups in this conjugacy class.
    pub fn class_size(&self, parent_order: usize) -> usize {
        parent_order / self.normalizer_order
    }
}

/// Reusable membership bitset over the parent group.
struct Marks {
    bits: Vec<u64>,
}

impl Marks {
    fn new(n: usize) -> Self {
        Self {
            bits: vec![0; n.div_ceil(64)],
        }
    }

    fn get(&self, i: u32) -> bool {
        self.bits[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    fn set(&mut self, i: u32) {
        self.bits[(i >> 6) as usize] |= 1 << (i & 63);
    }

    /// Clears whole words, so every marked bit must belong to `items`.
    fn clear_all(&mut self, items: &[u32]) {
        for &i in items {
            self.bits[(i >> 6) as usize] = 0;
        }
    }
}

/// Extends the closed set `elements` (marked in `marks`) by `new`, using
/// right cosets of the old subgroup (Dimino). `gens` must generate the old
/// subgroup. Returns early with the whole parent once the size passes half
/// the parent order.
fn extend_closure(
    group: &MatrixGroup,
    elements: &mut Vec<u32>,
    marks: &mut Marks,
    gens: &[u32],
    new: u32,
) -> bool {
    if marks.get(new) {
        return false;
    }
    let old_len = elements.len();
    let parent = group.order();
    let mut reps = vec![new];
    for k in 0..old_len {
        let x = group.mul(elements[k], new);
        marks.set(x);
        elements.push(x);
    }
    let mut ri = 0;
    while ri < reps.len() {
        let r = reps[ri];
        ri += 1;
        for &s in gens.iter().chain(std::iter::once(&new)) {
            let e = group.mul(r, s);
            if marks.get(e) {
                continue;
            }
            reps.push(e);
            for k in 0..old_len {
                let x = group.mul(elements[k], e);
                marks.set(x);
                elements.push(x);
            }
            if elements.len() * 2 > parent {
                // Lagrange: a subgroup larger than half the group is the group.
                for x in 0..parent as u32 {
                    if !marks.get(x) {
                        marks.set(x);
                        elements.push(x);
                    }
                }
                return true;
            }
        }
    }
    true
}

/// Smallest subgroup containing the given elements, sorted.
pub fn closure(group: &MatrixGroup, generators: &[u32]) -> Result<Vec<u32>> {
    for &g in generators {
        if !group.contains_index(g as usize) {
            return Err(Error::InvalidIndex(g as usize));
        }
    }
    let mut marks = Marks::new(group.order());
    let mut elements = vec![group.identity()];
    marks.set(group.identity());
    let mut used = Vec::new();
    for &g in generators {
        if extend_closure(group, &mut elements, &mut marks, &used, g) {
            used.push(g);
        }
    }
    debug_assert_eq!(group.order() % elements.len(), 0);
    elements.sort_unstable();
    Ok(elements)
}

/// Order-independent 128-bit hash of an element set.
struct SetHasher {
    keys: Vec<u128>,
}

impl SetHasher {
    fn new(n: usize) -> Self {
        let mut state = 0x9e37_79b9_7f4a_7c15_u64;
        let mut next = move || {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^ (z >> 31)
        };
        let keys = (0..n)
            .map(|_| (u128::from(next()) << 64) | u128::from(next()))
            .collect();
        Self { keys }
    }

    fn hash(&self, set: &[u32]) -> u128 {
        set.iter()
            .fold(0u128, |acc, &x| acc.wrapping_add(self.keys[x as usize]))
    }
}

struct OrbitInfo {
    hashes: Vec<u128>,
    min_set: Vec<u32>,
    min_transversal: u32,
    normalizer_generators: Vec<u32>,
    normalizer_order: usize,
}

/// Orbit of a subgroup under conjugation by the parent generators.
fn conjugacy_orbit(
    group: &MatrixGroup,
    elements: &[u32],
    generators: &[u32],
    hasher: Option<&SetHasher>,
) -> OrbitInfo {
    let owned;
    let hasher = match hasher {
        Some(h) => h,
        None => {
            owned = SetHasher::new(group.order());
            &owned
        }
    };
    let mut start = elements.to_vec();
    start.sort_unstable();
    let mut sets = vec![start.clone()];
    let mut transversal = vec![group.identity()];
    let mut index: FxHashMap<u128, usize> = FxHashMap::default();
    index.insert(hasher.hash(&start), 0);
    let mut min_idx = 0;
    let mut schreier: Vec<u32> = Vec::new();
    let mut schreier_seen: FxHashSet<u32> = FxHashSet::default();

    let mut p = 0;
    while p < sets.len() {
        for &s in group.generator_indices() {
            let mut image: Vec<u32> = sets[p].iter().map(|&x| group.conjugate(s, x)).collect();
            let h = hasher.hash(&image);
            let t = group.mul(s, transversal[p]);
            match index.get(&h) {
                Some(&q) => {
                    let n = group.mul(group.inverse(transversal[q]), t);
                    if schreier_seen.insert(n) {
                        schreier.push(n);
                    }
                }
                None => {
                    image.sort_unstable();
                    let q = sets.len();
                    index.insert(h, q);
                    if image < sets[min_idx] {
                        min_idx = q;
                    }
                    sets.push(image);
                    transversal.push(t);
                }
            }
        }
        p += 1;
    }

    let normalizer_order = group.order() / sets.len();
    let mut marks = Marks::new(group.order());
    let mut normalizer = start.clone();
    for &x in &normalizer {
        marks.set(x);
    }
    let mut norm_gens = generators.to_vec();
    for n in schreier {
        if normalizer.len() == normalizer_order {
            break;
        }
        if extend_closure(group, &mut normalizer, &mut marks, &norm_gens, n) {
            norm_gens.push(n);
        }
    }
    assert_eq!(
        normalizer.len(),
        normalizer_order,
        "orbit-stabilizer mismatch"
    );

    let mut hashes: Vec<u128> = index.into_keys().collect();
    hashes.sort_unstable();
    OrbitInfo {
        hashes,
        min_set: std::mem::take(&mut sets[min_idx]),
        min_transversal: transversal[min_idx],
        normalizer_generators: norm_gens,
        normalizer_order,
    }
}

/// Canonical fingerprint of the subgroup with the given elements.
pub fn fingerprint(group: &MatrixGroup, elements: &[u32]) -> Vec<u32> {
    let gens = generating_set(group, elements);
    conjugacy_orbit(group, elements, &gens, None).min_set
}

/// A small generating set of the subgroup with the given elements, picked
/// greedily in index order.
pub fn generating_set(group: &MatrixGroup, elements: &[u32]) -> Vec<u32> {
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    let mut marks = Marks::new(group.order());
    let mut current = vec![group.identity()];
    marks.set(group.identity());
    let mut gens = Vec::new();
    for &x in &sorted {
        if current.len() == sorted.len() {
            break;
        }
        if extend_closure(group, &mut current, &mut marks, &gens, x) {
            gens.push(x);
        }
    }
    gens
}

/// True iff some parent element conjugates `a` onto `b`.
pub fn is_conjugate(group: &MatrixGroup, a: &SubgroupClass, b: &SubgroupClass) -> Result<bool> {
    let parent = group.lattice().degree_spec();
    if a.parent_degree != parent || b.parent_degree != parent {
        return Err(Error::ParentMismatch);
    }
    if a.order != b.order {
        return Ok(false);
    }
    Ok(a.fingerprint == b.fingerprint)
}

struct ClassRecord {
    class: SubgroupClass,
    normalizer_generators: Vec<u32>,
}

/// Saved progress of a layered enumeration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnumerationCheckpoint {
    pub parent_degree: DegreeSpec,
    pub parent_order: usize,
    pub classes: Vec<SubgroupClass>,
    /// Classes from this index on have not been extended yet.
    pub frontier_start: usize,
    pub layers_done: usize,
}

#[derive(Default)]
pub struct EnumerationOptions<'a> {
    pub resume: Option<EnumerationCheckpoint>,
    pub on_layer: Option<&'a (dyn Fn(&EnumerationCheckpoint) + Sync)>,
}


/// One representative per conjugacy class of subgroups, sorted by order and
/// then fingerprint.
pub fn enumerate_subgroup_classes(group: &MatrixGroup, tier: Tier) -> Result<Vec<SubgroupClass>> {
    enumerate_subgroup_classes_with(group, tier, EnumerationOptions::default())
}

pub fn enumerate_subgroup_classes_with(
    group: &MatrixGroup,
    tier: Tier,
    options: EnumerationOptions<'_>,
) -> Result<Vec<SubgroupClass>> {
    tier.check(group.order())?;
    let degree = group.lattice().degree_spec();
    let hasher = SetHasher::new(group.order());
    let mut registry: FxHashMap<u128, u32> = FxHashMap::default();
    let mut records: Vec<ClassRecord> = Vec::new();

    let register = |records: &mut Vec<ClassRecord>,
                        registry: &mut FxHashMap<u128, u32>,
                        elements: &[u32],
                        gens: &[u32]| {
        let orbit = conjugacy_orbit(group, elements, gens, Some(&hasher));
        let id = records.len() as u32;
        for h in &orbit.hashes {
            registry.insert(*h, id);
        }
        let t = orbit.min_transversal;
        let class = SubgroupClass {
            parent_degree: degree,
            generators: gens.iter().map(|&g| group.conjugate(t, g)).collect(),
            order: orbit.min_set.len(),
            elements: orbit.min_set.clone(),
            fingerprint: orbit.min_set,
            normalizer_order: orbit.normalizer_order,
        };
        records.push(ClassRecord {
            class,
            normalizer_generators: orbit
                .normalizer_generators
                .iter()
                .map(|&g| group.conjugate(t, g))
                .collect(),
        });
    };

    let (mut frontier, mut layers_done) = match options.resume {
        Some(cp) => {
            if cp.parent_degree != degree || cp.parent_order != group.order() {
                return Err(Error::ParentMismatch);
            }
            for c in &cp.classes {
                register(&mut records, &mut registry, &c.elements, &c.generators);
            }
            (cp.frontier_start, cp.layers_done)
        }
        None => {
            register(&mut records, &mut registry, &[group.identity()], &[]);
            (0, 0)
        }
    };

    let prime_power: Vec<bool> = (0..group.order() as u32)
        .map(|x| is_prime_power(group.element_order(x)))
        .collect();

    type Discovery = (u128, Vec<u32>, Vec<u32>);
    while frontier < records.len() {
        let layer_end = records.len();
        let discovered: Vec<Vec<Discovery>> = records[frontier..layer_end]
            .par_iter()
            .map_init(
                || Marks::new(group.order()),
                |marks, rec| extensions(group, rec, &prime_power, &registry, &hasher, marks),
            )
            .collect();

        let mut pending_seen: FxHashSet<u128> = FxHashSet::default();
        for (h, elements, gens) in discovered.into_iter().flatten() {
            if registry.contains_key(&h) || !pending_seen.insert(h) {
                continue;
            }
            register(&mut records, &mut registry, &elements, &gens);
        }
        frontier = layer_end;
        layers_done += 1;
        if let Some(cb) = options.on_layer {
            cb(&EnumerationCheckpoint {
                parent_degree: degree,
                parent_order: group.order(),
                classes: records.iter().map(|r| r.class.clone()).collect(),
                frontier_start: frontier,
                layers_done,
            });
        }
    }

    let mut classes: Vec<SubgroupClass> = records.into_iter().map(|r| r.class).collect();
    classes.sort_by(|a, b| (a.order, &a.fingerprint).cmp(&(b.order, &b.fingerprint)));
    Ok(classes)
}

fn is_prime_power(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let p = (2..=n).find(|p| n.is_multiple_of(*p)).expect("n >= 2 has a prime factor");
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1
}

/// Subgroups `<H, g>` not yet registered, one per candidate orbit.
fn extensions(
    group: &MatrixGroup,
    rec: &ClassRecord,
    prime_power: &[bool],
    registry: &FxHashMap<u128, u32>,
    hasher: &SetHasher,
    marks: &mut Marks,
) -> Vec<(u128, Vec<u32>, Vec<u32>)> {
    let n = group.order();
    let h = &rec.class;
    for &x in &h.elements {
        marks.set(x);
    }

    let mut uf = UnionFind::new(n);
    for x in 0..n as u32 {
        if marks.get(x) {
            continue;
        }
        for &g in &h.generators {
            uf.union(x, group.mul(g, x));
            uf.union(x, group.mul(x, g));
        }
        for &c in &rec.normalizer_generators {
            uf.union(x, group.conjugate(c, x));
        }
        let ord = group.element_order(x);
        let mut p = x;
        for k in 2..ord {
            p = group.mul(p, x);
            if num_integer::gcd(k, ord) == 1 {
                uf.union(x, p);
            }
        }
    }

    let mut chosen: FxHashSet<u32> = FxHashSet::default();
    let mut candidates = Vec::new();
    for x in 0..n as u32 {
        if marks.get(x) || !prime_power[x as usize] {
            continue;
        }
        if chosen.insert(uf.find(x)) {
            candidates.push(x);
        }
    }
    marks.clear_all(&h.elements);

    let mut out = Vec::new();
    let mut local: FxHashSet<u128> = FxHashSet::default();
    for g in candidates {
        let mut elements = h.elements.clone();
        for &x in &elements {
            marks.set(x);
        }
        extend_closure(group, &mut elements, marks, &h.generators, g);
        marks.clear_all(&elements);
        let key = hasher.hash(&elements);
        if registry.contains_key(&key) || !local.insert(key) {
            continue;
        }
        let mut gens = h.generators.clone();
        gens.push(g);
        out.push((key, elements, gens));
    }
    out
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Keeps the smaller index as root.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else if rb < ra {
            self.parent[ra as usize] = rb;
        }
    }
}

/// A subgroup of a Weyl group too large to enumerate, kept by generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledSubgroup {
    pub degree: DegreeSpec,
    pub generators: Vec<IntegralIsometry>,
    pub order: usize,
}

/// Random subgroups of the Weyl group of degree 1 or 2, each generated by
/// products of one to three random root reflections. Draws whose closure
/// exceeds `order_cap` are discarded. Deterministic in `seed`.
pub fn sample_subgroups(
    degree: DegreeSpec,
    generator_count: RangeInclusive<usize>,
    order_cap: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<SampledSubgroup>> {
    if !matches!(degree, DegreeSpec::Degree(1) | DegreeSpec::Degree(2)) {
        return Err(Error::InvalidArgument(format!(
            "sampling is for degrees 1 and 2, got {degree}"
        )));
    }
    if generator_count.is_empty() {
        return Err(Error::InvalidArgument("empty generator count range".into()));
    }
    let lattice = build_picard_lattice(degree);
    let action = LineAction::new(&lattice);
    let roots = lattice.roots();
    let reflections: Vec<(IntegralIsometry, Vec<u8>)> = roots
        .iter()
        .map(|r| {
            let m = reflection(&lattice, r).expect("roots");
            let p = action.perm_of(&m).expect("isometry");
            (m, p)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let retry_budget = count.saturating_mul(50).max(50);
    let mut draws = 0;
    while out.len() < count {
        if draws >= retry_budget {
            return Err(Error::SamplingExhausted {
                wanted: count,
                drawn: out.len(),
            });
        }
        draws += 1;
        let k = rng.gen_range(generator_count.clone());
        let mut gens = Vec::with_capacity(k);
        let mut perms = Vec::with_capacity(k);
        for _ in 0..k {
            let len = rng.gen_range(1..=3);
            let mut m = IntegralIsometry::identity(lattice.rank());
            let mut p: Vec<u8> = (0..action.line_count() as u8).collect();
            for _ in 0..len {
                let (rm, rp) = &reflections[rng.gen_range(0..reflections.len())];
                m = m.compose(rm);
                p = rp.iter().map(|&j| p[j as usize]).collect();
            }
            gens.push(m);
            perms.push(p);
        }
        if let Some(order) = perm_closure_order(&action, &perms, order_cap) {
            out.push(SampledSubgroup {
                degree,
                generators: gens,
                order,
            });
        }
    }
    Ok(out)
}

/// Order of the group generated by line permutations, or `None` past `cap`.
pub(crate) fn perm_closure_order(action: &LineAction, gens: &[Vec<u8>], cap: usize) -> Option<usize> {
    let n = action.line_count();
    let id: Vec<u8> = (0..n as u8).collect();
    let mut seen: FxHashSet<u64> = FxHashSet::default();
    seen.insert(action.key(&id));
    let mut elements = vec![id];
    let mut i = 0;
    while i < elements.len() {
        for g in gens {
            let prod: Vec<u8> = (0..n).map(|j| elements[i][g[j] as usize]).collect();
            if seen.insert(action.key(&prod)) {
                if elements.len() >= cap {
                    return None;
                }
                elements.push(prod);
            }
        }
        i += 1;
    }
    Some(elements.len())
}
