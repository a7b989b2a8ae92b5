//! Multiplicative structure of a set: popular ratios, the subgroup they
//! generate, coset decompositions of F*, and per-coset difference statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::setops::{self, FieldSet};

/// A multiplicative subgroup of F*.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupData {
    #[serde(skip)]
    field: PrimeField,
    elements: FieldSet,
    order: usize,
}

impl SubgroupData {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn elements(&self) -> &FieldSet {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The whole multiplicative group F*.
    pub fn whole_group(field: PrimeField) -> Result<SubgroupData> {
        let elements = FieldSet::full(field)?.without(0);
        Ok(SubgroupData {
            field,
            order: elements.len(),
            elements,
        })
    }

    /// The cyclic subgroup generated by a single nonzero residue.
    pub fn cyclic(field: PrimeField, generator: u64) -> Result<SubgroupData> {
        generated_subgroup(&FieldSet::from_residues(field, [generator % field.modulus()])?)
    }
}

/// Every subgroup of F*, ascending by order (one per divisor of q − 1).
pub fn all_subgroups(field: PrimeField) -> Result<Vec<SubgroupData>> {
    let n = field.modulus() - 1;
    let mut found: Vec<SubgroupData> = Vec::new();
    for g in 1..field.modulus() {
        let sub = SubgroupData::cyclic(field, g)?;
        if !found.iter().any(|h| h.order == sub.order) {
            found.push(sub);
        }
        let divisors = (1..=n).filter(|d| n % d == 0).count();
        if found.len() == divisors {
            break;
        }
    }
    found.sort_by_key(|g| g.order);
    Ok(found)
}

fn require_nonzero_nonempty(a: &FieldSet) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.contains(0) {
        return Err(Error::ZeroInSet);
    }
    Ok(())
}

/// Ratios `s` attained by at least `|A|² / (5|A·A|)` ordered pairs, compared as
/// `5·|A·A|·r(s) ≥ |A|²` on integers.
pub fn popular_ratios(a: &FieldSet) -> Result<FieldSet> {
    require_nonzero_nonempty(a)?;
    let counts = setops::ratio_counts(a, a)?;
    let product_size = setops::product_set(a, a)?.len() as u128;
    let n_sq = (a.len() as u128).pow(2);
    FieldSet::from_residues(
        a.field(),
        counts
            .iter()
            .filter(|&(_, r)| 5 * product_size * r as u128 >= n_sq)
            .map(|(s, _)| s),
    )
}

/// Smallest subgroup of F* containing `H`, by closure under multiplication.
pub fn generated_subgroup(h: &FieldSet) -> Result<SubgroupData> {
    require_nonzero_nonempty(h)?;
    let field = h.field();
    let gens = h.to_vec();
    let mut elements = FieldSet::empty(field)?;
    elements.insert(1);
    let mut frontier = vec![1u64];
    while let Some(x) = frontier.pop() {
        for &g in &gens {
            let y = field.mul(x, g);
            if !elements.contains(y) {
                elements.insert(y);
                frontier.push(y);
            }
        }
    }
    Ok(SubgroupData {
        field,
        order: elements.len(),
        elements,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coset {
    /// Least residue in the coset.
    pub representative: u64,
    pub members: FieldSet,
}

/// The cosets of a subgroup, ordered by representative.
#[derive(Debug, Clone)]
pub struct CosetDecomposition {
    subgroup: SubgroupData,
    cosets: Vec<Coset>,
    index: Vec<u32>,
}

impl CosetDecomposition {
    pub fn subgroup(&self) -> &SubgroupData {
        &self.subgroup
    }

    pub fn cosets(&self) -> &[Coset] {
        &self.cosets
    }

    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    /// Position in [`Self::cosets`] of the coset containing `s`; `None` for 0.
    pub fn coset_of(&self, s: u64) -> Option<usize> {
        match self.index.get(s as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }
}

pub fn coset_decomposition(g: &SubgroupData) -> CosetDecomposition {
    let field = g.field;
    let mut index = vec![u32::MAX; field.size()];
    let mut cosets = Vec::new();
    for r in 1..field.modulus() {
        if index[r as usize] != u32::MAX {
            continue;
        }
        let mut members = FieldSet::blank(field);
        for x in g.elements.iter() {
            let y = field.mul(r, x);
            members.insert(y);
            index[y as usize] = cosets.len() as u32;
        }
        cosets.push(Coset { representative: r, members });
    }
    CosetDecomposition {
        subgroup: g.clone(),
        cosets,
        index,
    }
}

/// A coset holding at least a third of `A`.
#[derive(Debug, Clone, Serialize)]
pub struct HeavyCoset {
    pub popular_ratios: FieldSet,
    pub subgroup: SubgroupData,
    pub representative: u64,
    pub coset: FieldSet,
    pub intersection: FieldSet,
}

/// With `G` generated by the popular ratios of `A`, picks the coset of `G`
/// meeting `A` the most (ties to the smaller representative) and checks
/// `3·|A ∩ G₁| ≥ |A|`.
pub fn heavy_coset(a: &FieldSet) -> Result<HeavyCoset> {
    let h = popular_ratios(a)?;
    let g = generated_subgroup(&h)?;
    let decomposition = coset_decomposition(&g);
    let mut best: Option<(usize, FieldSet)> = None;
    for (i, coset) in decomposition.cosets.iter().enumerate() {
        let meet = a.intersection(&coset.members)?;
        if best.as_ref().is_none_or(|(_, m)| meet.len() > m.len()) {
            best = Some((i, meet));
        }
    }
    let (i, intersection) = best.expect("F* has at least one coset");
    if 3 * intersection.len() < a.len() {
        return Err(Error::InvariantViolation(format!(
            "no coset holds a third of A = {:?}: best has {} of {}",
            a.to_vec(),
            intersection.len(),
            a.len()
        )));
    }
    let coset = &decomposition.cosets[i];
    Ok(HeavyCoset {
        popular_ratios: h,
        subgroup: g,
        representative: coset.representative,
        coset: coset.members.clone(),
        intersection,
    })
}

/// One coset's statistics. `m` is `None` until [`lemma5_stats`] fills it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetRecord {
    /// 1-based rank in the descending-`n` order.
    pub t: usize,
    pub representative: u64,
    pub n: u64,
    pub l: Option<u64>,
    pub m: Option<u128>,
}

/// Per-coset records sorted by descending `n`, ties to the smaller representative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetStats {
    pub subgroup_order: usize,
    pub records: Vec<CosetRecord>,
}

impl CosetStats {
    pub fn total_n(&self) -> u64 {
        self.records.iter().map(|r| r.n).sum()
    }

    pub fn total_l(&self) -> u64 {
        self.records.iter().filter_map(|r| r.l).sum()
    }

    pub fn total_m(&self) -> u128 {
        self.records.iter().filter_map(|r| r.m).sum()
    }

    fn sort(&mut self) {
        self.records
            .sort_by(|x, y| y.n.cmp(&x.n).then(x.representative.cmp(&y.representative)));
        for (i, r) in self.records.iter_mut().enumerate() {
            r.t = i + 1;
        }
    }
}

/// `N_t = |{ (g₁, g₂) ∈ G² : g₁ − g₂ = s }|` for `s` in each coset `G_t`.
///
/// Recomputes the count at every member of every coset and fails if it varies.
pub fn coset_diff_counts(g: &SubgroupData) -> Result<CosetStats> {
    let decomposition = coset_decomposition(g);
    coset_diff_counts_in(&decomposition)
}

fn coset_diff_counts_in(decomposition: &CosetDecomposition) -> Result<CosetStats> {
    let g = &decomposition.subgroup;
    let diffs = setops::difference_counts(&g.elements, &g.elements)?;
    let mut records = Vec::with_capacity(decomposition.len());
    for coset in &decomposition.cosets {
        let n = diffs.get(coset.representative);
        if let Some(s) = coset.members.iter().find(|&s| diffs.get(s) != n) {
            return Err(Error::InvariantViolation(format!(
                "N_t depends on the representative: {} at {} vs {} at {}",
                n,
                coset.representative,
                diffs.get(s),
                s
            )));
        }
        records.push(CosetRecord {
            t: 0,
            representative: coset.representative,
            n,
            l: None,
            m: None,
        });
    }
    let mut stats = CosetStats {
        subgroup_order: g.order,
        records,
    };
    stats.sort();
    Ok(stats)
}

/// Adds `L_t` (difference pairs of `B` landing in `G_t`) and `M_t` (additive
/// quadruples of `B` with common difference in `G_t`) to the `N_t` table, then
/// checks `L_t ≤ N_t|B|`, `M_t ≤ N_t·L_t ≤ N_t²|B|` and `Σ L_t = |B|(|B| − 1)`.
pub fn lemma5_stats(b: &FieldSet, g: &SubgroupData) -> Result<CosetStats> {
    if b.field() != g.field {
        return Err(Error::FieldMismatch {
            left: b.field().modulus(),
            right: g.field.modulus(),
        });
    }
    if !b.is_subset(&g.elements) {
        return Err(Error::NotSubsetOfGroup);
    }
    let decomposition = coset_decomposition(g);
    let mut stats = coset_diff_counts_in(&decomposition)?;
    let mut l = vec![0u64; decomposition.len()];
    let mut m = vec![0u128; decomposition.len()];
    for (s, f) in setops::difference_counts(b, b)?.iter() {
        if let Some(i) = decomposition.coset_of(s) {
            l[i] += f;
            m[i] += f as u128 * f as u128;
        }
    }
    let size = b.len() as u128;
    for rec in stats.records.iter_mut() {
        let i = decomposition.coset_of(rec.representative).expect("nonzero representative");
        let (lt, mt, nt) = (l[i] as u128, m[i], rec.n as u128);
        if lt > nt * size || mt > nt * lt || nt * lt > nt * nt * size {
            return Err(Error::InvariantViolation(format!(
                "coset statistics out of bounds at representative {}: N = {nt}, L = {lt}, M = {mt}, |B| = {size}, B = {:?}",
                rec.representative,
                b.to_vec()
            )));
        }
        rec.l = Some(l[i]);
        rec.m = Some(m[i]);
    }
    let total_l = stats.total_l() as u128;
    if total_l != size * size.saturating_sub(1) {
        return Err(Error::InvariantViolation(format!(
            "sum of L_t is {total_l}, expected |B|(|B|-1) = {}",
            size * size.saturating_sub(1)
        )));
    }
    Ok(stats)
}
