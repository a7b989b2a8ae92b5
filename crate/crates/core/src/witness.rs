//! Witness extraction: concrete objects certifying lower bounds on `|I(A)|`.
//!
//! A collision `a₁ + b₁ξ = a₂ + b₂ξ` with distinct pairs forces `b₁ ≠ b₂`, and
//! dilating `S_ξ(A)` by `b₁ − b₂` turns each `a + bξ` into
//! `a(b₁ − b₂) + b(a₂ − a₁)`, an element of `I(A)`. The remaining operations pick
//! a good ξ so that the embedded copy is large.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::mult_structure::{self, SubgroupData};
use crate::setops::{self, FieldSet};

/// Two distinct pairs with `(a₁ − a₂) + (b₁ − b₂)ξ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub a1: u64,
    pub b1: u64,
    pub a2: u64,
    pub b2: u64,
    pub xi: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub xi: u64,
    pub s_xi_size: usize,
    pub collision: Option<Collision>,
    /// The dilated copy `(b₁ − b₂)·S_ξ(A)`, contained in `I(A)`.
    pub embedded: FieldSet,
    pub certified_lower_bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgroup_order: Option<usize>,
}

/// The least colliding pair of pairs, in lexicographic order of `((a₁, b₁), (a₂, b₂))`.
pub fn find_collision(a: &FieldSet, xi: FieldElement) -> Result<Collision> {
    if a.field() != xi.field() {
        return Err(Error::FieldMismatch {
            left: a.field().modulus(),
            right: xi.field().modulus(),
        });
    }
    let field = a.field();
    let x = xi.value();
    let mut first: std::collections::HashMap<u64, (u64, u64)> = Default::default();
    let mut best: Option<((u64, u64), (u64, u64))> = None;
    for a_ in a.iter() {
        for b_ in a.iter() {
            let s = field.add(a_, field.mul(b_, x));
            match first.get(&s) {
                None => {
                    first.insert(s, (a_, b_));
                }
                Some(&p1) => {
                    // pairs arrive in ascending order, so the first repeat of s is its least candidate
                    let cand = (p1, (a_, b_));
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    let ((a1, b1), (a2, b2)) = best.ok_or(Error::NoCollision { xi: x })?;
    if b1 == b2 || field.add(field.sub(a1, a2), field.mul(field.sub(b1, b2), x)) != 0 {
        return Err(Error::InvariantViolation(format!(
            "bad collision ({a1}, {b1}) ~ ({a2}, {b2}) at xi = {x}"
        )));
    }
    Ok(Collision { a1, b1, a2, b2, xi: x })
}

/// Lemma-1 style embedding: a dilate of `S_ξ(A)` inside `I(A)`.
pub fn embed_witness(a: &FieldSet, xi: FieldElement) -> Result<WitnessReport> {
    let i = setops::i_set(a)?;
    embed_witness_in(a, xi, &i)
}

/// [`embed_witness`] against a precomputed `I(A)`.
pub fn embed_witness_in(a: &FieldSet, xi: FieldElement, i_set: &FieldSet) -> Result<WitnessReport> {
    let collision = find_collision(a, xi)?;
    let field = a.field();
    let s_xi = setops::s_xi_set(a, xi)?;
    let scale = field.element(field.sub(collision.b1, collision.b2))?;
    let embedded = setops::dilate(&s_xi, scale)?;
    if embedded.len() != s_xi.len() || !embedded.is_subset(i_set) {
        return Err(Error::InvariantViolation(format!(
            "dilated S_xi escapes I(A) for A = {:?}, xi = {}",
            a.to_vec(),
            xi.value()
        )));
    }
    Ok(WitnessReport {
        xi: xi.value(),
        s_xi_size: s_xi.len(),
        collision: Some(collision),
        embedded,
        certified_lower_bound: s_xi.len() as u64,
        energy: None,
        subgroup_order: None,
    })
}

/// The ξ chosen by energy averaging, with its energy and `|S_ξ(A)|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct XiChoice {
    pub xi: u64,
    pub energy: u128,
    pub s_xi_size: usize,
    pub candidates: usize,
}

const PARALLEL_WORK: u128 = 1 << 16;

/// `ξ ∈ G` minimising `Σ f_ξ(s)²` (ties to the least ξ); checks the averaging
/// ceiling `energy ≤ |A|² + |A|⁴/|G|` and the floor `|S_ξ(A)| ≥ |A|²|G| / (|A|² + |G|)`.
pub fn select_xi_lemma2(a: &FieldSet, g: &SubgroupData) -> Result<XiChoice> {
    select_xi_over(a, g.elements())
}

/// [`select_xi_lemma2`] over an arbitrary nonempty candidate set inside F*.
pub fn select_xi_over(a: &FieldSet, candidates: &FieldSet) -> Result<XiChoice> {
    if a.is_empty() || candidates.is_empty() {
        return Err(Error::EmptySet);
    }
    if candidates.contains(0) {
        return Err(Error::ZeroInSet);
    }
    let field = a.field();
    let energy_at = |xi: u64| -> Result<(u128, u64)> {
        Ok((setops::additive_energy_of_map(a, field.element(xi)?)?, xi))
    };
    let xs = candidates.to_vec();
    let n = a.len() as u128;
    let (energy, xi) = if n * n * xs.len() as u128 >= PARALLEL_WORK {
        xs.par_iter()
            .map(|&x| energy_at(x))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
    } else {
        xs.iter().map(|&x| energy_at(x)).collect::<Result<Vec<_>>>()?.into_iter().min()
    }
    .expect("nonempty candidates");
    let gsize = xs.len() as u128;
    let s_xi_size = setops::s_xi_set(a, field.element(xi)?)?.len();
    let n2 = n * n;
    if energy * gsize > n2 * gsize + n2 * n2 || (s_xi_size as u128) * (n2 + gsize) < n2 * gsize {
        return Err(Error::InvariantViolation(format!(
            "energy averaging bound fails for A = {:?}: xi = {xi}, energy = {energy}, |S_xi| = {s_xi_size}, |G| = {gsize}",
            a.to_vec()
        )));
    }
    Ok(XiChoice {
        xi,
        energy,
        s_xi_size,
        candidates: xs.len(),
    })
}

/// Lower bound `min(|A|³ / (5|A·A|), |A|²|G| / (|A|² + |G|))` as two exact fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lemma4Floor {
    pub popular_num: u128,
    pub popular_den: u128,
    pub averaging_num: u128,
    pub averaging_den: u128,
}

impl Lemma4Floor {
    pub fn new(set_size: usize, product_size: usize, group_order: usize) -> Self {
        let n = set_size as u128;
        let g = group_order as u128;
        Lemma4Floor {
            popular_num: n * n * n,
            popular_den: 5 * product_size as u128,
            averaging_num: n * n * g,
            averaging_den: n * n + g,
        }
    }

    /// `value ≥ min(first, second)`.
    pub fn is_met_by(&self, value: usize) -> bool {
        let v = value as u128;
        v * self.popular_den >= self.popular_num || v * self.averaging_den >= self.averaging_num
    }
}

/// Scans `ξ ∈ G` (G generated by the popular ratios of `A`) for the largest
/// `|S_ξ(A)|` still below `|A|²`, checks it clears [`Lemma4Floor`], then embeds.
pub fn select_xi_lemma4(a: &FieldSet) -> Result<WitnessReport> {
    let i = if a.is_empty() { None } else { Some(setops::i_set(a)?) };
    select_xi_lemma4_in(a, i.as_ref())
}

pub(crate) fn select_xi_lemma4_in(a: &FieldSet, i_set: Option<&FieldSet>) -> Result<WitnessReport> {
    if a.len() <= 1 {
        return Err(if a.is_empty() { Error::EmptySet } else { Error::SingletonSet });
    }
    if a.contains(0) {
        return Err(Error::ZeroInSet);
    }
    let field = a.field();
    let h = mult_structure::popular_ratios(a)?;
    let g = mult_structure::generated_subgroup(&h)?;
    let n2 = a.len() * a.len();
    let best = g
        .elements()
        .iter()
        .map(|x| Ok((setops::s_xi_set(a, field.element(x)?)?.len(), x)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&(size, _)| size < n2)
        .max_by(|l, r| l.0.cmp(&r.0).then(r.1.cmp(&l.1)));
    let floor = Lemma4Floor::new(a.len(), setops::product_set(a, a)?.len(), g.order());
    let (size, xi) = match best {
        Some(b) if floor.is_met_by(b.0) => b,
        _ => {
            return Err(Error::InvariantViolation(format!(
                "no xi in G meets the floor for A = {:?} (|G| = {}, best = {:?})",
                a.to_vec(),
                g.order(),
                best
            )))
        }
    };
    let owned;
    let i_set = match i_set {
        Some(i) => i,
        None => {
            owned = setops::i_set(a)?;
            &owned
        }
    };
    let mut report = embed_witness_in(a, field.element(xi)?, i_set)?;
    debug_assert_eq!(report.s_xi_size, size);
    report.subgroup_order = Some(g.order());
    Ok(report)
}

/// For `|A|² > q`: picks ξ ∈ F* by energy averaging, so `|S_ξ(A)| ≥ q/2`, and
/// embeds. The certified bound is `⌈q/2⌉`.
pub fn theorem3_witness(a: &FieldSet) -> Result<WitnessReport> {
    let i = if a.is_empty() { None } else { Some(setops::i_set(a)?) };
    theorem3_witness_in(a, i.as_ref())
}

pub(crate) fn theorem3_witness_in(a: &FieldSet, i_set: Option<&FieldSet>) -> Result<WitnessReport> {
    let field = a.field();
    let q = field.modulus();
    let size_sq = (a.len() as u64).saturating_mul(a.len() as u64);
    if size_sq <= q {
        return Err(Error::TooSmall { size_sq, q });
    }
    let whole = SubgroupData::whole_group(field)?;
    let choice = select_xi_lemma2(a, &whole)?;
    let s = choice.s_xi_size as u64;
    if 2 * s < q || s > q || s >= size_sq {
        return Err(Error::InvariantViolation(format!(
            "|S_xi| = {s} outside [q/2, q] for A = {:?}, q = {q}",
            a.to_vec()
        )));
    }
    let owned;
    let i_set = match i_set {
        Some(i) => i,
        None => {
            owned = setops::i_set(a)?;
            &owned
        }
    };
    let mut report = embed_witness_in(a, field.element(choice.xi)?, i_set)?;
    report.certified_lower_bound = q.div_ceil(2);
    report.energy = Some(choice.energy);
    report.subgroup_order = Some(whole.order());
    Ok(report)
}
