//! Set-valued arithmetic over a prime field.
//!
//! Sets are bit vectors of length q. Sum sets of dense operands are built
//! word-parallel: for every `b` in the smaller operand the bit vector of the
//! other operand is rotated by `b` (cyclic rotation is addition mod q) and
//! OR-ed into the accumulator. Sparse operands fall back to pair enumeration.

use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};

const WORD: usize = 64;

/// Largest modulus the bitset backend accepts.
pub const MAX_BITSET_MODULUS: u64 = 1 << 32;

/// A subset of a prime field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldSet {
    field: PrimeField,
    words: Vec<u64>,
    len: usize,
}

impl FieldSet {
    pub fn empty(field: PrimeField) -> Result<Self> {
        if field.modulus() >= MAX_BITSET_MODULUS {
            return Err(Error::FieldTooLarge(field.modulus()));
        }
        Ok(Self::blank(field))
    }

    pub(crate) fn blank(field: PrimeField) -> Self {
        FieldSet {
            field,
            words: vec![0; field.size().div_ceil(WORD)],
            len: 0,
        }
    }

    /// The whole field.
    pub fn full(field: PrimeField) -> Result<Self> {
        let mut set = Self::empty(field)?;
        let q = field.size();
        for w in set.words.iter_mut() {
            *w = u64::MAX;
        }
        if q % WORD != 0 {
            *set.words.last_mut().unwrap() = (1u64 << (q % WORD)) - 1;
        }
        set.len = q;
        Ok(set)
    }

    /// Builds a set from residues; every value must already lie in `[0, q)`.
    pub fn from_residues<I: IntoIterator<Item = u64>>(field: PrimeField, residues: I) -> Result<Self> {
        let mut set = Self::empty(field)?;
        for r in residues {
            if r >= field.modulus() {
                return Err(Error::ResidueOutOfRange { value: r, q: field.modulus() });
            }
            set.insert(r);
        }
        Ok(set)
    }

    /// Builds a set from arbitrary integers, reducing each mod q.
    pub fn from_reduced<I: IntoIterator<Item = u64>>(field: PrimeField, values: I) -> Result<Self> {
        let q = field.modulus();
        Self::from_residues(field, values.into_iter().map(|v| v % q))
    }

    /// Builds a set from the bits of `mask` (bit `i` set means residue `i` is a member).
    pub fn from_mask(field: PrimeField, mask: u64) -> Result<Self> {
        let mut set = Self::empty(field)?;
        let q = field.size();
        let mask = if q >= WORD { mask } else { mask & ((1u64 << q) - 1) };
        set.words[0] = mask;
        set.len = mask.count_ones() as usize;
        Ok(set)
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.field.size()
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        let x = x as usize;
        x < self.field.size() && self.words[x / WORD] >> (x % WORD) & 1 == 1
    }

    #[inline]
    pub(crate) fn insert(&mut self, x: u64) {
        let x = x as usize;
        let bit = 1u64 << (x % WORD);
        let w = &mut self.words[x / WORD];
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
        }
    }

    /// Members in ascending order.
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn min(&self) -> Option<u64> {
        self.iter().next()
    }

    pub fn is_subset(&self, other: &FieldSet) -> bool {
        self.field == other.field
            && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &FieldSet) -> Result<FieldSet> {
        same_field(self, other)?;
        let words: Vec<u64> = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(Self::from_words(self.field, words))
    }

    pub fn union(&self, other: &FieldSet) -> Result<FieldSet> {
        same_field(self, other)?;
        let words: Vec<u64> = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Ok(Self::from_words(self.field, words))
    }

    /// The set with `x` removed.
    pub fn without(&self, x: u64) -> FieldSet {
        let mut out = self.clone();
        if out.contains(x) {
            let x = x as usize;
            out.words[x / WORD] &= !(1u64 << (x % WORD));
            out.len -= 1;
        }
        out
    }

    fn from_words(field: PrimeField, words: Vec<u64>) -> FieldSet {
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        FieldSet { field, words, len }
    }

    fn negated(&self) -> FieldSet {
        let mut out = Self::blank(self.field);
        for x in self.iter() {
            out.insert(self.field.neg(x));
        }
        out
    }
}

impl std::fmt::Debug for FieldSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FieldSet(q={}, ", self.field.modulus())?;
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, ")")
    }
}

impl Serialize for FieldSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len))?;
        for x in self.iter() {
            seq.serialize_element(&x)?;
        }
        seq.end()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some((self.index * WORD + bit) as u64);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a> IntoIterator for &'a FieldSet {
    type Item = u64;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

fn same_field(a: &FieldSet, b: &FieldSet) -> Result<()> {
    if a.field != b.field {
        return Err(Error::FieldMismatch {
            left: a.field.modulus(),
            right: b.field.modulus(),
        });
    }
    Ok(())
}

fn same_field_elem(a: &FieldSet, x: &FieldElement) -> Result<()> {
    if a.field != x.field() {
        return Err(Error::FieldMismatch {
            left: a.field.modulus(),
            right: x.field().modulus(),
        });
    }
    Ok(())
}

/// 64 bits of `src` starting at bit `pos`; bits past the end read as zero.
#[inline]
fn read_bits(src: &[u64], pos: usize) -> u64 {
    let (w, o) = (pos / WORD, pos % WORD);
    let mut out = src.get(w).copied().unwrap_or(0) >> o;
    if o > 0 {
        if let Some(next) = src.get(w + 1) {
            out |= next << (WORD - o);
        }
    }
    out
}

/// ORs `len` bits of `src` starting at `src_lo` into `dst` starting at `dst_lo`.
fn or_segment(dst: &mut [u64], src: &[u64], src_lo: usize, dst_lo: usize, len: usize) {
    let end = dst_lo + len;
    let mut d = dst_lo;
    while d < end {
        let off = d % WORD;
        let take = (WORD - off).min(end - d);
        let mask = if take == WORD { u64::MAX } else { (1u64 << take) - 1 };
        let bits = read_bits(src, src_lo + (d - dst_lo)) & mask;
        dst[d / WORD] |= bits << off;
        d += take;
    }
}

/// `dst |= src` rotated so that bit `i` lands on `(i + shift) mod q`.
fn or_rotated(dst: &mut [u64], src: &[u64], q: usize, shift: usize) {
    if shift == 0 {
        for (d, s) in dst.iter_mut().zip(src) {
            *d |= s;
        }
        return;
    }
    or_segment(dst, src, 0, shift, q - shift);
    or_segment(dst, src, q - shift, 0, shift);
}

fn sum_set_kernel(a: &FieldSet, b: &FieldSet) -> FieldSet {
    let field = a.field;
    if a.is_empty() || b.is_empty() {
        return FieldSet::blank(field);
    }
    let (small, large) = if a.len <= b.len { (a, b) } else { (b, a) };
    let nwords = large.words.len();
    if large.len < 2 * nwords {
        let mut out = FieldSet::blank(field);
        for x in small {
            for y in large {
                out.insert(field.add(x, y));
            }
        }
        return out;
    }
    let q = field.size();
    let mut acc = vec![0u64; nwords];
    for shift in small {
        or_rotated(&mut acc, &large.words, q, shift as usize);
        if acc.iter().map(|w| w.count_ones() as usize).sum::<usize>() == q {
            break;
        }
    }
    FieldSet::from_words(field, acc)
}

/// `{ a + b : a ∈ A, b ∈ B }`.
pub fn sum_set(a: &FieldSet, b: &FieldSet) -> Result<FieldSet> {
    same_field(a, b)?;
    Ok(sum_set_kernel(a, b))
}

/// `{ a · b : a ∈ A, b ∈ B }`.
pub fn product_set(a: &FieldSet, b: &FieldSet) -> Result<FieldSet> {
    same_field(a, b)?;
    let field = a.field;
    let mut out = FieldSet::blank(field);
    let (small, large) = if a.len <= b.len { (a, b) } else { (b, a) };
    for x in small {
        if x == 0 {
            out.insert(0);
            continue;
        }
        for y in large {
            out.insert(field.mul(x, y));
        }
    }
    Ok(out)
}

/// `{ a − b : a ∈ A, b ∈ B }`.
pub fn difference_set(a: &FieldSet, b: &FieldSet) -> Result<FieldSet> {
    same_field(a, b)?;
    Ok(sum_set_kernel(a, &b.negated()))
}

/// `{ a / b : a ∈ A, b ∈ B }`; `B` must avoid 0.
pub fn ratio_set(a: &FieldSet, b: &FieldSet) -> Result<FieldSet> {
    same_field(a, b)?;
    if b.contains(0) {
        return Err(Error::ZeroDenominator);
    }
    let field = a.field;
    let inverses = FieldSet::from_residues(field, b.iter().map(|y| field.inv(y).expect("nonzero")))?;
    product_set(a, &inverses)
}

/// `{ λa : a ∈ A }`.
pub fn dilate(a: &FieldSet, lambda: FieldElement) -> Result<FieldSet> {
    same_field_elem(a, &lambda)?;
    let field = a.field;
    let mut out = FieldSet::blank(field);
    for x in a {
        out.insert(field.mul(x, lambda.value()));
    }
    Ok(out)
}

/// `S_ξ(A) = { a + bξ : a, b ∈ A }`.
pub fn s_xi_set(a: &FieldSet, xi: FieldElement) -> Result<FieldSet> {
    let scaled = dilate(a, xi)?;
    Ok(sum_set_kernel(a, &scaled))
}

/// `P = { a(b − c) : a, b, c ∈ A }`, the set each half of `I(A)` ranges over.
pub fn i_summand_set(a: &FieldSet) -> Result<FieldSet> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    product_set(a, &difference_set(a, a)?)
}

/// `I(A) = { a₁(a₂ − a₃) + a₄(a₅ − a₆) }`, computed as `P + P`.
pub fn i_set(a: &FieldSet) -> Result<FieldSet> {
    let p = i_summand_set(a)?;
    Ok(sum_set_kernel(&p, &p))
}

/// Sparse multiplicity table over field residues. Only nonzero entries are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountTable {
    #[serde(skip)]
    field: PrimeField,
    counts: BTreeMap<u64, u64>,
}

impl CountTable {
    fn build<I: Iterator<Item = u64>>(field: PrimeField, pairs: u128, keys: I) -> CountTable {
        let q = field.size();
        let counts = if q <= 1 << 20 || pairs * 4 >= q as u128 {
            let mut dense = vec![0u64; q];
            for k in keys {
                dense[k as usize] += 1;
            }
            dense
                .into_iter()
                .enumerate()
                .filter(|(_, c)| *c > 0)
                .map(|(s, c)| (s as u64, c))
                .collect()
        } else {
            let mut sparse = BTreeMap::new();
            for k in keys {
                *sparse.entry(k).or_insert(0) += 1;
            }
            sparse
        };
        CountTable { field, counts }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn get(&self, s: u64) -> u64 {
        self.counts.get(&s).copied().unwrap_or(0)
    }

    /// `(residue, count)` for every nonzero entry, ascending by residue.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&s, &c)| (s, c))
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.counts.values().map(|&c| c as u128 * c as u128).sum()
    }

    pub fn support(&self) -> FieldSet {
        let mut out = FieldSet::blank(self.field);
        for &s in self.counts.keys() {
            out.insert(s);
        }
        out
    }
}

/// `f_ξ(s) = |{ (a, b) ∈ A² : a + bξ = s }|`.
pub fn repr_counts(a: &FieldSet, xi: FieldElement) -> Result<CountTable> {
    same_field_elem(a, &xi)?;
    let field = a.field;
    let xv = xi.value();
    let pairs = a.len as u128 * a.len as u128;
    Ok(CountTable::build(
        field,
        pairs,
        a.iter().flat_map(|x| a.iter().map(move |y| field.add(x, field.mul(y, xv)))),
    ))
}

/// `Σ_s f_ξ(s)²`, the number of solutions of `a₁ + b₁ξ = a₂ + b₂ξ`.
pub fn additive_energy_of_map(a: &FieldSet, xi: FieldElement) -> Result<u128> {
    Ok(repr_counts(a, xi)?.sum_of_squares())
}

/// Multiplicities of `x / y` over `(x, y) ∈ X × Y`; `Y` must avoid 0.
pub fn ratio_counts(x: &FieldSet, y: &FieldSet) -> Result<CountTable> {
    same_field(x, y)?;
    if y.contains(0) {
        return Err(Error::ZeroDenominator);
    }
    let field = x.field;
    let inverses: Vec<u64> = y.iter().map(|v| field.inv(v).expect("nonzero")).collect();
    let pairs = x.len as u128 * y.len as u128;
    Ok(CountTable::build(
        field,
        pairs,
        x.iter().flat_map(|a| inverses.iter().map(move |&b| field.mul(a, b))),
    ))
}

/// Multiplicities of `x · y` over `(x, y) ∈ X × Y`.
pub fn product_counts(x: &FieldSet, y: &FieldSet) -> Result<CountTable> {
    same_field(x, y)?;
    let field = x.field;
    let pairs = x.len as u128 * y.len as u128;
    Ok(CountTable::build(
        field,
        pairs,
        x.iter().flat_map(|a| y.iter().map(move |b| field.mul(a, b))),
    ))
}

/// Multiplicities of `x − y` over `(x, y) ∈ X × Y`.
pub fn difference_counts(x: &FieldSet, y: &FieldSet) -> Result<CountTable> {
    same_field(x, y)?;
    let field = x.field;
    let pairs = x.len as u128 * y.len as u128;
    Ok(CountTable::build(
        field,
        pairs,
        x.iter().flat_map(|a| y.iter().map(move |b| field.sub(a, b))),
    ))
}
