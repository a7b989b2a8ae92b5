//! Per-set verification of the lower bounds on `|I(A)|` and of the sum-product
//! exponent.
//!
//! Fractional powers are cleared before comparing: `|A−A|·|I(A)|` against
//! `|A|^{5/2}` is checked as a comparison of squares, `|I(A)|` against
//! `|A|^{5/4}` as one of fourth powers. Only bounds with explicit constants are
//! asserted; the rest are measured.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mult_structure;
use crate::ratio::ExactRatio;
use crate::setops::{self, FieldSet};
use crate::witness::{self, WitnessReport};

/// Integer-cleared comparison `lhs` vs `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerCheck {
    pub lhs: u128,
    pub rhs: u128,
    /// `lhs / rhs`, display only.
    pub ratio: f64,
    /// Whether the set satisfies the size hypothesis of the bound.
    pub hypothesis: bool,
}

impl PowerCheck {
    pub fn measured(lhs: u128, rhs: u128, hypothesis: bool) -> Self {
        PowerCheck {
            lhs,
            rhs,
            ratio: lhs as f64 / rhs as f64,
            hypothesis,
        }
    }

    pub fn exact(&self) -> ExactRatio {
        ExactRatio::new(self.lhs, self.rhs)
    }
}

/// `|A ∩ G₁|` against `|A|` for the heavy coset of `A \ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CosetShare {
    pub subgroup_order: usize,
    pub representative: u64,
    pub intersection: usize,
    pub set_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub q: u64,
    pub set: FieldSet,
    pub size: usize,
    pub sumset: usize,
    pub prodset: usize,
    pub diffset: usize,
    pub iset: usize,
    /// `(|A−A|·|I(A)|)²` vs `|A|⁵`.
    pub theorem2: Option<PowerCheck>,
    /// `|I(A)|⁴` vs `|A|⁵`.
    pub corollary2: Option<PowerCheck>,
    /// `log max(|A+A|, |A·A|) / log |A| − 1`.
    pub epsilon: Option<f64>,
    pub theorem3_pass: Option<bool>,
    pub lemma3: Option<CosetShare>,
    /// Set when 0 was removed before running the structure pipeline.
    pub zero_stripped: bool,
    pub witness: Option<WitnessReport>,
}

impl VerificationReport {
    fn small_hypothesis(&self) -> bool {
        (self.size as u128).pow(2) < self.q as u128
    }

    fn large_hypothesis(&self) -> bool {
        (self.size as u128).pow(2) > self.q as u128
    }
}

struct Computed {
    report: VerificationReport,
    i_set: FieldSet,
}

fn base(a: &FieldSet) -> Result<Computed> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let sum = setops::sum_set(a, a)?;
    let prod = setops::product_set(a, a)?;
    let diff = setops::difference_set(a, a)?;
    let i_set = setops::i_set(a)?;
    if diff.len() < a.len() || i_set.len() < diff.len() {
        return Err(Error::InvariantViolation(format!(
            "cardinality chain |I(A)| >= |A-A| >= |A| fails for {:?}",
            a.to_vec()
        )));
    }
    Ok(Computed {
        report: VerificationReport {
            q: a.field().modulus(),
            set: a.clone(),
            size: a.len(),
            sumset: sum.len(),
            prodset: prod.len(),
            diffset: diff.len(),
            iset: i_set.len(),
            theorem2: None,
            corollary2: None,
            epsilon: None,
            theorem3_pass: None,
            lemma3: None,
            zero_stripped: false,
            witness: None,
        },
        i_set,
    })
}

fn fill_theorem2(r: &mut VerificationReport) {
    let lhs = (r.diffset as u128 * r.iset as u128).pow(2);
    r.theorem2 = Some(PowerCheck::measured(lhs, (r.size as u128).pow(5), r.small_hypothesis()));
}

fn fill_corollary2(r: &mut VerificationReport) {
    r.corollary2 = Some(PowerCheck::measured(
        (r.iset as u128).pow(4),
        (r.size as u128).pow(5),
        r.small_hypothesis(),
    ));
}

fn fill_theorem1(r: &mut VerificationReport) {
    if r.size >= 2 {
        let top = r.sumset.max(r.prodset) as f64;
        r.epsilon = Some(top.ln() / (r.size as f64).ln() - 1.0);
    }
}

fn fill_theorem3(r: &mut VerificationReport) -> Result<()> {
    let pass = 2 * r.iset as u64 >= r.q;
    r.theorem3_pass = Some(pass);
    if !pass {
        return Err(Error::InvariantViolation(format!(
            "|I(A)| = {} < q/2 for A = {:?}, q = {}",
            r.iset,
            r.set.to_vec(),
            r.q
        )));
    }
    Ok(())
}

/// `|A−A|·|I(A)|` against `|A|^{5/2}`. Sets outside `|A| < √q` are flagged, not rejected.
pub fn verify_theorem2(a: &FieldSet) -> Result<VerificationReport> {
    let mut r = base(a)?.report;
    fill_theorem2(&mut r);
    Ok(r)
}

/// `|I(A)|` against `|A|^{5/4}`.
pub fn verify_corollary2(a: &FieldSet) -> Result<VerificationReport> {
    let mut r = base(a)?.report;
    fill_corollary2(&mut r);
    Ok(r)
}

/// Records the empirical exponent; nothing is asserted.
pub fn verify_theorem1(a: &FieldSet) -> Result<VerificationReport> {
    let mut r = base(a)?.report;
    fill_theorem1(&mut r);
    Ok(r)
}

/// Asserts `2·|I(A)| ≥ q` for `|A| > √q`.
pub fn verify_theorem3(a: &FieldSet) -> Result<VerificationReport> {
    let mut r = base(a)?.report;
    if !r.large_hypothesis() {
        return Err(Error::HypothesisNotMet(format!(
            "|A| > sqrt(q) requires |A|^2 > q, got |A|^2 = {} and q = {}",
            r.size * r.size,
            r.q
        )));
    }
    fill_theorem3(&mut r)?;
    Ok(r)
}

/// Every applicable check plus a witness.
///
/// Small-set bounds apply when `|A|² < q` and the large-set bound when `|A|² > q`.
/// The structure pipeline (heavy coset, ξ in the popular-ratio subgroup) runs on
/// `A \ {0}`. For large sets the witness is the energy-averaging one over F*,
/// otherwise the popular-ratio one when `|A \ {0}| > 1`.
pub fn verify_all(a: &FieldSet) -> Result<VerificationReport> {
    let Computed { mut report, i_set } = base(a)?;
    if report.small_hypothesis() {
        fill_theorem2(&mut report);
        fill_corollary2(&mut report);
        fill_theorem1(&mut report);
    }
    let stripped = a.without(0);
    report.zero_stripped = stripped.len() != a.len();
    if !stripped.is_empty() {
        let heavy = mult_structure::heavy_coset(&stripped)?;
        report.lemma3 = Some(CosetShare {
            subgroup_order: heavy.subgroup.order(),
            representative: heavy.representative,
            intersection: heavy.intersection.len(),
            set_size: stripped.len(),
        });
    }
    if report.large_hypothesis() {
        fill_theorem3(&mut report)?;
        report.witness = Some(witness::theorem3_witness_in(a, Some(&i_set))?);
    } else if stripped.len() > 1 {
        let stripped_i = if report.zero_stripped {
            setops::i_set(&stripped)?
        } else {
            i_set.clone()
        };
        report.witness = Some(witness::select_xi_lemma4_in(&stripped, Some(&stripped_i))?);
    }
    if let Some(w) = &report.witness {
        if w.certified_lower_bound > report.iset as u64 || !w.embedded.is_subset(&i_set) {
            return Err(Error::InvariantViolation(format!(
                "witness bound {} exceeds |I(A)| = {} for {:?}",
                w.certified_lower_bound,
                report.iset,
                a.to_vec()
            )));
        }
    }
    Ok(report)
}
