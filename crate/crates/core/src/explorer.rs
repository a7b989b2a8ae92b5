//! Exhaustive and family scans over small prime fields.
//!
//! Every visited set goes through [`verify_all`], so each asserted bound is
//! re-checked per set; the first failure (in visit order) aborts the scan.
//! Records come back in visit order whatever the worker count, and running
//! minima are folded sequentially over them, so output is identical for any
//! degree of parallelism.

use std::io::Write;
use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::mult_structure::{self, SubgroupData};
use crate::ratio::{isqrt, ExactRatio};
use crate::setops::{self, FieldSet};
use crate::verify::{verify_all, PowerCheck, VerificationReport};

/// Default cap on subset visits per scan.
pub const DEFAULT_SCAN_BUDGET: u128 = 10_000_000;
/// Largest q scanned over every size without restriction.
pub const MAX_UNRESTRICTED_Q: u64 = 17;
/// Subset cap once q exceeds [`MAX_UNRESTRICTED_Q`].
pub const RESTRICTED_SUBSET_CAP: u128 = 1_000_000;
/// Environment variable overriding [`DEFAULT_SCAN_BUDGET`].
pub const BUDGET_ENV: &str = "SUMPROD_SCAN_BUDGET";

const MASK_BITS: u64 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanLimits {
    pub budget: u128,
}

impl Default for ScanLimits {
    fn default() -> Self {
        ScanLimits { budget: DEFAULT_SCAN_BUDGET }
    }
}

impl ScanLimits {
    /// Reads [`BUDGET_ENV`], falling back to the default.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(|budget| ScanLimits { budget })
            .unwrap_or_default()
    }

    fn check(&self, q: u64, subsets: u128) -> Result<()> {
        let limit = if q > MAX_UNRESTRICTED_Q {
            self.budget.min(RESTRICTED_SUBSET_CAP)
        } else {
            self.budget
        };
        if subsets > limit || q > MASK_BITS {
            return Err(Error::ScanTooLarge { subsets, limit });
        }
        Ok(())
    }
}

/// Set families for structured scans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// `{start, start+1, …, start+len−1}` mod q.
    Interval { start: u64, len: u64 },
    /// `{start·g^k : 0 ≤ k < len}`.
    Geometric { generator: u64, len: u64, start: u64 },
    /// `size` distinct residues drawn uniformly with a seeded ChaCha8 stream per trial.
    Random { size: u64, seed: u64 },
    /// The cyclic subgroup `⟨g⟩` of F*.
    Subgroup { generator: u64 },
    /// The first `pieces[i]` members (ascending) of the `i`-th coset of `⟨g⟩`.
    CosetUnion { generator: u64, pieces: Vec<usize> },
    Explicit { residues: Vec<u64> },
}

impl FamilySpec {
    pub fn is_random(&self) -> bool {
        matches!(self, FamilySpec::Random { .. })
    }

    /// Realises the family in `field`; `trial` selects the random stream.
    pub fn generate(&self, field: PrimeField, trial: u64) -> Result<FieldSet> {
        let q = field.modulus();
        match self {
            FamilySpec::Interval { start, len } => {
                FieldSet::from_reduced(field, (0..*len.min(&q)).map(|k| (start % q + k) % q))
            }
            FamilySpec::Geometric { generator, len, start } => {
                let g = generator % q;
                let mut x = start % q;
                let mut out = Vec::with_capacity(*len as usize);
                for _ in 0..*len {
                    out.push(x);
                    x = field.mul(x, g);
                }
                FieldSet::from_residues(field, out)
            }
            FamilySpec::Random { size, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(trial);
                let picked = sample(&mut rng, q as usize, (*size).min(q) as usize);
                FieldSet::from_residues(field, picked.into_iter().map(|x| x as u64))
            }
            FamilySpec::Subgroup { generator } => {
                Ok(SubgroupData::cyclic(field, *generator)?.elements().clone())
            }
            FamilySpec::CosetUnion { generator, pieces } => {
                let g = SubgroupData::cyclic(field, *generator)?;
                let d = mult_structure::coset_decomposition(&g);
                let mut out = Vec::new();
                for (coset, &take) in d.cosets().iter().zip(pieces) {
                    out.extend(coset.members.iter().take(take));
                }
                FieldSet::from_residues(field, out)
            }
            FamilySpec::Explicit { residues } => FieldSet::from_residues(field, residues.iter().copied()),
        }
    }

    /// Canonical textual form, e.g. `geo:g=3,len=10`.
    pub fn label(&self) -> String {
        match self {
            FamilySpec::Interval { start, len } => format!("interval:start={start},len={len}"),
            FamilySpec::Geometric { generator, len, start: 1 } => format!("geo:g={generator},len={len}"),
            FamilySpec::Geometric { generator, len, start } => {
                format!("geo:g={generator},len={len},start={start}")
            }
            FamilySpec::Random { size, seed } => format!("random:size={size},seed={seed}"),
            FamilySpec::Subgroup { generator } => format!("subgroup:g={generator}"),
            FamilySpec::CosetUnion { generator, pieces } => {
                let p: Vec<String> = pieces.iter().map(|x| x.to_string()).collect();
                format!("cosets:g={generator},pieces={}", p.join("+"))
            }
            FamilySpec::Explicit { residues } => explicit_label(residues.iter().copied()),
        }
    }
}

/// `explicit:a,b,c` for the given residues.
pub fn explicit_label<I: IntoIterator<Item = u64>>(residues: I) -> String {
    let parts: Vec<String> = residues.into_iter().map(|x| x.to_string()).collect();
    format!("explicit:{}", parts.join(","))
}

/// One visited set with the running minima up to and including it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub q: u64,
    pub family: String,
    pub report: VerificationReport,
    pub min_theorem2: Option<ExactRatio>,
    pub min_corollary2: Option<ExactRatio>,
    pub min_epsilon: Option<f64>,
}

/// A minimum together with the first set attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremum {
    pub lhs: u128,
    pub rhs: u128,
    pub approx: f64,
    pub family: String,
    pub argmin: FieldSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonExtremum {
    pub value: f64,
    pub family: String,
    pub argmin: FieldSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub q: u64,
    pub visited: usize,
    pub min_theorem2: Option<Extremum>,
    pub min_corollary2: Option<Extremum>,
    pub min_epsilon: Option<EpsilonExtremum>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutcome {
    pub records: Vec<ScanRecord>,
    pub summary: ScanSummary,
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvariantViolation(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn verify_in_order(sets: Vec<(String, FieldSet)>, workers: usize) -> Result<Vec<(String, VerificationReport)>> {
    let results: Vec<Result<VerificationReport>> =
        with_workers(workers, || sets.par_iter().map(|(_, a)| verify_all(a)).collect())?;
    sets.into_iter()
        .zip(results)
        .map(|((label, a), r)| {
            r.map(|rep| (label, rep)).map_err(|e| match e {
                Error::InvariantViolation(msg) => {
                    Error::InvariantViolation(format!("{msg} [set {}]", explicit_label(a.iter())))
                }
                other => other,
            })
        })
        .collect()
}

fn fold_minima(q: u64, verified: Vec<(String, VerificationReport)>) -> ScanOutcome {
    let mut summary = ScanSummary {
        q,
        visited: verified.len(),
        min_theorem2: None,
        min_corollary2: None,
        min_epsilon: None,
    };
    let improves = |cur: &Option<Extremum>, c: &PowerCheck| {
        cur.as_ref()
            .is_none_or(|m| c.exact().cmp_value(&ExactRatio::new(m.lhs, m.rhs)).is_lt())
    };
    let extremum = |c: &PowerCheck, family: &str, set: &FieldSet| Extremum {
        lhs: c.lhs,
        rhs: c.rhs,
        approx: c.ratio,
        family: family.to_string(),
        argmin: set.clone(),
    };
    let mut records = Vec::with_capacity(verified.len());
    for (family, report) in verified {
        if let Some(c) = &report.theorem2 {
            if improves(&summary.min_theorem2, c) {
                summary.min_theorem2 = Some(extremum(c, &family, &report.set));
            }
        }
        if let Some(c) = &report.corollary2 {
            if improves(&summary.min_corollary2, c) {
                summary.min_corollary2 = Some(extremum(c, &family, &report.set));
            }
        }
        if let Some(e) = report.epsilon {
            if summary.min_epsilon.as_ref().is_none_or(|m| e < m.value) {
                summary.min_epsilon = Some(EpsilonExtremum {
                    value: e,
                    family: family.clone(),
                    argmin: report.set.clone(),
                });
            }
        }
        records.push(ScanRecord {
            q,
            family,
            report,
            min_theorem2: summary.min_theorem2.as_ref().map(|m| ExactRatio::new(m.lhs, m.rhs)),
            min_corollary2: summary.min_corollary2.as_ref().map(|m| ExactRatio::new(m.lhs, m.rhs)),
            min_epsilon: summary.min_epsilon.as_ref().map(|m| m.value),
        });
    }
    ScanOutcome { records, summary }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of subsets of a `q`-element field with size in `sizes`.
pub fn subset_count(q: u64, sizes: &RangeInclusive<usize>) -> u128 {
    let lo = *sizes.start() as u64;
    let hi = (*sizes.end() as u64).min(q);
    (lo..=hi).map(|k| binomial(q, k)).sum()
}

/// All masks over `q` bits with popcount in `sizes`, ascending.
fn masks(q: u64, sizes: &RangeInclusive<usize>) -> Vec<u128> {
    let hi = (*sizes.end() as u64).min(q);
    let lo = *sizes.start() as u64;
    let mut out = Vec::new();
    for k in lo..=hi {
        if k == 0 {
            out.push(0);
            continue;
        }
        // Gosper's hack: next larger integer with the same popcount
        let mut m: u128 = if k == 128 { u128::MAX } else { (1u128 << k) - 1 };
        loop {
            out.push(m);
            if k == q {
                break;
            }
            let low = m & m.wrapping_neg();
            let ripple = m + low;
            if q < 128 && ripple >> q != 0 {
                break;
            }
            if q == 128 && ripple == 0 {
                break;
            }
            m = (((ripple ^ m) >> 2) / low) | ripple;
            if q < 128 && m >> q != 0 {
                break;
            }
        }
    }
    out.sort_unstable();
    out
}

fn set_from_mask(field: PrimeField, mask: u128) -> Result<FieldSet> {
    FieldSet::from_residues(field, (0..field.modulus()).filter(|&i| mask >> i & 1 == 1))
}

/// Visits every `A ⊆ F` with `|A|` in `sizes`, in ascending residue-bitmask order.
///
/// Allowed when the visit count fits the budget and, for `q > 17`, also fits
/// [`RESTRICTED_SUBSET_CAP`]. The empty set is never visited.
pub fn exhaustive_scan(
    field: PrimeField,
    sizes: RangeInclusive<usize>,
    limits: &ScanLimits,
    workers: usize,
) -> Result<ScanOutcome> {
    let q = field.modulus();
    let sizes = (*sizes.start()).max(1)..=*sizes.end();
    limits.check(q, subset_count(q, &sizes))?;
    let sets = masks(q, &sizes)
        .into_iter()
        .map(|m| {
            let a = set_from_mask(field, m)?;
            Ok((explicit_label(a.iter()), a))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_minima(q, verify_in_order(sets, workers)?))
}

/// One record per trial for random families, a single record otherwise.
pub fn family_scan(field: PrimeField, spec: &FamilySpec, trials: u64, workers: usize) -> Result<ScanOutcome> {
    let label = spec.label();
    let count = if spec.is_random() { trials } else { trials.min(1) };
    let sets = (0..count)
        .map(|t| {
            let a = spec.generate(field, t)?;
            if a.is_empty() {
                return Err(Error::EmptySet);
            }
            let name = if spec.is_random() { format!("{label}/trial={t}") } else { label.clone() };
            Ok((name, a))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_minima(field.modulus(), verify_in_order(sets, workers)?))
}

/// Fixed CSV header for scan output.
pub const CSV_HEADER: [&str; 11] = [
    "q", "family", "size", "sumset", "prodset", "diffset", "iset", "t2_lhs_sq", "t2_rhs_int", "epsilon",
    "t3_pass",
];

/// Writes one row per record under [`CSV_HEADER`]; inapplicable fields are empty.
pub fn write_csv<W: Write>(records: &[ScanRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        let r = &rec.report;
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.q.to_string(),
            rec.family.clone(),
            r.size.to_string(),
            r.sumset.to_string(),
            r.prodset.to_string(),
            r.diffset.to_string(),
            r.iset.to_string(),
            opt(r.theorem2.map(|c| c.lhs.to_string())),
            opt(r.theorem2.map(|c| c.rhs.to_string())),
            opt(r.epsilon.map(|e| format!("{e:.6}"))),
            opt(r.theorem3_pass.map(|p| p.to_string())),
        ])?;
    }
    w.flush()
}

/// `Σ_{t≤T} N_t` over the descending-`N_t` coset order, against `(|G|·T)^{2/3}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbkPartialSum {
    pub t: u64,
    pub cosets: usize,
    pub partial_sum: u64,
    pub reference: f64,
    /// `partial_sum / reference`; `None` when the reference is 0.
    pub ratio: Option<f64>,
    /// `|G|⁴·T < q³`.
    pub hypothesis: bool,
}

pub fn hbk_partial_sums(g: &SubgroupData, t: u64) -> Result<HbkPartialSum> {
    let stats = mult_structure::coset_diff_counts(g)?;
    let partial_sum = stats.records.iter().take(t.min(usize::MAX as u64) as usize).map(|r| r.n).sum();
    let order = g.order() as u128;
    let reference = ((g.order() as f64) * t as f64).powf(2.0 / 3.0);
    let q = g.field().modulus() as u128;
    Ok(HbkPartialSum {
        t,
        cosets: stats.records.len(),
        partial_sum,
        reference,
        ratio: (reference > 0.0).then(|| partial_sum as f64 / reference),
        hypothesis: order.pow(4).saturating_mul(t as u128) < q.pow(3),
    })
}

/// Measured difference-set growth of a subset of a subgroup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma5Measurement {
    pub size: usize,
    pub group_order: usize,
    pub diffset: usize,
    /// `|B| < √q`.
    pub hypothesis: bool,
    /// `(|B−B|·|G|)²` vs `|B|⁵`.
    pub growth: PowerCheck,
    pub energy: u128,
    /// `(Σ_t M_t)²` vs `|B|³·|G|²`.
    pub energy_shape: PowerCheck,
    /// `⌊|B|^{3/2} / |G|⌋`.
    pub t: u64,
    pub partial: HbkPartialSum,
}

pub fn lemma5_empirical(b: &FieldSet, g: &SubgroupData) -> Result<Lemma5Measurement> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let stats = mult_structure::lemma5_stats(b, g)?;
    let diffset = setops::difference_set(b, b)?.len();
    let n = b.len() as u128;
    let order = g.order() as u128;
    let q = b.field().modulus() as u128;
    let hypothesis = n * n < q;
    let energy = stats.total_m();
    let t = isqrt(n.pow(3) / order.pow(2)) as u64;
    Ok(Lemma5Measurement {
        size: b.len(),
        group_order: g.order(),
        diffset,
        hypothesis,
        growth: PowerCheck::measured((diffset as u128 * order).pow(2), n.pow(5), hypothesis),
        energy,
        energy_shape: PowerCheck::measured(energy.pow(2), n.pow(3) * order.pow(2), hypothesis),
        t,
        partial: hbk_partial_sums(g, t)?,
    })
}
