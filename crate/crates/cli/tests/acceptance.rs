//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with the optimised test profile; timing limits are wall-clock.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use sumprod_core::explorer::{self, FamilySpec, ScanLimits};
use sumprod_core::mult_structure::{self, all_subgroups, SubgroupData};
use sumprod_core::ratio::ExactRatio;
use sumprod_core::setops::{self, FieldSet};
use sumprod_core::verify;
use sumprod_core::witness;
use sumprod_core::{make_field, PrimeField};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn field(q: u64) -> PrimeField {
    make_field(q).unwrap()
}

/// Every subset of F_q (as a mask over residues), optionally skipping 0.
fn subsets(q: u64, nonzero: bool) -> impl Iterator<Item = FieldSet> {
    let f = field(q);
    (1u64..(1 << q)).filter(move |m| !nonzero || m & 1 == 0).map(move |m| FieldSet::from_mask(f, m).unwrap())
}

fn brute_i_set(a: &FieldSet) -> Vec<u64> {
    let q = a.field().modulus() as i64;
    let xs: Vec<i64> = a.iter().map(|x| x as i64).collect();
    let mut hit = vec![false; q as usize];
    for &a1 in &xs {
        for &a2 in &xs {
            for &a3 in &xs {
                for &a4 in &xs {
                    for &a5 in &xs {
                        for &a6 in &xs {
                            hit[(a1 * (a2 - a3) + a4 * (a5 - a6)).rem_euclid(q) as usize] = true;
                        }
                    }
                }
            }
        }
    }
    (0..q as u64).filter(|&v| hit[v as usize]).collect()
}

fn brute_s_xi_size(a: &FieldSet, xi: u64) -> usize {
    let q = a.field().modulus();
    let mut hit = vec![false; q as usize];
    for x in a.iter() {
        for y in a.iter() {
            hit[((x + y * xi) % q) as usize] = true;
        }
    }
    hit.iter().filter(|&&h| h).count()
}

fn brute_product_size(a: &FieldSet) -> usize {
    let q = a.field().modulus();
    let mut hit = vec![false; q as usize];
    for x in a.iter() {
        for y in a.iter() {
            hit[((x * y) % q) as usize] = true;
        }
    }
    hit.iter().filter(|&&h| h).count()
}

fn brute_diff_size(a: &FieldSet) -> usize {
    let q = a.field().modulus();
    let mut hit = vec![false; q as usize];
    for x in a.iter() {
        for y in a.iter() {
            hit[((x + q - y) % q) as usize] = true;
        }
    }
    hit.iter().filter(|&&h| h).count()
}

fn within(start: Instant, limit: Duration, summary: String) -> Check {
    let elapsed = start.elapsed();
    ensure!(elapsed < limit, "took {elapsed:.2?}, limit {limit:?}");
    Ok(format!("{summary} in {elapsed:.2?}"))
}

fn c1_i_set_oracle() -> Check {
    let start = Instant::now();
    let mut checked = 0;
    for q in [5u64, 7, 11] {
        for a in subsets(q, false).filter(|a| a.len() <= 4) {
            let fast = setops::i_set(&a).unwrap().to_vec();
            ensure!(fast == brute_i_set(&a), "q = {q}, A = {a:?}");
            checked += 1;
        }
    }
    within(start, Duration::from_secs(10), format!("{checked} sets match 6-tuple enumeration"))
}

fn c2_lemma1() -> Check {
    let start = Instant::now();
    let mut embedded = 0;
    for q in [3u64, 5, 7, 11, 13] {
        let f = field(q);
        for a in subsets(q, true) {
            let i = setops::i_set(&a).unwrap();
            let n2 = a.len() * a.len();
            for xi in 1..q {
                let s_size = brute_s_xi_size(&a, xi);
                if s_size >= n2 {
                    continue;
                }
                let w = witness::embed_witness_in(&a, f.element(xi).unwrap(), &i)
                    .map_err(|e| format!("q = {q}, A = {a:?}, xi = {xi}: {e}"))?;
                ensure!(w.embedded.len() == s_size, "|S| != |S_xi| for {a:?}, xi = {xi}");
                ensure!(w.embedded.is_subset(&i), "S not in I(A) for {a:?}, xi = {xi}");
                // each a + b·xi, scaled by b1 − b2, is a(b1 − b2) + b(a2 − a1)
                let c = w.collision.unwrap();
                ensure!(c.b1 != c.b2 && a.contains(c.a1) && a.contains(c.a2), "bad collision {c:?}");
                for x in a.iter() {
                    for y in a.iter() {
                        let lhs = f.mul(f.sub(c.b1, c.b2), f.add(x, f.mul(y, xi)));
                        let rhs = f.add(f.mul(x, f.sub(c.b1, c.b2)), f.mul(y, f.sub(c.a2, c.a1)));
                        ensure!(lhs == rhs && w.embedded.contains(lhs), "representation fails for {a:?}");
                    }
                }
                embedded += 1;
            }
        }
    }
    within(start, Duration::from_secs(60), format!("{embedded} embeddings certified"))
}

fn c3_lemma2() -> Check {
    let mut checked = 0;
    for q in [5u64, 7, 11, 13] {
        let groups: Vec<SubgroupData> = all_subgroups(field(q)).unwrap().into_iter().filter(|g| g.order() > 1).collect();
        for a in subsets(q, false) {
            for g in &groups {
                let c = witness::select_xi_lemma2(&a, g).map_err(|e| format!("q = {q}, A = {a:?}: {e}"))?;
                ensure!(g.elements().contains(c.xi), "xi {} outside G", c.xi);
                let s = brute_s_xi_size(&a, c.xi) as u128;
                let (n2, go) = ((a.len() * a.len()) as u128, g.order() as u128);
                ensure!(s * (n2 + go) >= n2 * go, "floor fails: q = {q}, A = {a:?}, |G| = {go}, |S| = {s}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (A, G) pairs meet |S|(|A|^2+|G|) >= |A|^2|G|"))
}

fn c4_lemma3() -> Check {
    let mut checked = 0;
    for q in [3u64, 5, 7, 11, 13] {
        let f = field(q);
        for a in subsets(q, true) {
            let h = mult_structure::heavy_coset(&a).map_err(|e| format!("q = {q}: {e}"))?;
            let coset: Vec<u64> = h.subgroup.elements().iter().map(|g| f.mul(g, h.representative)).collect();
            let meet = a.iter().filter(|x| coset.contains(x)).count();
            ensure!(meet == h.intersection.len(), "intersection mismatch for {a:?}");
            ensure!(3 * meet >= a.len(), "3|A ∩ G1| < |A| for {a:?}");
            checked += 1;
        }
    }
    Ok(format!("{checked} sets have a coset holding a third"))
}

fn c5_lemma4() -> Check {
    let mut checked = 0;
    for q in [5u64, 7, 11, 13] {
        for a in subsets(q, true).filter(|a| a.len() > 1) {
            let w = witness::select_xi_lemma4(&a).map_err(|e| format!("q = {q}, A = {a:?}: {e}"))?;
            let g = mult_structure::generated_subgroup(&mult_structure::popular_ratios(&a).unwrap()).unwrap();
            ensure!(g.elements().contains(w.xi), "xi outside G for {a:?}");
            let s = brute_s_xi_size(&a, w.xi) as u128;
            let n = a.len() as u128;
            let pp = brute_product_size(&a) as u128;
            let go = g.order() as u128;
            ensure!(s < n * n, "|S_xi| = |A|^2 for {a:?}");
            let meets = s * 5 * pp >= n * n * n || s * (n * n + go) >= n * n * go;
            ensure!(meets, "floor fails for {a:?}: |S| = {s}, |AA| = {pp}, |G| = {go}");
            checked += 1;
        }
    }
    Ok(format!("{checked} sets admit a qualifying xi"))
}

fn c6_theorem3() -> Check {
    let start = Instant::now();
    let mut exhaustive = 0;
    for q in [5u64, 7, 11, 13] {
        for a in subsets(q, false).filter(|a| (a.len() * a.len()) as u64 > q) {
            let r = verify::verify_theorem3(&a).map_err(|e| format!("q = {q}: {e}"))?;
            ensure!(2 * r.iset as u64 >= q, "|I(A)| < q/2 for {a:?}");
            let w = witness::theorem3_witness(&a).map_err(|e| format!("q = {q}: {e}"))?;
            ensure!(w.certified_lower_bound <= r.iset as u64, "witness exceeds |I(A)|");
            exhaustive += 1;
        }
    }
    let mut random = 0;
    for q in [17u64, 19, 23, 29, 31] {
        let f = field(q);
        let min_size = (1..=q).find(|k| k * k > q).unwrap();
        for trial in 0..10_000u64 {
            let size = min_size + trial % (q - min_size + 1);
            let a = FamilySpec::Random { size, seed: 2003 }.generate(f, trial).unwrap();
            ensure!(a.len() as u64 == size, "generator gave {} of {size}", a.len());
            let i = setops::i_set(&a).unwrap();
            ensure!(2 * i.len() as u64 >= q, "|I(A)| < q/2 for q = {q}, A = {a:?}");
            random += 1;
        }
    }
    within(
        start,
        Duration::from_secs(120),
        format!("{exhaustive} exhaustive + {random} random sets satisfy 2|I(A)| >= q"),
    )
}

fn c7_lemma5() -> Check {
    let mut checked = 0;
    for q in (2u64..=31).filter(|&q| make_field(q).is_ok()) {
        let f = field(q);
        for g in all_subgroups(f).unwrap() {
            let members = g.elements().to_vec();
            let decomposition = mult_structure::coset_decomposition(&g);
            // N at every member of every coset, by pair enumeration
            let n_at = |s: u64| members.iter().flat_map(|&x| members.iter().map(move |&y| (x, y))).filter(|&(x, y)| f.sub(x, y) == s).count() as u64;
            let stats = mult_structure::coset_diff_counts(&g).map_err(|e| e.to_string())?;
            for coset in decomposition.cosets() {
                let n0 = n_at(coset.representative);
                ensure!(coset.members.iter().all(|s| n_at(s) == n0), "N_t not well defined, q = {q}");
                let rec = stats.records.iter().find(|r| r.representative == coset.representative).unwrap();
                ensure!(rec.n == n0, "N_t mismatch, q = {q}");
            }
            let k = members.len();
            for mask in 1u64..(1u64 << k) {
                if mask.count_ones() > 5 {
                    continue;
                }
                let b: Vec<u64> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| members[i]).collect();
                let bset = FieldSet::from_residues(f, b.iter().copied()).unwrap();
                let st = mult_structure::lemma5_stats(&bset, &g).map_err(|e| format!("q = {q}, B = {b:?}: {e}"))?;
                let size = b.len() as u64;
                let mut total_l = 0;
                for rec in &st.records {
                    let t = decomposition.coset_of(rec.representative).unwrap();
                    let in_coset = |s: u64| s != 0 && decomposition.coset_of(s) == Some(t);
                    let l = b.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).filter(|&(x, y)| in_coset(f.sub(x, y))).count() as u64;
                    let mut m = 0u128;
                    for &b1 in &b {
                        for &b2 in &b {
                            for &b3 in &b {
                                for &b4 in &b {
                                    let d = f.sub(b1, b2);
                                    if d == f.sub(b3, b4) && in_coset(d) {
                                        m += 1;
                                    }
                                }
                            }
                        }
                    }
                    ensure!(rec.l == Some(l) && rec.m == Some(m), "L/M mismatch, q = {q}, B = {b:?}");
                    ensure!(l <= rec.n * size, "L_t > N_t|B|, q = {q}, B = {b:?}");
                    ensure!(m <= rec.n as u128 * l as u128, "M_t > N_t L_t, q = {q}, B = {b:?}");
                    total_l += l;
                }
                ensure!(total_l == size * (size - 1), "sum L_t != |B|(|B|-1), q = {q}, B = {b:?}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (G, B) pairs satisfy the coset identities"))
}

/// Minimum (|A−A|·|I(A)|)²/|A|⁵ and |I(A)|⁴/|A|⁵ over |A|² < q, by direct enumeration.
fn brute_minima(q: u64, min_size: usize) -> (ExactRatio, ExactRatio) {
    let mut t2: Option<ExactRatio> = None;
    let mut c2: Option<ExactRatio> = None;
    for a in subsets(q, false).filter(|a| a.len() >= min_size && ((a.len() * a.len()) as u64) < q) {
        let n5 = (a.len() as u128).pow(5);
        let i = brute_i_set(&a).len() as u128;
        let d = brute_diff_size(&a) as u128;
        let r2 = ExactRatio::new((d * i).pow(2), n5);
        let rc = ExactRatio::new(i.pow(4), n5);
        if t2.is_none_or(|m| r2.cmp_value(&m).is_lt()) {
            t2 = Some(r2);
        }
        if c2.is_none_or(|m| rc.cmp_value(&m).is_lt()) {
            c2 = Some(rc);
        }
    }
    (t2.unwrap(), c2.unwrap())
}

/// Regression values: (q, smallest size scanned, theorem-2 minimum, corollary-2 minimum)
/// with each minimum as its (lhs, rhs) pair. Singletons attain 1 on both ratios, so the
/// size-2 rows are the informative ones.
const PINNED_MINIMA: [(u64, usize, (u128, u128), (u128, u128)); 6] = [
    (5, 1, (1, 1), (1, 1)),
    (7, 1, (1, 1), (1, 1)),
    (11, 1, (1, 1), (1, 1)),
    (13, 1, (1, 1), (1, 1)),
    (11, 2, (225, 32), (625, 32)),
    (13, 2, (225, 32), (625, 32)),
];

fn c8_regression() -> Check {
    let mut lines = Vec::new();
    let mut mismatches = Vec::new();
    for (q, min_size, pin_t2, pin_c2) in PINNED_MINIMA {
        let f = field(q);
        let max_size = (1..q as usize).take_while(|k| ((k * k) as u64) < q).last().unwrap();
        let run = |workers| explorer::exhaustive_scan(f, min_size..=max_size, &ScanLimits::default(), workers).unwrap();
        let first = run(1);
        let second = run(4);
        let a = serde_json::to_string(&first.summary).unwrap();
        let b = serde_json::to_string(&second.summary).unwrap();
        ensure!(a == b, "summary differs between runs for q = {q}");
        let t2 = first.summary.min_theorem2.as_ref().unwrap();
        let c2 = first.summary.min_corollary2.as_ref().unwrap();
        let (t2r, c2r) = (ExactRatio::new(t2.lhs, t2.rhs), ExactRatio::new(c2.lhs, c2.rhs));
        ensure!(t2r.is_positive() && c2r.is_positive(), "non-positive minimum for q = {q}");
        let (bt2, bc2) = brute_minima(q, min_size);
        ensure!(t2r.cmp_value(&bt2).is_eq() && c2r.cmp_value(&bc2).is_eq(), "scan disagrees with enumeration for q = {q}: {t2r:?} vs {bt2:?}, {c2r:?} vs {bc2:?}");
        if (t2.lhs, t2.rhs) != pin_t2 || (c2.lhs, c2.rhs) != pin_c2 {
            mismatches.push(format!("({q}, {min_size}, ({}, {}), ({}, {}))", t2.lhs, t2.rhs, c2.lhs, c2.rhs));
        }
        lines.push(format!("q={q},|A|>={min_size}: {:.4}/{:.4}", t2.approx, c2.approx));
    }
    ensure!(mismatches.is_empty(), "minima moved from pinned values: {}", mismatches.join(", "));
    Ok(format!("minima {}", lines.join(", ")))
}

fn scan_csv(args: &[&str], workers: &str, path: &std::path::Path) -> Result<Vec<u8>, String> {
    let mut argv = vec!["sumprod"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--workers", workers, "--out", path.to_str().unwrap()]);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = sumprod_cli::run(argv, &mut out, &mut err);
    ensure!(code == 0, "exit {code}: {}", String::from_utf8_lossy(&err));
    std::fs::read(path).map_err(|e| e.to_string())
}

fn c9_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("scan.csv");
    let mut sizes = Vec::new();
    for args in [
        &["--q", "101", "--set", "random:size=9,seed=1", "scan", "--trials", "300", "--seed", "77"][..],
        &["--q", "13", "--exhaustive", "--sizes", "1..13", "scan"][..],
    ] {
        let reference = scan_csv(args, "1", &path)?;
        for workers in ["1", "2", "8"] {
            let again = scan_csv(args, workers, &path)?;
            ensure!(again == reference, "CSV differs with {workers} workers for {args:?}");
        }
        sizes.push(reference.len());
    }
    Ok(format!("CSV byte-identical across runs and 1/2/8 workers ({sizes:?} bytes)"))
}

fn c10_performance() -> Check {
    let big = field(1_000_003);
    let full = FieldSet::full(big).unwrap();
    let half = FamilySpec::Random { size: 500_000, seed: 10 }.generate(big, 0).unwrap();
    let half2 = FamilySpec::Random { size: 500_000, seed: 11 }.generate(big, 0).unwrap();
    let start = Instant::now();
    let s = setops::sum_set(&full, &full).unwrap();
    let t_full = start.elapsed();
    ensure!(s.is_full(), "F + F != F");
    let start = Instant::now();
    let s = setops::sum_set(&half, &half2).unwrap();
    let t_half = start.elapsed();
    ensure!(s.is_full(), "dense random sum set not full");
    ensure!(t_full < Duration::from_secs(5) && t_half < Duration::from_secs(5), "sumset took {t_full:.2?} / {t_half:.2?}");

    let small = field(10_007);
    let a = FamilySpec::Random { size: 300, seed: 12 }.generate(small, 0).unwrap();
    let start = Instant::now();
    let i = setops::i_set(&a).unwrap();
    let t_i = start.elapsed();
    ensure!(i.len() == 10_007, "unexpected |I(A)| = {}", i.len());
    ensure!(t_i < Duration::from_secs(10), "i_set took {t_i:.2?}");
    Ok(format!("sumset q=10^6: full {t_full:.2?}, half-density {t_half:.2?}; i_set |A|=300, q=10007: {t_i:.2?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 I(A) oracle equivalence", c1_i_set_oracle),
        ("2 dilated S_xi embeds in I(A)", c2_lemma1),
        ("3 energy-averaging floor", c3_lemma2),
        ("4 heavy coset holds a third", c4_lemma3),
        ("5 popular-ratio xi floor", c5_lemma4),
        ("6 |I(A)| >= q/2 for large A", c6_theorem3),
        ("7 per-coset difference identities", c7_lemma5),
        ("8 small-set ratio regression", c8_regression),
        ("9 scan determinism", c9_determinism),
        ("10 performance floor", c10_performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
