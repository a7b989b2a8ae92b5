use sumprod_core::explorer::{self, FamilySpec, ScanLimits};
use sumprod_core::setops;
use sumprod_core::verify;
use sumprod_core::witness;
use sumprod_core::make_field;

#[test]
fn geometric_progression_end_to_end() {
    let field = make_field(101).unwrap();
    let a = FamilySpec::Geometric { generator: 2, len: 12, start: 1 }.generate(field, 0).unwrap();
    assert_eq!(a.len(), 12);

    let report = verify::verify_all(&a).unwrap();
    let i = setops::i_set(&a).unwrap();
    assert_eq!(report.iset, i.len());
    assert_eq!(report.theorem3_pass, Some(true));

    let w = witness::theorem3_witness(&a).unwrap();
    assert!(w.embedded.is_subset(&i));
    assert!(2 * w.certified_lower_bound >= 101);
}

#[test]
fn family_scan_matches_per_set_reports() {
    let field = make_field(31).unwrap();
    let spec = FamilySpec::Random { size: 5, seed: 9 };
    let outcome = explorer::family_scan(field, &spec, 20, 2).unwrap();
    assert_eq!(outcome.records.len(), 20);
    for (trial, record) in outcome.records.iter().enumerate() {
        let a = spec.generate(field, trial as u64).unwrap();
        assert_eq!(record.report.set, a);
        assert_eq!(record.report.iset, setops::i_set(&a).unwrap().len());
    }
}

#[test]
fn exhaustive_scan_visits_every_subset_of_each_size() {
    let field = make_field(11).unwrap();
    let outcome = explorer::exhaustive_scan(field, 2..=3, &ScanLimits::default(), 3).unwrap();
    assert_eq!(outcome.summary.visited, 55 + 165);
}
