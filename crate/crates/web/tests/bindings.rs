use tailbound::bounds::pin;
use tailbound::distributions::BoundParams;
use tailbound_web::{compare_table, evaluate_bound, extremal_estimate, COMPARE_COLUMNS};

#[test]
fn evaluate_matches_core() {
    let p = BoundParams::new(1.0, 1.0, 0.1).unwrap();
    assert_eq!(
        evaluate_bound("pin", 1.0, 1.0, 0.1, 4.0).unwrap(),
        pin(&p, 4.0).unwrap().value
    );
    assert!(evaluate_bound("nope", 1.0, 1.0, 0.1, 4.0).is_err());
    assert!(evaluate_bound("bh", -1.0, 1.0, 0.1, 4.0).is_err());
}

#[test]
fn compare_table_is_row_major_and_ordered() {
    let t = compare_table(1.0, 1.0, 0.1, 4.0, 8).unwrap();
    assert_eq!(t.len(), 8 * COMPARE_COLUMNS);
    for row in t.chunks(COMPARE_COLUMNS) {
        let (bh, pu, be, pin, ca) = (row[1], row[2], row[3], row[4], row[5]);
        assert!(pin <= pu * (1.0 + 1e-8) && pu <= bh * (1.0 + 1e-12));
        assert!(be <= ca.min(bh) * (1.0 + 1e-8));
    }
    assert_eq!(t[7 * COMPARE_COLUMNS], 4.0);
    assert!(compare_table(1.0, 1.0, 0.1, 4.0, 0).is_err());
}

#[test]
fn extremal_estimate_respects_the_bound() {
    let r = extremal_estimate(1.0, 1.0, 0.1, 100, 3.0, 100_000, 1).unwrap();
    assert_eq!(r.len(), 3);
    assert!(r[0] <= r[2] + 4.0 * r[1]);
    assert_eq!(
        r,
        extremal_estimate(1.0, 1.0, 0.1, 100, 3.0, 100_000, 1).unwrap()
    );
}
