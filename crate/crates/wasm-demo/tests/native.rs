use hrcn_wasm::{correlation_rows, komatsu_rows, trace_rows, MAX_TRACE_SAMPLES};

#[test]
fn correlation_rows_stay_under_bound() {
    let rows = correlation_rows(1.0, 200, 12).unwrap();
    assert_eq!(rows.len(), 36);
    for r in rows.chunks(3) {
        assert!(r[1].abs() <= r[2] + 1e-15, "{r:?}");
    }
    let last = &rows[33..];
    assert!((last[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!(last[1].abs() < 1e-12 && last[2] == 0.0);
    assert!(correlation_rows(1.0, 200, 0).is_err());
}

#[test]
fn komatsu_rows_sandwich_the_tail() {
    let rows = komatsu_rows(5.0, 51).unwrap();
    assert_eq!(rows.len(), 204);
    for r in rows.chunks(4) {
        assert!(r[1] <= r[2] && r[2] <= r[3], "{r:?}");
    }
    assert!(komatsu_rows(5.0, 1).is_err());
}

#[test]
fn trace_contracts() {
    let rows = trace_rows(8, 0.5, 0.1, 50_000, 300, 0.4, 3).unwrap();
    assert_eq!(rows.len(), 302);
    assert!((rows[0] - (0.2f64).sin()).abs() < 1e-12);
    assert!(rows[301] < 0.5 * rows[0], "{} -> {}", rows[0], rows[301]);
    assert!(trace_rows(8, 0.5, 0.1, MAX_TRACE_SAMPLES + 1, 10, 0.4, 3).is_err());
}
