use outflow_core::cli_io::{read_csv, read_ledger, render_series, write_series, SeriesFormat, SnapshotRow};
use outflow_core::diagnostics::LedgerRecord;
use proptest::prelude::*;

#[test]
fn empty_series_is_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("empty.csv");
    let rows: Vec<SnapshotRow> = Vec::new();
    write_series(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "t,x,s,r,v,u,phi,psi\n");
    let (header, data) = read_csv(&path).unwrap();
    assert_eq!(header.len(), 8);
    assert!(data.is_empty());
}

#[test]
fn one_node_snapshot_is_two_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("one.csv");
    write_series(&path, &[SnapshotRow([0.5, 0.0, 0.0, 1.0, 1.25, -0.05, 0.0, 0.0])]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
}

#[test]
fn jsonl_for_jsonl_extension() {
    assert_eq!(SeriesFormat::from_path("a/ledger.jsonl".as_ref()), SeriesFormat::JsonLines);
    assert_eq!(SeriesFormat::from_path("a/ledger.csv".as_ref()), SeriesFormat::Csv);
    let text = render_series(&[SnapshotRow([f64::NAN, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])], SeriesFormat::JsonLines);
    assert!(text.starts_with("{\"t\":null,\"x\":1.0000000000000000e0"));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform8(finite()), 0..20)) {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("rt.csv");
        let recs: Vec<SnapshotRow> = rows.iter().copied().map(SnapshotRow).collect();
        write_series(&path, &recs).unwrap();
        let (_, back) = read_csv(&path).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn ledger_round_trip_is_bit_exact(vals in prop::collection::vec(prop::array::uniform15(finite()), 1..8)) {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("ledger.jsonl");
        let recs: Vec<LedgerRecord> = vals.iter().copied().map(LedgerRecord::from_values).collect();
        write_series(&path, &recs).unwrap();
        let back = read_ledger(&path).unwrap();
        prop_assert_eq!(back.len(), recs.len());
        for (a, b) in recs.iter().zip(&back) {
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
