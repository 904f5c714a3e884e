use super::*;
use crate::radial::amplitude_sq;

fn small() -> ModeTable {
    build_table(3.0, 1, FrequencyGrid::new(1e-3, 1.0, 16).unwrap()).unwrap()
}

#[test]
fn build_is_deterministic() {
    let a = build_table(3.0, 0, FrequencyGrid::new(1e-3, 1.0, 16).unwrap()).unwrap();
    let b = build_table(3.0, 0, FrequencyGrid::new(1e-3, 1.0, 16).unwrap()).unwrap();
    for (x, y) in a.entries().iter().zip(b.entries()) {
        assert_eq!(x.r_in_sq.to_bits(), y.r_in_sq.to_bits());
        assert_eq!(x.r_up_sq.to_bits(), y.r_up_sq.to_bits());
    }
}

#[test]
fn nodes_are_reproduced_exactly() {
    let t = small();
    for l in 0..=1 {
        for (k, &w) in t.frequencies().iter().enumerate() {
            let (a, b) = t.interpolate(l, w).unwrap();
            let e = t.entry(l, k);
            assert_eq!(a, e.r_in_sq);
            assert_eq!(b, e.r_up_sq);
        }
    }
}

#[test]
fn midpoint_matches_direct_solve() {
    let t = build_table(3.0, 0, FrequencyGrid::default()).unwrap();
    let w = t.frequencies();
    let k = w.iter().position(|&v| v > 0.5).unwrap();
    let mid = 0.5 * (w[k] + w[k + 1]);
    let (a, b) = t.interpolate(0, mid).unwrap();
    let (x, y) = amplitude_sq(0, mid, 3.0).unwrap();
    assert!((a / x - 1.0).abs() < 1e-3, "{a} {x}");
    assert!((b / y - 1.0).abs() < 1e-3, "{b} {y}");
}

#[test]
fn out_of_range_requests() {
    let t = small();
    assert!(matches!(t.interpolate(0, 5e-4), Err(Error::TableRange { .. })));
    assert!(matches!(t.interpolate(0, 1.5), Err(Error::TableRange { .. })));
    assert!(matches!(t.interpolate(2, 0.1), Err(Error::TableL { .. })));
}

#[test]
fn persist_round_trip() {
    let t = small();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    persist(&t, &path).unwrap();
    let u = load_expecting(&path, t.params()).unwrap();
    assert_eq!(t.params(), u.params());
    for (x, y) in t.entries().iter().zip(u.entries()) {
        assert_eq!(x.r_in_sq.to_bits(), y.r_in_sq.to_bits());
        assert_eq!(x.r_up_sq.to_bits(), y.r_up_sq.to_bits());
        assert_eq!(x.wronskian_drift.to_bits(), y.wronskian_drift.to_bits());
    }
    assert_eq!(t.interpolate(1, 0.0123).unwrap(), u.interpolate(1, 0.0123).unwrap());
}

#[test]
fn truncated_file_is_rejected() {
    let t = small();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    persist(&t, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 100]).unwrap();
    assert!(matches!(load(&path), Err(Error::HashMismatch { .. })));
    std::fs::write(&path, b"garbage").unwrap();
    assert!(matches!(load(&path), Err(Error::Corrupt { .. })));
}

#[test]
fn mismatched_radius_is_rejected() {
    let t = small();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    persist(&t, &path).unwrap();
    let other = TableParams { r_det: 4.0, ..*t.params() };
    assert!(matches!(load_expecting(&path, &other), Err(Error::ParameterMismatch { .. })));
}

#[test]
fn text_export_lists_every_entry() {
    let t = small();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    write_text(&t, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 32);
}

#[test]
fn cache_key_tracks_parameters() {
    let p = *small().params();
    let s = SolverConfig::default();
    assert_eq!(p.cache_key(&s), p.cache_key(&s));
    assert_ne!(p.cache_key(&s), TableParams { l_max: 2, ..p }.cache_key(&s));
    let tight = SolverConfig { series_tol: 1e-16, ..s };
    assert_ne!(p.cache_key(&s), p.cache_key(&tight));
}

#[test]
fn diagnostics_within_thresholds() {
    let t = small();
    assert!(t.worst_unitarity_defect() < 1e-6);
    assert!(t.worst_reciprocity_defect() < 1e-6);
    assert!(t.worst_wronskian_drift() < 1e-8);
    assert!(t.repaired().is_empty());
    assert!(t.entries().iter().all(|e| e.r_in_sq >= 0.0 && e.r_up_sq >= 0.0));
}

#[test]
fn disk_cache_loads_what_it_built() {
    let dir = tempfile::tempdir().unwrap();
    let grid = FrequencyGrid::new(1e-3, 1.0, 16).unwrap();
    let cache = TableCache::new(0, grid).with_directory(dir.path(), false);
    let (a, first) = cache.fetch(3.0).unwrap();
    assert!(matches!(first, CacheOutcome::Built(Some(_))));
    let (_, again) = cache.fetch(3.0).unwrap();
    assert_eq!(again, CacheOutcome::Memory);

    let fresh = TableCache::new(0, grid).with_directory(dir.path(), false);
    let (b, second) = fresh.fetch(3.0).unwrap();
    assert!(matches!(second, CacheOutcome::Loaded(_)));
    assert_eq!(a.entries()[3].r_up_sq.to_bits(), b.entries()[3].r_up_sq.to_bits());
}

#[test]
fn disk_cache_replaces_corrupt_files_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let grid = FrequencyGrid::new(1e-3, 1.0, 16).unwrap();
    let strict = TableCache::new(0, grid).with_directory(dir.path(), false);
    let path = strict.path_for(3.0).unwrap().unwrap();
    std::fs::write(&path, b"not a table").unwrap();
    assert!(strict.fetch(3.0).unwrap_err().is_cache_defect());

    let lenient = TableCache::new(0, grid).with_directory(dir.path(), true);
    let (_, outcome) = lenient.fetch(3.0).unwrap();
    assert!(matches!(outcome, CacheOutcome::Replaced { .. }));
    assert!(load(&path).is_ok());
}
