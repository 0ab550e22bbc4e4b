use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdw_core::ap::verify_certificate;
use vdw_core::coloring::{Color, ColorArray};
use vdw_core::harness::*;
use vdw_core::params::default_desk_params;

#[test]
fn certificate_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = ColorArray::from_fn(10_000, |_| if rng.gen_bool(0.5) { Color::Blue } else { Color::Red });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    save_certificate(&c, 7, &path).unwrap();
    let (back, k) = load_certificate(&path).unwrap();
    assert_eq!(back, c);
    assert_eq!(k, 7);
}

#[test]
fn oracle_certificate_saved_and_verified() {
    let r = brute_force_w3(3, 64).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w33.txt");
    save_certificate(&r.certificate, 3, &path).unwrap();
    let (c, k) = load_certificate(&path).unwrap();
    assert!(verify_certificate(&c, k).accepted());
}

/// Breadth-first enumeration of all valid colorings, level by level.
fn bfs_w3(k: usize) -> usize {
    let mut level: Vec<Vec<bool>> = vec![vec![]];
    loop {
        let mut next = Vec::new();
        for c in &level {
            for blue in [false, true] {
                let mut d = c.clone();
                d.push(blue);
                let arr = ColorArray::from_fn(d.len(), |p| if d[p - 1] { Color::Blue } else { Color::Red });
                if verify_certificate(&arr, k).accepted() {
                    next.push(d);
                }
            }
        }
        if next.is_empty() {
            return level[0].len() + 1;
        }
        level = next;
    }
}

#[test]
fn oracle_agrees_with_breadth_first_search() {
    assert_eq!(brute_force_w3(3, 64).unwrap().w, bfs_w3(3));
    assert_eq!(brute_force_w3(4, 64).unwrap().w, bfs_w3(4));
}

#[test]
fn experiment_csv_aggregates_match() {
    let cfg = TrialConfig::new(default_desk_params());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    let (s, reports) = run_experiment(&cfg, 12, 100, Some(&path), None).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("trial,seed,theta_gap,blue_witness,longest_red_len,longest_red_d,wall_ms\n"));
    let agg = aggregate_csv(&text).unwrap();
    assert_eq!(
        (agg.trials, agg.blue_free, agg.theta_gap_passes, agg.red_len_min, agg.red_len_median, agg.red_len_max),
        (s.trials, s.blue_free, s.theta_gap_passes, s.red_len_min, s.red_len_median, s.red_len_max)
    );
    assert_eq!(s.theorem_exceptions, 0);
    for r in &reports {
        let (_, colors) = regenerate_coloring(&cfg, r.seed).unwrap();
        assert!(r.reverify(&colors));
    }
}

#[test]
fn miss_probability_small_run() {
    let cfg = MissConfig { dim: 4, k: 3, y: 5, width: 1.25e-4, rho: 1e-3, draws: 20_000 };
    let r = run_miss_experiment(&cfg, 2);
    assert_eq!(r.planted_hits, 5);
    assert!(r.within_3_sigma, "{r:?}");
}
