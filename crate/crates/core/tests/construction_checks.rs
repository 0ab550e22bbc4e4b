use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdw_core::ap::{find_blue_3ap, theta_gap_check};
use vdw_core::construction::*;
use vdw_core::lattice::enumerate_bounded_points;
use vdw_core::params::{default_desk_params, make_desk_params};
use vdw_core::torus::{lift_euclidean_norm_sq, TorusPoint};

#[test]
fn golden_theta() {
    assert_eq!(sample_theta(1, 1).to_hex(), "dedfbab88f31e9cd");
    assert_eq!(sample_theta(1, 2).to_hex(), "b2a3f0ae7da5e0ca");
    assert_eq!(
        sample_theta(3, 7).to_hex(),
        "75f451527aeab857 d4e491a8cca06b62 c596edd31dcd4e68"
    );
    assert_eq!(sample_radii(12, 7, 5), vec![7, 6, 7, 2, 1, 7, 1, 4, 7, 5, 0, 5]);
}

fn naive_condition1(centers: &[TorusPoint], rho: f64) -> Option<(usize, usize, usize)> {
    let m = centers.len();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                if a == b && b == c {
                    continue;
                }
                let v = &(&centers[a] - &centers[b].scale(2)) + &centers[c];
                let norm = v.lift().iter().map(|x| x.abs()).fold(0.0, f64::max);
                if norm <= 10.0 * rho {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

#[test]
fn condition1_matches_naive() {
    let c = sample_centers(64, 4, 0.001, 8, 10).unwrap();
    assert_eq!(verify_condition1(&c, 0.001), None);
    assert_eq!(naive_condition1(&c, 0.001), None);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let pts: Vec<TorusPoint> = (0..12).map(|_| TorusPoint::random(2, &mut rng)).collect();
        assert_eq!(verify_condition1(&pts, 0.01), naive_condition1(&pts, 0.01));
    }
}

#[test]
fn radii_are_uniform() {
    let r = sample_radii(1_000_000, 7, 99);
    let mut counts = [0u64; 8];
    for e in r {
        counts[e as usize] += 1;
    }
    let n: f64 = 1e6;
    let p: f64 = 1.0 / 8.0;
    let sigma = (n * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - n * p).abs() <= 4.0 * sigma, "{counts:?}");
    }
}

#[test]
fn centers_hit_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let theta = TorusPoint::random(2, &mut rng);
        let centers: Vec<TorusPoint> = (0..30).map(|_| TorusPoint::random(2, &mut rng)).collect();
        let (d, n0, len) = (rng.gen_range(1..50u64), rng.gen_range(1..100u64), 200u64);
        let radius = 0.03;
        let fast = count_centers_hit(&theta, d, n0, len, &centers, radius);
        let mut naive = Vec::new();
        for (j, c) in centers.iter().enumerate() {
            for i in 0..len {
                let pos = n0 + i * d;
                if lift_euclidean_norm_sq(&theta.scale(pos), c) <= radius * radius {
                    naive.push((j, pos));
                    break;
                }
            }
        }
        let got: Vec<(usize, u64)> = fast.iter().map(|h| (h.center, h.position)).collect();
        assert_eq!(got, naive);
    }
}

#[test]
fn condition2_against_finer_grid() {
    let centers = sample_centers(64, 4, 0.001, 21, 10).unwrap();
    let cfg = Condition2Config::new(1, 2, 20, 16);
    let rep = spot_check_condition2(&centers, 0.001, &cfg, 4);
    assert_eq!(rep.trials.len(), 20);
    for t in &rep.trials {
        // The step rho/80 grid contains every step rho/40 point, so it admits
        // at least as many centers.
        let xis: Vec<Vec<i64>> = enumerate_bounded_points(&t.generators, 2)
            .unwrap()
            .into_iter()
            .filter(|x| x.iter().any(|&v| v != 0))
            .collect();
        let x_star = TorusPoint::from_hex(&t.x_star).unwrap();
        let fine = u_grid(4, &t.slice, 0.001, 80);
        let fine_count = condition2_admissible(&centers, &x_star, &xis, &fine)
            .into_iter()
            .filter(|&b| b)
            .count();
        assert!(fine_count >= t.count, "{} < {}", fine_count, t.count);
        assert_eq!(xis.len(), t.xi_count);
    }
}

#[test]
fn blue_positions_sit_in_their_band() {
    let p = make_desk_params(2, 20_000, 4, 5, 0.0008, 0.005, 64, 2).unwrap();
    let mut blue = 0;
    for seed in 0..5 {
        let inst = ColoringInstance::generate(&p, Variant::IndependentRadii, seed, 200).unwrap();
        let colors = build_coloring(&inst, 20_000).unwrap();
        assert_eq!(colors, build_coloring(&inst, 20_000).unwrap());
        blue += colors.blue_count();
        for n in colors.blue_positions() {
            let (i, dist) = inst.blue_witness(n as u64).unwrap();
            let e = inst.radius_of(i) as f64;
            assert!(e * p.width <= dist && dist < (e + 1.0) * p.width);
        }
    }
    assert!(blue > 0);
}

#[test]
fn variants_agree_with_one_center() {
    let p = make_desk_params(3, 3000, 1, 4, 0.01, 0.06, 16, 2).unwrap();
    let a = ColoringInstance::generate(&p, Variant::IndependentRadii, 8, 5).unwrap();
    let b = ColoringInstance { variant: Variant::SharedRadius, ..a.clone() };
    assert_eq!(build_coloring(&a, 3000).unwrap(), build_coloring(&b, 3000).unwrap());
}

/// On blue-rich instances any blue 3-AP (n, d) has |lift(d·theta)|_2 below
/// sqrt(2K+1)·width, which is what the gap hypothesis rules out.
#[test]
fn blue_witness_steps_are_short() {
    let p = make_desk_params(2, 4000, 1, 9, 0.008, 0.08, 16, 2).unwrap();
    let mut seen = 0;
    for seed in 0..40 {
        let inst = ColoringInstance::generate(&p, Variant::IndependentRadii, seed, 5).unwrap();
        let colors = build_coloring(&inst, 4000).unwrap();
        if let Some(w) = find_blue_3ap(&colors) {
            seen += 1;
            let step = inst.theta.scale(w.diff as u64).lift_norm_sq();
            let e = inst.radius_of(0) as f64;
            assert!(step < (2.0 * e + 1.0) * p.width * p.width, "seed {seed}");
        }
    }
    assert!(seen > 0);
}

#[test]
fn default_desk_trials_blue_free_under_gap() {
    let p = default_desk_params();
    assert!(p.annulus_step_bound_holds());
    for seed in 0..20 {
        let inst = ColoringInstance::generate(&p, Variant::IndependentRadii, seed, 50).unwrap();
        let colors = build_coloring(&inst, 4096).unwrap();
        if theta_gap_check(&inst.theta, 4096).passed {
            assert!(find_blue_3ap(&colors).is_none(), "seed {seed}");
        }
    }
}
