use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdw_core::lattice::*;

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Solves the normal equations G G^T c = G x over Q and tests the residual
/// x - G^T c for zero.
fn in_span_by_residual(gens: &[Vec<i64>], x: &[i64]) -> bool {
    let r = gens.len();
    let mut a: Vec<Vec<BigRational>> = (0..r)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..r)
                .map(|j| q(gens[i].iter().zip(&gens[j]).map(|(a, b)| a * b).sum()))
                .collect();
            row.push(q(gens[i].iter().zip(x).map(|(a, b)| a * b).sum()));
            row
        })
        .collect();
    // Gauss-Jordan; free variables set to zero.
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r {
        let Some(p) = (row..r).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = BigRational::one() / a[row][col].clone();
        for v in a[row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..r {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..=r {
                    let d = &f * &a[row][j];
                    a[i][j] = &a[i][j] - d;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    let mut c = vec![BigRational::zero(); r];
    for (row, col) in pivots {
        c[col] = a[row][r].clone();
    }
    (0..x.len()).all(|k| {
        let s: BigRational = (0..r).map(|i| &c[i] * q(gens[i][k])).sum();
        s == q(x[k])
    })
}

fn random_gens(rng: &mut ChaCha8Rng, dim: usize, rank: usize, entry: i64) -> Vec<Vec<i64>> {
    (0..rank).map(|_| (0..dim).map(|_| rng.gen_range(-entry..=entry)).collect()).collect()
}

#[test]
fn enumeration_matches_residual_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let gens = random_gens(&mut rng, 4, 2, 2);
        let pts = enumerate_bounded_points(&gens, 3).unwrap();
        let mut expected = Vec::new();
        for idx in 0..7i64.pow(4) {
            let mut x = Vec::new();
            let mut r = idx;
            for _ in 0..4 {
                x.push(r % 7 - 3);
                r /= 7;
            }
            x.reverse();
            if in_span_by_residual(&gens, &x) {
                expected.push(x);
            }
        }
        assert_eq!(pts, expected);
    }
}

fn generates_same(basis: &LatticeBasis, points: &[Vec<i64>]) -> bool {
    // every point is an integer combination of the basis ...
    let ok = points.iter().all(|p| express_in_basis(p, basis).is_ok());
    // ... and every basis vector lies in the lattice of the points, which the
    // short basis of the points plus the basis vector must not enlarge.
    let widened: Vec<Vec<i64>> = points
        .iter()
        .cloned()
        .chain(basis.vectors.iter().map(|v| v.iter().map(|x| i64::try_from(x).unwrap()).collect()))
        .collect();
    let other = short_basis(&widened).unwrap();
    ok && basis.vectors.iter().all(|w| {
        let w: Vec<i64> = w.iter().map(|x| i64::try_from(x).unwrap()).collect();
        express_in_basis(&w, &other).is_ok()
    }) && other.vectors.iter().all(|w| {
        let w: Vec<i64> = w.iter().map(|x| i64::try_from(x).unwrap()).collect();
        express_in_basis(&w, basis).is_ok()
    })
}

#[test]
fn short_bases_certify_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for i in 0..50 {
        let dim = rng.gen_range(1..=5);
        let rank = rng.gen_range(1..=dim.min(3));
        let qb = rng.gen_range(1..=3);
        let mut gens = random_gens(&mut rng, dim, rank, 2);
        if gens.iter().all(|g| g.iter().all(|&x| x == 0)) {
            gens[0][0] = 1;
        }
        let pts = enumerate_bounded_points(&gens, qb).unwrap();
        if pts.iter().all(|p| p.iter().all(|&x| x == 0)) {
            continue;
        }
        let basis = short_basis(&pts).unwrap();
        assert!(basis.max_norm <= BigInt::from(dim as i64 * qb), "instance {i}");
        assert!(generates_same(&basis, &pts), "instance {i}");
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut rng);
        let b2 = short_basis(&shuffled).unwrap();
        assert!(generates_same(&b2, &pts), "instance {i} shuffled");
    }
}

#[test]
fn rebuild_random_lattice_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..30 {
        let dim = rng.gen_range(2..=5);
        let rank = rng.gen_range(1..=dim.min(3));
        let gens = random_gens(&mut rng, dim, rank, 3);
        let Ok(basis) = short_basis(&gens) else { continue };
        let coeffs: Vec<i64> = (0..gens.len()).map(|_| rng.gen_range(-4..=4)).collect();
        let x: Vec<i64> = (0..dim).map(|c| gens.iter().zip(&coeffs).map(|(g, n)| g[c] * n).sum()).collect();
        let n = express_in_basis(&x, &basis).unwrap();
        for c in 0..dim {
            let s: BigInt = n.iter().zip(&basis.vectors).map(|(a, w)| a * &w[c]).sum();
            assert_eq!(s, BigInt::from(x[c]));
        }
    }
}
