use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use overlap_ifs::address::{enumerate_prefixes, feasible_children};
use overlap_ifs::conditions::{wn_first_level, wn_membership};
use overlap_ifs::geometry::{convex_combination_feasible, image_polytope};
use overlap_ifs::montecarlo::uniform_samples;
use overlap_ifs::triangle::{
    gamma0_bounds, gamma_nonempty, in_gamma, inv_sqrt2, pi_point, reference_vertices,
    triangle_ifs,
};
use overlap_ifs::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn exact_triangle(lambda: BigRational) -> IfsSystem<BigRational> {
    IfsSystem::new(lambda, reference_vertices::<BigRational>()).unwrap()
}

/// Every word of length `n` whose forward image `f_w(Ω)` contains `x`.
fn brute_force_words(sys: &IfsSystem<BigRational>, x: &[BigRational], n: usize) -> BTreeSet<Vec<usize>> {
    let m = sys.m();
    let mut out = BTreeSet::new();
    for code in 0..m.pow(n as u32) {
        let mut w = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            w.push(c % m);
            c /= m;
        }
        let img = image_polytope(sys, &AddressPrefix(w.clone())).unwrap();
        if img.contains(x, &Membership::Closed).unwrap() {
            out.insert(w);
        }
    }
    out
}

fn level_words(tree: &PrefixTree<BigRational>, n: usize) -> BTreeSet<Vec<usize>> {
    tree.levels[n].iter().map(|node| node.prefix.digits().to_vec()).collect()
}

fn random_point(sys: &IfsSystem<BigRational>, rng: &mut ChaCha8Rng, den: i64) -> Vec<BigRational> {
    let m = sys.m();
    let raw: Vec<i64> = (0..m).map(|_| rng.random_range(0..den)).collect();
    let total: i64 = raw.iter().sum::<i64>().max(1);
    let d = sys.d();
    (0..d)
        .map(|c| {
            raw.iter()
                .zip(sys.points())
                .fold(BigRational::zero(), |acc, (&w, p)| acc + q(w, total) * &p[c])
        })
        .collect()
}

#[test]
fn prefix_tree_matches_forward_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for lambda in [q(1, 2), q(3, 5), q(7, 10)] {
        let sys = exact_triangle(lambda);
        for _ in 0..6 {
            let x = random_point(&sys, &mut rng, 40);
            let tree = enumerate_prefixes(&sys, &x, 5, &FeasibilityMode::RelaxedOmega, 1 << 20).unwrap();
            for n in 0..tree.levels.len() {
                assert_eq!(level_words(&tree, n), brute_force_words(&sys, &x, n));
            }
        }
    }
}

#[test]
fn unique_certificates_reproduce_the_point() {
    let check = |sys: &IfsSystem<BigRational>, x: &[BigRational]| {
        let r = classify_point(sys, x, 80, &FeasibilityMode::RelaxedOmega, &SearchOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::UniqueCertified, "{r:?}");
        let cert = r.certificate.unwrap();
        // fixed point of f_cycle solves y = λ^p y + f_cycle(0)
        let zero = vec![BigRational::zero(); sys.d()];
        let b = sys.project_prefix(&cert.cycle, &zero).unwrap();
        let scale = BigRational::one() - num_traits::pow(sys.lambda().clone(), cert.period());
        let y: Vec<BigRational> = b.iter().map(|v| v / &scale).collect();
        assert_eq!(sys.project_prefix(&cert.prefix, &y).unwrap(), x);
        for n in 0..=6 {
            assert_eq!(brute_force_words(sys, x, n).len(), 1);
        }
    };
    for lambda in [q(1, 2), q(3, 5), q(11, 20)] {
        let sys = exact_triangle(lambda.clone());
        let t = pi_point(&lambda);
        check(&sys, &t.to_cartesian(sys.points()));
    }
    for (n, d) in [(29, 50), (11, 20), (3, 5), (51, 100)] {
        let lambda = q(n, d);
        let sys = IfsSystem::new(lambda.clone(), vec![vec![q(0, 1)], vec![q(1, 1)]]).unwrap();
        check(&sys, &[BigRational::one() / (BigRational::one() + lambda)]);
    }
}

#[test]
fn digit_forcing_agrees_with_prefix_search() {
    let lambda = q(7, 10);
    let sys = exact_triangle(lambda.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mode = FeasibilityMode::ExactNoHoles(certify_no_holes(&sys).unwrap());
    let opts = SearchOptions::default();
    let mut seen_branch = 0;
    for _ in 0..200 {
        let den = rng.random_range(2..60);
        let a = rng.random_range(0..=den);
        let b = rng.random_range(0..=den - a);
        let t = BarycentricTriple::new(q(a, den), q(b, den), q(den - a - b, den)).unwrap();
        let f = digit_forcing(&lambda, &t, 200).unwrap();
        let r = classify_point(&sys, &t.to_cartesian(sys.points()), 200, &mode, &opts)
            .unwrap();
        match f.outcome {
            ForcingOutcome::ForcedPrefixThenBranch { step } => {
                seen_branch += 1;
                assert_eq!(r.first_bifurcation, Some(step));
            }
            ForcingOutcome::DeadEnd { step } => assert_eq!(r.dead_end, Some(step)),
            ForcingOutcome::UniqueByCycle { .. } => assert_eq!(r.verdict, Verdict::UniqueCertified),
            ForcingOutcome::Exhausted { .. } => panic!("rational targets always resolve"),
        }
    }
    assert!(seen_branch > 150);
}

#[test]
fn gamma_nonempty_matches_grid_search() {
    let r2 = inv_sqrt2();
    for k in 55..=85 {
        let lambda = k as f64 / 100.0;
        if (lambda - r2).abs() < 0.01 {
            continue;
        }
        let (a, b, c) = gamma0_bounds(lambda);
        let mut found = false;
        let n = 400;
        'grid: for i in 0..=n {
            for j in 0..=n - i {
                let t = BarycentricTriple::new(
                    i as f64 / n as f64,
                    j as f64 / n as f64,
                    (n - i - j) as f64 / n as f64,
                )
                .unwrap();
                let direct = t.x < a && t.y < b && t.z < c;
                assert_eq!(direct, in_gamma(lambda, 0, &t));
                if direct {
                    found = true;
                    break 'grid;
                }
            }
        }
        assert_eq!(found, gamma_nonempty(lambda), "λ={lambda}");
    }
}

#[test]
fn wn_levels_are_nested() {
    let sys = triangle_ifs(0.7).unwrap();
    let cert = certify_no_holes(&sys).unwrap();
    let fam = vertex_overlap_witness(&sys).unwrap().unwrap().family(3);
    for x in uniform_samples(sys.omega(), 60, 4) {
        let first = wn_first_level(&sys, &fam, &x, 8, &cert, 1 << 22).unwrap();
        for n in 0..=8 {
            let member = wn_membership(&sys, &fam, &x, n, &cert).unwrap();
            assert_eq!(member, matches!(first, Some(k) if k <= n));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn halfspaces_agree_with_feasibility(
        pts in prop::collection::vec((-20i64..20, -20i64..20), 3..9),
        x in (-25i64..25, -25i64..25),
    ) {
        let gens: Vec<Vec<BigRational>> = pts.iter().map(|&(a, b)| vec![q(a, 1), q(b, 1)]).collect();
        let Ok(poly) = Polytope::new(gens.clone()) else { return Ok(()) };
        prop_assume!(poly.halfspaces().is_some());
        let x = vec![q(x.0, 2), q(x.1, 2)];
        let lp = convex_combination_feasible(&gens, &x, &BigRational::zero());
        prop_assert_eq!(poly.contains(&x, &Membership::Closed).unwrap(), lp);
    }

    #[test]
    fn true_address_survives_relaxed_search(
        digits in prop::collection::vec(0usize..3, 24),
        k in 40i64..66,
    ) {
        let sys = triangle_ifs(k as f64 / 100.0).unwrap();
        let x = sys.project_prefix(&AddressPrefix(digits.clone()), &sys.centroid()).unwrap();
        let tree = enumerate_prefixes(&sys, &x, 10, &FeasibilityMode::RelaxedOmega, 1 << 20).unwrap();
        for n in 1..=10 {
            prop_assert!(tree.levels[n].iter().any(|node| node.prefix.digits() == &digits[..n]));
        }
    }

    #[test]
    fn no_holes_prefixes_always_extend(k in 67i64..95, seed in 0u64..1000) {
        let sys = triangle_ifs(k as f64 / 100.0).unwrap();
        let mode = FeasibilityMode::ExactNoHoles(certify_no_holes(&sys).unwrap());
        let x = uniform_samples(sys.omega(), 1, seed).pop().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cur = x;
        for _ in 0..30 {
            let kids = feasible_children(&sys, &cur, &mode).unwrap();
            prop_assert!(!kids.is_empty());
            let d = kids[rng.random_range(0..kids.len())];
            cur = sys.apply_inverse(d, &cur).unwrap();
        }
    }

    #[test]
    fn pedicini_needs_more_than_one_over_m(
        set in prop::collection::btree_set(0i32..25, 2..7),
        lambda in 0.02f64..0.98,
    ) {
        let digits = DigitSet::new(set.iter().map(|&a| a as f64).collect()).unwrap();
        if pedicini_holds(&digits, lambda).holds {
            prop_assert!(lambda > 1.0 / digits.len() as f64);
        }
    }
}
