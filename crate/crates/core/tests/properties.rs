//! Property tests for the solver invariants, on seeded random spaces.

use mmtk_core::testkit::{random_measure, random_space, rng};
use mmtk_core::*;
use proptest::prelude::*;
use rand::Rng as _;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn budget() -> SearchBudget {
    SearchBudget::default()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, .. ProptestConfig::default() })]

    #[test]
    fn validation_accepts_generated_spaces(seed in any::<u64>(), n in 1usize..=6) {
        let x = random_space(&mut rng(seed), n);
        let same = validate_space(
            x.labels().to_vec(),
            x.dist_rows(),
            x.weights().to_vec(),
            &tol(),
        ).unwrap();
        prop_assert_eq!(x, same);
    }

    #[test]
    fn quotient_is_idempotent_on_padded_spaces(seed in any::<u64>(), n in 1usize..=5) {
        // Duplicate the first point at distance zero and add a null point.
        let x = random_space(&mut rng(seed), n);
        let m = x.n() + 2;
        let mut rows = vec![vec![0.0; m]; m];
        for i in 0..x.n() {
            for j in 0..x.n() {
                rows[i][j] = x.d(i, j);
            }
        }
        for j in 0..x.n() {
            rows[x.n()][j] = x.d(0, j);
            rows[j][x.n()] = x.d(0, j);
            rows[x.n() + 1][j] = 1.0 + x.d(0, j);
            rows[j][x.n() + 1] = 1.0 + x.d(0, j);
        }
        rows[x.n()][x.n() + 1] = 1.0;
        rows[x.n() + 1][x.n()] = 1.0;
        let mut labels = x.labels().to_vec();
        labels.push("dup".into());
        labels.push("null".into());
        let mut weights = x.weights().to_vec();
        weights[0] /= 2.0;
        weights.push(weights[0]);
        weights.push(0.0);
        let q = quotient_support(labels, rows, weights, &tol()).unwrap();
        prop_assert_eq!(q.n(), x.n());
        let q2 = quotient_support(
            q.labels().to_vec(),
            q.dist_rows(),
            q.weights().to_vec(),
            &tol(),
        ).unwrap();
        prop_assert_eq!(q, q2);
    }

    #[test]
    fn isomorphism_is_reflexive_and_symmetric(seed in any::<u64>(), n in 1usize..=5) {
        let x = random_space(&mut rng(seed), n);
        prop_assert!(mm_isomorphic(&x, &x, &tol()).is_some());
        // Relabel through a rotation of the indices.
        let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| x.d(perm[i], perm[j])).collect())
            .collect();
        let y = validate_space(
            perm.iter().map(|&i| x.label(i).to_string()).collect(),
            rows,
            perm.iter().map(|&i| x.weight(i)).collect(),
            &tol(),
        ).unwrap();
        prop_assert!(mm_isomorphic(&x, &y, &tol()).is_some());
        prop_assert!(mm_isomorphic(&y, &x, &tol()).is_some());
    }

    #[test]
    fn domination_is_reflexive_and_scales(seed in any::<u64>(), n in 1usize..=4) {
        let x = random_space(&mut rng(seed), n);
        prop_assert!(dominates(&x, &x, &tol(), 1 << 20).unwrap().is_some());
        let small = scale(&x, 0.5, &tol()).unwrap();
        let f = dominates(&x, &small, &tol(), 1 << 20).unwrap();
        prop_assert!(f.is_some());
        prop_assert!(f.unwrap().is_lipschitz_measure_preserving(&tol()));
    }

    #[test]
    fn scale_composes_exactly_on_dyadic_factors(seed in any::<u64>(), n in 1usize..=5,
                                                a in 0u32..4, b in 0u32..4) {
        let x = random_space(&mut rng(seed), n);
        let s = f64::powi(2.0, a as i32 - 2);
        let t = f64::powi(2.0, b as i32 - 2);
        let left = scale(&scale(&x, s, &tol()).unwrap(), t, &tol()).unwrap();
        let right = scale(&x, s * t, &tol()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn subtransport_mass_is_monotone_and_saturates(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let amb = random_space(&mut r, n);
        let mu = random_measure(&mut r, n);
        let nu = random_measure(&mut r, n);
        let pair = MeasurePair::new(amb.clone(), mu, nu, &tol()).unwrap();
        let mut last = -1.0;
        let diam = amb.diam();
        for k in 0..5 {
            let eps = diam * k as f64 / 4.0;
            let (mass, plan) = max_subtransport_mass(&pair, eps);
            prop_assert!(mass >= last - 1e-12);
            prop_assert!(plan.deficiency() >= -1e-9);
            last = mass;
        }
        let (mass, _) = max_subtransport_mass(&pair, diam);
        prop_assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn prokhorov_is_a_metric(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let amb = random_space(&mut r, n);
        let a = random_measure(&mut r, n);
        let b = random_measure(&mut r, n);
        let c = random_measure(&mut r, n);
        let d = |p: &[f64], q: &[f64]| {
            prokhorov(&MeasurePair::new(amb.clone(), p.to_vec(), q.to_vec(), &tol()).unwrap())
        };
        let (ab, ba) = (d(&a, &b), d(&b, &a));
        prop_assert_eq!(ab, ba);
        let (bc, ac) = (d(&b, &c), d(&a, &c));
        prop_assert!(ac <= ab + bc + 2e-9);
        prop_assert_eq!(d(&a, &a), 0.0);
    }

    #[test]
    fn prokhorov_of_pushforwards_below_ky_fan(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let amb = random_space(&mut r, n);
        let base = random_measure(&mut r, 5);
        let f: Vec<usize> = (0..5).map(|_| r.gen_range(0..n)).collect();
        let g: Vec<usize> = (0..5).map(|_| r.gen_range(0..n)).collect();
        let kf = ky_fan(&base, &f, &g, &amb).unwrap();
        let fm = push_forward_measure(&base, &f, n);
        let gm = push_forward_measure(&base, &g, n);
        let dp = prokhorov(&MeasurePair::new(amb, fm, gm, &tol()).unwrap());
        prop_assert!(dp <= kf + 1e-9);
    }

    #[test]
    fn strassen_value_satisfies_definition(seed in any::<u64>(), n in 2usize..=6) {
        // The returned value feeds back into the defining inequality over
        // every subset, with open neighborhoods.
        let mut r = rng(seed);
        let amb = random_space(&mut r, n);
        let mu = random_measure(&mut r, n);
        let nu = random_measure(&mut r, n);
        let pair = MeasurePair::new(amb.clone(), mu.clone(), nu.clone(), &tol()).unwrap();
        let eps = prokhorov(&pair) + 1e-9;
        for mask in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let nu_a: f64 = members.iter().map(|&i| nu[i]).sum();
            let mu_ball: f64 = (0..n)
                .filter(|&x| members.iter().any(|&a| amb.d(x, a) < eps))
                .map(|x| mu[x])
                .sum();
            prop_assert!(mu_ball >= nu_a - eps - 1e-9);
        }
    }

    #[test]
    fn point_lower_bound_below_exact(seed in any::<u64>(), n in 1usize..=6) {
        let x = random_space(&mut rng(seed), n);
        let lower = box_point_lower(&x);
        let exact = box_to_point(&x, &budget()).unwrap().value;
        prop_assert!(lower <= exact + 1e-12);
    }

    #[test]
    fn box_upper_dominates_exact(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut r = rng(seed);
        let x = random_space(&mut r, n);
        let y = random_space(&mut r, m);
        let upper = box_upper(&x, &y, 4, boxdist::DEFAULT_SEED, &tol()).unwrap();
        let exact = box_exact(&x, &y, &budget(), &tol()).unwrap();
        prop_assert!(exact.certified);
        prop_assert!(upper.value >= exact.value() - 1e-12);
        prop_assert!(upper.value < 1.0);
        let lower = box_lower_functional(&x, &y);
        prop_assert!(lower <= exact.value() + 1e-12);
    }

    #[test]
    fn observable_diameter_monotone_in_kappa(seed in any::<u64>(), n in 1usize..=5) {
        let x = random_space(&mut rng(seed), n);
        let mut last = f64::INFINITY;
        for k in [0.1, 0.25, 0.4, 0.6, 0.8] {
            let od = obs_diam_exact(&x, k, &budget(), &tol()).unwrap();
            prop_assert!(od.certified);
            prop_assert!(od.value <= last + 1e-9);
            last = od.value;
        }
    }

    #[test]
    fn observable_diameter_below_partial_diameter(seed in any::<u64>(), n in 1usize..=5,
                                                  kappa in 0.05f64..0.9) {
        let x = random_space(&mut rng(seed), n);
        let od = obs_diam_exact(&x, kappa, &budget(), &tol()).unwrap();
        let pd = partial_diam_space(&x, 1.0 - kappa, &budget()).unwrap();
        prop_assert!(od.value <= pd + 1e-9);
        // The witness is 1-Lipschitz and attains the reported value.
        let attained = partial_diam_line(&od.witness.push_measure(&x, &tol()), 1.0 - kappa);
        prop_assert!(attained >= od.value - 1e-9);
    }

    #[test]
    fn line_spaces_reduce_to_the_line_formula(seed in any::<u64>(), n in 1usize..=5,
                                              kappa in 0.05f64..0.9) {
        let mut r = rng(seed);
        let atoms: Vec<(f64, f64)> = {
            let mut pos: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..4.0)).collect();
            pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pos.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let w = mmtk_core::testkit::random_weights(&mut r, pos.len());
            pos.into_iter().zip(w).collect()
        };
        let nu = RealMeasure::new(atoms, &tol()).unwrap();
        let x = line_space_from_measure(&nu, &tol()).unwrap();
        let od = obs_diam_exact(&x, kappa, &budget(), &tol()).unwrap();
        let pd = partial_diam_line(&nu, 1.0 - kappa);
        prop_assert!((od.value - pd).abs() < 1e-9);
    }

    #[test]
    fn sup_product_is_dominated_by_sum_product(seed in any::<u64>(), n in 1usize..=3,
                                               m in 1usize..=3) {
        let mut r = rng(seed);
        let x = random_space(&mut r, n);
        let y = random_space(&mut r, m);
        let sup = l_p_product(&x, &y, f64::INFINITY, &tol()).unwrap();
        let sum = l_p_product(&x, &y, 1.0, &tol()).unwrap();
        let f = PointMap::new(sum, sup, (0..n * m).collect()).unwrap();
        prop_assert!(f.is_lipschitz_measure_preserving(&tol()));
    }

    #[test]
    fn certificates_glue_into_valid_ambients(seed in any::<u64>(), n in 1usize..=3,
                                             m in 1usize..=3) {
        let mut r = rng(seed);
        let x = random_space(&mut r, n);
        let y = random_space(&mut r, m);
        let sol = box_exact(&x, &y, &budget(), &tol()).unwrap();
        let relation = &sol.bound.relation;
        let glued = glue(&x, &y, relation, relation.distortion(), &tol()).unwrap();
        // Copies are isometric to the doubled sources.
        for i in 0..n {
            for j in 0..n {
                let d = glued.ambient.d(glued.left_index[i], glued.left_index[j]);
                prop_assert!((d - 2.0 * x.d(i, j)).abs() <= 1e-9);
            }
        }
        for i in 0..m {
            for j in 0..m {
                let d = glued.ambient.d(glued.right_index[i], glued.right_index[j]);
                prop_assert!((d - 2.0 * y.d(i, j)).abs() <= 1e-9);
            }
        }
        // The plan restricted to the relation is a dis(S)-subtransport plan.
        for &(i, j) in relation.pairs() {
            let cross = glued.ambient.d(glued.left_index[i], glued.right_index[j]);
            prop_assert!(cross <= relation.distortion() + 1e-9);
        }
        let restricted: f64 = relation.pairs().iter().map(|&(i, j)| sol.bound.plan.at(i, j)).sum();
        prop_assert!(1.0 - restricted <= sol.value() + 1e-9);
        // The Kuratowski embedding of the glued space has zero distortion.
        let k = kuratowski(&glued.ambient);
        for a in 0..glued.ambient.n() {
            for b in 0..glued.ambient.n() {
                let sup = sup_distance(&k[a], &k[b]);
                prop_assert!((sup - glued.ambient.d(a, b)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn interpolation_is_monotone_along_the_witness(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let x1 = random_space(&mut r, n);
        let x0 = transform(&x1, &TransformSpec::Truncate(0.6 * x1.diam()), &tol()).unwrap();
        let f = dominates(&x1, &x0, &tol(), 1 << 20).unwrap();
        prop_assume!(f.is_some());
        let f = f.unwrap();
        let s = interpolate_dominated(&f, 0.25, &tol()).unwrap();
        let t = interpolate_dominated(&f, 0.75, &tol()).unwrap();
        prop_assert!(dominates(&t, &s, &tol(), 1 << 20).unwrap().is_some());
        prop_assert!(dominates(&x1, &t, &tol(), 1 << 20).unwrap().is_some());
    }
}

#[test]
fn domination_antisymmetry_up_to_isomorphism() {
    // When both directions hold on small spaces, the spaces are isomorphic.
    let t = tol();
    for seed in 0..40 {
        let mut r = rng(seed);
        let n = 2 + (seed as usize % 3);
        let x = random_space(&mut r, n);
        let perm: Vec<usize> = (0..n).rev().collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| x.d(perm[i], perm[j])).collect())
            .collect();
        let y = validate_space(
            perm.iter().map(|&i| x.label(i).to_string()).collect(),
            rows,
            perm.iter().map(|&i| x.weight(i)).collect(),
            &t,
        )
        .unwrap();
        let fwd = dominates(&x, &y, &t, 1 << 20).unwrap();
        let back = dominates(&y, &x, &t, 1 << 20).unwrap();
        assert!(fwd.is_some() && back.is_some());
        assert!(mm_isomorphic(&x, &y, &t).is_some());
    }
}

#[test]
fn domination_transitive_on_witnessed_triples() {
    let t = tol();
    for seed in 0..30 {
        let mut r = rng(seed);
        let x = random_space(&mut r, 4);
        let y = scale(&x, 0.8, &t).unwrap();
        let z = transform(&y, &TransformSpec::Truncate(0.5 * y.diam()), &t).unwrap();
        let xy = dominates(&x, &y, &t, 1 << 20).unwrap();
        let yz = dominates(&y, &z, &t, 1 << 20).unwrap();
        assert!(xy.is_some() && yz.is_some());
        assert!(dominates(&x, &z, &t, 1 << 20).unwrap().is_some());
    }
}

#[test]
fn scale_composition_close_for_general_factors() {
    let t = tol();
    let x = random_space(&mut rng(7), 5);
    for (s, u) in [(0.3, 0.7), (1.3, 0.11), (0.9, 2.4)] {
        let left = scale(&scale(&x, s, &t).unwrap(), u, &t).unwrap();
        let right = scale(&x, s * u, &t).unwrap();
        for i in 0..x.n() {
            for j in 0..x.n() {
                let (a, b) = (left.d(i, j), right.d(i, j));
                assert!((a - b).abs() <= 1e-15 * (1.0 + a.abs()));
            }
        }
    }
}
