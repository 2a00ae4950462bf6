use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ppc::affinity::{
    labels_by_radius, radius_for_avg_neighbors, Dataset, FeatureMatrix, Metric, ProximityLabels,
};
use ppc::eval::{auc, precision_recall};
use ppc::index::{hamming_words, PackedCodes};
use ppc::mincut::{
    bit_update, bit_update_with, exhaustive_maxcut, objective, psd_shift, vector_update_with,
    BitVector, SignedWeightMatrix,
};
use ppc::trainer::{
    accumulate, hamming_from_gram, optimize_alpha, solve_bit, weight_matrix, CodeMatrix, TrainConfig,
    TrainerState,
};

/// Symmetric matrix on a 1/16 grid; objectives of ±1 vectors are exact.
fn dyadic_matrix(max_n: usize) -> impl Strategy<Value = SignedWeightMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-64i32..=64, n * (n + 1) / 2).prop_map(move |vals| {
            let mut it = vals.into_iter();
            SignedWeightMatrix::from_upper(n, |_, _| it.next().unwrap() as f64 / 16.0)
        })
    })
}

fn matrix_and_bits(max_n: usize) -> impl Strategy<Value = (SignedWeightMatrix, BitVector)> {
    dyadic_matrix(max_n).prop_flat_map(|w| {
        let n = w.n();
        (Just(w), signs(n))
    })
}

fn signs(n: usize) -> impl Strategy<Value = BitVector> {
    prop::collection::vec(prop::bool::ANY, n)
        .prop_map(|v| BitVector::new(v.into_iter().map(|b| if b { 1 } else { -1 }).collect()).unwrap())
}

fn code_matrix(n: usize, p: usize) -> impl Strategy<Value = CodeMatrix> {
    prop::collection::vec(signs(n), p).prop_map(move |bits| CodeMatrix::from_bits(n, bits).unwrap())
}

fn labels(n: usize) -> impl Strategy<Value = ProximityLabels> {
    prop::collection::vec(prop::bool::ANY, n * (n - 1) / 2).prop_map(move |v| {
        let mut it = v.into_iter();
        ProximityLabels::from_fn(n, |_, _| it.next().unwrap())
    })
}

fn points(max_n: usize, d: usize) -> impl Strategy<Value = Dataset> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-100.0f64..100.0, n * d)
            .prop_map(move |v| Dataset::new(FeatureMatrix::new(n, d, v).unwrap(), None, None).unwrap())
    })
}

fn flipped(b: &BitVector, i: usize) -> BitVector {
    let mut v = b.as_slice().to_vec();
    v[i] = -v[i];
    BitVector::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn objective_is_sign_symmetric((w, b) in matrix_and_bits(16)) {
        prop_assert_eq!(objective(&w, &b).unwrap(), objective(&w, &b.negated()).unwrap());
    }

    #[test]
    fn bit_update_commutes_with_negation((w, b) in matrix_and_bits(16)) {
        let (out, _) = bit_update(&w, &b).unwrap();
        let (neg, _) = bit_update(&w, &b.negated()).unwrap();
        prop_assert_eq!(neg, out.negated());
    }

    #[test]
    fn bit_update_flips_never_decrease((w, b0) in matrix_and_bits(16)) {
        let mut prev = objective(&w, &b0).unwrap();
        let mut ok = true;
        let (b, report) = bit_update_with(&w, &b0, 100, |_, b| {
            let v = objective(&w, b).unwrap();
            ok &= v > prev;
            prev = v;
        }).unwrap();
        prop_assert!(ok);
        prop_assert!(report.converged);
        prop_assert!(report.objective >= report.initial_objective);
        let value = objective(&w, &b).unwrap();
        for i in 0..w.n() {
            prop_assert!(objective(&w, &flipped(&b, i)).unwrap() <= value);
        }
    }

    #[test]
    fn diagonal_shift_preserves_everything(
        (w, b0) in matrix_and_bits(12),
        c in -64i32..=64,
        other_seed in any::<u64>(),
    ) {
        let c = c as f64 / 4.0;
        let shifted = w.with_diagonal_added(c);
        prop_assert_eq!(bit_update(&w, &b0).unwrap().0, bit_update(&shifted, &b0).unwrap().0);
        let other = ppc::mincut::init::init_random(w.n(), other_seed);
        let before = objective(&w, &b0).unwrap().total_cmp(&objective(&w, &other).unwrap());
        let after = objective(&shifted, &b0).unwrap().total_cmp(&objective(&shifted, &other).unwrap());
        prop_assert_eq!(before, after);
    }

    #[test]
    fn vector_update_is_monotone_on_shifted_matrix((w, b0) in matrix_and_bits(16)) {
        let (shifted, shift) = psd_shift(&w);
        prop_assert!(shift >= 0.0);
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        let (_, report) = vector_update_with(&w, &b0, 1000, |b| {
            let v = objective(&shifted, b).unwrap();
            ok &= v >= prev;
            prev = v;
        }).unwrap();
        prop_assert!(ok);
        prop_assert!(report.objective >= report.initial_objective);
    }

    #[test]
    fn shifted_matrix_is_psd(w in dyadic_matrix(20), seed in any::<u64>()) {
        let (shifted, _) = psd_shift(&w);
        let scale = shifted.norm_inf();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let mut v: Vec<f64> = (0..w.n()).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            let q: f64 = v.iter().zip(shifted.mul_vec(&v)).map(|(a, b)| a * b).sum();
            prop_assert!(q >= -1e-8 * scale);
        }
    }

    #[test]
    fn exhaustive_dominates((w, b) in matrix_and_bits(10)) {
        let (best, value) = exhaustive_maxcut(&w).unwrap();
        prop_assert_eq!(best[0], 1);
        prop_assert_eq!(objective(&w, &best).unwrap(), value);
        prop_assert!(objective(&w, &b).unwrap() <= value);
        prop_assert!(bit_update(&w, &b).unwrap().1.objective <= value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn labels_partition_pairs(l in (2usize..30).prop_flat_map(labels)) {
        let n = l.n() as u64;
        prop_assert_eq!(l.near_count() + l.far_count(), n * (n - 1) / 2);
        prop_assert_eq!(l.pairs().count() as u64, l.pair_count());
        for (i, j, near) in l.pairs() {
            prop_assert!(i < j);
            prop_assert_eq!(l.is_near(j, i), near);
        }
    }

    #[test]
    fn radius_is_monotone(data in points(25, 3), r1 in 0.0f64..150.0, dr in 0.0f64..150.0) {
        let small = labels_by_radius(&data, r1, Metric::Euclidean);
        let large = labels_by_radius(&data, r1 + dr, Metric::Euclidean);
        for ((_, _, a), (_, _, b)) in small.pairs().zip(large.pairs()) {
            prop_assert!(!a || b);
        }
    }

    #[test]
    fn average_neighbor_target_is_met(data in points(40, 2), t in 0.05f64..0.95) {
        let n = data.n();
        let target = t * (n - 1) as f64;
        let choice = radius_for_avg_neighbors(&data, target, Metric::Euclidean).unwrap();
        let labels = labels_by_radius(&data, choice.radius, Metric::Euclidean);
        let achieved = 2.0 * labels.near_count() as f64 / n as f64;
        prop_assert_eq!(achieved, choice.achieved_avg);
        // Distinct continuous distances: only the rounding of the rank matters.
        prop_assert!((achieved - target).abs() <= 2.0 / n as f64 + 1e-12, "{} vs {}", achieved, target);
    }

    #[test]
    fn metrics_are_metrics(data in points(3, 4)) {
        prop_assume!(data.n() == 3);
        for m in [Metric::Euclidean, Metric::L1] {
            let (a, b, c) = (data.point(0), data.point(1), data.point(2));
            prop_assert_eq!(m.distance(a, a), 0.0);
            prop_assert_eq!(m.distance(a, b), m.distance(b, a));
            prop_assert!(m.distance(a, c) <= m.distance(a, b) + m.distance(b, c) + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_tracks_codes(c in (2usize..20, 1usize..20).prop_flat_map(|(n, p)| code_matrix(n, p))) {
        let mut state = TrainerState::new(c.n());
        for (k, bit) in c.bits().iter().enumerate() {
            accumulate(&mut state, bit).unwrap();
            state.check_invariants().unwrap();
            for i in 0..c.n() {
                for j in 0..c.n() {
                    let mismatches = (0..=k).filter(|&t| c.get(t, i) != c.get(t, j)).count() as i32;
                    prop_assert_eq!(hamming_from_gram(state.gram(i, j), k + 1).unwrap(), 2 * mismatches);
                }
            }
        }
    }

    #[test]
    fn trainer_identities(
        (c, l) in (3usize..16, 1usize..10).prop_flat_map(|(n, p)| (code_matrix(n, p), labels(n)))
    ) {
        let mut state = TrainerState::new(c.n());
        for bit in c.bits() {
            accumulate(&mut state, bit).unwrap();
        }
        let k = c.p() as i32;
        let choice = optimize_alpha(&l, &state).unwrap();
        let alpha = choice.alpha as i32;
        let beta = choice.beta as i32;
        prop_assert_eq!(beta, k - alpha);

        // Full scan of the candidate grid.
        let gap = |a: i32| {
            let en = l.pairs().filter(|&(i, j, near)| near && c.hamming(i, j) > a).count() as i64;
            let ef = l.pairs().filter(|&(i, j, near)| !near && c.hamming(i, j) <= a).count() as i64;
            (en - ef).abs()
        };
        let best = (0..=k).map(|t| gap(2 * t - 1)).min().unwrap();
        prop_assert_eq!(gap(alpha), best);
        prop_assert!((0..=k).map(|t| 2 * t - 1).take_while(|&a| a < alpha).all(|a| gap(a) > best));

        let w: SignedWeightMatrix = weight_matrix(&l, &state, choice.beta);
        for (i, j, near) in l.pairs() {
            let y = if near { 1 } else { -1 };
            let d = c.hamming(i, j);
            prop_assert_eq!(y * (alpha - d), y * (state.gram(i, j) - beta));
            let wij = w.get(i, j);
            prop_assert!(wij.abs() < 1.0 && wij != 0.0);
            prop_assert_eq!(wij.signum() as i32, y);
        }
    }

    #[test]
    fn solver_step_never_loses_to_its_guess(l in (3usize..24).prop_flat_map(labels), seed in any::<u64>()) {
        let state = TrainerState::new(l.n());
        let cfg = TrainConfig { seed, ..TrainConfig::default() };
        let sol = solve_bit::<f64>(&state, &l, &cfg).unwrap();
        prop_assert!(sol.report.objective >= sol.report.initial_objective);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packing_round_trips(c in (1usize..12, 1usize..150).prop_flat_map(|(n, p)| code_matrix(n, p))) {
        let packed = PackedCodes::pack(&c);
        prop_assert_eq!(packed.unpack(), c.clone());
        let p = c.p();
        if p % 64 != 0 {
            for i in 0..c.n() {
                prop_assert_eq!(packed.code(i).last().unwrap() >> (p % 64), 0);
            }
        }
        let bytes = packed.to_bytes();
        prop_assert_eq!(PackedCodes::from_bytes(&bytes).unwrap(), packed.clone());
        let ids: Vec<String> = (0..c.n()).map(|i| format!("pt-{i}")).collect();
        let named = packed.with_ids(ids).unwrap();
        prop_assert_eq!(PackedCodes::from_bytes(&named.to_bytes()).unwrap().to_bytes(), named.to_bytes());
    }

    #[test]
    fn hamming_is_a_scaled_metric(c in (3usize..4, 1usize..130).prop_flat_map(|(n, p)| code_matrix(n, p))) {
        let packed = PackedCodes::pack(&c);
        let p = c.p() as i32;
        let d = |i: usize, j: usize| hamming_words(packed.code(i), packed.code(j)) as i32;
        for i in 0..3 {
            prop_assert_eq!(d(i, i), 0);
            for j in 0..3 {
                let dot: i32 = (0..c.p()).map(|t| (c.get(t, i) * c.get(t, j)) as i32).sum();
                prop_assert_eq!(d(i, j), p - dot);
                prop_assert_eq!(d(i, j), d(j, i));
                prop_assert_eq!(d(i, j) % 2, 0);
            }
        }
        prop_assert!(d(0, 2) / 2 <= d(0, 1) / 2 + d(1, 2) / 2);
    }

    #[test]
    fn queries_partition_and_order(
        c in (1usize..40, 1usize..70).prop_flat_map(|(n, p)| code_matrix(n, p)),
        q in 0usize..40,
        alpha in -2.0f64..150.0,
        k in 0usize..50,
    ) {
        let packed = PackedCodes::pack(&c);
        let q = packed.code(q % c.n()).to_vec();
        let hits = packed.query_radius(&q, alpha).unwrap();
        let dist = |i: usize| hamming_words(packed.code(i), &q);
        for i in 0..c.n() {
            prop_assert_eq!(hits.contains(&i), dist(i) as f64 <= alpha);
        }
        let all = packed.query_knn(&q, c.n()).unwrap();
        let mut sorted: Vec<usize> = (0..c.n()).collect();
        sorted.sort_by_key(|&i| (dist(i), i));
        prop_assert_eq!(&all, &sorted);
        let top = packed.query_knn(&q, k).unwrap();
        prop_assert_eq!(&top[..], &sorted[..k.min(c.n())]);
        prop_assert_eq!(&hits[..], &sorted[..hits.len()]);
    }

    #[test]
    fn pr_curve_invariants(
        (c, l) in (2usize..30, 1usize..12).prop_flat_map(|(n, p)| (code_matrix(n, p), labels(n)))
    ) {
        prop_assume!(l.near_count() > 0);
        let curve = precision_recall(&PackedCodes::pack(&c), &l).unwrap();
        prop_assert_eq!(curve.points.len(), c.p() + 1);
        let mut prev = curve.points[0];
        for pt in &curve.points {
            prop_assert_eq!(pt.tp + pt.fp + pt.fn_ + pt.tn, l.pair_count());
            prop_assert!((0.0..=1.0).contains(&pt.precision));
            prop_assert!(pt.tp >= prev.tp && pt.fp >= prev.fp && pt.recall >= prev.recall);
            prev = *pt;
        }
        prop_assert_eq!(prev.recall, 1.0);
        let a = auc(&curve).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }
}

#[test]
fn gershgorin_shifted_iterates_only_move_on_exact_ties() {
    // With the Gershgorin shift, bᵢ·((W + sI)b)ᵢ ≥ 0 for every i, so a sign
    // iteration can only change a bit whose shifted field is exactly zero
    // (where the sign(0) = +1 rule applies). Negating b0 is therefore
    // symmetric except on such ties.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let n = rng.gen_range(3..20);
        let w = SignedWeightMatrix::from_upper(n, |i, j| {
            if i == j { 0.0 } else { rng.gen_range(-8i32..=8) as f64 }
        });
        let (shifted, _) = psd_shift(&w);
        let b0 = ppc::mincut::init::init_random(n, rng.gen());
        let mut prev: Option<BitVector> = None;
        vector_update_with(&w, &b0, 1000, |b| {
            if let Some(p) = &prev {
                let field = shifted.mul_bits(p);
                for i in 0..n {
                    if b[i] != p[i] {
                        assert_eq!(field[i], 0.0);
                        assert_eq!(b[i], 1);
                    }
                }
            }
            prev = Some(b.clone());
        })
        .unwrap();
    }
}
