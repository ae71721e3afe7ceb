use sketchy_core::diagnostics::*;
use sketchy_core::matcore::{gaussian_map, sample_without_replacement, svd, thin_qr};
use sketchy_core::sketch::{build_core_sketches, build_full_sketches, recover, RankRFactors, SketchConfig};
use sketchy_core::{DenseMatrix, Error, RandomStream};

fn haar_basis(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    thin_qr(&gaussian_map(rows, cols, RandomStream::new(seed, 77)).unwrap()).unwrap().0
}

fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> DenseMatrix {
    let left = gaussian_map(m, r, RandomStream::new(seed, 100)).unwrap();
    let right = gaussian_map(r, n, RandomStream::new(seed, 101)).unwrap();
    left.matmul(&right).unwrap()
}

#[test]
fn oracle_truncation_error_equals_scree() {
    for seed in 0..20 {
        let (m, n) = (30 + seed as usize, 20);
        let a = gaussian_map(m, n, RandomStream::new(seed, 1)).unwrap();
        let full = svd(&a, None).unwrap();
        let curve = scree_curve(&full.sigma).unwrap();
        for r in [1, 5, 12] {
            let t = full.truncated(r);
            let f = RankRFactors { u: t.u, sigma: t.sigma, v: t.v };
            let e = approx_error(&a, &f).unwrap();
            assert!((e - curve[r]).abs() <= 1e-12, "seed {seed} r {r}: {e} vs {}", curve[r]);
        }
    }
}

#[test]
fn blockwise_error_matches_direct_difference() {
    // More rows than one accumulation block.
    let a = gaussian_map(600, 40, RandomStream::new(3, 0)).unwrap();
    let t = svd(&a, Some(7)).unwrap();
    let f = RankRFactors { u: t.u, sigma: t.sigma, v: t.v };
    let direct = a.sub(&f.reconstruct()).unwrap().frobenius_norm_sq() / a.frobenius_norm_sq();
    assert!((approx_error(&a, &f).unwrap() - direct).abs() <= 1e-13);
}

#[test]
fn computed_bases_have_coherence_in_range() {
    let a = low_rank(120, 90, 3, 4);
    for seed in 0..5 {
        let cfg = SketchConfig::new(3).with_ratios(0.4, 0.4).with_seed(seed);
        let f = recover(&build_core_sketches(&a, &cfg).unwrap()).unwrap();
        let stats = incoherence_stats(&a, 3, &f).unwrap();
        for (v, dim) in [(stats.mu, 120.0), (stats.nu, 90.0), (stats.mu_prime, 120.0), (stats.nu_prime, 90.0)] {
            assert!((1.0 - 1e-12..=dim).contains(&v), "{stats:?}");
        }
    }
}

#[test]
fn lemma1_holds_for_incoherent_bases() {
    let v1 = haar_basis(2000, 8, 1);
    let mu = incoherence(&v1, 8).unwrap();
    let n = sample_floor(mu, 8).ceil() as usize;
    let rep = check_lemma1(&v1, n, 200, RandomStream::new(2, 0)).unwrap();
    assert!(rep.floor_met);
    assert!(rep.pass_rate.rate() >= 0.95, "{rep:?}");
}

// With coordinate columns, σ_r of the sample is 1 if every pivot row is drawn
// and 0 otherwise, and σ_1 = 1 clears the upper bound only when n/N ≥ 6/13.
// So the pass probability is the chance of drawing all r pivots:
// n/N for r = 1, n(n−1)/(N(N−1)) for r = 2.
#[test]
fn lemma1_for_coordinate_bases_matches_the_draw_probability() {
    let trials = 4000;
    for (r, n, big_n) in [(1, 12, 20), (2, 12, 20), (1, 30, 40)] {
        let v1 = DenseMatrix::identity(big_n).columns(0..r);
        let rep = check_lemma1(&v1, n, trials, RandomStream::new(r as u64, n as u64)).unwrap();
        let p = (0..r).map(|i| (n - i) as f64 / (big_n - i) as f64).product::<f64>();
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((rep.pass_rate.rate() - p).abs() <= 4.0 * se, "r {r}: {} vs {p}", rep.pass_rate.rate());
    }
    // Below n/N = 6/13 the upper bound fails whenever a pivot row is drawn.
    let v1 = DenseMatrix::identity(40).columns(0..1);
    let rep = check_lemma1(&v1, 10, 500, RandomStream::new(9, 0)).unwrap();
    assert_eq!(rep.pass_rate.passes, 0);
}

#[test]
fn lemma3_inequality_holds_on_random_instances() {
    let (m, n, r, k, cols) = (50, 40, 5, 10, 20);
    let mut evaluated = 0;
    for t in 0..100u64 {
        let a = gaussian_map(m, n, RandomStream::new(t, 1)).unwrap();
        let theta = sample_without_replacement(cols, n, RandomStream::new(t, 2)).unwrap();
        let omega = gaussian_map(k, cols, RandomStream::new(t, 3)).unwrap();
        let sides = check_lemma3(&a, r, &theta, &omega).unwrap();
        assert!(sides.holds(1e-12, a.frobenius_norm_sq()), "trial {t}: {sides:?}");
        evaluated += 1;
    }
    assert_eq!(evaluated, 100);
}

#[test]
fn lemma3_exact_rank_captures_the_range() {
    let a = low_rank(50, 40, 5, 8);
    let theta = sample_without_replacement(20, 40, RandomStream::new(1, 0)).unwrap();
    let omega = gaussian_map(10, 20, RandomStream::new(1, 1)).unwrap();
    let sides = check_lemma3(&a, 5, &theta, &omega).unwrap();
    assert!(sides.rhs <= 1e-20 * a.frobenius_norm_sq(), "{sides:?}");
    assert!(sides.lhs <= 1e-20 * a.frobenius_norm_sq(), "{sides:?}");
}

#[test]
fn lemma3_reports_degenerate_maps() {
    let a = gaussian_map(30, 20, RandomStream::new(2, 0)).unwrap();
    let theta = sample_without_replacement(10, 20, RandomStream::new(2, 1)).unwrap();
    let omega = DenseMatrix::zeros(8, 10);
    assert!(matches!(check_lemma3(&a, 3, &theta, &omega), Err(Error::Degenerate(_))));
}

#[test]
fn lemma4_tail_rate() {
    let trials = 10_000;
    let rep = check_lemma4(20, 8, trials, RandomStream::new(4, 0)).unwrap();
    let allowed = 1.0 / 8000.0 + 3.0 * ((1.0 / 8000.0) / trials as f64).sqrt();
    assert!(1.0 - rep.pass_rate.rate() <= allowed, "{rep:?}");
}

#[test]
fn lemma5_examples() {
    let rep =
        check_lemma5(&DenseMatrix::identity(2), &DenseMatrix::identity(2), 10_000, RandomStream::new(5, 0)).unwrap();
    assert_eq!(rep.target, 4.0);
    assert!(rep.deviation <= 0.05, "{rep:?}");
    let s = DenseMatrix::from_diag(2, 2, &[1.0, 2.0]);
    let rep = check_lemma5(&s, &DenseMatrix::identity(1), 10, RandomStream::new(5, 1)).unwrap();
    assert_eq!(rep.target, 5.0);
    let rep = check_lemma5(&s, &DenseMatrix::identity(2), 10, RandomStream::new(5, 1)).unwrap();
    assert_eq!(rep.target, 10.0);

    let s = gaussian_map(3, 5, RandomStream::new(6, 0)).unwrap();
    let t = gaussian_map(4, 2, RandomStream::new(6, 1)).unwrap();
    let rep = check_lemma5(&s, &t, 10_000, RandomStream::new(6, 2)).unwrap();
    assert!(rep.deviation <= 0.05, "{rep:?}");
}

#[test]
fn lemma7_identity_on_pipeline_instances() {
    for seed in 0..10 {
        let a = gaussian_map(80, 60, RandomStream::new(seed, 5)).unwrap();
        let cfg = SketchConfig::new(2).with_ratios(0.5, 0.6).with_seed(seed);
        let sk = build_core_sketches(&a, &cfg).unwrap();
        let f = recover(&sk).unwrap();
        let residual = check_lemma7(&a, &f, &sk).unwrap();
        assert!(residual <= 1e-10, "seed {seed}: {residual}");

        let mut noisy = sk.clone();
        let noise = gaussian_map(noisy.z.nrows(), noisy.z.ncols(), RandomStream::new(seed, 6)).unwrap();
        let scale = 1e-3 * sk.z.frobenius_norm() / sk.z.nrows() as f64;
        noisy.z = noisy.z.add(&noise.scale(scale)).unwrap();
        let f_noisy = recover(&noisy).unwrap();
        assert!(check_lemma7(&a, &f_noisy, &noisy).unwrap() >= 1e-6);
    }
}

#[test]
fn lemma7_full_sketch_of_low_rank_input() {
    let a = low_rank(60, 50, 4, 3);
    let sk = build_full_sketches(&a, &SketchConfig::new(2).with_seed(1)).unwrap();
    let f = recover(&sk).unwrap();
    let qt_a_p = f.q.t_matmul(&a).unwrap().matmul(&f.p).unwrap();
    assert!(f.core.sub(&qt_a_p).unwrap().frobenius_norm() <= 1e-10 * a.frobenius_norm());
    assert!(check_lemma7(&a, &f, &sk).unwrap() <= 1e-10);
}

#[test]
fn coverage_on_a_small_instance() {
    let u = haar_basis(120, 40, 1);
    let v = haar_basis(100, 40, 2);
    let sigma: Vec<f64> = (1..=40).map(|i| (i as f64).powf(-1.5)).collect();
    let a = u.scale_columns(&sigma).matmul_t(&v).unwrap();
    let cfg = SketchConfig::new(3).with_ratios(0.5, 0.5).with_seed(3);
    let rep = theorem_coverage(&a, &cfg, 20).unwrap();
    assert_eq!(rep.trials, 20);
    assert_eq!(rep.range_passes, 20);
    assert_eq!(rep.final_passes, 20);
    assert!(rep.worst_final_ratio < 1.0 && rep.worst_range_ratio < 1.0);
    assert!(rep.report.incoherence.mu_prime >= 1.0);
}
