use approx::relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semiframe::calculus::optimal_bounds;
use semiframe::classify::loglog_fit;
use semiframe::linalg::{c, inner, CMat, CVec};
use semiframe::random;
use semiframe::{FrameCalculus, HilbertScale, SpectralFrameData, VectorSystem, WeightRule};

fn system(seed: u64, d: usize, n: usize) -> VectorSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random::gaussian_system(&mut rng, d, n)
}

fn probe(seed: u64, d: usize) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    random::gaussian_vector(&mut rng, d)
}

/// `(d, N)` with `N ≥ d`, so that Gaussian systems are total.
fn total_shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..10).prop_flat_map(|d| (Just(d), d..3 * d + 2))
}

fn any_shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..10, 1usize..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesis_is_adjoint_of_analysis(seed in any::<u64>(), (d, n) in any_shape()) {
        let sys = system(seed, d, n);
        let calc = FrameCalculus::new(&sys);
        let f = probe(seed, d);
        let coeffs = probe(seed.wrapping_add(1), n);
        let lhs = inner(&calc.analysis(&f).unwrap(), &coeffs);
        let rhs = inner(&f, &calc.synthesis(&coeffs).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn quadratic_form_lies_within_bounds(seed in any::<u64>(), (d, n) in total_shape()) {
        let sys = system(seed, d, n);
        let calc = FrameCalculus::new(&sys);
        let b = calc.bounds();
        let f = probe(seed, d);
        let energy = calc.analysis(&f).unwrap().norm_squared() / f.norm_squared();
        prop_assert!(energy >= b.lower * (1.0 - 1e-10));
        prop_assert!(energy <= b.upper * (1.0 + 1e-10));
    }

    #[test]
    fn frame_and_gram_share_nonzero_spectrum(seed in any::<u64>(), (d, n) in any_shape()) {
        let sys = system(seed, d, n);
        let calc = FrameCalculus::new(&sys);
        let s = calc.spectral();
        let g = SpectralFrameData::from_operator(calc.gram());
        prop_assert_eq!(s.rank(), g.rank());
        for k in 0..s.rank() {
            prop_assert!(relative_eq!(s.eigenvalues()[k], g.eigenvalues()[k], max_relative = 1e-9));
        }
    }

    #[test]
    fn canonical_dual_reconstructs(seed in any::<u64>(), (d, n) in total_shape()) {
        let sys = system(seed, d, n);
        let calc = FrameCalculus::new(&sys);
        let dual = calc.canonical_dual().unwrap();
        let f = probe(seed, d);
        let coeffs = FrameCalculus::new(&dual).analysis(&f).unwrap();
        let rebuilt = calc.synthesis(&coeffs).unwrap();
        prop_assert!((rebuilt - &f).norm() <= 1e-8 * f.norm());
    }

    #[test]
    fn range_projection_is_orthogonal_projection(seed in any::<u64>(), (d, n) in total_shape()) {
        let sys = system(seed, d, n);
        let p = FrameCalculus::new(&sys).range_projection().unwrap();
        prop_assert!((&p * &p - &p).norm() <= 1e-9 * (1.0 + p.norm()));
        prop_assert!((p.adjoint() - &p).norm() <= 1e-9 * (1.0 + p.norm()));
        prop_assert!((p.trace().re - d as f64).abs() <= 1e-8);
    }

    #[test]
    fn bounds_scale_quadratically(seed in any::<u64>(), (d, n) in total_shape(), re in 0.1f64..5.0, im in -5.0f64..5.0) {
        let sys = system(seed, d, n);
        let s = c(re, im);
        let base = optimal_bounds(&sys);
        let scaled = optimal_bounds(&sys.scaled(s));
        prop_assert!(relative_eq!(scaled.upper, s.norm_sqr() * base.upper, max_relative = 1e-9));
        prop_assert!(relative_eq!(scaled.lower, s.norm_sqr() * base.lower, max_relative = 1e-8));
    }

    #[test]
    fn bounds_are_unitarily_invariant(seed in any::<u64>(), (d, n) in total_shape()) {
        let sys = system(seed, d, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let u: CMat = random::unitary(&mut rng, d);
        let base = optimal_bounds(&sys);
        let moved = optimal_bounds(&sys.mapped(&u).unwrap());
        prop_assert!(relative_eq!(moved.upper, base.upper, max_relative = 1e-9));
        prop_assert!(relative_eq!(moved.lower, base.lower, max_relative = 1e-8));
    }

    #[test]
    fn scale_norms_are_log_convex(seed in any::<u64>(), (d, n) in total_shape(), k in -3i32..=1) {
        let sys = system(seed, d, n);
        let hs = HilbertScale::new(&sys, 4).unwrap();
        let f = probe(seed, d);
        let mid = hs.norm(&f, k + 1).unwrap().value;
        let lo = hs.norm(&f, k).unwrap().value;
        let hi = hs.norm(&f, k + 2).unwrap().value;
        prop_assert!(mid * mid <= lo * hi * (1.0 + 1e-9));
    }

    #[test]
    fn analysis_is_scale_isometry(seed in any::<u64>(), (d, n) in total_shape(), k in -3i32..=3) {
        let sys = system(seed, d, n);
        let hs = HilbertScale::new(&sys, 4).unwrap();
        let f = probe(seed, d);
        let cf = hs.calculus().analysis(&f).unwrap();
        let lhs = hs.seq_norm(&cf, k + 1).unwrap().value;
        let rhs = hs.norm(&f, k).unwrap().value;
        prop_assert!(relative_eq!(lhs, rhs, max_relative = 1e-8));
    }

    #[test]
    fn loglog_fit_recovers_power_laws(p in -4.0f64..4.0, a in 0.1f64..10.0) {
        let pts: Vec<(usize, f64)> = [8usize, 16, 32, 64, 128].iter().map(|&n| (n, a * (n as f64).powf(p))).collect();
        let (slope, residual) = loglog_fit(&pts);
        prop_assert!((slope - p).abs() < 1e-9);
        prop_assert!(residual < 1e-9);
    }

    #[test]
    fn weight_rules_round_trip(p in -3i32..=3, r in 0.1f64..0.95) {
        for rule in [WeightRule::Power(p as f64), WeightRule::Geometric(r)] {
            let back: WeightRule = rule.to_string().parse().unwrap();
            let (a, b) = (rule.weights(6).unwrap(), back.weights(6).unwrap());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(relative_eq!(*x, *y, max_relative = 1e-12));
            }
        }
    }
}
