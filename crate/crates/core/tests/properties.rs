//! Randomized invariants of the divergences and error formulas.

use postselect::asym::{beta_from_omega, postselected_beta_ncopy};
use postselect::divergence::{
    d_omega, d_xi, dmax, helstrom_error, omega, xi, ExtendedReal, WeightedPair,
};
use postselect::linalg::{DensityMatrix, HermitianMatrix};
use postselect::random::{random_channel, random_full_rank_density, random_unitary, rng_from_seed};
use postselect::simulate::{wilson_interval, Z_99};
use postselect::sym::postselected_perr;
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn pair(seed: u64, dim: usize) -> (DensityMatrix, DensityMatrix) {
    let mut rng = rng_from_seed(seed);
    (
        random_full_rank_density(dim, &mut rng),
        random_full_rank_density(dim, &mut rng),
    )
}

fn fin(x: ExtendedReal) -> f64 {
    x.finite().expect("full-rank pairs have finite divergences")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projective_metrics_are_symmetric_and_nonnegative(seed in any::<u64>(), dim in 2usize..=4) {
        let (rho, sigma) = pair(seed, dim);
        let a = fin(d_omega(&rho, &sigma).unwrap());
        let b = fin(d_omega(&sigma, &rho).unwrap());
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < TOL);
        let x = fin(d_xi(&rho, &sigma).unwrap());
        prop_assert!((x - fin(d_xi(&sigma, &rho).unwrap())).abs() < TOL);
        // D_Ξ ≤ D_Ω ≤ 2 D_Ξ
        prop_assert!(x <= a + TOL && a <= 2.0 * x + TOL);
        prop_assert!(fin(d_omega(&rho, &rho).unwrap()).abs() < TOL);
    }

    #[test]
    fn hilbert_metric_ignores_scaling(seed in any::<u64>(), dim in 2usize..=4, c in 0.01f64..100.0) {
        let (rho, sigma) = pair(seed, dim);
        let scaled: HermitianMatrix = sigma.as_hermitian().scale(c);
        let a = fin(d_omega(&rho, &sigma).unwrap());
        let b = fin(d_omega(&rho, &scaled).unwrap());
        prop_assert!((a - b).abs() < TOL);
        // D_max shifts by -log2 c
        let shift = fin(dmax(&rho, &scaled).unwrap()) - fin(dmax(&rho, &sigma).unwrap());
        prop_assert!((shift + c.log2()).abs() < TOL);
    }

    #[test]
    fn unitary_invariance(seed in any::<u64>(), dim in 2usize..=4) {
        let (rho, sigma) = pair(seed, dim);
        let u = random_unitary(dim, &mut rng_from_seed(seed ^ 0x5a5a));
        let r2 = DensityMatrix::new(rho.as_hermitian().conjugate(&u)).unwrap();
        let s2 = DensityMatrix::new(sigma.as_hermitian().conjugate(&u)).unwrap();
        prop_assert!((fin(omega(&rho, &sigma).unwrap()) - fin(omega(&r2, &s2).unwrap())).abs() < 1e-7);
        prop_assert!((fin(xi(&rho, &sigma).unwrap()) - fin(xi(&r2, &s2).unwrap())).abs() < 1e-7);
    }

    #[test]
    fn data_processing(seed in any::<u64>(), dim in 2usize..=3, dim_out in 2usize..=3) {
        let (rho, sigma) = pair(seed, dim);
        let ch = random_channel(dim, dim_out, 2, &mut rng_from_seed(seed.wrapping_add(1)));
        let r2 = DensityMatrix::new(ch.apply(&rho).unwrap()).unwrap();
        let s2 = DensityMatrix::new(ch.apply(&sigma).unwrap()).unwrap();
        prop_assert!(fin(dmax(&r2, &s2).unwrap()) <= fin(dmax(&rho, &sigma).unwrap()) + TOL);
        prop_assert!(fin(d_omega(&r2, &s2).unwrap()) <= fin(d_omega(&rho, &sigma).unwrap()) + TOL);
    }

    #[test]
    fn dmax_is_additive(seed in any::<u64>()) {
        let (r1, s1) = pair(seed, 2);
        let (r2, s2) = pair(seed.wrapping_mul(3).wrapping_add(7), 2);
        let joint = fin(dmax(&r1.tensor(&r2).unwrap(), &s1.tensor(&s2).unwrap()).unwrap());
        let sum = fin(dmax(&r1, &s1).unwrap()) + fin(dmax(&r2, &s2).unwrap());
        prop_assert!((joint - sum).abs() < TOL);
    }

    #[test]
    fn beta_is_monotone_and_below_one_minus_eps(w in 1.0f64..1e6, e1 in 0.01f64..0.99, e2 in 0.01f64..0.99) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let b_lo = beta_from_omega(lo, ExtendedReal::Finite(w));
        let b_hi = beta_from_omega(hi, ExtendedReal::Finite(w));
        prop_assert!(b_hi <= b_lo + 1e-15);
        prop_assert!(b_lo <= 1.0 - lo + 1e-15);
        prop_assert!(b_lo > 0.0);
    }

    #[test]
    fn ncopy_beta_decreases_with_n(seed in any::<u64>(), eps in 0.05f64..0.95) {
        let (rho, sigma) = pair(seed, 2);
        let mut prev = 1.0;
        for n in 1..=6 {
            let b = postselected_beta_ncopy(&rho, &sigma, eps, n).unwrap();
            prop_assert!(b <= prev + 1e-15);
            prev = b;
        }
    }

    #[test]
    fn postselection_beats_helstrom(seed in any::<u64>(), dim in 2usize..=4, p in 0.05f64..0.95) {
        let (rho, sigma) = pair(seed, dim);
        let r = postselected_perr(&rho, &sigma, p).unwrap();
        let wp = WeightedPair::new(rho, sigma, p).unwrap();
        prop_assert!(r.perr_bar <= helstrom_error(&wp) + 1e-10);
        prop_assert!(r.perr_bar <= p.min(1.0 - p) + 1e-12);
    }

    #[test]
    fn wilson_contains_point_estimate(k in 0u64..1000, extra in 0u64..1000) {
        let m = k + extra + 1;
        let ci = wilson_interval(k, m, Z_99).unwrap();
        let p = k as f64 / m as f64;
        prop_assert!(0.0 <= ci.lo && ci.lo <= p + 1e-15 && p <= ci.hi + 1e-15 && ci.hi <= 1.0);
    }
}
