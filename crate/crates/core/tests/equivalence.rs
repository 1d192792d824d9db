//! The rearranged engine against pixel-domain brute force.

use nfr_core::reference_filters::pixel_functional_j;
use nfr_core::synthetic::{random_levels, squares};
use nfr_core::{
    decreasing_rearrangement, direct_nf, functional_j, iterate, reconstruct, FilterConfig, Image64, Kernel,
    Rearrangement, Scheme,
};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn run_1d(img: &Image64, h: f64, n: usize, scheme: Scheme) -> Image64 {
    let (v0, levels) = decreasing_rearrangement(img);
    let cfg = FilterConfig::new(Kernel::gaussian(h).unwrap())
        .scheme(scheme)
        .max_iterations(n)
        .stop_tolerance(1e-300);
    // a run that reaches a constant early stops there; further steps are no-ops
    let trace = iterate(&v0, &cfg).unwrap();
    reconstruct(&levels, trace.last().values()).unwrap()
}

#[test]
fn one_d_iterate_matches_direct_filter() {
    for seed in 0..4 {
        let img = random_levels::<f64>(&[16, 16], 24, seed);
        for scheme in [Scheme::Varying, Scheme::Fixed] {
            for h in [5.0, 40.0] {
                let one_d = run_1d(&img, h, 5, scheme);
                let direct = direct_nf(&img, &Kernel::gaussian(h).unwrap(), 5, scheme).unwrap();
                for (a, b) in one_d.data().iter().zip(direct.data()) {
                    assert!(rel_close(*a, *b, 1e-10), "{scheme:?} h={h}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn three_dimensional_volume() {
    let img = random_levels::<f64>(&[6, 5, 4], 12, 9);
    let one_d = run_1d(&img, 30.0, 4, Scheme::Varying);
    let direct = direct_nf(&img, &Kernel::gaussian(30.0).unwrap(), 4, Scheme::Varying).unwrap();
    assert_eq!(one_d.shape(), &[6, 5, 4]);
    for (a, b) in one_d.data().iter().zip(direct.data()) {
        assert!(rel_close(*a, *b, 1e-10));
    }
}

#[test]
fn functional_j_matches_pixel_pairs() {
    let img = random_levels::<f64>(&[12, 12], 32, 21);
    let (v, _) = decreasing_rearrangement(&img);
    assert!(v.len() <= 32 && v.len() > 20);
    for k in [Kernel::gaussian(15.0).unwrap(), Kernel::power_decay(2.0, 15.0).unwrap()] {
        let fast = functional_j(&v, &k);
        let brute = pixel_functional_j(&img, &k);
        assert!(rel_close(fast, brute, 1e-9), "{fast} vs {brute}");
    }
}

#[test]
fn equi_measurability() {
    let fixtures = [
        squares::<f64>(16),
        random_levels(&[16, 16], 32, 1),
        random_levels(&[9, 7], 200, 2),
    ];
    for img in &fixtures {
        let (v, _) = decreasing_rearrangement(img);
        let fs: [&dyn Fn(f64) -> f64; 3] = [&|x| x, &|x| x * x, &|x| (x / 64.0).exp()];
        for f in fs {
            let pixels: f64 = img.data().iter().map(|&x| f(x)).sum();
            assert!(rel_close(pixels, v.integrate(f), 1e-12));
        }
        assert_eq!(v.total_mass(), img.len() as f64);
        assert_eq!(v.sup_norm(), img.sup_norm());
    }
}

#[test]
fn rearrangement_idempotent_through_reconstruct() {
    let img = random_levels::<f64>(&[10, 10], 16, 5);
    let (v, levels) = decreasing_rearrangement(&img);
    let back = reconstruct(&levels, levels.values()).unwrap();
    let (v2, _) = decreasing_rearrangement(&back);
    assert_eq!(v, v2);
}

#[test]
fn direct_filter_is_a_contrast_change() {
    for seed in 0..5 {
        let img = random_levels::<f64>(&[12, 12], 40, 100 + seed);
        for h in [4.0, 25.0, 90.0] {
            let out = direct_nf(&img, &Kernel::gaussian(h).unwrap(), 3, Scheme::Varying).unwrap();
            let mut pairs: Vec<(f64, f64)> = img.data().iter().copied().zip(out.data().iter().copied()).collect();
            pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in pairs.windows(2) {
                if w[0].0 == w[1].0 {
                    assert_eq!(w[0].1, w[1].1);
                } else {
                    assert!(w[0].1 <= w[1].1);
                }
            }
        }
    }
}

#[test]
fn f32_engine_tracks_f64() {
    let img64 = random_levels::<f64>(&[16, 16], 20, 3);
    let img32 = nfr_core::Image32::new(img64.data().iter().map(|&v| v as f32).collect(), vec![16, 16]).unwrap();
    let (v64, _) = decreasing_rearrangement(&img64);
    let (v32, _) = decreasing_rearrangement(&img32);
    let t64 = iterate(
        &v64,
        &FilterConfig::new(Kernel::gaussian(20.0).unwrap()).max_iterations(5),
    )
    .unwrap();
    let t32 = iterate(
        &v32,
        &FilterConfig::new(Kernel::gaussian(20.0f32).unwrap()).max_iterations(5),
    )
    .unwrap();
    for (a, b) in t64.iterates[3].values().iter().zip(t32.iterates[3].values()) {
        assert!((a - *b as f64).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iterates_respect_invariants(seed in 0u64..10_000, levels in 2usize..48, h in 2.0f64..150.0,
                                   fixed in any::<bool>()) {
        let img = random_levels::<f64>(&[8, 8], levels, seed);
        let (v0, _) = decreasing_rearrangement(&img);
        let scheme = if fixed { Scheme::Fixed } else { Scheme::Varying };
        let cfg = FilterConfig::new(Kernel::gaussian(h).unwrap()).scheme(scheme).max_iterations(25);
        let trace = iterate(&v0, &cfg).unwrap();
        for w in trace.sup_norms.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for it in &trace.iterates {
            prop_assert!(it.is_non_increasing());
            prop_assert!(it.same_partition(&v0));
            prop_assert!(it.max_value() <= v0.max_value() && it.min_value() >= v0.min_value());
        }
        if !fixed {
            for w in trace.j_values.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn flat_regions_stay_flat(values in proptest::collection::vec(0u8..6, 6)) {
        // weights with repeated values, as the fixed scheme sees them
        let w: Vec<f64> = values.iter().map(|&v| v as f64 * 10.0).collect();
        let x: Vec<f64> = (0..6).map(|i| 100.0 - i as f64).collect();
        let masses = vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0];
        let wr = Rearrangement::from_profile(w.clone(), masses.clone()).unwrap();
        let xr = Rearrangement::from_profile(x, masses).unwrap();
        let out = nfr_core::nf_step(&wr, &xr, &Kernel::gaussian(7.0).unwrap()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if w[i] == w[j] {
                    prop_assert_eq!(out.values()[i], out.values()[j]);
                }
            }
        }
    }
}
