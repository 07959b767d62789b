use proptest::prelude::*;
use visval::presets::city_config;
use visval::render::{schlick_phase, transmittance, WeatherTag};
use visval::scenegen::{sample_scene, ObjectClass};
use visval::validators::{ds_angular_error, oc_measure, population_variance, spearman_rho};

fn ints(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-20i32..20).prop_map(f64::from), n)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..30).prop_flat_map(|n| (ints(n), ints(n)))
}

fn non_constant(v: &[f64]) -> bool {
    v.iter().any(|a| *a != v[0])
}

proptest! {
    #[test]
    fn spearman_ignores_increasing_maps((x, y) in pair(), a in 1i32..8, b in -50i32..50) {
        prop_assume!(non_constant(&x) && non_constant(&y));
        let mapped: Vec<f64> = y.iter().map(|v| f64::from(a) * v * v * v + f64::from(b)).collect();
        prop_assert_eq!(spearman_rho(&x, &y).unwrap(), spearman_rho(&x, &mapped).unwrap());
    }

    #[test]
    fn spearman_is_symmetric_and_bounded((x, y) in pair()) {
        prop_assume!(non_constant(&x) && non_constant(&y));
        let r = spearman_rho(&x, &y).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert_eq!(r, spearman_rho(&y, &x).unwrap());
        let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert_eq!(-r, spearman_rho(&x, &flipped).unwrap());
        prop_assert_eq!(oc_measure(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn spearman_rejects_constant_input(n in 2usize..20, c in -5.0f64..5.0, y in ints(20)) {
        prop_assert!(spearman_rho(&vec![c; n], &y[..n]).is_err());
    }

    #[test]
    fn variance_is_non_negative_and_order_free(mut v in prop::collection::vec(-1e3f64..1e3, 1..60), shift in -1e3f64..1e3) {
        let var = population_variance(&v);
        prop_assert!(var >= 0.0);
        let scale = 1e-9 * (1.0 + var + shift.abs() * shift.abs());
        let shifted: Vec<f64> = v.iter().map(|a| a + shift).collect();
        prop_assert!((population_variance(&shifted) - var).abs() <= scale);
        v.reverse();
        prop_assert!((population_variance(&v) - var).abs() <= scale);
    }

    #[test]
    fn constant_values_have_zero_variance(c in -1e6f64..1e6, n in 1usize..50) {
        prop_assert_eq!(population_variance(&vec![c; n]), 0.0);
    }

    #[test]
    fn ds_fraction_grows_with_threshold(
        pixels in prop::collection::vec(prop::collection::vec(prop::array::uniform3(0.01f64..1.0), 3..7), 1..20),
        t in 0.1f64..10.0,
    ) {
        let (Ok(lo), Ok(hi)) = (ds_angular_error(&pixels, t), ds_angular_error(&pixels, 2.0 * t)) else {
            return Ok(());
        };
        prop_assert!(lo.fraction_below <= hi.fraction_below);
        prop_assert!(lo.mean_deg >= 0.0 && lo.std_deg >= 0.0);
        prop_assert_eq!(lo.mean_deg, hi.mean_deg);
    }

    #[test]
    fn ds_coplanar_observations_fit_exactly(
        d in prop::array::uniform3(0.05f64..1.0),
        a in prop::array::uniform3(0.05f64..1.0),
        w in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 3..8),
    ) {
        let obs: Vec<[f64; 3]> = w.iter().map(|(p, q)| [0, 1, 2].map(|c| p * d[c] + q * a[c])).collect();
        if let Ok(s) = ds_angular_error(&[obs], 3.0) {
            prop_assert!(s.mean_deg < 1e-6, "{}", s.mean_deg);
        }
    }

    #[test]
    fn transmittance_composes(w in 0usize..6, d1 in 0.0f64..500.0, d2 in 0.0f64..500.0, scale in 0.0f64..5.0) {
        let mut m = WeatherTag::ALL[w].preset();
        m.beta_scale = scale;
        let (t, a, b) = (transmittance(&m, d1 + d2), transmittance(&m, d1), transmittance(&m, d2));
        for c in 0..3 {
            prop_assert!((0.0..=1.0).contains(&t[c]));
            prop_assert!((t[c] - a[c] * b[c]).abs() <= 1e-12);
        }
    }

    #[test]
    fn phase_is_positive(k in -0.99f64..0.99, cos in -1.0f64..=1.0) {
        prop_assert!(schlick_phase(k, cos).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_footprints_never_overlap(seed in any::<u64>()) {
        let cfg = city_config();
        let s = sample_scene(&cfg, seed).unwrap();
        let placed: Vec<_> = s.objects.iter().filter(|o| o.mark.class != ObjectClass::Ground).collect();
        for (i, a) in placed.iter().enumerate() {
            for b in &placed[i + 1..] {
                let (a0, a1, b0, b1) = (a.mark.min(), a.mark.max(), b.mark.min(), b.mark.max());
                let ox = a1[0].min(b1[0]) - a0[0].max(b0[0]);
                let oz = a1[2].min(b1[2]) - a0[2].max(b0[2]);
                prop_assert!(ox <= 0.0 || oz <= 0.0, "{} overlaps {}", a.id, b.id);
            }
        }
        let n = placed.iter().filter(|o| o.mark.class != ObjectClass::Road).count();
        prop_assert!((cfg.counts.min..=cfg.counts.max).contains(&n));
        prop_assert_eq!(s.to_json(), sample_scene(&cfg, seed).unwrap().to_json());
    }
}
