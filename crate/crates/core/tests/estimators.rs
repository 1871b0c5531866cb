use proptest::prelude::*;
use shiftknn::density::DensityValue;
use shiftknn::estimators::{
    local_count, log_floor, LabeledDataset, LocalParams, NeighborSpec, Regressor,
};
use shiftknn::neighbors::PointCloud;

fn dataset(xs: &[f64], ys: &[f64]) -> LabeledDataset<f64> {
    LabeledDataset::new(PointCloud::from_values(xs).unwrap(), ys.to_vec()).unwrap()
}

fn sample() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-3.0f64..3.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn local_count_within_clamps(
        n in 1usize..1_000_000,
        extra in 0usize..1_000_000,
        d in 1usize..5,
        beta in 0.05f64..3.0,
        kappa in 0.01f64..10.0,
        lp in -12.0f64..6.0,
    ) {
        let k = local_count(kappa, beta, d, n, n + extra, DensityValue::Finite(10f64.powf(lp)));
        prop_assert!(k >= log_floor(n).min(n));
        prop_assert!(k <= n);
        prop_assert!(k >= 1);
    }

    #[test]
    fn local_count_monotone_in_density(
        n in 2usize..100_000,
        beta in 0.1f64..2.0,
        kappa in 0.1f64..3.0,
        p in 1e-6f64..100.0,
        factor in 1.0f64..10.0,
    ) {
        let lo = local_count(kappa, beta, 1, n, n, DensityValue::Finite(p));
        let hi = local_count(kappa, beta, 1, n, n, DensityValue::Finite(p * factor));
        prop_assert!(lo <= hi);
        prop_assert_eq!(local_count(kappa, beta, 1, n, n, DensityValue::<f64>::Infinite), n);
    }

    #[test]
    fn predictions_lie_in_label_hull((xs, ys) in sample(), q in -6.0f64..6.0, k_frac in 0.0f64..1.0) {
        let n = xs.len();
        let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let standard = Regressor::standard(dataset(&xs, &ys), k).unwrap();
        let local = Regressor::local(dataset(&xs, &ys), LocalParams::new(1.0, 1.0)).unwrap();
        for reg in [standard, local] {
            let f = reg.predict(&[q]).unwrap();
            prop_assert!(f >= lo - 1e-12 && f <= hi + 1e-12);
        }
    }

    #[test]
    fn two_sample_is_convex_combination(
        (xs, ys) in sample(),
        (xt, yt) in sample(),
        q in -6.0f64..6.0,
    ) {
        let spec = NeighborSpec::Local(LocalParams::new(1.0, 1.0));
        let reg = Regressor::two_sample(
            Some((dataset(&xs, &ys), spec.clone())),
            Some((dataset(&xt, &yt), spec)),
        )
        .unwrap();
        let f = reg.predict(&[q]).unwrap();
        let p = reg.two_sample_parts(&[q]).unwrap();
        prop_assert!((p.weight_source + p.weight_target - 1.0).abs() < 1e-15);
        let combo = p.weight_source * p.source_mean.unwrap() + p.weight_target * p.target_mean.unwrap();
        prop_assert!((f - combo).abs() <= 1e-12);
    }

    #[test]
    fn empty_target_reduces_to_one_sample((xs, ys) in sample(), q in -6.0f64..6.0) {
        let params = LocalParams::new(0.7, 0.8);
        let one = Regressor::local(dataset(&xs, &ys), params.clone()).unwrap();
        let two = Regressor::two_sample(Some((dataset(&xs, &ys), NeighborSpec::Local(params))), None).unwrap();
        prop_assert_eq!(one.predict(&[q]).unwrap().to_bits(), two.predict(&[q]).unwrap().to_bits());
    }
}

#[test]
fn f32_and_f64_agree_on_simple_data() {
    let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
    let ys = [1.0, 2.0, 3.0, 4.0, 5.0];
    let r64 = Regressor::standard(dataset(&xs, &ys), 3).unwrap();
    let cloud32 = PointCloud::<f32>::from_values(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
    let data32 = LabeledDataset::new(cloud32, vec![1.0f32, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let r32 = Regressor::standard(data32, 3).unwrap();
    assert_eq!(r64.predict(&[2.2]).unwrap(), 3.0);
    assert_eq!(r32.predict(&[2.2f32]).unwrap(), 3.0f32);
}
