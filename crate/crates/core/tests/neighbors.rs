use proptest::prelude::*;
use shiftknn::density::{DensityEstimator, DensityValue};
use shiftknn::neighbors::{linear_scan, NeighborIndex, PointCloud};
use std::sync::Arc;

fn cloud_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|d| {
        // coarse integer grid so duplicates and distance ties are common
        (
            Just(d),
            prop::collection::vec((-6i32..6).prop_map(|v| v as f64 * 0.5), d..=d * 80),
        )
            .prop_map(|(d, mut v)| {
                v.truncate(v.len() / d * d);
                (d, v)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tree_matches_linear_scan((d, flat) in cloud_strategy(), q in prop::collection::vec(-4.0f64..4.0, 3), kfrac in 0.0f64..1.0) {
        let cloud = PointCloud::from_flat(d, flat).unwrap();
        let n = cloud.len();
        let k = 1 + ((n - 1) as f64 * kfrac) as usize;
        let index = NeighborIndex::build(cloud.clone()).unwrap();
        let x = &q[..d];
        let a = index.k_nearest(x, k).unwrap();
        let b = linear_scan(&cloud, x, k).unwrap();
        prop_assert_eq!(&a.indices, &b.indices);
        prop_assert!(a.distances.iter().zip(&b.distances).all(|(u, v)| u.to_bits() == v.to_bits()));
        // canonical order: distances nondecreasing, ties by index
        for w in a.indices.windows(2).zip(a.distances.windows(2)) {
            let (i, dd) = w;
            prop_assert!(dd[0] < dd[1] || (dd[0] == dd[1] && i[0] < i[1]));
        }
    }

    #[test]
    fn query_at_sample_point_has_zero_first_distance((d, flat) in cloud_strategy(), pick in 0usize..1000) {
        let cloud = PointCloud::from_flat(d, flat).unwrap();
        let i = pick % cloud.len();
        let index = NeighborIndex::build(cloud.clone()).unwrap();
        let r = index.k_nearest(cloud.point(i), 1).unwrap();
        prop_assert_eq!(r.distances[0], 0.0);
    }

    #[test]
    fn density_is_ell_over_n_r_d((d, flat) in cloud_strategy(), q in prop::collection::vec(-4.0f64..4.0, 3), ell_frac in 0.0f64..1.0) {
        let cloud = PointCloud::from_flat(d, flat).unwrap();
        let n = cloud.len();
        let ell = 1 + ((n - 1) as f64 * ell_frac) as usize;
        let index = Arc::new(NeighborIndex::build(cloud.clone()).unwrap());
        let est = DensityEstimator::new(index, ell).unwrap();
        let x = &q[..d];
        let r = linear_scan(&cloud, x, ell).unwrap().radius();
        match est.estimate(x).unwrap() {
            DensityValue::Finite(v) => {
                let expected = ell as f64 / (n as f64 * r.powi(d as i32));
                prop_assert!(((v - expected) / expected).abs() <= 1e-12);
            }
            DensityValue::Infinite => prop_assert_eq!(r, 0.0),
        }
    }

    #[test]
    fn batched_queries_match_single((d, flat) in cloud_strategy(), ks in prop::collection::vec(1usize..10, 1..20)) {
        let cloud = PointCloud::from_flat(d, flat).unwrap();
        let n = cloud.len();
        let index = NeighborIndex::build(cloud.clone()).unwrap();
        let queries: Vec<(Vec<f64>, usize)> = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| (cloud.point(i % n).to_vec(), k.min(n)))
            .collect();
        let batch = index.batched_variable_k(&queries).unwrap();
        for ((x, k), got) in queries.iter().zip(batch) {
            prop_assert_eq!(got, index.k_nearest(x, *k).unwrap());
        }
    }
}

#[test]
fn batch_errors_carry_position() {
    let index = NeighborIndex::build(PointCloud::from_values(&[0.0, 1.0, 2.0]).unwrap()).unwrap();
    let queries = vec![(vec![0.0], 1), (vec![0.0], 4)];
    match index.batched_variable_k(&queries) {
        Err(shiftknn::Error::BatchQuery { position, .. }) => assert_eq!(position, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn csv_cloud_round_trip() {
    let text = "x,y\n0.5,1\n2,3.25\n";
    let cloud = PointCloud::<f64>::from_csv_reader(text.as_bytes()).unwrap();
    assert_eq!(cloud.dim(), 2);
    assert_eq!(cloud.as_flat(), &[0.5, 1.0, 2.0, 3.25]);
    assert!(PointCloud::<f64>::from_csv_reader("1,2\n3\n".as_bytes()).is_err());
}
