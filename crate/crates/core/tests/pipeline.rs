use sks_core::datagen::{generate, read_dataset, write_dataset, PerturbationSpec, Regime};
use sks_core::metrics::evaluate;
use sks_core::{
    compose_sks, decompose_sks, ransac_homography, sks_four_point, CorrespondenceSet, Homography3,
    Point2,
};

#[test]
fn dataset_file_round_trip_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let samples = generate(&PerturbationSpec::new(Regime::Projective, 40, 5)).unwrap();
    write_dataset(&samples, &path).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back, samples);

    for s in &back {
        let h = sks_four_point(&s.correspondences).unwrap();
        let rec = evaluate(&h, &s.gt_homography, &s.cfg).unwrap();
        assert!(rec.ace_po < 1e-9, "{rec:?}");
        assert!(rec.ace_ao < 1e-9, "{rec:?}");
        let p = decompose_sks(&h, &s.cfg).unwrap();
        assert!(compose_sks(&p, &s.cfg).unwrap().projective_distance(&h) < 1e-9);
    }
}

#[test]
fn ransac_recovers_dataset_homography_with_outliers() {
    let s = &generate(&PerturbationSpec::new(Regime::Projective, 1, 8)).unwrap()[0];
    let mut pairs = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            let p = Point2::new(12.8 * i as f64 + 3.0, 12.8 * j as f64 + 1.0);
            pairs.push((p, s.gt_homography.apply(p).unwrap()));
        }
    }
    for (k, pair) in pairs.iter_mut().enumerate().filter(|(k, _)| k % 4 == 0) {
        pair.1 = Point2::new(pair.1.x + 20.0 + k as f64, pair.1.y - 15.0);
    }
    let set = CorrespondenceSet::new(pairs).unwrap();
    let r = ransac_homography(&set, 300, 1.0, 3).unwrap();
    assert_eq!(r.inlier_count(), 75);
    let rec = evaluate(&r.homography, &s.gt_homography, &s.cfg).unwrap();
    assert!(rec.ace_po < 1e-8);
    assert_ne!(r.homography, Homography3::identity());
}
