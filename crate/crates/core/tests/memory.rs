use orthoview::{generate_shape, global_feature, CategoryMemory, Classification, FeatureConfig, Metric};

fn features() -> Vec<(String, orthoview::GlobalFeature)> {
    let config = FeatureConfig::default();
    orthoview::dataset::synthetic_categories()
        .into_iter()
        .take(4)
        .map(|(label, kind)| {
            (
                label,
                global_feature(&generate_shape(kind, 1500, 0.0, 3).unwrap(), &config).unwrap(),
            )
        })
        .collect()
}

#[test]
fn taught_features_are_recognized_exactly() {
    let mut memory = CategoryMemory::new();
    let taught = features();
    for (label, f) in &taught {
        memory.teach(label, f.clone()).unwrap();
    }
    for metric in Metric::ALL {
        for (label, f) in &taught {
            match memory.classify(f, metric, 0.0).unwrap() {
                Classification::Known(p) => {
                    assert_eq!(&p.label, label);
                    assert_eq!(p.distance, 0.0);
                    assert!(p.runner_up_distance.unwrap() > 0.0);
                }
                Classification::Unknown => panic!("{label} not recognized under {metric}"),
            }
        }
    }
}

#[test]
fn concurrent_readers_agree() {
    let mut memory = CategoryMemory::new();
    let taught = features();
    for (label, f) in &taught[..3] {
        memory.teach(label, f.clone()).unwrap();
    }
    let query = &taught[3].1;
    let expected = memory.classify(query, Metric::Cosine, f64::INFINITY).unwrap();
    let memory = &memory;
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|_| s.spawn(move || memory.classify(query, Metric::Cosine, f64::INFINITY).unwrap()))
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), expected);
        }
    });
}

#[test]
fn snapshot_file_round_trip() {
    let mut memory = CategoryMemory::new();
    for (label, f) in features() {
        memory.teach(&label, f).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("memory.json");
    memory.save(&path).unwrap();
    let back = CategoryMemory::load(&path).unwrap();
    assert_eq!(back.feature_bytes(), memory.feature_bytes());
    assert_eq!(back.stats(), memory.stats());
    assert_eq!(back.descriptor_id(), Some("block-grad:64x64:b8"));
}
