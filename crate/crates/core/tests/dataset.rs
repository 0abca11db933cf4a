use std::collections::BTreeMap;

use curvrepair::chart::{MaskImage, RasterImage};
use curvrepair::dataset::{build_dataset, DatasetConfig, DatasetManifest, Split};
use curvrepair::mesh::{primitives, save_mesh};

fn config() -> DatasetConfig {
    DatasetConfig {
        resolution: 64,
        rng_seed: 8,
        ..Default::default()
    }
}

#[test]
fn manifest_matches_files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let models: Vec<_> = (0..3)
        .map(|i| {
            let p = dir.path().join(format!("m{i}.ply"));
            save_mesh(
                &p,
                &primitives::bumpy_sphere(3, 0.04 * (i + 1) as f64, 2.0 + i as f64, 0.1),
            )
            .unwrap();
            p
        })
        .collect();
    let out = dir.path().join("ds");
    let manifest = build_dataset(&models, &out, &config()).unwrap();

    let c = &manifest.counts;
    assert_eq!(c.train_models + c.test_models, 3);
    assert_eq!(c.test_models, 0);
    assert_eq!(c.base_charts, 51);
    assert_eq!(c.train_pairs + c.test_pairs, manifest.entries.len());

    let mut per_chart: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for e in &manifest.entries {
        assert_eq!(e.split, Split::Train);
        let img = RasterImage::load_png(out.join(&e.image_path)).unwrap();
        let mask = MaskImage::load_png(out.join(&e.mask_path)).unwrap();
        assert_eq!((img.width, img.height), (64, 64));
        assert_eq!((mask.width, mask.height), (64, 64));
        assert!(mask.count() > 0);
        *per_chart.entry((&e.model_id, &e.patch_id)).or_default() += 1;
    }
    assert_eq!(per_chart.len(), 51);
    assert!(per_chart.values().all(|&n| (6..=30).contains(&n)));
    let maximum: usize = manifest.models.iter().map(|m| m.maximum_pairs).sum();
    approx::assert_relative_eq!(c.achieved_ratio, manifest.entries.len() as f64 / maximum as f64);

    let text = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    let back: DatasetManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back, manifest);
}

#[test]
fn split_is_model_level() {
    let dir = tempfile::tempdir().unwrap();
    let models: Vec<_> = (0..7)
        .map(|i| {
            let p = dir.path().join(format!("e{i}.ply"));
            save_mesh(&p, &primitives::ellipsoid(2, [1.0, 0.5 + 0.05 * i as f64, 0.8])).unwrap();
            p
        })
        .collect();
    let cfg = DatasetConfig {
        seeds: vec![2],
        test_fraction: 0.3,
        ..config()
    };
    let manifest = build_dataset(&models, &dir.path().join("ds"), &cfg).unwrap();
    assert_eq!(manifest.counts.test_models, 2);
    let split_of: BTreeMap<&str, Split> = manifest.models.iter().map(|m| (m.model_id.as_str(), m.split)).collect();
    for e in &manifest.entries {
        assert_eq!(e.split, split_of[e.model_id.as_str()]);
        assert!(e.image_path.starts_with(e.split.dir()));
    }
}

#[test]
fn duplicate_model_ids_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("x")).unwrap();
    let a = dir.path().join("m.ply");
    let b = dir.path().join("x/m.obj");
    save_mesh(&a, &primitives::icosphere(2)).unwrap();
    save_mesh(&b, &primitives::icosphere(2)).unwrap();
    assert!(build_dataset(&[a, b], &dir.path().join("ds"), &config()).is_err());
}

#[test]
fn two_charts_give_six_variants_each_and_at_most_sixty_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.ply");
    save_mesh(&p, &primitives::bumpy_sphere(3, 0.05, 2.0, 0.0)).unwrap();
    let cfg = DatasetConfig {
        seeds: vec![2],
        ..config()
    };
    let manifest = build_dataset(&[p], &dir.path().join("ds"), &cfg).unwrap();
    assert_eq!(manifest.counts.base_charts, 2);
    let mut variants: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for e in &manifest.entries {
        let orientation = e.augmentation.split_once('-').unwrap().0;
        *variants.entry((&e.patch_id, orientation)).or_default() += 1;
    }
    assert_eq!(variants.len(), 12);
    assert!(variants.values().all(|&n| (1..=5).contains(&n)));
    assert!(manifest.entries.len() <= 60);
}
