mod common;

use std::io::Write;

use bregman_tweedie::classifier::prepare_train;
use bregman_tweedie::dataset::{LabelColumn, LabelMap};
use bregman_tweedie::{accuracy, fit, load_csv, make_spec, predict, score, CsvOptions, Hyperplane, LossMode, MarginLoss, Rational, TrainConfig};
use common::separable_gaussians;

fn losses() -> Vec<MarginLoss> {
    vec![
        make_spec(Rational::ONE, LossMode::LBregman, None).unwrap().into(),
        make_spec(Rational::new(84, 85), LossMode::HBregman, None).unwrap().into(),
        make_spec(Rational::new(84, 85), LossMode::LBregman, None).unwrap().into(),
        MarginLoss::hinge(Rational::ZERO, 1.0).unwrap(),
    ]
}

#[test]
fn separable_blob_reaches_full_training_accuracy() {
    let raw = separable_gaussians(120, 0.2, 5);
    let ds = prepare_train(&raw).unwrap();
    for loss in losses() {
        let cfg = TrainConfig {
            lambda: 2f64.powi(-10),
            ..TrainConfig::default()
        };
        let f = fit(&ds, &loss, &cfg).unwrap();
        let h = &f.hyperplane;
        let r = loss.box_radius(cfg.rho);
        assert!(h.w.iter().chain([&h.b]).all(|v| v.abs() <= r), "{loss:?}");
        assert!((h.objective(&ds) - f.result.value).abs() <= 1e-10 * f.result.value.abs().max(1.0));
        assert_eq!(accuracy(h, &ds).unwrap(), 1.0, "{loss:?}");
        assert_eq!(score(h, &raw).unwrap(), 1.0, "{loss:?}");
    }
}

#[test]
fn csv_to_saved_model_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let raw = separable_gaussians(60, 0.3, 9);
    let path = dir.path().join("train.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "diagnosis,f1,f2").unwrap();
    for (x, y) in raw.rows().zip(raw.labels()) {
        writeln!(f, "{},{},{}", if *y > 0.0 { "M" } else { "B" }, x[0], x[1]).unwrap();
    }
    drop(f);

    let opts = CsvOptions {
        label_col: LabelColumn::Name("diagnosis".into()),
        has_header: true,
        label_map: Some("M:+1,B:-1".parse::<LabelMap>().unwrap()),
    };
    let loaded = load_csv(&path, &opts).unwrap();
    assert_eq!(loaded.labels(), raw.labels());
    assert_eq!(loaded.n_features(), 2);

    let ds = prepare_train(&loaded).unwrap();
    let loss: MarginLoss = make_spec(Rational::new(58, 59), LossMode::HBregman, None).unwrap().into();
    let h = fit(&ds, &loss, &TrainConfig { lambda: 0.01, ..TrainConfig::default() }).unwrap().hyperplane;

    let model = dir.path().join("model.txt");
    h.save(&model).unwrap();
    let back = Hyperplane::load(&model).unwrap();
    assert_eq!(back, h);
    for x in loaded.rows() {
        assert_eq!(predict(&back, x).unwrap(), predict(&h, x).unwrap());
    }
    assert_eq!(score(&back, &loaded).unwrap(), 1.0);
}

#[test]
fn default_label_mapping_sorts_numeric_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "1.0,2.0,4\n0.5,1.0,2\n3.0,1.0,4\n").unwrap();
    let ds = load_csv(&path, &CsvOptions::default()).unwrap();
    assert_eq!(ds.labels(), &[1.0, -1.0, 1.0]);
    let ds = load_csv(&path, &CsvOptions { label_col: LabelColumn::Index(2), ..CsvOptions::default() }).unwrap();
    assert_eq!(ds.row(1), &[0.5, 1.0]);
}
