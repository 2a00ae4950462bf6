//! End-to-end runs through the file formats: datasets in, model and codes out,
//! and back again.

use std::fs;

use ppc::affinity::{
    labels_by_class, load_dataset, synth_blobs, write_csv, write_raw_f32, BlobSpec, DataFormat, Dataset,
};
use ppc::eval::{auc, precision_recall};
use ppc::index::PackedCodes;
use ppc::mincut::{read_matrix, write_matrix_dense, MatrixFormat, SignedWeightMatrix};
use ppc::oos::{train_with_hashing, HashModel, KernelConfig};
use ppc::{Error, Model, Model32, TrainConfig};

fn blobs<T: ppc::Scalar>(seed: u64) -> Dataset<T> {
    let spec = BlobSpec {
        n: 120,
        blobs: 3,
        dim: 4,
        center_box: 6.0,
        spread: 1.0,
    };
    synth_blobs(&spec, seed).unwrap()
}

fn small_config() -> TrainConfig {
    TrainConfig {
        max_bits: 8,
        seed: 5,
        ..TrainConfig::default()
    }
}

#[test]
fn csv_train_save_load_encode() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("train.csv");
    write_csv(&blobs::<f64>(1), fs::File::create(&csv_path).unwrap()).unwrap();

    let data: Dataset = load_dataset(&csv_path, DataFormat::from_path(&csv_path)).unwrap();
    let labels = labels_by_class(&data).unwrap();
    let out = train_with_hashing(&data, &labels, &small_config(), &KernelConfig::default()).unwrap();

    let model_path = dir.path().join("model.json");
    out.model.save(&model_path).unwrap();
    let model = Model::load(&model_path).unwrap();
    assert_eq!(model.to_json(), out.model.to_json());
    assert_eq!(model.encode(data.features()).unwrap(), out.codes);

    let codes = PackedCodes::pack(&out.codes).with_ids(data.ids().to_vec()).unwrap();
    let codes_path = dir.path().join("train.codes");
    codes.write_to(fs::File::create(&codes_path).unwrap()).unwrap();
    let back = PackedCodes::read_from(fs::File::open(&codes_path).unwrap()).unwrap();
    assert_eq!(back, codes);
    assert_eq!(back.ids().unwrap()[7], data.ids()[7]);

    let score = auc(&precision_recall(&back, &labels).unwrap()).unwrap();
    assert!(score > 0.8, "auc {score}");
}

#[test]
fn raw_f32_pipeline_in_single_precision() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("train.f32");
    write_raw_f32(&blobs::<f32>(2), &raw).unwrap();
    let data: Dataset<f32> = load_dataset(&raw, DataFormat::from_path(&raw)).unwrap();
    let labels = labels_by_class(&data).unwrap();
    let out = train_with_hashing(&data, &labels, &small_config(), &KernelConfig::default()).unwrap();

    let path = dir.path().join("model32.json");
    out.model.save(&path).unwrap();
    let model = Model32::load(&path).unwrap();
    assert_eq!(model.encode(data.features()).unwrap(), out.codes);
}

#[test]
fn training_is_reproducible_byte_for_byte() {
    let data: Dataset = blobs(3);
    let labels = labels_by_class(&data).unwrap();
    let run = || {
        let out = train_with_hashing(&data, &labels, &small_config(), &KernelConfig::default()).unwrap();
        (out.model.to_json(), PackedCodes::pack(&out.codes).to_bytes())
    };
    assert_eq!(run(), run());
}

#[test]
fn corrupt_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();

    let codes = dir.path().join("bad.codes");
    fs::write(&codes, b"PPCB\x01\x00\x00\x00").unwrap();
    assert!(PackedCodes::read_from(fs::File::open(&codes).unwrap()).is_err());

    let model = dir.path().join("bad.json");
    fs::write(&model, r#"{"version":1,"p":1,"alpha":0,"extra":true}"#).unwrap();
    assert!(matches!(HashModel::<f64>::load(&model), Err(Error::Json(_)) | Err(Error::Format(_))));

    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "1,2\n3,inf\n").unwrap();
    assert!(matches!(
        load_dataset::<f64>(&csv, DataFormat::Csv),
        Err(Error::NonFinite { row: 1, column: 1 })
    ));

    assert!(load_dataset::<f64>(&dir.path().join("missing.csv"), DataFormat::Csv).is_err());
}

#[test]
fn matrix_text_round_trips() {
    let w: SignedWeightMatrix = SignedWeightMatrix::from_upper(5, |i, j| (i as f64 - 2.0 * j as f64) / 8.0);
    let back: SignedWeightMatrix = read_matrix(&write_matrix_dense(&w), MatrixFormat::Dense).unwrap();
    assert_eq!(back, w);

    let mut triples = String::new();
    for i in 0..5 {
        for j in i..5 {
            triples.push_str(&format!("{i},{j},{}\n", w.get(i, j)));
        }
    }
    let back: SignedWeightMatrix = read_matrix(&triples, MatrixFormat::Triples).unwrap();
    assert_eq!(back, w);
}
