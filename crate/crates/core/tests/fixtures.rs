//! Checked-in checkpoints with hand-computed predictions.

use std::path::PathBuf;

use mfconn::harness::{Checkpoint, CheckpointModel, CHECKPOINT_VERSION};
use mfconn::multilayer::{dropout_ml, DropoutPatternMl, LayerScale};
use mfconn::two_layer::{dropout2, DropoutPattern};
use mfconn::{Error, Network};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

fn load(name: &str) -> Checkpoint {
    Checkpoint::load(&fixture(name)).unwrap()
}

#[test]
fn identity_two_layer_predictions() {
    let c = load("two_layer_v1.json");
    assert_eq!((c.seed, c.step, c.input_bias), (7, 120, false));
    let CheckpointModel::TwoLayer(p) = c.model else { panic!("expected a two-layer model") };
    // u = (2, 3) and (1, 0); ŷ = (2·u₁ − 4·u₂)/2.
    assert_eq!(p.predict(&[2.0, 4.0]).unwrap(), vec![-4.0]);
    assert_eq!(p.predict(&[1.0, -1.0]).unwrap(), vec![1.0]);
    let half = dropout2(&p, &DropoutPattern::half(2).unwrap()).unwrap();
    assert_eq!(half.predict(&[2.0, 4.0]).unwrap(), vec![4.0]);
}

#[test]
fn sigmoid_two_layer_at_zero_weights() {
    let CheckpointModel::TwoLayer(p) = load("sigmoid_two_layer_v1.json").model else { panic!() };
    // σ(0) = 1/2 for every neuron: (3 − 3 + 6)/2/3 = 1.
    assert_eq!(p.predict(&[5.0]).unwrap(), vec![1.0]);
    // Keeping only the first neuron: 3·(1/2)/1.
    let half = dropout2(&p, &DropoutPattern::half(3).unwrap()).unwrap();
    assert_eq!(half.predict(&[-2.0]).unwrap(), vec![1.5]);
}

#[test]
fn multilayer_predictions_and_mask() {
    let c = load("multilayer_v1.json");
    assert_eq!(c.mask.as_ref().unwrap().scales, vec![LayerScale::N, LayerScale::N2, LayerScale::N]);
    let CheckpointModel::Multilayer(p) = c.model else { panic!("expected a multilayer model") };
    // h₁ = (x, −x), u₂ = (0, 2x)/2, ŷ = (0 + 3x)/2.
    assert_eq!(p.predict(&[3.0]).unwrap(), vec![4.5]);
    assert_eq!(p.predict(&[1.0]).unwrap(), vec![1.5]);
    let half = dropout_ml(&p, &DropoutPatternMl::half(&p).unwrap()).unwrap();
    assert_eq!(half.predict(&[3.0]).unwrap(), vec![3.0]);
}

#[test]
fn rewritten_fixture_is_byte_stable() {
    let c = load("two_layer_v1.json");
    let text = c.to_json_string().unwrap();
    let back = Checkpoint::from_json_str(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_json_string().unwrap(), text);
    assert!(text.contains(&format!("\"format_version\":{CHECKPOINT_VERSION}")));
}

#[test]
fn wrong_version_is_rejected() {
    let err = Checkpoint::load(&fixture("two_layer_v2.json")).unwrap_err();
    assert!(matches!(err, Error::VersionMismatch { found: 2, expected: 1 }), "{err:?}");
    assert_eq!(err.kind(), "version_mismatch");
}

#[test]
fn header_disagreeing_with_matrices_is_rejected() {
    let err = Checkpoint::load(&fixture("two_layer_bad_shape.json")).unwrap_err();
    assert!(matches!(err, Error::CheckpointShape(_)), "{err:?}");
}

#[test]
fn missing_file_is_an_io_error() {
    let err = Checkpoint::load(&fixture("absent.json")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err:?}");
}
