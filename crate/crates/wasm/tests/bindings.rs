use serde_json::Value;
use tensor_te_wasm::{channel_capacity_json, classify_triad_json, ulam_sweep_json};

#[test]
fn capacity_of_binary_symmetric_channel() {
    let v: Value = serde_json::from_str(&channel_capacity_json("0.9, 0.1\n0.1 0.9\n").unwrap()).unwrap();
    let h = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
    assert!((v["capacity_bits"].as_f64().unwrap() - (1.0 - h)).abs() < 1e-9);
    assert_eq!(v["optimal_input"]["probs"].as_array().unwrap().len(), 2);
}

#[test]
fn capacity_errors_are_messages() {
    assert!(channel_capacity_json("0.5 0.6\n").unwrap_err().contains("row 0"));
    assert!(channel_capacity_json("a b\n").is_err());
}

#[test]
fn sweep_preview_covers_the_grid() {
    let v: Value = serde_json::from_str(&ulam_sweep_json(4, 3000, 0.25, 2, 1).unwrap()).unwrap();
    let points = v.as_array().unwrap();
    assert_eq!(points.len(), 5);
    assert_eq!(points[4]["epsilon"].as_f64(), Some(1.0));
    for p in points {
        assert!(p["forward_bits"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn simulated_chain_is_classified() {
    let v: Value = serde_json::from_str(&classify_triad_json("chain", 0.1, 20_000, 3).unwrap()).unwrap();
    assert_eq!(v["truth"]["structure"], "chain");
    assert_eq!(v["analysis"]["relations"].as_array().unwrap().len(), 6);
    assert_eq!(v["analysis"]["verdict"]["classification"], "chain");
    assert!(classify_triad_json("loop", 0.1, 100, 0).is_err());
}
