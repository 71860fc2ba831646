//! Ensemble JSON documents.

use takeover_core::Ensemble;

use crate::FormatError;

/// Pretty-printed JSON with `base_score`, `params`, `schema_fingerprint`,
/// `feature_names` and the recursive `trees`. Floats are written in shortest
/// round-trip form, so loading restores every threshold and weight exactly.
pub fn save_model(m: &Ensemble) -> Result<String, FormatError> {
    let mut text = serde_json::to_string_pretty(m)?;
    text.push('\n');
    Ok(text)
}

/// Parses and validates a model document (cover sums, feature indices,
/// hyperparameter ranges).
pub fn load_model(text: &str) -> Result<Ensemble, FormatError> {
    serde_json::from_str(text).map_err(FormatError::Model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use takeover_core::booster::train;
    use takeover_core::schema::merged_schema;
    use takeover_core::synth::{synthesize, GeneratorSpec};
    use takeover_core::Hyperparams;

    #[test]
    fn round_trip_is_bit_exact() {
        let d = synthesize(&merged_schema(), &GeneratorSpec::takeover(150, 0.3, 0.1), 1).unwrap().dataset;
        let m = train(&d, &Hyperparams { n_estimators: 30, subsample: 0.9, ..Hyperparams::default() }).unwrap();
        let back = load_model(&save_model(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        for row in d.rows() {
            assert_eq!(back.predict(&row.values).unwrap().to_bits(), m.predict(&row.values).unwrap().to_bits());
        }
    }

    #[test]
    fn documents_use_expected_keys() {
        let d = synthesize(&merged_schema(), &GeneratorSpec::takeover(40, 0.3, 0.0), 2).unwrap().dataset;
        let m = train(&d, &Hyperparams { n_estimators: 1, max_depth: 1, ..Hyperparams::default() }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&save_model(&m).unwrap()).unwrap();
        for key in ["base_score", "params", "schema_fingerprint", "trees"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let root = &v["trees"][0];
        for key in ["feature", "threshold", "default_left", "cover", "left", "right"] {
            assert!(root.get(key).is_some(), "{key}");
        }
        assert!(root["left"].get("leaf").is_some() && root["left"].get("cover").is_some());
    }

    #[test]
    fn rejects_inconsistent_models() {
        let bad_cover = r#"{"base_score":1.0,"params":{},"schema_fingerprint":"x","feature_names":["a"],
            "trees":[{"feature":0,"threshold":0.5,"default_left":true,"cover":3.0,
                      "left":{"leaf":1.0,"cover":1.0},"right":{"leaf":2.0,"cover":1.0}}]}"#;
        let err = load_model(bad_cover).unwrap_err().to_string();
        assert!(err.starts_with("booster:"), "{err}");
        assert!(load_model("{}").is_err());
    }
}
