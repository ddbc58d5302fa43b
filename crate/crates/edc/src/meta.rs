//! JSON metadata stored alongside feature tensors and in batch summaries.

use edc_core::augment::MaskFill;
use edc_core::dataset::ConditioningRecord;
use edc_core::{ConditioningMethod, MelSpectrogram};
use serde_json::{json, Map, Value};

/// Everything needed to recompute a spectrogram from its source audio.
pub fn spectrogram_params(spec: &MelSpectrogram) -> Value {
    let c = &spec.config;
    json!({
        "window_ms": c.window_ms,
        "hop_ms": c.hop_ms,
        "n_mels": c.n_mels,
        "fmin": c.fmin,
        "fmax": c.fmax(spec.sample_rate),
        "log_floor": c.log_floor,
        "sample_rate": spec.sample_rate,
        "nfft": c.nfft(spec.sample_rate),
        "window": "hamming",
        "mel_scale": "htk",
        "log": "natural",
    })
}

/// Params object for a freshly extracted clip.
pub fn extraction_params(spec: &MelSpectrogram, extracted: usize, labels: Option<&[f64]>) -> Value {
    let mut params = Map::new();
    params.insert("spectrogram".into(), spectrogram_params(spec));
    params.insert(
        "frames".into(),
        json!({ "extracted": extracted, "stored": spec.num_frames() }),
    );
    if let Some(labels) = labels {
        params.insert("labels".into(), json!(labels));
    }
    params.insert("conditioning".into(), json!([]));
    Value::Object(params)
}

/// Configured (not per-clip) parameters of a method.
pub fn method_params(method: &ConditioningMethod) -> Value {
    match method {
        ConditioningMethod::None => json!({}),
        ConditioningMethod::Edc(c) => json!({
            "alpha": c.alpha,
            "cutoff": c.cutoff,
            "rounding": c.rounding.as_str(),
            "max_reach": c.max_reach(),
        }),
        ConditioningMethod::SpecAugment(c) => json!({
            "time_mask": c.time_mask,
            "freq_mask": c.freq_mask,
            "time_warp": c.time_warp,
            "fill": fill_name(c.fill),
            "seed": c.seed,
        }),
        ConditioningMethod::Mixup(c) => json!({ "beta": c.beta, "seed": c.seed }),
    }
}

fn fill_name(fill: MaskFill) -> Value {
    match fill {
        MaskFill::Mean => json!("mean"),
        MaskFill::Value(v) => json!(v),
    }
}

/// Per-clip record; `partner_id` names the Mixup partner.
pub fn record_params(record: &ConditioningRecord, partner_id: Option<&str>) -> Value {
    match record {
        ConditioningRecord::None => json!({ "method": "none" }),
        ConditioningRecord::Edc(c) => json!({
            "method": "edc",
            "alpha": c.alpha,
            "cutoff": c.cutoff,
            "rounding": c.rounding.as_str(),
            "max_reach": c.max_reach(),
        }),
        ConditioningRecord::SpecAugment(r) => json!({
            "method": "specaug",
            "seed": r.seed,
            "warp": r.warp,
            "masks": r.masks,
            "fill_value": r.fill_value,
        }),
        ConditioningRecord::Mixup(d) => json!({
            "method": "mixup",
            "lambda": d.lambda,
            "partner": partner_id,
            "seed": d.seed,
        }),
    }
}

/// Appends a conditioning record to `params["conditioning"]`.
pub fn push_conditioning(params: &mut Value, record: Value) {
    if !params.is_object() {
        *params = json!({});
    }
    let map = params.as_object_mut().expect("object");
    let history = map.entry("conditioning").or_insert_with(|| json!([]));
    match history {
        Value::Array(items) => items.push(record),
        other => *other = json!([other.take(), record]),
    }
}

/// Labels stored in `params["labels"]`, if present and well-formed.
pub fn labels(params: &Value) -> Option<Vec<f64>> {
    params
        .get("labels")?
        .as_array()?
        .iter()
        .map(Value::as_f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditioning_history_appends() {
        let mut params = json!({ "labels": [1.0, 0.0] });
        push_conditioning(&mut params, json!({ "method": "edc" }));
        push_conditioning(&mut params, json!({ "method": "specaug" }));
        assert_eq!(params["conditioning"][1]["method"], "specaug");
        assert_eq!(labels(&params), Some(vec![1.0, 0.0]));

        let mut odd = json!({ "conditioning": "legacy" });
        push_conditioning(&mut odd, json!(1));
        assert_eq!(odd["conditioning"], json!(["legacy", 1]));
    }

    #[test]
    fn malformed_labels_are_ignored() {
        assert_eq!(labels(&json!({ "labels": [1, "x"] })), None);
        assert_eq!(labels(&json!(null)), None);
    }
}
