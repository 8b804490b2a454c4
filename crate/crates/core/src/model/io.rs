//! Versioned JSON model files.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::net::{Dense, Mlp};
use super::{Activation, DetectorMeta, NetSpec, TrainMeta, UsadModel, UsadNet};
use crate::error::{Error, Result};
use crate::features::Normalizer;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct LayerRecord {
    network: String,
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    format_version: u32,
    spec: NetSpec,
    alpha: f64,
    beta: f64,
    normalizer: Normalizer,
    layers: Vec<LayerRecord>,
    train_meta: TrainMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detector: Option<DetectorMeta>,
}

const NETWORKS: [&str; 3] = ["encoder", "decoder1", "decoder2"];

fn layer_records<'a>(name: &str, mlp: &'a Mlp) -> impl Iterator<Item = LayerRecord> + 'a {
    let name = name.to_string();
    mlp.layers.iter().map(move |l| LayerRecord {
        network: name.clone(),
        rows: l.n_out(),
        cols: l.n_in(),
        weights: l.weights.iter().copied().collect(),
        bias: l.bias.to_vec(),
    })
}

pub fn to_json(model: &UsadModel) -> Result<String> {
    let net = &model.net;
    let layers = layer_records(NETWORKS[0], &net.encoder)
        .chain(layer_records(NETWORKS[1], &net.decoder1))
        .chain(layer_records(NETWORKS[2], &net.decoder2))
        .collect();
    let env = Envelope {
        format_version: FORMAT_VERSION,
        spec: model.spec.clone(),
        alpha: model.alpha,
        beta: model.beta,
        normalizer: model.normalizer.clone(),
        layers,
        train_meta: model.train_meta.clone(),
        detector: model.detector.clone(),
    };
    serde_json::to_string_pretty(&env).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json(text: &str) -> Result<UsadModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Parse("model file: missing format_version".into()))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            found: found.try_into().unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    let env: Envelope =
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("model file: {e}")))?;

    let mut nets: [Vec<Dense>; 3] = Default::default();
    for rec in env.layers {
        let slot = NETWORKS
            .iter()
            .position(|n| *n == rec.network)
            .ok_or_else(|| Error::Parse(format!("unknown network {:?}", rec.network)))?;
        if rec.bias.len() != rec.rows {
            return Err(Error::Parse(format!(
                "{} layer: bias length {} for {} rows",
                rec.network,
                rec.bias.len(),
                rec.rows
            )));
        }
        let weights = Array2::from_shape_vec((rec.rows, rec.cols), rec.weights)
            .map_err(|e| Error::Parse(format!("{} layer: {e}", rec.network)))?;
        nets[slot].push(Dense {
            weights,
            bias: Array1::from(rec.bias),
        });
    }
    let outputs = [Activation::Linear, env.spec.output_activation, env.spec.output_activation];
    let [encoder, decoder1, decoder2] = nets;
    let [encoder, decoder1, decoder2] = [
        Mlp { layers: encoder, output: outputs[0] },
        Mlp { layers: decoder1, output: outputs[1] },
        Mlp { layers: decoder2, output: outputs[2] },
    ];
    let model = UsadModel {
        spec: env.spec,
        net: UsadNet {
            encoder,
            decoder1,
            decoder2,
        },
        normalizer: env.normalizer,
        alpha: env.alpha,
        beta: env.beta,
        train_meta: env.train_meta,
        detector: env.detector,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &UsadModel, path: &Path) -> Result<()> {
    model.validate()?;
    let text = to_json(model)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<UsadModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use crate::features::ModelWindow;
    use crate::model::{train, TrainConfig};

    fn trained() -> (UsadModel, Vec<ModelWindow>) {
        let spec = NetSpec::new(12, 3, vec![6]).unwrap();
        let data: Vec<ModelWindow> = (0..50)
            .map(|i| ModelWindow {
                flat: (0..12).map(|j| ((i * 13 + j * 5) as f64 * 0.1).sin() * 3.0).collect(),
                label: Label::Alpha,
            })
            .collect();
        let cfg = TrainConfig { epochs: 4, seed: 3, ..Default::default() };
        (train(&data, &spec, &cfg).unwrap(), data)
    }

    #[test]
    fn round_trip_preserves_scores() {
        let (model, data) = trained();
        let back = from_json(&to_json(&model).unwrap()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.score_windows(&data).unwrap(), model.score_windows(&data).unwrap());
    }

    #[test]
    fn wrong_version() {
        let (model, _) = trained();
        let text = to_json(&model).unwrap().replacen("\"format_version\": 1", "\"format_version\": 7", 1);
        assert!(matches!(
            from_json(&text),
            Err(Error::VersionMismatch { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn truncated_file() {
        let (model, _) = trained();
        let text = to_json(&model).unwrap();
        assert!(matches!(from_json(&text[..text.len() / 2]), Err(Error::Parse(_))));
    }
}
