//! Network interchange format: a single JSON object with widths, row-major
//! weight layers, bias layers, and the scalar mode. Exact entries are
//! rendered as integers or `p/q`; float entries with 17 significant digits
//! so round-trips are lossless.

use crate::error::{CoreError, Result};
use crate::linalg::Mat;
use crate::network::{Architecture, Params};
use crate::scalar::{Rat, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    widths: Vec<usize>,
    weights: Vec<Vec<String>>,
    biases: Vec<Vec<String>>,
    scalar_mode: String,
}

/// A parsed network in either scalar mode.
#[derive(Clone, Debug)]
pub enum Network {
    Exact(Params<Rat>),
    Float(Params<f64>),
}

impl Network {
    pub fn scalar_mode(&self) -> &'static str {
        match self {
            Network::Exact(_) => "exact",
            Network::Float(_) => "float",
        }
    }

    pub fn arch(&self) -> &Architecture {
        match self {
            Network::Exact(p) => p.arch(),
            Network::Float(p) => p.arch(),
        }
    }

    /// The exact view, converting floats losslessly when needed.
    pub fn to_exact(&self) -> Params<Rat> {
        match self {
            Network::Exact(p) => p.clone(),
            Network::Float(p) => p.map(|v| Rat::from_f64(*v)),
        }
    }

    pub fn to_float(&self) -> Params<f64> {
        match self {
            Network::Exact(p) => p.to_f64(),
            Network::Float(p) => p.clone(),
        }
    }
}

fn params_to_file<S: Scalar>(p: &Params<S>, mode: &str) -> NetworkFile {
    NetworkFile {
        widths: p.arch().widths().to_vec(),
        weights: (1..=p.depth())
            .map(|l| p.weight(l).data().iter().map(|v| v.render()).collect())
            .collect(),
        biases: (1..=p.depth())
            .map(|l| p.bias(l).iter().map(|v| v.render()).collect())
            .collect(),
        scalar_mode: mode.into(),
    }
}

fn params_from_file<S: Scalar>(f: &NetworkFile) -> Result<Params<S>> {
    let arch = Architecture::new(f.widths.clone())?;
    if f.weights.len() != arch.depth() || f.biases.len() != arch.depth() {
        return Err(CoreError::ShapeMismatch(format!(
            "expected {} layers, file has {} weight and {} bias blocks",
            arch.depth(),
            f.weights.len(),
            f.biases.len()
        )));
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 1..=arch.depth() {
        let rows = arch.width(l);
        let cols = arch.width(l - 1);
        let flat = &f.weights[l - 1];
        if flat.len() != rows * cols {
            return Err(CoreError::ShapeMismatch(format!(
                "layer {l} weights: expected {} entries, got {}",
                rows * cols,
                flat.len()
            )));
        }
        let data = flat.iter().map(|t| S::parse(t)).collect::<Result<Vec<S>>>()?;
        weights.push(Mat::from_flat(rows, cols, data));
        let bias = &f.biases[l - 1];
        if bias.len() != rows {
            return Err(CoreError::ShapeMismatch(format!(
                "layer {l} biases: expected {rows} entries, got {}",
                bias.len()
            )));
        }
        biases.push(bias.iter().map(|t| S::parse(t)).collect::<Result<Vec<S>>>()?);
    }
    Params::new(arch, weights, biases)
}

pub fn network_to_json(n: &Network) -> String {
    let file = match n {
        Network::Exact(p) => params_to_file(p, "exact"),
        Network::Float(p) => params_to_file(p, "float"),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn network_from_json(text: &str) -> Result<Network> {
    let file: NetworkFile = serde_json::from_str(text)?;
    match file.scalar_mode.as_str() {
        "exact" => Ok(Network::Exact(params_from_file(&file)?)),
        "float" => Ok(Network::Float(params_from_file(&file)?)),
        other => Err(CoreError::Format(format!(
            "scalar_mode must be \"exact\" or \"float\", found {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_params;
    use crate::scalar::rat;

    #[test]
    fn exact_round_trip_is_lossless() {
        let arch = Architecture::new(vec![2, 3, 1]).unwrap();
        let p = random_params(&arch, 21);
        let text = network_to_json(&Network::Exact(p.clone()));
        match network_from_json(&text).unwrap() {
            Network::Exact(q) => assert_eq!(p, q),
            _ => panic!("mode must survive"),
        }
    }

    #[test]
    fn float_round_trip_is_bit_exact() {
        let arch = Architecture::new(vec![2, 3, 1]).unwrap();
        let p = random_params(&arch, 22).to_f64();
        let noisy = p.map(|v| v * (1.0 + 1e-13) + 0.1234567890123456789);
        let text = network_to_json(&Network::Float(noisy.clone()));
        match network_from_json(&text).unwrap() {
            Network::Float(q) => assert_eq!(noisy, q),
            _ => panic!("mode must survive"),
        }
    }

    #[test]
    fn rational_entries_render_readably() {
        let arch = Architecture::new(vec![1, 1, 1]).unwrap();
        let p = Params::new(
            arch,
            vec![
                Mat::from_rows(vec![vec![rat(-3, 2)]]),
                Mat::from_rows(vec![vec![rat(4, 1)]]),
            ],
            vec![vec![rat(0, 1)], vec![rat(7, 3)]],
        )
        .unwrap();
        let text = network_to_json(&Network::Exact(p));
        assert!(text.contains("\"-3/2\""));
        assert!(text.contains("\"4\""));
        assert!(text.contains("\"7/3\""));
        assert!(text.contains("\"scalar_mode\": \"exact\""));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(network_from_json("{").is_err());
        let text = r#"{"widths":[1,1],"weights":[["1"]],"biases":[["0"]],"scalar_mode":"decimal"}"#;
        assert!(network_from_json(text).is_err());
        let text = r#"{"widths":[2,1],"weights":[["1"]],"biases":[["0"]],"scalar_mode":"exact"}"#;
        assert!(network_from_json(text).is_err());
        let text = r#"{"widths":[1,1],"weights":[["1/0"]],"biases":[["0"]],"scalar_mode":"exact"}"#;
        assert!(network_from_json(text).is_err());
    }
}
