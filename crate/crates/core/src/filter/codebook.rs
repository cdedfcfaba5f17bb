//! Attribute encoding: categorical values map to dense dictionary codes,
//! numeric values to bin indices over sorted edges. The codebook is persisted
//! with the index (codebook.json) so encodings stay stable across sessions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How one attribute's raw values become integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Encoding {
    /// String values mapped through a dictionary with codes dense from 0.
    Categorical { dictionary: BTreeMap<String, i64> },
    /// Numeric values mapped to the index of their containing bin. `edges`
    /// are the strictly increasing left edges of the bins: values below the
    /// first edge clamp to bin 0, values at or above the last edge fall in
    /// the last bin.
    Binned { edges: Vec<f64> },
}

/// Per-attribute encodings, in attribute order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeCodebook {
    pub attributes: Vec<NamedEncoding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEncoding {
    pub name: String,
    #[serde(flatten)]
    pub encoding: Encoding,
}

/// A raw, not-yet-encoded attribute value.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Text(String),
    Number(f64),
}

impl AttributeCodebook {
    pub fn new(attributes: Vec<NamedEncoding>) -> Result<Self> {
        let cb = AttributeCodebook { attributes };
        cb.validate()?;
        Ok(cb)
    }

    pub fn attr_count(&self) -> usize {
        self.attributes.len()
    }

    fn validate(&self) -> Result<()> {
        for entry in &self.attributes {
            match &entry.encoding {
                Encoding::Categorical { dictionary } => {
                    if dictionary.is_empty() {
                        return Err(Error::InvalidArgument(format!(
                            "attribute {:?}: empty dictionary",
                            entry.name
                        )));
                    }
                    let mut codes: Vec<i64> = dictionary.values().copied().collect();
                    codes.sort_unstable();
                    if codes != (0..codes.len() as i64).collect::<Vec<_>>() {
                        return Err(Error::InvalidArgument(format!(
                            "attribute {:?}: dictionary codes must be dense from 0",
                            entry.name
                        )));
                    }
                }
                Encoding::Binned { edges } => {
                    if edges.is_empty() {
                        return Err(Error::InvalidArgument(format!(
                            "attribute {:?}: no bin edges",
                            entry.name
                        )));
                    }
                    if !edges.windows(2).all(|w| w[0] < w[1]) || !edges.iter().all(|e| e.is_finite())
                    {
                        return Err(Error::InvalidArgument(format!(
                            "attribute {:?}: bin edges must be finite and strictly increasing",
                            entry.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(format!("codebook serialization: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cb: AttributeCodebook = serde_json::from_str(&text)
            .map_err(|e| Error::Corrupt(format!("codebook.json: {e}")))?;
        cb.validate().map_err(|e| Error::Corrupt(e.to_string()))?;
        Ok(cb)
    }
}

/// Encode one record's raw attribute values through the codebook.
pub fn encode_attributes(raw: &[RawValue], codebook: &AttributeCodebook) -> Result<Vec<i64>> {
    if raw.len() != codebook.attributes.len() {
        return Err(Error::DimensionMismatch {
            expected: codebook.attributes.len(),
            got: raw.len(),
        });
    }
    raw.iter()
        .zip(&codebook.attributes)
        .map(|(value, entry)| match (&entry.encoding, value) {
            (Encoding::Categorical { dictionary }, RawValue::Text(s)) => dictionary
                .get(s)
                .copied()
                .ok_or_else(|| Error::UnknownCategory {
                    attr: entry.name.clone(),
                    value: s.clone(),
                }),
            (Encoding::Categorical { .. }, RawValue::Number(_)) => {
                Err(Error::InvalidArgument(format!(
                    "attribute {:?} is categorical but got a number",
                    entry.name
                )))
            }
            (Encoding::Binned { edges }, RawValue::Number(v)) => {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "attribute {:?}: non-finite value",
                        entry.name
                    )));
                }
                let above = edges.partition_point(|e| e <= v);
                Ok(above.saturating_sub(1) as i64)
            }
            (Encoding::Binned { .. }, RawValue::Text(_)) => Err(Error::InvalidArgument(format!(
                "attribute {:?} is numeric but got text",
                entry.name
            ))),
        })
        .collect()
}

/// Left bin edges at the sample quantiles `i/bins` for `i in 0..bins`,
/// deduplicated to stay strictly increasing when the data has ties.
pub fn quantile_edges(samples: &[f64], bins: usize) -> Result<Vec<f64>> {
    if samples.is_empty() || bins == 0 {
        return Err(Error::InvalidArgument(
            "quantile binning needs samples and at least one bin".to_string(),
        ));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument(
            "quantile binning needs finite samples".to_string(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut edges = Vec::with_capacity(bins);
    for i in 0..bins {
        let edge = sorted[i * sorted.len() / bins];
        if edges.last().map_or(true, |last| *last < edge) {
            edges.push(edge);
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn color_codebook() -> AttributeCodebook {
        AttributeCodebook::new(vec![NamedEncoding {
            name: "color".to_string(),
            encoding: Encoding::Categorical {
                dictionary: BTreeMap::from([("red".to_string(), 0), ("blue".to_string(), 1)]),
            },
        }])
        .unwrap()
    }

    #[test]
    fn categorical_lookup() {
        let cb = color_codebook();
        let out = encode_attributes(&[RawValue::Text("red".to_string())], &cb).unwrap();
        assert_eq!(out, vec![0]);
        match encode_attributes(&[RawValue::Text("green".to_string())], &cb) {
            Err(Error::UnknownCategory { attr, value }) => {
                assert_eq!(attr, "color");
                assert_eq!(value, "green");
            }
            other => panic!("expected UnknownCategory, got {other:?}"),
        }
    }

    #[test]
    fn binning_clamps_at_both_ends() {
        let cb = AttributeCodebook::new(vec![NamedEncoding {
            name: "size".to_string(),
            encoding: Encoding::Binned { edges: vec![0.0, 10.0] },
        }])
        .unwrap();
        let bin = |v: f64| encode_attributes(&[RawValue::Number(v)], &cb).unwrap()[0];
        assert_eq!(bin(5.5), 0);
        assert_eq!(bin(-100.0), 0);
        assert_eq!(bin(0.0), 0);
        assert_eq!(bin(10.0), 1);
        assert_eq!(bin(1e9), 1);
    }

    #[test]
    fn quantile_bins_balance_uniform_data() {
        // Oracle: sort-based quantiles should spread 1000 uniform samples
        // about evenly over 8 bins.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * 100.0).collect();
        let edges = quantile_edges(&samples, 8).unwrap();
        assert_eq!(edges.len(), 8);
        let cb = AttributeCodebook::new(vec![NamedEncoding {
            name: "x".to_string(),
            encoding: Encoding::Binned { edges },
        }])
        .unwrap();
        let mut counts = [0usize; 8];
        for s in &samples {
            let bin = encode_attributes(&[RawValue::Number(*s)], &cb).unwrap()[0];
            counts[bin as usize] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (100..=150).contains(&c),
                "bin {i} holds {c} samples, outside 125 +/- 20%"
            );
        }
    }

    #[test]
    fn invalid_codebooks_rejected() {
        // Sparse dictionary codes.
        assert!(AttributeCodebook::new(vec![NamedEncoding {
            name: "c".to_string(),
            encoding: Encoding::Categorical {
                dictionary: BTreeMap::from([("x".to_string(), 0), ("y".to_string(), 2)]),
            },
        }])
        .is_err());
        // Non-increasing edges.
        assert!(AttributeCodebook::new(vec![NamedEncoding {
            name: "b".to_string(),
            encoding: Encoding::Binned { edges: vec![1.0, 1.0] },
        }])
        .is_err());
    }

    #[test]
    fn roundtrips_through_json() {
        let cb = color_codebook();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("codebook.json");
        cb.save(&path).unwrap();
        assert_eq!(AttributeCodebook::load(&path).unwrap(), cb);
    }
}
