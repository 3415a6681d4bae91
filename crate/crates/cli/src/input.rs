//! Input document: named matrices, channels, cones, cone vectors and convex
//! sets, all validated when the file is loaded.

use std::collections::BTreeMap;
use std::path::Path;

use postselect::channels::QuantumChannel;
use postselect::gpt::{ConeModel, GptState};
use postselect::linalg::{c, CMatrix};
use postselect::{ConvexStateSet, DensityMatrix, HermitianMatrix};
use serde::Deserialize;

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// A matrix entry: `[re, im]`, or a bare real number.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

type RawMatrix = Vec<Vec<Entry>>;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChannelSpec {
    Kraus {
        kraus: Vec<RawMatrix>,
    },
    Choi {
        choi: RawMatrix,
        dim_in: usize,
        dim_out: usize,
    },
    Depolarizing {
        depolarizing: DepolarizingSpec,
    },
    AmplitudeDamping {
        amplitude_damping: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DepolarizingSpec {
    dim: usize,
    t: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorSpec {
    cone: String,
    coords: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    version: u32,
    #[serde(default)]
    matrices: BTreeMap<String, RawMatrix>,
    #[serde(default)]
    channels: BTreeMap<String, ChannelSpec>,
    #[serde(default)]
    cones: BTreeMap<String, ConeModel>,
    #[serde(default)]
    vectors: BTreeMap<String, VectorSpec>,
    #[serde(default)]
    sets: BTreeMap<String, Vec<String>>,
}

/// A loaded and validated input document.
#[derive(Debug)]
pub struct Document {
    matrices: BTreeMap<String, HermitianMatrix>,
    channels: BTreeMap<String, QuantumChannel>,
    vectors: BTreeMap<String, GptState>,
    sets: BTreeMap<String, Vec<String>>,
}

fn invalid(what: &str, name: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{what} '{name}': {e}"))
}

fn to_cmatrix(raw: &RawMatrix) -> Result<CMatrix, String> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err("empty matrix".into());
    }
    if raw.iter().any(|r| r.len() != cols) {
        return Err("ragged rows".into());
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for e in raw.iter().flatten() {
        let z = match *e {
            Entry::Complex([re, im]) => c(re, im),
            Entry::Real(re) => c(re, 0.0),
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err("non-finite entry".into());
        }
        entries.push(z);
    }
    Ok(CMatrix::from_row_slice(rows, cols, &entries))
}

fn build_channel(spec: &ChannelSpec) -> Result<QuantumChannel, String> {
    let ch = match spec {
        ChannelSpec::Kraus { kraus } => {
            let ops = kraus
                .iter()
                .map(to_cmatrix)
                .collect::<Result<Vec<_>, _>>()?;
            QuantumChannel::from_kraus(ops)
        }
        ChannelSpec::Choi {
            choi,
            dim_in,
            dim_out,
        } => {
            let h = HermitianMatrix::new(to_cmatrix(choi)?).map_err(|e| e.to_string())?;
            QuantumChannel::from_choi(h, *dim_in, *dim_out)
        }
        ChannelSpec::Depolarizing { depolarizing: d } => QuantumChannel::depolarizing(d.dim, d.t),
        ChannelSpec::AmplitudeDamping { amplitude_damping } => {
            QuantumChannel::amplitude_damping(*amplitude_damping)
        }
    };
    ch.map_err(|e| e.to_string())
}

impl Document {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawDocument = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed document: {e}")))?;
        if raw.version != FORMAT_VERSION {
            return Err(CliError::Input(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                raw.version
            )));
        }
        let mut matrices = BTreeMap::new();
        for (name, m) in &raw.matrices {
            let cm = to_cmatrix(m).map_err(|e| invalid("matrix", name, e))?;
            let h = HermitianMatrix::new(cm).map_err(|e| invalid("matrix", name, e))?;
            matrices.insert(name.clone(), h);
        }
        let mut channels = BTreeMap::new();
        for (name, spec) in &raw.channels {
            channels.insert(
                name.clone(),
                build_channel(spec).map_err(|e| invalid("channel", name, e))?,
            );
        }
        for (name, cone) in &raw.cones {
            cone.validate().map_err(|e| invalid("cone", name, e))?;
        }
        let mut vectors = BTreeMap::new();
        for (name, v) in &raw.vectors {
            let cone = raw
                .cones
                .get(&v.cone)
                .ok_or_else(|| invalid("vector", name, format!("unknown cone '{}'", v.cone)))?;
            let state = GptState::new(cone.clone(), v.coords.clone())
                .map_err(|e| invalid("vector", name, e))?;
            vectors.insert(name.clone(), state);
        }
        for (name, members) in &raw.sets {
            if members.is_empty() {
                return Err(invalid("set", name, "no generators"));
            }
            for m in members {
                if !matrices.contains_key(m) {
                    return Err(invalid("set", name, format!("unknown matrix '{m}'")));
                }
            }
        }
        Ok(Self {
            matrices,
            channels,
            vectors,
            sets: raw.sets,
        })
    }

    pub fn state(&self, name: &str) -> Result<DensityMatrix, CliError> {
        let h = self
            .matrices
            .get(name)
            .ok_or_else(|| CliError::Input(format!("unknown matrix '{name}'")))?;
        DensityMatrix::new(h.clone()).map_err(|e| invalid("state", name, e))
    }

    pub fn channel(&self, name: &str) -> Result<&QuantumChannel, CliError> {
        self.channels
            .get(name)
            .ok_or_else(|| CliError::Input(format!("unknown channel '{name}'")))
    }

    pub fn set(&self, name: &str) -> Result<ConvexStateSet, CliError> {
        let members = self
            .sets
            .get(name)
            .ok_or_else(|| CliError::Input(format!("unknown set '{name}'")))?;
        let states = members
            .iter()
            .map(|m| self.state(m))
            .collect::<Result<Vec<_>, _>>()?;
        ConvexStateSet::new(states).map_err(|e| invalid("set", name, e))
    }

    /// A cone vector, or a quantum state when `name` is a matrix.
    pub fn gpt_state(&self, name: &str) -> Result<GptState, CliError> {
        if let Some(v) = self.vectors.get(name) {
            return Ok(v.clone());
        }
        if self.matrices.contains_key(name) {
            return Ok(GptState::quantum(self.state(name)?));
        }
        Err(CliError::Input(format!(
            "unknown vector or matrix '{name}'"
        )))
    }
}

/// `[[[re, im], ...], ...]`, the same layout the document uses.
pub fn matrix_json(m: &HermitianMatrix) -> serde_json::Value {
    let a = m.matrix();
    let rows: Vec<Vec<[f64; 2]>> = (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .map(|j| [a[(i, j)].re, a[(i, j)].im])
                .collect()
        })
        .collect();
    serde_json::json!(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"{
        "version": 1,
        "matrices": {
            "rho": [[[0.6666666666666666, 0], [0, 0]], [[0, 0], [0.3333333333333333, 0]]],
            "sigma": [[0.5, 0], [0, 0.5]]
        },
        "sets": {"alt": ["sigma", "rho"]}
    }"#;

    #[test]
    fn parses_mixed_entry_forms() {
        let doc = Document::parse(PAIR).unwrap();
        assert_eq!(doc.state("rho").unwrap().dim(), 2);
        assert_eq!(doc.state("sigma").unwrap().dim(), 2);
        assert_eq!(doc.set("alt").unwrap().len(), 2);
    }

    #[test]
    fn rejects_dangling_set_member() {
        let text = r#"{"version": 1, "matrices": {"a": [[1]]}, "sets": {"s": ["a", "b"]}}"#;
        assert!(matches!(Document::parse(text), Err(CliError::Input(_))));
    }

    #[test]
    fn rejects_non_hermitian_matrix() {
        let text = r#"{"version": 1, "matrices": {"a": [[1, 1], [0, 0]]}}"#;
        let err = Document::parse(text).unwrap_err();
        assert!(err.to_string().contains("'a'"));
    }

    #[test]
    fn rejects_wrong_version() {
        assert!(Document::parse(r#"{"version": 2}"#).is_err());
    }

    #[test]
    fn channel_specs() {
        let text = r#"{"version": 1, "channels": {
            "d": {"depolarizing": {"dim": 2, "t": 0.5}},
            "a": {"amplitude_damping": 0.3},
            "id": {"kraus": [[[1, 0], [0, 1]]]}
        }}"#;
        let doc = Document::parse(text).unwrap();
        for name in ["d", "a", "id"] {
            assert_eq!(doc.channel(name).unwrap().dim_in(), 2);
        }
    }

    #[test]
    fn matrix_json_round_trips() {
        let doc = Document::parse(PAIR).unwrap();
        let rho = doc.state("rho").unwrap();
        let text = format!(
            r#"{{"version": 1, "matrices": {{"x": {}}}}}"#,
            matrix_json(rho.as_hermitian())
        );
        let again = Document::parse(&text).unwrap().state("x").unwrap();
        assert_eq!(again.as_hermitian().matrix(), rho.as_hermitian().matrix());
    }
}
