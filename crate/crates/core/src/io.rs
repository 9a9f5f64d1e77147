//! JSON documents: channel spec files, fidelity reports and protocols.
//!
//! Complex numbers are `[re, im]` pairs; matrices are arrays of rows. Every
//! document carries `format_version`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{amplitude_damping, depolarizing, Channel};
use crate::decomposition::{ProductLabel, ProtocolSpec};
use crate::error::{Error, Result};
use crate::fidelity::FidelityReport;
use crate::matrix::ComplexMatrix;
use crate::pauli::check_dense_cap;
use crate::states::{validate_density, DensityMatrix};

pub const FORMAT_VERSION: u32 = 1;

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid document: {0}")]
    Invalid(#[from] Error),
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    m.rows()
        .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

fn check_version(v: u32) -> std::result::Result<(), IoError> {
    if v != FORMAT_VERSION {
        return Err(IoError::Version(v));
    }
    Ok(())
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Unitary { matrix: JsonMatrix },
    Kraus { operators: Vec<JsonMatrix> },
    Depolarizing { p: f64 },
    AmplitudeDamping { gamma: f64 },
}

/// A channel/target pair as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpecFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub n: usize,
    /// Defaults to the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_unitary: Option<JsonMatrix>,
    pub channel: ChannelSpec,
}

/// Shape-checked contents of a spec file; channel invariants not yet enforced.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub n: usize,
    pub target: ComplexMatrix,
    pub channel: Channel,
}

fn expect_dim(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.dim() != 1 << n {
        return Err(Error::Shape(format!(
            "{what} is {0}x{0}, expected {1}x{1} for n = {n}",
            m.dim(),
            1usize << n
        )));
    }
    Ok(())
}

impl ChannelSpecFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, IoError> {
        let spec: Self = serde_json::from_str(text)?;
        check_version(spec.format_version)?;
        Ok(spec)
    }

    pub fn read(path: &str) -> std::result::Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
            path: path.to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Parses matrices and checks shapes only; trace preservation and
    /// unitarity are left to the caller.
    pub fn load_unchecked(&self) -> Result<LoadedSpec> {
        let n = self.n;
        check_dense_cap(n)?;
        let target = match &self.target_unitary {
            Some(rows) => matrix_from_json(rows)?,
            None => ComplexMatrix::identity(1 << n),
        };
        expect_dim(&target, n, "target_unitary")?;
        let channel = match &self.channel {
            ChannelSpec::Unitary { matrix } => {
                let m = matrix_from_json(matrix)?;
                expect_dim(&m, n, "channel unitary")?;
                // Stored as a one-element Kraus family until checked.
                Channel::kraus_unchecked(vec![m])?
            }
            ChannelSpec::Kraus { operators } => {
                let ops = operators
                    .iter()
                    .map(matrix_from_json)
                    .collect::<Result<Vec<_>>>()?;
                for k in &ops {
                    expect_dim(k, n, "Kraus operator")?;
                }
                Channel::kraus_unchecked(ops)?
            }
            ChannelSpec::Depolarizing { p } => depolarizing(n, *p)?,
            ChannelSpec::AmplitudeDamping { gamma } => {
                if n != 1 {
                    return Err(Error::Shape(format!(
                        "amplitude_damping is single-qubit, spec has n = {n}"
                    )));
                }
                amplitude_damping(*gamma)?
            }
        };
        Ok(LoadedSpec { n, target, channel })
    }

    /// Parses and enforces every channel invariant to `tol`.
    pub fn load(&self, tol: f64) -> Result<LoadedSpec> {
        let raw = self.load_unchecked()?;
        crate::channels::check_unitary(&raw.target, tol)?;
        let channel = match &self.channel {
            ChannelSpec::Unitary { .. } => {
                let u = raw.channel.kraus_operators().remove(0);
                Channel::unitary(u, tol)?
            }
            _ => Channel::kraus(raw.channel.kraus_operators(), tol)?,
        };
        Ok(LoadedSpec { channel, ..raw })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub report: FidelityReport,
}

impl ReportDocument {
    pub fn new(report: FidelityReport) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            report,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, IoError> {
        let doc: Self = serde_json::from_str(text)?;
        check_version(doc.format_version)?;
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolDocument {
    pub format_version: u32,
    pub n: usize,
    /// Product-state labels such as `+x-z`, one per preparation.
    pub labels: Vec<String>,
    pub preparations: Vec<JsonMatrix>,
    pub projectors: Vec<JsonMatrix>,
    pub weight: Vec<Vec<f64>>,
    pub offset: f64,
    pub scale: f64,
}

impl From<&ProtocolSpec> for ProtocolDocument {
    fn from(p: &ProtocolSpec) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            n: p.n,
            labels: p.labels.iter().map(|l| l.to_string()).collect(),
            preparations: p
                .preparations
                .iter()
                .map(|s| matrix_to_json(s.matrix()))
                .collect(),
            projectors: p
                .projectors
                .iter()
                .map(|s| matrix_to_json(s.matrix()))
                .collect(),
            weight: p.weight.clone(),
            offset: p.offset,
            scale: p.scale,
        }
    }
}

fn states_from_json(list: &[JsonMatrix], n: usize, tol: f64) -> Result<Vec<DensityMatrix>> {
    list.iter()
        .map(|m| {
            let m = matrix_from_json(m)?;
            expect_dim(&m, n, "protocol state")?;
            validate_density(&m, tol)
        })
        .collect()
}

impl ProtocolDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, IoError> {
        let doc: Self = serde_json::from_str(text)?;
        check_version(doc.format_version)?;
        Ok(doc)
    }

    pub fn to_protocol(&self, tol: f64) -> Result<ProtocolSpec> {
        let n = self.n;
        check_dense_cap(n)?;
        let preparations = states_from_json(&self.preparations, n, tol)?;
        let projectors = states_from_json(&self.projectors, n, tol)?;
        let labels = self
            .labels
            .iter()
            .map(|l| ProductLabel::parse(l))
            .collect::<Result<Vec<_>>>()?;
        let (s, t) = (projectors.len(), preparations.len());
        if labels.len() != t
            || self.weight.len() != s
            || self.weight.iter().any(|row| row.len() != t)
        {
            return Err(Error::Shape(format!(
                "weight must be {s}x{t} and labels must number {t}"
            )));
        }
        Ok(ProtocolSpec {
            n,
            labels,
            preparations,
            projectors,
            weight: self.weight.clone(),
            offset: self.offset,
            scale: self.scale,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::build_protocol;
    use crate::fidelity::{FidelityReport, Method};

    const TOL: f64 = 1e-9;

    #[test]
    fn parses_depolarizing_spec() {
        let spec = ChannelSpecFile::from_json(
            r#"{"format_version": 1, "n": 1, "channel": {"kind": "depolarizing", "p": 0.4}}"#,
        )
        .unwrap();
        let loaded = spec.load(TOL).unwrap();
        assert_eq!(loaded.n, 1);
        assert_eq!(loaded.target, ComplexMatrix::identity(2));
    }

    #[test]
    fn kraus_spec_must_preserve_trace() {
        let spec = ChannelSpecFile::from_json(
            r#"{"n": 1, "channel": {"kind": "kraus",
                "operators": [[[[0.9, 0], [0, 0]], [[0, 0], [0.9, 0]]]]}}"#,
        )
        .unwrap();
        assert!(spec.load_unchecked().is_ok());
        assert!(matches!(
            spec.load(TOL),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn non_square_unitary_is_rejected() {
        let spec = ChannelSpecFile::from_json(
            r#"{"n": 1, "channel": {"kind": "unitary",
                "matrix": [[[1, 0], [0, 0]], [[0, 0]]]}}"#,
        )
        .unwrap();
        assert!(matches!(spec.load_unchecked(), Err(Error::Shape(_))));
    }

    #[test]
    fn wrong_version_and_unknown_kind_rejected() {
        assert!(matches!(
            ChannelSpecFile::from_json(
                r#"{"format_version": 2, "n": 1, "channel": {"kind": "depolarizing", "p": 0}}"#
            ),
            Err(IoError::Version(2))
        ));
        assert!(matches!(
            ChannelSpecFile::from_json(r#"{"n": 1, "channel": {"kind": "dephasing", "p": 0}}"#),
            Err(IoError::Parse(_))
        ));
    }

    #[test]
    fn spec_dimension_must_match_n() {
        let spec = ChannelSpecFile::from_json(
            r#"{"n": 2, "channel": {"kind": "unitary",
                "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}}"#,
        )
        .unwrap();
        assert!(matches!(spec.load(TOL), Err(Error::Shape(_))));
    }

    #[test]
    fn report_round_trips() {
        let doc = ReportDocument::new(FidelityReport {
            method: Method::MonteCarlo,
            value: 0.9,
            n: 1,
            samples: 10,
            stderr: 0.01,
            seed: Some(3),
            rng: Some("chacha20".into()),
            chunk_size: Some(4096),
        });
        let back = ReportDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn protocol_round_trips() {
        let p = build_protocol(&ComplexMatrix::identity(2), 1).unwrap();
        let doc = ProtocolDocument::from(&p);
        let back = ProtocolDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back.to_protocol(TOL).unwrap(), p);
    }
}
