//! Command implementations behind the `polfid` binary.
//!
//! Each command returns an [`Outcome`] instead of printing, so the binary and
//! the tests share one code path. Exit codes: 0 success, 1 computation
//! error, 2 input or validation error.

use serde::Serialize;

use crate::channels::{unitarity_deviation, Channel};
use crate::decomposition::{build_protocol, MAX_PROTOCOL_QUBITS};
use crate::error::Error;
use crate::fidelity::{average_fidelity, mc_average_fidelity};
use crate::io::{
    ChannelSpecFile, IoError, LoadedSpec, ProtocolDocument, ReportDocument, FORMAT_VERSION,
};
use crate::states::DensityMatrix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: String) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: message,
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_COMPUTATION
    }
}

fn from_io(e: IoError) -> Outcome {
    Outcome::fail(EXIT_INPUT, format!("error: {e}"))
}

fn from_error(e: Error) -> Outcome {
    Outcome::fail(exit_code_for(&e), format!("error: {e}"))
}

fn load(spec_path: &str, tol: f64) -> Result<LoadedSpec, Outcome> {
    let spec = ChannelSpecFile::read(spec_path).map_err(from_io)?;
    spec.load(tol)
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("error: {spec_path}: {e}")))
}

/// `avg <spec>`: closed-form average fidelity.
pub fn cmd_avg(spec_path: &str, tol: f64) -> Outcome {
    let spec = match load(spec_path, tol) {
        Ok(s) => s,
        Err(o) => return o,
    };
    match average_fidelity(&spec.target, &spec.channel, spec.n) {
        Ok(r) => Outcome::ok(ReportDocument::new(r).to_json()),
        Err(e) => from_error(e),
    }
}

/// `mc <spec> --samples N --seed S`: Monte-Carlo estimate.
pub fn cmd_mc(spec_path: &str, samples: usize, seed: Option<u64>, tol: f64) -> Outcome {
    let spec = match load(spec_path, tol) {
        Ok(s) => s,
        Err(o) => return o,
    };
    if samples < 2 {
        return Outcome::fail(
            EXIT_INPUT,
            format!("error: --samples must be >= 2, got {samples}"),
        );
    }
    let seed = seed.unwrap_or_else(rand::random);
    match mc_average_fidelity(&spec.target, &spec.channel, spec.n, samples, seed) {
        Ok(r) => Outcome::ok(ReportDocument::new(r).to_json()),
        Err(e) => from_error(e),
    }
}

#[derive(Debug, Serialize)]
struct ProtocolSummary<'a> {
    format_version: u32,
    n: usize,
    out: &'a str,
    preparations: usize,
    /// The protocol evaluated on the spec's own channel.
    value: f64,
}

/// `protocol <spec> --out PATH`: writes the measurement protocol.
pub fn cmd_protocol(spec_path: &str, out_path: &str, tol: f64) -> Outcome {
    let spec = match load(spec_path, tol) {
        Ok(s) => s,
        Err(o) => return o,
    };
    if spec.n > MAX_PROTOCOL_QUBITS {
        return Outcome::fail(
            EXIT_INPUT,
            format!(
                "error: protocol synthesis supports n <= {MAX_PROTOCOL_QUBITS}, spec has n = {}",
                spec.n
            ),
        );
    }
    let protocol = match build_protocol(&spec.target, spec.n) {
        Ok(p) => p,
        Err(e) => return from_error(e),
    };
    let value = match protocol.evaluate(&spec.channel) {
        Ok(v) => v,
        Err(e) => return from_error(e),
    };
    let doc = ProtocolDocument::from(&protocol);
    if let Err(source) = std::fs::write(out_path, doc.to_json()) {
        return from_io(IoError::Write {
            path: out_path.to_string(),
            source,
        });
    }
    let summary = ProtocolSummary {
        format_version: FORMAT_VERSION,
        n: spec.n,
        out: out_path,
        preparations: protocol.preparations.len(),
        value,
    };
    Outcome::ok(serde_json::to_string_pretty(&summary).expect("summary serializes"))
}

#[derive(Debug, Serialize)]
struct CheckLine {
    name: &'static str,
    deviation: f64,
    ok: bool,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    format_version: u32,
    n: usize,
    tol: f64,
    ok: bool,
    checks: Vec<CheckLine>,
}

/// Worst density-validation deviation of the channel output over a few
/// probe states.
fn output_deviation(channel: &Channel, n: usize) -> f64 {
    let mut probes = vec![
        DensityMatrix::zero_state(n).expect("n within cap"),
        DensityMatrix::maximally_mixed(n).expect("n within cap"),
    ];
    let dim = 1usize << n;
    let plus = vec![num_complex::Complex64::new(1.0, 0.0); dim];
    probes.push(DensityMatrix::from_ket(&plus).expect("valid ket"));

    probes
        .iter()
        .map(|rho| {
            let Ok(out) = channel.apply_to_operator(rho.matrix()) else {
                return f64::INFINITY;
            };
            let herm = out.hermiticity_deviation();
            let trace = (out.trace() - num_complex::Complex64::new(1.0, 0.0)).norm();
            let negativity = (-out.min_hermitian_eigenvalue()).max(0.0);
            herm.max(trace).max(negativity)
        })
        .fold(0.0, f64::max)
}

/// `check <spec>`: per-invariant deviations.
pub fn cmd_check(spec_path: &str, tol: f64) -> Outcome {
    let spec = match ChannelSpecFile::read(spec_path) {
        Ok(s) => s,
        Err(e) => return from_io(e),
    };
    let loaded = match spec.load_unchecked() {
        Ok(l) => l,
        Err(e) => return Outcome::fail(EXIT_INPUT, format!("error: {spec_path}: {e}")),
    };
    let mut checks = Vec::new();
    let target_dev = unitarity_deviation(&loaded.target);
    checks.push(CheckLine {
        name: "target_unitarity",
        deviation: target_dev,
        ok: target_dev <= tol,
    });
    let tp = loaded.channel.check_trace_preserving(tol);
    checks.push(CheckLine {
        name: if matches!(spec.channel, crate::io::ChannelSpec::Unitary { .. }) {
            "channel_unitarity"
        } else {
            "trace_preservation"
        },
        deviation: tp.max_deviation,
        ok: tp.ok,
    });
    let out_dev = output_deviation(&loaded.channel, loaded.n);
    checks.push(CheckLine {
        name: "output_density",
        deviation: out_dev,
        ok: out_dev <= tol,
    });

    let ok = checks.iter().all(|c| c.ok);
    let report = CheckReport {
        format_version: FORMAT_VERSION,
        n: loaded.n,
        tol,
        ok,
        checks,
    };
    let body = serde_json::to_string_pretty(&report).expect("check report serializes");
    Outcome {
        code: if ok { EXIT_OK } else { EXIT_INPUT },
        stdout: body,
        stderr: String::new(),
    }
}
