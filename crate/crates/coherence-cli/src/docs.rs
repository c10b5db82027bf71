//! The wire format: every value is a single JSON document.
//!
//! Complex entries are two-element `[re, im]` arrays (not strings), so
//! 64-bit floats round-trip losslessly through serde_json's shortest
//! representation. Basis indices in user-facing fields are 1-based.
//!
//! Kinds: `density` and `kraus` carry a `dim x dim` nested `data` array,
//! `vector` a flat `data` array, `channel` an `ops` array of matrices.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use coherence_core::channels::{validate_channel, ChannelSpec, KrausOperator};
use coherence_core::feasibility::{CompletionResult, RayMappingSolution};
use coherence_core::qcore::{ComplexMatrix, DensityMatrix, StateVector};
use coherence_core::subspace::SubspaceReport;
use coherence_core::{Channel64, Density64, Kraus64, Matrix64, State64};

#[derive(Debug, Serialize, Deserialize)]
struct MatrixDocument {
    kind: String,
    dim: usize,
    data: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VectorDocument {
    kind: String,
    dim: usize,
    data: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelDocument {
    kind: String,
    dim: usize,
    ops: Vec<Vec<Vec<[f64; 2]>>>,
}

fn kind_of(value: &Value) -> Result<String> {
    value
        .get("kind")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| anyhow!("document is missing the \"kind\" field"))
}

fn matrix_from_nested(dim: usize, data: &[Vec<[f64; 2]>]) -> Result<Matrix64> {
    if data.len() != dim || data.iter().any(|row| row.len() != dim) {
        bail!("data shape does not match dim = {dim}");
    }
    let flat: Vec<Complex<f64>> = data
        .iter()
        .flatten()
        .map(|[re, im]| Complex::new(*re, *im))
        .collect();
    ComplexMatrix::new(dim, dim, flat).map_err(|e| anyhow!("{e}"))
}

fn nested_from_matrix(m: &Matrix64) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m.get(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

/// Parse a `density` document into a validated state.
pub fn parse_density(value: &Value) -> Result<Density64> {
    let kind = kind_of(value)?;
    if kind != "density" {
        bail!("expected kind \"density\", got \"{kind}\"");
    }
    let doc: MatrixDocument = serde_json::from_value(value.clone()).context("density document")?;
    let matrix = matrix_from_nested(doc.dim, &doc.data)?;
    DensityMatrix::new(matrix).map_err(|e| anyhow!("invalid density matrix: {e}"))
}

/// Parse a `kraus` document.
pub fn parse_kraus(value: &Value) -> Result<Kraus64> {
    let kind = kind_of(value)?;
    if kind != "kraus" {
        bail!("expected kind \"kraus\", got \"{kind}\"");
    }
    let doc: MatrixDocument = serde_json::from_value(value.clone()).context("kraus document")?;
    let matrix = matrix_from_nested(doc.dim, &doc.data)?;
    KrausOperator::new(matrix).map_err(|e| anyhow!("invalid Kraus operator: {e}"))
}

/// Parse a `vector` document into a normalized state vector.
pub fn parse_vector(value: &Value) -> Result<State64> {
    let kind = kind_of(value)?;
    if kind != "vector" {
        bail!("expected kind \"vector\", got \"{kind}\"");
    }
    let doc: VectorDocument = serde_json::from_value(value.clone()).context("vector document")?;
    if doc.data.len() != doc.dim {
        bail!("data length does not match dim = {}", doc.dim);
    }
    let amps: Vec<Complex<f64>> = doc.data.iter().map(|[re, im]| Complex::new(*re, *im)).collect();
    StateVector::new(amps).map_err(|e| anyhow!("invalid state vector: {e}"))
}

/// Parse a `channel` document and validate its completeness kind.
pub fn parse_channel(value: &Value) -> Result<Channel64> {
    let kind = kind_of(value)?;
    if kind != "channel" {
        bail!("expected kind \"channel\", got \"{kind}\"");
    }
    let doc: ChannelDocument = serde_json::from_value(value.clone()).context("channel document")?;
    let ops: Result<Vec<Kraus64>> = doc
        .ops
        .iter()
        .map(|rows| {
            let m = matrix_from_nested(doc.dim, rows)?;
            KrausOperator::new(m).map_err(|e| anyhow!("invalid Kraus operator: {e}"))
        })
        .collect();
    validate_channel(ops?).map_err(|e| anyhow!("invalid channel: {e}"))
}

pub fn density_doc(rho: &Density64) -> Value {
    serde_json::to_value(MatrixDocument {
        kind: "density".into(),
        dim: rho.dim(),
        data: nested_from_matrix(rho.matrix()),
    })
    .expect("serializable")
}

pub fn kraus_doc(k: &Kraus64) -> Value {
    serde_json::to_value(MatrixDocument {
        kind: "kraus".into(),
        dim: k.dim(),
        data: nested_from_matrix(k.matrix()),
    })
    .expect("serializable")
}

pub fn vector_doc(v: &State64) -> Value {
    serde_json::to_value(VectorDocument {
        kind: "vector".into(),
        dim: v.dim(),
        data: v.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
    })
    .expect("serializable")
}

pub fn channel_doc(spec: &ChannelSpec<f64>) -> Value {
    serde_json::to_value(ChannelDocument {
        kind: "channel".into(),
        dim: spec.dim(),
        ops: spec
            .kraus_ops()
            .iter()
            .map(|k| nested_from_matrix(k.matrix()))
            .collect(),
    })
    .expect("serializable")
}

pub fn subspace_report_doc(report: &SubspaceReport<f64>) -> Value {
    serde_json::json!({
        "max_dimension": report.max_dimension,
        "witness_projector": report.witness_projector.indices(),
        "witness_state": vector_doc(&report.witness_state),
    })
}

pub fn ray_solution_doc(sol: &RayMappingSolution<f64>) -> Value {
    serde_json::json!({
        "pattern": sol.pattern.one_based(),
        "kraus": kraus_doc(&sol.kraus),
        "ray_constants": sol.ray_constants.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "success_probability": sol.success_probability,
    })
}

pub fn completion_doc(result: &CompletionResult<f64>) -> Value {
    serde_json::json!({
        "success": result.channel.is_some(),
        "residual": result.residual,
        "restarts_used": result.restarts_used,
        "channel": result.channel.as_ref().map(channel_doc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_round_trip_is_exact() {
        let s6 = 6f64.sqrt();
        let m = Matrix64::from_rows(&[
            vec![Complex::new(2.0 / 8.0, 0.0), Complex::new(1.0 / 8.0, 1e-17), Complex::new(s6 / 8.0, 0.0)],
            vec![Complex::new(1.0 / 8.0, -1e-17), Complex::new(2.0 / 8.0, 0.0), Complex::new(s6 / 8.0, 0.0)],
            vec![Complex::new(s6 / 8.0, 0.0), Complex::new(s6 / 8.0, 0.0), Complex::new(4.0 / 8.0, 0.0)],
        ])
        .unwrap();
        let rho = DensityMatrix::new(m).unwrap();
        let doc = density_doc(&rho);
        let text = serde_json::to_string(&doc).unwrap();
        let back = parse_density(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-15);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let doc = serde_json::json!({"kind": "vector", "dim": 1, "data": [[1.0, 0.0]]});
        assert!(parse_density(&doc).is_err());
    }

    #[test]
    fn diagnostics_name_the_violated_invariant() {
        let doc = serde_json::json!({
            "kind": "density", "dim": 2,
            "data": [[[0.5, 0.0], [0.4, 0.0]], [[0.1, 0.0], [0.5, 0.0]]],
        });
        let err = parse_density(&doc).unwrap_err().to_string();
        assert!(err.contains("Hermitian"), "got: {err}");
    }
}
