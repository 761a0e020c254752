//! JSON views of the core results. Every report is an object whose first fields are
//! `"schema": "markovkit/1"` and `"command"`. Absent optional values are omitted rather
//! than written as `null`, so a `null` in a serialized report always marks a
//! non-finite number and is rejected by [`render`].

use markovkit_core::algebra::{BlockStructure, SplitIsometry};
use markovkit_core::channels::{QuantumChannel, RandomUnitaryEnsemble};
use markovkit_core::cost::{CostBounds, CostReport};
use markovkit_core::kidecomp::KIDecomposition;
use markovkit_core::markov::{MarkovDecomposition, MarkovReport};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::state_file::{layout_to_json, matrix_to_json, MatrixJson, SystemSpec};

pub const SCHEMA: &str = "markovkit/1";

#[derive(Clone, Debug, Serialize)]
pub struct ChannelJson {
    pub in_systems: Vec<SystemSpec>,
    pub out_systems: Vec<SystemSpec>,
    pub kraus: Vec<MatrixJson>,
    pub completeness_defect: f64,
}

impl From<&QuantumChannel> for ChannelJson {
    fn from(ch: &QuantumChannel) -> Self {
        ChannelJson {
            in_systems: layout_to_json(ch.in_layout()),
            out_systems: layout_to_json(ch.out_layout()),
            kraus: ch.kraus().iter().map(matrix_to_json).collect(),
            completeness_defect: ch.completeness_defect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleJson {
    pub systems: Vec<SystemSpec>,
    pub cost_bits: f64,
    pub unitaries: Vec<MatrixJson>,
}

impl From<&RandomUnitaryEnsemble> for EnsembleJson {
    fn from(e: &RandomUnitaryEnsemble) -> Self {
        EnsembleJson {
            systems: layout_to_json(e.layout()),
            cost_bits: e.cost_bits(),
            unitaries: e.unitaries().iter().map(matrix_to_json).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlgebraBlockJson {
    pub n: usize,
    pub m: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockStructureJson {
    pub unitary: MatrixJson,
    pub blocks: Vec<AlgebraBlockJson>,
}

impl From<&BlockStructure> for BlockStructureJson {
    fn from(s: &BlockStructure) -> Self {
        BlockStructureJson {
            unitary: matrix_to_json(&s.iso),
            blocks: s
                .blocks
                .iter()
                .map(|b| AlgebraBlockJson {
                    n: b.n,
                    m: b.m,
                    offset: b.offset,
                })
                .collect(),
        }
    }
}

/// Padded dimensions of a three-factor split.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SplitDims {
    pub zero: usize,
    pub left: usize,
    pub right: usize,
}

impl From<(usize, usize, usize)> for SplitDims {
    fn from((zero, left, right): (usize, usize, usize)) -> Self {
        SplitDims { zero, left, right }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SplitBlockJson {
    pub left: usize,
    pub right: usize,
}

/// Rows of `matrix` are indexed `(j·d_L + x)·d_R + y` for block `j`, left index `x`
/// and right index `y`.
#[derive(Clone, Debug, Serialize)]
pub struct SplitIsometryJson {
    pub dims: SplitDims,
    pub blocks: Vec<SplitBlockJson>,
    pub matrix: MatrixJson,
}

impl From<&SplitIsometry> for SplitIsometryJson {
    fn from(g: &SplitIsometry) -> Self {
        SplitIsometryJson {
            dims: g.dims().into(),
            blocks: g
                .blocks
                .iter()
                .map(|&(left, right)| SplitBlockJson { left, right })
                .collect(),
            matrix: matrix_to_json(&g.matrix),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KIBlockJson {
    pub p: f64,
    /// `a_R` dimension.
    pub n: usize,
    /// `a_L` dimension.
    pub m: usize,
    pub omega_rank: usize,
    pub phi_rank: usize,
    pub omega: MatrixJson,
    pub phi: MatrixJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct KIJson {
    pub a_systems: Vec<SystemSpec>,
    pub c_systems: Vec<SystemSpec>,
    /// `(d_{a₀}, d_{a_L}, d_{a_R})`.
    pub dims: SplitDims,
    pub residual: f64,
    pub entropy_p: f64,
    pub weighted_ar_entropy: f64,
    pub gamma: SplitIsometryJson,
    pub blocks: Vec<KIBlockJson>,
}

impl KIJson {
    pub fn new(ki: &KIDecomposition, cutoff_rel: f64) -> Self {
        KIJson {
            a_systems: layout_to_json(&ki.a_layout),
            c_systems: layout_to_json(&ki.c_layout),
            dims: ki.dims().into(),
            residual: ki.residual,
            entropy_p: ki.entropy_p(),
            weighted_ar_entropy: ki.weighted_ar_entropy(cutoff_rel),
            gamma: (&ki.gamma).into(),
            blocks: ki
                .blocks
                .iter()
                .map(|b| KIBlockJson {
                    p: b.p,
                    n: b.n,
                    m: b.m,
                    omega_rank: b.omega_rank,
                    phi_rank: b.phi_rank,
                    omega: matrix_to_json(&b.omega),
                    phi: matrix_to_json(&b.phi),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovEntryJson {
    pub q: f64,
    pub sigma: MatrixJson,
    pub phi: MatrixJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovDecompositionJson {
    /// `(d_A, d_B, d_C)` of the grouped state.
    pub abc_dims: [usize; 3],
    /// `(d_{b₀}, d_{b_L}, d_{b_R})`.
    pub dims: SplitDims,
    pub residual: f64,
    pub weights: Vec<f64>,
    pub gamma_prime: SplitIsometryJson,
    pub entries: Vec<MarkovEntryJson>,
}

impl From<&MarkovDecomposition> for MarkovDecompositionJson {
    fn from(md: &MarkovDecomposition) -> Self {
        MarkovDecompositionJson {
            abc_dims: [md.da, md.db, md.dc],
            dims: md.dims().into(),
            residual: md.residual,
            weights: md.weights(),
            gamma_prime: (&md.gamma_prime).into(),
            entries: md
                .entries
                .iter()
                .map(|e| MarkovEntryJson {
                    q: e.q,
                    sigma: matrix_to_json(&e.sigma),
                    phi: matrix_to_json(&e.phi),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovReportJson {
    pub markov: bool,
    pub qcmi_bits: f64,
    pub petz_error_from_bc: f64,
    pub petz_error_from_ab: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_decomposable_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_dims: Option<SplitDims>,
}

impl From<&MarkovReport> for MarkovReportJson {
    fn from(r: &MarkovReport) -> Self {
        MarkovReportJson {
            markov: r.markov,
            qcmi_bits: r.qcmi_bits,
            petz_error_from_bc: r.petz_error_from_bc,
            petz_error_from_ab: r.petz_error_from_ab,
            epsilon_decomposable_bound: r.epsilon_decomposable_bound,
            decomposition_dims: r.decomposition.as_ref().map(|d| d.dims().into()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CostReportJson {
    pub m_dec_bits: f64,
    pub qcmi_lower: f64,
    pub entropy_p: f64,
    pub weighted_ar_entropy: f64,
    pub probabilities: Vec<f64>,
    /// `(d_{a₀}, d_{a_L}, d_{a_R})`.
    pub ki_dims: SplitDims,
}

impl From<&CostReport> for CostReportJson {
    fn from(r: &CostReport) -> Self {
        CostReportJson {
            m_dec_bits: r.m_dec_bits,
            qcmi_lower: r.qcmi_lower_bits,
            entropy_p: r.entropy_p,
            weighted_ar_entropy: r.weighted_ar_entropy,
            probabilities: r.probabilities.clone(),
            ki_dims: r.ki_dims.into(),
        }
    }
}

/// Cost of a mixed input: only the QCMI lower bound is known.
#[derive(Clone, Debug, Serialize)]
pub struct CostBoundsJson {
    pub qcmi_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_dec_bits: Option<f64>,
    pub upper_unknown: bool,
}

impl From<&CostBounds> for CostBoundsJson {
    fn from(b: &CostBounds) -> Self {
        CostBoundsJson {
            qcmi_lower: b.lower_bits,
            m_dec_bits: b.upper_bits,
            upper_unknown: b.upper_unknown,
        }
    }
}

/// `{"schema", "command", ...body}` as a JSON value, rejecting non-finite numbers.
pub fn envelope<T: Serialize>(command: &str, body: &T) -> CliResult<Value> {
    let value = serde_json::to_value(body).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut map = Map::new();
    map.insert("schema".into(), Value::from(SCHEMA));
    map.insert("command".into(), Value::from(command));
    match value {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    let mut value = Value::Object(map);
    check_finite(&mut value, "")?;
    Ok(value)
}

/// Rejects `null` and rewrites `-0.0` as `0.0`.
fn check_finite(v: &mut Value, path: &str) -> CliResult<()> {
    match v {
        Value::Null => Err(CliError::NonFinite(if path.is_empty() {
            "<root>".into()
        } else {
            path.into()
        })),
        Value::Number(x) => {
            if x.as_f64() == Some(0.0) && x.is_f64() {
                *v = Value::from(0.0);
            }
            Ok(())
        }
        Value::Array(items) => items
            .iter_mut()
            .enumerate()
            .try_for_each(|(i, x)| check_finite(x, &format!("{path}[{i}]"))),
        Value::Object(fields) => fields.iter_mut().try_for_each(|(k, x)| {
            let p = if path.is_empty() {
                k.clone()
            } else {
                format!("{path}.{k}")
            };
            check_finite(x, &p)
        }),
        _ => Ok(()),
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Body {
        x: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        y: Option<f64>,
        v: Vec<f64>,
    }

    #[test]
    fn envelope_orders_fields_and_rejects_nan() {
        let ok = envelope(
            "qcmi",
            &Body {
                x: 1.0,
                y: None,
                v: vec![0.5],
            },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&ok).unwrap(),
            r#"{"schema":"markovkit/1","command":"qcmi","x":1.0,"v":[0.5]}"#
        );
        let zero = envelope(
            "qcmi",
            &Body {
                x: -0.0,
                y: None,
                v: vec![],
            },
        )
        .unwrap();
        assert_eq!(serde_json::to_string(&zero["x"]).unwrap(), "0.0");
        let bad = envelope(
            "qcmi",
            &Body {
                x: 1.0,
                y: None,
                v: vec![0.5, f64::NAN],
            },
        );
        match bad {
            Err(CliError::NonFinite(p)) => assert_eq!(p, "v[1]"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(envelope(
            "qcmi",
            &Body {
                x: f64::INFINITY,
                y: Some(1.0),
                v: vec![]
            }
        )
        .is_err());
    }
}
