//! JSON and CSV boundary formats.
//!
//! Model: `{"n", "nw", "A0": [s], "A": [s][s], "B1": [nw][s][s], "B2": [nw][s][s], "C1": [nw][s], "C2": [nw][s]}`.
//! SLH: `{"alpha": [s], "Lambda": [nw][s]}` with `[re, im]` entries.
//! Density matrix: an `n x n` grid of `[re, im]` entries.
//!
//! Real-valued fields accept a number or an `[re, 0]` pair; a non-zero
//! imaginary part is rejected. Every parse error names the offending field.

use std::io::Write;

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use sunqsde_core::algebra::{GellMannBasis, StructureTensors};
use sunqsde_core::linalg::{CMat, CVec, RMat, RVec};
use sunqsde_core::model::{PreservationReport, RealizabilityReport, SlhExtraction, SlhParams, StateSpaceModel};
use sunqsde_core::oracle::{ItoIntegrands, Trajectory};
use sunqsde_core::report::{ConditionResult, IdentityReport};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{field}: {message}")]
    Field { field: String, message: String },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Model(#[from] sunqsde_core::Error),
}

fn field_err(field: &str, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

fn get<'a>(obj: &'a Value, key: &str) -> Result<&'a Value, FormatError> {
    match obj {
        Value::Object(map) => map.get(key).ok_or_else(|| field_err(key, "missing")),
        _ => Err(field_err("<root>", "expected a JSON object")),
    }
}

fn as_usize(v: &Value, field: &str) -> Result<usize, FormatError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| field_err(field, "expected a non-negative integer"))
}

fn as_array<'a>(v: &'a Value, field: &str) -> Result<&'a Vec<Value>, FormatError> {
    v.as_array().ok_or_else(|| field_err(field, "expected an array"))
}

fn number(v: &Value, field: &str) -> Result<f64, FormatError> {
    let x = v.as_f64().ok_or_else(|| field_err(field, "expected a number"))?;
    if !x.is_finite() {
        return Err(field_err(field, "non-finite number"));
    }
    Ok(x)
}

fn complex(v: &Value, field: &str) -> Result<Complex64, FormatError> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(
            number(&pair[0], &format!("{field}[0]"))?,
            number(&pair[1], &format!("{field}[1]"))?,
        )),
        Value::Array(_) => Err(field_err(field, "expected [re, im]")),
        _ => Ok(Complex64::new(number(v, field)?, 0.0)),
    }
}

fn real(v: &Value, field: &str) -> Result<f64, FormatError> {
    let z = complex(v, field)?;
    if z.im != 0.0 {
        return Err(field_err(
            field,
            format!("entries must be real, found imaginary part {}", z.im),
        ));
    }
    Ok(z.re)
}

fn grid<T>(
    v: &Value,
    field: &str,
    rows: usize,
    cols: usize,
    entry: impl Fn(&Value, &str) -> Result<T, FormatError>,
) -> Result<Vec<T>, FormatError> {
    let outer = as_array(v, field)?;
    let inner_len = outer.first().and_then(Value::as_array).map_or(0, Vec::len);
    let mismatch = || {
        let found_cols = if outer.iter().all(|r| r.as_array().map(Vec::len) == Some(inner_len)) {
            format!("{inner_len}")
        } else {
            "ragged".to_string()
        };
        field_err(
            field,
            format!("expected {rows}x{cols}, found {}x{found_cols}", outer.len()),
        )
    };
    if outer.len() != rows {
        return Err(mismatch());
    }
    let mut out = Vec::with_capacity(rows * cols);
    for (i, row) in outer.iter().enumerate() {
        let row = as_array(row, &format!("{field}[{i}]"))?;
        if row.len() != cols {
            return Err(mismatch());
        }
        for (j, x) in row.iter().enumerate() {
            out.push(entry(x, &format!("{field}[{i}][{j}]"))?);
        }
    }
    Ok(out)
}

fn real_vec(v: &Value, field: &str, len: usize) -> Result<RVec, FormatError> {
    let arr = as_array(v, field)?;
    if arr.len() != len {
        return Err(field_err(field, format!("expected length {len}, found {}", arr.len())));
    }
    let xs = arr
        .iter()
        .enumerate()
        .map(|(i, x)| real(x, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RVec::from_vec(xs))
}

fn real_mat(v: &Value, field: &str, rows: usize, cols: usize) -> Result<RMat, FormatError> {
    Ok(RMat::from_row_slice(rows, cols, &grid(v, field, rows, cols, real)?))
}

fn complex_mat(v: &Value, field: &str, rows: usize, cols: usize) -> Result<CMat, FormatError> {
    Ok(CMat::from_row_slice(rows, cols, &grid(v, field, rows, cols, complex)?))
}

fn real_mat_list(v: &Value, field: &str, count: usize, s: usize) -> Result<Vec<RMat>, FormatError> {
    let arr = as_array(v, field)?;
    if arr.len() != count {
        return Err(field_err(
            field,
            format!("expected {count} matrices, found {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(k, m)| real_mat(m, &format!("{field}[{k}]"), s, s))
        .collect()
}

pub fn parse_json(text: &str) -> Result<Value, FormatError> {
    Ok(serde_json::from_str(text)?)
}

/// Reads a model object, checking every dimension against `n` and `nw`.
pub fn model_from_json(v: &Value) -> Result<StateSpaceModel, FormatError> {
    let n = as_usize(get(v, "n")?, "n")?;
    if n < 2 {
        return Err(field_err("n", format!("need n >= 2, found {n}")));
    }
    let nw = as_usize(get(v, "nw")?, "nw")?;
    let s = n * n - 1;
    let m = StateSpaceModel {
        n,
        nw,
        a0: real_vec(get(v, "A0")?, "A0", s)?,
        a: real_mat(get(v, "A")?, "A", s, s)?,
        b1: real_mat_list(get(v, "B1")?, "B1", nw, s)?,
        b2: real_mat_list(get(v, "B2")?, "B2", nw, s)?,
        c1: real_mat(get(v, "C1")?, "C1", nw, s)?,
        c2: real_mat(get(v, "C2")?, "C2", nw, s)?,
    };
    m.validate()?;
    Ok(m)
}

fn level_count(s: usize, field: &str) -> Result<usize, FormatError> {
    let n = ((s + 1) as f64).sqrt().round() as usize;
    if n < 2 || n * n != s + 1 {
        return Err(field_err(field, format!("length {s} is not n^2 - 1 for any n >= 2")));
    }
    Ok(n)
}

/// Reads SLH parameters; returns them with the level count implied by the
/// length of `alpha` (or given explicitly as `"n"`).
pub fn slh_from_json(v: &Value) -> Result<(usize, SlhParams), FormatError> {
    let alpha_raw = as_array(get(v, "alpha")?, "alpha")?;
    let n = match v.get("n") {
        Some(x) => as_usize(x, "n")?,
        None => level_count(alpha_raw.len(), "alpha")?,
    };
    if n < 2 {
        return Err(field_err("n", format!("need n >= 2, found {n}")));
    }
    let s = n * n - 1;
    let alpha = real_vec(get(v, "alpha")?, "alpha", s)?;
    let lam_raw = as_array(get(v, "Lambda")?, "Lambda")?;
    let lambda = complex_mat(get(v, "Lambda")?, "Lambda", lam_raw.len(), s)?;
    Ok((n, SlhParams { alpha, lambda }))
}

/// Reads an `n x n` grid of complex entries.
pub fn density_from_json(v: &Value, n: usize) -> Result<CMat, FormatError> {
    let v = v.get("rho").unwrap_or(v);
    complex_mat(v, "rho", n, n)
}

// Adding +0.0 turns -0.0 into 0.0 so reports do not flicker in sign.
fn vec_json(v: &RVec) -> Value {
    Value::from(v.iter().map(|x| x + 0.0).collect::<Vec<f64>>())
}

fn mat_json(m: &RMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::from(m.row(i).iter().map(|x| x + 0.0).collect::<Vec<f64>>()))
            .collect(),
    )
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re + 0.0, z.im + 0.0])
}

fn cvec_json(v: &CVec) -> Value {
    Value::Array(v.iter().copied().map(complex_json).collect())
}

fn cmat_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array(m.row(i).iter().copied().map(complex_json).collect()))
            .collect(),
    )
}

pub fn model_to_json(m: &StateSpaceModel) -> Value {
    json!({
        "n": m.n,
        "nw": m.nw,
        "A0": vec_json(&m.a0),
        "A": mat_json(&m.a),
        "B1": m.b1.iter().map(mat_json).collect::<Vec<_>>(),
        "B2": m.b2.iter().map(mat_json).collect::<Vec<_>>(),
        "C1": mat_json(&m.c1),
        "C2": mat_json(&m.c2),
    })
}

pub fn slh_to_json(p: &SlhParams) -> Value {
    json!({
        "alpha": vec_json(&p.alpha),
        "Lambda": cmat_json(&p.lambda),
    })
}

pub fn extraction_to_json(n: usize, ex: &SlhExtraction) -> Value {
    let mut v = slh_to_json(&ex.params);
    let obj = v.as_object_mut().expect("object");
    obj.insert("n".into(), json!(n));
    obj.insert("residual".into(), json!(ex.residual));
    v
}

/// Generators as `[re, im]` grids, and the non-zero structure constants at
/// sorted index triples (`i < j < k` for `f`, `i <= j <= k` for `d`),
/// zero-based in generator order.
pub fn tensors_to_json(basis: &GellMannBasis, t: &StructureTensors) -> Value {
    let s = t.s();
    let mut f = Vec::new();
    let mut d = Vec::new();
    for i in 0..s {
        for j in i..s {
            for k in j..s {
                let fv = t.f().get(i, j, k);
                if i < j && j < k && fv != 0.0 {
                    f.push(json!([i, j, k, fv]));
                }
                let dv = t.d().get(i, j, k);
                if dv != 0.0 {
                    d.push(json!([i, j, k, dv]));
                }
            }
        }
    }
    json!({
        "n": t.n(),
        "s": s,
        "labels": basis.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "generators": basis.generators().iter().map(cmat_json).collect::<Vec<_>>(),
        "f": f,
        "d": d,
    })
}

pub fn identity_report_to_json(n: usize, r: &IdentityReport) -> Value {
    json!({
        "report": "identities",
        "n": n,
        "tol": r.tol,
        "pass": r.pass,
        "checks": r.checks.iter().map(|c| json!({
            "id": c.id,
            "max_residual": c.max_residual,
            "worst_index": c.worst_index,
            "pass": c.pass,
        })).collect::<Vec<_>>(),
    })
}

fn conditions_json(cs: &[ConditionResult]) -> Value {
    Value::Array(
        cs.iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "channel": c.channel,
                    "residual": c.residual,
                    "pass": c.pass,
                })
            })
            .collect(),
    )
}

pub fn realizability_to_json(m: &StateSpaceModel, r: &RealizabilityReport) -> Value {
    json!({
        "report": "realizability",
        "n": m.n,
        "nw": m.nw,
        "tol": r.tol,
        "pass": r.pass,
        "conditions": conditions_json(&r.conditions),
        "offset_imag_residue": r.offset_imag_residue,
        "recovered": slh_to_json(&r.recovered),
    })
}

pub fn preservation_to_json(m: &StateSpaceModel, r: &PreservationReport) -> Value {
    json!({
        "report": "preservation",
        "n": m.n,
        "nw": m.nw,
        "tol": r.tol,
        "pass": r.pass,
        "conditions": conditions_json(&r.conditions),
        "b1": r.b1.iter().map(vec_json).collect::<Vec<_>>(),
        "b2": r.b2.iter().map(vec_json).collect::<Vec<_>>(),
        "a": vec_json(&r.a),
        "implied_A0": vec_json(&r.implied_a0),
        "implied_A0_deviation": r.implied_a0_deviation,
    })
}

pub fn integrands_to_json(m: &StateSpaceModel, it: &ItoIntegrands, tol: f64) -> Value {
    let terms: Vec<Value> = it
        .terms
        .iter()
        .map(|t| {
            let (cn, ci) = t.commutator.max_entry_norm();
            let (an, ai) = t.anticommutator.max_entry_norm();
            json!({
                "increment": t.increment.to_string(),
                "commutator_max_norm": cn,
                "commutator_worst_entry": [ci.0, ci.1],
                "anticommutator_max_norm": an,
                "anticommutator_worst_entry": [ai.0, ai.1],
            })
        })
        .collect();
    json!({
        "report": "ito_integrands",
        "n": m.n,
        "nw": m.nw,
        "tol": tol,
        "max_norm": it.max_norm(),
        "pass": it.vanish(tol),
        "terms": terms,
    })
}

pub fn trajectory_to_json(tr: &Trajectory, threshold: f64, with_mean: bool) -> Value {
    let points: Vec<Value> = tr
        .points
        .iter()
        .map(|p| {
            let mut o = Map::new();
            o.insert("t".into(), json!(p.t));
            o.insert("r_ccr".into(), json!(p.r_ccr));
            o.insert("r_accr".into(), json!(p.r_accr));
            if with_mean {
                o.insert("m".into(), cvec_json(&p.mean));
            }
            Value::Object(o)
        })
        .collect();
    json!({
        "report": "trajectory",
        "threshold": threshold,
        "max_residual": tr.max_residual(),
        "pass": tr.max_residual() < threshold,
        "points": points,
    })
}

/// Shortest round-trip decimal form, as in the JSON reports.
fn csv_float(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats serialize")
    } else {
        x.to_string()
    }
}

/// CSV with columns `t, r_ccr, r_accr`, then `m{i}_re, m{i}_im` for each
/// generator (one-based) when `with_mean` is set.
pub fn write_trajectory_csv<W: Write>(w: W, tr: &Trajectory, with_mean: bool) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let s = tr.final_state.mean.len();
    let mut header = vec!["t".to_string(), "r_ccr".into(), "r_accr".into()];
    if with_mean {
        for i in 1..=s {
            header.push(format!("m{i}_re"));
            header.push(format!("m{i}_im"));
        }
    }
    out.write_record(&header)?;
    for p in &tr.points {
        let mut rec = vec![csv_float(p.t), csv_float(p.r_ccr), csv_float(p.r_accr)];
        if with_mean {
            for z in p.mean.iter() {
                rec.push(csv_float(z.re));
                rec.push(csv_float(z.im));
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_model_json(n: usize, nw: usize) -> Value {
        model_to_json(&StateSpaceModel::zeros(n, nw).unwrap())
    }

    #[test]
    fn model_round_trips() {
        let mut m = StateSpaceModel::zeros(2, 1).unwrap();
        m.a[(0, 1)] = 0.1;
        m.c2[(0, 2)] = -1.0 / 3.0;
        let back = model_from_json(&parse_json(&to_pretty(&model_to_json(&m))).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn wrong_matrix_size_names_field() {
        let mut v = zero_model_json(2, 1);
        v["A"] = json!(vec![vec![0.0; 4]; 4]);
        let err = model_from_json(&v).unwrap_err().to_string();
        assert!(err.starts_with("A:"), "{err}");
        assert!(err.contains("expected 3x3"), "{err}");
    }

    #[test]
    fn complex_entry_rejected() {
        let mut v = zero_model_json(2, 1);
        v["A"][1][2] = json!([0.0, 1.0]);
        let err = model_from_json(&v).unwrap_err().to_string();
        assert!(err.contains("A[1][2]") && err.contains("real"), "{err}");
        v["A"][1][2] = json!([0.5, 0.0]);
        assert_eq!(model_from_json(&v).unwrap().a[(1, 2)], 0.5);
    }

    #[test]
    fn missing_field_reported() {
        let mut v = zero_model_json(2, 1);
        v.as_object_mut().unwrap().remove("C2");
        assert_eq!(model_from_json(&v).unwrap_err().to_string(), "C2: missing");
    }

    #[test]
    fn slh_infers_level_count() {
        let v = json!({"alpha": [0, 0, 1], "Lambda": [[[0.5, 0], [0, 0.5], 0]]});
        let (n, p) = slh_from_json(&v).unwrap();
        assert_eq!(n, 2);
        assert_eq!(p.lambda[(0, 1)], Complex64::new(0.0, 0.5));
        let bad = json!({"alpha": [0, 0], "Lambda": []});
        assert!(slh_from_json(&bad).is_err());
    }

    #[test]
    fn density_grid() {
        let v = json!([[[1, 0], [0, 0]], [[0, 0], [0, 0]]]);
        let rho = density_from_json(&v, 2).unwrap();
        assert_eq!(rho[(0, 0)], Complex64::new(1.0, 0.0));
        assert!(density_from_json(&v, 3).is_err());
    }

    #[test]
    fn shortest_float_formatting() {
        let s = to_pretty(&json!({"b": 0.1, "a": 1e-300}));
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("0.1") && s.contains("1e-300"));
    }
}
