//! JSON and CSV formats.
//!
//! Jets: `{"n":1,"p":[[0.0,0.0]],"hbar":0.5,"mode":"float","coeffs":[{"I":[1],"J":[0],"re":1.0,"im":0.0}]}`
//! with derivative values `a_{I,J}`. Exact-mode numbers are strings such as
//! `"1/3"`; floats print in shortest round-trip form. Provider jets carry a
//! `provider` object instead of `coeffs`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fock::FockOperator;
use crate::jet::{Body, Jet, Provider, SeriesRule};
use crate::multiindex::MultiIndex;
use crate::scalar::{RealScalar, Scalar};
use crate::seminorm::TableRow;
use crate::series::Status;
use crate::wick::GradedJet;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn real_to_json<R: RealScalar>(x: &R, exact: bool) -> Value {
    if exact {
        Value::String(x.to_string())
    } else {
        json!(x.to_f64())
    }
}

/// A real from a JSON number or a `"p/q"` / decimal string.
pub fn real_from_json<R: RealScalar>(v: &Value) -> Result<R> {
    match v {
        Value::Number(n) => {
            let x = n.as_f64().ok_or_else(|| parse_err("number out of range"))?;
            R::from_f64(x).ok_or_else(|| parse_err("non-finite number"))
        }
        Value::String(s) => parse_real(s),
        other => Err(parse_err(format!("expected a number, found {other}"))),
    }
}

/// Parses `p/q`, an integer, or a decimal (decimals are read exactly as
/// the nearest binary float).
pub fn parse_real<R: RealScalar>(s: &str) -> Result<R> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| parse_err(format!("{s}: {e}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| parse_err(format!("{s}: {e}")))?;
        if q == BigInt::from(0) {
            return Err(parse_err(format!("{s}: zero denominator")));
        }
        return Ok(R::from_rational(&BigRational::new(p, q)));
    }
    if let Ok(p) = BigInt::from_str(s) {
        return Ok(R::from_rational(&BigRational::from_integer(p)));
    }
    let x: f64 = s.parse().map_err(|_| parse_err(format!("not a number: {s}")))?;
    R::from_f64(x).ok_or_else(|| parse_err(format!("non-finite number: {s}")))
}

fn scalar_pair<T: Scalar>(x: &T) -> Value {
    json!([real_to_json(&x.re(), T::EXACT), real_to_json(&x.im(), T::EXACT)])
}

fn scalar_from_pair<T: Scalar>(v: &Value) -> Result<T> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(T::from_parts(real_from_json(re)?, real_from_json(im)?)),
        _ => Err(parse_err(format!("expected [re, im], found {v}"))),
    }
}

fn c64_pair(x: &Complex64) -> Value {
    json!([x.re, x.im])
}

fn c64_from_pair(v: &Value) -> Result<Complex64> {
    scalar_from_pair::<Complex64>(v)
}

fn c64_list(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(c64_pair).collect())
}

fn c64_list_from(v: &Value) -> Result<Vec<Complex64>> {
    v.as_array()
        .ok_or_else(|| parse_err("expected a list of [re, im] pairs"))?
        .iter()
        .map(c64_from_pair)
        .collect()
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name).ok_or_else(|| parse_err(format!("missing field `{name}`")))
}

fn index_from(v: &Value) -> Result<MultiIndex> {
    Ok(MultiIndex::deserialize(v)?)
}

fn u32_from(v: &Value) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| parse_err(format!("expected a small non-negative integer, found {v}")))
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    #[serde(rename = "I")]
    i: MultiIndex,
    #[serde(rename = "J")]
    j: MultiIndex,
    re: Value,
    im: Value,
}

fn provider_to_json(p: &Provider) -> Result<Value> {
    Ok(match p {
        Provider::Polynomial(terms) => json!({
            "kind": "polynomial",
            "monomials": terms.iter().map(|((i, j), v)| json!({"I": i, "J": j, "re": v.re, "im": v.im})).collect::<Vec<_>>(),
        }),
        Provider::Exponential { prefactor, abar, beta } => json!({
            "kind": "exponential",
            "prefactor": c64_pair(prefactor),
            "abar": c64_list(abar),
            "beta": c64_list(beta),
        }),
        Provider::PowerSeries1d(rule) => json!({
            "kind": "power_series",
            "rule": match rule {
                SeriesRule::QuarticRootFactorial => json!("quartic_root_factorial"),
                SeriesRule::InverseFactorial => json!("inverse_factorial"),
                SeriesRule::Coefficients(c) => json!({"coefficients": c64_list(c)}),
            },
        }),
        Provider::TaylorRemainder { inner, n, m } => json!({
            "kind": "taylor_remainder", "inner": provider_to_json(inner)?, "n": n, "m": m,
        }),
        Provider::Derivative { inner, i, j } => json!({
            "kind": "derivative", "inner": provider_to_json(inner)?, "I": i, "J": j,
        }),
        Provider::Conjugate(inner) => json!({"kind": "conjugate", "inner": provider_to_json(inner)?}),
        Provider::Rescaled { inner, sqrt_alpha } => json!({
            "kind": "rescaled", "inner": provider_to_json(inner)?, "sqrt_alpha": sqrt_alpha,
        }),
        Provider::Combination(parts) => json!({
            "kind": "combination",
            "parts": parts
                .iter()
                .map(|(w, p)| Ok(json!({"weight": c64_pair(w), "provider": provider_to_json(p)?})))
                .collect::<Result<Vec<_>>>()?,
        }),
        Provider::Custom(rule) => {
            return Err(Error::InvalidParameter(format!(
                "custom rule `{}` has no serialized form",
                rule.name
            )))
        }
    })
}

fn provider_from_json(v: &Value) -> Result<Provider> {
    let kind = field(v, "kind")?.as_str().ok_or_else(|| parse_err("`kind` must be a string"))?;
    let inner = || -> Result<Box<Provider>> { Ok(Box::new(provider_from_json(field(v, "inner")?)?)) };
    Ok(match kind {
        "polynomial" => {
            let entries: Vec<CoeffEntry> = serde_json::from_value(field(v, "monomials")?.clone())?;
            Provider::Polynomial(
                entries
                    .into_iter()
                    .map(|e| Ok(((e.i, e.j), Complex64::new(real_from_json(&e.re)?, real_from_json(&e.im)?))))
                    .collect::<Result<_>>()?,
            )
        }
        "exponential" => Provider::Exponential {
            prefactor: v.get("prefactor").map(c64_from_pair).transpose()?.unwrap_or(Complex64::new(1.0, 0.0)),
            abar: c64_list_from(field(v, "abar")?)?,
            beta: c64_list_from(field(v, "beta")?)?,
        },
        "power_series" => Provider::PowerSeries1d(match field(v, "rule")? {
            Value::String(s) if s == "quartic_root_factorial" => SeriesRule::QuarticRootFactorial,
            Value::String(s) if s == "inverse_factorial" => SeriesRule::InverseFactorial,
            r => SeriesRule::Coefficients(c64_list_from(field(r, "coefficients")?)?),
        }),
        "taylor_remainder" => Provider::TaylorRemainder {
            inner: inner()?,
            n: u32_from(field(v, "n")?)?,
            m: u32_from(field(v, "m")?)?,
        },
        "derivative" => Provider::Derivative {
            inner: inner()?,
            i: index_from(field(v, "I")?)?,
            j: index_from(field(v, "J")?)?,
        },
        "conjugate" => Provider::Conjugate(inner()?),
        "rescaled" => Provider::Rescaled {
            inner: inner()?,
            sqrt_alpha: real_from_json(field(v, "sqrt_alpha")?)?,
        },
        "combination" => Provider::Combination(
            field(v, "parts")?
                .as_array()
                .ok_or_else(|| parse_err("`parts` must be a list"))?
                .iter()
                .map(|part| Ok((c64_from_pair(field(part, "weight")?)?, provider_from_json(field(part, "provider")?)?)))
                .collect::<Result<_>>()?,
        ),
        other => return Err(parse_err(format!("unknown provider kind `{other}`"))),
    })
}

pub fn jet_to_json<T: Scalar>(f: &Jet<T>) -> Result<Value> {
    let mut doc = json!({
        "n": f.n(),
        "p": f.basepoint().iter().map(scalar_pair).collect::<Vec<_>>(),
        "hbar": real_to_json(f.hbar(), T::EXACT),
        "mode": if T::EXACT { "exact" } else { "float" },
    });
    let obj = doc.as_object_mut().expect("object literal");
    match f.body() {
        Body::Table(t) => {
            obj.insert("degree".into(), json!(t.degree));
            obj.insert("complete".into(), json!(t.complete));
            let coeffs: Vec<Value> = t
                .coeffs
                .iter()
                .map(|((i, j), v)| {
                    json!({"I": i, "J": j, "re": real_to_json(&v.re(), T::EXACT), "im": real_to_json(&v.im(), T::EXACT)})
                })
                .collect();
            obj.insert("coeffs".into(), Value::Array(coeffs));
        }
        Body::Provider(p) => {
            obj.insert("provider".into(), provider_to_json(p)?);
        }
    }
    Ok(doc)
}

/// Reads a jet in either mode; float input read in exact mode is taken
/// at its exact binary value.
pub fn jet_from_json<T: Scalar>(v: &Value) -> Result<Jet<T>> {
    let n = field(v, "n")?.as_u64().ok_or_else(|| parse_err("`n` must be an integer"))? as usize;
    let p = field(v, "p")?
        .as_array()
        .ok_or_else(|| parse_err("`p` must be a list"))?
        .iter()
        .map(scalar_from_pair::<T>)
        .collect::<Result<Vec<_>>>()?;
    let hbar: T::Real = real_from_json(field(v, "hbar")?)?;
    if let Some(provider) = v.get("provider") {
        return Jet::from_provider(n, p, hbar, provider_from_json(provider)?);
    }
    let entries: Vec<CoeffEntry> = serde_json::from_value(field(v, "coeffs")?.clone())?;
    let coeffs = entries
        .into_iter()
        .map(|e| Ok(((e.i, e.j), T::from_parts(real_from_json(&e.re)?, real_from_json(&e.im)?))))
        .collect::<Result<Vec<_>>>()?;
    let complete = v.get("complete").and_then(Value::as_bool).unwrap_or(true);
    let degree = match v.get("degree") {
        Some(d) => u32_from(d)?,
        None => coeffs.iter().map(|((i, j), _)| i.degree() + j.degree()).max().unwrap_or(0),
    };
    Jet::from_table(n, p, hbar, degree, complete, coeffs)
}

/// Components tagged with their power of `lambda`.
pub fn graded_to_json<T: Scalar>(g: &GradedJet<T>) -> Result<Value> {
    g.components
        .iter()
        .enumerate()
        .map(|(r, jet)| {
            let mut doc = jet_to_json(jet)?;
            doc.as_object_mut().expect("object").insert("lambda_power".into(), json!(r));
            Ok(doc)
        })
        .collect::<Result<Vec<_>>>()
        .map(Value::Array)
}

pub fn fock_operator_to_json(op: &FockOperator) -> Value {
    let rows: Vec<Value> = (0..op.dim())
        .map(|r| Value::Array((0..op.dim()).map(|c| c64_pair(&op.matrix[(r, c)])).collect()))
        .collect();
    json!({
        "n": op.n,
        "hbar": op.hbar,
        "D": op.d,
        "interior_margin": op.interior_margin,
        "matrix": rows,
    })
}

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn joined(r: &MultiIndex) -> String {
    r.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Seminorm sweep as CSV. Divergent rows leave `value` empty.
pub fn table_csv(rows: &[TableRow]) -> Result<String> {
    csv_string(
        &["m", "l", "R", "S", "hbar", "value", "status", "terms_used", "last_term"],
        rows.iter().map(|row| {
            let e = &row.evaluation;
            let value = if e.status == Status::Diverging {
                String::new()
            } else {
                fmt_f64(e.value)
            };
            vec![
                row.m.to_string(),
                row.l.to_string(),
                joined(&row.r),
                joined(&row.s),
                fmt_f64(row.hbar),
                value,
                e.status.to_string(),
                e.terms_used.to_string(),
                fmt_f64(e.last_term),
            ]
        }),
    )
}

/// Plot data with a header and 17-digit numbers.
pub fn plot_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    csv_string(header, rows.iter().map(|r| r.iter().map(|&x| fmt_f64(x)).collect()))
}

/// Expectation sweep `re_w,im_w,re_val,im_val`.
pub fn expectation_csv(points: &[(Complex64, Complex64)]) -> Result<String> {
    let rows: Vec<Vec<f64>> = points.iter().map(|(w, v)| vec![w.re, w.im, v.re, v.im]).collect();
    plot_csv(&["re_w", "im_w", "re_val", "im_val"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{complex_ratio, ExactComplex};
    use crate::seminorm::{table, Cutoffs};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn reads_the_documented_example() {
        let doc: Value = serde_json::from_str(
            r#"{"n":1,"p":[[0.0,0.0]],"hbar":0.5,"mode":"float","coeffs":[{"I":[1],"J":[0],"re":1.0,"im":0.0}]}"#,
        )
        .unwrap();
        let f: Jet<Complex64> = jet_from_json(&doc).unwrap();
        assert_eq!(f.polynomial_degrees(), Some((1, 0)));
        assert_eq!(f.coeff(&mi(&[1]), &mi(&[0])), Some(Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn exact_round_trip() {
        let f = Jet::<ExactComplex>::from_monomials(
            2,
            vec![complex_ratio(1, -2, 3), complex_ratio(0, 0, 1)],
            BigRational::from_ratio(1, 3),
            [(mi(&[1, 0]), mi(&[0, 2]), complex_ratio(5, 1, 7)), (mi(&[0, 0]), mi(&[0, 0]), complex_ratio(-1, 0, 1))],
        )
        .unwrap();
        let doc = jet_to_json(&f).unwrap();
        assert_eq!(doc["mode"], "exact");
        assert_eq!(doc["hbar"], "1/3");
        let back: Jet<ExactComplex> = jet_from_json(&doc).unwrap();
        assert_eq!(back.table(), f.table());
        assert_eq!(back.basepoint(), f.basepoint());
    }

    #[test]
    fn provider_round_trip() {
        let base = Provider::exponential(vec![Complex64::new(0.3, 0.1)], vec![Complex64::new(-0.2, 0.5)]);
        let provider = Provider::Combination(vec![
            (Complex64::new(1.0, 0.0), Provider::Conjugate(Box::new(base.clone()))),
            (
                Complex64::new(0.0, 2.0),
                Provider::TaylorRemainder {
                    inner: Box::new(Provider::PowerSeries1d(SeriesRule::QuarticRootFactorial)),
                    n: 2,
                    m: 0,
                },
            ),
        ]);
        let f = Jet::<Complex64>::from_provider(1, vec![Complex64::new(0.0, 0.0)], 0.5, provider).unwrap();
        let doc = jet_to_json(&f).unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let back: Jet<Complex64> = jet_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(serde_json::to_string(&jet_to_json(&back).unwrap()).unwrap(), text);
        for k in 0..5 {
            let (i, j) = (mi(&[k]), mi(&[4 - k]));
            assert_eq!(back.coeff(&i, &j), f.coeff(&i, &j));
        }
    }

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_real::<f64>("3/4").unwrap(), 0.75);
        assert_eq!(parse_real::<BigRational>("-6/8").unwrap(), BigRational::from_ratio(-3, 4));
        assert_eq!(parse_real::<BigRational>("0.5").unwrap(), BigRational::from_ratio(1, 2));
        assert!(parse_real::<f64>("1/0").is_err());
        assert!(parse_real::<f64>("abc").is_err());
    }

    #[test]
    fn table_csv_layout() {
        let f = Jet::<Complex64>::from_monomials(1, vec![Complex64::new(0.0, 0.0)], 0.5, [(mi(&[0]), mi(&[1]), Complex64::new(1.0, 0.0))]).unwrap();
        let rows = table(&f, 0, 1, &[0.5], &Cutoffs::default()).unwrap();
        let text = table_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("m,l,R,S,hbar,value,status,terms_used,last_term"));
        assert_eq!(lines.next(), Some("0,0,0,0,5.0000000000000000e-1,1.0000000000000000e0,converged_exact,2,1.0000000000000000e0"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn empty_tables_have_a_header_only() {
        assert_eq!(table_csv(&[]).unwrap(), "m,l,R,S,hbar,value,status,terms_used,last_term\n");
        assert_eq!(expectation_csv(&[]).unwrap(), "re_w,im_w,re_val,im_val\n");
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "");
    }
}
