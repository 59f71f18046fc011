use std::io::Write;

use serde_json::{json, Map, Value};

use super::RiskRow;
use crate::error::Result;

/// CSV header of risk tables.
pub const CSV_HEADER: &str = "scenario,estimator,p,n,kappa,lambda,reps,failures,risk,mc_se,seed";

/// C-style `%.6g`.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_g6).unwrap_or_default()
}

pub fn write_csv<W: Write>(mut w: W, rows: &[RiskRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.estimator,
            r.p,
            r.n,
            opt(r.kappa),
            opt(r.lambda),
            r.reps,
            r.failures,
            fmt_g6(r.risk),
            fmt_g6(r.mc_se),
            r.seed
        )?;
    }
    Ok(())
}

/// A float rounded through its 6-significant-digit rendering, so CSV and JSON agree.
fn g6_value(x: f64) -> Value {
    fmt_g6(x).parse::<f64>().ok().and_then(|v| serde_json::Number::from_f64(v).map(Value::Number)).unwrap_or(Value::Null)
}

pub fn rows_to_json(rows: &[RiskRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("scenario".into(), json!(r.scenario));
                m.insert("estimator".into(), json!(r.estimator));
                m.insert("p".into(), json!(r.p));
                m.insert("n".into(), json!(r.n));
                m.insert("kappa".into(), r.kappa.map(g6_value).unwrap_or(Value::Null));
                m.insert("lambda".into(), r.lambda.map(g6_value).unwrap_or(Value::Null));
                m.insert("reps".into(), json!(r.reps));
                m.insert("failures".into(), json!(r.failures));
                m.insert("risk".into(), g6_value(r.risk));
                m.insert("mc_se".into(), g6_value(r.mc_se));
                m.insert("seed".into(), json!(r.seed));
                Value::Object(m)
            })
            .collect(),
    )
}

pub fn write_json<W: Write>(mut w: W, rows: &[RiskRow]) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &rows_to_json(rows))?;
    writeln!(w)?;
    Ok(())
}
