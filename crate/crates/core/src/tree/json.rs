//! JSON form of an ancestral process:
//! `{"beta":..,"theta":..,"e_g":..,"e_d":..,"atoms":[{"u":..,"zeta":..},..]}`.
//!
//! Numbers carry 17 significant digits; an infinite boundary is written as
//! `null`. Atoms are sorted by `u`.

use serde_json::Value;

use crate::distributions::BranchingParams;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::tree::{AncestralProcess, Atom};

fn number(x: f64) -> String {
    if x.is_infinite() && x > 0.0 {
        "null".into()
    } else {
        g17(x)
    }
}

pub fn to_json(params: &BranchingParams, ap: &AncestralProcess) -> String {
    let mut out = format!(
        "{{\"beta\":{},\"theta\":{},\"e_g\":{},\"e_d\":{},\"atoms\":[",
        number(params.beta()),
        number(params.theta()),
        number(ap.e_g()),
        number(ap.e_d())
    );
    for (i, a) in ap.atoms().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{{\"u\":{},\"zeta\":{}}}", number(a.u), number(a.zeta)));
    }
    out.push_str("]}");
    out
}

fn field(obj: &Value, key: &str) -> Result<f64> {
    match obj.get(key) {
        Some(Value::Null) => Ok(f64::INFINITY),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("field `{key}` is not a number"))),
        None => Err(Error::Parse(format!("missing field `{key}`"))),
    }
}

pub fn from_json(text: &str) -> Result<(BranchingParams, AncestralProcess)> {
    let value: Value = serde_json::from_str(text)?;
    let params = BranchingParams::new(field(&value, "beta")?, field(&value, "theta")?)?;
    let atoms = value
        .get("atoms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing array `atoms`".into()))?
        .iter()
        .map(|a| Ok(Atom::new(field(a, "u")?, field(a, "zeta")?)))
        .collect::<Result<Vec<_>>>()?;
    let ap = AncestralProcess::from_sorted(atoms, field(&value, "e_g")?, field(&value, "e_d")?)?;
    Ok((params, ap))
}
