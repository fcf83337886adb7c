//! JSON encodings of series, matrices, modules and reports.
//!
//! Every input file carries `"schema": "ltpg/1"`. Objects are
//! `serde_json::Value` maps, which keep their keys sorted, so the rendered
//! output is canonical.

use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use crate::error::{bail, Error, Result};
use crate::herr::{Cochain, DegreeReport, HerrReport, ModuleFamily};
use crate::lubin_tate::{Bivariate, PhiKind};
use crate::matrix::Mat;
use crate::obstruction::{LiftTorsorReport, ObstructionReport};
use crate::phigamma::{Base, PhiGammaModule, RandomSpec};
use crate::ring::{Elem, FiniteRing};
use crate::series::{Series, EXACT};
use crate::tquasi::{PowerFormulaEntry, TQuasiLinearWitness, TQuasiVerdict};

pub const SCHEMA: &str = "ltpg/1";

/// Pretty-printed, key-sorted rendering with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Parses `text`, checks the schema tag and deserializes the rest.
pub fn parse_tagged<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("{origin}: {e}")))?;
    let Some(obj) = v.as_object_mut() else { bail!(Input, "{origin}: expected a JSON object") };
    match obj.remove("schema") {
        Some(Value::String(s)) if s == SCHEMA => {}
        Some(other) => bail!(Input, "{origin}: unsupported schema {other}, expected {SCHEMA:?}"),
        None => bail!(Input, "{origin}: missing \"schema\": {SCHEMA:?}"),
    }
    serde_json::from_value(v).map_err(|e| Error::Input(format!("{origin}: {e}")))
}

pub fn read_tagged<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_tagged(&text, &path.display().to_string())
}

/// An integer for rank-one rings, otherwise the coordinate list.
pub fn elem_json(ring: &FiniteRing, x: &Elem) -> Value {
    let c = x.coords(ring.rank());
    if ring.rank() == 1 {
        json!(c[0])
    } else {
        json!(c)
    }
}

pub fn parse_elem(ring: &FiniteRing, v: &Value) -> Result<Elem> {
    match v {
        Value::Number(n) => {
            let Some(k) = n.as_i64() else { bail!(Input, "coefficient {n} is not an integer") };
            if ring.rank() == 1 {
                Ok(ring.from_coords(&[k]))
            } else {
                Ok(ring.from_int(k))
            }
        }
        Value::Array(cs) => {
            if cs.len() != ring.rank() {
                bail!(Input, "expected {} coordinates, got {}", ring.rank(), cs.len());
            }
            let c: Vec<i64> =
                cs.iter().map(|x| x.as_i64().ok_or_else(|| Error::Input(format!("coordinate {x} is not an integer")))).collect::<Result<_>>()?;
            Ok(ring.from_coords(&c))
        }
        _ => bail!(Input, "expected an integer or a coordinate list, got {v}"),
    }
}

fn prec_json(p: i64) -> Value {
    if p >= EXACT {
        json!("exact")
    } else {
        json!(p)
    }
}

/// `{"start", "coeffs", "prec"}` with coefficients from `start` on.
pub fn series_json(s: &Series) -> Value {
    let r = s.ring();
    if s.is_zero() {
        return json!({ "start": 0, "coeffs": [], "prec": prec_json(s.prec()) });
    }
    let coeffs: Vec<Value> = (s.val()..s.end()).map(|i| elem_json(r, &s.coeff(i))).collect();
    json!({ "start": s.val(), "coeffs": coeffs, "prec": prec_json(s.prec()) })
}

/// Accepts a bare integer (an exact constant) or the object form; a missing
/// `prec` means exact.
pub fn parse_series(ring: &Arc<FiniteRing>, v: &Value) -> Result<Series> {
    if v.is_number() || v.is_array() {
        return Ok(Series::constant(ring.clone(), parse_elem(ring, v)?, EXACT));
    }
    let Some(obj) = v.as_object() else { bail!(Input, "expected a series object, got {v}") };
    for k in obj.keys() {
        if !matches!(k.as_str(), "start" | "coeffs" | "prec") {
            bail!(Input, "unknown series field {k:?}");
        }
    }
    let start = match obj.get("start") {
        None => 0,
        Some(x) => x.as_i64().ok_or_else(|| Error::Input(format!("series start {x} is not an integer")))?,
    };
    let coeffs = match obj.get("coeffs") {
        None => vec![],
        Some(Value::Array(cs)) => cs.iter().map(|c| parse_elem(ring, c)).collect::<Result<_>>()?,
        Some(x) => bail!(Input, "series coeffs must be a list, got {x}"),
    };
    let prec = match obj.get("prec") {
        None => EXACT,
        Some(Value::String(s)) if s == "exact" => EXACT,
        Some(x) => x.as_i64().ok_or_else(|| Error::Input(format!("series prec {x} must be an integer or \"exact\"")))?,
    };
    Ok(Series::new(ring.clone(), start, coeffs, prec))
}

pub fn mat_json(m: &Mat) -> Value {
    Value::Array((0..m.rows).map(|i| Value::Array((0..m.cols).map(|j| series_json(m.get(i, j))).collect())).collect())
}

/// A `d×d` matrix as a list of rows; entries are truncated to `prec`.
pub fn parse_mat(ring: &Arc<FiniteRing>, v: &Value, d: usize, prec: i64) -> Result<Mat> {
    let Some(rows) = v.as_array() else { bail!(Input, "matrix must be a list of rows") };
    if rows.len() != d {
        bail!(Input, "matrix has {} rows, expected {d}", rows.len());
    }
    let mut e = Vec::with_capacity(d * d);
    for row in rows {
        let Some(row) = row.as_array() else { bail!(Input, "matrix row must be a list") };
        if row.len() != d {
            bail!(Input, "matrix row has {} entries, expected {d}", row.len());
        }
        for x in row {
            e.push(parse_series(ring, x)?.truncate(prec));
        }
    }
    Ok(Mat { rows: d, cols: d, e })
}

pub fn vector_json(v: &[Series]) -> Value {
    Value::Array(v.iter().map(series_json).collect())
}

pub fn cochain_json(c: &Cochain) -> Value {
    Value::Array(c.iter().map(|v| vector_json(v)).collect())
}

/// Nonzero coefficients `c_{ij}` of `X^i Y^j` as `[i, j, c]`, degree-lexicographic.
pub fn bivariate_json(f: &Bivariate, ring: &FiniteRing) -> Value {
    Value::Array(f.terms(ring).into_iter().map(|((i, j), c)| json!([i, j, elem_json(ring, &c)])).collect())
}

fn default_rank() -> usize {
    1
}
fn default_r() -> u32 {
    1
}
fn default_gauge() -> usize {
    2
}
fn yes() -> bool {
    true
}

/// Built-in module constructions.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construct {
    Trivial {
        #[serde(default = "default_rank")]
        rank: usize,
    },
    /// `ur_a` for a unit `a` of `A`.
    Unramified { a: Value },
    Random {
        seed: u64,
        #[serde(default = "default_rank")]
        rank: usize,
        #[serde(default)]
        max_twist: i64,
        #[serde(default = "default_gauge")]
        gauge_degree: usize,
        #[serde(default = "yes")]
        tame: bool,
    },
}

/// The contents of a module file: the base data and either explicit
/// structure matrices or a construction.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleInput {
    pub field: FieldSpec,
    pub coeff: CoeffSpec,
    /// Degree of `K/F`, which must be unramified.
    #[serde(default = "default_r")]
    pub r: u32,
    #[serde(default)]
    pub frobenius: PhiKind,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub phi: Option<Value>,
    #[serde(default)]
    pub gammas: Option<Vec<Value>>,
    #[serde(default)]
    pub deltas: Option<Vec<Value>>,
    #[serde(default)]
    pub construct: Option<Construct>,
}

impl ModuleInput {
    pub fn coeff_algebra(&self) -> Result<Arc<CoeffAlgebra>> {
        CoeffAlgebra::new(LocalField::new(self.field.clone())?, self.coeff.clone())
    }

    pub fn base(&self, prec: i64) -> Result<Arc<Base>> {
        Base::new(self.coeff_algebra()?, self.r, self.frobenius, prec)
    }

    /// The module over the base at working precision `prec`.
    pub fn build(&self, prec: i64) -> Result<PhiGammaModule> {
        self.build_over(self.base(prec)?)
    }

    pub fn build_over(&self, base: Arc<Base>) -> Result<PhiGammaModule> {
        let prec = base.prec;
        match (&self.construct, &self.phi) {
            (Some(_), Some(_)) => bail!(Input, "give either \"construct\" or explicit matrices, not both"),
            (None, None) => bail!(Input, "module needs \"phi\" and \"gammas\", or \"construct\""),
            (Some(c), None) => {
                if self.gammas.is_some() || self.deltas.is_some() {
                    bail!(Input, "\"gammas\" and \"deltas\" are only used with \"phi\"");
                }
                match c {
                    Construct::Trivial { rank } => PhiGammaModule::trivial(base, *rank),
                    Construct::Unramified { a } => {
                        let a = parse_elem(&base.coeff.ring, a)?;
                        PhiGammaModule::unramified(base, &a)
                    }
                    Construct::Random { seed, rank, max_twist, gauge_degree, tame } => {
                        let spec = RandomSpec { rank: *rank, max_twist: *max_twist, gauge_degree: *gauge_degree, tame: *tame };
                        PhiGammaModule::random(base, &spec, &mut ChaCha8Rng::seed_from_u64(*seed))
                    }
                }
            }
            (None, Some(phi)) => {
                let d = match (self.rank, phi.as_array()) {
                    (Some(d), _) => d,
                    (None, Some(rows)) => rows.len(),
                    (None, None) => bail!(Input, "\"phi\" must be a matrix"),
                };
                let ring = base.ring.clone();
                let phi = parse_mat(&ring, phi, d, prec)?;
                let Some(gs) = &self.gammas else { bail!(Input, "missing \"gammas\"") };
                let gammas = gs.iter().map(|g| parse_mat(&ring, g, d, prec)).collect::<Result<_>>()?;
                let deltas = match &self.deltas {
                    Some(ds) => Some(ds.iter().map(|g| parse_mat(&ring, g, d, prec)).collect::<Result<_>>()?),
                    None => None,
                };
                PhiGammaModule::new(base, phi, gammas, deltas)
            }
        }
    }
}

impl ModuleFamily for ModuleInput {
    fn at_precision(&self, prec: i64) -> Result<PhiGammaModule> {
        self.build(prec)
    }
}

/// `{"schema", "coeff"}`: a target coefficient algebra.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffInput {
    pub coeff: CoeffSpec,
}

/// `{"schema", "rank"}`: the free module `F = A^rank` of a split extension.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeInput {
    pub rank: u32,
}

pub fn module_json(m: &PhiGammaModule) -> Value {
    json!({
        "rank": m.d,
        "phi": mat_json(&m.phi),
        "gammas": m.gammas.iter().map(mat_json).collect::<Vec<_>>(),
        "deltas": m.deltas.iter().map(mat_json).collect::<Vec<_>>(),
    })
}

fn degree_json(ring: &FiniteRing, d: &DegreeReport, witnesses: bool) -> Value {
    let mut o = Map::new();
    o.insert("log_size".into(), json!(d.log_size));
    o.insert("length".into(), json!(d.length));
    o.insert("divisors".into(), json!(d.divisors));
    o.insert("windows".into(), json!([d.windows.0, d.windows.1]));
    if witnesses {
        let gens: Vec<Value> = d
            .generators
            .iter()
            .map(|g| {
                json!({
                    "cocycle": cochain_json(&g.cocycle),
                    "order": g.order,
                    "preimage": cochain_json(&g.preimage),
                    "coefficients": g.coefficients.iter().map(|c| elem_json(ring, c)).collect::<Vec<_>>(),
                })
            })
            .collect();
        o.insert("generators".into(), Value::Array(gens));
    }
    Value::Object(o)
}

/// Degrees keyed by their index, with the stability evidence alongside.
pub fn herr_json(rep: &HerrReport, ring: &FiniteRing, witnesses: bool) -> Value {
    let degrees: Map<String, Value> = rep.degrees.iter().map(|d| (d.degree.to_string(), degree_json(ring, d, witnesses))).collect();
    json!({
        "precision": rep.precision,
        "lattice": to_value(&rep.lattice),
        "fixed_point_bound": rep.fixed_point_bound,
        "delta_invariant": rep.delta_invariant,
        "degrees": degrees,
        "stability": to_value(&rep.stability),
        "stable": rep.stability.as_ref().map(|s| s.agrees),
    })
}

pub fn obstruction_json(rep: &ObstructionReport) -> Value {
    json!({
        "extension": to_value(&rep.extension),
        "precision": rep.precision,
        "defect": cochain_json(&rep.defect),
        "cocycle_failure": rep.cocycle_failure,
        "cocycle_vacuous": rep.cocycle_vacuous,
        "lift_changes_checked": rep.lift_changes_checked,
        "vanishes": rep.vanishes,
        "preimage": rep.preimage.as_ref().map(cochain_json),
        "repaired": rep.repaired.as_ref().map(module_json),
        "repaired_failures": to_value(&rep.repaired_failures),
    })
}

pub fn lifts_json(rep: &LiftTorsorReport) -> Value {
    let lifts: Vec<Value> = rep
        .lifts
        .iter()
        .map(|l| {
            json!({
                "cocycle": cochain_json(&l.cocycle),
                "order": l.order,
                "module": module_json(&l.module),
                "failures": to_value(&l.failures),
                "round_trip": l.round_trip,
                "continuity_level": l.continuity_level,
                "gauge_check": l.gauge_check,
            })
        })
        .collect();
    json!({
        "rank": rep.rank,
        "precision": rep.precision,
        "log_size": rep.log_size,
        "count": rep.count,
        "divisors": rep.divisors,
        "stability": to_value(&rep.stability),
        "lifts": lifts,
    })
}

pub fn witness_json(w: &TQuasiLinearWitness) -> Value {
    json!({
        "operator": w.operator,
        "a": series_json(&w.a),
        "b": series_json(&w.b),
        "samples": w.samples,
        "precision": w.precision,
    })
}

pub fn verdict_json(v: &TQuasiVerdict) -> Value {
    match v {
        TQuasiVerdict::Certified(w) => json!({ "verdict": "certified", "witness": witness_json(w) }),
        TQuasiVerdict::Refuted { reason, vector } => {
            json!({ "verdict": "refuted", "reason": reason, "vector": vector.as_ref().map(|v| vector_json(v)) })
        }
    }
}

pub fn power_formula_json(entries: &[PowerFormulaEntry]) -> Value {
    Value::Array(entries.iter().map(|e| json!({ "n": e.n, "b_n": series_json(&e.b_n), "in_ideal": e.in_ideal, "verified": e.verified })).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Arc<FiniteRing> {
        Arc::new(FiniteRing::new(3, vec![2], vec![vec![1]], vec![1], "Z/9").unwrap())
    }

    #[test]
    fn series_round_trip() {
        let r = f3();
        let s = Series::from_ints(r.clone(), -2, &[1, 0, 5, 8]).truncate(7);
        let v = series_json(&s);
        assert_eq!(v, json!({"start": -2, "coeffs": [1, 0, 5, 8], "prec": 7}));
        let t = parse_series(&r, &v).unwrap();
        assert!(t.agrees(&s) && t.prec() == 7);
        assert!(parse_series(&r, &json!(4)).unwrap().is_exact());
        assert!(parse_series(&r, &json!({"start": 0, "bogus": 1})).is_err());
    }

    #[test]
    fn schema_is_required() {
        let ok: FreeInput = parse_tagged(r#"{"schema": "ltpg/1", "rank": 2}"#, "x").unwrap();
        assert_eq!(ok.rank, 2);
        assert!(parse_tagged::<FreeInput>(r#"{"rank": 2}"#, "x").is_err());
        let e = parse_tagged::<FreeInput>("{\"schema\": \"ltpg/1\",\n \"rank\": }", "x").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn explicit_and_constructed_trivial_agree() {
        let text = r#"{"schema": "ltpg/1",
            "field": {"p": 3, "f": 1, "e": 1, "eisenstein": [-3, 1], "precision": 4},
            "coeff": {"kind": "quotient", "a": 1},
            "phi": [[1]], "gammas": [[[1]]]}"#;
        let m: ModuleInput = parse_tagged(text, "m").unwrap();
        let a = m.build(20).unwrap();
        let mut c = m.clone();
        c.phi = None;
        c.gammas = None;
        c.construct = Some(Construct::Trivial { rank: 1 });
        let b = c.build(20).unwrap();
        assert!(a.phi.agrees(&b.phi) && a.gammas[0].agrees(&b.gammas[0]));
    }
}
