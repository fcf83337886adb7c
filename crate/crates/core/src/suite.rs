//! Built-in verification batteries: exact calibrations on small instances,
//! seeded property checks, and the T-quasi-linear operator predicates.
//!
//! Items run concurrently; each draws randomness from its own stream derived
//! from the seed and the item name, and the report lists items by name, so
//! the output depends only on `(suite, seed, precision)`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField, WittCoeff};
use crate::error::{bail, Error, Result};
use crate::herr::{
    apply_differential, basechange_compare, finite_koszul_cohomology, finite_koszul_oracle, herr_cohomology, phi_stable_lattice, solve_phi_minus_one,
    vec_axpy, Cochain, FiniteKoszulInput, HerrOptions, Koszul,
};
use crate::json::{elem_json, series_json};
use crate::lubin_tate::{norm_parameter_certificates, LubinTate, PhiKind};
use crate::obstruction::{lift_torsor, obstruction, ExtensionKind};
use crate::phigamma::{Base, PhiGammaModule, RandomSpec};
use crate::ring::Elem;
use crate::series::{Series, Substitution, EXACT};
use crate::tquasi::{certify_gamma, certify_tquasi, equivalence_suite, is_topologically_nilpotent, power_formula_check, Nilpotence, QuasiOperator};

pub const SUITES: [&str; 3] = ["calibration", "properties", "appendix"];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteItem {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
    /// Data sufficient to re-check a failure.
    pub witness: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: &'static str,
    pub suite: String,
    pub seed: u64,
    pub precision: i64,
    pub items: Vec<SuiteItem>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Shared parameters of one suite run.
#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub precision: i64,
    /// Flip one sign in `d¹`, to confirm the battery notices.
    pub corrupt_differential: bool,
}

impl SuiteOptions {
    fn rng(&self, item: &str) -> ChaCha8Rng {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in item.bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }

    fn koszul(&self, n_ops: usize) -> Koszul {
        if self.corrupt_differential {
            Koszul::mutated(n_ops)
        } else {
            Koszul::new(n_ops)
        }
    }
}

struct Outcome {
    pass: bool,
    detail: Value,
    witness: Option<Value>,
}

fn verdict(pass: bool, detail: Value, witness: Option<Value>) -> Result<Outcome> {
    Ok(Outcome { pass, detail, witness: if pass { None } else { witness } })
}

type Check = fn(&SuiteOptions) -> Result<Outcome>;

fn items(suite: &str) -> Option<Vec<(&'static str, Check)>> {
    let v: Vec<(&'static str, Check)> = match suite {
        "calibration" => vec![
            ("fg.multiplicative", fg_multiplicative),
            ("fg.standard_laws", fg_standard_laws),
            ("tk.norm_parameter", tk_norm_parameter),
            ("herr.two_generator_matrices", herr_two_generator_matrices),
            ("herr.trivial_f3", herr_trivial_f3),
            ("herr.unramified_f3", herr_unramified_f3),
            ("lifts.trivial_f3", lifts_trivial_f3),
        ],
        "properties" => vec![
            ("endo.ring_laws", endo_ring_laws),
            ("herr.d_squared", herr_d_squared),
            ("herr.mutation_detected", herr_mutation_detected),
            ("herr.base_change", herr_base_change),
            ("lattice.contraction", lattice_contraction),
            ("norm.exhaustive", norm_exhaustive),
            ("obstruction.cocycle", obstruction_cocycle),
            ("oracle.koszul", oracle_koszul),
        ],
        "appendix" => vec![
            ("tquasi.gamma_powers", tquasi_gamma_powers),
            ("tquasi.power_formula", tquasi_power_formula),
            ("tquasi.equivalence", tquasi_equivalence),
            ("tquasi.identity_refuted", tquasi_identity_refuted),
        ],
        _ => return None,
    };
    Some(v)
}

fn finish(name: &str, r: std::thread::Result<Result<Outcome>>) -> SuiteItem {
    let (pass, detail, witness) = match r {
        Ok(Ok(o)) => (o.pass, o.detail, o.witness),
        Ok(Err(e)) => (false, json!({ "error": e.to_string() }), None),
        Err(_) => (false, json!({ "error": "item panicked" }), None),
    };
    SuiteItem { name: name.to_string(), pass, detail, witness }
}

/// Item names of a built-in suite, in report order.
pub fn suite_items(suite: &str) -> Result<Vec<&'static str>> {
    let Some(list) = items(suite) else { bail!(Input, "unknown suite {suite:?} (expected one of {})", SUITES.join(", ")) };
    let mut names: Vec<_> = list.into_iter().map(|(n, _)| n).collect();
    names.sort_unstable();
    Ok(names)
}

/// Runs one item of a built-in suite, with the same randomness it gets
/// inside a full run.
pub fn run_item(suite: &str, item: &str, opts: &SuiteOptions) -> Result<SuiteItem> {
    let Some(list) = items(suite) else { bail!(Input, "unknown suite {suite:?} (expected one of {})", SUITES.join(", ")) };
    let Some(&(name, f)) = list.iter().find(|(n, _)| *n == item) else { bail!(Input, "suite {suite} has no item {item:?}") };
    Ok(finish(name, std::panic::catch_unwind(|| f(opts))))
}

/// Runs every item of a built-in suite.
pub fn run_suite(suite: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    let Some(list) = items(suite) else { bail!(Input, "unknown suite {suite:?} (expected one of {})", SUITES.join(", ")) };
    let results: BTreeMap<&str, std::thread::Result<Result<Outcome>>> = std::thread::scope(|s| {
        let handles: Vec<_> = list.iter().map(|&(name, f)| (name, s.spawn(move || f(opts)))).collect();
        handles.into_iter().map(|(name, h)| (name, h.join())).collect()
    });
    let items: Vec<SuiteItem> = results.into_iter().map(|(name, r)| finish(name, r)).collect();
    let passed = items.iter().filter(|i| i.pass).count();
    Ok(SuiteReport {
        schema: crate::json::SCHEMA,
        suite: suite.to_string(),
        seed: opts.seed,
        precision: opts.precision,
        failed: items.len() - passed,
        passed,
        items,
    })
}

fn field(f: u32) -> Result<Arc<LocalField>> {
    LocalField::new(FieldSpec { p: 3, f, e: 1, eisenstein: vec![-3, 1], precision: 8 })
}

fn base(f: u32, a: u32, prec: i64) -> Result<Arc<Base>> {
    Base::new(CoeffAlgebra::new(field(f)?, CoeffSpec::Quotient { a, degree: 1 })?, 1, PhiKind::Std, prec)
}

fn random_module(f: u32, a: u32, spec: &RandomSpec, seed: u64, prec: i64) -> Result<PhiGammaModule> {
    PhiGammaModule::random(base(f, a, prec)?, spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn fg_multiplicative(_: &SuiteOptions) -> Result<Outcome> {
    let lt = LubinTate::new(field(1)?, PhiKind::Mult, 21, 4)?;
    let f = lt.formal_group()?;
    let red = lt.reduction(lt.certified)?;
    let r = red.dst.clone();
    let terms = f.map(&red).terms(&r);
    let expect: BTreeMap<_, _> = [((1, 0), r.one()), ((0, 1), r.one()), ((1, 1), r.one())].into_iter().collect();
    let extra: Vec<Value> = terms
        .iter()
        .filter(|(k, c)| expect.get(k) != Some(*c))
        .map(|((i, j), c)| json!([i, j, elem_json(&r, c)]))
        .chain(expect.keys().filter(|k| !terms.contains_key(k)).map(|(i, j)| json!([i, j, 0])))
        .collect();
    let detail = json!({ "phi": "(1+T)^3-1", "degree": 20, "digits": lt.certified, "terms": crate::json::bivariate_json(&f.map(&red), &r) });
    verdict(extra.is_empty(), detail, Some(json!({ "mismatched_terms": extra })))
}

fn fg_standard_laws(_: &SuiteOptions) -> Result<Outcome> {
    let lt = LubinTate::new(field(1)?, PhiKind::Std, 21, 4)?;
    let f = lt.formal_group()?;
    let rep = lt.check_formal_group(&f)?;
    let detail = json!({ "phi": "3T+T^3", "report": crate::json::to_value(&rep) });
    verdict(rep.holds(), detail.clone(), Some(detail))
}

fn tk_norm_parameter(o: &SuiteOptions) -> Result<Outcome> {
    let n = o.precision;
    let lt = LubinTate::new(field(1)?, PhiKind::Mult, n as usize, 4)?;
    let red = lt.reduction(lt.certified)?;
    let r = red.dst.clone();
    let tk = lt.norm_parameter()?.map_coeffs(&red)?;
    let expect = Series::from_ints(r.clone(), 2, &[-1]).mul(&Series::from_ints(r.clone(), 0, &[1, 1]).truncate(n).invert()?)?;
    let diff = tk.first_difference(&expect);
    let phi = Substitution::new(lt.phi.map_coeffs(&red)?, n)?;
    let four = lt.endomorphism(&lt.ring.from_int(4))?.series.map_coeffs(&red)?;
    let gamma = Substitution::new(four, n)?;
    let certs = norm_parameter_certificates(&tk, &[&phi, &gamma])?;
    let integral: Vec<bool> = certs.iter().map(|c| c.val() >= 0).collect();
    let pass = diff.is_none() && integral.iter().all(|&b| b) && tk.val() == 2;
    let detail = json!({
        "t_k": series_json(&tk),
        "valuation": tk.val(),
        "phi_certificate": series_json(&certs[0]),
        "gamma_certificate": series_json(&certs[1]),
        "gamma_character": 4,
        "certificates_integral": integral,
        "digits": lt.certified,
    });
    verdict(pass, detail, Some(json!({ "first_difference_from_expected": diff })))
}

fn herr_two_generator_matrices(_: &SuiteOptions) -> Result<Outcome> {
    let kz = Koszul::new(3);
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let expect = [
        vec![s(&["φ−1"]), s(&["γ1−1"]), s(&["γ2−1"])],
        vec![s(&["−(γ1−1)", "φ−1", "0"]), s(&["−(γ2−1)", "0", "φ−1"]), s(&["0", "−(γ2−1)", "γ1−1"])],
        vec![s(&["γ2−1", "−(γ1−1)", "φ−1"])],
    ];
    let got: Vec<_> = (0..3).map(|r| kz.symbolic(r)).collect();
    let bad: Vec<usize> = (0..3).filter(|&r| got[r] != expect[r]).collect();
    verdict(bad.is_empty(), json!({ "d0": got[0], "d1": got[1], "d2": got[2] }), Some(json!({ "differing_degrees": bad })))
}

fn trivial_family(prec: i64) -> Result<PhiGammaModule> {
    PhiGammaModule::trivial(base(1, 1, prec)?, 1)
}

fn lengths(rep: &crate::herr::HerrReport) -> Vec<Option<u64>> {
    rep.degrees.iter().map(|d| d.length).collect()
}

fn herr_trivial_f3(o: &SuiteOptions) -> Result<Outcome> {
    let rep = herr_cohomology(&trivial_family, o.precision, &HerrOptions::default())?;
    let lens = lengths(&rep);
    let stable = rep.stability.as_ref().is_some_and(|s| s.agrees);
    let pass = lens == [Some(1), Some(2), Some(0)] && stable;
    let detail = json!({ "lengths": lens, "stability": crate::json::to_value(&rep.stability), "expected": [1, 2, 0] });
    verdict(pass, detail.clone(), Some(detail))
}

fn herr_unramified_f3(o: &SuiteOptions) -> Result<Outcome> {
    let fam = |prec: i64| -> Result<PhiGammaModule> {
        let b = base(1, 1, prec)?;
        let two = b.coeff.ring.from_int(2);
        PhiGammaModule::unramified(b, &two)
    };
    let rep = herr_cohomology(&fam, o.precision, &HerrOptions::default())?;
    let lens = lengths(&rep);
    let stable = rep.stability.as_ref().is_some_and(|s| s.agrees);
    let pass = lens[0] == Some(0) && stable;
    let detail = json!({ "a": 2, "lengths": lens, "stability": crate::json::to_value(&rep.stability) });
    verdict(pass, detail.clone(), Some(detail))
}

fn lifts_trivial_f3(o: &SuiteOptions) -> Result<Outcome> {
    let rep = lift_torsor(&trivial_family, 1, o.precision, true)?;
    let lifts_ok = rep.lifts.iter().all(|l| l.failures.is_empty() && l.round_trip && l.gauge_check && l.continuity_level.is_some());
    let stable = rep.stability.as_ref().is_some_and(|s| s.agrees);
    let pass = rep.count == Some(9) && lifts_ok && stable;
    let detail = json!({
        "count": rep.count,
        "log_size": rep.log_size,
        "explicit_lifts": rep.lifts.len(),
        "lifts_commute": lifts_ok,
        "stable": stable,
    });
    verdict(pass, detail.clone(), Some(detail))
}

fn endo_ring_laws(o: &SuiteOptions) -> Result<Outcome> {
    let mut rng = o.rng("endo.ring_laws");
    let mut checked = 0;
    for kind in [PhiKind::Mult, PhiKind::Std] {
        let lt = LubinTate::new(field(1)?, kind, o.precision as usize, 4)?;
        let red = lt.reduction(lt.certified)?;
        let f = lt.formal_group()?;
        let modulus = 3i64.pow(lt.c);
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(0..modulus), rng.gen_range(0..modulus));
            let r = &lt.ring;
            let (a, b) = (r.from_int(x), r.from_int(y));
            let ea = lt.endomorphism(&a)?.series.clone();
            let eb = lt.endomorphism(&b)?.series.clone();
            let sum = lt.endomorphism(&r.add(&a, &b))?.series.clone();
            let prod = lt.endomorphism(&r.mul(&a, &b))?.series.clone();
            let fsum = lt.group_sum(&f, &ea, &eb)?;
            let comp = lt.compose(&ea, &eb)?;
            for (law, lhs, rhs) in [("sum", &sum, &fsum), ("product", &prod, &comp)] {
                let (l, rr) = (lhs.map_coeffs(&red)?, rhs.map_coeffs(&red)?);
                if let Some(k) = l.first_difference(&rr) {
                    let w = json!({ "phi": format!("{kind:?}"), "law": law, "a": x, "b": y, "exponent": k });
                    return verdict(false, json!({ "checked": checked }), Some(w));
                }
                if l.prec() < o.precision {
                    bail!(Precision, "{law} law verified only to T^{}", l.prec());
                }
            }
            checked += 1;
        }
    }
    verdict(true, json!({ "pairs": checked, "precision": o.precision }), None)
}

fn random_cochain(m: &PhiGammaModule, comps: usize, rng: &mut impl Rng) -> Cochain {
    let ring = m.ring().clone();
    let coords = |rng: &mut dyn rand::RngCore| -> Vec<i64> { ring.exps().iter().map(|&e| rng.gen_range(0..ring.p().pow(e)) as i64).collect() };
    (0..comps)
        .map(|_| {
            (0..m.d)
                .map(|_| {
                    let cs: Vec<Elem> = (0..4).map(|_| ring.from_coords(&coords(rng))).collect();
                    Series::new(ring.clone(), -1, cs, m.base.prec)
                })
                .collect()
        })
        .collect()
}

/// `d^{r+1}∘d^r` on random cochains of every degree; the first nonzero
/// entry found, as `(module, degree, component, coordinate, exponent)`.
fn d_squared(o: &SuiteOptions, kz_of: impl Fn(usize) -> Koszul, rng: &mut ChaCha8Rng) -> Result<(usize, Option<Value>)> {
    let mut checked = 0;
    for i in 0..10 {
        let f = 1 + (i % 2) as u32;
        let spec = RandomSpec { rank: 1 + (i / 2) % 2, max_twist: 1, ..Default::default() };
        let a = 1 + (i / 4) as u32 % 2;
        let m = random_module(f, a, &spec, rng.gen(), o.precision)?;
        let n_ops = m.base.n() + 1;
        let kz = kz_of(n_ops);
        for r in 0..n_ops - 1 {
            let x = random_cochain(&m, kz.rank(r), rng);
            let dd = apply_differential(&m, &kz, r + 1, &apply_differential(&m, &kz, r, &x)?)?;
            for (c, v) in dd.iter().enumerate() {
                for (k, s) in v.iter().enumerate() {
                    if !s.is_zero() {
                        let w = json!({
                            "module": i, "f": f, "a": a, "rank": m.d, "degree": r,
                            "component": c, "coordinate": k, "exponent": s.val(),
                            "cochain": crate::json::cochain_json(&x),
                        });
                        return Ok((checked, Some(w)));
                    }
                }
            }
            checked += 1;
        }
    }
    Ok((checked, None))
}

fn herr_d_squared(o: &SuiteOptions) -> Result<Outcome> {
    let mut rng = o.rng("herr.d_squared");
    let (checked, fail) = d_squared(o, |n| o.koszul(n), &mut rng)?;
    verdict(fail.is_none(), json!({ "modules": 10, "compositions_checked": checked, "precision": o.precision }), fail)
}

fn herr_mutation_detected(o: &SuiteOptions) -> Result<Outcome> {
    let mut rng = o.rng("herr.mutation_detected");
    let (_, fail) = d_squared(o, Koszul::mutated, &mut rng)?;
    let pass = fail.is_some();
    verdict(pass, json!({ "mutation": "sign of the φ → (φ, γ1) component of d¹", "caught_by": fail }), None)
}

fn herr_base_change(o: &SuiteOptions) -> Result<Outcome> {
    let mut rng = o.rng("herr.base_change");
    let mut rows = Vec::new();
    let mut bad = None;
    for i in 0..5 {
        let seed: u64 = rng.gen();
        let spec = RandomSpec { rank: 1, max_twist: 1, ..Default::default() };
        let spec2 = spec.clone();
        let src = move |p: i64| random_module(1, 2, &spec, seed, p);
        let tgt = move |p: i64| random_module(1, 2, &spec2, seed, p)?.base_change(&base(1, 1, p)?);
        for r in [0, 2] {
            let rep = basechange_compare(&src, &tgt, r, o.precision, true)?;
            if !rep.isomorphic && bad.is_none() {
                bad = Some(json!({ "module": i, "seed": seed, "report": crate::json::to_value(&rep) }));
            }
            rows.push(json!({ "module": i, "degree": r, "tensored": rep.tensored, "target": rep.target }));
        }
    }
    verdict(bad.is_none(), json!({ "from": "Z/9", "to": "Z/3", "comparisons": rows }), bad)
}

fn lattice_contraction(o: &SuiteOptions) -> Result<Outcome> {
    let mut rng = o.rng("lattice.contraction");
    let mut rows = Vec::new();
    for i in 0..10 {
        let a = 1 + (i % 2) as u32;
        let spec = RandomSpec { rank: 1 + (i / 2) % 2, max_twist: 1 + (i / 4) as i64 % 2, ..Default::default() };
        let m = random_module(1, a, &spec, rng.gen(), o.precision)?;
        let lat = phi_stable_lattice(&m)?;
        let ring = m.ring().clone();
        let t_e = Series::monomial(ring.clone(), ring.one(), lat.exponent, EXACT);
        let mut min_val = i64::MAX;
        for j in 0..m.d {
            let mut e = vec![Series::zero(ring.clone(), EXACT); m.d];
            e[j] = t_e.clone();
            for s in m.apply_phi(&e)? {
                min_val = min_val.min(s.val());
            }
        }
        let contracts = min_val >= lat.exponent + lat.contraction;
        let y: Vec<Series> = (0..m.d)
            .map(|_| {
                let cs: Vec<Elem> = (0..5).map(|_| ring.from_int(rng.gen_range(0..9))).collect();
                Series::new(ring.clone(), lat.exponent, cs, o.precision)
            })
            .collect();
        let x = solve_phi_minus_one(&m, &lat, &y)?;
        let mut res = m.apply_phi(&x)?;
        vec_axpy(&mut res, -1, &x)?;
        vec_axpy(&mut res, -1, &y)?;
        let residual = res.iter().find(|s| !s.is_zero()).map(|s| s.val());
        let res_prec = res.iter().map(|s| s.prec()).min().unwrap_or(EXACT);
        let row = json!({
            "module": i, "a": a, "rank": m.d, "lattice": crate::json::to_value(&lat),
            "phi_valuation": min_val, "contracts": contracts, "residual": residual, "residual_precision": res_prec,
        });
        if !contracts || residual.is_some() {
            return verdict(false, json!({ "checked": i }), Some(row));
        }
        rows.push(row);
    }
    verdict(true, json!({ "modules": rows }), None)
}

/// Surjectivity of the norm onto `A^×`, fibres, multiplicativity, and the
/// kernel against `{φ(y)/y}`, by enumeration.
fn norm_case(w: &WittCoeff) -> Result<(Value, Option<Value>)> {
    let r = &w.ring;
    let ar = w.a_ring();
    let units = r.units();
    let mut image = BTreeSet::new();
    let mut kernel = BTreeSet::new();
    let mut norms = BTreeMap::new();
    for x in &units {
        let mut n = *x;
        let mut y = *x;
        for _ in 1..w.r {
            y = w.frob.apply(&y);
            n = r.mul(&n, &y);
        }
        let na = w.norm(x)?;
        if w.incl.apply(&na) != n {
            return Ok((json!({}), Some(json!({ "norm_mismatch": elem_json(r, x) }))));
        }
        if na == ar.one() {
            kernel.insert(*x);
        }
        image.insert(na);
        norms.insert(*x, na);
    }
    let a_units: BTreeSet<Elem> = ar.units().into_iter().collect();
    if image != a_units {
        let missing: Vec<Value> = a_units.difference(&image).map(|a| elem_json(ar, a)).collect();
        return Ok((json!({}), Some(json!({ "not_in_image": missing }))));
    }
    let coboundaries: BTreeSet<Elem> = units.iter().map(|y| Ok(r.mul(&w.frob.apply(y), &r.inv(y)?))).collect::<Result<_>>()?;
    if kernel != coboundaries {
        let diff: Vec<Value> = kernel.symmetric_difference(&coboundaries).map(|x| elem_json(r, x)).collect();
        return Ok((json!({}), Some(json!({ "kernel_differs_at": diff }))));
    }
    if w.norm_kernel()? != coboundaries {
        return Ok((json!({}), Some(json!({ "library_kernel_differs": true }))));
    }
    for a in &a_units {
        let x = w.norm_fibre(a)?;
        if norms.get(&x) != Some(a) {
            return Ok((json!({}), Some(json!({ "bad_fibre_over": elem_json(ar, a) }))));
        }
    }
    for x in &units {
        for y in &units {
            if norms[&r.mul(x, y)] != ar.mul(&norms[x], &norms[y]) {
                return Ok((json!({}), Some(json!({ "not_multiplicative": [elem_json(r, x), elem_json(r, y)] }))));
            }
        }
    }
    let detail = json!({ "units": units.len(), "a_units": a_units.len(), "kernel": kernel.len() });
    Ok((detail, None))
}

fn norm_exhaustive(_: &SuiteOptions) -> Result<Outcome> {
    let f3 = CoeffAlgebra::new(field(1)?, CoeffSpec::FiniteField { degree: 1 })?;
    let z9 = CoeffAlgebra::new(field(1)?, CoeffSpec::Quotient { a: 2, degree: 1 })?;
    let mut detail = serde_json::Map::new();
    for (label, c) in [("F9/F3", f3), ("W2(F9)/Z9", z9)] {
        let (d, fail) = norm_case(&*WittCoeff::new(c, 2)?)?;
        if let Some(w) = fail {
            return verdict(false, json!({ "case": label }), Some(w));
        }
        detail.insert(label.to_string(), d);
    }
    verdict(true, Value::Object(detail), None)
}

fn obstruction_cocycle(o: &SuiteOptions) -> Result<Outcome> {
    let mut rng = o.rng("obstruction.cocycle");
    let mut rows = Vec::new();
    for i in 0..10 {
        let f = 1 + (i % 2) as u32;
        let kind = if i % 4 < 2 { ExtensionKind::Truncation } else { ExtensionKind::Split { rank: 1 } };
        let spec = RandomSpec { rank: 1 + (i / 4) % 2, max_twist: 1, ..Default::default() };
        // Two γ generators are slower; their windows are kept smaller.
        let prec = if f == 2 { o.precision.min(24) } else { o.precision };
        let m = random_module(f, 1, &spec, rng.gen(), prec)?;
        let rep = obstruction(&m, &kind, 2, &mut rng)?;
        let row = json!({
            "module": i, "f": f, "rank": m.d, "extension": crate::json::to_value(&kind),
            "cocycle_failure": rep.cocycle_failure, "cocycle_vacuous": rep.cocycle_vacuous,
            "lift_changes_checked": rep.lift_changes_checked, "vanishes": rep.vanishes,
        });
        if rep.cocycle_failure.is_some() || rep.lift_changes_checked != 2 {
            return verdict(false, json!({ "checked": i }), Some(json!({ "row": row, "defect": crate::json::cochain_json(&rep.defect) })));
        }
        rows.push(row);
    }
    verdict(true, json!({ "pairs": rows }), None)
}

/// Commuting operators: random polynomials in one random matrix.
fn random_finite_input(rng: &mut impl Rng) -> FiniteKoszulInput {
    let p = [2u64, 3][rng.gen_range(0..2)];
    let n = rng.gen_range(1..=2usize);
    let e = if p == 2 { rng.gen_range(1..=2u32) } else { 1 };
    let modulus = p.pow(e) as i64;
    let base: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..modulus)).collect()).collect();
    let mul = |x: &Vec<Vec<i64>>, y: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum::<i64>().rem_euclid(modulus)).collect()).collect()
    };
    let n_ops = rng.gen_range(1..=3usize);
    let ops = (0..n_ops)
        .map(|_| {
            let c: Vec<i64> = (0..3).map(|_| rng.gen_range(0..modulus)).collect();
            let sq = mul(&base, &base);
            (0..n).map(|i| (0..n).map(|j| (c[0] * (i == j) as i64 + c[1] * base[i][j] + c[2] * sq[i][j]).rem_euclid(modulus)).collect()).collect()
        })
        .collect::<Vec<Vec<Vec<i64>>>>();
    // operators[k][i] is the image of basis vector i: the i-th column.
    let operators = ops.iter().map(|m| (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect()).collect();
    FiniteKoszulInput { p, exps: vec![e; n], operators }
}

fn oracle_koszul(o: &SuiteOptions) -> Result<Outcome> {
    let mut rng = o.rng("oracle.koszul");
    let mut rows = Vec::new();
    for i in 0..20 {
        let input = random_finite_input(&mut rng);
        let oracle = finite_koszul_oracle(&input)?;
        let machinery = finite_koszul_cohomology(&input, &o.koszul(input.operators.len()))?;
        if oracle != machinery {
            let w = json!({ "instance": i, "input": crate::json::to_value(&input), "oracle": oracle, "machinery": machinery });
            return verdict(false, json!({ "checked": i }), Some(w));
        }
        rows.push(json!({ "p": input.p, "exps": input.exps, "operators": input.operators.len(), "log_sizes": oracle }));
    }
    verdict(true, json!({ "instances": rows }), None)
}

/// Trivial and random modules over `Q_3` with `A = Z/3, Z/9`.
fn sample_modules(prec: i64) -> Result<Vec<PhiGammaModule>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = vec![PhiGammaModule::trivial(base(1, 1, prec)?, 1)?, PhiGammaModule::trivial(base(1, 2, prec)?, 2)?];
    for (a, rank) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        out.push(PhiGammaModule::random(base(1, a, prec)?, &RandomSpec { rank, max_twist: 1, ..Default::default() }, &mut rng)?);
    }
    Ok(out)
}

fn tquasi_prec(o: &SuiteOptions) -> i64 {
    o.precision.min(30)
}

fn tquasi_gamma_powers(o: &SuiteOptions) -> Result<Outcome> {
    let mut rows = Vec::new();
    for (i, m) in sample_modules(tquasi_prec(o))?.iter().enumerate() {
        for k in 1..=3 {
            let (_, v) = certify_gamma(m, None, 0, k)?;
            let Some(w) = v.witness() else {
                return verdict(false, json!({}), Some(json!({ "module": i, "power": k, "verdict": crate::json::verdict_json(&v) })));
            };
            let (_, act) = m.gamma_power(0, k)?;
            let expect_b = act.image().sub(&Series::t(m.base.ring.clone()))?.shift(-1);
            if !w.b.agrees(&expect_b) {
                return verdict(
                    false,
                    json!({}),
                    Some(json!({ "module": i, "power": k, "b": series_json(&w.b), "expected_b": series_json(&expect_b) })),
                );
            }
            rows.push(json!({ "module": i, "power": k, "a": series_json(&w.a), "b_valuation": w.b.val() }));
        }
    }
    verdict(true, json!({ "certified": rows }), None)
}

fn tquasi_power_formula(o: &SuiteOptions) -> Result<Outcome> {
    let ns: Vec<i64> = (-3..=3).collect();
    let mut count = 0;
    for (i, m) in sample_modules(tquasi_prec(o))?.iter().enumerate() {
        let (op, v) = certify_gamma(m, None, 0, 1)?;
        let Some(w) = v.witness() else { bail!(Refuted, "γ − 1 not certified on sample {i}") };
        for e in power_formula_check(&op, w, &m.base.uniformizer, &ns)? {
            if !(e.verified && e.in_ideal) {
                return verdict(false, json!({}), Some(json!({ "module": i, "entry": crate::json::power_formula_json(&[e]) })));
            }
            count += 1;
        }
    }
    verdict(true, json!({ "exponents": ns, "entries_verified": count }), None)
}

fn tquasi_equivalence(o: &SuiteOptions) -> Result<Outcome> {
    let mut rows = Vec::new();
    for (i, m) in sample_modules(tquasi_prec(o))?.iter().enumerate().skip(1) {
        let rep = equivalence_suite(m, None, 0, 2, 6)?;
        let ok = rep.consistent
            && rep.congruence_holds
            && rep.level.is_some()
            && rep.nilpotence_from_level == Some(true)
            && matches!(rep.nilpotence, Nilpotence::Nilpotent { .. })
            && rep.level_for_target.is_some();
        let row = json!({ "module": i, "report": crate::json::to_value(&rep) });
        if !ok {
            return verdict(false, json!({}), Some(row));
        }
        rows.push(row);
    }
    verdict(true, json!({ "modules": rows }), None)
}

fn tquasi_identity_refuted(o: &SuiteOptions) -> Result<Outcome> {
    let prec = tquasi_prec(o);
    let m = PhiGammaModule::trivial(base(1, 1, prec)?, 1)?;
    let pi = m.base.uniformizer;
    let id = QuasiOperator::identity(&m);
    let v = certify_tquasi(&id, &pi, prec)?;
    let Some(w) = v.witness() else { return Err(Error::Refuted("identity not certified as T-quasi-linear".into())) };
    let nil = is_topologically_nilpotent(&id, w, &pi, 1, 24, None)?;
    let pass = matches!(nil, Nilpotence::Refuted { .. });
    verdict(pass, json!({ "witness": crate::json::witness_json(w), "nilpotence": crate::json::to_value(&nil) }), Some(json!({})))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_input_error() {
        let o = SuiteOptions { seed: 0, precision: 40, corrupt_differential: false };
        assert!(matches!(run_suite("nope", &o), Err(Error::Input(_))));
    }

    #[test]
    fn item_streams_differ() {
        let o = SuiteOptions { seed: 7, precision: 40, corrupt_differential: false };
        assert_ne!(o.rng("a").gen::<u64>(), o.rng("b").gen::<u64>());
    }
}
