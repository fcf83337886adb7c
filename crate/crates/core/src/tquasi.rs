//! `T`-quasi-linear endomorphisms `f(Tm) = a(T)·T·f(m) + b(T)·T·m` of étale
//! modules, their power formula, topological nilpotence, and the
//! continuity criteria for the action of a single `γ`.
//!
//! Operators have the shape `f(x) = Q·σ(x) + L·x` for a ring endomorphism
//! `σ` fixing the constants. All lattice statements are made in the
//! coordinates of a lattice basis, where the lattice becomes `𝐀⁺^d`.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{bail, Result};
use crate::matrix::Mat;
use crate::phigamma::{Action, PhiGammaModule};
use crate::ring::Elem;
use crate::series::{Series, EXACT};

#[derive(Clone)]
pub struct QuasiOperator {
    pub label: String,
    pub d: usize,
    pub semilinear: Option<(Mat, Action)>,
    pub linear: Mat,
}

fn lattice_basis(m: &PhiGammaModule, lattice: Option<&Mat>) -> Mat {
    lattice.cloned().unwrap_or_else(|| Mat::identity(&m.base.ring, m.d))
}

impl QuasiOperator {
    pub fn zero(m: &PhiGammaModule) -> Self {
        QuasiOperator { label: "0".into(), d: m.d, semilinear: None, linear: Mat::zero(&m.base.ring, m.d, m.d) }
    }

    pub fn identity(m: &PhiGammaModule) -> Self {
        QuasiOperator { label: "id".into(), d: m.d, semilinear: None, linear: Mat::identity(&m.base.ring, m.d) }
    }

    /// Multiplication by `T`.
    pub fn mul_t(m: &PhiGammaModule) -> Result<Self> {
        let t = Series::t(m.base.ring.clone());
        Ok(QuasiOperator { label: "T".into(), d: m.d, semilinear: None, linear: Mat::identity(&m.base.ring, m.d).scale(&t)? })
    }

    /// `γ_j^k − 1`.
    pub fn gamma_minus_one(m: &PhiGammaModule, j: usize, k: u64) -> Result<Self> {
        if j >= m.base.n() {
            bail!(Input, "generator γ{} does not exist (n = {})", j + 1, m.base.n());
        }
        let (g, act) = m.gamma_power(j, k)?;
        let neg = Mat::identity(&m.base.ring, m.d).map(|s| Ok(s.neg()))?;
        Ok(QuasiOperator { label: format!("γ{}^{k}−1", j + 1), d: m.d, semilinear: Some((g, act)), linear: neg })
    }

    /// The Frobenius, which is not `T`-quasi-linear.
    pub fn phi(m: &PhiGammaModule) -> Self {
        QuasiOperator { label: "φ".into(), d: m.d, semilinear: Some((m.phi.clone(), m.base.phi.clone())), linear: Mat::zero(&m.base.ring, m.d, m.d) }
    }

    /// The same operator in the coordinates of the lattice with basis `b`.
    pub fn in_lattice(&self, b: &Mat, prec: i64) -> Result<Self> {
        let binv = b.invert_to(prec)?;
        let semilinear = match &self.semilinear {
            Some((q, act)) => Some((binv.mul(q)?.mul(&act.apply_mat(b)?)?, act.clone())),
            None => None,
        };
        let linear = binv.mul(&self.linear)?.mul(b)?;
        Ok(QuasiOperator { label: self.label.clone(), d: self.d, semilinear, linear })
    }

    pub fn apply(&self, x: &[Series]) -> Result<Vec<Series>> {
        let mut out = self.linear.apply(x)?;
        if let Some((q, act)) = &self.semilinear {
            let y = q.apply(&act.apply_vec(x)?)?;
            out = out.iter().zip(&y).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        }
        Ok(out)
    }

    fn ring(&self) -> &std::sync::Arc<crate::ring::FiniteRing> {
        self.linear.ring()
    }
}

/// Certified constants `a`, `b` of a `T`-quasi-linear operator.
#[derive(Clone, Debug)]
pub struct TQuasiLinearWitness {
    pub operator: String,
    pub a: Series,
    pub b: Series,
    /// Number of vectors on which the identity was re-verified.
    pub samples: usize,
    pub precision: i64,
}

#[derive(Clone, Debug)]
pub enum TQuasiVerdict {
    Certified(TQuasiLinearWitness),
    Refuted { reason: String, vector: Option<Vec<Series>> },
}

impl TQuasiVerdict {
    pub fn witness(&self) -> Option<&TQuasiLinearWitness> {
        match self {
            TQuasiVerdict::Certified(w) => Some(w),
            TQuasiVerdict::Refuted { .. } => None,
        }
    }
}

fn is_unit_plus(s: &Series) -> bool {
    s.is_integral() && s.ring().is_unit(&s.coeff(0))
}

/// Membership in `(π, T)𝐀⁺`.
fn in_max_ideal(s: &Series, pi: &Elem) -> bool {
    if s.is_zero() {
        return true;
    }
    s.is_integral() && (s.val() > 0 || s.ring().divide(&s.coeff(0), pi).is_some())
}

/// `c` if the matrix equals `c·I`.
fn scalar_of(m: &Mat) -> Option<Series> {
    let c = m.get(0, 0).clone();
    for i in 0..m.rows {
        for j in 0..m.cols {
            let e = m.get(i, j);
            let ok = if i == j { e.agrees(&c) } else { e.is_zero() || e.val() >= e.prec() };
            if !ok {
                return None;
            }
        }
    }
    Some(c)
}

fn sample_vectors(ring: &std::sync::Arc<crate::ring::FiniteRing>, d: usize, prec: i64, extra: usize) -> Vec<Vec<Series>> {
    let mut out = Vec::new();
    for i in 0..d {
        for k in [0, 1] {
            let mut v = vec![Series::zero(ring.clone(), EXACT); d];
            v[i] = Series::monomial(ring.clone(), ring.one(), k, EXACT);
            out.push(v);
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7e5);
    for _ in 0..extra {
        out.push(
            (0..d)
                .map(|_| {
                    let coeffs: Vec<Elem> = (0..4)
                        .map(|_| {
                            let c: Vec<i64> = ring.exps().iter().map(|&e| rng.gen_range(0..ring.p().pow(e)) as i64).collect();
                            ring.from_coords(&c)
                        })
                        .collect();
                    Series::new(ring.clone(), 0, coeffs, prec)
                })
                .collect(),
        );
    }
    out
}

fn times(s: &Series, v: &[Series]) -> Result<Vec<Series>> {
    v.iter().map(|x| s.mul(x)).collect()
}

fn first_mismatch(lhs: &[Series], rhs: &[Series]) -> Option<i64> {
    lhs.iter().zip(rhs).filter_map(|(a, b)| a.first_difference(b)).min()
}

/// Extracts `a = σ(T)/T` and `b` with `(1 − a)·L = b·I`, checks `a ∈ 𝐀⁺^×`,
/// `b ∈ (π, T)𝐀⁺`, and re-verifies the defining identity on samples.
pub fn certify_tquasi(op: &QuasiOperator, pi: &Elem, prec: i64) -> Result<TQuasiVerdict> {
    let ring = op.ring().clone();
    let refute = |reason: String| Ok(TQuasiVerdict::Refuted { reason, vector: None });
    let one = Series::one(ring.clone(), EXACT);
    let a = match &op.semilinear {
        Some((_, act)) => {
            if act.coeff.is_some() {
                return refute(format!("{} does not fix the constants", op.label));
            }
            let s = act.image();
            if s.is_zero() || s.val() < 1 {
                return refute(format!("{}: σ(T) is not divisible by T", op.label));
            }
            s.shift(-1)
        }
        None => one.clone(),
    };
    if !is_unit_plus(&a) {
        return refute(format!("{}: a(T) = σ(T)/T is not a unit of 𝐀⁺", op.label));
    }
    let lhs = op.linear.scale(&one.sub(&a)?)?;
    let Some(b) = scalar_of(&lhs) else {
        return refute(format!("{}: (1 − a)·L is not scalar", op.label));
    };
    if !in_max_ideal(&b, pi) {
        return refute(format!("{}: b(T) is not in (π, T)𝐀⁺", op.label));
    }
    let t = Series::t(ring.clone());
    let samples = sample_vectors(&ring, op.d, prec, 3);
    for m in &samples {
        let tm = times(&t, m)?;
        let lhs = op.apply(&tm)?;
        let fm = op.apply(m)?;
        let at = a.mul(&t)?;
        let bt = b.mul(&t)?;
        let rhs: Vec<Series> = times(&at, &fm)?.iter().zip(times(&bt, m)?).map(|(x, y)| x.add(&y)).collect::<Result<_>>()?;
        if first_mismatch(&lhs, &rhs).is_some() {
            return Ok(TQuasiVerdict::Refuted { reason: format!("{}: identity fails on a sample", op.label), vector: Some(m.clone()) });
        }
    }
    Ok(TQuasiVerdict::Certified(TQuasiLinearWitness { operator: op.label.clone(), a, b, samples: samples.len(), precision: prec }))
}

#[derive(Clone, Debug)]
pub struct PowerFormulaEntry {
    pub n: i64,
    pub b_n: Series,
    pub in_ideal: bool,
    /// `f(T^n m) = a^n T^n f(m) + b_n T^n m` held on all samples.
    pub verified: bool,
}

/// For each `n`, `b_n` with `f(T^n m) = a^n·T^n·f(m) + b_n·T^n·m`, its
/// membership in `(π, T)𝐀⁺`, and a direct check on samples.
pub fn power_formula_check(op: &QuasiOperator, w: &TQuasiLinearWitness, pi: &Elem, ns: &[i64]) -> Result<Vec<PowerFormulaEntry>> {
    let ring = op.ring().clone();
    let prec = w.precision;
    let one = Series::one(ring.clone(), EXACT);
    let ainv = w.a.invert_to(prec)?;
    let mut out = Vec::new();
    for &n in ns {
        let an = if n >= 0 { w.a.pow(n as u64) } else { ainv.pow(n.unsigned_abs()) };
        let b_n = match scalar_of(&op.linear.scale(&one.sub(&an)?)?) {
            Some(b) => b,
            None => bail!(Refuted, "{}: (1 − a^{n})·L is not scalar", op.label),
        };
        let tn = Series::monomial(ring.clone(), ring.one(), n, EXACT);
        let mut verified = true;
        for m in sample_vectors(&ring, op.d, prec, 2) {
            let lhs = op.apply(&times(&tn, &m)?)?;
            let fm = op.apply(&m)?;
            let rhs: Vec<Series> =
                times(&an.mul(&tn)?, &fm)?.iter().zip(times(&b_n.mul(&tn)?, &m)?).map(|(x, y)| x.add(&y)).collect::<Result<_>>()?;
            if first_mismatch(&lhs, &rhs).is_some() {
                verified = false;
            }
        }
        out.push(PowerFormulaEntry { n, in_ideal: in_max_ideal(&b_n, pi), b_n, verified });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Nilpotence {
    /// `f^n(𝔐) ⊆ (π, T)𝔐`, and `f^{n3}(𝔐) ⊆ T^m𝔐` when requested.
    Nilpotent {
        n: u32,
        target: i64,
        n_target: Option<u32>,
    },
    /// `f` acts on `𝔐/(π, T)𝔐` and its `bound`-th power is nonzero there,
    /// so no power of `f` maps `𝔐` into `(π, T)𝔐`.
    Refuted {
        bound: u32,
        basis_vector: usize,
    },
    Inconclusive {
        reason: String,
    },
}

fn in_lattice_ideal(v: &[Series], pi: &Elem) -> bool {
    v.iter().all(|s| in_max_ideal(s, pi))
}

fn in_t_power(v: &[Series], m: i64) -> Result<bool> {
    for s in v {
        if s.prec() < m {
            bail!(Precision, "vector known only modulo T^{} while testing T^{m}", s.prec());
        }
        if !s.is_zero() && s.val() < m {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `log_p |R/πR|`.
fn residue_log_size(ring: &crate::ring::FiniteRing, pi: &Elem) -> u64 {
    let amb = ring.ambient();
    let gens: Vec<Vec<u64>> = (0..ring.rank()).map(|i| ring.mul(pi, &ring.basis(i)).coords(ring.rank()).to_vec()).collect();
    amb.log_order() - amb.log_size(&gens)
}

/// Decides whether a certified `f` (in lattice coordinates, preserving the
/// lattice) is topologically nilpotent, and for `target = m` finds `n3` with
/// `f^{n3}(𝔐) ⊆ T^m𝔐`.
pub fn is_topologically_nilpotent(
    op: &QuasiOperator,
    w: &TQuasiLinearWitness,
    pi: &Elem,
    a: u32,
    bound: u32,
    target: Option<i64>,
) -> Result<Nilpotence> {
    let ring = op.ring().clone();
    let d = op.d;
    if !w.a.is_integral() || !w.b.is_integral() {
        return Ok(Nilpotence::Inconclusive { reason: "a or b is not integral".into() });
    }
    let basis = |k: i64, i: usize| {
        let mut v = vec![Series::zero(ring.clone(), EXACT); d];
        v[i] = Series::monomial(ring.clone(), ring.one(), k, EXACT);
        v
    };
    let mut iter: Vec<Vec<Series>> = (0..d).map(|i| op.apply(&basis(0, i))).collect::<Result<_>>()?;
    if iter.iter().any(|v| v.iter().any(|s| !s.is_integral())) {
        return Ok(Nilpotence::Inconclusive { reason: format!("{} does not preserve the lattice", op.label) });
    }
    // f preserves 𝔐 and (π,T)𝔐, so it acts on the finite module 𝔐/(π,T)𝔐
    // of length at most d·log_p|R/πR|, where a nilpotent map dies by then
    let exact_bound = (d as u64 * residue_log_size(&ring, pi)).max(1) as u32;
    let mut found = None;
    for n in 1..=bound.max(1) {
        if n > 1 {
            iter = iter.iter().map(|v| op.apply(v)).collect::<Result<_>>()?;
        }
        if iter.iter().all(|v| in_lattice_ideal(v, pi)) {
            found = Some(n);
            break;
        }
        if n >= exact_bound {
            let i = iter.iter().position(|v| !in_lattice_ideal(v, pi)).unwrap();
            return Ok(Nilpotence::Refuted { bound: exact_bound, basis_vector: i });
        }
    }
    let Some(n) = found else {
        return Ok(Nilpotence::Inconclusive { reason: format!("no n ≤ {bound} with f^n(𝔐) ⊆ (π,T)𝔐") });
    };
    let Some(m) = target else { return Ok(Nilpotence::Nilpotent { n, target: 0, n_target: None }) };
    // f preserves T^m𝔐, so f^N(𝔐) ⊆ T^m𝔐 is decided on T^k e_i, k < m
    let mut vecs: Vec<Vec<Series>> = (0..m.max(0)).flat_map(|k| (0..d).map(move |i| (k, i))).map(|(k, i)| basis(k, i)).collect();
    let cap = 2 * n * (a + m.max(0) as u32);
    for big_n in 1..=cap {
        vecs = vecs.iter().map(|v| op.apply(v)).collect::<Result<_>>()?;
        let mut ok = true;
        for v in &vecs {
            ok &= in_t_power(v, m)?;
        }
        if ok {
            return Ok(Nilpotence::Nilpotent { n, target: m, n_target: Some(big_n) });
        }
    }
    Ok(Nilpotence::Inconclusive { reason: format!("f^N(𝔐) ⊄ T^{m}𝔐 for N ≤ {cap}") })
}

/// Witnesses for the continuity criteria of one generator `γ`:
/// (4) `(γ^{p^s} − 1)𝔐 ⊆ T𝔐`, (5) `γ − 1` topologically nilpotent,
/// (3) `(γ^{p^s} − 1)𝔐 ⊆ T^n𝔐`.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub generator: usize,
    /// (4): least `s` found.
    pub level: Option<u32>,
    /// `(γ − 1)^{p^s} ≡ γ^{p^s} − 1 mod p` on every sample, for this `s`.
    pub congruence_exponent: u32,
    pub congruence_samples: usize,
    pub congruence_holds: bool,
    /// (4) ⇒ (5): `(γ − 1)^{p^s}𝔐 ⊆ (π, T)𝔐` re-verified.
    pub nilpotence_from_level: Option<bool>,
    /// (5) from the direct search.
    pub nilpotence: Nilpotence,
    /// (5) ⇒ (3): least `s` with `(γ^{p^s} − 1)𝔐 ⊆ T^n𝔐`.
    pub target: i64,
    pub level_for_target: Option<u32>,
    /// Criteria (4) and (5) agree.
    pub consistent: bool,
}

fn gamma_minus_one_in(m: &PhiGammaModule, lattice: &Mat, j: usize, k: u64) -> Result<QuasiOperator> {
    QuasiOperator::gamma_minus_one(m, j, k)?.in_lattice(lattice, m.base.prec)
}

/// `(γ − 1)^{p^s}(v) − (γ^{p^s} − 1)(v)` has all coefficients in `pR`.
fn binomial_congruence(m: &PhiGammaModule, j: usize, s: u32, samples: &[Vec<Series>]) -> Result<bool> {
    let ring = &m.base.ring;
    let p = m.base.field.p();
    let k = p.pow(s);
    let f = QuasiOperator::gamma_minus_one(m, j, 1)?;
    let g = QuasiOperator::gamma_minus_one(m, j, k)?;
    let pe = ring.from_int(p as i64);
    for v in samples {
        let mut x = v.clone();
        for _ in 0..k {
            x = f.apply(&x)?;
        }
        let y = g.apply(v)?;
        for (a, b) in x.iter().zip(&y) {
            let diff = a.sub(b)?;
            if !diff.is_zero() && (diff.val()..diff.end()).any(|i| ring.divide(&diff.coeff(i), &pe).is_none()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn equivalence_suite(m: &PhiGammaModule, lattice: Option<&Mat>, j: usize, target: i64, s_max: u32) -> Result<EquivalenceReport> {
    let bm = lattice_basis(m, lattice);
    let prec = m.base.prec;
    let pi = m.base.uniformizer;
    let p = m.base.field.p();
    let level = m.continuity_level(Some(&bm), 1, s_max)?.per_generator[j];
    let s = level.unwrap_or(0).max(1);
    let samples = sample_vectors(&m.base.ring, m.d, prec, 3);
    let congruence_holds = binomial_congruence(m, j, s, &samples)?;
    let f = gamma_minus_one_in(m, &bm, j, 1)?;
    let w = match certify_tquasi(&f, &pi, prec)? {
        TQuasiVerdict::Certified(w) => w,
        TQuasiVerdict::Refuted { reason, .. } => bail!(Refuted, "γ − 1 is not T-quasi-linear: {reason}"),
    };
    let nilpotence_from_level = match level {
        Some(s) => {
            let k = p.pow(s);
            let mut ok = true;
            for i in 0..m.d {
                let mut v = vec![Series::zero(m.base.ring.clone(), EXACT); m.d];
                v[i] = Series::one(m.base.ring.clone(), EXACT);
                for _ in 0..k {
                    v = f.apply(&v)?;
                }
                ok &= in_lattice_ideal(&v, &pi);
            }
            Some(ok)
        }
        None => None,
    };
    let bound = m.base.a() * m.base.q() as u32 * 8;
    let nilpotence = is_topologically_nilpotent(&f, &w, &pi, m.base.a(), bound, Some(target))?;
    let level_for_target = m.continuity_level(Some(&bm), target, s_max)?.per_generator[j];
    let consistent = match &nilpotence {
        Nilpotence::Nilpotent { .. } => level.is_some(),
        Nilpotence::Refuted { .. } => level.is_none(),
        Nilpotence::Inconclusive { .. } => true,
    };
    Ok(EquivalenceReport {
        generator: j,
        level,
        congruence_exponent: s,
        congruence_samples: samples.len(),
        congruence_holds,
        nilpotence_from_level,
        nilpotence,
        target,
        level_for_target,
        consistent,
    })
}

/// Certifies `γ_j^k − 1` in lattice coordinates.
pub fn certify_gamma(m: &PhiGammaModule, lattice: Option<&Mat>, j: usize, k: u64) -> Result<(QuasiOperator, TQuasiVerdict)> {
    let bm = lattice_basis(m, lattice);
    let f = gamma_minus_one_in(m, &bm, j, k)?;
    let v = certify_tquasi(&f, &m.base.uniformizer, m.base.prec)?;
    Ok((f, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
    use crate::lubin_tate::PhiKind;
    use crate::phigamma::{Base, RandomSpec};
    use std::sync::Arc;

    fn base(a: u32, prec: i64) -> Arc<Base> {
        let field = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 4 }).unwrap();
        let coeff = CoeffAlgebra::new(field, CoeffSpec::Quotient { a, degree: 1 }).unwrap();
        Base::new(coeff, 1, PhiKind::Std, prec).unwrap()
    }

    fn modules() -> Vec<PhiGammaModule> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut out = vec![PhiGammaModule::trivial(base(1, 30), 1).unwrap(), PhiGammaModule::trivial(base(2, 30), 2).unwrap()];
        for (a, rank) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            out.push(PhiGammaModule::random(base(a, 30), &RandomSpec { rank, max_twist: 1, ..Default::default() }, &mut rng).unwrap());
        }
        out
    }

    #[test]
    fn simple_operators() {
        let m = PhiGammaModule::trivial(base(2, 20), 2).unwrap();
        let pi = m.base.uniformizer;
        for op in [QuasiOperator::zero(&m), QuasiOperator::mul_t(&m).unwrap(), QuasiOperator::identity(&m)] {
            let w = certify_tquasi(&op, &pi, 20).unwrap();
            let w = w.witness().expect("certified");
            assert!(w.a.agrees(&Series::one(m.base.ring.clone(), EXACT)));
            assert!(w.b.is_zero());
        }
        let phi = certify_tquasi(&QuasiOperator::phi(&m), &pi, 20).unwrap();
        assert!(phi.witness().is_none());
    }

    #[test]
    fn gamma_powers_are_quasi_linear() {
        for m in modules() {
            for k in 1..=3 {
                let (op, v) = certify_gamma(&m, None, 0, k).unwrap();
                let w = v.witness().unwrap_or_else(|| panic!("{v:?}"));
                let (_, act) = m.gamma_power(0, k).unwrap();
                let t = Series::t(m.base.ring.clone());
                let expect_b = act.image().sub(&t).unwrap().shift(-1);
                assert!(w.b.agrees(&expect_b));
                let rows = power_formula_check(&op, w, &m.base.uniformizer, &[-3, -2, -1, 0, 1, 2, 3]).unwrap();
                for r in &rows {
                    assert!(r.verified && r.in_ideal, "n = {}", r.n);
                }
                assert!(rows[3].b_n.is_zero() || rows[3].b_n.val() >= rows[3].b_n.prec());
                assert!(rows[4].b_n.agrees(&w.b));
            }
        }
    }

    #[test]
    fn identity_is_not_nilpotent_and_gamma_minus_one_is() {
        let m = PhiGammaModule::trivial(base(1, 30), 1).unwrap();
        let pi = m.base.uniformizer;
        let id = QuasiOperator::identity(&m);
        let w = certify_tquasi(&id, &pi, 30).unwrap().witness().unwrap().clone();
        assert!(matches!(is_topologically_nilpotent(&id, &w, &pi, 1, 24, None).unwrap(), Nilpotence::Refuted { .. }));
        let zero = QuasiOperator::zero(&m);
        let w0 = certify_tquasi(&zero, &pi, 30).unwrap().witness().unwrap().clone();
        assert!(matches!(is_topologically_nilpotent(&zero, &w0, &pi, 1, 24, None).unwrap(), Nilpotence::Nilpotent { n: 1, .. }));
        let (g, v) = certify_gamma(&m, None, 0, 1).unwrap();
        let r = is_topologically_nilpotent(&g, v.witness().unwrap(), &pi, 1, 24, Some(2)).unwrap();
        assert!(matches!(r, Nilpotence::Nilpotent { n_target: Some(_), .. }), "{r:?}");
    }

    #[test]
    fn continuity_criteria_agree() {
        for m in modules() {
            let rep = equivalence_suite(&m, None, 0, 2, 6).unwrap();
            assert!(rep.consistent, "{rep:?}");
            assert!(rep.congruence_holds);
            assert!(rep.level.is_some());
            assert_eq!(rep.nilpotence_from_level, Some(true));
            assert!(rep.level_for_target.is_some());
        }
    }
}
