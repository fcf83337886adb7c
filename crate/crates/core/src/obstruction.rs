//! Lifting étale modules along square-zero extensions `A' → A` with kernel `I`.
//!
//! A lift is chosen coordinatewise; the failure of its matrices to commute
//! is a 2-cocycle in the complex of `ad(M) ⊗ I`, whose class decides whether
//! some lift commutes. Lifts along `A ⊕ F → A` form a torsor under
//! `H¹(ad(M) ⊗ F)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffAlgebra, CoeffSpec};
use crate::error::{bail, Result};
use crate::herr::{
    apply_differential, coboundary_preimage, herr_cohomology, phi_stable_lattice, solve_phi_minus_one, vec_axpy, Cochain, HerrOptions, Koszul,
    ModuleFamily, StabilityEvidence,
};
use crate::matrix::Mat;
use crate::phigamma::{Action, Base, PhiGammaModule, RelationFailure};
use crate::ring::{Elem, RingMap};
use crate::series::Series;
use crate::zmod::GroupMap;

/// Which square-zero extension of `A` to use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtensionKind {
    /// `O_E/π^{a+1} → O_E/π^a`, with kernel `π^a O_E/π^{a+1} ≅ O_E/π`.
    Truncation,
    /// `A ⊕ A^rank → A`, with kernel `F = A^rank`.
    Split { rank: u32 },
}

/// A square-zero extension `R' → R` of Witt-coefficient rings, with the
/// kernel identified with `copies` copies of `R_I`.
pub struct SquareZero {
    pub kind: ExtensionKind,
    pub small: Arc<Base>,
    pub big: Arc<Base>,
    /// Base whose coefficient ring is the `R`-module structure of the kernel.
    pub kernel: Arc<Base>,
    pub copies: usize,
    reduce: RingMap,
    lift_index: Vec<usize>,
    /// `embed_index[s][b]`: basis of `R'` carrying basis `b` of copy `s`.
    embed_index: Vec<Vec<usize>>,
    /// Truncation only: multiplication by `π^a` on `R'`, and `R' → R_I`.
    pi_a: Option<(GroupMap, Elem, RingMap)>,
}

fn find_preimages(map: &RingMap) -> Result<Vec<usize>> {
    (0..map.dst.rank())
        .map(|b| {
            let target = map.dst.basis(b);
            (0..map.src.rank())
                .find(|&i| map.apply(&map.src.basis(i)) == target)
                .ok_or_else(|| crate::error::Error::Mismatch(format!("basis element {b} has no coordinate preimage")))
        })
        .collect()
}

impl SquareZero {
    pub fn new(small: Arc<Base>, kind: ExtensionKind) -> Result<Self> {
        let field = small.field.clone();
        let (r, phik, prec) = (small.witt.r, small.kind, small.prec);
        match kind.clone() {
            ExtensionKind::Truncation => {
                let degree = match small.coeff.spec {
                    CoeffSpec::Quotient { degree, .. } | CoeffSpec::FiniteField { degree } => degree,
                    _ => bail!(Unsupported, "truncation lifts need A = O_E/π^a"),
                };
                let a = small.a();
                let big = Base::new(CoeffAlgebra::new(field.clone(), CoeffSpec::Quotient { a: a + 1, degree })?, r, phik, prec)?;
                let kernel = Base::new(CoeffAlgebra::new(field, CoeffSpec::Quotient { a: 1, degree })?, r, phik, prec)?;
                let reduce = big.coefficient_map(&small)?;
                let to_kernel = big.coefficient_map(&kernel)?;
                let lift_index = find_preimages(&reduce)?;
                let embed_index = vec![find_preimages(&to_kernel)?];
                let ring = &big.ring;
                let pia = ring.pow(&big.uniformizer, a as u64);
                let amb = ring.ambient();
                let images = (0..ring.rank()).map(|i| ring.mul(&pia, &ring.basis(i)).coords(ring.rank()).to_vec()).collect();
                let gm = GroupMap::new(amb.clone(), amb, images);
                let ext = SquareZero { kind, small, big, kernel, copies: 1, reduce, lift_index, embed_index, pi_a: Some((gm, pia, to_kernel)) };
                ext.verify()?;
                Ok(ext)
            }
            ExtensionKind::Split { rank } => {
                let spec = CoeffSpec::SquareZero { base: Box::new(small.coeff.spec.clone()), rank };
                let big = Base::new(CoeffAlgebra::new(field, spec)?, r, phik, prec)?;
                let (k, kb) = (small.coeff.ring.rank(), big.coeff.ring.rank());
                let image = |u: usize, s: usize, i: usize| big.ring.basis(u * kb + s * k + i);
                let images = (0..big.ring.rank())
                    .map(|idx| {
                        let (u, rest) = (idx / kb, idx % kb);
                        if rest < k {
                            small.ring.basis(u * k + rest)
                        } else {
                            Elem::ZERO
                        }
                    })
                    .collect();
                let reduce = RingMap::new(big.ring.clone(), small.ring.clone(), images)?;
                reduce.verify_homomorphism()?;
                let lift_index = find_preimages(&reduce)?;
                let embed_index: Vec<Vec<usize>> = (1..=rank as usize)
                    .map(|s| {
                        (0..small.ring.rank())
                            .map(|b| {
                                let e = image(b / k, s, b % k);
                                (0..big.ring.rank()).find(|&i| big.ring.basis(i) == e).unwrap()
                            })
                            .collect()
                    })
                    .collect();
                let ext = SquareZero { kind, kernel: small.clone(), small, big, copies: rank as usize, reduce, lift_index, embed_index, pi_a: None };
                ext.verify()?;
                Ok(ext)
            }
        }
    }

    /// Checks `I² = 0`, `I ⊆ ker(R' → R)` and that the kernel coordinates
    /// invert the embedding.
    pub fn verify(&self) -> Result<()> {
        let (big, kr) = (&self.big.ring, &self.kernel.ring);
        let mut gens = Vec::new();
        for s in 0..self.copies {
            for b in 0..kr.rank() {
                let mut ys = vec![Elem::ZERO; self.copies];
                ys[s] = kr.basis(b);
                let x = self.embed(&ys);
                if !self.small.ring.is_zero(&self.reduce.apply(&x)) {
                    bail!(Refuted, "kernel element does not reduce to zero");
                }
                if self.kernel_coords(&x)? != ys {
                    bail!(Refuted, "kernel coordinates do not invert the embedding");
                }
                gens.push(x);
            }
        }
        for x in &gens {
            for y in &gens {
                if !big.is_zero(&big.mul(x, y)) {
                    bail!(Refuted, "kernel does not square to zero");
                }
            }
        }
        Ok(())
    }

    /// Coordinatewise set-theoretic section `R → R'`.
    pub fn section(&self, x: &Elem) -> Elem {
        let mut y = Elem::ZERO;
        for (b, &i) in self.lift_index.iter().enumerate() {
            y.0[i] = x.0[b];
        }
        y
    }

    pub fn reduce(&self, x: &Elem) -> Elem {
        self.reduce.apply(x)
    }

    /// `R_I^{copies} → I ⊆ R'`.
    pub fn embed(&self, ys: &[Elem]) -> Elem {
        let big = &self.big.ring;
        let mut out = Elem::ZERO;
        for (s, y) in ys.iter().enumerate() {
            let mut z = Elem::ZERO;
            for (b, &i) in self.embed_index[s].iter().enumerate() {
                z.0[i] = y.0[b];
            }
            if let Some((_, pia, _)) = &self.pi_a {
                z = big.mul(pia, &z);
            }
            out = big.add(&out, &z);
        }
        out
    }

    /// Inverse of [`SquareZero::embed`] on `I`.
    pub fn kernel_coords(&self, x: &Elem) -> Result<Vec<Elem>> {
        let big = &self.big.ring;
        match &self.pi_a {
            Some((gm, _, to_kernel)) => {
                let Some(y) = gm.solve(x.coords(big.rank())) else { bail!(Input, "element is not in the kernel π^a·A'") };
                let y = Elem::from_slice(&y);
                Ok(vec![to_kernel.apply(&y)])
            }
            None => {
                if !self.small.ring.is_zero(&self.reduce.apply(x)) {
                    bail!(Input, "element is not in the kernel of A ⊕ F → A");
                }
                Ok(self
                    .embed_index
                    .iter()
                    .map(|idx| {
                        let mut y = Elem::ZERO;
                        for (b, &i) in idx.iter().enumerate() {
                            y.0[b] = x.0[i];
                        }
                        y
                    })
                    .collect())
            }
        }
    }

    fn map_series(&self, s: &Series, ring: &Arc<crate::ring::FiniteRing>, mut f: impl FnMut(&Elem) -> Elem) -> Series {
        if s.is_zero() {
            return Series::zero(ring.clone(), s.prec());
        }
        let coeffs = (s.val()..s.end()).map(|i| f(&s.coeff(i))).collect();
        Series::new(ring.clone(), s.val(), coeffs, s.prec())
    }

    pub fn section_series(&self, s: &Series) -> Series {
        self.map_series(s, &self.big.ring, |c| self.section(c))
    }

    pub fn reduce_series(&self, s: &Series) -> Series {
        self.map_series(s, &self.small.ring, |c| self.reduce(c))
    }

    fn embed_series(&self, parts: &[Series]) -> Result<Series> {
        let mut acc = Series::zero(self.big.ring.clone(), crate::series::EXACT);
        for (s, part) in parts.iter().enumerate() {
            let mut ys = vec![Elem::ZERO; self.copies];
            let t = self.map_series(part, &self.big.ring, |c| {
                ys[s] = *c;
                self.embed(&ys)
            });
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }

    fn kernel_series(&self, s: &Series) -> Result<Vec<Series>> {
        let kr = &self.kernel.ring;
        let mut parts: Vec<Vec<Elem>> = vec![Vec::new(); self.copies];
        let start = if s.is_zero() { 0 } else { s.val() };
        let end = if s.is_zero() { 0 } else { s.end() };
        for i in start..end {
            for (p, y) in parts.iter_mut().zip(self.kernel_coords(&s.coeff(i))?) {
                p.push(y);
            }
        }
        Ok(parts
            .into_iter()
            .map(|c| if c.is_empty() { Series::zero(kr.clone(), s.prec()) } else { Series::new(kr.clone(), start, c, s.prec()) })
            .collect())
    }

    /// The module `M ⊗_R R_I` whose adjoint receives the defect.
    pub fn kernel_module(&self, m: &PhiGammaModule) -> Result<PhiGammaModule> {
        match self.kind {
            ExtensionKind::Truncation => m.base_change(&self.kernel),
            ExtensionKind::Split { .. } => Ok(m.clone()),
        }
    }

    /// `ad(M_I)^{⊕copies}`, the complex the defect lives in. Cochain vectors
    /// are indexed by `s·d² + col·d + row`.
    pub fn coefficient_module(&self, m: &PhiGammaModule) -> Result<PhiGammaModule> {
        self.kernel_module(m)?.adjoint()?.direct_power(self.copies)
    }

    /// Coordinatewise lift of every structure matrix; certified invertible
    /// and reducing back to `M`.
    pub fn choose_lifts(&self, m: &PhiGammaModule) -> Result<PhiGammaModule> {
        if !Arc::ptr_eq(&m.base, &self.small) && *m.base.ring != *self.small.ring {
            bail!(Mismatch, "module is not over the base of the extension");
        }
        let lift = m.map_all(self.big.clone(), m.d, |x| x.map(|s| Ok(self.section_series(s))))?;
        let lift = PhiGammaModule::new(lift.base, lift.phi, lift.gammas, Some(lift.deltas))?;
        let back = lift.map_all(self.small.clone(), m.d, |x| x.map(|s| Ok(self.reduce_series(s))))?;
        let same = back.phi.agrees(&m.phi) && back.gammas.iter().zip(&m.gammas).all(|(a, b)| a.agrees(b));
        if !same {
            bail!(Refuted, "chosen lift does not reduce to the module");
        }
        Ok(lift)
    }

    /// `I`-valued matrix with entries given by a vectorized cochain component.
    fn embed_matrix(&self, d: usize, v: &[Series]) -> Result<Mat> {
        let mut out = Mat::zero(&self.big.ring, d, d);
        for col in 0..d {
            for row in 0..d {
                let parts: Vec<Series> = (0..self.copies).map(|s| v[s * d * d + col * d + row].clone()).collect();
                out.set(row, col, self.embed_series(&parts)?);
            }
        }
        Ok(out)
    }

    fn vectorize(&self, z: &Mat) -> Result<Vec<Series>> {
        let d = z.rows;
        let mut out = vec![Series::zero(self.kernel.ring.clone(), crate::series::EXACT); self.copies * d * d];
        for col in 0..d {
            for row in 0..d {
                for (s, part) in self.kernel_series(z.get(row, col))?.into_iter().enumerate() {
                    out[s * d * d + col * d + row] = part;
                }
            }
        }
        Ok(out)
    }

    /// Replaces each `P̃_k` by `(1 + X_k)·P̃_k` for a 1-cochain `X`.
    pub fn change_lift(&self, lift: &PhiGammaModule, x: &[Vec<Series>]) -> Result<PhiGammaModule> {
        let d = lift.d;
        let n = lift.gammas.len();
        if x.len() != n + 1 {
            bail!(Input, "a 1-cochain needs {} components", n + 1);
        }
        let one = Mat::identity(&self.big.ring, d);
        let twist = |k: usize, p: &Mat| -> Result<Mat> { one.add(&self.embed_matrix(d, &x[k])?)?.mul(p) };
        let phi = twist(0, &lift.phi)?;
        let gammas = lift.gammas.iter().enumerate().map(|(j, g)| twist(j + 1, g)).collect::<Result<_>>()?;
        Ok(PhiGammaModule { base: lift.base.clone(), d, phi, gammas, deltas: lift.deltas.clone() })
    }

    /// `Z_{ij} = M_{ij}·M_{ji}^{-1} − 1` with `M_{ij} = P̃_i·σ_i(P̃_j)`, for
    /// pairs `i < j` of operators `φ, γ_1, …` in the order of 2-cochains.
    pub fn defect(&self, lift: &PhiGammaModule) -> Result<Cochain> {
        let b = &lift.base;
        let n = b.n();
        let kz = Koszul::new(n + 1);
        let ops: Vec<(&Mat, &Action)> = std::iter::once((&lift.phi, &b.phi)).chain(lift.gammas.iter().zip(&b.gammas)).collect();
        let one = Mat::identity(&self.big.ring, lift.d);
        kz.subsets(2)
            .into_iter()
            .map(|mask| {
                let i = mask.trailing_zeros() as usize;
                let j = (mask & !(1 << i)).trailing_zeros() as usize;
                let mij = ops[i].0.mul(&ops[i].1.apply_mat(ops[j].0)?)?;
                let mji = ops[j].0.mul(&ops[j].1.apply_mat(ops[i].0)?)?;
                let z = mij.mul(&mji.invert_to(b.prec)?)?.sub(&one)?;
                self.vectorize(&z)
            })
            .collect()
    }
}

/// Reads a window representative as a Laurent polynomial known to `prec`.
fn as_polynomial(c: &[Vec<Series>], prec: i64) -> Cochain {
    c.iter()
        .map(|v| {
            v.iter()
                .map(|s| {
                    if s.is_zero() {
                        Series::zero(s.ring().clone(), prec)
                    } else {
                        Series::new(s.ring().clone(), s.val(), (s.val()..s.end()).map(|i| s.coeff(i)).collect(), prec)
                    }
                })
                .collect()
        })
        .collect()
}

fn residual(c: &[Vec<Series>]) -> Option<i64> {
    c.iter().flatten().filter(|s| !s.is_zero() && s.val() < s.prec()).map(|s| s.val()).min()
}

fn precision_of(c: &[Vec<Series>]) -> i64 {
    c.iter().flatten().map(|s| s.prec()).min().unwrap_or(crate::series::EXACT)
}

/// Turns a 1-cochain `X` with `d¹X ≡ target` modulo `U = T^{k0}` into one
/// with `d¹X = target`, by correcting the Frobenius-paired component inside
/// `U` (only for a single `γ`).
fn exactify(ad: &PhiGammaModule, x: &[Vec<Series>], target: &[Vec<Series>]) -> Result<Cochain> {
    if ad.base.n() != 1 {
        bail!(Unsupported, "exact cocycle correction needs n = 1");
    }
    let kz = Koszul::new(2);
    let lattice = phi_stable_lattice(ad)?;
    let mut res = apply_differential(ad, &kz, 1, x)?;
    vec_axpy(&mut res[0], -1, &target[0])?;
    if let Some(v) = residual(&res) {
        if v < lattice.exponent {
            bail!(Refuted, "cochain is not a cocycle modulo T^{}: residual at T^{v}", lattice.exponent);
        }
    }
    // d¹(0, u)_{φγ} = (φ − 1)u
    let u = solve_phi_minus_one(ad, &lattice, &res[0])?;
    let mut out = x.to_vec();
    vec_axpy(&mut out[1], -1, &u)?;
    Ok(out)
}

fn commutation_failures(m: &PhiGammaModule) -> Result<Vec<RelationFailure>> {
    Ok(m.check()?.into_iter().filter(|f| !f.relation.contains('δ')).collect())
}

/// Result of the obstruction computation for one module.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub extension: ExtensionKind,
    pub precision: i64,
    pub defect: Cochain,
    /// Exponent of the first nonzero coefficient of `d²Z`, if any.
    pub cocycle_failure: Option<i64>,
    /// `d²` vanishes identically when there is a single `γ`.
    pub cocycle_vacuous: bool,
    /// Random lift changes for which `Z' − Z = d¹X` was verified.
    pub lift_changes_checked: usize,
    /// `Some(true)`: `Z` is a coboundary and `repaired` commutes.
    /// `Some(false)`: no preimage in the full window (single `γ`).
    /// `None`: undecided.
    pub vanishes: Option<bool>,
    pub preimage: Option<Cochain>,
    pub repaired: Option<PhiGammaModule>,
    pub repaired_failures: Vec<RelationFailure>,
}

fn random_cochain(ad: &PhiGammaModule, comps: usize, degree: i64, rng: &mut impl Rng) -> Cochain {
    let ring = ad.ring();
    (0..comps)
        .map(|_| {
            (0..ad.d)
                .map(|_| {
                    let coeffs: Vec<Elem> = (0..=degree)
                        .map(|_| {
                            let c: Vec<i64> = ring.exps().iter().map(|&e| rng.gen_range(0..ring.p().pow(e)) as i64).collect();
                            ring.from_coords(&c)
                        })
                        .collect();
                    Series::new(ring.clone(), 0, coeffs, ad.base.prec)
                })
                .collect()
        })
        .collect()
}

/// Lifts `M` coordinatewise, computes the defect, checks it is a cocycle and
/// that random lift changes shift it by coboundaries, and decides whether
/// its class vanishes (repairing the lift when it does).
pub fn obstruction(m: &PhiGammaModule, kind: &ExtensionKind, lift_changes: usize, rng: &mut impl Rng) -> Result<ObstructionReport> {
    let ext = SquareZero::new(m.base.clone(), kind.clone())?;
    let ad = ext.coefficient_module(m)?;
    let n = m.base.n();
    let kz = Koszul::new(n + 1);
    let lift = ext.choose_lifts(m)?;
    let z = ext.defect(&lift)?;
    let cocycle_vacuous = n == 1;
    let cocycle_failure = if cocycle_vacuous { None } else { residual(&apply_differential(&ad, &kz, 2, &z)?) };
    if let Some(e) = cocycle_failure {
        bail!(Refuted, "defect is not a cocycle: d²Z has a term T^{e}");
    }
    for _ in 0..lift_changes {
        let x = random_cochain(&ad, n + 1, 3, rng);
        let z2 = ext.defect(&ext.change_lift(&lift, &x)?)?;
        let mut diff = apply_differential(&ad, &kz, 1, &x)?;
        for (acc, (a, b)) in diff.iter_mut().zip(z2.iter().zip(&z)) {
            vec_axpy(acc, -1, a)?;
            vec_axpy(acc, 1, b)?;
        }
        let bound = precision_of(&z2).min(precision_of(&z));
        if let Some(e) = residual(&diff).filter(|&e| e < bound) {
            bail!(Refuted, "changing the lift moved the defect by more than a coboundary (T^{e})");
        }
    }
    let (mut vanishes, mut preimage, mut repaired, mut repaired_failures) = (None, None, None, Vec::new());
    match coboundary_preimage(&ad, 2, &z)? {
        Some(y) => {
            preimage = Some(y.clone());
            if n == 1 {
                // (1 − Y)·P̃ kills the defect modulo U; correct inside U
                let neg: Cochain = as_polynomial(&y, ad.base.prec).iter().map(|v| v.iter().map(|s| s.neg()).collect()).collect();
                let negz: Cochain = z.iter().map(|v| v.iter().map(|s| s.neg()).collect()).collect();
                let x = exactify(&ad, &neg, &negz)?;
                let fixed = ext.change_lift(&lift, &x)?;
                repaired_failures = commutation_failures(&fixed)?;
                vanishes = Some(repaired_failures.is_empty());
                repaired = Some(fixed);
            } else {
                vanishes = Some(true);
            }
        }
        None if n == 1 => vanishes = Some(false),
        None => {}
    }
    Ok(ObstructionReport {
        extension: kind.clone(),
        precision: m.base.prec,
        defect: z,
        cocycle_failure,
        cocycle_vacuous,
        lift_changes_checked: lift_changes,
        vanishes,
        preimage,
        repaired,
        repaired_failures,
    })
}

/// One lift along `A ⊕ F → A` built from an `H¹` generator.
#[derive(Clone, Debug)]
pub struct LiftWitness {
    pub cocycle: Cochain,
    pub order: u32,
    pub module: PhiGammaModule,
    pub failures: Vec<RelationFailure>,
    /// The cocycle recovered from the lifted matrices matches.
    pub round_trip: bool,
    /// Weak-Wach level of the lifted `γ` action (continuity re-verified).
    pub continuity_level: Option<u32>,
    /// For a random 0-cochain `u`, gauging by `1 + u` turns the lift of `X`
    /// into the lift of `X + d⁰u`.
    pub gauge_check: bool,
}

#[derive(Clone, Debug)]
pub struct LiftTorsorReport {
    pub rank: u32,
    pub precision: i64,
    /// `log_p |H¹(ad(M) ⊗ F)|`, the number of lift classes.
    pub log_size: u64,
    pub count: Option<u64>,
    pub divisors: Option<Vec<u32>>,
    pub stability: Option<StabilityEvidence>,
    pub lifts: Vec<LiftWitness>,
}

/// The lifts of `M` along `A ⊕ A^rank → A` up to isomorphism, counted by
/// `H¹(ad(M)^{⊕rank})`, with one explicit commuting lift per generator.
pub fn lift_torsor(family: &dyn ModuleFamily, rank: u32, prec: i64, stabilize: bool) -> Result<LiftTorsorReport> {
    let m = family.at_precision(prec)?;
    let kind = ExtensionKind::Split { rank };
    let ext = SquareZero::new(m.base.clone(), kind.clone())?;
    let ad = ext.coefficient_module(&m)?;
    let ad_family = |p: i64| -> Result<PhiGammaModule> {
        if p == prec {
            return Ok(ad.clone());
        }
        let mp = family.at_precision(p)?;
        SquareZero::new(mp.base.clone(), kind.clone())?.coefficient_module(&mp)
    };
    let opts = HerrOptions { degrees: vec![1], stabilize, ..HerrOptions::default() };
    let rep = herr_cohomology(&ad_family, prec, &opts)?;
    let h1 = &rep.degrees[0];
    let base_lift = ext.choose_lifts(&m)?;
    let mut lifts = Vec::new();
    for g in &h1.generators {
        let zero: Cochain = vec![vec![Series::zero(ad.ring().clone(), crate::series::EXACT); ad.d]];
        let x = exactify(&ad, &as_polynomial(&g.cocycle, prec), &zero)?;
        let module = ext.change_lift(&base_lift, &x)?;
        let failures = commutation_failures(&module)?;
        let one = Mat::identity(&ext.big.ring, m.d);
        let ops: Vec<(&Mat, &Mat)> = std::iter::once((&module.phi, &base_lift.phi)).chain(module.gammas.iter().zip(&base_lift.gammas)).collect();
        let mut round_trip = true;
        for (k, (new, old)) in ops.into_iter().enumerate() {
            let back = ext.vectorize(&new.mul(&old.invert_to(prec)?)?.sub(&one)?)?;
            round_trip &= back.iter().zip(&x[k]).all(|(a, b)| a.agrees(b));
        }
        let s_max = 3 * m.base.a() * m.base.q() as u32;
        let continuity_level = module.continuity_level(None, 1, s_max)?.level;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(lifts.len() as u64);
        let u = random_cochain(&ad, 1, 2, &mut rng);
        let mut shifted = x.clone();
        for (acc, du) in shifted.iter_mut().zip(apply_differential(&ad, &Koszul::new(2), 0, &u)?) {
            vec_axpy(acc, 1, &du)?;
        }
        let gauged = module.gauge(&one.add(&ext.embed_matrix(m.d, &u[0])?)?)?;
        let expect = ext.change_lift(&base_lift, &shifted)?;
        let gauge_check = gauged.phi.agrees(&expect.phi) && gauged.gammas.iter().zip(&expect.gammas).all(|(a, b)| a.agrees(b));
        lifts.push(LiftWitness { cocycle: x, order: g.order, module, failures, round_trip, continuity_level, gauge_check });
    }
    let p = m.base.field.p();
    Ok(LiftTorsorReport {
        rank,
        precision: prec,
        log_size: h1.log_size,
        count: p.checked_pow(h1.log_size as u32),
        divisors: h1.divisors.clone(),
        stability: rep.stability,
        lifts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{FieldSpec, LocalField};
    use crate::lubin_tate::PhiKind;
    use crate::phigamma::RandomSpec;
    use rand::SeedableRng;

    fn base(f: u32, a: u32, prec: i64) -> Arc<Base> {
        let field = LocalField::new(FieldSpec { p: 3, f, e: 1, eisenstein: vec![-3, 1], precision: 4 }).unwrap();
        let coeff = CoeffAlgebra::new(field, CoeffSpec::Quotient { a, degree: 1 }).unwrap();
        Base::new(coeff, 1, PhiKind::Std, prec).unwrap()
    }

    #[test]
    fn extensions_are_square_zero() {
        for kind in [ExtensionKind::Truncation, ExtensionKind::Split { rank: 1 }, ExtensionKind::Split { rank: 2 }] {
            for a in 1..=2 {
                let ext = SquareZero::new(base(1, a, 20), kind.clone()).unwrap();
                let r = &ext.small.ring;
                for x in r.elements() {
                    assert_eq!(ext.reduce(&ext.section(&x)), x);
                }
            }
        }
    }

    #[test]
    fn trivial_module_has_nine_first_order_lifts() {
        let m = PhiGammaModule::trivial(base(1, 1, 40), 1).unwrap();
        let rep = lift_torsor(&m, 1, 40, true).unwrap();
        assert_eq!(rep.log_size, 2);
        assert_eq!(rep.count, Some(9));
        assert!(!rep.lifts.is_empty());
        for l in &rep.lifts {
            assert!(l.failures.is_empty(), "{:?}", l.failures);
            assert!(l.round_trip);
            assert!(l.gauge_check);
            assert!(l.continuity_level.is_some());
        }
    }

    #[test]
    fn truncation_defect_is_repaired() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for rank in 1..=2 {
            let m = PhiGammaModule::random(base(1, 1, 40), &RandomSpec { rank, max_twist: 1, ..Default::default() }, &mut rng).unwrap();
            let rep = obstruction(&m, &ExtensionKind::Truncation, 3, &mut rng).unwrap();
            assert!(rep.cocycle_vacuous);
            assert!(residual(&rep.defect).is_some());
            assert_eq!(rep.vanishes, Some(true), "rank {rank}: {:?}", rep.repaired_failures);
        }
    }

    #[test]
    fn defect_is_a_cocycle_with_two_gammas() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = PhiGammaModule::random(base(2, 1, 24), &RandomSpec { rank: 1, max_twist: 1, ..Default::default() }, &mut rng).unwrap();
        let ext = SquareZero::new(m.base.clone(), ExtensionKind::Truncation).unwrap();
        let lift = ext.choose_lifts(&m).unwrap();
        let z = ext.defect(&lift).unwrap();
        assert_eq!(z.len(), 3);
        assert!(residual(&z).is_some(), "coordinatewise lift should not commute");
        let ad = ext.coefficient_module(&m).unwrap();
        let d2 = apply_differential(&ad, &Koszul::new(3), 2, &z).unwrap();
        assert_eq!(residual(&d2), None);
        let x = random_cochain(&ad, 3, 2, &mut rng);
        let z2 = ext.defect(&ext.change_lift(&lift, &x).unwrap()).unwrap();
        let mut diff = apply_differential(&ad, &Koszul::new(3), 1, &x).unwrap();
        for (acc, (a, b)) in diff.iter_mut().zip(z2.iter().zip(&z)) {
            vec_axpy(acc, -1, a).unwrap();
            vec_axpy(acc, 1, b).unwrap();
        }
        assert_eq!(residual(&diff), None);
    }
}
