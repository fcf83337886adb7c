//! The coefficient ring `R((T))` with its Frobenius and Galois actions, and
//! étale (φ, Γ)-modules given by matrices in a basis.
//!
//! Conventions: for an operator `σ` with matrix `P_σ`, a coordinate vector
//! `x` maps to `P_σ·σ(x)`. Composition gives `M_{στ} = M_σ·σ(M_τ)` and a base
//! change by `U` gives `U^{-1}·P·σ(U)`.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::coeff::{CoeffAlgebra, LocalField, WittCoeff};
use crate::error::{bail, Result};
use crate::lubin_tate::{LubinTate, PhiKind};
use crate::matrix::{EntryWitness, Mat};
use crate::ring::{Elem, FiniteRing, RingMap};
use crate::series::{Series, Substitution, EXACT};

/// A ring endomorphism of `R((T))`: a coefficient map followed by `T ↦ s(T)`.
#[derive(Clone, Debug)]
pub struct Action {
    pub label: String,
    /// The element of `O_F/p^c` this action comes from (`π` for φ).
    pub value: Elem,
    pub coeff: Option<RingMap>,
    pub subst: Arc<Substitution>,
}

impl Action {
    fn new(label: impl Into<String>, value: Elem, coeff: Option<RingMap>, image: Series, cap: i64) -> Result<Action> {
        Ok(Action { label: label.into(), value, coeff, subst: Arc::new(Substitution::new(image, cap)?) })
    }

    /// Image of `T`.
    pub fn image(&self) -> &Series {
        self.subst.series()
    }

    pub fn apply(&self, f: &Series) -> Result<Series> {
        match &self.coeff {
            Some(m) => self.subst.apply(&f.map_coeffs(m)?),
            None => self.subst.apply(f),
        }
    }

    pub fn apply_vec(&self, v: &[Series]) -> Result<Vec<Series>> {
        v.iter().map(|s| self.apply(s)).collect()
    }

    pub fn apply_mat(&self, m: &Mat) -> Result<Mat> {
        m.map(|s| self.apply(s))
    }

    pub fn apply_coeff(&self, c: &Elem) -> Elem {
        self.coeff.as_ref().map_or(*c, |m| m.apply(c))
    }
}

/// `R = W(k_K) ⊗ A` with `R((T))` carrying `φ_q`, `γ_1..γ_n` and `Δ`.
#[derive(Debug)]
pub struct Base {
    pub field: Arc<LocalField>,
    pub coeff: Arc<CoeffAlgebra>,
    pub witt: Arc<WittCoeff>,
    pub ring: Arc<FiniteRing>,
    pub kind: PhiKind,
    /// `T`-adic working precision.
    pub prec: i64,
    pub lt: Arc<LubinTate>,
    /// `O_F/p^c → R`.
    pub of_map: RingMap,
    pub phi: Action,
    pub gammas: Vec<Action>,
    /// One action per element of `μ_{q−1}`; empty for `p = 2`.
    pub deltas: Vec<Action>,
    /// Image of `π` in `R`.
    pub uniformizer: Elem,
}

impl Base {
    pub fn new(coeff: Arc<CoeffAlgebra>, r: u32, kind: PhiKind, prec: i64) -> Result<Arc<Base>> {
        if prec < 4 {
            bail!(Input, "working precision must be at least 4");
        }
        let field = coeff.field.clone();
        let witt = WittCoeff::new(coeff.clone(), r)?;
        let ring = witt.ring.clone();
        let lt = LubinTate::new(field.clone(), kind, prec as usize, coeff.a)?;
        let of_map = witt.of_map(lt.c)?;
        let phi_t = lt.phi.map_coeffs(&of_map)?;
        let phi = Action::new("φ", lt.pi(), Some(witt.frob.clone()), phi_t, prec)?;
        let mut gammas = Vec::new();
        for (j, chi) in lt.gamma_characters().into_iter().enumerate() {
            let s = lt.endomorphism(&chi)?.series.map_coeffs(&of_map)?;
            gammas.push(Action::new(format!("γ{}", j + 1), chi, None, s, prec)?);
        }
        let mut deltas = Vec::new();
        if field.p() != 2 {
            for (k, z) in lt.delta_characters()?.into_iter().enumerate() {
                let s = lt.endomorphism(&z)?.series.map_coeffs(&of_map)?;
                deltas.push(Action::new(format!("δ{k}"), z, None, s, prec)?);
            }
        }
        let uniformizer = of_map.apply(&lt.pi());
        Ok(Arc::new(Base { field, coeff, witt, ring, kind, prec, lt, of_map, phi, gammas, deltas, uniformizer }))
    }

    /// The same base at another working precision.
    pub fn with_precision(&self, prec: i64) -> Result<Arc<Base>> {
        Base::new(self.coeff.clone(), self.witt.r, self.kind, prec)
    }

    /// `n = [F : Q_p]`, the number of `γ` generators.
    pub fn n(&self) -> usize {
        self.gammas.len()
    }

    pub fn q(&self) -> u64 {
        self.field.q()
    }

    /// Least `a` with `π^a = 0` in the coefficients.
    pub fn a(&self) -> u32 {
        self.coeff.a
    }

    /// Exact constant series.
    pub fn constant(&self, c: Elem) -> Series {
        Series::constant(self.ring.clone(), c, EXACT)
    }

    /// `[x](T)` for a unit `x ∈ O_F/p^c`, as an action on `R((T))`.
    pub fn character_action(&self, label: impl Into<String>, x: &Elem) -> Result<Action> {
        let s = self.lt.endomorphism(x)?.series.map_coeffs(&self.of_map)?;
        Action::new(label, *x, None, s, self.prec)
    }

    /// Index of `ζ` among the `Δ` actions.
    pub fn delta_index(&self, z: &Elem) -> Option<usize> {
        self.deltas.iter().position(|d| d.value == *z)
    }

    /// Image of `A` in `R`.
    pub fn from_a(&self, a: &Elem) -> Elem {
        self.witt.incl.apply(a)
    }

    /// `R → R'` induced by the coefficient map `A → A'` when both bases share
    /// the field, `r` and `φ`.
    pub fn coefficient_map(&self, other: &Base) -> Result<RingMap> {
        if self.field.spec != other.field.spec || self.witt.r != other.witt.r || self.kind != other.kind {
            bail!(Mismatch, "bases differ in field, unramified degree or Frobenius series");
        }
        let red = self.coeff.reduction_to(&other.coeff)?;
        let (k, k2) = (self.coeff.ring.rank(), other.coeff.ring.rank());
        let images = (0..self.ring.rank())
            .map(|idx| {
                let (u, i) = (idx / k, idx % k);
                let x = red.apply(&self.coeff.ring.basis(i));
                let mut y = Elem::ZERO;
                y.0[u * k2..u * k2 + k2].copy_from_slice(&x.0[..k2]);
                y
            })
            .collect();
        let map = RingMap::new(self.ring.clone(), other.ring.clone(), images)?;
        map.verify_homomorphism()?;
        let frob_ok = (0..self.ring.rank()).all(|i| {
            let b = self.ring.basis(i);
            map.apply(&self.witt.frob.apply(&b)) == other.witt.frob.apply(&map.apply(&b))
        });
        if !frob_ok {
            bail!(Mismatch, "coefficient map does not commute with Frobenius");
        }
        Ok(map)
    }

    fn random_unit(&self, rng: &mut impl Rng) -> Elem {
        let r = &self.ring;
        loop {
            let coords: Vec<i64> = r.exps().iter().map(|&e| rng.gen_range(0..r.p().pow(e)) as i64).collect();
            let x = r.from_coords(&coords);
            if r.is_unit(&x) {
                return x;
            }
        }
    }

    fn random_elem(&self, rng: &mut impl Rng) -> Elem {
        let r = &self.ring;
        let coords: Vec<i64> = r.exps().iter().map(|&e| rng.gen_range(0..r.p().pow(e)) as i64).collect();
        r.from_coords(&coords)
    }

    fn random_a(&self, rng: &mut impl Rng) -> Elem {
        let a = &self.coeff.ring;
        let coords: Vec<i64> = a.exps().iter().map(|&e| rng.gen_range(0..a.p().pow(e)) as i64).collect();
        self.from_a(&a.from_coords(&coords))
    }
}

/// A failed relation between the structure matrices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationFailure {
    pub relation: String,
    pub witness: EntryWitness,
}

/// Smallest `s` per generator for which the continuity containment holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuityReport {
    pub target: i64,
    pub per_generator: Vec<Option<u32>>,
    /// Maximum over generators, if all succeeded.
    pub level: Option<u32>,
}

/// Shape of a random module: a gauge transform of constant diagonal data.
#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub rank: usize,
    /// Largest `k` in the twist `diag(T^k)`; produces poles in `φ`.
    pub max_twist: i64,
    /// Degree of the polynomial part of the gauge matrix.
    pub gauge_degree: usize,
    /// Whether to draw nontrivial `Δ`-characters.
    pub tame: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { rank: 1, max_twist: 0, gauge_degree: 2, tame: true }
    }
}

#[derive(Clone, Debug)]
pub struct PhiGammaModule {
    pub base: Arc<Base>,
    pub d: usize,
    pub phi: Mat,
    pub gammas: Vec<Mat>,
    /// One matrix per `Δ` action, aligned with `base.deltas`.
    pub deltas: Vec<Mat>,
}

impl PhiGammaModule {
    /// Validates shapes and invertibility; missing `Δ` data means trivial action.
    pub fn new(base: Arc<Base>, phi: Mat, gammas: Vec<Mat>, deltas: Option<Vec<Mat>>) -> Result<Self> {
        let d = phi.rows;
        if d == 0 || !phi.is_square() {
            bail!(Input, "Frobenius matrix must be square and nonempty");
        }
        if gammas.len() != base.n() {
            bail!(Input, "expected {} γ matrices, got {}", base.n(), gammas.len());
        }
        let deltas = match deltas {
            Some(ds) => {
                if ds.len() != base.deltas.len() {
                    bail!(Input, "expected {} Δ matrices, got {}", base.deltas.len(), ds.len());
                }
                ds
            }
            None => vec![Mat::identity(&base.ring, d); base.deltas.len()],
        };
        for m in std::iter::once(&phi).chain(&gammas).chain(&deltas) {
            if m.rows != d || m.cols != d {
                bail!(Input, "structure matrices must all be {d}x{d}");
            }
            if m.e.iter().any(|s| **s.ring() != *base.ring) {
                bail!(Mismatch, "matrix entries over {} instead of {}", m.ring().label(), base.ring.label());
            }
        }
        let m = PhiGammaModule { base, d, phi, gammas, deltas };
        m.phi.invert_to(m.base.prec).map_err(|e| crate::error::Error::Input(format!("Frobenius matrix is not invertible: {e}")))?;
        for g in m.gammas.iter().chain(&m.deltas) {
            g.invert_to(m.base.prec).map_err(|e| crate::error::Error::Input(format!("γ or Δ matrix is not invertible: {e}")))?;
        }
        Ok(m)
    }

    /// The unit object `R((T))`.
    pub fn trivial(base: Arc<Base>, d: usize) -> Result<Self> {
        let id = Mat::identity(&base.ring, d);
        let n = base.n();
        PhiGammaModule::new(base, id.clone(), vec![id; n], None)
    }

    /// Rank one with given series.
    pub fn rank_one(base: Arc<Base>, phi: Series, gammas: Vec<Series>, deltas: Option<Vec<Series>>) -> Result<Self> {
        let one = |s: Series| Mat { rows: 1, cols: 1, e: vec![s] };
        PhiGammaModule::new(base, one(phi), gammas.into_iter().map(one).collect(), deltas.map(|v| v.into_iter().map(one).collect()))
    }

    /// `ur_a`: `φ(e) = c·e` with `N(c) = a`, trivial `Γ̃`.
    pub fn unramified(base: Arc<Base>, a: &Elem) -> Result<Self> {
        let c = base.witt.norm_fibre(a)?;
        let n = base.n();
        let one = base.constant(base.ring.one());
        PhiGammaModule::rank_one(base.clone(), base.constant(c), vec![one; n], None)
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.base.ring
    }

    /// Smallest precision among the structure matrices.
    pub fn prec(&self) -> i64 {
        std::iter::once(&self.phi).chain(&self.gammas).chain(&self.deltas).map(|m| m.prec()).min().unwrap()
    }

    pub fn apply_phi(&self, x: &[Series]) -> Result<Vec<Series>> {
        self.phi.apply(&self.base.phi.apply_vec(x)?)
    }

    pub fn apply_gamma(&self, j: usize, x: &[Series]) -> Result<Vec<Series>> {
        self.gammas[j].apply(&self.base.gammas[j].apply_vec(x)?)
    }

    pub fn apply_delta(&self, k: usize, x: &[Series]) -> Result<Vec<Series>> {
        self.deltas[k].apply(&self.base.deltas[k].apply_vec(x)?)
    }

    /// Operator `k` of the Koszul family: `0 ↦ φ`, `j ↦ γ_j`.
    pub fn apply_operator(&self, k: usize, x: &[Series]) -> Result<Vec<Series>> {
        if k == 0 {
            self.apply_phi(x)
        } else {
            self.apply_gamma(k - 1, x)
        }
    }

    /// Checks commutation of all operators, to the available precision.
    pub fn check(&self) -> Result<Vec<RelationFailure>> {
        let b = &self.base;
        let mut out = Vec::new();
        let mut cmp = |name: String, lhs: Mat, rhs: Mat| {
            if let Some(w) = lhs.first_difference(&rhs) {
                out.push(RelationFailure { relation: name, witness: w });
            }
        };
        let p = &self.phi;
        for (j, g) in self.gammas.iter().enumerate() {
            let gam = &b.gammas[j];
            cmp(format!("φγ{}", j + 1), p.mul(&b.phi.apply_mat(g)?)?, g.mul(&gam.apply_mat(p)?)?);
            for (k, h) in self.gammas.iter().enumerate().skip(j + 1) {
                cmp(format!("γ{}γ{}", j + 1, k + 1), g.mul(&gam.apply_mat(h)?)?, h.mul(&b.gammas[k].apply_mat(g)?)?);
            }
        }
        let ring = &b.lt.ring;
        for (k, dm) in self.deltas.iter().enumerate() {
            let z = &b.deltas[k];
            cmp(format!("φδ{k}"), p.mul(&b.phi.apply_mat(dm)?)?, dm.mul(&z.apply_mat(p)?)?);
            for (j, g) in self.gammas.iter().enumerate() {
                cmp(format!("γ{}δ{k}", j + 1), g.mul(&b.gammas[j].apply_mat(dm)?)?, dm.mul(&z.apply_mat(g)?)?);
            }
            for (l, em) in self.deltas.iter().enumerate() {
                let prod = ring.mul(&z.value, &b.deltas[l].value);
                let Some(kl) = b.delta_index(&prod) else { bail!(Refuted, "roots of unity are not closed under products") };
                cmp(format!("δ{k}δ{l}"), dm.mul(&z.apply_mat(em)?)?, self.deltas[kl].clone());
            }
        }
        Ok(out)
    }

    /// Base change `U^{-1}·P_σ·σ(U)` for every operator.
    pub fn gauge(&self, u: &Mat) -> Result<Self> {
        let b = &self.base;
        let ui = u.invert_to(b.prec)?;
        let tr = |m: &Mat, act: &Action| -> Result<Mat> { ui.mul(m)?.mul(&act.apply_mat(u)?) };
        let phi = tr(&self.phi, &b.phi)?;
        let gammas = self.gammas.iter().zip(&b.gammas).map(|(g, a)| tr(g, a)).collect::<Result<_>>()?;
        let deltas = self.deltas.iter().zip(&b.deltas).map(|(g, a)| tr(g, a)).collect::<Result<_>>()?;
        Ok(PhiGammaModule { base: b.clone(), d: self.d, phi, gammas, deltas })
    }

    /// `G^{(m)}`, the matrix of `γ_j^m`, together with the action of `γ_j^m` on `R((T))`.
    pub fn gamma_power(&self, j: usize, m: u64) -> Result<(Mat, Action)> {
        let b = &self.base;
        let lr = &b.lt.ring;
        let chi = b.gammas[j].value;
        let mut acc = Mat::identity(&b.ring, self.d);
        let mut done = 0u64;
        // square and multiply: acc = G^{(done)}, sq = G^{(2^i)}
        let mut sq = self.gammas[j].clone();
        let mut sq_exp = 1u64;
        let mut rest = m;
        while rest > 0 {
            if rest & 1 == 1 {
                let act = b.character_action("γ", &lr.pow(&chi, done))?;
                acc = acc.mul(&act.apply_mat(&sq)?)?;
                done += sq_exp;
            }
            rest >>= 1;
            if rest > 0 {
                let act = b.character_action("γ", &lr.pow(&chi, sq_exp))?;
                sq = sq.mul(&act.apply_mat(&sq)?)?;
                sq_exp *= 2;
            }
        }
        let act = b.character_action(format!("γ{}^{m}", j + 1), &lr.pow(&chi, m))?;
        Ok((acc, act))
    }

    /// For each generator, the least `s ≤ s_max` with
    /// `(γ_j^{p^s} − 1)𝔐 ⊆ T^n 𝔐`, where `𝔐` is spanned by the columns of
    /// `lattice` (the standard lattice if `None`).
    pub fn continuity_level(&self, lattice: Option<&Mat>, n: i64, s_max: u32) -> Result<ContinuityReport> {
        let b = &self.base;
        let bm = match lattice {
            Some(m) => m.clone(),
            None => Mat::identity(&b.ring, self.d),
        };
        let binv = bm.invert_to(b.prec)?;
        let id = Mat::identity(&b.ring, self.d);
        let t = Series::t(b.ring.clone());
        let mut per = Vec::new();
        for j in 0..b.n() {
            let mut found = None;
            for s in 0..=s_max {
                let m = b.field.p().checked_pow(s).ok_or_else(|| crate::error::Error::Input("continuity search overflow".into()))?;
                let (g, act) = self.gamma_power(j, m)?;
                let h = binv.mul(&g)?.mul(&act.apply_mat(&bm)?)?.sub(&id)?;
                let dt = act.image().sub(&t)?;
                if contained(std::iter::once(&dt).chain(&h.e), n)? {
                    found = Some(s);
                    break;
                }
            }
            per.push(found);
        }
        let level = per.iter().try_fold(0u32, |acc, s| s.map(|s| acc.max(s)));
        Ok(ContinuityReport { target: n, per_generator: per, level })
    }

    /// Least `h` with `T^h·P^{-1}` integral, for `P` the Frobenius matrix in
    /// the basis of `lattice` (which must then be integral).
    pub fn minimal_height(&self, lattice: Option<&Mat>) -> Result<i64> {
        let p = match lattice {
            Some(u) => self.gauge(u)?.phi,
            None => self.phi.clone(),
        };
        if !p.is_integral() {
            bail!(Input, "the lattice is not φ-stable");
        }
        let pinv = p.invert_to(self.base.prec)?;
        let h = pinv.pole_order();
        if pinv.prec() <= 0 {
            bail!(Precision, "inverse Frobenius matrix known only to precision {}", pinv.prec());
        }
        Ok(h)
    }

    pub fn height_leq(&self, lattice: Option<&Mat>, h: i64) -> Result<bool> {
        Ok(self.minimal_height(lattice)? <= h)
    }

    pub(crate) fn map_all(&self, base: Arc<Base>, d: usize, f: impl Fn(&Mat) -> Result<Mat>) -> Result<Self> {
        Ok(PhiGammaModule {
            base,
            d,
            phi: f(&self.phi)?,
            gammas: self.gammas.iter().map(&f).collect::<Result<_>>()?,
            deltas: self.deltas.iter().map(&f).collect::<Result<_>>()?,
        })
    }

    /// Extension of scalars along the coefficient map to `target`.
    pub fn base_change(&self, target: &Arc<Base>) -> Result<Self> {
        let map = self.base.coefficient_map(target)?;
        if target.prec > self.base.prec && self.prec() < target.prec {
            bail!(Precision, "module known to precision {} < {}", self.prec(), target.prec);
        }
        self.map_all(target.clone(), self.d, |m| Ok(m.map_coeffs(&map)?.truncate(target.prec)))
    }

    /// The same module over a base of another working precision; needs the
    /// data to be known that far.
    pub fn with_precision(&self, prec: i64) -> Result<Self> {
        if prec > self.prec() {
            bail!(Precision, "module known to precision {} < {prec}", self.prec());
        }
        let base = self.base.with_precision(prec)?;
        self.map_all(base, self.d, |m| Ok(m.truncate(prec)))
    }

    /// `M ⊗ N`.
    pub fn tensor(&self, other: &PhiGammaModule) -> Result<Self> {
        if !Arc::ptr_eq(&self.base, &other.base) && *self.base.ring != *other.base.ring {
            bail!(Mismatch, "tensor product over different bases");
        }
        let phi = self.phi.kron(&other.phi)?;
        let gammas = self.gammas.iter().zip(&other.gammas).map(|(a, b)| a.kron(b)).collect::<Result<_>>()?;
        let deltas = self.deltas.iter().zip(&other.deltas).map(|(a, b)| a.kron(b)).collect::<Result<_>>()?;
        Ok(PhiGammaModule { base: self.base.clone(), d: self.d * other.d, phi, gammas, deltas })
    }

    /// `M^{⊕k}`, block diagonal with the copy index outermost.
    pub fn direct_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            bail!(Input, "direct power needs k ≥ 1");
        }
        let id = Mat::identity(&self.base.ring, k);
        self.map_all(self.base.clone(), self.d * k, |m| id.kron(m))
    }

    /// `M^∨`, with matrices `(A^{-1})^T`.
    pub fn dual(&self) -> Result<Self> {
        let prec = self.base.prec;
        self.map_all(self.base.clone(), self.d, |m| Ok(m.invert_to(prec)?.transpose()))
    }

    /// `ad(M) = M^∨ ⊗ M` acting on column-major `vec(X)`.
    pub fn adjoint(&self) -> Result<Self> {
        self.dual()?.tensor(self)
    }

    /// Compares `tr(P·φ(X)·P^{-1})` with `φ(tr X)` for the given matrices `X`.
    pub fn check_trace_equivariance(&self, samples: &[Mat]) -> Result<Option<i64>> {
        let b = &self.base;
        let pinv = self.phi.invert_to(b.prec)?;
        for x in samples {
            let lhs = self.phi.mul(&b.phi.apply_mat(x)?)?.mul(&pinv)?.trace()?;
            let rhs = b.phi.apply(&x.trace()?)?;
            if let Some(k) = lhs.first_difference(&rhs) {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// A random étale module: `U^{-1}·D·σ(U)` with constant diagonal `D`
    /// (Frobenius entries units of `R`, `γ` entries in `1 + πA`, `Δ` entries
    /// powers of `ζ`) and `U = diag(T^{k_i})·C·(1 + T·X)`.
    pub fn random(base: Arc<Base>, spec: &RandomSpec, rng: &mut impl Rng) -> Result<Self> {
        let d = spec.rank;
        if d == 0 {
            bail!(Input, "rank must be positive");
        }
        let r = &base.ring;
        let pi = base.uniformizer;
        let phi_d: Vec<Elem> = (0..d).map(|_| base.random_unit(rng)).collect();
        let gam_d: Vec<Vec<Elem>> = (0..base.n()).map(|_| (0..d).map(|_| r.add(&r.one(), &r.mul(&pi, &base.random_a(rng)))).collect()).collect();
        let exps: Vec<u64> = (0..d).map(|_| if spec.tame { rng.gen_range(0..base.q().max(2) - 1) } else { 0 }).collect();
        let delta_d: Vec<Vec<Elem>> =
            base.deltas.iter().map(|z| exps.iter().map(|&k| base.of_map.apply(&base.lt.ring.pow(&z.value, k))).collect()).collect();
        let diag = PhiGammaModule::new(
            base.clone(),
            Mat::diagonal(r, &phi_d),
            gam_d.iter().map(|g| Mat::diagonal(r, g)).collect(),
            Some(delta_d.iter().map(|g| Mat::diagonal(r, g)).collect()),
        )?;
        let c = loop {
            let m = Mat::from_fn(d, d, |_, _| base.constant(base.random_elem(rng)));
            if m.invert_to(base.prec).is_ok() {
                break m;
            }
        };
        let x = Mat::from_fn(d, d, |_, _| {
            let coeffs: Vec<Elem> = (0..spec.gauge_degree).map(|_| base.random_elem(rng)).collect();
            Series::new(r.clone(), 1, coeffs, EXACT)
        });
        let twist: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=spec.max_twist.max(0))).collect();
        let tw =
            Mat::from_fn(d, d, |i, j| if i == j { Series::monomial(r.clone(), r.one(), twist[i], EXACT) } else { Series::zero(r.clone(), EXACT) });
        let u = tw.mul(&c)?.mul(&Mat::identity(r, d).add(&x)?)?;
        diag.gauge(&u)
    }
}

/// Whether every series lies in `T^n R[[T]]`; errors when precision cannot decide.
fn contained<'a>(entries: impl Iterator<Item = &'a Series>, n: i64) -> Result<bool> {
    for s in entries {
        if !s.is_zero() && s.val() < n {
            return Ok(false);
        }
        if s.prec() < n {
            bail!(Precision, "entry known only modulo T^{} while testing T^{n}", s.prec());
        }
    }
    Ok(true)
}

/// A unit `u` with `u^{-1}·c1·φ(u) = c2`, by search over `R^×`.
pub fn scalar_isomorphism(base: &Base, c1: &Elem, c2: &Elem) -> Result<Option<Elem>> {
    let r = &base.ring;
    if r.order().is_none_or(|o| o > crate::coeff::ENUMERATION_LIMIT) {
        bail!(Unsupported, "ring too large to search for an isomorphism");
    }
    for u in r.units() {
        let lhs = r.mul(c1, &base.witt.frob.apply(&u));
        if lhs == r.mul(&u, c2) {
            return Ok(Some(u));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{CoeffSpec, FieldSpec};
    use rand::SeedableRng;

    pub(crate) fn base(f: u32, e: u32, a: u32, r: u32, prec: i64) -> Arc<Base> {
        let eis = if e == 1 { vec![-3, 1] } else { vec![-3, 0, 1] };
        let field = LocalField::new(FieldSpec { p: 3, f, e, eisenstein: eis, precision: 4 }).unwrap();
        let coeff = CoeffAlgebra::new(field, CoeffSpec::Quotient { a, degree: 1 }).unwrap();
        Base::new(coeff, r, PhiKind::Std, prec).unwrap()
    }

    #[test]
    fn random_modules_commute() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (f, e, a) in [(1, 1, 1), (1, 1, 2), (1, 2, 2)] {
            let b = base(f, e, a, 1, 30);
            for rank in 1..=2 {
                let m = PhiGammaModule::random(b.clone(), &RandomSpec { rank, max_twist: 1, ..Default::default() }, &mut rng).unwrap();
                assert_eq!(m.check().unwrap(), vec![], "f={f} e={e} a={a} rank={rank}");
            }
        }
    }

    #[test]
    fn broken_module_is_detected() {
        let b = base(1, 1, 2, 1, 20);
        let mut m = PhiGammaModule::trivial(b.clone(), 1).unwrap();
        m.gammas[0] = Mat { rows: 1, cols: 1, e: vec![Series::from_ints(b.ring.clone(), 0, &[1, 1])] };
        let fails = m.check().unwrap();
        assert!(!fails.is_empty());
        assert_eq!(fails[0].relation, "φγ1");
    }

    #[test]
    fn trivial_module_continuity_and_height() {
        let b = base(1, 1, 1, 1, 30);
        let m = PhiGammaModule::trivial(b, 1).unwrap();
        assert_eq!(m.minimal_height(None).unwrap(), 0);
        let rep = m.continuity_level(None, 1, 6).unwrap();
        assert_eq!(rep.level, Some(0));
        let rep3 = m.continuity_level(None, 3, 6).unwrap();
        assert!(rep3.level.unwrap() >= rep.level.unwrap());
    }

    #[test]
    fn adjoint_trace_is_equivariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let b = base(1, 1, 2, 1, 24);
        let m = PhiGammaModule::random(b.clone(), &RandomSpec { rank: 2, ..Default::default() }, &mut rng).unwrap();
        let ad = m.adjoint().unwrap();
        assert_eq!(ad.d, 4);
        assert_eq!(ad.check().unwrap(), vec![]);
        let x = Mat::from_fn(2, 2, |i, j| Series::from_ints(b.ring.clone(), 0, &[i as i64 + 1, j as i64]));
        assert_eq!(m.check_trace_equivariance(&[x]).unwrap(), None);
    }

    #[test]
    fn unramified_tensor_matches_product() {
        let b = base(1, 1, 2, 2, 12);
        let a = &b.coeff.ring;
        let (x, y) = (a.from_int(2), a.from_int(4));
        let mx = PhiGammaModule::unramified(b.clone(), &x).unwrap();
        let my = PhiGammaModule::unramified(b.clone(), &y).unwrap();
        let mxy = PhiGammaModule::unramified(b.clone(), &a.mul(&x, &y)).unwrap();
        let t = mx.tensor(&my).unwrap();
        let u = scalar_isomorphism(&b, &t.phi.get(0, 0).coeff(0), &mxy.phi.get(0, 0).coeff(0)).unwrap();
        assert!(u.is_some());
        let m1 = PhiGammaModule::unramified(b.clone(), &a.one()).unwrap();
        assert!(scalar_isomorphism(&b, &mx.phi.get(0, 0).coeff(0), &m1.phi.get(0, 0).coeff(0)).unwrap().is_none());
    }
}
