//! Lubin–Tate formal groups, their endomorphisms, and the series describing
//! the actions of `φ_q`, `Γ` and `Δ` on `T`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::coeff::LocalField;
use crate::error::{bail, Result};
use crate::ring::{Elem, FiniteRing, RingMap};
use crate::series::{Series, Substitution, EXACT};

/// Choice of Frobenius power series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    /// `πT + T^q`.
    #[default]
    Std,
    /// `(1+T)^p − 1`, for `F = Q_p` with `π = p`.
    Mult,
}

impl std::str::FromStr for PhiKind {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "std" => Ok(PhiKind::Std),
            "mult" => Ok(PhiKind::Mult),
            _ => bail!(Input, "unknown Frobenius series {s:?} (expected std or mult)"),
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Dense bivariate power series truncated at total degree `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivariate {
    pub n: usize,
    c: Vec<Elem>,
}

impl Bivariate {
    pub fn zero(n: usize) -> Self {
        Bivariate { n, c: vec![Elem::ZERO; n * n] }
    }
    pub fn get(&self, i: usize, j: usize) -> Elem {
        if i + j < self.n {
            self.c[i * self.n + j]
        } else {
            Elem::ZERO
        }
    }
    pub fn set(&mut self, i: usize, j: usize, x: Elem) {
        self.c[i * self.n + j] = x;
    }
    fn add_at(&mut self, r: &FiniteRing, i: usize, j: usize, x: &Elem) {
        let k = i * self.n + j;
        self.c[k] = r.add(&self.c[k], x);
    }
    pub fn mul(&self, other: &Bivariate, r: &FiniteRing) -> Bivariate {
        let n = self.n;
        let mut out = Bivariate::zero(n);
        for i1 in 0..n {
            for j1 in 0..n - i1 {
                let a = self.get(i1, j1);
                if r.is_zero(&a) {
                    continue;
                }
                for i2 in 0..n - i1 - j1 {
                    for j2 in 0..n - i1 - j1 - i2 {
                        let b = other.get(i2, j2);
                        if !r.is_zero(&b) {
                            out.add_at(r, i1 + i2, j1 + j2, &r.mul(&a, &b));
                        }
                    }
                }
            }
        }
        out
    }
    pub fn map(&self, m: &RingMap) -> Bivariate {
        Bivariate { n: self.n, c: self.c.iter().map(|x| m.apply(x)).collect() }
    }
    /// Nonzero coefficients keyed by `(i, j)`.
    pub fn terms(&self, r: &FiniteRing) -> BTreeMap<(usize, usize), Elem> {
        let mut out = BTreeMap::new();
        for i in 0..self.n {
            for j in 0..self.n - i {
                let x = self.get(i, j);
                if !r.is_zero(&x) {
                    out.insert((i, j), x);
                }
            }
        }
        out
    }
}

/// Lubin–Tate data for a fixed field and Frobenius series, computed over
/// `O_F/p^c` to `T`-adic precision `n`.
pub struct LubinTate {
    pub field: Arc<LocalField>,
    pub kind: PhiKind,
    /// `T`-adic precision of all series.
    pub n: usize,
    /// `p`-adic working precision.
    pub c: u32,
    pub ring: Arc<FiniteRing>,
    /// `φ(T)`, exactly.
    pub phi: Series,
    /// π-adic precision to which computed coefficients are certified.
    pub certified: u32,
    phi_coeffs: Vec<Elem>,
    phi_powers: Vec<Series>,
    cache: Mutex<BTreeMap<Elem, Arc<Endomorphism>>>,
}

impl std::fmt::Debug for LubinTate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LubinTate({:?}, n={}, c={}, certified={})", self.kind, self.n, self.c, self.certified)
    }
}

/// `[a](T)` as a power series.
#[derive(Clone, Debug)]
pub struct Endomorphism {
    pub a: Elem,
    pub series: Series,
}

fn ceil_log(q: u64, n: usize) -> u32 {
    let mut k = 0;
    let mut x = 1u64;
    while (x as usize) < n {
        x = x.saturating_mul(q);
        k += 1;
    }
    k
}

impl LubinTate {
    /// Precision lost in the degree-by-degree solves up to degree `n`.
    pub fn precision_loss(q: u64, n: usize) -> u32 {
        ceil_log(q, n) + 2
    }

    /// Builds the data with enough `p`-adic precision to certify at least
    /// `min_certified` π-adic digits.
    pub fn new(field: Arc<LocalField>, kind: PhiKind, n: usize, min_certified: u32) -> Result<Arc<Self>> {
        if n < 2 {
            bail!(Input, "T-adic precision must be at least 2");
        }
        let (p, e, q) = (field.p(), field.e(), field.q());
        if kind == PhiKind::Mult && (field.f() != 1 || e != 1 || field.spec.eisenstein != [-(p as i64), 1]) {
            bail!(Input, "the multiplicative Frobenius series needs F = Q_p with π = p");
        }
        let loss = Self::precision_loss(q, n);
        let c = field.spec.precision.max((min_certified + loss).div_ceil(e));
        if c > field.max_precision() {
            bail!(Precision, "p-adic precision {c} needed exceeds the machine bound {}", field.max_precision());
        }
        let ring = field.integers(c)?;
        let pi = field.pi(&ring);
        let phi_coeffs: Vec<Elem> = match kind {
            PhiKind::Std => {
                let mut v = vec![Elem::ZERO; q as usize + 1];
                v[1] = pi;
                v[q as usize] = ring.add(&v[q as usize], &ring.one());
                v
            }
            PhiKind::Mult => (0..=p).map(|k| if k == 0 { Elem::ZERO } else { ring.from_int(binomial(p, k) as i64) }).collect(),
        };
        let phi = Series::new(ring.clone(), 0, phi_coeffs.clone(), EXACT);
        let mut phi_powers = vec![Series::one(ring.clone(), EXACT)];
        for i in 1..n {
            let next = phi_powers[i - 1].mul(&phi)?.truncate(n as i64);
            phi_powers.push(next);
        }
        let lt = LubinTate { field, kind, n, c, certified: e * c - loss, ring, phi, phi_coeffs, phi_powers, cache: Mutex::new(BTreeMap::new()) };
        lt.check_frobenius()?;
        Ok(Arc::new(lt))
    }

    /// `φ(T) ≡ πT mod T²` and `φ(T) ≡ T^q mod π`.
    pub fn check_frobenius(&self) -> Result<()> {
        let r = &self.ring;
        let pi = self.field.pi(r);
        if self.phi.coeff(0) != Elem::ZERO || self.phi.coeff(1) != pi {
            bail!(Refuted, "φ(T) is not πT mod T²");
        }
        let red = self.field.projection(self.c, 1)?;
        let q = self.field.q() as i64;
        for (i, c) in self.phi.terms() {
            let expect = if i == q { red.dst.one() } else { Elem::ZERO };
            if red.apply(&c) != expect {
                bail!(Refuted, "φ(T) is not T^q mod π at degree {i}");
            }
        }
        Ok(())
    }

    pub fn pi(&self) -> Elem {
        self.field.pi(&self.ring)
    }

    /// Reduction `O_F/p^c → O_F/π^k` onto the certified digits (`k ≤ certified`).
    pub fn reduction(&self, k: u32) -> Result<RingMap> {
        if k > self.certified {
            bail!(Precision, "only {} π-adic digits are certified", self.certified);
        }
        self.field.projection(self.c, k)
    }

    fn divide_defect(&self, d: &Elem, r: usize) -> Result<Elem> {
        let ring = &self.ring;
        let pi = self.pi();
        let unit = ring.sub(&ring.one(), &ring.pow(&pi, r as u64 - 1));
        let x = self.field.div_pi(ring, d).map_err(|_| crate::error::Error::Precision(format!("defect in degree {r} not divisible by π")))?;
        Ok(ring.mul(&x, &ring.inv(&unit)?))
    }

    /// The formal group law, by solving `φ(F(X,Y)) = F(φ(X),φ(Y))` degree by degree.
    pub fn formal_group(&self) -> Result<Bivariate> {
        let n = self.n;
        let r = &self.ring;
        let deg_phi = self.phi_coeffs.len() - 1;
        let mut f = Bivariate::zero(n);
        f.set(1, 0, r.one());
        f.set(0, 1, r.one());
        // powers[k] = F^k for k ≥ 1, filled degree by degree
        let mut powers: Vec<Bivariate> = vec![Bivariate::zero(n); deg_phi + 1];
        powers[1] = f.clone();
        for k in 2..=deg_phi {
            powers[k] = powers[k - 1].clone();
            powers[k].c.iter_mut().for_each(|x| *x = Elem::ZERO);
        }
        // running F(φX, φY)
        let mut comp = Bivariate::zero(n);
        let add_monomial = |comp: &mut Bivariate, i: usize, j: usize, c: &Elem| {
            let (a, b) = (&self.phi_powers[i], &self.phi_powers[j]);
            for (x, cx) in a.terms() {
                let cxc = r.mul(&cx, c);
                for (y, cy) in b.terms() {
                    let (x, y) = (x as usize, y as usize);
                    if x + y < n {
                        comp.add_at(r, x, y, &r.mul(&cxc, &cy));
                    }
                }
            }
        };
        add_monomial(&mut comp, 1, 0, &r.one());
        add_monomial(&mut comp, 0, 1, &r.one());
        for deg in 2..n {
            for k in 2..=deg_phi {
                for i in 0..=deg {
                    let j = deg - i;
                    let mut acc = Elem::ZERO;
                    for i1 in 0..=i {
                        for j1 in 0..=j {
                            let s = i1 + j1;
                            if s == 0 || s >= deg {
                                continue;
                            }
                            let a = powers[k - 1].get(i1, j1);
                            if r.is_zero(&a) {
                                continue;
                            }
                            let b = f.get(i - i1, j - j1);
                            acc = r.add(&acc, &r.mul(&a, &b));
                        }
                    }
                    powers[k].set(i, j, acc);
                }
            }
            let mut new_terms = Vec::new();
            for i in 0..=deg {
                let j = deg - i;
                let mut rhs = Elem::ZERO;
                for k in 2..=deg_phi {
                    rhs = r.add(&rhs, &r.mul(&self.phi_coeffs[k], &powers[k].get(i, j)));
                }
                let d = r.sub(&comp.get(i, j), &rhs);
                let c = self.divide_defect(&d, deg)?;
                f.set(i, j, c);
                powers[1].set(i, j, c);
                new_terms.push((i, j, c));
            }
            for (i, j, c) in new_terms {
                if !r.is_zero(&c) {
                    add_monomial(&mut comp, i, j, &c);
                }
            }
        }
        Ok(f)
    }

    /// `[a](T)`, by solving `φ([a](T)) = [a](φ(T))` degree by degree.
    pub fn endomorphism(&self, a: &Elem) -> Result<Arc<Endomorphism>> {
        if let Some(e) = self.cache.lock().unwrap().get(a) {
            return Ok(e.clone());
        }
        let n = self.n;
        let r = &self.ring;
        let deg_phi = self.phi_coeffs.len() - 1;
        let mut e = vec![Elem::ZERO; n];
        e[1] = *a;
        let mut powers = vec![vec![Elem::ZERO; n]; deg_phi + 1];
        powers[1] = e.clone();
        let mut comp = vec![Elem::ZERO; n];
        let add_term = |comp: &mut Vec<Elem>, i: usize, c: &Elem| {
            for (x, cx) in self.phi_powers[i].terms() {
                if (x as usize) < n {
                    comp[x as usize] = r.add(&comp[x as usize], &r.mul(&cx, c));
                }
            }
        };
        add_term(&mut comp, 1, a);
        for deg in 2..n {
            let mut rhs = Elem::ZERO;
            for k in 2..=deg_phi {
                let mut acc = Elem::ZERO;
                for s in 1..deg {
                    let x = powers[k - 1][s];
                    if !r.is_zero(&x) {
                        acc = r.add(&acc, &r.mul(&x, &e[deg - s]));
                    }
                }
                powers[k][deg] = acc;
                rhs = r.add(&rhs, &r.mul(&self.phi_coeffs[k], &acc));
            }
            let d = r.sub(&comp[deg], &rhs);
            let c = self.divide_defect(&d, deg)?;
            e[deg] = c;
            powers[1][deg] = c;
            if !r.is_zero(&c) {
                add_term(&mut comp, deg, &c);
            }
        }
        let endo = Arc::new(Endomorphism { a: *a, series: Series::new(r.clone(), 0, e, n as i64) });
        self.cache.lock().unwrap().insert(*a, endo.clone());
        Ok(endo)
    }

    /// `F(u, v)` for power series `u, v` without constant term.
    pub fn group_sum(&self, fgl: &Bivariate, u: &Series, v: &Series) -> Result<Series> {
        let n = fgl.n as i64;
        let mut upow = vec![Series::one(self.ring.clone(), EXACT)];
        let mut vpow = vec![Series::one(self.ring.clone(), EXACT)];
        for i in 1..fgl.n {
            upow.push(upow[i - 1].mul(u)?.truncate(n));
            vpow.push(vpow[i - 1].mul(v)?.truncate(n));
        }
        let mut acc = Series::zero(self.ring.clone(), n);
        for ((i, j), c) in fgl.terms(&self.ring) {
            acc = acc.add(&upow[i].mul(&vpow[j])?.scale(&c))?;
        }
        Ok(acc.truncate(n.min(u.prec()).min(v.prec())))
    }

    /// `f(s(T))` for power series with `v(s) ≥ 1`.
    pub fn compose(&self, f: &Series, s: &Series) -> Result<Series> {
        if s.val() < 1 {
            bail!(Input, "inner series must have positive valuation");
        }
        let n = (self.n as i64).min(f.prec()).min(s.prec());
        let mut acc = Series::zero(self.ring.clone(), n);
        let mut pw = Series::one(self.ring.clone(), EXACT);
        for i in 0..n {
            if i > 0 {
                pw = pw.mul(s)?.truncate(n);
            }
            if pw.val() >= n {
                break;
            }
            acc = acc.add(&pw.scale(&f.coeff(i)))?;
        }
        Ok(acc)
    }

    /// Reduces a series over `O_F/p^c` to the certified digits.
    pub fn certify(&self, s: &Series, k: u32) -> Result<Series> {
        s.map_coeffs(&self.reduction(k)?)
    }

    /// `χ(γ_j) = 1 + π b_j`.
    pub fn gamma_characters(&self) -> Vec<Elem> {
        self.field.gamma_characters(&self.ring)
    }

    /// `μ_{q−1}`, realizing `Δ`.
    pub fn delta_characters(&self) -> Result<Vec<Elem>> {
        if self.field.p() == 2 {
            bail!(Unsupported, "Δ is only supported for odd p");
        }
        Ok(self.field.roots_of_unity(&self.ring))
    }

    /// `T_K = ∏_{ζ ∈ μ_{q−1}} [ζ](T)`.
    pub fn norm_parameter(&self) -> Result<Series> {
        let mut acc = Series::one(self.ring.clone(), EXACT);
        for z in self.delta_characters()? {
            acc = acc.mul(&self.endomorphism(&z)?.series)?;
        }
        Ok(acc.truncate(self.n as i64))
    }
}

/// The four defining identities of a formal group law, tested on the
/// certified digits to total degree `< n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormalGroupReport {
    pub degree: usize,
    pub digits: u32,
    pub unit: bool,
    pub commutative: bool,
    pub associative: bool,
    pub frobenius: bool,
}

impl FormalGroupReport {
    pub fn holds(&self) -> bool {
        self.unit && self.commutative && self.associative && self.frobenius
    }
}

impl LubinTate {
    pub fn check_formal_group(&self, fgl: &Bivariate) -> Result<FormalGroupReport> {
        let red = self.reduction(self.certified)?;
        let r = red.dst.clone();
        let f = fgl.map(&red);
        let n = f.n;
        let one = r.one();
        let unit = (0..n).all(|i| {
            let expect = if i == 1 { one } else { Elem::ZERO };
            f.get(i, 0) == expect && f.get(0, i) == expect
        });
        let commutative = (0..n).all(|i| (0..n - i).all(|j| f.get(i, j) == f.get(j, i)));
        let mut pows = vec![Bivariate::zero(n)];
        pows[0].set(0, 0, one);
        for k in 1..n {
            let next = pows[k - 1].mul(&f, &r);
            pows.push(next);
        }
        // F(F(X,Y),Z) and F(X,F(Y,Z)) as coefficients of X^a Y^b Z^c
        let mut associative = true;
        'outer: for a in 0..n {
            for b in 0..n - a {
                for c in 0..n - a - b {
                    let mut lhs = Elem::ZERO;
                    let mut rhs = Elem::ZERO;
                    for i in 0..n {
                        lhs = r.add(&lhs, &r.mul(&f.get(i, c), &pows[i].get(a, b)));
                        rhs = r.add(&rhs, &r.mul(&f.get(a, i), &pows[i].get(b, c)));
                    }
                    if lhs != rhs {
                        associative = false;
                        break 'outer;
                    }
                }
            }
        }
        let phi: Vec<Series> = self.phi_powers.iter().map(|s| s.map_coeffs(&red)).collect::<Result<_>>()?;
        let phi_c: Vec<Elem> = self.phi_coeffs.iter().map(|c| red.apply(c)).collect();
        let mut frobenius = true;
        'outer2: for a in 0..n {
            for b in 0..n - a {
                let mut lhs = Elem::ZERO;
                for (k, c) in phi_c.iter().enumerate().skip(1) {
                    if k < n {
                        lhs = r.add(&lhs, &r.mul(c, &pows[k].get(a, b)));
                    }
                }
                let mut rhs = Elem::ZERO;
                for i in 0..n {
                    for j in 0..n - i {
                        let c = f.get(i, j);
                        if !r.is_zero(&c) {
                            rhs = r.add(&rhs, &r.mul(&c, &r.mul(&phi[i].coeff(a as i64), &phi[j].coeff(b as i64))));
                        }
                    }
                }
                if lhs != rhs {
                    frobenius = false;
                    break 'outer2;
                }
            }
        }
        Ok(FormalGroupReport { degree: n, digits: self.certified, unit, commutative, associative, frobenius })
    }
}

/// Membership report for `γ(T) − T ∈ (π, T)T·A^+`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub member: bool,
    /// The part `c_1 T` with `c_1 ∈ πA`, as coordinates.
    pub linear: Vec<u64>,
    /// Lowest exponent of the remainder, which must be `≥ 2`.
    pub remainder_valuation: i64,
    pub precision: i64,
}

/// Decomposes `s(T) − T` as `c_1 T + T²·h` and tests `c_1 ∈ π·R`, `v(h) ≥ 0`.
pub fn gamma_gap(s: &Series, uniformizer: &Elem) -> Result<GapReport> {
    let r = s.ring();
    let gap = s.sub(&Series::t(r.clone()))?;
    let lin = gap.coeff(1);
    let in_pi = r.divide(&lin, uniformizer).is_some();
    let rest = gap.sub(&Series::monomial(r.clone(), lin, 1, EXACT))?;
    let no_const = gap.val() >= 1;
    Ok(GapReport {
        member: in_pi && no_const && rest.val() >= 2,
        linear: lin.0[..r.rank()].to_vec(),
        remainder_valuation: rest.val(),
        precision: gap.prec(),
    })
}

/// Certificates that `σ(T_K)/T_K` is integral for each supplied substitution.
pub fn norm_parameter_certificates(tk: &Series, subs: &[&Substitution]) -> Result<Vec<Series>> {
    let inv = tk.invert()?;
    subs.iter()
        .map(|s| {
            let q = s.apply(tk)?.mul(&inv)?;
            Ok(q)
        })
        .collect()
}

/// Writes a series fixed by all `[ζ]` as a series in `T_K`, lowest degree first.
pub fn rewrite_invariant(f: &Series, tk: &Series, deltas: &[Substitution]) -> Result<Series> {
    let r = f.ring().clone();
    for d in deltas {
        let g = d.apply(f)?;
        if let Some(i) = g.first_difference(f) {
            bail!(Refuted, "series is not Δ-invariant: [ζ] changes the coefficient of T^{i}");
        }
    }
    let v = tk.val();
    if v < 1 {
        bail!(Input, "norm parameter must have positive valuation");
    }
    let lead_inv = r.inv(&tk.coeff(v))?;
    let tk_inv = tk.invert()?;
    if f.is_zero() {
        return Ok(Series::zero(r, f.prec().div_euclid(v)));
    }
    let lo = f.val().div_euclid(v);
    let limit = f.prec().min(tk.prec() + (lo - 1).max(0) * v);
    let mut rest = f.clone();
    let mut coeffs = Vec::new();
    let mut k = lo;
    while k * v < limit.min(rest.prec()) {
        let m = k * v;
        if !rest.is_zero() && rest.val() < m {
            bail!(Refuted, "residual term at T^{} is not a power of T_K", rest.val());
        }
        let scale = if k >= 0 { r.pow(&lead_inv, k as u64) } else { r.pow(&tk.coeff(v), (-k) as u64) };
        let c = r.mul(&rest.coeff(m), &scale);
        coeffs.push(c);
        if !r.is_zero(&c) {
            let pw = if k >= 0 { tk.pow(k as u64) } else { tk_inv.pow((-k) as u64) };
            rest = rest.sub(&pw.scale(&c))?;
        }
        k += 1;
    }
    if !rest.is_zero() && rest.val() < k * v {
        bail!(Refuted, "residual term at T^{} after rewriting", rest.val());
    }
    Ok(Series::new(r, lo, coeffs, k))
}

/// Image of the averaging idempotent of a finite group acting on `R^d`
/// through constant matrices (row-major, each `d×d`).
#[derive(Clone, Debug)]
pub struct InvariantProjection {
    pub idempotent: Vec<Elem>,
    /// `log_{|R|}` of the size of the image when it is a free module.
    pub rank: Option<usize>,
    pub image: Vec<Vec<Elem>>,
}

pub fn delta_invariants(r: &FiniteRing, d: usize, reps: &[Vec<Elem>]) -> Result<InvariantProjection> {
    let m = reps.len() as i64;
    let Ok(minv) = r.inv(&r.from_int(m)) else { bail!(NotUnit, "group order {m} is not invertible in the coefficients") };
    let mut e = vec![Elem::ZERO; d * d];
    for g in reps {
        if g.len() != d * d {
            bail!(Input, "representation matrix has the wrong size");
        }
        for (x, y) in e.iter_mut().zip(g) {
            *x = r.add(x, y);
        }
    }
    e.iter_mut().for_each(|x| *x = r.mul(x, &minv));
    let sq = matmul(r, d, &e, &e);
    if sq != e {
        bail!(Refuted, "averaging operator is not idempotent; matrices do not form a group");
    }
    for g in reps {
        if matmul(r, d, g, &e) != e {
            bail!(Refuted, "image of the idempotent is not fixed");
        }
    }
    let n = r.rank();
    let cols: Vec<Vec<Elem>> = (0..d).map(|j| (0..d).map(|i| e[i * d + j]).collect()).collect();
    let amb = crate::zmod::Ambient::new(r.zpm(), (0..d).flat_map(|_| r.exps().iter().copied()).collect());
    let gens: Vec<Vec<u64>> = cols
        .iter()
        .flat_map(|col| (0..n).map(move |b| (col, b)))
        .map(|(col, b)| col.iter().flat_map(|x| r.mul(x, &r.basis(b)).0[..n].to_vec()).collect())
        .collect();
    let size = amb.log_size(&gens);
    let lo = r.log_order();
    let rank = size.is_multiple_of(lo).then(|| (size / lo) as usize);
    Ok(InvariantProjection { idempotent: e, rank, image: cols })
}

fn matmul(r: &FiniteRing, d: usize, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut out = vec![Elem::ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            if r.is_zero(&x) {
                continue;
            }
            for j in 0..d {
                out[i * d + j] = r.add(&out[i * d + j], &r.mul(&x, &b[k * d + j]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::FieldSpec;

    fn q3() -> Arc<LocalField> {
        LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 }).unwrap()
    }

    #[test]
    fn multiplicative_group_law() {
        let lt = LubinTate::new(q3(), PhiKind::Mult, 12, 4).unwrap();
        let f = lt.formal_group().unwrap();
        let red = lt.reduction(lt.certified).unwrap();
        let terms = f.map(&red).terms(&red.dst);
        let one = red.dst.one();
        let expect: BTreeMap<_, _> = [((1, 0), one), ((0, 1), one), ((1, 1), one)].into_iter().collect();
        assert_eq!(terms, expect);
    }

    #[test]
    fn group_law_identities() {
        for kind in [PhiKind::Mult, PhiKind::Std] {
            let lt = LubinTate::new(q3(), kind, 12, 4).unwrap();
            let f = lt.formal_group().unwrap();
            assert!(lt.check_formal_group(&f).unwrap().holds());
            let mut bad = f.clone();
            bad.set(2, 1, lt.ring.add(&f.get(2, 1), &lt.ring.one()));
            let rep = lt.check_formal_group(&bad).unwrap();
            assert!(!rep.commutative && !rep.holds());
        }
    }

    #[test]
    fn endomorphism_of_minus_one_is_binomial() {
        let lt = LubinTate::new(q3(), PhiKind::Mult, 15, 4).unwrap();
        let m1 = lt.endomorphism(&lt.ring.from_int(-1)).unwrap();
        let red = lt.reduction(lt.certified).unwrap();
        let s = m1.series.map_coeffs(&red).unwrap();
        for i in 1..15 {
            let expect = if i % 2 == 0 { 1 } else { -1 };
            assert_eq!(s.coeff(i), red.dst.from_int(expect), "degree {i}");
        }
    }

    #[test]
    fn pi_endomorphism_is_phi() {
        let lt = LubinTate::new(q3(), PhiKind::Std, 15, 4).unwrap();
        let e = lt.endomorphism(&lt.pi()).unwrap();
        let red = lt.reduction(lt.certified).unwrap();
        assert!(e.series.map_coeffs(&red).unwrap().agrees(&lt.phi.map_coeffs(&red).unwrap()));
    }

    #[test]
    fn norm_parameter_for_q3() {
        let lt = LubinTate::new(q3(), PhiKind::Mult, 20, 4).unwrap();
        let tk = lt.norm_parameter().unwrap();
        let red = lt.reduction(4).unwrap();
        let tk = tk.map_coeffs(&red).unwrap();
        let r = red.dst.clone();
        // −T²(1+T)^{-1}
        let expect = Series::from_ints(r.clone(), 0, &[1, 1]).truncate(20).invert().unwrap().mul(&Series::from_ints(r, 2, &[-1])).unwrap();
        assert!(tk.agrees(&expect));
        assert_eq!(tk.val(), 2);
    }

    #[test]
    fn rewrite_sum_over_delta() {
        let lt = LubinTate::new(q3(), PhiKind::Mult, 24, 4).unwrap();
        let red = lt.reduction(4).unwrap();
        let tk = lt.norm_parameter().unwrap().map_coeffs(&red).unwrap();
        let m1 = lt.endomorphism(&lt.ring.from_int(-1)).unwrap().series.map_coeffs(&red).unwrap();
        let deltas = vec![Substitution::new(m1.clone(), 24).unwrap()];
        let f = Series::t(red.dst.clone()).add(&m1).unwrap();
        let g = rewrite_invariant(&f, &tk, &deltas).unwrap();
        assert!(g.agrees(&Series::from_ints(red.dst.clone(), 1, &[-1])));
        let g = rewrite_invariant(&tk, &tk, &deltas).unwrap();
        assert!(g.agrees(&Series::t(red.dst.clone())));
        assert!(rewrite_invariant(&Series::t(red.dst.clone()).truncate(24), &tk, &deltas).is_err());
    }

    #[test]
    fn delta_swap_projection() {
        let r = FiniteRing::new(3, vec![1], vec![vec![1]], vec![1], "F3").unwrap();
        let id = vec![r.one(), Elem::ZERO, Elem::ZERO, r.one()];
        let swap = vec![Elem::ZERO, r.one(), r.one(), Elem::ZERO];
        let p = delta_invariants(&r, 2, &[id, swap]).unwrap();
        assert_eq!(p.rank, Some(1));
    }
}
