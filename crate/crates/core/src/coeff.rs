//! Local fields `F/Q_p`, finite coefficient algebras `A`, and the unramified
//! coefficient algebra `W(k_K) ⊗ A` with its Frobenius, splitting and norm.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::ring::{Elem, FiniteRing, RingMap};
use crate::zmod::GroupMap;

/// Largest `|A|` for which element enumeration is attempted.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Monic irreducible polynomial of degree `r` over the finite field `k`
/// (coefficients lowest first), the first one in lexicographic order.
fn irreducible_poly(k: &FiniteRing, r: u32) -> Result<Vec<Elem>> {
    let elems = k.elements();
    if r == 1 {
        return Ok(vec![k.zero(), k.one()]);
    }
    let size = elems.len() as u64;
    let total = size.checked_pow(r).filter(|&t| t <= ENUMERATION_LIMIT);
    let Some(total) = total else { bail!(Unsupported, "extension of degree {r} over a field of size {size} is too large") };
    for idx in 0..total {
        let mut g = Vec::with_capacity(r as usize + 1);
        let mut t = idx;
        for _ in 0..r {
            g.push(elems[(t % size) as usize]);
            t /= size;
        }
        g.push(k.one());
        if k.is_zero(&g[0]) {
            continue;
        }
        let ext = FiniteRing::extension(k, &g, "candidate")?;
        if ext.units().len() as u64 == total - 1 {
            return Ok(g);
        }
    }
    bail!(Refuted, "no irreducible polynomial of degree {r} found")
}

/// Data of `F = Q_q(π)` with `π` a root of an Eisenstein polynomial with
/// integer coefficients over the unramified subring `Z_q = Z_p[y]/(g)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub f: u32,
    pub e: u32,
    pub eisenstein: Vec<i64>,
    pub precision: u32,
}

#[derive(Debug)]
pub struct LocalField {
    pub spec: FieldSpec,
    unram: Vec<i64>,
    residue: Arc<FiniteRing>,
}

impl LocalField {
    pub fn new(spec: FieldSpec) -> Result<Arc<Self>> {
        let FieldSpec { p, f, e, ref eisenstein, precision } = spec;
        if !is_prime(p) {
            bail!(Input, "{p} is not prime");
        }
        if f == 0 || e == 0 {
            bail!(Input, "degrees must be positive");
        }
        if eisenstein.len() != e as usize + 1 || eisenstein[e as usize] != 1 {
            bail!(Input, "Eisenstein polynomial must be monic of degree {e}");
        }
        let p2 = (p * p) as i64;
        if eisenstein[..e as usize].iter().any(|c| c % p as i64 != 0) || eisenstein[0] % p2 == 0 {
            bail!(Input, "polynomial {:?} is not Eisenstein at {p}", eisenstein);
        }
        if precision == 0 || (p as f64).log2() * precision as f64 > 62.0 {
            bail!(Input, "precision {precision} out of range for p = {p}");
        }
        let fp = FiniteRing::new(p, vec![1], vec![vec![1]], vec![1], format!("F_{p}"))?;
        let g = irreducible_poly(&fp, f)?;
        let unram: Vec<i64> = g.iter().map(|c| c.0[0] as i64).collect();
        let residue = if f == 1 { fp } else { FiniteRing::extension(&fp, &g, format!("F_{}", p.pow(f)))? };
        Ok(Arc::new(LocalField { spec, unram, residue: Arc::new(residue) }))
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }
    pub fn f(&self) -> u32 {
        self.spec.f
    }
    pub fn e(&self) -> u32 {
        self.spec.e
    }
    pub fn q(&self) -> u64 {
        self.spec.p.pow(self.spec.f)
    }
    /// `[F : Q_p]`, the number of chosen Γ generators.
    pub fn degree(&self) -> usize {
        (self.spec.e * self.spec.f) as usize
    }
    pub fn residue_field(&self) -> Arc<FiniteRing> {
        self.residue.clone()
    }
    /// Largest `c` with `p^c` fitting comfortably in a machine word.
    pub fn max_precision(&self) -> u32 {
        (62.0 / (self.spec.p as f64).log2()).floor() as u32
    }

    /// `O_F/p^c`, with basis `π^i y^j` at index `i·f + j`.
    pub fn integers(&self, c: u32) -> Result<Arc<FiniteRing>> {
        let (p, f, e) = (self.spec.p, self.spec.f, self.spec.e);
        if c == 0 || c > self.max_precision() {
            bail!(Precision, "p-adic precision {c} out of range");
        }
        let zp = FiniteRing::new(p, vec![c], vec![vec![1]], vec![1], format!("Z/{p}^{c}"))?;
        let zq = if f == 1 {
            zp
        } else {
            let g: Vec<Elem> = self.unram.iter().map(|&x| zp.from_int(x)).collect();
            FiniteRing::extension(&zp, &g, "Z_q")?
        };
        let of = if e == 1 {
            zq
        } else {
            let g: Vec<Elem> = self.spec.eisenstein.iter().map(|&x| zq.from_int(x)).collect();
            FiniteRing::extension(&zq, &g, "O_F")?
        };
        let of = of.relabel(format!("O_F/p^{c}"));
        Ok(Arc::new(of))
    }

    /// Exponents of the coordinates of `O_F/π^a` in the basis of [`Self::integers`].
    pub fn truncation_exps(&self, a: u32) -> Vec<u32> {
        let (f, e) = (self.spec.f, self.spec.e);
        (0..e * f)
            .map(|k| {
                let i = k / f;
                if a > i {
                    (a - i).div_ceil(e)
                } else {
                    0
                }
            })
            .collect()
    }

    /// Projection `O_F/p^c → O_F/π^a`.
    pub fn projection(&self, c: u32, a: u32) -> Result<RingMap> {
        if a == 0 || self.spec.e * c < a {
            bail!(Precision, "O_F/p^{c} does not surject onto O_F/π^{a}");
        }
        self.integers(c)?.quotient(&self.truncation_exps(a), format!("O_F/π^{a}"))
    }

    /// The uniformizer in `O_F/p^c`.
    pub fn pi(&self, ring: &FiniteRing) -> Elem {
        if self.spec.e == 1 {
            ring.from_int(-self.spec.eisenstein[0])
        } else {
            ring.basis(self.spec.f as usize)
        }
    }

    /// The unit `v` with `π^e = p·v`.
    fn pi_power_unit(&self, ring: &FiniteRing) -> Elem {
        let pi = self.pi(ring);
        let mut v = ring.zero();
        let mut pw = ring.one();
        for &c in &self.spec.eisenstein[..self.spec.e as usize] {
            v = ring.sub(&v, &ring.scale(pw, ring.zpm().from_i64(c / self.spec.p as i64)));
            pw = ring.mul(&pw, &pi);
        }
        v
    }

    /// Exact division by `π` in `O_F/p^c`; the top p-adic digit of the
    /// quotient is undetermined and set to zero.
    pub fn div_pi(&self, ring: &FiniteRing, x: &Elem) -> Result<Elem> {
        let pi = self.pi(ring);
        let v = self.pi_power_unit(ring);
        let y = ring.mul(&ring.mul(x, &ring.pow(&pi, self.spec.e as u64 - 1)), &ring.inv(&v)?);
        let p = self.spec.p;
        let mut out = Elem::ZERO;
        for k in 0..ring.rank() {
            if !y.0[k].is_multiple_of(p) {
                bail!(Precision, "value not divisible by π at working precision");
            }
            out.0[k] = y.0[k] / p;
        }
        Ok(out)
    }

    /// Teichmüller representative of `x` in `O_F/p^c`.
    pub fn teichmuller(&self, ring: &FiniteRing, x: &Elem) -> Elem {
        let mut y = *x;
        for _ in 0..=ring.zpm().m + 1 {
            let z = ring.pow(&y, self.q());
            if z == y {
                break;
            }
            y = z;
        }
        y
    }

    /// The roots of unity `μ_{q−1}` in `O_F/p^c`, ordered by residue.
    pub fn roots_of_unity(&self, ring: &FiniteRing) -> Vec<Elem> {
        let f = self.spec.f as usize;
        self.residue
            .elements()
            .into_iter()
            .filter(|z| !self.residue.is_zero(z))
            .map(|z| {
                let mut x = Elem::ZERO;
                x.0[..f].copy_from_slice(&z.0[..f]);
                self.teichmuller(ring, &x)
            })
            .collect()
    }

    /// `1 + π·b_k` for the basis `b_k = π^i y^j` of `O_F`; the values
    /// `χ(γ_k)` of the chosen topological generators of `Γ`.
    pub fn gamma_characters(&self, ring: &FiniteRing) -> Vec<Elem> {
        let pi = self.pi(ring);
        (0..ring.rank()).map(|k| ring.add(&ring.one(), &ring.mul(&pi, &ring.basis(k)))).collect()
    }

    /// Checks `Γ ≅ 1 + πO_F` has no torsion, which the generator choice needs.
    pub fn check_gamma_torsion_free(&self) -> Result<()> {
        if self.spec.e + 1 >= self.spec.p as u32 && self.spec.e.is_multiple_of(self.spec.p as u32 - 1) {
            bail!(Unsupported, "1 + πO_F may contain p-torsion for p = {}, e = {}", self.spec.p, self.spec.e);
        }
        if self.spec.p == 2 {
            bail!(Unsupported, "p = 2 is not supported for Γ and Δ");
        }
        Ok(())
    }
}

/// Description of a finite coefficient algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoeffSpec {
    /// `O_E/π^a` with `E/F` unramified of the given degree.
    Quotient {
        a: u32,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        degree: u32,
    },
    /// The extension of the residue field of the given degree.
    FiniteField {
        degree: u32,
    },
    Product {
        factors: Vec<CoeffSpec>,
    },
    /// The split square-zero extension `B ⊕ B^rank` of a local `B`.
    SquareZero {
        base: Box<CoeffSpec>,
        rank: u32,
    },
}

fn one() -> u32 {
    1
}
fn is_one(x: &u32) -> bool {
    *x == 1
}

impl CoeffSpec {
    fn local_params(&self) -> Option<(u32, u32)> {
        match *self {
            CoeffSpec::Quotient { a, degree } => Some((a, degree)),
            CoeffSpec::FiniteField { degree } => Some((1, degree)),
            CoeffSpec::Product { .. } | CoeffSpec::SquareZero { .. } => None,
        }
    }
}

/// A finite `O_F`-algebra.
#[derive(Debug)]
pub struct CoeffAlgebra {
    pub spec: CoeffSpec,
    pub field: Arc<LocalField>,
    pub ring: Arc<FiniteRing>,
    /// Structure map `O_F/π^a → A`.
    pub structure: RingMap,
    /// Least `a` with `π^a = 0` in `A`.
    pub a: u32,
    /// Image of `π`, the uniformizer of the coefficient ring.
    pub uniformizer: Elem,
    /// Size of the residue field when `A` is local.
    pub residue_size: Option<u64>,
}

impl CoeffAlgebra {
    pub fn new(field: Arc<LocalField>, spec: CoeffSpec) -> Result<Arc<Self>> {
        match &spec {
            CoeffSpec::Product { factors } => {
                if factors.is_empty() {
                    bail!(Input, "empty product");
                }
                let parts: Vec<Arc<CoeffAlgebra>> = factors.iter().map(|s| CoeffAlgebra::new(field.clone(), s.clone())).collect::<Result<_>>()?;
                let a = parts.iter().map(|c| c.a).max().unwrap();
                let rings: Vec<Arc<FiniteRing>> = parts.iter().map(|c| c.ring.clone()).collect();
                let ring = Arc::new(FiniteRing::product(&rings, "A")?);
                let c = a.div_ceil(field.e());
                let src = field.projection(c, a)?;
                let base = src.dst.clone();
                let mut images = vec![Elem::ZERO; base.rank()];
                let mut offset = 0;
                for part in &parts {
                    let down = field.projection(c, part.a)?;
                    for (k, img) in images.iter_mut().enumerate() {
                        // basis k of O_F/π^a is the image of basis k of O_F/p^c
                        let x = part.structure.apply(&down.apply(&down.src.basis(k)));
                        for l in 0..part.ring.rank() {
                            img.0[offset + l] = x.0[l];
                        }
                    }
                    offset += part.ring.rank();
                }
                let structure = RingMap::new(base, ring.clone(), images)?;
                structure.verify_homomorphism()?;
                let pi = field.pi(&src.src);
                let uniformizer = structure.apply(&src.apply(&pi));
                Ok(Arc::new(CoeffAlgebra { spec, field, ring, structure, a, uniformizer, residue_size: None }))
            }
            CoeffSpec::SquareZero { base, rank } => {
                if *rank == 0 {
                    bail!(Input, "square-zero extension needs a positive rank");
                }
                let inner = CoeffAlgebra::new(field.clone(), (**base).clone())?;
                if inner.residue_size.is_none() {
                    bail!(Unsupported, "square-zero extensions of products are not supported");
                }
                let ring = Arc::new(FiniteRing::square_zero(&inner.ring, *rank as usize, "A[F]")?);
                let k = inner.ring.rank();
                let incl = RingMap::new(inner.ring.clone(), ring.clone(), (0..k).map(|i| ring.basis(i)).collect())?;
                let structure = inner.structure.compose(&incl)?;
                structure.verify_homomorphism()?;
                let uniformizer = incl.apply(&inner.uniformizer);
                let a = inner.a;
                let residue_size = inner.residue_size;
                Ok(Arc::new(CoeffAlgebra { spec, field, ring, structure, a, uniformizer, residue_size }))
            }
            _ => {
                let (a, degree) = spec.local_params().unwrap();
                if a == 0 || degree == 0 {
                    bail!(Input, "coefficient parameters must be positive");
                }
                let c = a.div_ceil(field.e());
                let src = field.projection(c, a)?;
                let base = src.dst.clone();
                let (ring, structure) = if degree == 1 {
                    (base.clone(), RingMap::identity(base.clone()))
                } else {
                    let g = irreducible_poly(&field.residue, degree)?;
                    let f = field.f() as usize;
                    let lift: Vec<Elem> = g
                        .iter()
                        .map(|z| {
                            let mut x = Elem::ZERO;
                            x.0[..f].copy_from_slice(&z.0[..f]);
                            x
                        })
                        .collect();
                    let ring = Arc::new(FiniteRing::extension(&base, &lift, "A")?);
                    let images = (0..base.rank()).map(|k| ring.basis(k)).collect();
                    (ring.clone(), RingMap::new(base.clone(), ring, images)?)
                };
                structure.verify_homomorphism()?;
                let pi = field.pi(&src.src);
                let uniformizer = structure.apply(&src.apply(&pi));
                let residue_size = field.q().checked_pow(degree);
                Ok(Arc::new(CoeffAlgebra { spec, field, ring, structure, a, uniformizer, residue_size }))
            }
        }
    }

    /// The structure map from `O_F/p^c`.
    pub fn of_map(&self, c: u32) -> Result<RingMap> {
        let proj = self.field.projection(c, self.a)?;
        // re-target onto the stored copy of O_F/π^a
        let proj = RingMap::new(proj.src.clone(), self.structure.src.clone(), proj.images.clone())?;
        proj.compose(&self.structure)
    }

    /// Coordinatewise reduction `A → B` between local algebras of the same
    /// unramified degree with `b ≤ a`, or the identity.
    pub fn reduction_to(&self, other: &CoeffAlgebra) -> Result<RingMap> {
        if self.field.spec != other.field.spec {
            bail!(Mismatch, "coefficient algebras over different fields");
        }
        if *self.ring == *other.ring {
            let images = (0..self.ring.rank()).map(|k| other.ring.basis(k)).collect();
            return RingMap::new(self.ring.clone(), other.ring.clone(), images);
        }
        let (Some((a, d)), Some((b, d2))) = (self.spec.local_params(), other.spec.local_params()) else {
            bail!(Unsupported, "base change between products is not supported");
        };
        if d != d2 || b > a {
            bail!(Unsupported, "no reduction map from {:?} to {:?}", self.spec, other.spec);
        }
        let k = self.structure.src.rank();
        let k2 = other.structure.src.rank();
        let images = (0..self.ring.rank())
            .map(|idx| {
                let (u, l) = (idx / k, idx % k);
                if l < k2 {
                    other.ring.basis(u * k2 + l)
                } else {
                    Elem::ZERO
                }
            })
            .collect();
        let map = RingMap::new(self.ring.clone(), other.ring.clone(), images)?;
        map.verify_homomorphism()?;
        Ok(map)
    }
}

/// `W_{O_F}(k_K) ⊗_{O_F} A` for `K/F` unramified of degree `r`, presented as
/// `A[t]/(G)` with `G` a lift of an irreducible polynomial over `k_F`.
#[derive(Debug)]
pub struct WittCoeff {
    pub coeff: Arc<CoeffAlgebra>,
    pub r: u32,
    pub ring: Arc<FiniteRing>,
    /// `A → W ⊗ A`.
    pub incl: RingMap,
    /// The `q`-power Frobenius, `A`-linear.
    pub frob: RingMap,
    poly: Vec<Elem>,
    split: OnceLock<std::result::Result<RingMap, crate::error::Error>>,
}

impl WittCoeff {
    pub fn new(coeff: Arc<CoeffAlgebra>, r: u32) -> Result<Arc<Self>> {
        if r == 0 {
            bail!(Input, "unramified degree must be positive");
        }
        let field = &coeff.field;
        let a_ring = &coeff.ring;
        let g = irreducible_poly(&field.residue, r)?;
        let f = field.f() as usize;
        let c = coeff.a.div_ceil(field.e());
        let ofmap = coeff.of_map(c)?;
        let poly: Vec<Elem> = g
            .iter()
            .map(|z| {
                let mut x = Elem::ZERO;
                x.0[..f].copy_from_slice(&z.0[..f]);
                ofmap.apply(&x)
            })
            .collect();
        let ring = Arc::new(FiniteRing::extension(a_ring, &poly, "W(k_K)⊗A")?);
        let k = a_ring.rank();
        let incl = RingMap::new(a_ring.clone(), ring.clone(), (0..k).map(|i| ring.basis(i)).collect())?;
        incl.verify_homomorphism()?;
        let lifted: Vec<Elem> = poly.iter().map(|x| incl.apply(x)).collect();
        let t = if r == 1 { ring.zero() } else { ring.basis(k) };
        let eval = |x: &Elem, pol: &[Elem]| -> Elem { pol.iter().rev().fold(ring.zero(), |acc, c| ring.add(&ring.mul(&acc, x), c)) };
        let deriv: Vec<Elem> = lifted.iter().enumerate().skip(1).map(|(i, c)| ring.scale(*c, i as u64)).collect();
        let mut theta = ring.pow(&t, field.q());
        let mut done = false;
        for _ in 0..128 {
            let val = eval(&theta, &lifted);
            if ring.is_zero(&val) {
                done = true;
                break;
            }
            let d = ring.inv(&eval(&theta, &deriv))?;
            theta = ring.sub(&theta, &ring.mul(&val, &d));
        }
        if !done {
            bail!(Precision, "Frobenius root did not converge");
        }
        let mut images = Vec::with_capacity(ring.rank());
        let mut pw = ring.one();
        for _ in 0..r {
            for i in 0..k {
                images.push(ring.mul(&pw, &ring.basis(i)));
            }
            pw = ring.mul(&pw, &theta);
        }
        let frob = RingMap::new(ring.clone(), ring.clone(), images)?;
        frob.verify_homomorphism()?;
        let w = WittCoeff { coeff, r, ring, incl, frob, poly, split: OnceLock::new() };
        let mut it = RingMap::identity(w.ring.clone());
        for _ in 0..r {
            it = it.compose(&w.frob)?;
        }
        if it.images != RingMap::identity(w.ring.clone()).images {
            bail!(Refuted, "Frobenius does not have order dividing r");
        }
        Ok(Arc::new(w))
    }

    pub fn a_ring(&self) -> &Arc<FiniteRing> {
        &self.coeff.ring
    }

    pub fn frob_pow(&self, x: &Elem, j: u32) -> Elem {
        (0..j % self.r).fold(*x, |y, _| self.frob.apply(&y))
    }

    /// Structure map `O_F/p^c → W ⊗ A`.
    pub fn of_map(&self, c: u32) -> Result<RingMap> {
        self.coeff.of_map(c)?.compose(&self.incl)
    }

    /// Projection onto the `A`-coefficient of `t^0`, defined on the image of `A`.
    pub fn to_a(&self, x: &Elem) -> Option<Elem> {
        let k = self.a_ring().rank();
        if x.0[k..self.ring.rank()].iter().any(|&c| c != 0) {
            return None;
        }
        let mut y = Elem::ZERO;
        y.0[..k].copy_from_slice(&x.0[..k]);
        Some(y)
    }

    /// The splitting isomorphism `x ↦ (ι(x), ι(φx), …, ι(φ^{r−1}x))` onto `∏ A`.
    pub fn split_map(&self) -> Result<&RingMap> {
        self.split.get_or_init(|| self.build_split()).as_ref().map_err(|e| e.clone())
    }

    fn build_split(&self) -> Result<RingMap> {
        let a = self.a_ring();
        if a.order().is_none_or(|o| o > ENUMERATION_LIMIT) {
            bail!(Unsupported, "coefficient ring too large to search for a root");
        }
        let factors: Vec<Arc<FiniteRing>> = (0..self.r).map(|_| a.clone()).collect();
        let prod = Arc::new(FiniteRing::product(&factors, "∏A")?);
        let k = a.rank();
        for alpha in a.elements() {
            let val = self.poly.iter().rev().fold(a.zero(), |acc, c| a.add(&a.mul(&acc, &alpha), c));
            if !a.is_zero(&val) {
                continue;
            }
            let iota = |x: &Elem| -> Elem {
                let mut out = a.zero();
                let mut pw = a.one();
                for u in 0..self.r as usize {
                    let mut cu = Elem::ZERO;
                    cu.0[..k].copy_from_slice(&x.0[u * k..u * k + k]);
                    out = a.add(&out, &a.mul(&cu, &pw));
                    pw = a.mul(&pw, &alpha);
                }
                out
            };
            let images: Vec<Elem> = (0..self.ring.rank())
                .map(|b| {
                    let mut img = Elem::ZERO;
                    let mut x = self.ring.basis(b);
                    for j in 0..self.r as usize {
                        let y = iota(&x);
                        img.0[j * k..j * k + k].copy_from_slice(&y.0[..k]);
                        x = self.frob.apply(&x);
                    }
                    img
                })
                .collect();
            let map = RingMap::new(self.ring.clone(), prod.clone(), images)?;
            if map.verify_homomorphism().is_err() {
                continue;
            }
            let gm = GroupMap::new(self.ring.ambient(), prod.ambient(), map.images.iter().map(|x| x.0[..prod.rank()].to_vec()).collect());
            if gm.kernel().is_empty() {
                return Ok(map);
            }
        }
        bail!(Unsupported, "r = {} incompatible with A: no splitting root", self.r)
    }

    /// Inverse of the splitting isomorphism.
    pub fn unsplit(&self, parts: &[Elem]) -> Result<Elem> {
        let split = self.split_map()?;
        let k = self.a_ring().rank();
        let mut target = vec![0u64; split.dst.rank()];
        for (j, x) in parts.iter().enumerate() {
            target[j * k..j * k + k].copy_from_slice(&x.0[..k]);
        }
        let gm = GroupMap::new(self.ring.ambient(), split.dst.ambient(), split.images.iter().map(|x| x.0[..split.dst.rank()].to_vec()).collect());
        let Some(sol) = gm.solve(&target) else { bail!(Refuted, "splitting map is not surjective") };
        Ok(self.ring.from_coords(&sol.iter().map(|&c| c as i64).collect::<Vec<_>>()))
    }

    /// `N(x) = x·φ(x)···φ^{r−1}(x)`, an element of `A`.
    pub fn norm(&self, x: &Elem) -> Result<Elem> {
        if !self.ring.is_unit(x) {
            bail!(NotUnit, "norm of a non-unit");
        }
        let mut y = *x;
        let mut n = *x;
        for _ in 1..self.r {
            y = self.frob.apply(&y);
            n = self.ring.mul(&n, &y);
        }
        self.to_a(&n).ok_or_else(|| crate::error::Error::Refuted("norm is not Frobenius-invariant".into()))
    }

    /// Some `x` with `N(x) = a`.
    pub fn norm_fibre(&self, a: &Elem) -> Result<Elem> {
        let ar = self.a_ring();
        if !ar.is_unit(a) {
            bail!(NotUnit, "norm fibre over a non-unit");
        }
        if self.split_map().is_ok() {
            let mut parts = vec![ar.one(); self.r as usize];
            parts[0] = *a;
            return self.unsplit(&parts);
        }
        if self.ring.order().is_none_or(|o| o > ENUMERATION_LIMIT) {
            bail!(Unsupported, "ring too large for a norm search");
        }
        for x in self.ring.elements() {
            if self.ring.is_unit(&x) && self.norm(&x)? == *a {
                return Ok(x);
            }
        }
        bail!(Refuted, "{:?} is not a norm", a)
    }

    /// `{φ(y)/y : y ∈ (W⊗A)^×}`.
    pub fn norm_kernel(&self) -> Result<BTreeSet<Elem>> {
        if self.ring.order().is_none_or(|o| o > ENUMERATION_LIMIT) {
            bail!(Unsupported, "ring too large to enumerate");
        }
        let mut out = BTreeSet::new();
        for y in self.ring.units() {
            out.insert(self.ring.mul(&self.frob.apply(&y), &self.ring.inv(&y)?));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn q3() -> Arc<LocalField> {
        LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 }).unwrap()
    }

    #[test]
    fn ramified_field_arithmetic() {
        let f = LocalField::new(FieldSpec { p: 3, f: 1, e: 2, eisenstein: vec![-3, 0, 1], precision: 8 }).unwrap();
        let r = f.integers(4).unwrap();
        r.verify_axioms().unwrap();
        let pi = f.pi(&r);
        assert_eq!(r.mul(&pi, &pi), r.from_int(3));
        let x = r.mul(&pi, &r.from_int(5));
        assert_eq!(r.mul(&f.div_pi(&r, &x).unwrap(), &pi), x);
        let t = f.projection(4, 3).unwrap();
        assert_eq!(t.dst.log_order(), 3);
    }

    #[test]
    fn unramified_field_and_roots_of_unity() {
        let f = LocalField::new(FieldSpec { p: 3, f: 2, e: 1, eisenstein: vec![-3, 1], precision: 8 }).unwrap();
        assert_eq!(f.q(), 9);
        let r = f.integers(3).unwrap();
        let mu = f.roots_of_unity(&r);
        assert_eq!(mu.len(), 8);
        for z in &mu {
            assert_eq!(r.pow(z, 8), r.one());
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LocalField::new(FieldSpec { p: 4, f: 1, e: 1, eisenstein: vec![-4, 1], precision: 4 }).is_err());
        assert!(LocalField::new(FieldSpec { p: 3, f: 1, e: 2, eisenstein: vec![-9, 0, 1], precision: 4 }).is_err());
        assert!(LocalField::new(FieldSpec { p: 3, f: 1, e: 2, eisenstein: vec![-3, 1, 1], precision: 4 }).is_err());
    }

    #[test]
    fn finite_field_norm() {
        let f = q3();
        let a = CoeffAlgebra::new(f.clone(), CoeffSpec::FiniteField { degree: 2 }).unwrap();
        assert_eq!(a.ring.order(), Some(9));
        let w = WittCoeff::new(a, 2).unwrap();
        assert_eq!(w.ring.order(), Some(81));
        let split = w.split_map().unwrap();
        split.verify_homomorphism().unwrap();
        let one = w.a_ring().one();
        assert_eq!(w.norm_fibre(&one).unwrap(), w.ring.one());
    }

    #[test]
    fn z9_rank_two_has_no_split() {
        let a = CoeffAlgebra::new(q3(), CoeffSpec::Quotient { a: 2, degree: 1 }).unwrap();
        let w = WittCoeff::new(a, 2).unwrap();
        assert!(w.split_map().is_err());
        let ar = w.a_ring().clone();
        for u in ar.units() {
            let x = w.norm_fibre(&u).unwrap();
            assert_eq!(w.norm(&x).unwrap(), u);
        }
    }

    #[test]
    fn reduction_z9_to_z3() {
        let f = q3();
        let a = CoeffAlgebra::new(f.clone(), CoeffSpec::Quotient { a: 2, degree: 1 }).unwrap();
        let b = CoeffAlgebra::new(f, CoeffSpec::Quotient { a: 1, degree: 1 }).unwrap();
        let m = a.reduction_to(&b).unwrap();
        assert_eq!(m.apply(&a.ring.from_int(5)), b.ring.from_int(2));
    }
}
