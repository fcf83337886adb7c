//! Finite commutative rings of p-power order.
//!
//! A ring is a free-looking module `⊕ Z/p^{e_i}` with a multiplication table
//! on the basis. All coefficient rings used in the crate (`O_F/π^a`,
//! `O_F/p^c`, finite fields, products, Witt-coefficient extensions) are
//! presented this way, so one element type serves everywhere.

use std::fmt;
use std::sync::Arc;

use crate::error::{bail, Result};
use crate::zmod::{Ambient, GroupMap, ZpM};

pub const MAX_RANK: usize = 8;

/// Coordinates of a ring element in the ring's basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Elem(pub [u64; MAX_RANK]);

impl Elem {
    pub const ZERO: Elem = Elem([0; MAX_RANK]);

    pub fn coords(&self, rank: usize) -> &[u64] {
        &self.0[..rank]
    }

    pub fn from_slice(c: &[u64]) -> Elem {
        let mut e = Elem::ZERO;
        e.0[..c.len()].copy_from_slice(c);
        e
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&x| x != 0).map_or(1, |i| i + 1);
        write!(f, "{:?}", &self.0[..last])
    }
}

#[derive(Clone)]
pub struct FiniteRing {
    p: u64,
    exps: Vec<u32>,
    mods: Vec<u64>,
    zpm: ZpM,
    table: Vec<Elem>,
    one: Elem,
    label: String,
}

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteRing({}, p={}, exps={:?})", self.label, self.p, self.exps)
    }
}

impl PartialEq for FiniteRing {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.exps == other.exps && self.table == other.table && self.one == other.one
    }
}

impl FiniteRing {
    /// Builds a ring from structure constants. `table[i * rank + j]` is the
    /// product of basis elements `i` and `j`. Coordinates with exponent zero
    /// are dropped.
    pub fn new(p: u64, exps: Vec<u32>, table: Vec<Vec<i64>>, one: Vec<i64>, label: impl Into<String>) -> Result<Self> {
        let rank = exps.len();
        if table.len() != rank * rank || one.len() != rank {
            bail!(Input, "structure constants have the wrong shape");
        }
        let keep: Vec<usize> = (0..rank).filter(|&i| exps[i] > 0).collect();
        if keep.len() > MAX_RANK {
            bail!(Unsupported, "ring rank {} exceeds {}", keep.len(), MAX_RANK);
        }
        if keep.is_empty() {
            bail!(Input, "zero ring");
        }
        let top = *exps.iter().max().unwrap();
        let zpm = ZpM::new(p, top);
        let new_exps: Vec<u32> = keep.iter().map(|&i| exps[i]).collect();
        let mods: Vec<u64> = new_exps.iter().map(|&e| p.pow(e)).collect();
        let pack = |v: &[i64]| -> Elem {
            let mut e = Elem::ZERO;
            for (k, &i) in keep.iter().enumerate() {
                e.0[k] = v[i].rem_euclid(mods[k] as i64) as u64;
            }
            e
        };
        let r = keep.len();
        let mut tab = vec![Elem::ZERO; r * r];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                tab[a * r + b] = pack(&table[i * rank + j]);
            }
        }
        let one = pack(&one);
        let ring = FiniteRing { p, exps: new_exps, mods, zpm, table: tab, one, label: label.into() };
        Ok(ring)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn rank(&self) -> usize {
        self.exps.len()
    }
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }
    pub fn zpm(&self) -> ZpM {
        self.zpm
    }
    /// Additive group of the ring, as an ambient group for linear algebra.
    pub fn ambient(&self) -> Ambient {
        Ambient::new(self.zpm, self.exps.clone())
    }
    /// `log_p` of the cardinality.
    pub fn log_order(&self) -> u64 {
        self.exps.iter().map(|&e| e as u64).sum()
    }
    pub fn basis_product(&self, i: usize, j: usize) -> Elem {
        self.table[i * self.rank() + j]
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }
    pub fn one(&self) -> Elem {
        self.one
    }

    pub fn basis(&self, i: usize) -> Elem {
        let mut e = Elem::ZERO;
        e.0[i] = 1;
        e
    }

    pub fn from_coords(&self, c: &[i64]) -> Elem {
        let mut e = Elem::ZERO;
        for (k, m) in self.mods.iter().enumerate() {
            e.0[k] = c.get(k).copied().unwrap_or(0).rem_euclid(*m as i64) as u64;
        }
        e
    }

    pub fn from_int(&self, n: i64) -> Elem {
        let t = self.zpm.from_i64(n);
        self.scale(self.one, t)
    }

    #[inline]
    pub fn is_zero(&self, x: &Elem) -> bool {
        x.0[..self.rank()].iter().all(|&c| c == 0)
    }

    #[inline]
    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let mut r = Elem::ZERO;
        for k in 0..self.rank() {
            let s = a.0[k] + b.0[k];
            r.0[k] = if s >= self.mods[k] { s - self.mods[k] } else { s };
        }
        r
    }

    #[inline]
    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let mut r = Elem::ZERO;
        for k in 0..self.rank() {
            r.0[k] = if a.0[k] >= b.0[k] { a.0[k] - b.0[k] } else { a.0[k] + self.mods[k] - b.0[k] };
        }
        r
    }

    #[inline]
    pub fn neg(&self, a: &Elem) -> Elem {
        self.sub(&Elem::ZERO, a)
    }

    /// Multiplication by an integer residue mod `p^top`.
    pub fn scale(&self, a: Elem, t: u64) -> Elem {
        let mut r = Elem::ZERO;
        for k in 0..self.rank() {
            r.0[k] = ((a.0[k] as u128 * t as u128) % self.mods[k] as u128) as u64;
        }
        r
    }

    #[inline]
    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let n = self.rank();
        if n == 1 {
            let mut r = Elem::ZERO;
            r.0[0] =
                ((a.0[0] as u128 * b.0[0] as u128 % self.mods[0] as u128) as u64 as u128 * self.table[0].0[0] as u128 % self.mods[0] as u128) as u64;
            return r;
        }
        let top = self.zpm.modulus as u128;
        let mut acc = [0u128; MAX_RANK];
        for i in 0..n {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..n {
                if b.0[j] == 0 {
                    continue;
                }
                let c = (a.0[i] as u128 * b.0[j] as u128) % top;
                let t = &self.table[i * n + j];
                for k in 0..n {
                    if t.0[k] != 0 {
                        acc[k] = (acc[k] + c * t.0[k] as u128) % top;
                    }
                }
            }
        }
        let mut r = Elem::ZERO;
        for k in 0..n {
            r.0[k] = (acc[k] % self.mods[k] as u128) as u64;
        }
        r
    }

    pub fn pow(&self, a: &Elem, mut e: u64) -> Elem {
        let mut base = *a;
        let mut r = self.one;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    /// Matrix of `y ↦ x·y` modulo `p`, as rows indexed by basis `j` (image of `b_j`).
    fn mult_rows_mod_p(&self, x: &Elem) -> Vec<Vec<u64>> {
        (0..self.rank())
            .map(|j| {
                let y = self.mul(x, &self.basis(j));
                (0..self.rank()).map(|k| y.0[k] % self.p).collect()
            })
            .collect()
    }

    pub fn is_unit(&self, x: &Elem) -> bool {
        self.inv_mod_p(x).is_some()
    }

    pub fn is_nilpotent(&self, x: &Elem) -> bool {
        self.is_zero(&self.pow(x, self.log_order().max(1)))
    }

    /// Inverse in `R/pR` lifted to a representative.
    fn inv_mod_p(&self, x: &Elem) -> Option<Elem> {
        let fp = ZpM::new(self.p, 1);
        let n = self.rank();
        let rows = self.mult_rows_mod_p(x);
        let map = GroupMap::new(Ambient::new(fp, vec![1; n]), Ambient::new(fp, vec![1; n]), rows);
        let one: Vec<u64> = (0..n).map(|k| self.one.0[k] % self.p).collect();
        let sol = map.solve(&one)?;
        // x·y = 1 mod p must hold with y unique when x is a unit; the kernel
        // of multiplication by a unit is trivial.
        if !map.kernel().is_empty() {
            return None;
        }
        let mut e = Elem::ZERO;
        e.0[..n].copy_from_slice(&sol);
        Some(e)
    }

    pub fn inv(&self, x: &Elem) -> Result<Elem> {
        let Some(mut y) = self.inv_mod_p(x) else { bail!(NotUnit, "{:?} is not a unit in {}", x, self.label) };
        let two = self.from_int(2);
        for _ in 0..64 {
            let xy = self.mul(x, &y);
            if xy == self.one {
                return Ok(y);
            }
            y = self.mul(&y, &self.sub(&two, &xy));
        }
        bail!(NotUnit, "Newton lift failed for {:?}", x)
    }

    /// Some `y` with `g·y = x`.
    pub fn divide(&self, x: &Elem, g: &Elem) -> Option<Elem> {
        let n = self.rank();
        let rows: Vec<Vec<u64>> = (0..n).map(|j| self.mul(g, &self.basis(j)).0[..n].to_vec()).collect();
        let map = GroupMap::new(self.ambient(), self.ambient(), rows);
        let sol = map.solve(&x.0[..n])?;
        let mut e = Elem::ZERO;
        e.0[..n].copy_from_slice(&sol);
        Some(e)
    }

    /// All elements, for exhaustive checks on small rings.
    pub fn elements(&self) -> Vec<Elem> {
        let mut out = vec![Elem::ZERO];
        for k in 0..self.rank() {
            let mut next = Vec::with_capacity(out.len() * self.mods[k] as usize);
            for e in &out {
                for c in 0..self.mods[k] {
                    let mut f = *e;
                    f.0[k] = c;
                    next.push(f);
                }
            }
            out = next;
        }
        out
    }

    pub fn units(&self) -> Vec<Elem> {
        self.elements().into_iter().filter(|x| self.is_unit(x)).collect()
    }

    /// Checks commutativity, associativity and the unit on basis triples.
    pub fn verify_axioms(&self) -> Result<()> {
        let n = self.rank();
        for i in 0..n {
            let bi = self.basis(i);
            if self.mul(&self.one, &bi) != bi {
                bail!(Refuted, "unit fails on basis {i}");
            }
            for j in 0..n {
                let bj = self.basis(j);
                if self.mul(&bi, &bj) != self.mul(&bj, &bi) {
                    bail!(Refuted, "not commutative on basis ({i},{j})");
                }
                for k in 0..n {
                    let bk = self.basis(k);
                    if self.mul(&self.mul(&bi, &bj), &bk) != self.mul(&bi, &self.mul(&bj, &bk)) {
                        bail!(Refuted, "not associative on basis ({i},{j},{k})");
                    }
                }
            }
        }
        // the table must respect the coordinate moduli
        for i in 0..n {
            for j in 0..n {
                let prod = self.scale(self.basis_product(i, j), self.mods[i]);
                if !self.is_zero(&prod) {
                    bail!(Refuted, "table entry ({i},{j}) does not respect p^{}", self.exps[i]);
                }
            }
        }
        Ok(())
    }

    /// Product ring `R × S` (both over the same prime).
    pub fn product(factors: &[Arc<FiniteRing>], label: impl Into<String>) -> Result<FiniteRing> {
        let p = factors[0].p;
        if factors.iter().any(|f| f.p != p) {
            bail!(Input, "product of rings over different primes");
        }
        let rank: usize = factors.iter().map(|f| f.rank()).sum();
        let mut exps = Vec::new();
        let mut offsets = Vec::new();
        for f in factors {
            offsets.push(exps.len());
            exps.extend_from_slice(&f.exps);
        }
        let mut table = vec![vec![0i64; rank]; rank * rank];
        let mut one = vec![0i64; rank];
        for (f, &off) in factors.iter().zip(&offsets) {
            for i in 0..f.rank() {
                one[off + i] = f.one.0[i] as i64;
                for j in 0..f.rank() {
                    let t = f.basis_product(i, j);
                    for k in 0..f.rank() {
                        table[(off + i) * rank + off + j][off + k] = t.0[k] as i64;
                    }
                }
            }
        }
        FiniteRing::new(p, exps, table, one, label)
    }

    /// The split square-zero extension `R ⊕ R^m` with `(x, u)(y, v) = (xy, xv + yu)`.
    /// Basis index `s * rank + i`, where `s = 0` is `R` and `s ≥ 1` the `s`-th copy.
    pub fn square_zero(base: &FiniteRing, m: usize, label: impl Into<String>) -> Result<FiniteRing> {
        let k = base.rank();
        let rank = (m + 1) * k;
        let mut table = vec![vec![0i64; rank]; rank * rank];
        for s in 0..=m {
            for t in 0..=m {
                if s > 0 && t > 0 {
                    continue;
                }
                let out = s.max(t);
                for i in 0..k {
                    for j in 0..k {
                        let prod = base.basis_product(i, j);
                        let row = &mut table[(s * k + i) * rank + t * k + j];
                        for l in 0..k {
                            row[out * k + l] = prod.0[l] as i64;
                        }
                    }
                }
            }
        }
        let mut exps = Vec::with_capacity(rank);
        for _ in 0..=m {
            exps.extend_from_slice(&base.exps);
        }
        let mut one = vec![0i64; rank];
        for l in 0..k {
            one[l] = base.one.0[l] as i64;
        }
        FiniteRing::new(base.p, exps, table, one, label)
    }

    /// `R[t]/(g(t))` for a monic `g` with coefficients in `R` (lowest degree first,
    /// leading 1 included).
    pub fn extension(base: &FiniteRing, g: &[Elem], label: impl Into<String>) -> Result<FiniteRing> {
        let r = g.len() - 1;
        if r == 0 || g[r] != base.one {
            bail!(Input, "extension polynomial must be monic of positive degree");
        }
        let k = base.rank();
        let rank = r * k;
        // basis index: t^u * b_i  ->  u * k + i
        let poly_mul = |a: &[Elem], b: &[Elem]| -> Vec<Elem> {
            let mut out = vec![Elem::ZERO; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] = base.add(&out[i + j], &base.mul(x, y));
                }
            }
            // reduce modulo g
            for d in (r..out.len()).rev() {
                let c = out[d];
                if base.is_zero(&c) {
                    continue;
                }
                for s in 0..r {
                    let t = base.mul(&c, &g[s]);
                    out[d - r + s] = base.sub(&out[d - r + s], &t);
                }
                out[d] = Elem::ZERO;
            }
            out.truncate(r);
            out.resize(r, Elem::ZERO);
            out
        };
        let mut table = vec![vec![0i64; rank]; rank * rank];
        for u in 0..r {
            for i in 0..k {
                for v in 0..r {
                    for j in 0..k {
                        let mut a = vec![Elem::ZERO; u + 1];
                        a[u] = base.basis(i);
                        let mut b = vec![Elem::ZERO; v + 1];
                        b[v] = base.basis(j);
                        let prod = poly_mul(&a, &b);
                        let row = &mut table[(u * k + i) * rank + v * k + j];
                        for (w, c) in prod.iter().enumerate() {
                            for l in 0..k {
                                row[w * k + l] = c.0[l] as i64;
                            }
                        }
                    }
                }
            }
        }
        let mut exps = Vec::with_capacity(rank);
        for _ in 0..r {
            exps.extend_from_slice(&base.exps);
        }
        let mut one = vec![0i64; rank];
        for l in 0..k {
            one[l] = base.one.0[l] as i64;
        }
        FiniteRing::new(base.p, exps, table, one, label)
    }
}

impl FiniteRing {
    /// Quotient by the subgroup `⊕ p^{e'_i}`, given new per-coordinate
    /// exponents `e'_i ≤ e_i`; the caller asserts this subgroup is an ideal,
    /// which is then verified. Returns the projection.
    pub fn quotient(self: &Arc<Self>, exps: &[u32], label: impl Into<String>) -> Result<RingMap> {
        if exps.len() != self.rank() || exps.iter().zip(&self.exps).any(|(a, b)| a > b) {
            bail!(Input, "quotient exponents must shrink the existing ones");
        }
        let n = self.rank();
        let table: Vec<Vec<i64>> = self.table.iter().map(|t| t.0[..n].iter().map(|&c| c as i64).collect()).collect();
        let one: Vec<i64> = self.one.0[..n].iter().map(|&c| c as i64).collect();
        let dst = FiniteRing::new(self.p, exps.to_vec(), table, one, label)?;
        dst.verify_axioms()?;
        let mut images = Vec::with_capacity(n);
        let mut k = 0;
        for &e in exps {
            if e > 0 {
                images.push(dst.basis(k));
                k += 1;
            } else {
                images.push(Elem::ZERO);
            }
        }
        let map = RingMap::new(self.clone(), Arc::new(dst), images)?;
        map.verify_homomorphism()?;
        Ok(map)
    }

    /// Least `k` with `I^k = 0` for the ideal generated by `gens`, if `I` is nilpotent.
    pub fn nilpotency_index(&self, gens: &[Elem]) -> Option<u32> {
        let n = self.rank();
        let amb = self.ambient();
        let span_rows = |elts: Vec<Elem>| -> Vec<Elem> {
            let rows: Vec<Vec<u64>> = elts.iter().map(|x| x.0[..n].to_vec()).collect();
            let h = amb.span(&rows);
            h.rows
                .iter()
                .map(|r| {
                    let mut v = r.clone();
                    amb.normalize(&mut v);
                    let mut e = Elem::ZERO;
                    e.0[..n].copy_from_slice(&v);
                    e
                })
                .filter(|e| !self.is_zero(e))
                .collect()
        };
        let ideal = span_rows(gens.iter().flat_map(|g| (0..n).map(move |j| (*g, j))).map(|(g, j)| self.mul(&g, &self.basis(j))).collect());
        let mut power = ideal.clone();
        for k in 1..=self.log_order() as u32 + 1 {
            if power.is_empty() {
                return Some(k);
            }
            power = span_rows(power.iter().flat_map(|x| ideal.iter().map(move |y| (*x, *y))).map(|(x, y)| self.mul(&x, &y)).collect());
        }
        None
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Cardinality, when it fits in a `u64`.
    pub fn order(&self) -> Option<u64> {
        self.p.checked_pow(self.log_order() as u32)
    }
}

/// An additive map between finite rings given on basis elements; used for
/// ring homomorphisms (reductions, inclusions, evaluations).
#[derive(Clone, Debug)]
pub struct RingMap {
    pub src: Arc<FiniteRing>,
    pub dst: Arc<FiniteRing>,
    pub images: Vec<Elem>,
}

impl RingMap {
    pub fn new(src: Arc<FiniteRing>, dst: Arc<FiniteRing>, images: Vec<Elem>) -> Result<Self> {
        if images.len() != src.rank() {
            bail!(Input, "ring map needs one image per basis element");
        }
        for (i, img) in images.iter().enumerate() {
            if !dst.is_zero(&dst.scale(*img, src.mods[i])) {
                bail!(Input, "ring map is not well defined on basis element {i}");
            }
        }
        Ok(RingMap { src, dst, images })
    }

    pub fn identity(r: Arc<FiniteRing>) -> Self {
        let images = (0..r.rank()).map(|i| r.basis(i)).collect();
        RingMap { src: r.clone(), dst: r, images }
    }

    /// Coordinatewise reduction onto a ring with the same table and smaller moduli.
    pub fn reduction(src: Arc<FiniteRing>, dst: Arc<FiniteRing>) -> Result<Self> {
        if src.rank() != dst.rank() {
            bail!(Mismatch, "reduction needs matching bases");
        }
        let images = (0..src.rank()).map(|i| dst.basis(i)).collect();
        let m = RingMap::new(src, dst, images)?;
        m.verify_homomorphism()?;
        Ok(m)
    }

    pub fn apply(&self, x: &Elem) -> Elem {
        let mut out = Elem::ZERO;
        for i in 0..self.src.rank() {
            if x.0[i] != 0 {
                out = self.dst.add(&out, &self.dst.scale(self.images[i], x.0[i]));
            }
        }
        out
    }

    pub fn compose(&self, next: &RingMap) -> Result<RingMap> {
        if *self.dst != *next.src {
            bail!(Mismatch, "cannot compose ring maps");
        }
        let images = self.images.iter().map(|x| next.apply(x)).collect();
        Ok(RingMap { src: self.src.clone(), dst: next.dst.clone(), images })
    }

    pub fn verify_homomorphism(&self) -> Result<()> {
        if self.apply(&self.src.one()) != self.dst.one() {
            bail!(Refuted, "ring map does not preserve 1");
        }
        for i in 0..self.src.rank() {
            for j in 0..self.src.rank() {
                let lhs = self.apply(&self.src.basis_product(i, j));
                let rhs = self.dst.mul(&self.images[i], &self.images[j]);
                if lhs != rhs {
                    bail!(Refuted, "ring map not multiplicative on basis ({i},{j})");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn zmod(p: u64, e: u32) -> FiniteRing {
        FiniteRing::new(p, vec![e], vec![vec![1]], vec![1], format!("Z/{}^{}", p, e)).unwrap()
    }

    fn f9() -> FiniteRing {
        // F_3[i]/(i^2 + 1)
        let base = zmod(3, 1);
        let g = [base.from_int(1), base.zero(), base.one()];
        FiniteRing::extension(&base, &g, "F9").unwrap()
    }

    #[test]
    fn unit_inverse_in_z9() {
        let r = zmod(3, 2);
        let x = r.from_int(4);
        assert_eq!(r.mul(&x, &r.inv(&x).unwrap()), r.one());
        assert!(r.inv(&r.from_int(3)).is_err());
        assert!(r.is_nilpotent(&r.from_int(6)));
    }

    #[test]
    fn f9_is_a_field() {
        let r = f9();
        r.verify_axioms().unwrap();
        assert_eq!(r.elements().len(), 9);
        assert_eq!(r.units().len(), 8);
        for u in r.units() {
            assert_eq!(r.mul(&u, &r.inv(&u).unwrap()), r.one());
        }
    }

    #[test]
    fn product_has_zero_divisors() {
        let a = Arc::new(zmod(3, 1));
        let r = FiniteRing::product(&[a.clone(), a], "F3xF3").unwrap();
        r.verify_axioms().unwrap();
        let e = r.from_coords(&[1, 0]);
        assert!(!r.is_unit(&e));
        assert!(!r.is_nilpotent(&e));
        assert_eq!(r.units().len(), 4);
    }

    #[test]
    fn nilpotency_of_three_in_z27() {
        let r = zmod(3, 3);
        assert_eq!(r.nilpotency_index(&[r.from_int(3)]), Some(3));
        assert_eq!(r.nilpotency_index(&[r.from_int(9)]), Some(2));
        assert_eq!(r.nilpotency_index(&[]), Some(1));
        assert_eq!(r.nilpotency_index(&[r.one()]), None);
    }

    #[test]
    fn divide_in_z9() {
        let r = zmod(3, 2);
        let y = r.divide(&r.from_int(6), &r.from_int(3)).unwrap();
        assert_eq!(r.mul(&y, &r.from_int(3)), r.from_int(6));
        assert!(r.divide(&r.from_int(1), &r.from_int(3)).is_none());
    }
}
