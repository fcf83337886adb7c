//! Linear algebra over `Z/p^m` and over finite groups `⊕ Z/p^{m_i}`.
//!
//! `Z/p^m` is a chain ring, so a Howell form (echelon form plus the
//! saturation rows `p^{m-v}·row`) decides membership greedily and gives
//! kernels from an augmented matrix. Everything cohomological in the crate
//! eventually lands here.

/// The ring `Z/p^m` with `p^m < 2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZpM {
    pub p: u64,
    pub m: u32,
    pub modulus: u64,
}

impl ZpM {
    pub fn new(p: u64, m: u32) -> Self {
        let mut modulus: u64 = 1;
        for _ in 0..m {
            modulus = modulus.checked_mul(p).filter(|v| *v < (1u64 << 63)).expect("p^m must stay below 2^63");
        }
        ZpM { p, m, modulus }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    /// Signed representative in `(-p^m/2, p^m/2]`.
    pub fn signed(&self, x: u64) -> i64 {
        if x > self.modulus / 2 {
            x as i64 - self.modulus as i64
        } else {
            x as i64
        }
    }

    pub fn pow_p(&self, k: u32) -> u64 {
        if k >= self.m {
            return 0;
        }
        self.p.pow(k)
    }

    /// p-adic valuation, `m` for zero.
    pub fn val(&self, mut x: u64) -> u32 {
        x %= self.modulus;
        if x == 0 {
            return self.m;
        }
        let mut v = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.modulus as i128, (a % self.modulus) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        if r0 != 1 {
            return None;
        }
        Some(s0.rem_euclid(self.modulus as i128) as u64)
    }

    /// Writes `x = p^v · u` and returns `(v, u^{-1})`.
    pub fn split(&self, x: u64) -> (u32, u64) {
        let v = self.val(x);
        if v >= self.m {
            return (self.m, 0);
        }
        let u = x / self.p.pow(v);
        (v, self.inv(u).expect("unit part is invertible"))
    }

    pub fn axpy(&self, y: &mut [u64], c: u64, x: &[u64]) {
        if c == 0 {
            return;
        }
        for (yi, xi) in y.iter_mut().zip(x) {
            if *xi != 0 {
                *yi = self.add(*yi, self.mul(c, *xi));
            }
        }
    }
}

/// Echelon basis of a subgroup of `(Z/p^m)^n` with the Howell property.
#[derive(Clone, Debug)]
pub struct Howell {
    pub ring: ZpM,
    pub ncols: usize,
    pub rows: Vec<Vec<u64>>,
    /// `(column, valuation)` of each row's pivot.
    pub pivots: Vec<(usize, u32)>,
}

impl Howell {
    pub fn new(ring: ZpM, ncols: usize, rows: Vec<Vec<u64>>) -> Self {
        let mut pending: Vec<Vec<u64>> = rows
            .into_iter()
            .map(|mut r| {
                r.resize(ncols, 0);
                for x in r.iter_mut() {
                    *x %= ring.modulus;
                }
                r
            })
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect();
        let mut out_rows = Vec::new();
        let mut pivots = Vec::new();
        for c in 0..ncols {
            let mut best: Option<(usize, u32)> = None;
            for (i, r) in pending.iter().enumerate() {
                if r[c] != 0 {
                    let v = ring.val(r[c]);
                    if best.is_none_or(|(_, bv)| v < bv) {
                        best = Some((i, v));
                        if v == 0 {
                            break;
                        }
                    }
                }
            }
            let Some((idx, v)) = best else { continue };
            let mut piv = pending.swap_remove(idx);
            let (_, uinv) = ring.split(piv[c]);
            for x in piv.iter_mut() {
                *x = ring.mul(*x, uinv);
            }
            let pv = ring.p.pow(v);
            for r in pending.iter_mut() {
                if r[c] != 0 {
                    let q = r[c] / pv;
                    ring.axpy(r, ring.neg(q), &piv);
                }
            }
            if v > 0 {
                let s = ring.pow_p(ring.m - v);
                let sat: Vec<u64> = piv.iter().map(|&x| ring.mul(x, s)).collect();
                if sat.iter().any(|&x| x != 0) {
                    pending.push(sat);
                }
            }
            pending.retain(|r| r.iter().any(|&x| x != 0));
            out_rows.push(piv);
            pivots.push((c, v));
        }
        let mut h = Howell { ring, ncols, rows: out_rows, pivots };
        h.reduce_above();
        h
    }

    fn reduce_above(&mut self) {
        let ring = self.ring;
        for j in 0..self.rows.len() {
            let (cj, vj) = self.pivots[j];
            let pv = ring.p.pow(vj);
            let pivot_row = self.rows[j].clone();
            for i in 0..j {
                let x = self.rows[i][cj];
                if x >= pv {
                    let q = x / pv;
                    ring.axpy(&mut self.rows[i], ring.neg(q), &pivot_row);
                }
            }
        }
    }

    /// `log_p` of the number of elements in the span.
    pub fn log_size(&self) -> u64 {
        self.pivots.iter().map(|&(_, v)| (self.ring.m - v) as u64).sum()
    }

    /// Reduces `v` against the basis; returns `true` when `v` lies in the span
    /// (the residual is then zero).
    pub fn reduce(&self, v: &mut [u64]) -> bool {
        let ring = self.ring;
        for (row, &(c, pv)) in self.rows.iter().zip(&self.pivots) {
            let x = v[c] % ring.modulus;
            if x == 0 {
                continue;
            }
            let d = ring.p.pow(pv);
            let q = x / d;
            if q != 0 {
                ring.axpy(v, ring.neg(q), row);
            }
        }
        v.iter().all(|&x| x % ring.modulus == 0)
    }
}

/// A finite abelian p-group `⊕ Z/p^{e_i}` presented inside `(Z/p^m)^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ambient {
    pub ring: ZpM,
    pub exps: Vec<u32>,
}

impl Ambient {
    pub fn new(ring: ZpM, exps: Vec<u32>) -> Self {
        debug_assert!(exps.iter().all(|&e| e <= ring.m));
        Ambient { ring, exps }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn log_order(&self) -> u64 {
        self.exps.iter().map(|&e| e as u64).sum()
    }

    pub fn normalize(&self, v: &mut [u64]) {
        for (x, &e) in v.iter_mut().zip(&self.exps) {
            *x %= self.ring.p.pow(e.min(self.ring.m));
        }
    }

    fn relation_rows(&self, offset: usize, width: usize) -> Vec<Vec<u64>> {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e < self.ring.m)
            .map(|(i, &e)| {
                let mut r = vec![0; width];
                r[offset + i] = self.ring.pow_p(e);
                r
            })
            .collect()
    }

    /// Howell basis of the preimage in `(Z/p^m)^n` of the subgroup generated by `gens`.
    pub fn span(&self, gens: &[Vec<u64>]) -> Howell {
        let n = self.dim();
        let mut rows: Vec<Vec<u64>> = gens.to_vec();
        rows.extend(self.relation_rows(0, n));
        Howell::new(self.ring, n, rows)
    }

    /// `log_p` of the order of the subgroup generated by `gens`.
    pub fn log_size(&self, gens: &[Vec<u64>]) -> u64 {
        let full = self.dim() as u64 * self.ring.m as u64;
        self.span(gens).log_size() - (full - self.log_order())
    }

    pub fn contains(&self, span: &Howell, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        span.reduce(&mut w)
    }
}

/// A homomorphism `⊕ Z/p^{d_i} → ⊕ Z/p^{t_j}` given by the images of basis vectors.
#[derive(Clone, Debug)]
pub struct GroupMap {
    pub domain: Ambient,
    pub target: Ambient,
    /// `images[i]` is the image of the i-th domain basis vector.
    pub images: Vec<Vec<u64>>,
}

impl GroupMap {
    pub fn new(domain: Ambient, target: Ambient, images: Vec<Vec<u64>>) -> Self {
        assert_eq!(domain.ring, target.ring);
        assert_eq!(images.len(), domain.dim());
        GroupMap { domain, target, images }
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let ring = self.domain.ring;
        let mut out = vec![0; self.target.dim()];
        for (xi, img) in x.iter().zip(&self.images) {
            ring.axpy(&mut out, *xi, img);
        }
        self.target.normalize(&mut out);
        out
    }

    fn augmented(&self) -> Howell {
        let (nt, nd) = (self.target.dim(), self.domain.dim());
        let width = nt + nd;
        let mut rows = Vec::with_capacity(nd + nt);
        for (i, img) in self.images.iter().enumerate() {
            let mut r = vec![0; width];
            r[..nt].copy_from_slice(&img[..nt]);
            r[nt + i] = 1;
            rows.push(r);
        }
        rows.extend(self.target.relation_rows(0, width));
        Howell::new(self.domain.ring, width, rows)
    }

    /// Generators of the kernel.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let nt = self.target.dim();
        let h = self.augmented();
        h.rows
            .iter()
            .zip(&h.pivots)
            .filter(|(_, &(c, _))| c >= nt)
            .map(|(r, _)| {
                let mut v = r[nt..].to_vec();
                self.domain.normalize(&mut v);
                v
            })
            .filter(|v| v.iter().any(|&x| x != 0))
            .collect()
    }

    /// Some `x` with `self.apply(x) == b`, if one exists.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let (nt, nd) = (self.target.dim(), self.domain.dim());
        let h = self.augmented();
        let mut v = vec![0; nt + nd];
        v[..nt].copy_from_slice(b);
        h.reduce(&mut v);
        if v[..nt].iter().any(|&x| x % self.domain.ring.modulus != 0) {
            return None;
        }
        let ring = self.domain.ring;
        let mut x: Vec<u64> = v[nt..].iter().map(|&y| ring.neg(y)).collect();
        self.domain.normalize(&mut x);
        Some(x)
    }

    /// Generators of the image.
    pub fn image(&self) -> Vec<Vec<u64>> {
        self.images
            .iter()
            .map(|v| {
                let mut w = v.clone();
                self.target.normalize(&mut w);
                w
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_and_valuation() {
        let r = ZpM::new(3, 3);
        assert_eq!(r.modulus, 27);
        assert_eq!(r.mul(r.inv(2).unwrap(), 2), 1);
        assert_eq!(r.inv(3), None);
        assert_eq!(r.val(18), 2);
        assert_eq!(r.val(0), 3);
    }

    #[test]
    fn howell_sizes() {
        let r = ZpM::new(3, 2);
        // <(3, 0), (0, 1)> in (Z/9)^2 has 3 * 9 elements
        let h = Howell::new(r, 2, vec![vec![3, 0], vec![0, 1]]);
        assert_eq!(h.log_size(), 3);
        // <(3, 1)> : order 9, and it contains (0, 3)
        let h = Howell::new(r, 2, vec![vec![3, 1]]);
        assert_eq!(h.log_size(), 2);
        let mut v = vec![0, 3];
        assert!(h.reduce(&mut v));
        let mut v = vec![0, 1];
        assert!(!h.reduce(&mut v));
    }

    #[test]
    fn kernel_of_multiplication_by_three() {
        let r = ZpM::new(3, 2);
        let amb = Ambient::new(r, vec![2]);
        let map = GroupMap::new(amb.clone(), amb.clone(), vec![vec![3]]);
        let ker = map.kernel();
        assert_eq!(amb.log_size(&ker), 1);
        assert_eq!(map.solve(&[6]).map(|x| map.apply(&x)), Some(vec![6]));
        assert!(map.solve(&[1]).is_none());
    }

    #[test]
    fn mixed_moduli_kernel() {
        // Z/9 -> Z/3, x -> x mod 3 ; kernel 3Z/9
        let r = ZpM::new(3, 2);
        let map = GroupMap::new(Ambient::new(r, vec![2]), Ambient::new(r, vec![1]), vec![vec![1]]);
        let ker = map.kernel();
        assert_eq!(map.domain.log_size(&ker), 1);
    }

    fn small_map() -> impl Strategy<Value = GroupMap> {
        (prop_oneof![Just((2u64, 2u32)), Just((3, 1)), Just((3, 2))], 1usize..=2, 1usize..=3).prop_flat_map(|((p, m), nd, nt)| {
            let q = p.pow(m);
            (proptest::collection::vec(1..=m, nt), proptest::collection::vec(proptest::collection::vec(0..q, nt), nd)).prop_map(
                move |(texps, images)| {
                    let r = ZpM::new(p, m);
                    GroupMap::new(Ambient::new(r, vec![m; nd]), Ambient::new(r, texps), images)
                },
            )
        })
    }

    fn elements(a: &Ambient) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &e in &a.exps {
            out = out.into_iter().flat_map(|v| (0..a.ring.p.pow(e)).map(move |x| [v.clone(), vec![x]].concat())).collect();
        }
        out
    }

    proptest! {
        #[test]
        fn kernel_and_image_match_enumeration(map in small_map()) {
            let dom = elements(&map.domain);
            let image: std::collections::BTreeSet<_> = dom.iter().map(|x| map.apply(x)).collect();
            let kernel = dom.iter().filter(|x| map.apply(x).iter().all(|&y| y == 0)).count();
            let p = map.domain.ring.p as f64;
            let log = |n: usize| ((n as f64).ln() / p.ln()).round() as u64;
            prop_assert_eq!(map.target.log_size(&map.image()), log(image.len()));
            prop_assert_eq!(map.domain.log_size(&map.kernel()), log(kernel));
            for g in map.kernel() {
                prop_assert!(map.apply(&g).iter().all(|&y| y == 0));
            }
            for b in &image {
                let x = map.solve(b);
                prop_assert_eq!(x.map(|x| map.apply(&x)), Some(b.clone()));
            }
        }
    }
}
