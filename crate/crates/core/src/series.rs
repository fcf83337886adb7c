//! Truncated Laurent series `Σ c_i T^i + O(T^N)` over a finite ring.
//!
//! Coefficients are stored densely from the valuation; exponents between the
//! last stored coefficient and the precision are known to be zero. A precision
//! of [`EXACT`] marks a finite Laurent polynomial.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{bail, Result};
use crate::ring::{Elem, FiniteRing, RingMap};

/// Precision of exactly known series.
pub const EXACT: i64 = i64::MAX / 8;

#[derive(Clone)]
pub struct Series {
    ring: Arc<FiniteRing>,
    start: i64,
    coeffs: Vec<Elem>,
    prec: i64,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if self.ring.is_zero(c) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{:?}T^{}", c, self.start + k as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        if self.prec < EXACT {
            write!(f, " + O(T^{})", self.prec)?;
        }
        Ok(())
    }
}

fn same_ring(a: &Arc<FiniteRing>, b: &Arc<FiniteRing>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Series {
    pub fn new(ring: Arc<FiniteRing>, start: i64, coeffs: Vec<Elem>, prec: i64) -> Series {
        let mut s = Series { ring, start, coeffs, prec: prec.min(EXACT) };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let keep = (self.prec - self.start).clamp(0, self.coeffs.len() as i64) as usize;
        self.coeffs.truncate(keep);
        while self.coeffs.last().is_some_and(|c| self.ring.is_zero(c)) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().position(|c| !self.ring.is_zero(c));
        match lead {
            Some(k) => {
                self.coeffs.drain(..k);
                self.start += k as i64;
            }
            None => {
                self.coeffs.clear();
                self.start = self.prec;
            }
        }
    }

    pub fn zero(ring: Arc<FiniteRing>, prec: i64) -> Series {
        Series::new(ring, 0, vec![], prec)
    }

    pub fn constant(ring: Arc<FiniteRing>, c: Elem, prec: i64) -> Series {
        Series::new(ring, 0, vec![c], prec)
    }

    pub fn one(ring: Arc<FiniteRing>, prec: i64) -> Series {
        let one = ring.one();
        Series::constant(ring, one, prec)
    }

    /// `c·T^k`.
    pub fn monomial(ring: Arc<FiniteRing>, c: Elem, k: i64, prec: i64) -> Series {
        Series::new(ring, k, vec![c], prec)
    }

    /// The variable `T`, exactly.
    pub fn t(ring: Arc<FiniteRing>) -> Series {
        let one = ring.one();
        Series::monomial(ring, one, 1, EXACT)
    }

    /// Polynomial with integer coefficients (lowest degree first), exactly.
    pub fn from_ints(ring: Arc<FiniteRing>, start: i64, coeffs: &[i64]) -> Series {
        let cs = coeffs.iter().map(|&c| ring.from_int(c)).collect();
        Series::new(ring, start, cs, EXACT)
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }
    /// Valuation; equals the precision for the zero series.
    pub fn val(&self) -> i64 {
        self.start
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// One past the last stored exponent.
    pub fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64
    }

    /// Coefficient of `T^i`; `i` must be below the precision.
    pub fn coeff(&self, i: i64) -> Elem {
        debug_assert!(i < self.prec, "coefficient {i} beyond precision {}", self.prec);
        if i < self.start || i >= self.end() {
            Elem::ZERO
        } else {
            self.coeffs[(i - self.start) as usize]
        }
    }

    /// Nonzero terms `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Elem)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !self.ring.is_zero(c)).map(|(k, c)| (self.start + k as i64, *c))
    }

    pub fn truncate(&self, n: i64) -> Series {
        if n >= self.prec {
            return self.clone();
        }
        Series::new(self.ring.clone(), self.start, self.coeffs.clone(), n)
    }

    fn check(&self, other: &Series) -> Result<()> {
        if !same_ring(&self.ring, &other.ring) {
            bail!(Mismatch, "series over {} and {}", self.ring.label(), other.ring.label());
        }
        Ok(())
    }

    fn combine(&self, other: &Series, sign: bool) -> Series {
        let prec = self.prec.min(other.prec);
        if self.is_zero() && other.is_zero() {
            return Series::zero(self.ring.clone(), prec);
        }
        let (lo, hi) = match (self.is_zero(), other.is_zero()) {
            (true, _) => (other.start, other.end()),
            (_, true) => (self.start, self.end()),
            _ => (self.start.min(other.start), self.end().max(other.end())),
        };
        let (lo, hi) = (lo.min(prec), hi.min(prec));
        let r = &self.ring;
        let coeffs = (lo..hi.max(lo))
            .map(|i| {
                let a = if i >= self.start && i < self.end() { self.coeffs[(i - self.start) as usize] } else { Elem::ZERO };
                let b = if i >= other.start && i < other.end() { other.coeffs[(i - other.start) as usize] } else { Elem::ZERO };
                if sign {
                    r.add(&a, &b)
                } else {
                    r.sub(&a, &b)
                }
            })
            .collect();
        Series::new(self.ring.clone(), lo, coeffs, prec)
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        Ok(self.combine(other, true))
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        Ok(self.combine(other, false))
    }

    pub fn neg(&self) -> Series {
        let coeffs = self.coeffs.iter().map(|c| self.ring.neg(c)).collect();
        Series::new(self.ring.clone(), self.start, coeffs, self.prec)
    }

    /// Multiplication by a constant.
    pub fn scale(&self, c: &Elem) -> Series {
        let coeffs = self.coeffs.iter().map(|x| self.ring.mul(x, c)).collect();
        Series::new(self.ring.clone(), self.start, coeffs, self.prec)
    }

    /// Multiplication by `T^k`.
    pub fn shift(&self, k: i64) -> Series {
        let prec = if self.is_exact() { EXACT } else { self.prec + k };
        Series::new(self.ring.clone(), self.start + k, self.coeffs.clone(), prec)
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Series) -> Series {
        let pa = if self.is_exact() { EXACT } else { self.prec.saturating_add(other.start) };
        let pb = if other.is_exact() { EXACT } else { other.prec.saturating_add(self.start) };
        let prec = pa.min(pb).min(EXACT);
        if self.is_zero() || other.is_zero() {
            return Series::zero(self.ring.clone(), prec);
        }
        let start = self.start + other.start;
        let len = ((self.coeffs.len() + other.coeffs.len() - 1) as i64).min(prec - start).max(0) as usize;
        let r = &self.ring;
        let mut out = vec![Elem::ZERO; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len || r.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !r.is_zero(b) {
                    out[i + j] = r.add(&out[i + j], &r.mul(a, b));
                }
            }
        }
        Series::new(self.ring.clone(), start, out, prec)
    }

    pub fn pow(&self, k: u64) -> Series {
        let mut base = self.clone();
        let mut acc = Series::one(self.ring.clone(), EXACT);
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Applies a ring map to every coefficient.
    pub fn map_coeffs(&self, map: &RingMap) -> Result<Series> {
        if !same_ring(&self.ring, &map.src) {
            bail!(Mismatch, "ring map source does not match series ring");
        }
        let coeffs = self.coeffs.iter().map(|c| map.apply(c)).collect();
        Ok(Series::new(map.dst.clone(), self.start, coeffs, self.prec))
    }

    /// Equality on the common precision window.
    pub fn agrees(&self, other: &Series) -> bool {
        self.check(other).is_ok() && self.combine(other, false).is_zero()
    }

    /// Lowest exponent where `self` and `other` differ below the common precision.
    pub fn first_difference(&self, other: &Series) -> Option<i64> {
        let d = self.combine(other, false);
        (!d.is_zero()).then(|| d.val())
    }

    /// Index of the first coefficient that is not nilpotent.
    fn leading_unit_index(&self) -> Option<i64> {
        self.terms().find(|(_, c)| !self.ring.is_nilpotent(c)).map(|(i, _)| i)
    }

    /// Unit test for `R((T))`: the first non-nilpotent coefficient exists
    /// below the precision and is a unit.
    pub fn is_unit(&self) -> bool {
        self.leading_unit_index().is_some_and(|i| self.ring.is_unit(&self.coeff(i)))
    }

    /// Multiplicative inverse; requires finite precision unless the series is
    /// an exact monomial (use [`Series::invert_to`] otherwise).
    pub fn invert(&self) -> Result<Series> {
        if self.is_exact() {
            if self.coeffs.len() == 1 {
                let c = self.ring.inv(&self.coeffs[0])?;
                return Ok(Series::monomial(self.ring.clone(), c, -self.start, EXACT));
            }
            bail!(Precision, "inverse of an exact series needs a target precision");
        }
        self.invert_to(EXACT)
    }

    /// Inverse with precision at most `cap`.
    ///
    /// Writing `f = n + T^m u` with `n` nilpotent below the first unit
    /// coefficient, the inverse is `T^{-m} u^{-1} Σ_k (−T^{-m} u^{-1} n)^k`,
    /// a finite sum. For inexact `f` the result precision is `N + v(g²)`,
    /// which bounds the effect of the unknown tail.
    pub fn invert_to(&self, cap: i64) -> Result<Series> {
        let Some(m) = self.leading_unit_index() else { bail!(NotUnit, "no non-nilpotent coefficient below precision {}", self.prec) };
        let r = self.ring.clone();
        let lead = self.coeff(m);
        let Ok(lead_inv) = r.inv(&lead) else { bail!(NotUnit, "leading coefficient {:?} is not a unit", lead) };
        if self.is_exact() && cap >= EXACT {
            return self.invert();
        }
        let exact = Series::new(r.clone(), self.start, self.coeffs.clone(), EXACT);
        let low = exact.truncate_exact(m);
        let u = Series::new(r.clone(), 0, self.coeffs[(m - self.start) as usize..].to_vec(), EXACT);
        let k_nil = if low.is_zero() { 1 } else { r.nilpotency_index(&low.coeffs).unwrap_or(r.log_order() as u32 + 1) };
        let goal_hint = if self.is_exact() { cap } else { cap.min(self.prec) };
        let mut work = (goal_hint - m).max(1) + (m - self.start).max(0) * k_nil as i64 + 8;
        for _ in 0..12 {
            let uinv = power_series_inverse(&u, lead_inv, work);
            let base = uinv.shift(-m);
            let x = low.mul_unchecked(&base);
            let mut term = Series::one(r.clone(), EXACT);
            let mut sum = Series::one(r.clone(), EXACT);
            for _ in 1..k_nil.max(1) {
                term = term.mul_unchecked(&x).neg();
                sum = sum.combine(&term, true);
            }
            let g = sum.mul_unchecked(&base);
            let goal = if self.is_exact() {
                cap
            } else {
                let g2 = g.mul_unchecked(&g);
                if g.is_zero() || g2.val() >= g2.prec {
                    work *= 2;
                    continue;
                }
                if self.prec + g.val() < 1 {
                    bail!(Precision, "precision {} too small to invert a series of inverse valuation {}", self.prec, g.val());
                }
                cap.min(self.prec + g2.val())
            };
            if g.prec >= goal {
                return Ok(g.truncate(goal));
            }
            work += 2 * (goal - g.prec) + 8;
        }
        bail!(Precision, "inverse did not reach the requested precision")
    }

    /// Exact part below exponent `m`.
    fn truncate_exact(&self, m: i64) -> Series {
        let keep = (m - self.start).clamp(0, self.coeffs.len() as i64) as usize;
        Series::new(self.ring.clone(), self.start, self.coeffs[..keep].to_vec(), EXACT)
    }

    /// Coordinates of the coefficients in the window `[lo, hi)`, flattened.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<u64> {
        let n = self.ring.rank();
        let mut out = Vec::with_capacity(((hi - lo).max(0) as usize) * n);
        for i in lo..hi {
            out.extend_from_slice(&self.coeff(i).0[..n]);
        }
        out
    }

    /// Inverse of [`Series::window`].
    pub fn from_window(ring: Arc<FiniteRing>, lo: i64, coords: &[u64], prec: i64) -> Series {
        let n = ring.rank();
        let coeffs = coords.chunks(n).map(|c| ring.from_coords(&c.iter().map(|&x| x as i64).collect::<Vec<_>>())).collect();
        Series::new(ring, lo, coeffs, prec)
    }

    /// Whether every coefficient with negative exponent vanishes.
    pub fn is_integral(&self) -> bool {
        self.is_zero() || self.start >= 0
    }
}

/// `u^{-1}` to precision `n` for a power series `u` with unit constant term.
fn power_series_inverse(u: &Series, c0_inv: Elem, n: i64) -> Series {
    let r = u.ring.clone();
    let n = n.max(1) as usize;
    let uc: Vec<Elem> = (0..n.min(u.end().max(0) as usize)).map(|i| u.coeff(i as i64)).collect();
    let mut v = vec![Elem::ZERO; n];
    v[0] = c0_inv;
    let minus = r.neg(&c0_inv);
    for k in 1..n {
        let mut acc = Elem::ZERO;
        for j in 1..=k.min(uc.len().saturating_sub(1)) {
            if !r.is_zero(&uc[j]) {
                acc = r.add(&acc, &r.mul(&uc[j], &v[k - j]));
            }
        }
        v[k] = r.mul(&minus, &acc);
    }
    let prec = if u.is_exact() { n as i64 } else { u.prec.min(n as i64) };
    Series::new(r, 0, v, prec)
}

/// Substitution `f(T) ↦ f(s(T))` for a fixed `s = n + T^w·unit`, with the
/// powers of `s` cached up to a precision cap.
pub struct Substitution {
    s: Series,
    w: i64,
    nil_val: Option<i64>,
    nil_index: u32,
    cap: i64,
    pos: Mutex<Vec<Series>>,
    neg: Mutex<Vec<Series>>,
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Substitution({:?}, cap {})", self.s, self.cap)
    }
}

impl Clone for Substitution {
    fn clone(&self) -> Self {
        Substitution {
            s: self.s.clone(),
            w: self.w,
            nil_val: self.nil_val,
            nil_index: self.nil_index,
            cap: self.cap,
            pos: Mutex::new(self.pos.lock().unwrap().clone()),
            neg: Mutex::new(self.neg.lock().unwrap().clone()),
        }
    }
}

impl Substitution {
    pub fn new(s: Series, cap: i64) -> Result<Substitution> {
        let r = s.ring.clone();
        let Some(w) = s.leading_unit_index() else { bail!(Input, "substituted series has no unit coefficient") };
        if !r.is_unit(&s.coeff(w)) {
            bail!(Input, "substituted series has a non-unit leading coefficient");
        }
        if w < 1 {
            bail!(Input, "substituted series has a non-nilpotent constant term");
        }
        let low = s.truncate_exact(w);
        let (nil_val, nil_index) = if low.is_zero() {
            (None, 1)
        } else {
            if low.val() < 1 {
                bail!(Unsupported, "substituted series has nilpotent terms at non-positive exponents");
            }
            (Some(low.val()), r.nilpotency_index(&low.coeffs).unwrap_or(r.log_order() as u32 + 1))
        };
        let one = Series::one(r, EXACT);
        Ok(Substitution { s, w, nil_val, nil_index, cap, pos: Mutex::new(vec![one.clone()]), neg: Mutex::new(vec![one]) })
    }

    pub fn series(&self) -> &Series {
        &self.s
    }
    pub fn cap(&self) -> i64 {
        self.cap
    }

    /// Lower bound for the valuation of `s^i`, `i ≥ 0`, independent of unknown tails.
    pub fn power_val_bound(&self, i: i64) -> i64 {
        match self.nil_val {
            None => i * self.w,
            Some(v) => {
                let k = i.min(self.nil_index as i64 - 1).max(0);
                k * v + (i - k) * self.w
            }
        }
    }

    fn power(&self, i: i64) -> Result<Series> {
        if i >= 0 {
            let mut pos = self.pos.lock().unwrap();
            while (pos.len() as i64) <= i {
                let next = pos.last().unwrap().mul_unchecked(&self.s).truncate(self.cap);
                pos.push(next);
            }
            Ok(pos[i as usize].clone())
        } else {
            let mut neg = self.neg.lock().unwrap();
            if neg.len() == 1 {
                let inv = self.s.invert_to(self.cap)?;
                neg.push(inv);
            }
            while (neg.len() as i64) <= -i {
                let next = neg.last().unwrap().mul_unchecked(&neg[1]).truncate(self.cap);
                neg.push(next);
            }
            Ok(neg[(-i) as usize].clone())
        }
    }

    /// `f(s)`, with precision bounded by the cap, the tracked precision of the
    /// powers of `s`, and the unknown tail of `f`.
    pub fn apply(&self, f: &Series) -> Result<Series> {
        if !same_ring(&f.ring, &self.s.ring) {
            bail!(Mismatch, "substitution over a different ring");
        }
        let mut tail = if f.is_exact() {
            EXACT
        } else if f.prec >= 0 {
            self.power_val_bound(f.prec)
        } else {
            EXACT
        };
        if !f.is_exact() && f.prec < 0 {
            for i in f.prec..0 {
                tail = tail.min(self.power(i)?.val());
            }
            tail = tail.min(self.power_val_bound(0));
        }
        let goal = tail.min(self.cap);
        let mut acc = Series::zero(f.ring.clone(), goal);
        for (i, c) in f.terms() {
            if i >= 0 && self.power_val_bound(i) >= goal {
                break;
            }
            let term = self.power(i)?.scale(&c);
            acc = acc.combine(&term, true);
        }
        if acc.prec < 1 && acc.prec < goal && !f.is_zero() && acc.val() >= acc.prec {
            bail!(Precision, "substitution certifies no coefficient");
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zmod(p: u64, e: u32) -> Arc<FiniteRing> {
        Arc::new(FiniteRing::new(p, vec![e], vec![vec![1]], vec![1], "Z/p^e").unwrap())
    }

    #[test]
    fn geometric_series() {
        let r = zmod(3, 2);
        let f = Series::from_ints(r.clone(), 0, &[1, 1]).truncate(20);
        let g = f.invert().unwrap();
        assert_eq!(g.prec(), 20);
        for i in 0..20 {
            assert_eq!(g.coeff(i), r.from_int(if i % 2 == 0 { 1 } else { -1 }));
        }
        let prod = f.mul(&g).unwrap();
        assert!(prod.agrees(&Series::one(r, EXACT)));
    }

    #[test]
    fn t_times_inverse() {
        let r = zmod(3, 2);
        let t = Series::t(r.clone());
        let ti = t.invert().unwrap();
        assert_eq!(ti.val(), -1);
        assert!(t.mul(&ti).unwrap().agrees(&Series::one(r, EXACT)));
    }

    #[test]
    fn nilpotent_negative_part_inverse() {
        let r = zmod(3, 2);
        let f = Series::from_ints(r.clone(), -5, &[3, 0, 0, 0, 0, 1]).truncate(40);
        let g = f.invert().unwrap();
        let expected = Series::from_ints(r.clone(), -5, &[-3, 0, 0, 0, 0, 1]);
        assert!(g.agrees(&expected));
        assert!(g.prec() >= 35);
        assert!(f.mul(&g).unwrap().agrees(&Series::one(r, EXACT)));
    }

    #[test]
    fn invert_frobenius_series() {
        let r = zmod(3, 2);
        let phi = Series::from_ints(r.clone(), 1, &[3, 3, 1]);
        let inv = phi.invert_to(40).unwrap();
        assert_eq!(inv.prec(), 40);
        let back = phi.mul(&inv).unwrap();
        assert!(back.agrees(&Series::one(r.clone(), EXACT)));
        assert!(back.prec() >= 39);
        let sub = Substitution::new(phi.clone(), 40).unwrap();
        let tinv = Series::monomial(r.clone(), r.one(), -1, EXACT);
        assert!(sub.apply(&tinv).unwrap().agrees(&inv));
    }

    #[test]
    fn rejects_non_unit() {
        let r = zmod(3, 2);
        let f = Series::from_ints(r, 0, &[3, 6]).truncate(10);
        assert!(f.invert().is_err());
        assert!(!f.is_unit());
    }

    #[test]
    fn substitution_is_multiplicative() {
        let r = zmod(3, 2);
        let s = Series::from_ints(r.clone(), 1, &[3, 3, 1]);
        let sub = Substitution::new(s.clone(), 30).unwrap();
        let f = Series::from_ints(r.clone(), -1, &[1, 2, 0, 5, 7]).truncate(12);
        let g = Series::from_ints(r.clone(), 0, &[4, 1, 1]).truncate(12);
        let lhs = sub.apply(&f.mul(&g).unwrap()).unwrap();
        let rhs = sub.apply(&f).unwrap().mul(&sub.apply(&g).unwrap()).unwrap();
        assert!(lhs.agrees(&rhs));
        assert!(sub.apply(&Series::t(r.clone())).unwrap().agrees(&s));
        let c = Series::constant(r.clone(), r.from_int(4), EXACT);
        assert!(sub.apply(&c).unwrap().agrees(&c));
    }

    fn z9_series() -> impl Strategy<Value = Series> {
        (-3i64..3, proptest::collection::vec(0i64..9, 0..8)).prop_map(|(start, c)| Series::from_ints(zmod(3, 2), start, &c).truncate(start + 12))
    }

    proptest! {
        #[test]
        fn ring_laws(a in z9_series(), b in z9_series(), c in z9_series()) {
            let ab = a.mul(&b).unwrap();
            prop_assert!(ab.agrees(&b.mul(&a).unwrap()));
            prop_assert!(ab.mul(&c).unwrap().agrees(&a.mul(&b.mul(&c).unwrap()).unwrap()));
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            prop_assert!(lhs.agrees(&ab.add(&a.mul(&c).unwrap()).unwrap()));
        }

        #[test]
        fn units_invert(start in -3i64..3, lead in prop_oneof![Just(1i64), Just(2), Just(4), Just(8)], rest in proptest::collection::vec(0i64..9, 0..6)) {
            let s = Series::from_ints(zmod(3, 2), start, &[vec![lead], rest].concat()).truncate(start + 15);
            let inv = s.invert().unwrap();
            let one = s.mul(&inv).unwrap();
            prop_assert!(one.agrees(&Series::one(zmod(3, 2), EXACT)));
            prop_assert!(one.prec() >= 15);
        }
    }
}
