//! Matrices over truncated Laurent series.

use std::sync::Arc;

use crate::error::{bail, Result};
use crate::ring::{Elem, FiniteRing, RingMap};
use crate::series::{Series, EXACT};

#[derive(Clone, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub e: Vec<Series>,
}

/// Location of the first disagreement between two matrices.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct EntryWitness {
    pub row: usize,
    pub col: usize,
    pub exponent: i64,
}

impl Mat {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Series) -> Mat {
        let mut e = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                e.push(f(i, j));
            }
        }
        Mat { rows, cols, e }
    }

    pub fn identity(ring: &Arc<FiniteRing>, d: usize) -> Mat {
        Mat::from_fn(d, d, |i, j| if i == j { Series::one(ring.clone(), EXACT) } else { Series::zero(ring.clone(), EXACT) })
    }

    pub fn zero(ring: &Arc<FiniteRing>, rows: usize, cols: usize) -> Mat {
        Mat::from_fn(rows, cols, |_, _| Series::zero(ring.clone(), EXACT))
    }

    /// Constant diagonal matrix.
    pub fn diagonal(ring: &Arc<FiniteRing>, diag: &[Elem]) -> Mat {
        let d = diag.len();
        Mat::from_fn(d, d, |i, j| if i == j { Series::constant(ring.clone(), diag[i], EXACT) } else { Series::zero(ring.clone(), EXACT) })
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        self.e[0].ring()
    }

    pub fn get(&self, i: usize, j: usize) -> &Series {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series) {
        self.e[i * self.cols + j] = s;
    }

    pub fn column(&self, j: usize) -> Vec<Series> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            bail!(Input, "matrix shapes {}x{} and {}x{} do not compose", self.rows, self.cols, other.rows, other.cols);
        }
        let r = self.ring().clone();
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Series::zero(r.clone(), EXACT);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() && a.is_exact() || b.is_zero() && b.is_exact() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
                out.push(acc);
            }
        }
        Ok(Mat { rows: self.rows, cols: other.cols, e: out })
    }

    /// Matrix times a column vector.
    pub fn apply(&self, v: &[Series]) -> Result<Vec<Series>> {
        let col = Mat { rows: v.len(), cols: 1, e: v.to_vec() };
        Ok(self.mul(&col)?.e)
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        let e = self.e.iter().zip(&other.e).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Mat { rows: self.rows, cols: self.cols, e })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        let e = self.e.iter().zip(&other.e).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Mat { rows: self.rows, cols: self.cols, e })
    }

    pub fn scale(&self, s: &Series) -> Result<Mat> {
        let e = self.e.iter().map(|a| a.mul(s)).collect::<Result<_>>()?;
        Ok(Mat { rows: self.rows, cols: self.cols, e })
    }

    pub fn map(&self, f: impl Fn(&Series) -> Result<Series>) -> Result<Mat> {
        let e = self.e.iter().map(f).collect::<Result<_>>()?;
        Ok(Mat { rows: self.rows, cols: self.cols, e })
    }

    pub fn map_coeffs(&self, m: &RingMap) -> Result<Mat> {
        self.map(|s| s.map_coeffs(m))
    }

    pub fn truncate(&self, n: i64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, e: self.e.iter().map(|s| s.truncate(n)).collect() }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// `A ⊗ B` with row index `i_A·rows_B + i_B`.
    pub fn kron(&self, other: &Mat) -> Result<Mat> {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut e = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                e.push(self.get(i / other.rows, j / other.cols).mul(other.get(i % other.rows, j % other.cols))?);
            }
        }
        Ok(Mat { rows: r, cols: c, e })
    }

    /// Smallest valuation among the entries.
    pub fn val(&self) -> i64 {
        self.e.iter().map(|s| s.val()).min().unwrap_or(EXACT)
    }

    /// `max(0, −val)`.
    pub fn pole_order(&self) -> i64 {
        (-self.val()).max(0)
    }

    pub fn prec(&self) -> i64 {
        self.e.iter().map(|s| s.prec()).min().unwrap_or(EXACT)
    }

    pub fn is_integral(&self) -> bool {
        self.e.iter().all(|s| s.is_integral())
    }

    pub fn first_difference(&self, other: &Mat) -> Option<EntryWitness> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if let Some(exponent) = self.get(i, j).first_difference(other.get(i, j)) {
                    return Some(EntryWitness { row: i, col: j, exponent });
                }
            }
        }
        None
    }

    pub fn agrees(&self, other: &Mat) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.first_difference(other).is_none()
    }

    /// Inverse by Gaussian elimination with unit pivots; capped at `cap` for
    /// exact inputs.
    pub fn invert_to(&self, cap: i64) -> Result<Mat> {
        if !self.is_square() {
            bail!(Input, "only square matrices are invertible");
        }
        let d = self.rows;
        let r = self.ring().clone();
        let mut a = self.clone();
        let mut inv = Mat::identity(&r, d);
        let inverse = |s: &Series| if s.is_exact() && s.terms().count() > 1 { s.invert_to(cap) } else { s.invert() };
        for c in 0..d {
            let Some(piv) = (c..d).find(|&i| a.get(i, c).is_unit()) else {
                bail!(NotUnit, "no unit pivot in column {c}");
            };
            if piv != c {
                for j in 0..d {
                    a.e.swap(piv * d + j, c * d + j);
                    inv.e.swap(piv * d + j, c * d + j);
                }
            }
            let pinv = inverse(a.get(c, c))?;
            for j in 0..d {
                let x = a.get(c, j).mul(&pinv)?;
                a.set(c, j, x);
                let y = inv.get(c, j).mul(&pinv)?;
                inv.set(c, j, y);
            }
            for i in 0..d {
                if i == c || a.get(i, c).is_zero() && a.get(i, c).is_exact() {
                    continue;
                }
                let f = a.get(i, c).clone();
                for j in 0..d {
                    let x = a.get(i, j).sub(&f.mul(a.get(c, j))?)?;
                    a.set(i, j, x);
                    let y = inv.get(i, j).sub(&f.mul(inv.get(c, j))?)?;
                    inv.set(i, j, y);
                }
            }
        }
        Ok(inv)
    }

    pub fn invert(&self) -> Result<Mat> {
        self.invert_to(self.prec().min(EXACT))
    }

    /// Trace.
    pub fn trace(&self) -> Result<Series> {
        let mut acc = Series::zero(self.ring().clone(), EXACT);
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add(self.get(i, i))?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_two_by_two() {
        let r = Arc::new(FiniteRing::new(3, vec![2], vec![vec![1]], vec![1], "Z/9").unwrap());
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Series::from_ints(r.clone(), 0, &[3, 1]),
            (0, 1) => Series::from_ints(r.clone(), 0, &[1]),
            (1, 0) => Series::from_ints(r.clone(), -1, &[1]),
            _ => Series::from_ints(r.clone(), 0, &[2, 0, 1]),
        })
        .truncate(30);
        let inv = a.invert().unwrap();
        let prod = a.mul(&inv).unwrap();
        assert!(prod.agrees(&Mat::identity(&r, 2)));
        assert!(prod.prec() > 20);
    }
}
