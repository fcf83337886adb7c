//! The endomorphisms `[a](T)` and the ring laws `[a + b] = F([a], [b])`,
//! `[ab] = [a]∘[b]`.

use ltpg::coeff::{FieldSpec, LocalField};
use ltpg::lubin_tate::{LubinTate, PhiKind};

fn main() -> ltpg::Result<()> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    let lt = LubinTate::new(q3, PhiKind::Mult, 16, 4)?;
    let red = lt.reduction(lt.certified)?;
    let f = lt.formal_group()?;
    let r = &lt.ring;
    for (x, y) in [(2, 5), (-1, 4), (7, 10)] {
        let (a, b) = (r.from_int(x), r.from_int(y));
        let ea = lt.endomorphism(&a)?.series.clone();
        let eb = lt.endomorphism(&b)?.series.clone();
        let sum = lt.endomorphism(&r.add(&a, &b))?.series.map_coeffs(&red)?;
        let prod = lt.endomorphism(&r.mul(&a, &b))?.series.map_coeffs(&red)?;
        let fsum = lt.group_sum(&f, &ea, &eb)?.map_coeffs(&red)?;
        let comp = lt.compose(&ea, &eb)?.map_coeffs(&red)?;
        println!("a = {x:>2}, b = {y:>2}: sum law {}, product law {}", sum.agrees(&fsum), prod.agrees(&comp));
    }
    // For the multiplicative series [a](T) = (1+T)^a − 1.
    println!("[-1](T) = {:?}", lt.certify(&lt.endomorphism(&r.from_int(-1))?.series, 2)?);
    Ok(())
}
