//! Formal group laws of two Frobenius series over Z_3, and the identities
//! they satisfy.
//!
//!     cargo run --example formal_group

use ltpg::coeff::{FieldSpec, LocalField};
use ltpg::lubin_tate::{LubinTate, PhiKind};

fn main() -> ltpg::Result<()> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    for kind in [PhiKind::Mult, PhiKind::Std] {
        let lt = LubinTate::new(q3.clone(), kind, 12, 4)?;
        let f = lt.formal_group()?;
        let red = lt.reduction(lt.certified)?;
        println!("{kind:?}: phi(T) = {:?}", lt.phi.map_coeffs(&red)?);
        let terms = f.map(&red).terms(&red.dst);
        let shown: Vec<String> = terms.iter().take(8).map(|((i, j), c)| format!("{c:?} X^{i}Y^{j}")).collect();
        println!("  F(X, Y) = {} + ... ({} terms below degree 12, mod 3^{})", shown.join(" + "), terms.len(), lt.certified);
        println!("  identities: {:?}", lt.check_formal_group(&f)?);
    }
    Ok(())
}
