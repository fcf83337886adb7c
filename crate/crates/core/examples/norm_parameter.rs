//! The norm parameter `T_K = ∏_ζ [ζ](T)` for `Δ = μ_2 ⊂ Z_3^×`, its
//! integrality certificates, and rewriting a Δ-invariant series in `T_K`.

use ltpg::coeff::{FieldSpec, LocalField};
use ltpg::lubin_tate::{norm_parameter_certificates, rewrite_invariant, LubinTate, PhiKind};
use ltpg::series::{Series, Substitution};

fn main() -> ltpg::Result<()> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    let n = 24;
    let lt = LubinTate::new(q3, PhiKind::Mult, n, 4)?;
    let red = lt.reduction(lt.certified)?;
    let r = red.dst.clone();
    let tk = lt.norm_parameter()?.map_coeffs(&red)?;
    let expected = Series::from_ints(r.clone(), 2, &[-1]).mul(&Series::from_ints(r.clone(), 0, &[1, 1]).truncate(n as i64).invert()?)?;
    println!("T_K = {tk:?}");
    println!("equals -T^2/(1+T): {}", tk.agrees(&expected));

    let phi = Substitution::new(lt.phi.map_coeffs(&red)?, n as i64)?;
    let gamma = Substitution::new(lt.endomorphism(&lt.ring.from_int(4))?.series.map_coeffs(&red)?, n as i64)?;
    for (name, c) in ["phi(T_K)/T_K", "gamma(T_K)/T_K"].iter().zip(norm_parameter_certificates(&tk, &[&phi, &gamma])?) {
        println!("{name}: valuation {} (integral: {})", c.val(), c.val() >= 0);
    }

    let minus_one = lt.endomorphism(&lt.ring.from_int(-1))?.series.map_coeffs(&red)?;
    let delta = vec![Substitution::new(minus_one.clone(), n as i64)?];
    let f = Series::t(r.clone()).add(&minus_one)?;
    println!("T + [-1](T) = {:?} in T_K", rewrite_invariant(&f, &tk, &delta)?);
    Ok(())
}
