//! The Witt-coefficient algebra `W(k_K) ⊗ A`, its Frobenius, splitting and
//! norm map, for `K/F` unramified of degree 2.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField, WittCoeff};

fn main() -> ltpg::Result<()> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    for (label, spec) in [
        ("F_3", CoeffSpec::FiniteField { degree: 1 }),
        ("Z/9", CoeffSpec::Quotient { a: 2, degree: 1 }),
        ("F_9", CoeffSpec::FiniteField { degree: 2 }),
    ] {
        let w = WittCoeff::new(CoeffAlgebra::new(q3.clone(), spec)?, 2)?;
        let units = w.ring.units();
        println!("A = {label}: |R^x| = {}, splits: {}", units.len(), w.split_map().is_ok());
        let a_units = w.a_ring().units();
        let mut fibres = 0;
        for a in &a_units {
            let x = w.norm_fibre(a)?;
            fibres += (w.norm(&x)? == *a) as usize;
        }
        println!("  every unit of A is a norm: {}", fibres == a_units.len());
        let kernel = w.norm_kernel()?;
        let trivial = units.iter().filter(|x| w.norm(x).map(|n| n == w.a_ring().one()).unwrap_or(false)).count();
        println!("  ker N has {} elements, {{phi(y)/y}} has {}", trivial, kernel.len());
    }
    Ok(())
}
