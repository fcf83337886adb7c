//! `T`-quasi-linear operators: certification of `γ^k − 1`, the power
//! formula, topological nilpotence and the continuity criteria.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use ltpg::lubin_tate::PhiKind;
use ltpg::phigamma::{Base, PhiGammaModule, RandomSpec};
use ltpg::tquasi::{certify_gamma, certify_tquasi, equivalence_suite, is_topologically_nilpotent, power_formula_check, QuasiOperator};
use rand::SeedableRng;

fn main() -> ltpg::Result<()> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    let base = Base::new(CoeffAlgebra::new(q3, CoeffSpec::Quotient { a: 2, degree: 1 })?, 1, PhiKind::Std, 30)?;
    let m =
        PhiGammaModule::random(base, &RandomSpec { rank: 2, max_twist: 1, ..Default::default() }, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3))?;
    let pi = m.base.uniformizer;
    for k in 1..=3 {
        let (op, v) = certify_gamma(&m, None, 0, k)?;
        let w = v.witness().expect("γ^k − 1 is T-quasi-linear");
        let rows = power_formula_check(&op, w, &pi, &[-3, -2, -1, 0, 1, 2, 3])?;
        println!("γ^{k} − 1: b = {:?}", w.b);
        println!("  power formula holds for n in -3..=3: {}", rows.iter().all(|r| r.verified && r.in_ideal));
        println!("  {:?}", is_topologically_nilpotent(&op, w, &pi, 2, 48, Some(3))?);
    }
    let id = QuasiOperator::identity(&m);
    let w = certify_tquasi(&id, &pi, 30)?.witness().cloned().expect("identity is quasi-linear");
    println!("identity: {:?}", is_topologically_nilpotent(&id, &w, &pi, 2, 48, None)?);
    println!("{:#?}", equivalence_suite(&m, None, 0, 2, 6)?);
    Ok(())
}
