//! `H^i(M) ⊗ Z/3` against `H^i(M ⊗ Z/3)` for random modules over `Z/9`.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use ltpg::herr::basechange_compare;
use ltpg::lubin_tate::PhiKind;
use ltpg::phigamma::{Base, PhiGammaModule, RandomSpec};
use rand::SeedableRng;

fn base(a: u32, prec: i64) -> ltpg::Result<std::sync::Arc<Base>> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    Base::new(CoeffAlgebra::new(q3, CoeffSpec::Quotient { a, degree: 1 })?, 1, PhiKind::Std, prec)
}

fn main() -> ltpg::Result<()> {
    for seed in 0..4u64 {
        let spec = RandomSpec { rank: 1, max_twist: 1, ..Default::default() };
        let m = |p: i64| PhiGammaModule::random(base(2, p)?, &spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mb = |p: i64| m(p)?.base_change(&base(1, p)?);
        for r in 0..=2 {
            let rep = basechange_compare(&m, &mb, r, 40, true)?;
            println!(
                "seed {seed}, H^{r}: over Z/9 {:?}, tensored {:?}, over Z/3 {:?}, isomorphic {}",
                rep.source, rep.tensored, rep.target, rep.isomorphic
            );
        }
    }
    Ok(())
}
