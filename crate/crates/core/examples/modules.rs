//! Étale (φ, Γ)-modules from matrices: relations, height and the weak-Wach
//! level, for constructed and randomly gauged modules.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use ltpg::lubin_tate::PhiKind;
use ltpg::phigamma::{Base, PhiGammaModule, RandomSpec};
use rand::SeedableRng;

fn main() -> ltpg::Result<()> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    let base = Base::new(CoeffAlgebra::new(q3, CoeffSpec::Quotient { a: 2, degree: 1 })?, 1, PhiKind::Std, 30)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let four = base.coeff.ring.from_int(4);
    let modules = [
        ("trivial", PhiGammaModule::trivial(base.clone(), 1)?),
        ("ur_4", PhiGammaModule::unramified(base.clone(), &four)?),
        ("random rank 2", PhiGammaModule::random(base.clone(), &RandomSpec { rank: 2, max_twist: 1, ..Default::default() }, &mut rng)?),
    ];
    for (name, m) in &modules {
        println!(
            "{name}: relation failures {}, minimal height {}, level {:?}",
            m.check()?.len(),
            m.minimal_height(None)?,
            m.continuity_level(None, 1, 6)?.level
        );
    }
    let (_, m) = &modules[2];
    for (i, s) in m.phi.e.iter().enumerate() {
        println!("phi[{}][{}] = {:?}", i / m.d, i % m.d, s.truncate(6));
    }
    let ad = m.adjoint()?;
    println!("adjoint has rank {} and {} relation failures", ad.d, ad.check()?.len());
    Ok(())
}
