//! The defect of a coordinatewise lift along a square-zero extension: a
//! 2-cocycle of the adjoint Herr complex, repaired when it is a coboundary.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use ltpg::lubin_tate::PhiKind;
use ltpg::obstruction::{obstruction, ExtensionKind};
use ltpg::phigamma::{Base, PhiGammaModule, RandomSpec};
use rand::SeedableRng;

fn main() -> ltpg::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for f in 1..=2 {
        let field = LocalField::new(FieldSpec { p: 3, f, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
        let base = Base::new(CoeffAlgebra::new(field, CoeffSpec::Quotient { a: 1, degree: 1 })?, 1, PhiKind::Std, 24)?;
        let m = PhiGammaModule::random(base, &RandomSpec { rank: 1, max_twist: 1, ..Default::default() }, &mut rng)?;
        for kind in [ExtensionKind::Truncation, ExtensionKind::Split { rank: 1 }] {
            let rep = obstruction(&m, &kind, 3, &mut rng)?;
            println!(
                "[F:Q_3] = {f}, {kind:?}: d(defect) = 0: {} (vacuous: {}), lift changes checked: {}, class vanishes: {:?}",
                rep.cocycle_failure.is_none(),
                rep.cocycle_vacuous,
                rep.lift_changes_checked,
                rep.vanishes
            );
            if let Some(lift) = &rep.repaired {
                println!("  repaired lift: phi = {:?}", lift.phi.e);
            }
        }
    }
    Ok(())
}
