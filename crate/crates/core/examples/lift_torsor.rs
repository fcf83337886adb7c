//! First-order deformations of the trivial module over `F_3`: the lifts
//! along `F_3[ε] → F_3` are counted by `H¹` of the adjoint, here 9.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use ltpg::lubin_tate::PhiKind;
use ltpg::obstruction::lift_torsor;
use ltpg::phigamma::{Base, PhiGammaModule};

fn main() -> ltpg::Result<()> {
    let fam = |prec: i64| {
        let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
        PhiGammaModule::trivial(Base::new(CoeffAlgebra::new(q3, CoeffSpec::FiniteField { degree: 1 })?, 1, PhiKind::Std, prec)?, 1)
    };
    let rep = lift_torsor(&fam, 1, 40, true)?;
    println!("lift classes: {:?} (log_3 = {}), stable: {:?}", rep.count, rep.log_size, rep.stability.map(|s| s.agrees));
    for l in &rep.lifts {
        println!("  lift: phi = {:?}, gamma = {:?}", l.module.phi.e[0], l.module.gammas[0].e[0]);
        println!("    commutes: {}, round trip: {}, level: {:?}", l.failures.is_empty(), l.round_trip, l.continuity_level);
    }
    Ok(())
}
