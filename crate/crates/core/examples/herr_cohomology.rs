//! Herr cohomology over `K = Q_3` with `A = F_3`: the trivial module and an
//! unramified twist, with generators and the precision-doubling check.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use ltpg::herr::{herr_cohomology, verify_witnesses, HerrOptions};
use ltpg::lubin_tate::PhiKind;
use ltpg::phigamma::{Base, PhiGammaModule};

fn base(prec: i64) -> ltpg::Result<std::sync::Arc<Base>> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    Base::new(CoeffAlgebra::new(q3, CoeffSpec::FiniteField { degree: 1 })?, 1, PhiKind::Std, prec)
}

fn main() -> ltpg::Result<()> {
    let trivial = |prec: i64| PhiGammaModule::trivial(base(prec)?, 1);
    let ur2 = |prec: i64| {
        let b = base(prec)?;
        let two = b.coeff.ring.from_int(2);
        PhiGammaModule::unramified(b, &two)
    };
    let families: [(&str, &dyn ltpg::herr::ModuleFamily); 2] = [("trivial", &trivial), ("ur_2", &ur2)];
    for (name, fam) in families {
        let rep = herr_cohomology(fam, 40, &HerrOptions::default())?;
        let m = fam.at_precision(40)?;
        let dims: Vec<_> = rep.degrees.iter().map(|d| d.length).collect();
        println!("{name}: (h0, h1, h2) = {dims:?}, stable at precision {}: {:?}", 2 * rep.precision, rep.stability.as_ref().map(|s| s.agrees));
        for d in &rep.degrees {
            verify_witnesses(&m, &rep.lattice, d)?;
            for g in &d.generators {
                println!("  H^{} generator of order {}: {:?}", d.degree, g.order, g.cocycle);
            }
        }
    }
    Ok(())
}
