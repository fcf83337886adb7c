//! A lattice on which `φ` contracts, and solving `(φ − 1)x = y` on it.

use ltpg::coeff::{CoeffAlgebra, CoeffSpec, FieldSpec, LocalField};
use ltpg::herr::{phi_stable_lattice, solve_phi_minus_one};
use ltpg::lubin_tate::PhiKind;
use ltpg::phigamma::{Base, PhiGammaModule, RandomSpec};
use ltpg::series::Series;
use rand::SeedableRng;

fn main() -> ltpg::Result<()> {
    let q3 = LocalField::new(FieldSpec { p: 3, f: 1, e: 1, eisenstein: vec![-3, 1], precision: 8 })?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for a in 1..=2 {
        let base = Base::new(CoeffAlgebra::new(q3.clone(), CoeffSpec::Quotient { a, degree: 1 })?, 1, PhiKind::Std, 40)?;
        let m = PhiGammaModule::random(base.clone(), &RandomSpec { rank: 2, max_twist: 2, ..Default::default() }, &mut rng)?;
        let lat = phi_stable_lattice(&m)?;
        println!("a = {a}: {lat:?}");
        let r = base.ring.clone();
        let y =
            vec![Series::from_ints(r.clone(), lat.exponent, &[1, 2, 0, 1]).truncate(40), Series::from_ints(r, lat.exponent + 1, &[2]).truncate(40)];
        let x = solve_phi_minus_one(&m, &lat, &y)?;
        let fx = m.apply_phi(&x)?;
        let ok = fx.iter().zip(&x).zip(&y).all(|((f, x), y)| f.sub(x).and_then(|d| d.sub(y)).map(|d| d.is_zero()).unwrap_or(false));
        println!("  (φ − 1)x = y holds to precision {}: {ok}", x.iter().map(|s| s.prec()).min().unwrap_or(0));
    }
    Ok(())
}
