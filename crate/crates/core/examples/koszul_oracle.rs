//! Koszul cohomology of commuting endomorphisms of a finite abelian
//! p-group, by the Howell-form backend and by enumerating cochains.

use ltpg::herr::{finite_koszul_cohomology, finite_koszul_oracle, FiniteKoszulInput, Koszul};

fn main() -> ltpg::Result<()> {
    let inputs = [
        FiniteKoszulInput { p: 3, exps: vec![2, 2], operators: vec![vec![vec![3, 0], vec![1, 3]], vec![vec![0, 0], vec![3, 0]]] },
        FiniteKoszulInput { p: 2, exps: vec![1, 2], operators: vec![vec![vec![1, 0], vec![0, 3]]] },
        FiniteKoszulInput { p: 3, exps: vec![1], operators: vec![vec![vec![0]], vec![vec![0]], vec![vec![0]]] },
    ];
    for input in &inputs {
        let fast = finite_koszul_cohomology(input, &Koszul::new(input.operators.len()))?;
        let slow = finite_koszul_oracle(input)?;
        println!("p = {}, exps {:?}: log_p |H^r| = {fast:?} (enumeration: {slow:?})", input.p, input.exps);
    }
    Ok(())
}
