//! Exact Haar moments and the centered-moment coefficients.

use qlowdeg::haar::{centered_moment_operator, gamma, mixed_overlap_moment, moment_operator};

fn main() -> qlowdeg::Result<()> {
    let m = moment_operator(2, 2)?;
    println!("E[(|psi><psi|)^2] for a qubit, diagonal: {:?}", m.matrix.diagonal().iter().map(|z| z.re).collect::<Vec<_>>());

    for lambda in [vec![2], vec![1, 1], vec![2, 1]] {
        println!("E prod |<psi|l>|^(2 lambda_l), d=3, lambda={lambda:?}: {}", mixed_overlap_moment(3, &lambda)?);
    }

    for t in 1..=4u64 {
        let gammas: Vec<String> = (0..=t).map(|f| gamma(3, t, f).to_string()).collect();
        println!("d=3 t={t} gamma_f: {}", gammas.join(", "));
    }
    let c = centered_moment_operator(2, 2)?;
    println!("E[(2 rho - I)^(x2)] entry (0,0) = {:.6}", c.matrix[(0, 0)].re);
    Ok(())
}
