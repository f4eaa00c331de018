use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::qcore::{CMatrix, CVector, PureState, QuditRegister, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state on a register (normalized complex Gaussian vector).
pub fn haar_state<R: Rng + ?Sized>(register: &QuditRegister, rng: &mut R) -> PureState {
    let dim = register.total_dim();
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    PureState::new(register.clone(), v).expect("gaussian vector is nonzero")
}

/// Haar-random pure state on a single site of dimension `d`.
pub fn haar_sample<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PureState> {
    Ok(haar_state(&QuditRegister::new(vec![d])?, rng))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::unitarity_defect;
    use crate::rng::stream;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = stream(1, &[]);
        for dim in [2, 4, 8] {
            assert!(unitarity_defect(&haar_unitary(dim, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn unitary_columns_have_uniform_first_moment() {
        let mut rng = stream(2, &[]);
        let n = 20000;
        let mut acc = 0.0;
        for _ in 0..n {
            let u = haar_unitary(2, &mut rng);
            acc += u[(0, 0)].norm_sqr();
        }
        assert!((acc / n as f64 - 0.5).abs() < 0.01);
    }
}
