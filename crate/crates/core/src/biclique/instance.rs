use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::haar::haar_sample;
use crate::qcore::{CMatrix, DensityOperator, PureState, QuditRegister, C64};

/// Largest explicit state dimension `d^n` (and `d^{nt}` for tensor powers).
pub const EXPLICIT_CAP: usize = 4096;

/// Planted biclique parameters. `κ = λ/n` is both the inclusion probability of
/// each site in `S` and the weight of the planted layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicliqueInstance {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub m: usize,
}

impl BicliqueInstance {
    pub fn new(n: usize, d: usize, lambda: f64, m: usize) -> Result<Self> {
        let inst = Self { n, d, lambda, m };
        inst.validate()?;
        Ok(inst)
    }

    /// Instance with `m = n` copies.
    pub fn square(n: usize, d: usize, lambda: f64) -> Result<Self> {
        Self::new(n, d, lambda, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return invalid("biclique instance needs n >= 1 and m >= 1");
        }
        if self.d < 2 {
            return invalid(format!("local dimension {} < 2", self.d));
        }
        let k = self.kappa();
        if !(0.0..=1.0).contains(&k) {
            return invalid(format!("kappa = lambda/n = {k} outside [0,1]"));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.lambda / self.n as f64
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

/// The shared secret `(ρ, S)` of one experiment.
#[derive(Clone, Debug)]
pub struct PlantedSecret {
    pub rho: PureState,
    pub planted: Vec<bool>,
}

impl PlantedSecret {
    pub fn new(rho: PureState, planted: Vec<bool>) -> Result<Self> {
        if rho.register().num_sites() != 1 {
            return invalid("planted state must live on a single qudit");
        }
        Ok(Self { rho, planted })
    }

    pub fn d(&self) -> usize {
        self.rho.register().total_dim()
    }

    pub fn size(&self) -> usize {
        self.planted.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.planted[site]
    }

    /// `⟨v|ρ|v⟩` for each column `v` of `basis`.
    pub fn born(&self, basis: &CMatrix) -> Vec<f64> {
        let a = self.rho.amplitudes();
        (0..basis.ncols()).map(|x| basis.column(x).dotc(a).norm_sqr()).collect()
    }
}

/// Draw a Haar `ρ` and include each site in `S` with probability `κ`.
pub fn sample_secret<R: Rng + ?Sized>(inst: &BicliqueInstance, rng: &mut R) -> Result<PlantedSecret> {
    let rho = haar_sample(inst.d, rng)?;
    let k = inst.kappa();
    let planted = (0..inst.n).map(|_| rng.gen::<f64>() < k).collect();
    PlantedSecret::new(rho, planted)
}

pub(crate) fn kron_all(parts: &[CMatrix]) -> CMatrix {
    parts.iter().fold(CMatrix::identity(1, 1), |acc, p| acc.kronecker(p))
}

fn scaled_identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0)
}

fn check_cap(d: usize, sites: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..sites {
        dim = dim.checked_mul(d).filter(|&v| v <= EXPLICIT_CAP).ok_or_else(|| {
            Error::ResourceCap(format!("{d}^{sites} exceeds the explicit cap {EXPLICIT_CAP}"))
        })?;
    }
    Ok(dim)
}

fn register(inst: &BicliqueInstance, copies: usize) -> Result<QuditRegister> {
    QuditRegister::uniform(inst.n * copies, inst.d)
}

/// `σ_{ρ,S} = κ ⊗_i (ρ if i ∈ S else I/d) + (1-κ) I/d^n` as an explicit matrix.
pub fn sample_copy(inst: &BicliqueInstance, secret: &PlantedSecret) -> Result<DensityOperator> {
    let dim = check_cap(inst.d, inst.n)?;
    let rho = secret.rho.density().into_matrix();
    let mixed = scaled_identity(inst.d);
    let layer: Vec<CMatrix> =
        (0..inst.n).map(|i| if secret.contains(i) { rho.clone() } else { mixed.clone() }).collect();
    let k = inst.kappa();
    let m = kron_all(&layer) * C64::new(k, 0.0) + scaled_identity(dim) * C64::new(1.0 - k, 0.0);
    DensityOperator::new(register(inst, 1)?, m)
}

/// `E_S σ_{ρ,S}^{⊗t}` expanded over one subset `T_c ⊆ [n]` per copy: a copy with
/// `T_c = ∅` contributes `I/d^n`, otherwise `κ (I/d ⊗_{T_c} Δ)`, and the whole
/// term carries `κ^{|∪ T_c|}`.
pub fn expected_power(inst: &BicliqueInstance, rho: &PureState, t: usize) -> Result<CMatrix> {
    let n = inst.n;
    let d = inst.d;
    check_cap(d, n * t)?;
    let k = inst.kappa();
    let mixed = scaled_identity(d);
    let delta = rho.density().into_matrix() - &mixed;
    let subsets = 1usize << n;
    let mut total: Option<CMatrix> = None;
    let mut choice = vec![0usize; t];
    loop {
        let union = choice.iter().fold(0usize, |a, &c| a | c);
        let active = choice.iter().filter(|&&c| c != 0).count();
        let w = k.powi((active + union.count_ones() as usize) as i32);
        if w != 0.0 {
            let parts: Vec<CMatrix> = choice
                .iter()
                .flat_map(|&c| (0..n).map(move |i| c >> (n - 1 - i) & 1 == 1))
                .map(|on| if on { delta.clone() } else { mixed.clone() })
                .collect();
            let term = kron_all(&parts) * C64::new(w, 0.0);
            total = Some(match total {
                Some(acc) => acc + term,
                None => term,
            });
        }
        let mut pos = 0;
        while pos < t {
            choice[pos] += 1;
            if choice[pos] < subsets {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
        if pos == t {
            break;
        }
    }
    let dim = check_cap(d, n * t)?;
    Ok(total.unwrap_or_else(|| CMatrix::zeros(dim, dim)))
}

/// `Σ_S κ^{|S|}(1-κ)^{n-|S|} σ_{ρ,S}^{⊗t}` by direct enumeration of subsets.
pub fn expected_power_direct(inst: &BicliqueInstance, rho: &PureState, t: usize) -> Result<CMatrix> {
    let n = inst.n;
    let dim = check_cap(inst.d, n * t)?;
    let k = inst.kappa();
    let mut total = CMatrix::zeros(dim, dim);
    for mask in 0usize..(1 << n) {
        let planted: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let size = planted.iter().filter(|&&b| b).count();
        let w = k.powi(size as i32) * (1.0 - k).powi((n - size) as i32);
        if w == 0.0 {
            continue;
        }
        let sigma = sample_copy(inst, &PlantedSecret::new(rho.clone(), planted)?)?.into_matrix();
        let power = kron_all(&vec![sigma; t]);
        total += power * C64::new(w, 0.0);
    }
    Ok(total)
}
