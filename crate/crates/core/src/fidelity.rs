//! State fidelities and the average fidelity of a channel against a target
//! unitary.
//!
//! The closed form evaluates
//!
//! ```text
//! ⟨F⟩ = 1/N + 1/((N+1)N²) · Σ_{j=1}^{N²−1} tr[U f_j U† M(f_j)]
//! ```
//!
//! over the Pauli basis `f_j`. [`mc_average_fidelity`] estimates the same
//! quantity by sampling Haar-random input states and serves as its oracle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{check_unitary, Channel, ChannelKind};
use crate::error::{Error, Result};
use crate::matrix::{real_part_checked, ComplexMatrix, ZERO};
use crate::pauli::{basis, Pauli};
use crate::rng::{self, RNG_ALGORITHM};
use crate::states::{gaussian_ket, purity, DensityMatrix, DEFAULT_TOL, IMAG_TOL};

/// Default qubit cap for the closed form (`O(16^n)` trace terms).
pub const DEFAULT_CLOSED_FORM_MAX_QUBITS: usize = 5;

/// Samples handled by one Monte-Carlo substream.
pub const MC_CHUNK_SIZE: usize = 4096;

/// Eigenvalues in `[-CLIP_TOL, 0)` are treated as rounding noise.
pub const CLIP_TOL: f64 = 1e-10;

/// Per-dimension eigenvalue magnitude treated as exact zero in matrix roots.
const SPECTRUM_FLOOR: f64 = 16.0 * f64::EPSILON;

const PURITY_TOL: f64 = 1e-8;
const RANGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    SixState,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub method: Method,
    pub value: f64,
    pub n: usize,
    pub samples: usize,
    pub stderr: f64,
    pub seed: Option<u64>,
    /// RNG algorithm, Monte-Carlo only.
    #[serde(default)]
    pub rng: Option<String>,
    /// Samples per substream, Monte-Carlo only.
    #[serde(default)]
    pub chunk_size: Option<usize>,
}

impl FidelityReport {
    fn deterministic(method: Method, value: f64, n: usize) -> Self {
        Self {
            method,
            value,
            n,
            samples: 0,
            stderr: 0.0,
            seed: None,
            rng: None,
            chunk_size: None,
        }
    }
}

/// `tr(ρρ′)` for a pure `ρ`.
pub fn pure_fidelity(rho: &DensityMatrix, rho_prime: &DensityMatrix) -> Result<f64> {
    let p = purity(rho);
    if (p - 1.0).abs() > PURITY_TOL {
        return Err(Error::NotPure { purity: p });
    }
    let z = rho.matrix().trace_of_product(rho_prime.matrix())?;
    real_part_checked(z, IMAG_TOL, "pure-state fidelity")
}

fn clipped_sqrt_spectrum(m: &ComplexMatrix, what: &str) -> Result<(Vec<f64>, ComplexMatrix)> {
    let eig = m.hermitian_eigen();
    if let Some(&bad) = eig.values.iter().find(|&&l| l < -CLIP_TOL) {
        return Err(Error::Consistency(format!(
            "{what} has eigenvalue {bad:e} below the clipping limit -{CLIP_TOL:e}"
        )));
    }
    // Eigenvalues below the solver's resolution are zero; taking their square
    // root would turn 1e-16 noise into 1e-8 errors.
    let floor = SPECTRUM_FLOOR * m.dim() as f64;
    let root_of = |l: f64| if l <= floor { 0.0 } else { l.sqrt() };
    let sqrt_vals: Vec<f64> = eig.values.iter().map(|&l| root_of(l)).collect();
    let root = eig.map_spectrum(root_of);
    Ok((sqrt_vals, root))
}

/// `(tr √(√ρ ρ′ √ρ))²`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, rho_prime: &DensityMatrix) -> Result<f64> {
    if rho.dim() != rho_prime.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: rho_prime.dim(),
        });
    }
    let (_, sqrt_rho) = clipped_sqrt_spectrum(rho.matrix(), "sqrt(rho)")?;
    let inner = rho_prime.matrix().conjugate_by(&sqrt_rho)?;
    let (roots, _) = clipped_sqrt_spectrum(&inner, "sqrt(rho) rho' sqrt(rho)")?;
    let t: f64 = roots.iter().sum();
    Ok(t * t)
}

fn check_target(u: &ComplexMatrix, m: &Channel, n: usize) -> Result<()> {
    let un = check_unitary(u, DEFAULT_TOL)?;
    if un != n {
        return Err(Error::DimensionMismatch {
            left: 1 << n,
            right: u.dim(),
        });
    }
    if m.n() != n {
        return Err(Error::DimensionMismatch {
            left: 1 << n,
            right: m.dim(),
        });
    }
    Ok(())
}

fn checked_unit_interval(z: Complex64, what: &str) -> Result<f64> {
    let v = real_part_checked(z, IMAG_TOL, what)?;
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) {
        return Err(Error::Consistency(format!(
            "{what} = {v} lies outside [0, 1]; the map is not physical"
        )));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Closed-form average fidelity with the default qubit cap.
pub fn average_fidelity(u: &ComplexMatrix, m: &Channel, n: usize) -> Result<FidelityReport> {
    average_fidelity_capped(u, m, n, DEFAULT_CLOSED_FORM_MAX_QUBITS)
}

/// Closed-form average fidelity, refusing `n > max_qubits`.
pub fn average_fidelity_capped(
    u: &ComplexMatrix,
    m: &Channel,
    n: usize,
    max_qubits: usize,
) -> Result<FidelityReport> {
    if n == 0 || n > max_qubits {
        return Err(Error::Domain(format!(
            "closed form limited to 1..={max_qubits} qubits, got {n}"
        )));
    }
    check_target(u, m, n)?;
    let big_n = (1usize << n) as f64;
    let sum = basis(n)?
        .par_iter()
        .map(|f| {
            let f = f.to_matrix()?;
            let target = f.conjugate_by(u)?;
            target.trace_of_product(&m.apply_to_operator(&f)?)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(ZERO, |acc, z| acc + z);
    let value = Complex64::new(1.0 / big_n, 0.0) + sum / ((big_n + 1.0) * big_n * big_n);
    let value = checked_unit_interval(value, "closed-form average fidelity")?;
    Ok(FidelityReport::deterministic(Method::ClosedForm, value, n))
}

/// Single-qubit average over the six axial states `ρ_{±j} = ½(1 ± σ_j)`.
pub fn average_fidelity_six_state(u: &ComplexMatrix, m: &Channel) -> Result<FidelityReport> {
    if m.n() != 1 {
        return Err(Error::Domain(format!(
            "six-state average needs a single-qubit channel, got {} qubits",
            m.n()
        )));
    }
    check_target(u, m, 1)?;
    let id = ComplexMatrix::identity(2);
    let mut sum = ZERO;
    for axis in [Pauli::X, Pauli::Y, Pauli::Z] {
        let s = axis.matrix();
        for sign in [1.0, -1.0] {
            let rho = (&id + &s.scale_real(sign)).scale_real(0.5);
            sum += rho
                .conjugate_by(u)?
                .trace_of_product(&m.apply_to_operator(&rho)?)?;
        }
    }
    let value = checked_unit_interval(sum / 6.0, "six-state average fidelity")?;
    Ok(FidelityReport::deterministic(Method::SixState, value, 1))
}

/// Neumaier summation; keeps the mean of near-constant samples accurate to a
/// few ulps so it can be compared against a tiny standard error.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// One sample of `tr(Uρ₀U† M(ρ₀))` for `ρ₀ = |ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
///
/// Works on the unnormalized ket so the identity channel gives exactly 1.
fn fidelity_sample(u: &ComplexMatrix, ops: &[ComplexMatrix], psi: &[Complex64]) -> f64 {
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let norm_sqr = inner(psi, psi).re;
    let target = u.apply_vec(psi);
    let overlap: f64 = ops
        .iter()
        .map(|k| inner(&target, &k.apply_vec(psi)).norm_sqr())
        .sum();
    overlap / (norm_sqr * norm_sqr)
}

/// Monte-Carlo estimate of the average fidelity over Haar-random inputs.
///
/// Samples are split into chunks of [`MC_CHUNK_SIZE`]; chunk `c` draws from
/// substream `c` of `seed`, so the result is bit-identical for a given seed
/// and sample count regardless of thread scheduling.
pub fn mc_average_fidelity(
    u: &ComplexMatrix,
    m: &Channel,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<FidelityReport> {
    if samples < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    check_target(u, m, n)?;
    let ops = match m.kind() {
        ChannelKind::Unitary(v) => vec![v.clone()],
        ChannelKind::Kraus(ops) => ops.clone(),
    };
    let dim = 1usize << n;
    let chunks = samples.div_ceil(MC_CHUNK_SIZE);
    let values: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng::substream(seed, c as u64);
            let count = MC_CHUNK_SIZE.min(samples - c * MC_CHUNK_SIZE);
            (0..count)
                .map(|_| fidelity_sample(u, &ops, &gaussian_ket(dim, &mut stream)))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();

    let count = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / count;
    let var = compensated_sum(values.iter().map(|x| (x - mean).powi(2))) / (count - 1.0);
    Ok(FidelityReport {
        method: Method::MonteCarlo,
        value: mean,
        n,
        samples,
        stderr: (var / count).sqrt(),
        seed: Some(seed),
        rng: Some(RNG_ALGORITHM.to_string()),
        chunk_size: Some(MC_CHUNK_SIZE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, depolarizing, random_kraus_channel, random_unitary};
    use crate::rng::stream;
    use crate::states::{haar_random_pure, validate_density};

    fn id(n: usize) -> ComplexMatrix {
        ComplexMatrix::identity(1 << n)
    }

    #[test]
    fn pure_fidelity_examples() {
        let rho = haar_random_pure(2, &mut stream(1)).unwrap();
        assert!((pure_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let zero = DensityMatrix::zero_state(1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!((pure_fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-15);
        let one = validate_density(
            &ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap(),
            1e-9,
        )
        .unwrap();
        assert_eq!(pure_fidelity(&zero, &one).unwrap(), 0.0);
        assert!(matches!(
            pure_fidelity(&mixed, &zero),
            Err(Error::NotPure { .. })
        ));
    }

    #[test]
    fn uhlmann_examples() {
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!((uhlmann_fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
        let mut r = stream(2);
        for _ in 0..10 {
            let pure = haar_random_pure(2, &mut r).unwrap();
            let a = haar_random_pure(2, &mut r).unwrap();
            let b = haar_random_pure(2, &mut r).unwrap();
            let other = validate_density(
                &(&a.matrix().scale_real(0.3) + &b.matrix().scale_real(0.7)),
                1e-9,
            )
            .unwrap();
            let u = uhlmann_fidelity(&pure, &other).unwrap();
            assert!((u - pure_fidelity(&pure, &other).unwrap()).abs() < 1e-8);
            assert!((uhlmann_fidelity(&other, &other).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn identity_channel_has_unit_fidelity() {
        let r = average_fidelity(&id(2), &Channel::identity(2).unwrap(), 2).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.method, Method::ClosedForm);
        assert_eq!((r.samples, r.stderr, r.seed), (0, 0.0, None));
    }

    #[test]
    fn depolarizing_closed_form() {
        for p in [0.0, 0.25, 0.4, 1.0] {
            let c = depolarizing(1, p).unwrap();
            let v = average_fidelity(&id(1), &c, 1).unwrap().value;
            assert!((v - (1.0 - p / 2.0)).abs() < 1e-12);
        }
        let six = average_fidelity_six_state(&id(1), &depolarizing(1, 0.4).unwrap()).unwrap();
        assert!((six.value - 0.8).abs() < 1e-12);
    }

    #[test]
    fn six_state_identity_and_domain() {
        let v = average_fidelity_six_state(&id(1), &Channel::identity(1).unwrap()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        assert!(matches!(
            average_fidelity_six_state(&id(2), &Channel::identity(2).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn six_state_matches_closed_form_for_damping() {
        let c = amplitude_damping(0.37).unwrap();
        let u = random_unitary(2, &mut stream(3)).unwrap();
        let a = average_fidelity(&u, &c, 1).unwrap().value;
        let b = average_fidelity_six_state(&u, &c).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let c = depolarizing(2, 0.1).unwrap();
        assert!(matches!(
            average_fidelity(&id(1), &c, 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            average_fidelity(&id(2), &c, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_physical_map_is_a_consistency_error() {
        // 2·1 is not trace preserving; its closed-form value exceeds 1.
        let c = Channel::kraus_unchecked(vec![id(1).scale_real(2.0)]).unwrap();
        assert!(matches!(
            average_fidelity(&id(1), &c, 1),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn closed_form_cap_is_raisable() {
        let c = Channel::identity(2).unwrap();
        assert!(matches!(
            average_fidelity_capped(&id(2), &c, 2, 1),
            Err(Error::Domain(_))
        ));
        assert!(average_fidelity_capped(&id(2), &c, 2, 2).is_ok());
    }

    #[test]
    fn mc_identity_is_exact() {
        let r = mc_average_fidelity(&id(2), &Channel::identity(2).unwrap(), 2, 1000, 42).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.seed, Some(42));
        assert_eq!(r.samples, 1000);
    }

    #[test]
    fn mc_is_deterministic() {
        let c = random_kraus_channel(2, 2, &mut stream(4)).unwrap();
        let a = mc_average_fidelity(&id(2), &c, 2, 10_000, 7).unwrap();
        let b = mc_average_fidelity(&id(2), &c, 2, 10_000, 7).unwrap();
        assert_eq!(a, b);
        let other = mc_average_fidelity(&id(2), &c, 2, 10_000, 8).unwrap();
        assert_ne!(a.value, other.value);
        assert!(mc_average_fidelity(&id(2), &c, 2, 1, 7).is_err());
    }

    #[test]
    fn mc_depolarizing_agrees_with_closed_form() {
        let c = depolarizing(1, 0.2).unwrap();
        let r = mc_average_fidelity(&id(1), &c, 1, 100_000, 2024).unwrap();
        assert!((r.value - 0.9).abs() <= 4.0 * r.stderr, "{r:?}");
    }
}
