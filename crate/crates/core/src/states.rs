//! Density matrices, the polarization expansion and Haar-random pure states.
//!
//! An n-qubit state expands on the Pauli basis as
//! `ρ = (1/N)(1 + Σ_j w^j f_j)` with `N = 2^n` and `w^j = tr(ρ f_j)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{real_part_checked, ComplexMatrix};
use crate::pauli::{basis, basis_len, check_dense_cap};

/// Default tolerance for Hermiticity, trace and positivity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest imaginary residue accepted when a real quantity is extracted.
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix known to be a valid state by construction.
    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        let n = mat.qubits().expect("power-of-two dimension");
        Self { n, mat }
    }

    /// Pure state `|ψ⟩⟨ψ|` of a unit vector (normalized here).
    pub fn from_ket(psi: &[Complex64]) -> Result<Self> {
        if !psi.len().is_power_of_two() || psi.len() < 2 {
            return Err(Error::Shape(format!(
                "state vector length {} is not 2^n",
                psi.len()
            )));
        }
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let unit: Vec<Complex64> = psi.iter().map(|c| c / norm).collect();
        Ok(Self::from_trusted(ComplexMatrix::outer(&unit, &unit)?))
    }

    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_dense_cap(n)?;
        let mut m = ComplexMatrix::zeros(1 << n);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        Ok(Self::from_trusted(m))
    }

    /// `1/N`, the unpolarized state.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_dense_cap(n)?;
        let dim = 1usize << n;
        Ok(Self::from_trusted(
            ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }
}

/// Checks Hermiticity, unit trace and positivity of `m`.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    let n = m
        .qubits()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Shape(format!("dimension {} is not 2^n with n >= 1", m.dim())))?;
    check_dense_cap(n)?;

    let herm = m.hermiticity_deviation();
    if herm.is_nan() || herm > tol {
        return Err(Error::NotHermitian {
            deviation: herm,
            tol,
        });
    }
    let trace_dev = (m.trace() - Complex64::new(1.0, 0.0)).norm();
    if trace_dev.is_nan() || trace_dev > tol {
        return Err(Error::TraceDeviation {
            deviation: trace_dev,
            tol,
        });
    }
    let min_eig = m.min_hermitian_eigenvalue();
    if min_eig < -tol {
        return Err(Error::NegativeEigenvalue {
            min_eigenvalue: min_eig,
            tol,
        });
    }
    Ok(DensityMatrix { n, mat: m.clone() })
}

/// The real coefficients `w^j` of a state on the non-identity Pauli basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationVector {
    n: usize,
    w: Vec<f64>,
}

impl PolarizationVector {
    pub fn new(n: usize, w: Vec<f64>) -> Result<Self> {
        let len = basis_len(n)?;
        if w.len() != len {
            return Err(Error::Shape(format!(
                "{n}-qubit polarization vector needs {len} components, got {}",
                w.len()
            )));
        }
        Ok(Self { n, w })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; basis_len(n)?])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Components in basis-index order; slot `k` holds `w^{k+1}`.
    pub fn components(&self) -> &[f64] {
        &self.w
    }

    /// `w^j` for a 1-based basis index.
    pub fn get(&self, j: usize) -> Option<f64> {
        j.checked_sub(1).and_then(|k| self.w.get(k).copied())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w.iter().map(|x| x * x).sum()
    }
}

/// Dense basis matrices `f_1 … f_{N²−1}` for repeated expansions.
#[derive(Debug, Clone)]
pub struct PolarizationBasis {
    n: usize,
    elements: Vec<ComplexMatrix>,
}

impl PolarizationBasis {
    pub fn new(n: usize) -> Result<Self> {
        check_dense_cap(n)?;
        let elements = basis(n)?
            .iter()
            .map(|f| f.to_matrix())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, elements })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn expand(&self, rho: &DensityMatrix) -> Result<PolarizationVector> {
        if rho.n != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: rho.n,
            });
        }
        let w = self
            .elements
            .iter()
            .map(|f| {
                let z = rho.mat.trace_of_product(f)?;
                real_part_checked(z, IMAG_TOL, "polarization component")
            })
            .collect::<Result<Vec<_>>>()?;
        PolarizationVector::new(self.n, w)
    }

    /// `(1/N)(1 + Σ w^j f_j)` without any validation.
    pub fn reconstruct_operator(&self, w: &PolarizationVector) -> Result<ComplexMatrix> {
        if w.n != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: w.n,
            });
        }
        let dim = 1usize << self.n;
        let mut acc = ComplexMatrix::identity(dim);
        for (wj, f) in w.w.iter().zip(&self.elements) {
            if *wj != 0.0 {
                acc = &acc + &f.scale_real(*wj);
            }
        }
        Ok(acc.scale_real(1.0 / dim as f64))
    }

    pub fn reconstruct(&self, w: &PolarizationVector, tol: f64) -> Result<DensityMatrix> {
        let m = self.reconstruct_operator(w)?;
        validate_density(&m, tol).map_err(|e| Error::InadmissiblePolarization(Box::new(e)))
    }
}

pub fn polarization_expand(rho: &DensityMatrix) -> Result<PolarizationVector> {
    PolarizationBasis::new(rho.n)?.expand(rho)
}

/// Rebuilds the state of a polarization vector, rejecting vectors outside
/// the state space.
pub fn polarization_reconstruct(w: &PolarizationVector) -> Result<DensityMatrix> {
    PolarizationBasis::new(w.n)?.reconstruct(w, DEFAULT_TOL)
}

/// `tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    // ρ is Hermitian, so tr(ρ²) = Σ |ρ_ik|².
    m.as_slice().iter().map(|c| c.norm_sqr()).sum()
}

/// A vector of independent standard complex Gaussians; after normalization
/// it is Haar-distributed on the unit sphere.
pub fn gaussian_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

pub fn haar_random_ket<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    check_dense_cap(n)?;
    let mut psi = gaussian_ket(1 << n, rng);
    let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut psi {
        *c /= norm;
    }
    Ok(psi)
}

/// Haar-random pure state `|ψ⟩⟨ψ|` on `n` qubits.
pub fn haar_random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    let psi = haar_random_ket(n, rng)?;
    Ok(DensityMatrix::from_trusted(ComplexMatrix::outer(
        &psi, &psi,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use crate::rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn maximally_mixed_validates() {
        let m = ComplexMatrix::identity(2).scale_real(0.5);
        let rho = validate_density(&m, DEFAULT_TOL).unwrap();
        assert_eq!(rho, DensityMatrix::maximally_mixed(1).unwrap());
    }

    #[test]
    fn validation_errors_name_the_check() {
        let bad_trace = ComplexMatrix::from_diag(&[c(0.9), c(0.0)]);
        assert!(matches!(
            validate_density(&bad_trace, DEFAULT_TOL),
            Err(Error::TraceDeviation { .. })
        ));
        let non_herm = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[-0.5, 0.5]]).unwrap();
        assert!(matches!(
            validate_density(&non_herm, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
        let negative = ComplexMatrix::from_diag(&[c(1.5), c(-0.5)]);
        assert!(matches!(
            validate_density(&negative, DEFAULT_TOL),
            Err(Error::NegativeEigenvalue { .. })
        ));
        let odd = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(matches!(
            validate_density(&odd, DEFAULT_TOL),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn expand_examples() {
        for n in 1..=3 {
            let w = polarization_expand(&DensityMatrix::maximally_mixed(n).unwrap()).unwrap();
            assert!(w.components().iter().all(|&x| x == 0.0));
        }
        let w = polarization_expand(&DensityMatrix::zero_state(1).unwrap()).unwrap();
        assert_eq!(w.components(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn bell_state_polarization() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::from_ket(&[c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let w = polarization_expand(&bell).unwrap();
        // Oracle: tr(ρ f_j) from explicit dense products.
        for j in 1..=15 {
            let f = crate::pauli::basis_element(j, 2)
                .unwrap()
                .to_matrix()
                .unwrap();
            let oracle = (bell.matrix() * &f).trace().re;
            assert!((w.get(j).unwrap() - oracle).abs() < 1e-14);
        }
        let xx = PauliString::from_labels(&[1, 1])
            .unwrap()
            .basis_index()
            .unwrap()
            .get();
        let yy = PauliString::from_labels(&[2, 2])
            .unwrap()
            .basis_index()
            .unwrap()
            .get();
        let zz = PauliString::from_labels(&[3, 3])
            .unwrap()
            .basis_index()
            .unwrap()
            .get();
        for j in 1..=15 {
            let want = match j {
                _ if j == xx || j == zz => 1.0,
                _ if j == yy => -1.0,
                _ => 0.0,
            };
            assert!((w.get(j).unwrap() - want).abs() < 1e-14, "j = {j}");
        }
        assert!((w.norm_sqr() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruct_examples() {
        let rho = polarization_reconstruct(&PolarizationVector::zeros(2).unwrap()).unwrap();
        assert!(
            rho.matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                .unwrap()
                < 1e-15
        );
        let up =
            polarization_reconstruct(&PolarizationVector::new(1, vec![0.0, 0.0, 1.0]).unwrap())
                .unwrap();
        assert_eq!(up, DensityMatrix::zero_state(1).unwrap());
        let too_long = PolarizationVector::new(1, vec![0.0, 0.0, 2.0]).unwrap();
        assert!(matches!(
            polarization_reconstruct(&too_long),
            Err(Error::InadmissiblePolarization(_))
        ));
        assert!(PolarizationVector::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn purity_examples() {
        let mut rng = rng::stream(3);
        for n in 1..=3 {
            let rho = haar_random_pure(n, &mut rng).unwrap();
            assert!((purity(&rho) - 1.0).abs() < 1e-12);
        }
        assert!((purity(&DensityMatrix::maximally_mixed(2).unwrap()) - 0.25).abs() < 1e-15);
        let rho = haar_random_pure(2, &mut rng).unwrap();
        let w = polarization_expand(&rho).unwrap();
        assert!((w.norm_sqr() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn purity_matches_polarization_formula() {
        let mut rng = rng::stream(11);
        let a = haar_random_pure(2, &mut rng).unwrap();
        let b = haar_random_pure(2, &mut rng).unwrap();
        let mixed =
            validate_density(&(a.matrix() + b.matrix()).scale_real(0.5), DEFAULT_TOL).unwrap();
        let w = polarization_expand(&mixed).unwrap();
        assert!((purity(&mixed) - (1.0 + w.norm_sqr()) / 4.0).abs() < 1e-10);
        assert!(w.norm_sqr() < 3.0);
    }

    #[test]
    fn haar_samples_are_reproducible() {
        let a = haar_random_pure(2, &mut rng::stream(5)).unwrap();
        let b = haar_random_pure(2, &mut rng::stream(5)).unwrap();
        assert_eq!(a, b);
    }
}
