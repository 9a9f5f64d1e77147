//! Trace-preserving maps: unitary conjugations and Kraus families.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};
use crate::pauli::{basis, check_dense_cap};
use crate::states::{gaussian_ket, validate_density, DensityMatrix, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    Unitary(ComplexMatrix),
    Kraus(Vec<ComplexMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    n: usize,
    kind: ChannelKind,
}

/// Outcome of a unitarity / trace-preservation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReport {
    pub max_deviation: f64,
    pub ok: bool,
}

fn qubits_of(m: &ComplexMatrix) -> Result<usize> {
    let n = m
        .qubits()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Shape(format!("dimension {} is not 2^n with n >= 1", m.dim())))?;
    check_dense_cap(n)?;
    Ok(n)
}

/// Max entry of `|U†U − I|`.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    let gram = &u.adjoint() * u;
    gram.max_abs_diff(&ComplexMatrix::identity(u.dim()))
        .expect("same dimension")
}

/// Fails unless `u` is a unitary on a whole number of qubits.
pub fn check_unitary(u: &ComplexMatrix, tol: f64) -> Result<usize> {
    let n = qubits_of(u)?;
    let deviation = unitarity_deviation(u);
    if deviation.is_nan() || deviation > tol {
        return Err(Error::NotUnitary { deviation, tol });
    }
    Ok(n)
}

impl Channel {
    /// Conjugation by a unitary `U`, checked to `tol`.
    pub fn unitary(u: ComplexMatrix, tol: f64) -> Result<Self> {
        let n = check_unitary(&u, tol)?;
        Ok(Self {
            n,
            kind: ChannelKind::Unitary(u),
        })
    }

    /// Kraus family checked for trace preservation to `tol`.
    pub fn kraus(ops: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let c = Self::kraus_unchecked(ops)?;
        let report = c.check_trace_preserving(tol);
        if !report.ok {
            return Err(Error::NotTracePreserving {
                deviation: report.max_deviation,
                tol,
            });
        }
        Ok(c)
    }

    /// Kraus family with consistent shapes but no trace-preservation check.
    /// Use [`Channel::check_trace_preserving`] to inspect it.
    pub fn kraus_unchecked(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Shape("Kraus family is empty".into()))?;
        let n = qubits_of(first)?;
        if let Some(bad) = ops.iter().find(|k| k.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                left: first.dim(),
                right: bad.dim(),
            });
        }
        Ok(Self {
            n,
            kind: ChannelKind::Kraus(ops),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dense_cap(n)?;
        Ok(Self {
            n,
            kind: ChannelKind::Kraus(vec![ComplexMatrix::identity(1 << n)]),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    /// The channel as a Kraus family (a unitary is a one-element family).
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        match &self.kind {
            ChannelKind::Unitary(u) => vec![u.clone()],
            ChannelKind::Kraus(ops) => ops.clone(),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: dim,
            });
        }
        Ok(())
    }

    /// Linear action on an arbitrary operator: `UAU†` or `Σ K A K†`.
    pub fn apply_to_operator(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(a.dim())?;
        Ok(match &self.kind {
            ChannelKind::Unitary(u) => a.conjugate_by(u)?,
            ChannelKind::Kraus(ops) => {
                let mut acc = ComplexMatrix::zeros(a.dim());
                for k in ops {
                    acc = &acc + &a.conjugate_by(k)?;
                }
                acc
            }
        })
    }

    /// Maps a state and checks the output is still a state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_with_tol(rho, DEFAULT_TOL)
    }

    pub fn apply_with_tol(&self, rho: &DensityMatrix, tol: f64) -> Result<DensityMatrix> {
        let out = self.apply_to_operator(rho.matrix())?;
        validate_density(&out, tol).map_err(|e| Error::ChannelDefect(Box::new(e)))
    }

    /// Max entry of `|U†U − I|` or `|Σ K†K − I|`.
    pub fn check_trace_preserving(&self, tol: f64) -> TraceReport {
        let max_deviation = match &self.kind {
            ChannelKind::Unitary(u) => unitarity_deviation(u),
            ChannelKind::Kraus(ops) => {
                let mut sum = ComplexMatrix::zeros(self.dim());
                for k in ops {
                    sum = &sum + &(&k.adjoint() * k);
                }
                sum.max_abs_diff(&ComplexMatrix::identity(self.dim()))
                    .expect("same dimension")
            }
        };
        TraceReport {
            max_deviation,
            ok: max_deviation <= tol,
        }
    }
}

/// `ρ ↦ (1−p)ρ + p·1/2^n` as the Kraus family
/// `{√(1−p+p/4^n)·1} ∪ {√(p/4^n)·f_j}`.
pub fn depolarizing(n: usize, p: f64) -> Result<Channel> {
    check_dense_cap(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "depolarizing probability {p} not in [0, 1]"
        )));
    }
    let d2 = (1u64 << (2 * n)) as f64;
    let mut ops = vec![ComplexMatrix::identity(1 << n).scale_real((1.0 - p + p / d2).sqrt())];
    if p > 0.0 {
        let w = (p / d2).sqrt();
        for f in basis(n)? {
            ops.push(f.to_matrix()?.scale_real(w));
        }
    }
    Ok(Channel {
        n,
        kind: ChannelKind::Kraus(ops),
    })
}

/// Single-qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("damping rate {gamma} not in [0, 1]")));
    }
    let k0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]])?;
    let k1 = ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]])?;
    Ok(Channel {
        n: 1,
        kind: ChannelKind::Kraus(vec![k0, k1]),
    })
}

/// `outer ∘ inner`: all Kraus products `K_outer · K_inner`.
pub fn compose(outer: &Channel, inner: &Channel) -> Result<Channel> {
    if outer.n != inner.n {
        return Err(Error::DimensionMismatch {
            left: outer.dim(),
            right: inner.dim(),
        });
    }
    let kind = match (&outer.kind, &inner.kind) {
        (ChannelKind::Unitary(a), ChannelKind::Unitary(b)) => ChannelKind::Unitary(a * b),
        _ => {
            let outer_ops = outer.kraus_operators();
            let inner_ops = inner.kraus_operators();
            ChannelKind::Kraus(
                outer_ops
                    .iter()
                    .flat_map(|a| inner_ops.iter().map(move |b| a * b))
                    .collect(),
            )
        }
    };
    Ok(Channel { n: outer.n, kind })
}

/// Orthonormalizes the columns of a tall `rows × cols` matrix (row-major)
/// with modified Gram–Schmidt.
fn orthonormal_columns(rows: usize, cols: usize, data: &mut [Complex64]) -> Result<()> {
    for c in 0..cols {
        for prev in 0..c {
            let mut proj = ZERO;
            for r in 0..rows {
                proj += data[r * cols + prev].conj() * data[r * cols + c];
            }
            for r in 0..rows {
                let v = data[r * cols + prev];
                data[r * cols + c] -= proj * v;
            }
        }
        let norm = (0..rows)
            .map(|r| data[r * cols + c].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm < 1e-12 {
            return Err(Error::Construction("degenerate random matrix".into()));
        }
        for r in 0..rows {
            data[r * cols + c] /= norm;
        }
    }
    Ok(())
}

/// Haar-random unitary of size `dim` (Gram–Schmidt on a complex Ginibre matrix).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let mut data = gaussian_ket(dim * dim, rng);
    orthonormal_columns(dim, dim, &mut data)?;
    ComplexMatrix::from_row_major(dim, data)
}

/// Random channel with `rank` Kraus operators, cut from a random isometry.
pub fn random_kraus_channel<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> Result<Channel> {
    check_dense_cap(n)?;
    if rank == 0 {
        return Err(Error::Domain("Kraus rank must be positive".into()));
    }
    let dim = 1usize << n;
    let rows = dim * rank;
    let mut data = gaussian_ket(rows * dim, rng);
    orthonormal_columns(rows, dim, &mut data)?;
    let ops = data
        .chunks(dim * dim)
        .map(|block| ComplexMatrix::from_row_major(dim, block.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Channel {
        n,
        kind: ChannelKind::Kraus(ops),
    })
}
