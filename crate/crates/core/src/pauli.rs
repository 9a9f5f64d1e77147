//! Symbolic Pauli strings and the polarization basis.
//!
//! A [`PauliString`] is an n-fold Kronecker product `σ_{μ1} ⊗ … ⊗ σ_{μn}`
//! with labels `0..=3` (identity, x, y, z). The non-identity strings of n
//! qubits are numbered `1..4^n` by reading the labels as base-4 digits, first
//! tensor factor most significant; that numbering is the [`BasisIndex`].

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{kron, ComplexMatrix, MAX_DENSE_QUBITS, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_label(label: u8) -> Result<Self> {
        Self::ALL
            .get(label as usize)
            .copied()
            .ok_or_else(|| Error::Domain(format!("Pauli label {label} not in 0..=3")))
    }

    pub fn label(self) -> u8 {
        self as u8
    }

    pub fn matrix(self) -> ComplexMatrix {
        let i = Complex64::i();
        let rows = match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        ComplexMatrix::from_row_major(2, rows.concat()).expect("2x2")
    }

    /// Single-qubit product `self · rhs = phase · result`.
    pub fn times(self, rhs: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (Phase::One, p),
            (a, b) if a == b => (Phase::One, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MinusI, Z),
            (Z, Y) => (Phase::MinusI, X),
            (X, Z) => (Phase::MinusI, Y),
            _ => unreachable!(),
        }
    }
}

/// Exact phase from the group {1, i, −1, −i}, stored as a power of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One = 0,
    I = 1,
    MinusOne = 2,
    MinusI = 3,
}

impl Phase {
    fn from_power(k: u8) -> Self {
        match k % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self as u8 + rhs as u8)
    }
}

/// Index `j ∈ [1, 4^n − 1]` of a non-identity basis element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn new(j: usize, n: usize) -> Result<Self> {
        let count = basis_len(n)?;
        if j == 0 || j > count {
            return Err(Error::Domain(format!(
                "basis index {j} outside [1, {count}] for {n} qubit(s)"
            )));
        }
        Ok(Self(j))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Number of non-identity basis elements, `4^n − 1`.
pub fn basis_len(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Domain("qubit count must be positive".into()));
    }
    // 4^n must fit in usize; dense work is capped far below this anyway.
    if n >= usize::BITS as usize / 2 {
        return Err(Error::Domain(format!(
            "{n} qubits overflows the basis index"
        )));
    }
    Ok((1usize << (2 * n)) - 1)
}

pub(crate) fn check_dense_cap(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::Domain(format!(
            "qubit count {n} outside dense range 1..={MAX_DENSE_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Domain(
                "Pauli string needs at least one qubit".into(),
            ));
        }
        Ok(Self { labels })
    }

    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        let labels = labels
            .iter()
            .map(|&l| Pauli::from_label(l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; n])
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    /// Base-4 reading of the labels; `None` for the all-identity string.
    pub fn basis_index(&self) -> Option<BasisIndex> {
        let j = self
            .labels
            .iter()
            .fold(0usize, |acc, p| acc * 4 + p.label() as usize);
        (j != 0).then_some(BasisIndex(j))
    }

    /// Dense `2^n × 2^n` matrix of the Kronecker product.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        check_dense_cap(self.n())?;
        let mut it = self.labels.iter();
        let first = it.next().expect("non-empty").matrix();
        Ok(it.fold(first, |acc, p| kron(&acc, &p.matrix())))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.labels {
            let c = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The basis element `f_j` of an `n`-qubit system.
pub fn basis_element(j: usize, n: usize) -> Result<PauliString> {
    let idx = BasisIndex::new(j, n)?;
    let mut rest = idx.get();
    let mut labels = vec![Pauli::I; n];
    for slot in labels.iter_mut().rev() {
        *slot = Pauli::ALL[rest % 4];
        rest /= 4;
    }
    PauliString::new(labels)
}

/// All `4^n − 1` basis elements in index order.
pub fn basis(n: usize) -> Result<Vec<PauliString>> {
    let count = basis_len(n)?;
    (1..=count).map(|j| basis_element(j, n)).collect()
}

/// Symbolic product `a · b = phase · result`, factor by factor.
pub fn pauli_product(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let mut phase = Phase::One;
    let labels = a
        .labels
        .iter()
        .zip(&b.labels)
        .map(|(&x, &y)| {
            let (p, r) = x.times(y);
            phase = phase * p;
            r
        })
        .collect();
    Ok((phase, PauliString { labels }))
}

/// `tr(f_i f_j)` computed symbolically: `2^n` if the strings coincide, else 0.
pub fn trace_of_product(a: &PauliString, b: &PauliString) -> Result<i64> {
    let (phase, prod) = pauli_product(a, b)?;
    if !prod.is_identity() {
        return Ok(0);
    }
    let scale = 1i64 << a.n();
    match phase {
        Phase::One => Ok(scale),
        Phase::MinusOne => Ok(-scale),
        // Products of Hermitian Paulis with identity result are real.
        Phase::I | Phase::MinusI => Err(Error::Consistency(
            "imaginary phase on identity product".into(),
        )),
    }
}

/// `exp(−iθP) = cos θ · 1 − i sin θ · P` for a Pauli string `P`.
pub fn pauli_rotation(p: &PauliString, angle: f64) -> Result<ComplexMatrix> {
    let m = p.to_matrix()?;
    let id = ComplexMatrix::identity(m.dim());
    Ok(&id.scale_real(angle.cos()) + &m.scale(Complex64::new(0.0, -angle.sin())))
}
