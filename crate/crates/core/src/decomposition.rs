//! Pure-state decompositions of the Pauli basis and the measurement protocol
//! built from them.
//!
//! Each single-qubit Pauli splits into its eigenprojectors,
//! `σ_j = ρ_{+j} − ρ_{−j}` with `ρ_{±j} = ½(1 ± σ_j)`, and the identity into
//! `1 = ρ_{+a} + ρ_{−a}` along any axis `a`. Tensoring those splits writes
//! every basis string as a signed sum of `2^n` pure product states. The
//! protocol substitutes these sums into the closed-form average fidelity, so
//! the fidelity of any channel becomes a weighted sum of
//! `tr(U ρ_s U† · M(ρ_t))` over a finite set of preparable states.

use std::collections::BTreeMap;
use std::fmt;

use crate::channels::{check_unitary, Channel};
use crate::error::{Error, Result};
use crate::matrix::{kron, ComplexMatrix};
use crate::pauli::{basis, Pauli, PauliString};
use crate::states::{purity, DensityMatrix, DEFAULT_TOL};

/// Largest qubit count for which a protocol is synthesized (`6^n` states).
pub const MAX_PROTOCOL_QUBITS: usize = 3;

const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The single-qubit eigenstate `ρ_{±axis} = ½(1 ± σ_axis)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxialState {
    pub axis: Pauli,
    pub sign: Sign,
}

impl AxialState {
    pub fn new(axis: Pauli, sign: Sign) -> Result<Self> {
        if axis == Pauli::I {
            return Err(Error::Domain("axial state needs axis x, y or z".into()));
        }
        Ok(Self { axis, sign })
    }

    pub fn matrix(self) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        (&id + &self.axis.matrix().scale_real(self.sign.value())).scale_real(0.5)
    }
}

impl fmt::Display for AxialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        let a = match self.axis {
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
            Pauli::I => '1',
        };
        write!(f, "{s}{a}")
    }
}

/// Tensor product of axial states, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductLabel(pub Vec<AxialState>);

impl ProductLabel {
    pub fn matrix(&self) -> ComplexMatrix {
        let mut it = self.0.iter();
        let first = it.next().expect("non-empty label").matrix();
        it.fold(first, |acc, s| kron(&acc, &s.matrix()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bytes = text.as_bytes();
        if bytes.is_empty() || !bytes.len().is_multiple_of(2) {
            return Err(Error::Domain(format!("malformed product label {text:?}")));
        }
        bytes
            .chunks(2)
            .map(|pair| {
                let sign = match pair[0] {
                    b'+' => Sign::Plus,
                    b'-' => Sign::Minus,
                    _ => return Err(Error::Domain(format!("bad sign in label {text:?}"))),
                };
                let axis = match pair[1] {
                    b'x' => Pauli::X,
                    b'y' => Pauli::Y,
                    b'z' => Pauli::Z,
                    _ => return Err(Error::Domain(format!("bad axis in label {text:?}"))),
                };
                Ok(AxialState { axis, sign })
            })
            .collect::<Result<Vec<_>>>()
            .map(ProductLabel)
    }
}

impl fmt::Display for ProductLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub state: DensityMatrix,
    /// Set when the state is a product of axial states.
    pub label: Option<ProductLabel>,
}

/// `Σ coeff_k · ρ_k` with every `ρ_k` pure.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateCombination {
    pub n: usize,
    pub terms: Vec<Term>,
}

impl PureStateCombination {
    fn from_labels(n: usize, terms: Vec<(f64, ProductLabel)>) -> Self {
        let terms = terms
            .into_iter()
            .map(|(coeff, label)| Term {
                coeff,
                state: DensityMatrix::from_trusted(label.matrix()),
                label: Some(label),
            })
            .collect();
        Self { n, terms }
    }

    /// The operator `Σ coeff · state`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(1 << self.n), |acc, t| {
                &acc + &t.state.matrix().scale_real(t.coeff)
            })
    }
}

fn axis_from_index(j: u8) -> Result<Pauli> {
    match j {
        1..=3 => Pauli::from_label(j),
        _ => Err(Error::Domain(format!("axis {j} not in 1..=3"))),
    }
}

/// `σ_j = ρ_{+j} − ρ_{−j}`.
pub fn decompose_single_qubit_pauli(j: u8) -> Result<PureStateCombination> {
    let axis = axis_from_index(j)?;
    Ok(PureStateCombination::from_labels(
        1,
        vec![
            (1.0, ProductLabel(vec![AxialState::new(axis, Sign::Plus)?])),
            (
                -1.0,
                ProductLabel(vec![AxialState::new(axis, Sign::Minus)?]),
            ),
        ],
    ))
}

/// `1 = ρ_{+a} + ρ_{−a}`.
pub fn decompose_identity_factor(axis: u8) -> Result<PureStateCombination> {
    let axis = axis_from_index(axis)?;
    Ok(PureStateCombination::from_labels(
        1,
        vec![
            (1.0, ProductLabel(vec![AxialState::new(axis, Sign::Plus)?])),
            (1.0, ProductLabel(vec![AxialState::new(axis, Sign::Minus)?])),
        ],
    ))
}

/// Signed labels for one qubit factor.
fn factor_terms(p: Pauli, identity_axis: Pauli) -> [(f64, AxialState); 2] {
    let (axis, minus_coeff) = match p {
        Pauli::I => (identity_axis, 1.0),
        a => (a, -1.0),
    };
    [
        (
            1.0,
            AxialState {
                axis,
                sign: Sign::Plus,
            },
        ),
        (
            minus_coeff,
            AxialState {
                axis,
                sign: Sign::Minus,
            },
        ),
    ]
}

fn product_terms(f: &PauliString, identity_axis: Pauli) -> Vec<(f64, ProductLabel)> {
    let mut terms = vec![(1.0, Vec::with_capacity(f.n()))];
    for &p in f.labels() {
        let split = factor_terms(p, identity_axis);
        terms = terms
            .into_iter()
            .flat_map(|(c, states)| {
                split.iter().map(move |&(fc, s)| {
                    let mut next: Vec<AxialState> = states.clone();
                    next.push(s);
                    (c * fc, next)
                })
            })
            .collect();
    }
    terms
        .into_iter()
        .map(|(c, states)| (c, ProductLabel(states)))
        .collect()
}

/// Writes a non-identity Pauli string as `2^n` signed pure product states.
/// Identity factors split along `identity_axis` (1, 2 or 3).
pub fn decompose_pauli_string(f: &PauliString, identity_axis: u8) -> Result<PureStateCombination> {
    let identity_axis = axis_from_index(identity_axis)?;
    if f.is_identity() {
        return Err(Error::Domain(
            "the all-identity string is not a polarization basis element".into(),
        ));
    }
    crate::pauli::check_dense_cap(f.n())?;
    Ok(PureStateCombination::from_labels(
        f.n(),
        product_terms(f, identity_axis),
    ))
}

/// Which two-qubit idempotent identity to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdempotentForm {
    /// `σ_μ⊗σ_ν = (P_{+μν} − P_{−μν})(P_{+νμ} + P_{−νμ})`, valid for `μ > ν`.
    Paired,
    /// `σ_μ⊗σ_ν = (P_{+μ0} − P_{−μ0})(P_{+0ν} − P_{−0ν})`, valid for `μ, ν > 0`.
    Separated,
}

impl IdempotentForm {
    pub fn applies(self, mu: u8, nu: u8) -> bool {
        match self {
            IdempotentForm::Paired => mu > nu,
            IdempotentForm::Separated => mu > 0 && nu > 0,
        }
    }
}

/// `P_{±μν} = ½(1 ± σ_μ⊗σ_ν)`.
fn simple_idempotent(sign: Sign, mu: Pauli, nu: Pauli) -> Result<ComplexMatrix> {
    let f = PauliString::new(vec![mu, nu])?.to_matrix()?;
    Ok((&ComplexMatrix::identity(4) + &f.scale_real(sign.value())).scale_real(0.5))
}

fn check_rank_one_projector(p: &ComplexMatrix) -> Result<()> {
    let trace_dev = (p.trace().re - 1.0).abs().max(p.trace().im.abs());
    let idem_dev = (p * p).max_abs_diff(p)?;
    let herm_dev = p.hermiticity_deviation();
    if trace_dev > PROJECTOR_TOL || idem_dev > PROJECTOR_TOL || herm_dev > PROJECTOR_TOL {
        return Err(Error::Construction(format!(
            "term is not a rank-1 projector (trace dev {trace_dev:e}, P^2-P dev {idem_dev:e}, hermiticity dev {herm_dev:e})"
        )));
    }
    Ok(())
}

/// Expands one of the two-qubit idempotent identities for `σ_μ⊗σ_ν` into
/// four signed products of commuting simple idempotents, each checked to be
/// a pure state.
pub fn two_qubit_idempotent_decomposition(
    mu: u8,
    nu: u8,
    form: IdempotentForm,
) -> Result<PureStateCombination> {
    let (m, v) = (Pauli::from_label(mu)?, Pauli::from_label(nu)?);
    if mu == 0 && nu == 0 {
        return Err(Error::Domain(
            "(0, 0) is the excluded identity element".into(),
        ));
    }
    if !form.applies(mu, nu) {
        return Err(Error::Domain(format!(
            "{form:?} identity does not apply to (mu, nu) = ({mu}, {nu})"
        )));
    }
    // Each term is coeff · P_{a, left} · P_{b, right}.
    let (left, right, second_signed) = match form {
        IdempotentForm::Paired => ((m, v), (v, m), false),
        IdempotentForm::Separated => ((m, Pauli::I), (Pauli::I, v), true),
    };
    let mut terms = Vec::with_capacity(4);
    for a in [Sign::Plus, Sign::Minus] {
        for b in [Sign::Plus, Sign::Minus] {
            let coeff = a.value() * if second_signed { b.value() } else { 1.0 };
            let p =
                &simple_idempotent(a, left.0, left.1)? * &simple_idempotent(b, right.0, right.1)?;
            check_rank_one_projector(&p)?;
            terms.push(Term {
                coeff,
                state: DensityMatrix::from_trusted(p),
                label: None,
            });
        }
    }
    Ok(PureStateCombination { n: 2, terms })
}

/// Finite pure-state measurement scheme for the average fidelity:
/// `⟨F⟩ = offset + scale · Σ_{s,t} weight[s][t] · tr(projector_s · M(preparation_t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub n: usize,
    pub labels: Vec<ProductLabel>,
    pub preparations: Vec<DensityMatrix>,
    pub projectors: Vec<DensityMatrix>,
    /// Indexed `[projector][preparation]`.
    pub weight: Vec<Vec<f64>>,
    pub offset: f64,
    pub scale: f64,
}

/// Builds the protocol for target `u` on `n ≤ 3` qubits, identity factors
/// split along z.
pub fn build_protocol(u: &ComplexMatrix, n: usize) -> Result<ProtocolSpec> {
    build_protocol_with_axis(u, n, 3)
}

pub fn build_protocol_with_axis(
    u: &ComplexMatrix,
    n: usize,
    identity_axis: u8,
) -> Result<ProtocolSpec> {
    if n == 0 || n > MAX_PROTOCOL_QUBITS {
        return Err(Error::Domain(format!(
            "protocol synthesis limited to 1..={MAX_PROTOCOL_QUBITS} qubits, got {n}"
        )));
    }
    let un = check_unitary(u, DEFAULT_TOL)?;
    if un != n {
        return Err(Error::DimensionMismatch {
            left: 1 << n,
            right: u.dim(),
        });
    }
    let axis = axis_from_index(identity_axis)?;

    let decompositions: Vec<Vec<(f64, ProductLabel)>> =
        basis(n)?.iter().map(|f| product_terms(f, axis)).collect();

    let mut index: BTreeMap<ProductLabel, usize> = BTreeMap::new();
    for terms in &decompositions {
        for (_, label) in terms {
            let next = index.len();
            index.entry(label.clone()).or_insert(next);
        }
    }
    // Re-number in label order so output is independent of discovery order.
    let labels: Vec<ProductLabel> = index.keys().cloned().collect();
    for (k, slot) in index.values_mut().enumerate() {
        *slot = k;
    }

    let count = labels.len();
    let mut weight = vec![vec![0.0; count]; count];
    for terms in &decompositions {
        let coords: Vec<(usize, f64)> = terms.iter().map(|(c, l)| (index[l], *c)).collect();
        for &(s, cs) in &coords {
            for &(t, ct) in &coords {
                weight[s][t] += cs * ct;
            }
        }
    }

    let preparations: Vec<DensityMatrix> = labels
        .iter()
        .map(|l| DensityMatrix::from_trusted(l.matrix()))
        .collect();
    let projectors = preparations
        .iter()
        .map(|p| Ok(DensityMatrix::from_trusted(p.matrix().conjugate_by(u)?)))
        .collect::<Result<Vec<_>>>()?;

    let big_n = (1usize << n) as f64;
    Ok(ProtocolSpec {
        n,
        labels,
        preparations,
        projectors,
        weight,
        offset: 1.0 / big_n,
        scale: 1.0 / ((big_n + 1.0) * big_n * big_n),
    })
}

impl ProtocolSpec {
    /// Evaluates the protocol on channel `m`.
    pub fn evaluate(&self, m: &Channel) -> Result<f64> {
        if m.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: 1 << self.n,
                right: m.dim(),
            });
        }
        let outputs = self
            .preparations
            .iter()
            .map(|p| m.apply(p))
            .collect::<Result<Vec<_>>>()?;
        let mut sum = 0.0;
        for (s, proj) in self.projectors.iter().enumerate() {
            for (t, out) in outputs.iter().enumerate() {
                let w = self.weight[s][t];
                if w == 0.0 {
                    continue;
                }
                let z = proj.matrix().trace_of_product(out.matrix())?;
                sum += w * crate::matrix::real_part_checked(
                    z,
                    crate::states::IMAG_TOL,
                    "protocol term",
                )?;
            }
        }
        Ok(self.offset + self.scale * sum)
    }

    /// Every preparation and projector is pure to within `tol`.
    pub fn max_purity_deviation(&self) -> f64 {
        self.preparations
            .iter()
            .chain(&self.projectors)
            .map(|s| (purity(s) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing, random_kraus_channel};
    use crate::fidelity::average_fidelity;
    use crate::rng::stream;

    fn ps(labels: &[u8]) -> PauliString {
        PauliString::from_labels(labels).unwrap()
    }

    #[test]
    fn sigma_z_splits_into_basis_states() {
        let d = decompose_single_qubit_pauli(3).unwrap();
        assert_eq!(d.terms.len(), 2);
        assert_eq!(d.terms[0].coeff, 1.0);
        assert_eq!(d.terms[0].state, DensityMatrix::zero_state(1).unwrap());
        assert_eq!(d.terms[1].coeff, -1.0);
        let one = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(d.terms[1].state.matrix(), &one);
        assert_eq!(d.reconstruct(), ps(&[3]).to_matrix().unwrap());
        for t in &d.terms {
            assert!((purity(&t.state) - 1.0).abs() < 1e-12);
        }
        assert!(decompose_single_qubit_pauli(0).is_err());
        assert!(decompose_single_qubit_pauli(4).is_err());
    }

    #[test]
    fn identity_factor_completeness() {
        for axis in 1..=3 {
            let d = decompose_identity_factor(axis).unwrap();
            assert!(
                d.reconstruct()
                    .max_abs_diff(&ComplexMatrix::identity(2))
                    .unwrap()
                    < 1e-15
            );
            assert!(d
                .terms
                .iter()
                .all(|t| (purity(&t.state) - 1.0).abs() < 1e-12));
        }
        assert!(decompose_identity_factor(0).is_err());
    }

    #[test]
    fn x_tensor_y_has_four_signed_terms() {
        let d = decompose_pauli_string(&ps(&[1, 2]), 3).unwrap();
        assert_eq!(d.terms.len(), 4);
        let got: Vec<(f64, String)> = d
            .terms
            .iter()
            .map(|t| (t.coeff, t.label.as_ref().unwrap().to_string()))
            .collect();
        assert_eq!(
            got,
            vec![
                (1.0, "+x+y".into()),
                (-1.0, "+x-y".into()),
                (-1.0, "-x+y".into()),
                (1.0, "-x-y".into()),
            ]
        );
        let dense = &ps(&[1, 0]).to_matrix().unwrap() * &ps(&[0, 2]).to_matrix().unwrap();
        assert!(d.reconstruct().max_abs_diff(&dense).unwrap() < 1e-12);
    }

    #[test]
    fn z_tensor_identity_expansion() {
        let d = decompose_pauli_string(&ps(&[3, 0]), 3).unwrap();
        let got: Vec<(f64, String)> = d
            .terms
            .iter()
            .map(|t| (t.coeff, t.label.as_ref().unwrap().to_string()))
            .collect();
        assert_eq!(
            got,
            vec![
                (1.0, "+z+z".into()),
                (1.0, "+z-z".into()),
                (-1.0, "-z+z".into()),
                (-1.0, "-z-z".into()),
            ]
        );
        assert!(
            d.reconstruct()
                .max_abs_diff(&ps(&[3, 0]).to_matrix().unwrap())
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn single_factor_string_matches_single_qubit_split() {
        assert_eq!(
            decompose_pauli_string(&ps(&[3]), 3).unwrap(),
            decompose_single_qubit_pauli(3).unwrap()
        );
        assert!(matches!(
            decompose_pauli_string(&ps(&[0, 0]), 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn paired_identity_for_x_identity() {
        let d = two_qubit_idempotent_decomposition(1, 0, IdempotentForm::Paired).unwrap();
        assert_eq!(d.terms.len(), 4);
        for t in &d.terms {
            let m = t.state.matrix();
            assert!((m.trace().re - 1.0).abs() < 1e-12);
            assert!((m * m).max_abs_diff(m).unwrap() < 1e-12);
        }
        assert!(
            d.reconstruct()
                .max_abs_diff(&ps(&[1, 0]).to_matrix().unwrap())
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn paired_identity_for_y_x() {
        let d = two_qubit_idempotent_decomposition(2, 1, IdempotentForm::Paired).unwrap();
        assert!(
            d.reconstruct()
                .max_abs_diff(&ps(&[2, 1]).to_matrix().unwrap())
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn inapplicable_forms_rejected() {
        assert!(two_qubit_idempotent_decomposition(0, 0, IdempotentForm::Paired).is_err());
        assert!(two_qubit_idempotent_decomposition(1, 2, IdempotentForm::Paired).is_err());
        assert!(two_qubit_idempotent_decomposition(2, 2, IdempotentForm::Paired).is_err());
        assert!(two_qubit_idempotent_decomposition(1, 0, IdempotentForm::Separated).is_err());
        assert!(two_qubit_idempotent_decomposition(0, 3, IdempotentForm::Separated).is_err());
        assert!(two_qubit_idempotent_decomposition(4, 1, IdempotentForm::Paired).is_err());
    }

    #[test]
    fn labels_round_trip_through_text() {
        let l = ProductLabel::parse("+x-z+y").unwrap();
        assert_eq!(l.to_string(), "+x-z+y");
        assert!(ProductLabel::parse("+q").is_err());
        assert!(ProductLabel::parse("+x-").is_err());
    }

    #[test]
    fn single_qubit_protocol_uses_axial_states() {
        let p = build_protocol(&ComplexMatrix::identity(2), 1).unwrap();
        assert_eq!(p.preparations.len(), 6);
        let c = depolarizing(1, 0.3).unwrap();
        let want = average_fidelity(&ComplexMatrix::identity(2), &c, 1)
            .unwrap()
            .value;
        assert!((p.evaluate(&c).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn two_qubit_protocol_matches_closed_form() {
        let u = ComplexMatrix::identity(4);
        let p = build_protocol(&u, 2).unwrap();
        assert!(p.preparations.len() <= 36);
        assert!((p.evaluate(&Channel::identity(2).unwrap()).unwrap() - 1.0).abs() < 1e-10);
        let c = random_kraus_channel(2, 3, &mut stream(12)).unwrap();
        let want = average_fidelity(&u, &c, 2).unwrap().value;
        assert!((p.evaluate(&c).unwrap() - want).abs() < 1e-10);
        assert!(p.max_purity_deviation() < 1e-10);
    }

    #[test]
    fn protocol_cap() {
        assert!(matches!(
            build_protocol(&ComplexMatrix::identity(16), 4),
            Err(Error::Domain(_))
        ));
    }
}
