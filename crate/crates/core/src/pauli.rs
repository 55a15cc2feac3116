//! Pauli strings, the normalized Pauli ("nice") operator basis, and the
//! density-matrix / coherence-vector correspondence
//! `ρ = I/d + Σ_j v_j F_j` with `F_j = P_j / √d`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};

pub const MAX_QUBITS: usize = 9;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Minimum eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOL: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> CMat {
        let i = linalg::I;
        let data = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        CMat::from_row_slice(2, 2, &data)
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Config(format!("unknown Pauli letter '{other}'"))),
        }
    }
}

/// Tensor product of single-qubit Paulis; letter 0 acts on qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n])
    }

    /// String with `p` on `qubit` and identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = p;
        Self::new(letters)
    }

    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; n];
        for &(q, p) in sites {
            letters[q] = p;
        }
        Self::new(letters)
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn hamming_weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.hamming_weight() == 0
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    fn masks(&self) -> (usize, usize, u32) {
        let n = self.n();
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (q, p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    /// `P |c⟩ = phase(c) |c ⊕ x⟩`; returns `(x, phase)` as a closure-friendly pair.
    fn action(&self) -> (usize, impl Fn(usize) -> Complex64) {
        let (x, z, ny) = self.masks();
        let base = linalg::I.powu(ny);
        (x, move |col: usize| {
            if (col & z).count_ones().is_multiple_of(2) {
                base
            } else {
                -base
            }
        })
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn matrix(&self) -> CMat {
        let dim = 1usize << self.n();
        let (x, phase) = self.action();
        let mut m = CMat::zeros(dim, dim);
        for col in 0..dim {
            m[(col ^ x, col)] = phase(col);
        }
        m
    }

    /// Matrix restricted to `qubits` (letters elsewhere must be identity).
    pub fn local_matrix(&self, qubits: &[usize]) -> CMat {
        let sub = PauliString::new(qubits.iter().map(|&q| self.letters[q]).collect());
        sub.matrix()
    }

    /// `Tr(P m)` in `O(d)`.
    pub fn trace_product(&self, m: &CMat) -> Complex64 {
        let dim = 1usize << self.n();
        let (x, phase) = self.action();
        (0..dim).map(|col| phase(col) * m[(col, col ^ x)]).sum()
    }

    /// `m += coeff * P`.
    pub fn add_scaled_to(&self, m: &mut CMat, coeff: Complex64) {
        let dim = 1usize << self.n();
        let (x, phase) = self.action();
        for col in 0..dim {
            m[(col ^ x, col)] += coeff * phase(col);
        }
    }

    fn ordering_key(&self) -> (usize, Vec<usize>, Vec<Pauli>) {
        let support = self.support();
        let letters = support.iter().map(|&q| self.letters[q]).collect();
        (self.hamming_weight(), support, letters)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Hamming weight first, then support positions, then letters `X < Y < Z`.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n()
            .cmp(&other.n())
            .then_with(|| self.ordering_key().cmp(&other.ordering_key()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s.chars().map(Pauli::try_from).collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Config("empty Pauli string".into()));
        }
        Ok(Self::new(letters))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Normalized Pauli basis `F_j = P_j / √d`, ordered by Hamming weight.
#[derive(Debug, Clone)]
pub struct NiceBasis {
    n: usize,
    strings: Vec<PauliString>,
}

impl NiceBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Number of elements, `d²`.
    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn string(&self, j: usize) -> &PauliString {
        &self.strings[j]
    }

    pub fn index_of(&self, p: &PauliString) -> Option<usize> {
        self.strings.binary_search(p).ok()
    }

    /// Normalization `1/√d`.
    pub fn scale(&self) -> f64 {
        1.0 / (self.dim() as f64).sqrt()
    }

    /// Dense `F_j`.
    pub fn element(&self, j: usize) -> CMat {
        self.strings[j].matrix().scale(self.scale())
    }
}

pub fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Size {
            n,
            min: 1,
            max: MAX_QUBITS,
        })
    }
}

pub fn build_nice_basis(n: usize) -> Result<NiceBasis> {
    check_qubits(n)?;
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let total = 1usize << (2 * n);
    let mut strings: Vec<PauliString> = (0..total)
        .map(|mut code| {
            let mut s = vec![Pauli::I; n];
            for q in (0..n).rev() {
                s[q] = letters[code & 3];
                code >>= 2;
            }
            PauliString::new(s)
        })
        .collect();
    strings.sort();
    Ok(NiceBasis { n, strings })
}

/// Validated density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    data: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(data: CMat) -> Result<Self> {
        let n = dim_to_qubits(data.nrows())?;
        if data.ncols() != data.nrows() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                got: data.ncols(),
            });
        }
        let herm = linalg::hermiticity_residual(&data);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState {
                reason: format!("not Hermitian (residual {herm:.3e})"),
                min_eigenvalue: f64::NAN,
            });
        }
        let tr = linalg::trace(&data);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState {
                reason: format!("trace {:.12} + {:.3e}i", tr.re, tr.im),
                min_eigenvalue: f64::NAN,
            });
        }
        let min_eig = linalg::min_eigenvalue(&data);
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidState {
                reason: "not positive semidefinite".into(),
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self { n, data })
    }

    pub fn zero_state(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let d = 1usize << n;
        let mut data = CMat::zeros(d, d);
        data[(0, 0)] = ONE;
        Ok(Self { n, data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let d = 1usize << n;
        Ok(Self {
            n,
            data: linalg::identity(d).scale(1.0 / d as f64),
        })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let n = dim_to_qubits(psi.len())?;
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState {
                reason: "zero vector".into(),
                min_eigenvalue: 0.0,
            });
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Ok(Self {
            n,
            data: &v * v.adjoint(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.data)
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.data)
    }
}

pub(crate) fn dim_to_qubits(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: d.next_power_of_two().max(2),
            got: d,
        });
    }
    let n = d.trailing_zeros() as usize;
    check_qubits(n)?;
    Ok(n)
}

/// Real coordinates of the traceless part of a state in the nice basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceVector {
    pub n: usize,
    pub v: Vec<f64>,
}

impl CoherenceVector {
    pub fn new(n: usize, v: Vec<f64>) -> Result<Self> {
        check_qubits(n)?;
        let expected = (1usize << (2 * n)) - 1;
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: v.len(),
            });
        }
        Ok(Self { n, v })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            v: vec![0.0; (1usize << (2 * n)) - 1],
        }
    }

    pub fn norm(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        linalg::compensated_sum(self.v.iter().zip(other).map(|(a, b)| a * b))
    }

    /// Upper bound `√(1 − 1/d)` on the norm of any state's vector.
    pub fn max_norm(n: usize) -> f64 {
        (1.0 - 1.0 / (1usize << n) as f64).sqrt()
    }
}

/// Coordinates `Tr(F_j X)` for `j ≥ 1` of an arbitrary operator.
pub(crate) fn coordinates(x: &CMat, basis: &NiceBasis) -> Vec<f64> {
    let s = basis.scale();
    basis.strings[1..]
        .iter()
        .map(|p| p.trace_product(x).re * s)
        .collect()
}

pub fn to_coherence(rho: &DensityMatrix, basis: &NiceBasis) -> Result<CoherenceVector> {
    if rho.n() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: rho.n(),
        });
    }
    Ok(CoherenceVector {
        n: rho.n(),
        v: coordinates(&rho.data, basis),
    })
}

/// Operator `I/d + Σ v_j F_j` without any validation.
pub(crate) fn assemble(v: &[f64], basis: &NiceBasis) -> CMat {
    let d = basis.dim();
    let s = basis.scale();
    let mut m = linalg::identity(d).scale(1.0 / d as f64);
    for (p, &vj) in basis.strings[1..].iter().zip(v) {
        if vj != 0.0 {
            p.add_scaled_to(&mut m, Complex64::new(vj * s, 0.0));
        }
    }
    m
}

pub fn from_coherence(v: &CoherenceVector, basis: &NiceBasis) -> Result<DensityMatrix> {
    if v.n != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: v.n,
        });
    }
    if v.v.len() != basis.len() - 1 {
        return Err(Error::DimensionMismatch {
            expected: basis.len() - 1,
            got: v.v.len(),
        });
    }
    let norm = v.norm();
    let data = assemble(&v.v, basis);
    if norm > CoherenceVector::max_norm(v.n) + 1e-9 {
        return Err(Error::InvalidState {
            reason: format!("coherence vector norm {norm:.6} exceeds √(1 − 1/d)"),
            min_eigenvalue: linalg::min_eigenvalue(&data),
        });
    }
    let min_eig = linalg::min_eigenvalue(&data);
    if min_eig < POSITIVITY_TOL {
        return Err(Error::InvalidState {
            reason: "reconstructed matrix is not positive semidefinite".into(),
            min_eigenvalue: min_eig,
        });
    }
    Ok(DensityMatrix { n: v.n, data })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityCheck {
    pub purity: f64,
    pub coherence_norm: f64,
    pub residual: f64,
}

/// Compares `‖v‖` with `√(Tr ρ² − 1/d)`.
pub fn purity_identity_check(rho: &DensityMatrix) -> PurityCheck {
    let basis = build_nice_basis(rho.n()).expect("state qubit count already validated");
    let v = coordinates(&rho.data, &basis);
    let coherence_norm = linalg::compensated_sum(v.iter().map(|x| x * x)).sqrt();
    let purity = rho.purity();
    let rhs = (purity - 1.0 / rho.dim() as f64).max(0.0).sqrt();
    PurityCheck {
        purity,
        coherence_norm,
        residual: (coherence_norm - rhs).abs(),
    }
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = 1usize << n;
    let psi: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    DensityMatrix::pure(&psi)
}

/// Random full-rank mixed state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_mixed_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_qubits(n)?;
    let d = 1usize << n;
    let g = CMat::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    Ok(DensityMatrix {
        n,
        data: m.scale(1.0 / tr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_qubit_basis_is_normalized_paulis() {
        let b = build_nice_basis(1).unwrap();
        let names: Vec<String> = b.strings().iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["I", "X", "Y", "Z"]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (j, p) in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .enumerate()
        {
            let diff = b.element(j) - p.matrix().scale(s);
            assert!(linalg::max_abs(&diff) < 1e-15);
        }
    }

    #[test]
    fn two_qubit_basis_orders_by_weight() {
        let b = build_nice_basis(2).unwrap();
        assert_eq!(b.len(), 16);
        assert_eq!(b.string(0).hamming_weight(), 0);
        for j in 1..=6 {
            assert_eq!(b.string(j).hamming_weight(), 1, "index {j}");
        }
        for j in 7..16 {
            assert_eq!(b.string(j).hamming_weight(), 2, "index {j}");
        }
        let names: Vec<String> = b.strings()[1..7].iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["XI", "YI", "ZI", "IX", "IY", "IZ"]);
    }

    #[test]
    fn basis_is_orthonormal_and_traceless() {
        let b = build_nice_basis(3).unwrap();
        assert_eq!(b.len(), 64);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let j = rng.random_range(0..64);
            let k = rng.random_range(0..64);
            let ip = (b.element(j) * b.element(k)).trace();
            let expected = if j == k { 1.0 } else { 0.0 };
            assert!((ip.re - expected).abs() < 1e-12 && ip.im.abs() < 1e-12);
        }
        for j in 1..64 {
            assert!(b.element(j).trace().norm() < 1e-12);
        }
    }

    #[test]
    fn basis_size_guard() {
        assert!(matches!(build_nice_basis(0), Err(Error::Size { .. })));
        assert!(matches!(build_nice_basis(10), Err(Error::Size { .. })));
    }

    #[test]
    fn trace_product_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_mixed_state(3, &mut rng).unwrap();
        let p: PauliString = "YXZ".parse().unwrap();
        let dense = (p.matrix() * rho.data()).trace();
        assert!((dense - p.trace_product(rho.data())).norm() < 1e-14);
    }

    #[test]
    fn maximally_mixed_has_zero_vector() {
        let b = build_nice_basis(2).unwrap();
        let v = to_coherence(&DensityMatrix::maximally_mixed(2).unwrap(), &b).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn ground_state_vector() {
        let b = build_nice_basis(1).unwrap();
        let v = to_coherence(&DensityMatrix::zero_state(1).unwrap(), &b).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(v.v[0].abs() < 1e-15 && v.v[1].abs() < 1e-15);
        assert!((v.v[2] - s).abs() < 1e-15);
    }

    #[test]
    fn pure_state_norm_saturates_bound() {
        let b = build_nice_basis(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_pure_state(2, &mut rng).unwrap();
        let v = to_coherence(&rho, &b).unwrap();
        assert!((v.norm() - (1.0f64 - 0.25).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn from_coherence_plus_state() {
        let b = build_nice_basis(1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = from_coherence(&CoherenceVector::new(1, vec![s, 0.0, 0.0]).unwrap(), &b).unwrap();
        let plus = CMat::from_element(2, 2, Complex64::new(0.5, 0.0));
        assert!(linalg::max_abs(&(rho.data() - plus)) < 1e-15);
        let mixed = from_coherence(&CoherenceVector::zeros(1), &b).unwrap();
        assert!(linalg::max_abs(&(mixed.data() - linalg::identity(2).scale(0.5))) < 1e-15);
    }

    #[test]
    fn from_coherence_reports_non_positive_weight_two_axis() {
        // v = √3/2 along ZZ gives I/4 + (√3/4) ZZ with eigenvalue 1/4 − √3/4 < 0.
        let b = build_nice_basis(2).unwrap();
        let zz = b.index_of(&"ZZ".parse().unwrap()).unwrap();
        let mut v = vec![0.0; 15];
        v[zz - 1] = 3f64.sqrt() / 2.0;
        let brute = 0.25 - 3f64.sqrt() / 4.0;
        match from_coherence(&CoherenceVector::new(2, v).unwrap(), &b) {
            Err(Error::InvalidState { min_eigenvalue, .. }) => {
                assert!((min_eigenvalue - brute).abs() < 1e-12)
            }
            other => panic!("expected invalid state, got {other:?}"),
        }
    }

    #[test]
    fn density_matrix_validation() {
        let bad = linalg::identity(2).scale(0.4);
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::InvalidState { .. })
        ));
        let mut neg = CMat::zeros(2, 2);
        neg[(0, 0)] = Complex64::new(1.2, 0.0);
        neg[(1, 1)] = Complex64::new(-0.2, 0.0);
        match DensityMatrix::new(neg) {
            Err(Error::InvalidState { min_eigenvalue, .. }) => {
                assert!((min_eigenvalue + 0.2).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn purity_identity_examples() {
        let pure = purity_identity_check(&DensityMatrix::zero_state(1).unwrap());
        assert!((pure.purity - 1.0).abs() < 1e-15);
        assert!((pure.coherence_norm - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let mixed = purity_identity_check(&DensityMatrix::maximally_mixed(3).unwrap());
        assert!((mixed.purity - 0.125).abs() < 1e-15);
        assert!(mixed.coherence_norm < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_mixed_state(3, &mut rng).unwrap();
        assert!(purity_identity_check(&rho).residual <= 1e-10);
    }

    #[test]
    fn pauli_string_parsing_round_trip() {
        let p: PauliString = "xzIy".parse().unwrap();
        assert_eq!(p.to_string(), "XZIY");
        assert_eq!(p.support(), vec![0, 1, 3]);
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
