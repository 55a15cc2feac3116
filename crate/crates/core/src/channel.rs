//! CPTP channels in Kraus form and their affine action `v ↦ M v + c` on
//! coherence vectors.

use std::collections::BTreeMap;

use nalgebra::SVD;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat, RVec, ONE, ZERO};
use crate::pauli::{self, NiceBasis, Pauli};

/// Residual threshold for trace preservation and unitality.
pub const CHANNEL_TOL: f64 = 1e-9;
/// Explicit `M` matrices are only built up to this many qubits.
pub const MAX_AFFINE_QUBITS: usize = 3;
/// `‖M‖` must be below `1 − HS_MARGIN` to count as HS-contractive.
pub const HS_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct KrausChannel {
    n: usize,
    ops: Vec<CMat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrausValidation {
    pub trace_preserving: bool,
    pub unital: bool,
    pub trace_residual: f64,
    pub unital_residual: f64,
}

impl KrausChannel {
    /// Checks shapes only; see [`validate_kraus`] for the CPTP residuals.
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let d = first.nrows();
        for k in &ops {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: k.ncols().max(k.nrows()),
                });
            }
        }
        let n = pauli::dim_to_qubits(d)?;
        Ok(Self { n, ops })
    }

    /// Builds and requires trace preservation.
    pub fn checked(ops: Vec<CMat>) -> Result<Self> {
        let ch = Self::new(ops)?;
        let report = validate_kraus(&ch);
        if !report.trace_preserving {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (residual {:.3e})",
                report.trace_residual
            )));
        }
        Ok(ch)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    /// `Σ K x K†` on the full space.
    pub fn apply(&self, x: &CMat) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for k in &self.ops {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Hilbert-Schmidt adjoint `X ↦ Σ K† X K`.
    pub fn adjoint(&self) -> KrausChannel {
        KrausChannel {
            n: self.n,
            ops: self.ops.iter().map(|k| k.adjoint()).collect(),
        }
    }

    /// Acts on `qubits` of an `n`-qubit operator.
    pub fn apply_on(&self, x: &CMat, qubits: &[usize], n: usize) -> CMat {
        linalg::kraus_local(x, &self.ops, qubits, n)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![linalg::identity(1 << n)])
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `(1 − p) ρ + (p/3) Σ σ ρ σ`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability(p)?;
        let mut ops = vec![Pauli::I.matrix().scale((1.0 - p).sqrt())];
        for s in [Pauli::X, Pauli::Y, Pauli::Z] {
            ops.push(s.matrix().scale((p / 3.0).sqrt()));
        }
        Self::new(ops)
    }

    /// Zero-temperature relaxation `|1⟩ → |0⟩` with probability `p`.
    pub fn amplitude_damping(p: f64) -> Result<Self> {
        check_probability(p)?;
        let k0 = CMat::from_row_slice(
            2,
            2,
            &[ONE, ZERO, ZERO, Complex64::new((1.0 - p).sqrt(), 0.0)],
        );
        let k1 = CMat::from_row_slice(2, 2, &[ZERO, Complex64::new(p.sqrt(), 0.0), ZERO, ZERO]);
        Self::new(vec![k0, k1])
    }

    /// Kraus set `{√p I, √(1−p) σ}`: the flip happens with probability `1 − p`.
    pub fn pauli_flip(sigma: Pauli, p: f64) -> Result<Self> {
        check_probability(p)?;
        Self::new(vec![
            Pauli::I.matrix().scale(p.sqrt()),
            sigma.matrix().scale((1.0 - p).sqrt()),
        ])
    }

    pub fn bit_flip(p: f64) -> Result<Self> {
        Self::pauli_flip(Pauli::X, p)
    }

    pub fn phase_flip(p: f64) -> Result<Self> {
        Self::pauli_flip(Pauli::Z, p)
    }

    /// Bit flip at its symmetry point followed by amplitude damping `p`;
    /// its `M` has a zero singular value.
    pub fn flip_then_damp(p: f64) -> Result<Self> {
        compose(&Self::amplitude_damping(p)?, &Self::bit_flip(0.5)?)
    }

    /// Convex mixture of unitaries `Σ p_k U_k ρ U_k†`.
    pub fn mixture(weights: &[f64], unitaries: &[CMat]) -> Result<Self> {
        if weights.len() != unitaries.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: unitaries.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChannel(format!(
                "mixture weights sum to {total}"
            )));
        }
        Self::new(
            weights
                .iter()
                .zip(unitaries)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, u)| u.scale(w.sqrt()))
                .collect(),
        )
    }

    /// Named single-register channels used by configs and the CLI.
    pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let p = || {
            params
                .get("p")
                .copied()
                .ok_or_else(|| Error::Config(format!("channel '{name}' needs parameter 'p'")))
        };
        match name {
            "identity" => Self::identity(1),
            "depolarizing" => Self::depolarizing(p()?),
            "amplitude_damping" => Self::amplitude_damping(p()?),
            "bit_flip" => Self::bit_flip(p()?),
            "phase_flip" => Self::phase_flip(p()?),
            "flip_then_damp" => Self::flip_then_damp(p()?),
            other => Err(Error::Config(format!("unknown channel '{other}'"))),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidChannel(format!(
            "probability {p} outside [0, 1]"
        )))
    }
}

pub fn validate_kraus(ch: &KrausChannel) -> KrausValidation {
    let d = ch.dim();
    let mut tp = CMat::zeros(d, d);
    let mut un = CMat::zeros(d, d);
    for k in ch.ops() {
        tp += k.adjoint() * k;
        un += k * k.adjoint();
    }
    let id = linalg::identity(d);
    let trace_residual = linalg::max_abs(&(tp - &id));
    let unital_residual = linalg::max_abs(&(un - &id));
    KrausValidation {
        trace_preserving: trace_residual <= CHANNEL_TOL,
        unital: unital_residual <= CHANNEL_TOL,
        trace_residual,
        unital_residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftConvention {
    /// Coordinates along `F_j = P_j/√d`.
    Nice,
    /// Coordinates along bare Pauli strings, `ρ = (I + Σ b_j P_j)/d`.
    Bloch,
}

/// Real affine action on coherence vectors.
#[derive(Debug, Clone)]
pub struct AffineRep {
    pub n: usize,
    pub m: RMat,
    /// Shift in the nice convention.
    pub c: RVec,
    /// Largest imaginary part seen while forming `M` and `c`.
    pub imag_residual: f64,
}

impl AffineRep {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Shift in the requested convention (`Bloch = √d · nice`).
    pub fn shift(&self, convention: ShiftConvention) -> RVec {
        match convention {
            ShiftConvention::Nice => self.c.clone(),
            ShiftConvention::Bloch => self.c.scale((self.dim() as f64).sqrt()),
        }
    }

    pub fn c_norm(&self) -> f64 {
        self.c.norm()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let v = RVec::from_column_slice(v);
        (&self.m * v + &self.c).iter().copied().collect()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = SVD::new(self.m.clone(), false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Affine map of `self ∘ first`.
    pub fn compose_after(&self, first: &AffineRep) -> AffineRep {
        AffineRep {
            n: self.n,
            m: &self.m * &first.m,
            c: &self.m * &first.c + &self.c,
            imag_residual: self.imag_residual.max(first.imag_residual),
        }
    }
}

pub fn affine_rep(ch: &KrausChannel, basis: &NiceBasis) -> Result<AffineRep> {
    if ch.n() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: ch.n(),
        });
    }
    if ch.n() > MAX_AFFINE_QUBITS {
        return Err(Error::SizeGuard {
            n: ch.n(),
            max: MAX_AFFINE_QUBITS,
        });
    }
    let report = validate_kraus(ch);
    if !report.trace_preserving {
        return Err(Error::InvalidChannel(format!(
            "not trace preserving (residual {:.3e})",
            report.trace_residual
        )));
    }
    affine_rep_of_map(ch.n(), basis, |x| ch.apply(x))
}

/// Affine representation of any linear trace-preserving map on operators.
pub fn affine_rep_of_map<F>(n: usize, basis: &NiceBasis, map: F) -> Result<AffineRep>
where
    F: Fn(&CMat) -> CMat,
{
    if n > MAX_AFFINE_QUBITS {
        return Err(Error::SizeGuard {
            n,
            max: MAX_AFFINE_QUBITS,
        });
    }
    let d = 1usize << n;
    let k = d * d - 1;
    let s = basis.scale();
    let mut m = RMat::zeros(k, k);
    let mut imag = 0.0_f64;
    for j in 0..k {
        let image = map(&basis.element(j + 1));
        for (i, p) in basis.strings()[1..].iter().enumerate() {
            let z = p.trace_product(&image) * s;
            imag = imag.max(z.im.abs());
            m[(i, j)] = z.re;
        }
    }
    let image = map(&linalg::identity(d).scale(1.0 / d as f64));
    let mut c = RVec::zeros(k);
    for (i, p) in basis.strings()[1..].iter().enumerate() {
        let z = p.trace_product(&image) * s;
        imag = imag.max(z.im.abs());
        c[i] = z.re;
    }
    if imag > 1e-9 {
        return Err(Error::Numerical(format!(
            "affine representation has imaginary part {imag:.3e}"
        )));
    }
    Ok(AffineRep {
        n,
        m,
        c,
        imag_residual: imag,
    })
}

#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub orthogonal: RMat,
    pub positive: RMat,
    /// Descending.
    pub singular_values: Vec<f64>,
}

/// `M = O S` with `O` orthogonal and `S = √(MᵀM)`.
pub fn polar_decompose(rep: &AffineRep) -> Result<PolarDecomposition> {
    polar_of(&rep.m)
}

pub fn polar_of(m: &RMat) -> Result<PolarDecomposition> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite entry in M".into()));
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested Vᵀ");
    let sigma = RMat::from_diagonal(&svd.singular_values);
    let orthogonal = u * vt;
    let positive = vt.transpose() * sigma * vt;
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(PolarDecomposition {
        orthogonal,
        positive,
        singular_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Unitary,
    UnitalNonunitary,
    HsContractiveNonunital,
    NonunitalNoncontractive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelClass {
    pub kind: ChannelKind,
    pub operator_norm_m: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub c_norm: f64,
}

pub fn classify(ch: &KrausChannel) -> Result<ChannelClass> {
    let basis = pauli::build_nice_basis(ch.n())?;
    let rep = affine_rep(ch, &basis)?;
    Ok(classify_rep(&rep))
}

pub fn classify_rep(rep: &AffineRep) -> ChannelClass {
    let sv = rep.singular_values();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let sigma_min = sv.last().copied().unwrap_or(0.0);
    let c_norm = rep.c_norm();
    let kind = if c_norm <= CHANNEL_TOL {
        if sv.iter().all(|s| (s - 1.0).abs() <= CHANNEL_TOL) {
            ChannelKind::Unitary
        } else {
            ChannelKind::UnitalNonunitary
        }
    } else if sigma_max < 1.0 - HS_MARGIN {
        ChannelKind::HsContractiveNonunital
    } else {
        ChannelKind::NonunitalNoncontractive
    };
    ChannelClass {
        kind,
        operator_norm_m: sigma_max,
        sigma_max,
        sigma_min,
        c_norm,
    }
}

/// `second ∘ first` with Kraus operators `K_β J_α`.
pub fn compose(second: &KrausChannel, first: &KrausChannel) -> Result<KrausChannel> {
    if second.n() != first.n() {
        return Err(Error::DimensionMismatch {
            expected: first.n(),
            got: second.n(),
        });
    }
    let mut ops = Vec::with_capacity(first.ops.len() * second.ops.len());
    for j in &first.ops {
        for k in &second.ops {
            ops.push(k * j);
        }
    }
    KrausChannel::new(ops)
}

/// Product channel; factor `i` acts on qubit `i`.
pub fn tensor_channel(per_qubit: &[KrausChannel]) -> Result<KrausChannel> {
    if per_qubit.is_empty() {
        return Err(Error::InvalidChannel("no factors".into()));
    }
    if let Some(bad) = per_qubit.iter().find(|c| c.n() != 1) {
        return Err(Error::InvalidChannel(format!(
            "factor acts on {} qubits, expected 1",
            bad.n()
        )));
    }
    pauli::check_qubits(per_qubit.len())?;
    let mut ops = vec![linalg::identity(1)];
    for factor in per_qubit {
        let mut next = Vec::with_capacity(ops.len() * factor.ops.len());
        for a in &ops {
            for b in &factor.ops {
                next.push(linalg::kron(a, b));
            }
        }
        ops = next;
    }
    KrausChannel::new(ops)
}

/// Random channel from a Haar isometry `d → d·k`, rejecting unital draws.
pub fn random_nonunital_channel<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    pauli::check_qubits(n)?;
    let d = 1usize << n;
    loop {
        let ch = KrausChannel::new(linalg::random_isometry_blocks(d, k, rng))?;
        if validate_kraus(&ch).unital_residual >= 1e-6 {
            return Ok(ch);
        }
    }
}

/// Random mixture of `terms` Haar unitaries with uniformly drawn weights.
pub fn random_unital_channel<R: Rng + ?Sized>(
    n: usize,
    terms: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    pauli::check_qubits(n)?;
    let d = 1usize << n;
    let raw: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let unitaries: Vec<CMat> = (0..terms).map(|_| linalg::haar_unitary(d, rng)).collect();
    let ops = weights
        .iter()
        .zip(&unitaries)
        .map(|(w, u)| u.scale(w.sqrt()))
        .collect();
    KrausChannel::new(ops)
}

pub fn random_unitary_channel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<KrausChannel> {
    pauli::check_qubits(n)?;
    KrausChannel::unitary(linalg::haar_unitary(1 << n, rng))
}

/// JSON input of the `channel` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelInput {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Kraus matrices, each a row-major list of `[re, im]` pairs.
    #[serde(default)]
    pub kraus: Option<Vec<Vec<[f64; 2]>>>,
}

impl ChannelInput {
    pub fn build(&self) -> Result<KrausChannel> {
        match (&self.name, &self.kraus) {
            (Some(name), None) => KrausChannel::by_name(name, &self.params),
            (None, Some(mats)) => {
                let ops = mats
                    .iter()
                    .map(|flat| {
                        let d = (flat.len() as f64).sqrt().round() as usize;
                        if d * d != flat.len() {
                            return Err(Error::Config(format!(
                                "Kraus matrix with {} entries is not square",
                                flat.len()
                            )));
                        }
                        let data: Vec<Complex64> = flat
                            .iter()
                            .map(|[re, im]| Complex64::new(*re, *im))
                            .collect();
                        Ok(CMat::from_row_slice(d, d, &data))
                    })
                    .collect::<Result<Vec<_>>>()?;
                KrausChannel::new(ops)
            }
            _ => Err(Error::Config(
                "channel input needs exactly one of 'name' or 'kraus'".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InspectReport {
    pub n: usize,
    pub kraus_count: usize,
    pub m: Vec<Vec<f64>>,
    pub c_nice: Vec<f64>,
    pub c_bloch: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub class: ChannelKind,
    pub operator_norm: f64,
    pub residuals: KrausValidation,
}

pub fn inspect(ch: &KrausChannel) -> Result<InspectReport> {
    let basis = pauli::build_nice_basis(ch.n())?;
    let rep = affine_rep(ch, &basis)?;
    let class = classify_rep(&rep);
    Ok(InspectReport {
        n: ch.n(),
        kraus_count: ch.ops().len(),
        m: rep
            .m
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        c_nice: rep.shift(ShiftConvention::Nice).iter().copied().collect(),
        c_bloch: rep.shift(ShiftConvention::Bloch).iter().copied().collect(),
        singular_values: rep.singular_values(),
        class: class.kind,
        operator_norm: class.operator_norm_m,
        residuals: validate_kraus(ch),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{build_nice_basis, random_mixed_state, to_coherence, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rep1(ch: &KrausChannel) -> AffineRep {
        affine_rep(ch, &build_nice_basis(ch.n()).unwrap()).unwrap()
    }

    fn assert_diag(m: &RMat, diag: &[f64], tol: f64) {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let expected = if i == j { diag[i] } else { 0.0 };
                assert!(
                    (m[(i, j)] - expected).abs() < tol,
                    "M[{i},{j}] = {}",
                    m[(i, j)]
                );
            }
        }
    }

    #[test]
    fn validation_examples() {
        let ad = validate_kraus(&KrausChannel::amplitude_damping(0.3).unwrap());
        assert!(ad.trace_preserving && !ad.unital);
        let dep = validate_kraus(&KrausChannel::depolarizing(0.3).unwrap());
        assert!(dep.trace_preserving && dep.unital);
        let shrunk = KrausChannel::new(vec![linalg::identity(2).scale(0.9)]).unwrap();
        let r = validate_kraus(&shrunk);
        assert!(!r.trace_preserving);
        assert!((r.trace_residual - 0.19).abs() < 1e-12);
    }

    #[test]
    fn empty_and_mismatched_kraus_lists_fail() {
        assert!(KrausChannel::new(vec![]).is_err());
        let r = KrausChannel::new(vec![linalg::identity(2), linalg::identity(4)]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn amplitude_damping_affine_values() {
        let p = 0.3;
        let rep = rep1(&KrausChannel::amplitude_damping(p).unwrap());
        let s = (1.0f64 - p).sqrt();
        assert_diag(&rep.m, &[s, s, 1.0 - p], 1e-12);
        let nice = rep.shift(ShiftConvention::Nice);
        let bloch = rep.shift(ShiftConvention::Bloch);
        assert!((nice[2] - p / 2f64.sqrt()).abs() < 1e-12);
        assert!((bloch[2] - p).abs() < 1e-12);
        assert!(nice[0].abs() < 1e-15 && nice[1].abs() < 1e-15);
    }

    #[test]
    fn depolarizing_and_bit_flip_affine_values() {
        let p = 0.3;
        let rep = rep1(&KrausChannel::depolarizing(p).unwrap());
        let f = 1.0 - 4.0 * p / 3.0;
        assert_diag(&rep.m, &[f, f, f], 1e-12);
        assert!(rep.c_norm() < 1e-15);
        let rep = rep1(&KrausChannel::bit_flip(0.8).unwrap());
        assert_diag(&rep.m, &[1.0, 0.6, 0.6], 1e-12);
    }

    #[test]
    fn polar_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rep = rep1(&random_unitary_channel(1, &mut rng).unwrap());
        let polar = polar_decompose(&rep).unwrap();
        for s in &polar.singular_values {
            assert!((s - 1.0).abs() < 1e-10);
        }
        assert!((&polar.positive - RMat::identity(3, 3)).amax() < 1e-10);

        let rep = rep1(&KrausChannel::amplitude_damping(0.36).unwrap());
        let sv = polar_decompose(&rep).unwrap().singular_values;
        for (a, b) in sv.iter().zip([0.8, 0.8, 0.64]) {
            assert!((a - b).abs() < 1e-12);
        }

        let rep = rep1(&KrausChannel::flip_then_damp(0.5).unwrap());
        let sv = polar_decompose(&rep).unwrap().singular_values;
        for (a, b) in sv.iter().zip([0.5f64.sqrt(), 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = random_nonunital_channel(2, 2, &mut rng).unwrap();
        let rep = rep1(&ch);
        let polar = polar_decompose(&rep).unwrap();
        let o = &polar.orthogonal;
        let k = o.nrows();
        assert!((o * &polar.positive - &rep.m).amax() < 1e-10);
        assert!((o.transpose() * o - RMat::identity(k, k)).amax() < 1e-10);
        assert!((&polar.positive - polar.positive.transpose()).amax() < 1e-10);
        let eig = polar.positive.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn polar_rejects_non_finite() {
        let m = RMat::from_element(3, 3, f64::NAN);
        assert!(polar_of(&m).is_err());
    }

    #[test]
    fn classification_examples() {
        let ad = classify(&KrausChannel::amplitude_damping(0.3).unwrap()).unwrap();
        assert_eq!(ad.kind, ChannelKind::HsContractiveNonunital);
        assert!((ad.operator_norm_m - 0.7f64.sqrt()).abs() < 1e-12);
        let dep = classify(&KrausChannel::depolarizing(0.3).unwrap()).unwrap();
        assert_eq!(dep.kind, ChannelKind::UnitalNonunitary);
        assert!((dep.operator_norm_m - 0.6).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = classify(&random_unitary_channel(1, &mut rng).unwrap()).unwrap();
        assert_eq!(u.kind, ChannelKind::Unitary);
        assert!((u.operator_norm_m - 1.0).abs() < 1e-10 && u.c_norm < 1e-12);
    }

    #[test]
    fn composition_examples() {
        let p = 0.3;
        let comp = rep1(&KrausChannel::flip_then_damp(p).unwrap());
        assert_diag(&comp.m, &[(1.0f64 - p).sqrt(), 0.0, 0.0], 1e-12);
        let bloch = comp.shift(ShiftConvention::Bloch);
        assert!((bloch[2] - p).abs() < 1e-12 && bloch[0].abs() < 1e-12);

        let ad = KrausChannel::amplitude_damping(p).unwrap();
        let same = rep1(&compose(&ad, &KrausChannel::identity(1).unwrap()).unwrap());
        let orig = rep1(&ad);
        assert!((&same.m - &orig.m).amax() < 1e-12 && (&same.c - &orig.c).amax() < 1e-12);

        let (p1, p2) = (0.1, 0.25);
        let both = rep1(
            &compose(
                &KrausChannel::depolarizing(p2).unwrap(),
                &KrausChannel::depolarizing(p1).unwrap(),
            )
            .unwrap(),
        );
        let f = (1.0 - 4.0 * p1 / 3.0) * (1.0 - 4.0 * p2 / 3.0);
        assert_diag(&both.m, &[f, f, f], 1e-12);
    }

    #[test]
    fn composed_rep_matches_product_of_reps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_nonunital_channel(2, 2, &mut rng).unwrap();
        let b = random_nonunital_channel(2, 3, &mut rng).unwrap();
        let basis = build_nice_basis(2).unwrap();
        let direct = affine_rep(&compose(&b, &a).unwrap(), &basis).unwrap();
        let chained = affine_rep(&b, &basis)
            .unwrap()
            .compose_after(&affine_rep(&a, &basis).unwrap());
        assert!((&direct.m - &chained.m).amax() < 1e-10);
        assert!((&direct.c - &chained.c).amax() < 1e-10);
    }

    #[test]
    fn tensor_examples() {
        let id = tensor_channel(&vec![KrausChannel::identity(1).unwrap(); 3]).unwrap();
        assert_eq!(id.ops().len(), 1);
        assert!(linalg::max_abs(&(&id.ops()[0] - linalg::identity(8))) < 1e-15);

        let dep = KrausChannel::depolarizing(0.3).unwrap();
        let two = rep1(&tensor_channel(&[dep.clone(), dep]).unwrap());
        let sv = two.singular_values();
        assert!((sv[0] - 0.6).abs() < 1e-12);
        assert!((sv.last().unwrap() - 0.36).abs() < 1e-12);

        let p = 0.3;
        let ad = KrausChannel::amplitude_damping(p).unwrap();
        let both = tensor_channel(&[ad.clone(), ad]).unwrap();
        let mut excited = CMat::zeros(4, 4);
        excited[(3, 3)] = ONE;
        let out = both.apply(&excited);
        assert!((out[(0, 0)].re - p * p).abs() < 1e-12);
    }

    #[test]
    fn tensor_rejects_multi_qubit_factor() {
        let two = KrausChannel::identity(2).unwrap();
        assert!(tensor_channel(&[two]).is_err());
    }

    #[test]
    fn tensor_matches_sequential_local_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let factors: Vec<KrausChannel> = (0..3)
            .map(|_| random_nonunital_channel(1, 2, &mut rng).unwrap())
            .collect();
        let full = tensor_channel(&factors).unwrap();
        let rho = random_mixed_state(3, &mut rng).unwrap();
        let mut seq = rho.data().clone();
        for (q, f) in factors.iter().enumerate() {
            seq = f.apply_on(&seq, &[q], 3);
        }
        assert!(linalg::max_abs(&(full.apply(rho.data()) - seq)) < 1e-10);
    }

    #[test]
    fn affine_action_matches_kraus_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let basis = build_nice_basis(2).unwrap();
        let ch = random_nonunital_channel(2, 3, &mut rng).unwrap();
        let rep = affine_rep(&ch, &basis).unwrap();
        assert!(rep.imag_residual < 1e-12);
        for _ in 0..20 {
            let rho = random_mixed_state(2, &mut rng).unwrap();
            let v = to_coherence(&rho, &basis).unwrap();
            let out = DensityMatrix::new(ch.apply(rho.data())).unwrap();
            let expected = to_coherence(&out, &basis).unwrap();
            let got = rep.apply(&v.v);
            for (a, b) in got.iter().zip(&expected.v) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn affine_rep_size_guard() {
        let ch = KrausChannel::identity(4).unwrap();
        let basis = build_nice_basis(4).unwrap();
        assert!(matches!(
            affine_rep(&ch, &basis),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn channel_input_parses_names_and_matrices() {
        let named: ChannelInput =
            serde_json::from_str(r#"{"name": "amplitude_damping", "params": {"p": 0.2}}"#).unwrap();
        assert_eq!(named.build().unwrap().ops().len(), 2);
        let raw: ChannelInput =
            serde_json::from_str(r#"{"kraus": [[[1,0],[0,0],[0,0],[1,0]]]}"#).unwrap();
        let report = inspect(&raw.build().unwrap()).unwrap();
        assert_eq!(report.class, ChannelKind::Unitary);
        let bad: ChannelInput =
            serde_json::from_str(r#"{"kraus": [[[1,0],[0,0],[0,0]]]}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
