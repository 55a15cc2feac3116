//! Layered parameterized circuits, gate-level noise models and noisy
//! density-matrix evolution.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelInput, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pauli::{self, DensityMatrix, Pauli, PauliString};

/// Fixed gates must be unitary to this tolerance.
pub const UNITARY_TOL: f64 = 1e-10;
/// Upper limit on `‖A‖` for control-noise perturbations.
pub const CONTROL_NORM_LIMIT: f64 = 0.2;
/// Default half-width of randomly drawn control-noise coefficients.
pub const DEFAULT_A_MAX: f64 = 0.05;

/// Zero-based gate position: layer index and slot within the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub layer: usize,
    pub slot: usize,
}

impl Location {
    pub fn new(layer: usize, slot: usize) -> Self {
        Self { layer, slot }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.layer, self.slot)
    }
}

#[derive(Debug, Clone)]
pub enum GateKind {
    /// `exp(−iθP/2)` for an `n`-qubit Pauli string `P`.
    Rotation { generator: PauliString },
    /// `exp(−iθ(P + Σ a_k P_k)/2)`.
    Perturbed {
        generator: PauliString,
        perturbation: Vec<(PauliString, f64)>,
    },
    /// Fixed unitary on `qubits` (first listed qubit is the most significant).
    Fixed { matrix: CMat, qubits: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct Gate {
    pub kind: GateKind,
    pub location: Location,
}

impl Gate {
    pub fn is_parameterized(&self) -> bool {
        !matches!(self.kind, GateKind::Fixed { .. })
    }

    /// Ideal Pauli generator of a parameterized gate.
    pub fn generator(&self) -> Option<&PauliString> {
        match &self.kind {
            GateKind::Rotation { generator } | GateKind::Perturbed { generator, .. } => {
                Some(generator)
            }
            GateKind::Fixed { .. } => None,
        }
    }

    /// Qubits the gate acts on, ascending for rotations.
    pub fn qubits(&self) -> Vec<usize> {
        match &self.kind {
            GateKind::Rotation { generator } => generator.support(),
            GateKind::Perturbed {
                generator,
                perturbation,
            } => {
                let mut q = generator.support();
                for (p, _) in perturbation {
                    q.extend(p.support());
                }
                q.sort_unstable();
                q.dedup();
                q
            }
            GateKind::Fixed { qubits, .. } => qubits.clone(),
        }
    }

    /// Local unitary and the qubits it acts on.
    pub fn unitary(&self, theta: f64) -> (CMat, Vec<usize>) {
        let qubits = self.qubits();
        let u = match &self.kind {
            GateKind::Rotation { generator } => {
                pauli_rotation(&generator.local_matrix(&qubits), theta)
            }
            GateKind::Perturbed {
                generator,
                perturbation,
            } => {
                let mut g = generator.local_matrix(&qubits);
                for (p, a) in perturbation {
                    g += p.local_matrix(&qubits).scale(*a);
                }
                linalg::expm_rotation(&g, theta)
            }
            GateKind::Fixed { matrix, .. } => matrix.clone(),
        };
        (u, qubits)
    }
}

/// `cos(θ/2) I − i sin(θ/2) P` for a matrix `P` squaring to the identity.
pub fn pauli_rotation(p: &CMat, theta: f64) -> CMat {
    let (s, c) = (0.5 * theta).sin_cos();
    linalg::identity(p.nrows()).scale(c) - p.map(|z| z * Complex64::new(0.0, s))
}

pub fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = linalg::ONE;
    m[(1, 1)] = linalg::ONE;
    m[(2, 3)] = linalg::ONE;
    m[(3, 2)] = linalg::ONE;
    m
}

/// Replaces the generator `P` of a parameterized gate by `P + Σ a_k P_k`.
pub fn perturbed_gate(g: &Gate, a: &ControlNoise) -> Result<Gate> {
    let generator = g
        .generator()
        .ok_or(Error::NotParameterized {
            layer: g.location.layer,
            slot: g.location.slot,
        })?
        .clone();
    a.check(generator.n())?;
    if a.terms.iter().all(|(_, c)| *c == 0.0) {
        return Ok(Gate {
            kind: GateKind::Rotation { generator },
            location: g.location,
        });
    }
    Ok(Gate {
        kind: GateKind::Perturbed {
            generator,
            perturbation: a.terms.clone(),
        },
        location: g.location,
    })
}

#[derive(Debug, Clone)]
pub struct Circuit {
    n: usize,
    layers: Vec<Vec<Gate>>,
    parameter_index: BTreeMap<Location, usize>,
}

impl Circuit {
    /// Assigns gate locations from their position and numbers parameters
    /// in (layer, slot) order.
    pub fn new(n: usize, layers: Vec<Vec<GateKind>>) -> Result<Self> {
        pauli::check_qubits(n)?;
        if layers.is_empty() {
            return Err(Error::Config("circuit needs at least one layer".into()));
        }
        let mut parameter_index = BTreeMap::new();
        let mut built = Vec::with_capacity(layers.len());
        for (l, layer) in layers.into_iter().enumerate() {
            let mut gates = Vec::with_capacity(layer.len());
            for (m, kind) in layer.into_iter().enumerate() {
                let location = Location::new(l, m);
                validate_gate(&kind, n)?;
                let gate = Gate { kind, location };
                if gate.is_parameterized() {
                    let next = parameter_index.len();
                    parameter_index.insert(location, next);
                }
                gates.push(gate);
            }
            built.push(gates);
        }
        Ok(Self {
            n,
            layers: built,
            parameter_index,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn num_parameters(&self) -> usize {
        self.parameter_index.len()
    }

    pub fn parameter_index(&self, loc: Location) -> Result<usize> {
        self.parameter_index
            .get(&loc)
            .copied()
            .ok_or(Error::NotParameterized {
                layer: loc.layer,
                slot: loc.slot,
            })
    }

    pub fn gate(&self, loc: Location) -> Option<&Gate> {
        self.layers.get(loc.layer).and_then(|l| l.get(loc.slot))
    }

    /// Parameterized locations in parameter order.
    pub fn parameter_locations(&self) -> Vec<Location> {
        self.parameter_index.keys().copied().collect()
    }

    pub fn count_fixed(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|g| !g.is_parameterized())
            .count()
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_parameters() {
            return Err(Error::ParameterCount {
                expected: self.num_parameters(),
                got: theta.len(),
            });
        }
        Ok(())
    }
}

fn validate_gate(kind: &GateKind, n: usize) -> Result<()> {
    match kind {
        GateKind::Rotation { generator } | GateKind::Perturbed { generator, .. } => {
            if generator.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: generator.n(),
                });
            }
            if generator.is_identity() {
                return Err(Error::Config(
                    "rotation generator must not be the identity".into(),
                ));
            }
            if let GateKind::Perturbed { perturbation, .. } = kind {
                ControlNoise {
                    terms: perturbation.clone(),
                }
                .check(n)?;
            }
        }
        GateKind::Fixed { matrix, qubits } => {
            let k = 1usize << qubits.len();
            if matrix.nrows() != k || matrix.ncols() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: matrix.nrows(),
                });
            }
            let mut sorted = qubits.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != qubits.len() || qubits.iter().any(|&q| q >= n) {
                return Err(Error::Config(format!(
                    "invalid gate qubits {qubits:?} for n = {n}"
                )));
            }
            let res = linalg::max_abs(&(matrix.adjoint() * matrix - linalg::identity(k)));
            if res > UNITARY_TOL {
                return Err(Error::Config(format!(
                    "fixed gate not unitary (residual {res:.3e})"
                )));
            }
        }
    }
    Ok(())
}

/// Layers of one RY per qubit followed by a CNOT chain `i → i+1`
/// (no CNOTs when `n = 1`).
pub fn build_two_local(n: usize, layers: usize) -> Result<Circuit> {
    pauli::check_qubits(n)?;
    if layers < 1 {
        return Err(Error::Config("two-local ansatz needs L >= 1".into()));
    }
    let layer: Vec<GateKind> = (0..n)
        .map(|q| GateKind::Rotation {
            generator: PauliString::single(n, q, Pauli::Y),
        })
        .chain((0..n - 1).map(|q| GateKind::Fixed {
            matrix: cnot(),
            qubits: vec![q, q + 1],
        }))
        .collect();
    Circuit::new(n, vec![layer; layers])
}

/// Channel applied after all gates of a layer.
#[derive(Debug, Clone)]
pub enum LayerChannel {
    Identity,
    /// Same single-qubit channel on every qubit.
    PerQubit(KrausChannel),
    /// Channel on the whole register.
    Global(KrausChannel),
}

impl LayerChannel {
    pub fn apply(&self, x: &CMat, n: usize) -> CMat {
        match self {
            LayerChannel::Identity => x.clone(),
            LayerChannel::PerQubit(ch) => {
                let mut out = x.clone();
                for q in 0..n {
                    out = ch.apply_on(&out, &[q], n);
                }
                out
            }
            LayerChannel::Global(ch) => ch.apply(x),
        }
    }

    pub fn adjoint(&self) -> LayerChannel {
        match self {
            LayerChannel::Identity => LayerChannel::Identity,
            LayerChannel::PerQubit(ch) => LayerChannel::PerQubit(ch.adjoint()),
            LayerChannel::Global(ch) => LayerChannel::Global(ch.adjoint()),
        }
    }

    /// Full-register Kraus form.
    pub fn to_kraus(&self, n: usize) -> Result<KrausChannel> {
        match self {
            LayerChannel::Identity => KrausChannel::identity(n),
            LayerChannel::PerQubit(ch) => crate::channel::tensor_channel(&vec![ch.clone(); n]),
            LayerChannel::Global(ch) => Ok(ch.clone()),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            LayerChannel::Identity => Ok(()),
            LayerChannel::PerQubit(ch) if ch.n() != 1 => Err(Error::InvalidChannel(format!(
                "per-qubit channel acts on {} qubits",
                ch.n()
            ))),
            LayerChannel::Global(ch) if ch.n() != n => Err(Error::DimensionMismatch {
                expected: n,
                got: ch.n(),
            }),
            _ => Ok(()),
        }
    }
}

/// Control-noise perturbation `A = Σ a_k P_k` with full-register strings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControlNoise {
    pub terms: Vec<(PauliString, f64)>,
}

impl ControlNoise {
    pub fn new(terms: Vec<(PauliString, f64)>) -> Self {
        Self { terms }
    }

    /// Spectral norm of `A`.
    pub fn operator_norm(&self) -> f64 {
        let mut support: Vec<usize> = self.terms.iter().flat_map(|(p, _)| p.support()).collect();
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return self.terms.iter().map(|(_, a)| a).sum::<f64>().abs();
        }
        let k = 1usize << support.len();
        let mut a = CMat::zeros(k, k);
        for (p, c) in &self.terms {
            a += p.local_matrix(&support).scale(*c);
        }
        let (vals, _) = linalg::hermitian_eigen(&a);
        vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.abs()).sum()
    }

    fn check(&self, n: usize) -> Result<()> {
        if let Some((p, _)) = self.terms.iter().find(|(p, _)| p.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.n(),
            });
        }
        let norm = self.operator_norm();
        if norm >= CONTROL_NORM_LIMIT {
            return Err(Error::Precondition(format!(
                "control-noise norm {norm:.4} must stay below {CONTROL_NORM_LIMIT}"
            )));
        }
        Ok(())
    }
}

/// Draws 1-local terms on the gate's qubit and 2-local terms on (qubit,
/// neighbour), each coefficient uniform in `[−a_max, a_max]`. Draws whose
/// norm reaches the limit are rescaled to 95% of it.
pub fn random_control_noise<R: Rng + ?Sized>(
    circ: &Circuit,
    loc: Location,
    a_max: f64,
    rng: &mut R,
) -> Result<ControlNoise> {
    let gate = circ.gate(loc).ok_or(Error::NotParameterized {
        layer: loc.layer,
        slot: loc.slot,
    })?;
    let generator = gate.generator().ok_or(Error::NotParameterized {
        layer: loc.layer,
        slot: loc.slot,
    })?;
    let n = circ.n();
    let target = generator.support()[0];
    let neighbour = if target + 1 < n {
        target + 1
    } else {
        target.saturating_sub(1)
    };
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut terms = Vec::new();
    for &p in &letters {
        terms.push(PauliString::single(n, target, p));
    }
    if neighbour != target {
        for &p in &letters {
            for &q in &letters {
                terms.push(PauliString::from_sites(n, &[(target, p), (neighbour, q)]));
            }
        }
    }
    let mut noise = ControlNoise::new(
        terms
            .into_iter()
            .map(|p| (p, rng.random_range(-a_max..=a_max)))
            .collect(),
    );
    let norm = noise.operator_norm();
    if norm >= CONTROL_NORM_LIMIT {
        let s = 0.95 * CONTROL_NORM_LIMIT / norm;
        for (_, a) in &mut noise.terms {
            *a *= s;
        }
    }
    Ok(noise)
}

/// Faulty gate applying `exp(−iθP_k/2)` with probability `p_k`; branch 0 is
/// the intended generator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMixture {
    pub intended_weight: f64,
    pub others: Vec<(f64, PauliString)>,
}

impl UnitaryMixture {
    pub fn new(intended_weight: f64, others: Vec<(f64, PauliString)>) -> Result<Self> {
        let m = Self {
            intended_weight,
            others,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let total = self.intended_weight + self.others.iter().map(|(p, _)| p).sum::<f64>();
        let negative = self.intended_weight < 0.0 || self.others.iter().any(|(p, _)| *p < 0.0);
        if negative || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChannel(format!(
                "mixture probabilities sum to {total}"
            )));
        }
        Ok(())
    }

    /// Weight and generator of each branch given the intended generator.
    pub fn branches<'a>(&'a self, intended: &'a PauliString) -> Vec<(f64, &'a PauliString)> {
        std::iter::once((self.intended_weight, intended))
            .chain(self.others.iter().map(|(p, s)| (*p, s)))
            .collect()
    }
}

/// Full-register Kraus form `{√p_k exp(−iθP_k/2)}` of a unitary mixture.
pub fn random_unitary_channel(
    mixture: &UnitaryMixture,
    intended: &PauliString,
    theta: f64,
) -> Result<KrausChannel> {
    mixture.check()?;
    let ops = mixture
        .branches(intended)
        .into_iter()
        .map(|(p, s)| pauli_rotation(&s.matrix(), theta).scale(p.sqrt()))
        .collect();
    KrausChannel::new(ops)
}

#[derive(Debug, Clone, Default)]
pub struct NoiseSpec {
    /// Empty means noiseless, one entry is broadcast, otherwise one per layer.
    pub layers: Vec<LayerChannel>,
    pub control: BTreeMap<Location, ControlNoise>,
    pub mixture: BTreeMap<Location, UnitaryMixture>,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn uniform(channel: LayerChannel) -> Self {
        Self {
            layers: vec![channel],
            ..Self::default()
        }
    }

    pub fn per_layer(channels: Vec<LayerChannel>) -> Self {
        Self {
            layers: channels,
            ..Self::default()
        }
    }

    pub fn layer(&self, l: usize) -> &LayerChannel {
        match self.layers.len() {
            0 => &LayerChannel::Identity,
            1 => &self.layers[0],
            _ => &self.layers[l],
        }
    }

    pub fn validate(&self, circ: &Circuit) -> Result<()> {
        let count = self.layers.len();
        if count > 1 && count != circ.depth() {
            return Err(Error::DimensionMismatch {
                expected: circ.depth(),
                got: count,
            });
        }
        for ch in &self.layers {
            ch.check(circ.n())?;
        }
        for (loc, a) in &self.control {
            circ.parameter_index(*loc)?;
            a.check(circ.n())?;
            if self.mixture.contains_key(loc) {
                return Err(Error::Config(format!(
                    "location {loc} has both control and mixture noise"
                )));
            }
        }
        for (loc, m) in &self.mixture {
            circ.parameter_index(*loc)?;
            m.check()?;
            if let Some((_, s)) = m.others.iter().find(|(_, s)| s.n() != circ.n()) {
                return Err(Error::DimensionMismatch {
                    expected: circ.n(),
                    got: s.n(),
                });
            }
        }
        Ok(())
    }
}

/// Extra rotation `exp(−i·angle·P/2)` applied just before the gate at `location`.
#[derive(Debug, Clone)]
pub struct Insertion {
    pub location: Location,
    pub generator: PauliString,
    pub angle: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    pub insertion: Option<Insertion>,
    /// Replace the mixture at this location by its single branch `k`
    /// (0 is the intended gate).
    pub branch: Option<(Location, usize)>,
}

/// Applies gates and the layer channel of layer `l` to an arbitrary operator.
pub fn apply_layer(
    circ: &Circuit,
    theta: &[f64],
    noise: &NoiseSpec,
    l: usize,
    x: &CMat,
    opts: &EvolveOptions,
) -> Result<CMat> {
    let n = circ.n();
    let mut out = x.clone();
    for gate in &circ.layers[l] {
        let loc = gate.location;
        if let Some(ins) = opts.insertion.as_ref().filter(|i| i.location == loc) {
            let q = ins.generator.support();
            if !q.is_empty() {
                let u = pauli_rotation(&ins.generator.local_matrix(&q), ins.angle);
                out = linalg::conjugate_local(&out, &u, &q, n);
            }
        }
        let angle = match circ.parameter_index.get(&loc) {
            Some(&i) => theta[i],
            None => 0.0,
        };
        if let Some(mix) = noise.mixture.get(&loc) {
            let intended = gate
                .generator()
                .expect("mixture only at parameterized gates");
            let branches = mix.branches(intended);
            match opts.branch.filter(|(b, _)| *b == loc) {
                Some((_, k)) => {
                    let (_, s) = branches.get(k).ok_or_else(|| {
                        Error::Config(format!("mixture at {loc} has no branch {k}"))
                    })?;
                    let q = s.support();
                    let u = pauli_rotation(&s.local_matrix(&q), angle);
                    out = linalg::conjugate_local(&out, &u, &q, n);
                }
                None => {
                    let mut q: Vec<usize> =
                        branches.iter().flat_map(|(_, s)| s.support()).collect();
                    q.sort_unstable();
                    q.dedup();
                    let ops: Vec<CMat> = branches
                        .iter()
                        .filter(|(p, _)| *p > 0.0)
                        .map(|(p, s)| pauli_rotation(&s.local_matrix(&q), angle).scale(p.sqrt()))
                        .collect();
                    out = linalg::kraus_local(&out, &ops, &q, n);
                }
            }
            continue;
        }
        let (u, q) = match noise.control.get(&loc) {
            Some(a) => perturbed_gate(gate, a)?.unitary(angle),
            None => gate.unitary(angle),
        };
        out = linalg::conjugate_local(&out, &u, &q, n);
    }
    Ok(noise.layer(l).apply(&out, n))
}

fn check_inputs(
    circ: &Circuit,
    theta: &[f64],
    noise: &NoiseSpec,
    rho0: &DensityMatrix,
) -> Result<()> {
    circ.check_theta(theta)?;
    if rho0.n() != circ.n() {
        return Err(Error::DimensionMismatch {
            expected: circ.n(),
            got: rho0.n(),
        });
    }
    noise.validate(circ)
}

/// States after every layer; entry 0 is `ρ0`.
pub fn evolve_trajectory(
    circ: &Circuit,
    theta: &[f64],
    noise: &NoiseSpec,
    rho0: &DensityMatrix,
    opts: &EvolveOptions,
) -> Result<Vec<CMat>> {
    check_inputs(circ, theta, noise, rho0)?;
    let mut states = Vec::with_capacity(circ.depth() + 1);
    states.push(rho0.data().clone());
    for l in 0..circ.depth() {
        let next = apply_layer(circ, theta, noise, l, &states[l], opts)?;
        states.push(next);
    }
    Ok(states)
}

/// Final state without the positivity check; used on hot paths.
pub fn evolve_unchecked(
    circ: &Circuit,
    theta: &[f64],
    noise: &NoiseSpec,
    rho0: &DensityMatrix,
    opts: &EvolveOptions,
) -> Result<CMat> {
    check_inputs(circ, theta, noise, rho0)?;
    let mut rho = rho0.data().clone();
    for l in 0..circ.depth() {
        rho = apply_layer(circ, theta, noise, l, &rho, opts)?;
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry after evolution".into()));
    }
    Ok(rho)
}

pub fn evolve(
    circ: &Circuit,
    theta: &[f64],
    noise: &NoiseSpec,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    evolve_with(circ, theta, noise, rho0, &EvolveOptions::default())
}

/// Evolves and validates the output state.
pub fn evolve_with(
    circ: &Circuit,
    theta: &[f64],
    noise: &NoiseSpec,
    rho0: &DensityMatrix,
    opts: &EvolveOptions,
) -> Result<DensityMatrix> {
    DensityMatrix::new(evolve_unchecked(circ, theta, noise, rho0, opts)?)
}

/// Where the layer channel is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// After every layer.
    #[default]
    EveryLayer,
    /// Only after the final layer.
    LastLayer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub placement: Placement,
    /// Single-qubit Kraus matrices for `"type": "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<[f64; 2]>>>,
}

impl NoiseConfig {
    pub fn new(kind: &str, p: f64) -> Self {
        Self {
            kind: kind.to_string(),
            p,
            placement: Placement::EveryLayer,
            kraus: None,
        }
    }

    /// Single-qubit channel applied to every qubit, `None` when noiseless.
    pub fn channel(&self) -> Result<Option<KrausChannel>> {
        if self.kind == "none" {
            return Ok(None);
        }
        if self.kind == "custom" {
            let input = ChannelInput {
                name: None,
                params: BTreeMap::new(),
                kraus: self.kraus.clone(),
            };
            let ch = input.build()?;
            if ch.n() != 1 {
                return Err(Error::Config(
                    "custom noise must be a single-qubit channel".into(),
                ));
            }
            return Ok(Some(ch));
        }
        let mut params = BTreeMap::new();
        params.insert("p".to_string(), self.p);
        KrausChannel::by_name(&self.kind, &params).map(Some)
    }

    pub fn to_spec(&self, layers: usize) -> Result<NoiseSpec> {
        let Some(ch) = self.channel()? else {
            return Ok(NoiseSpec::noiseless());
        };
        let noisy = LayerChannel::PerQubit(ch);
        Ok(match self.placement {
            Placement::EveryLayer => NoiseSpec::uniform(noisy),
            Placement::LastLayer => {
                let mut v = vec![LayerChannel::Identity; layers];
                v[layers - 1] = noisy;
                NoiseSpec::per_layer(v)
            }
        })
    }
}

/// `{n, L, ansatz, noise}` circuit description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    #[serde(default = "default_ansatz")]
    pub ansatz: String,
    pub noise: NoiseConfig,
}

fn default_ansatz() -> String {
    "two_local".to_string()
}

impl CircuitConfig {
    pub fn build(&self) -> Result<(Circuit, NoiseSpec)> {
        if self.ansatz != "two_local" {
            return Err(Error::Config(format!("unknown ansatz '{}'", self.ansatz)));
        }
        let circ = build_two_local(self.n, self.layers)?;
        let noise = self.noise.to_spec(self.layers)?;
        Ok((circ, noise))
    }
}
