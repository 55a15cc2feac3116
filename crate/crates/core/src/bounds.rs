//! Contractivity factors, gradient and cost bounds, accumulated shifts and
//! the non-unital escape report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, AffineRep, ChannelKind, KrausChannel};
use crate::circuit::{self, Circuit, CircuitConfig, EvolveOptions, LayerChannel, NoiseSpec};
use crate::error::{Error, Result};
use crate::gradient::{self, CostModel};
use crate::hamiltonian::{self, Hamiltonian};
use crate::linalg::{self, CMat};
use crate::pauli::{self, DensityMatrix};
use crate::seeding;

/// Default limit on `L − l` for the escape condition.
pub const DEFAULT_SUFFIX_CAP: usize = 3;
const BISECTION_TOL: f64 = 1e-10;

/// Affine map of every full layer (gates followed by noise) at `theta`.
pub fn layer_affine_reps(
    circ: &Circuit,
    theta: &[f64],
    noise: &NoiseSpec,
) -> Result<Vec<AffineRep>> {
    let n = circ.n();
    if n > channel::MAX_AFFINE_QUBITS {
        return Err(Error::SizeGuard {
            n,
            max: channel::MAX_AFFINE_QUBITS,
        });
    }
    if theta.len() != circ.num_parameters() {
        return Err(Error::ParameterCount {
            expected: circ.num_parameters(),
            got: theta.len(),
        });
    }
    noise.validate(circ)?;
    let basis = pauli::build_nice_basis(n)?;
    let opts = EvolveOptions::default();
    (0..circ.depth())
        .map(|l| {
            channel::affine_rep_of_map(n, &basis, |x| {
                circuit::apply_layer(circ, theta, noise, l, x, &opts).expect("inputs validated")
            })
        })
        .collect()
}

/// Affine map of each layer's noise channel alone.
pub fn noise_affine_reps(noise: &NoiseSpec, n: usize, layers: usize) -> Result<Vec<AffineRep>> {
    if n > channel::MAX_AFFINE_QUBITS {
        return Err(Error::SizeGuard {
            n,
            max: channel::MAX_AFFINE_QUBITS,
        });
    }
    let basis = pauli::build_nice_basis(n)?;
    (0..layers)
        .map(|l| channel::affine_rep(&noise.layer(l).to_kraus(n)?, &basis))
        .collect()
}

fn traceless(x: &CMat) -> CMat {
    let d = x.nrows();
    let t = linalg::trace(x) / d as f64;
    let mut out = x.clone();
    for i in 0..d {
        out[(i, i)] -= t;
    }
    out
}

fn frobenius(x: &CMat) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖M‖` of a layer channel on `n` qubits. Uses the explicit matrix for
/// `n ≤ 3` and power iteration on `Ω†Ω` over traceless Hermitian operators
/// otherwise.
pub fn layer_channel_opnorm(ch: &LayerChannel, n: usize) -> Result<f64> {
    if let LayerChannel::Identity = ch {
        return Ok(1.0);
    }
    if n <= channel::MAX_AFFINE_QUBITS {
        let basis = pauli::build_nice_basis(n)?;
        return Ok(channel::affine_rep(&ch.to_kraus(n)?, &basis)?.operator_norm());
    }
    Ok(power_opnorm(ch, n))
}

/// Power iteration on `Ω†Ω` restricted to traceless operators.
fn power_opnorm(ch: &LayerChannel, n: usize) -> f64 {
    let adj = ch.adjoint();
    let d = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let g = linalg::haar_unitary(d, &mut rng);
    let mut x = traceless(&((&g + g.adjoint()).scale(0.5)));
    x /= num_complex::Complex64::new(frobenius(&x), 0.0);
    let mut estimate = 0.0;
    for _ in 0..5000 {
        let y = traceless(&adj.apply(&traceless(&ch.apply(&x, n)), n));
        let norm = frobenius(&y);
        if norm == 0.0 {
            return 0.0;
        }
        x = y / num_complex::Complex64::new(norm, 0.0);
        let converged = (norm - estimate).abs() <= 1e-13 * norm.max(1e-300);
        estimate = norm;
        if converged {
            break;
        }
    }
    estimate.sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractivityProfile {
    /// Realized `‖Ω_l v_{l−1}‖/‖v_{l−1}‖` along the trajectory (empty when `n > 3`).
    pub q: Vec<f64>,
    /// `‖M_l‖` per layer.
    pub opnorm: Vec<f64>,
    /// Largest `‖M_l‖`.
    pub r: f64,
}

pub fn contractivity_profile(
    circ: &Circuit,
    noise: &NoiseSpec,
    theta: &[f64],
    rho0: &DensityMatrix,
) -> Result<ContractivityProfile> {
    let n = circ.n();
    noise.validate(circ)?;
    let (q, opnorm) = if n <= channel::MAX_AFFINE_QUBITS {
        let reps = layer_affine_reps(circ, theta, noise)?;
        let basis = pauli::build_nice_basis(n)?;
        let mut v = pauli::to_coherence(rho0, &basis)?.v;
        let mut q = Vec::with_capacity(reps.len());
        for rep in &reps {
            let vin = linalg::RVec::from_column_slice(&v);
            let lin = &rep.m * &vin;
            q.push(if vin.norm() > 0.0 {
                lin.norm() / vin.norm()
            } else {
                0.0
            });
            v = (lin + &rep.c).iter().copied().collect();
        }
        (
            q,
            reps.iter().map(|r| r.operator_norm()).collect::<Vec<_>>(),
        )
    } else {
        let norms = (0..circ.depth())
            .map(|l| layer_channel_opnorm(noise.layer(l), n))
            .collect::<Result<Vec<_>>>()?;
        (Vec::new(), norms)
    };
    let r = opnorm.iter().copied().fold(0.0, f64::max);
    Ok(ContractivityProfile { q, opnorm, r })
}

/// `‖h‖ r^L`.
pub fn nibp_bound(h_norm: f64, r: f64, layers: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Precondition(format!(
            "contractivity r = {r} must lie in [0, 1)"
        )));
    }
    Ok(h_norm * r.powi(layers as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum L0Threshold {
    /// Depth beyond which the bound decays exponentially.
    Depth(f64),
    /// Linear-depth case: whether `K < 2c ln(1/r)` holds.
    Condition(bool),
}

/// `c^{1−Q} ((K/2)/ln(1/r))^{Q/(Q−1)}`, or the `Q = 1` condition.
pub fn l0_threshold(c: f64, q: f64, k: f64, r: f64) -> Result<L0Threshold> {
    if !(r > 0.0 && r < 1.0) || c <= 0.0 {
        return Err(Error::Precondition(format!(
            "need c > 0 and 0 < r < 1, got c = {c}, r = {r}"
        )));
    }
    let log_inv = (1.0 / r).ln();
    if q == 1.0 {
        return Ok(L0Threshold::Condition(k < 2.0 * c * log_inv));
    }
    if q < 1.0 {
        return Err(Error::Precondition(format!(
            "depth exponent Q = {q} must be at least 1"
        )));
    }
    Ok(L0Threshold::Depth(
        c.powf(1.0 - q) * ((k / 2.0) / log_inv).powf(q / (q - 1.0)),
    ))
}

/// `(1 − p^L)/(1 − p) · ‖h‖/√(1 − 1/d)`, with the `p → 1` limit `L`.
pub fn lambda_l(h_norm: f64, p: f64, layers: usize, dim: usize) -> f64 {
    let geometric = if (1.0 - p).abs() < 1e-12 {
        layers as f64
    } else {
        (1.0 - p.powi(layers as i32)) / (1.0 - p)
    };
    geometric * h_norm / (1.0 - 1.0 / dim as f64).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftAccumulation {
    /// Accumulated shift after `upto` layers.
    pub d: Vec<f64>,
    pub d_dot_h: f64,
    /// `Λ_L` with `p` the largest layer factor.
    pub lambda: f64,
    pub p: f64,
}

/// `d_j = Ω_j d_{j−1} + c_j` from `d_0 = 0`.
pub fn shift_accumulator(
    model: &CostModel,
    theta: &[f64],
    upto: usize,
) -> Result<ShiftAccumulation> {
    if upto > model.circ.depth() {
        return Err(Error::Config(format!(
            "upto = {upto} exceeds depth {}",
            model.circ.depth()
        )));
    }
    let reps = layer_affine_reps(&model.circ, theta, &model.noise)?;
    let k = reps.first().map(|r| r.c.len()).unwrap_or(0);
    let mut d = linalg::RVec::zeros(k);
    let mut p = 0.0_f64;
    for rep in &reps[..upto] {
        d = &rep.m * d + &rep.c;
        p = p.max(rep.operator_norm());
    }
    let basis = pauli::build_nice_basis(model.circ.n())?;
    let (_, h) = hamiltonian::h_vector(&model.h, &basis)?;
    let d: Vec<f64> = d.iter().copied().collect();
    let d_dot_h = linalg::compensated_sum(d.iter().zip(&h).map(|(a, b)| a * b));
    let lambda = lambda_l(model.h.h_norm(), p, upto, model.circ.dim());
    Ok(ShiftAccumulation {
        d,
        d_dot_h,
        lambda,
        p,
    })
}

/// Layer factors and whether every layer is unital.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseProfile {
    pub factors: Vec<f64>,
    pub unital: bool,
}

impl NoiseProfile {
    pub fn from_noise(noise: &NoiseSpec, n: usize, layers: usize) -> Result<Self> {
        let factors = (0..layers)
            .map(|l| layer_channel_opnorm(noise.layer(l), n))
            .collect::<Result<Vec<_>>>()?;
        let unital = (0..layers).all(|l| match noise.layer(l) {
            LayerChannel::Identity => true,
            LayerChannel::PerQubit(ch) | LayerChannel::Global(ch) => {
                channel::validate_kraus(ch).unital
            }
        });
        Ok(Self { factors, unital })
    }

    pub fn p(&self) -> f64 {
        self.factors.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NilsInterval {
    /// `Tr(H)/d`.
    pub center: f64,
    pub lambda_l: f64,
    pub lambda_inf: f64,
    pub d_l: Option<Vec<f64>>,
    pub d_l_dot_h: Option<f64>,
}

impl NilsInterval {
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        (value - self.center).abs() <= self.lambda_inf + tol
    }
}

pub fn nils_interval(
    h: &Hamiltonian,
    profile: &NoiseProfile,
    layers: usize,
) -> Result<NilsInterval> {
    let center = h.trace_over_dim();
    if profile.unital {
        return Ok(NilsInterval {
            center,
            lambda_l: 0.0,
            lambda_inf: 0.0,
            d_l: None,
            d_l_dot_h: None,
        });
    }
    let p = profile.p();
    if p >= 1.0 {
        return Err(Error::Precondition(format!(
            "largest layer factor p = {p} must be below 1"
        )));
    }
    let scale = h.h_norm() / (1.0 - 1.0 / h.dim() as f64).sqrt();
    Ok(NilsInterval {
        center,
        lambda_l: lambda_l(h.h_norm(), p, layers, h.dim()),
        lambda_inf: scale / (1.0 - p),
        d_l: None,
        d_l_dot_h: None,
    })
}

/// NILS interval with the realized shift filled in (`n ≤ 3`).
pub fn nils_with_shift(model: &CostModel, theta: &[f64]) -> Result<NilsInterval> {
    let layers = model.circ.depth();
    let profile = NoiseProfile::from_noise(&model.noise, model.circ.n(), layers)?;
    let mut nils = nils_interval(&model.h, &profile, layers)?;
    let shift = shift_accumulator(model, theta, layers)?;
    nils.d_l = Some(shift.d);
    nils.d_l_dot_h = Some(shift.d_dot_h);
    Ok(nils)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Config {
    /// Angle between the two rotated copies of the accumulated shift.
    #[serde(default = "default_angle")]
    pub separation_angle: f64,
    #[serde(default = "default_cap")]
    pub suffix_cap: usize,
}

fn default_angle() -> f64 {
    std::f64::consts::PI
}

fn default_cap() -> usize {
    DEFAULT_SUFFIX_CAP
}

impl Default for Theorem3Config {
    fn default() -> Self {
        Self {
            separation_angle: default_angle(),
            suffix_cap: DEFAULT_SUFFIX_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem3Report {
    /// False unless every layer map is HS-contractive and non-unital.
    pub applicable: bool,
    pub sigma_max_prefix: f64,
    pub mu_star: f64,
    pub sigma_min_suffix: Vec<f64>,
    pub suffix_length: usize,
    /// Lower bound on the norm of the accumulated shift before layer `l`.
    pub shift_lower_bound: f64,
    pub separation: f64,
    /// Geometric mean of `‖M_i‖`.
    pub p: f64,
    pub lower_bound: f64,
    pub escapes_nibp: bool,
}

/// `(λ − λ^{l−1})/(1 − λ)`.
pub fn r_l(lambda: f64, l: usize) -> f64 {
    (lambda - lambda.powi(l as i32 - 1)) / (1.0 - lambda)
}

/// Root of `r_l(μ) = target` on `[0, 1/2]`, clamped to `1/2`.
pub fn solve_mu(target: f64, l: usize) -> f64 {
    if r_l(0.5, l) <= target {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if r_l(mid, l) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Escape report for bifurcation layer `l` (1-based, `l ≥ 3`) given the
/// noise map of every layer.
pub fn theorem3_report(
    reps: &[AffineRep],
    l: usize,
    cfg: &Theorem3Config,
) -> Result<Theorem3Report> {
    let total = reps.len();
    if l < 3 {
        return Err(Error::Precondition(format!(
            "bifurcation layer l = {l} must be at least 3"
        )));
    }
    if l > total {
        return Err(Error::Precondition(format!(
            "bifurcation layer l = {l} exceeds depth {total}"
        )));
    }
    let classes: Vec<_> = reps.iter().map(channel::classify_rep).collect();
    let applicable = classes
        .iter()
        .all(|c| c.kind == ChannelKind::HsContractiveNonunital);
    let sigma_max_prefix = classes[..l - 1]
        .iter()
        .map(|c| c.sigma_max)
        .fold(0.0, f64::max);
    let c_tilde = classes[..l - 1]
        .iter()
        .map(|c| c.c_norm)
        .fold(0.0, f64::max);
    let c_last = classes[l - 2].c_norm;
    let sigma_min_suffix: Vec<f64> = classes[l - 1..].iter().map(|c| c.sigma_min).collect();
    let suffix_length = total - l;
    let log_p = classes.iter().map(|c| c.sigma_max.ln()).sum::<f64>() / total as f64;
    let p = log_p.exp();
    if !applicable || c_tilde == 0.0 {
        return Ok(Theorem3Report {
            applicable: false,
            sigma_max_prefix,
            mu_star: 0.0,
            sigma_min_suffix,
            suffix_length,
            shift_lower_bound: 0.0,
            separation: 0.0,
            p,
            lower_bound: 0.0,
            escapes_nibp: false,
        });
    }
    let mu_star = solve_mu(c_last / c_tilde, l);
    let shift_lower_bound = c_last - c_tilde * r_l(sigma_max_prefix, l);
    let separation = 2.0 * shift_lower_bound * (0.5 * cfg.separation_angle).sin().abs();
    let product: f64 = sigma_min_suffix.iter().product();
    let lower_bound = product * separation - 2.0 * p.powi(total as i32);
    let escapes_nibp = sigma_max_prefix < mu_star
        && sigma_min_suffix.iter().all(|&s| s > 0.0)
        && suffix_length <= cfg.suffix_cap
        && lower_bound > 0.0;
    Ok(Theorem3Report {
        applicable,
        sigma_max_prefix,
        mu_star,
        sigma_min_suffix,
        suffix_length,
        shift_lower_bound,
        separation,
        p,
        lower_bound,
        escapes_nibp,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct L0Config {
    pub c: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl Default for L0Config {
    fn default() -> Self {
        Self {
            c: 1.0,
            q: 2.0,
            k: 2.0,
        }
    }
}

/// Input of the `bound-report` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReportConfig {
    pub circuit: CircuitConfig,
    /// Largest depth of the bound curve.
    #[serde(default = "default_curve_max")]
    pub curve_max_l: usize,
    #[serde(default)]
    pub l0: L0Config,
    /// 1-based bifurcation layer; defaults to `L − 2`.
    #[serde(default)]
    pub bifurcation_layer: Option<usize>,
    #[serde(default)]
    pub theorem3: Theorem3Config,
}

fn default_curve_max() -> usize {
    24
}

#[derive(Debug, Clone, Serialize)]
pub struct NilsSummary {
    pub center: f64,
    #[serde(rename = "lambda_L")]
    pub lambda_l: f64,
    pub lambda_inf: f64,
    pub d_l_dot_h: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub r: f64,
    pub h_norm: f64,
    pub per_layer_q: Vec<f64>,
    pub per_layer_opnorm: Vec<f64>,
    pub nibp_bound_curve: Vec<(usize, f64)>,
    #[serde(rename = "L0")]
    pub l0: Option<L0Threshold>,
    pub nils: NilsSummary,
    pub theorem3: Option<Theorem3Report>,
    pub seed: u64,
}

/// Evaluates every bound for one random Hamiltonian and angle draw.
pub fn bound_report(cfg: &BoundReportConfig, seed: u64) -> Result<BoundReport> {
    let (circ, noise) = cfg.circuit.build()?;
    let n = circ.n();
    let layers = circ.depth();
    let h = hamiltonian::random_two_local(n, gradient::instance_seed(seed, 0))?;
    let mut rng = seeding::rng_for(seed, &[2, 0, 0]);
    let theta = gradient::random_angles(circ.num_parameters(), &mut rng);
    let model = CostModel::new(circ, noise, h)?;
    let profile = contractivity_profile(&model.circ, &model.noise, &theta, &model.rho0)?;
    let h_norm = model.h.h_norm();
    let curve = if profile.r < 1.0 {
        (0..=cfg.curve_max_l)
            .map(|l| nibp_bound(h_norm, profile.r, l).map(|b| (l, b)))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let l0 = if profile.r > 0.0 && profile.r < 1.0 {
        Some(l0_threshold(cfg.l0.c, cfg.l0.q, cfg.l0.k, profile.r)?)
    } else {
        None
    };
    let noise_profile = NoiseProfile::from_noise(&model.noise, n, layers)?;
    let nils = if noise_profile.unital || noise_profile.p() < 1.0 {
        let mut nils = nils_interval(&model.h, &noise_profile, layers)?;
        if n <= channel::MAX_AFFINE_QUBITS {
            let shift = shift_accumulator(&model, &theta, layers)?;
            nils.d_l_dot_h = Some(shift.d_dot_h);
        }
        NilsSummary {
            center: nils.center,
            lambda_l: nils.lambda_l,
            lambda_inf: nils.lambda_inf,
            d_l_dot_h: nils.d_l_dot_h,
        }
    } else {
        NilsSummary {
            center: model.h.trace_over_dim(),
            lambda_l: f64::NAN,
            lambda_inf: f64::NAN,
            d_l_dot_h: None,
        }
    };
    let l = cfg.bifurcation_layer.unwrap_or(layers.saturating_sub(2));
    let theorem3 = if n <= channel::MAX_AFFINE_QUBITS && l >= 3 && l <= layers {
        Some(theorem3_report(
            &noise_affine_reps(&model.noise, n, layers)?,
            l,
            &cfg.theorem3,
        )?)
    } else {
        None
    };
    Ok(BoundReport {
        r: profile.r,
        h_norm,
        per_layer_q: profile.q,
        per_layer_opnorm: profile.opnorm,
        nibp_bound_curve: curve,
        l0,
        nils,
        theorem3,
        seed,
    })
}

/// Convenience: explicit `‖M‖` of a single-qubit channel applied to every
/// qubit of an `n`-qubit register.
pub fn product_opnorm(ch: &KrausChannel, n: usize) -> Result<f64> {
    layer_channel_opnorm(&LayerChannel::PerQubit(ch.clone()), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_two_local, GateKind, NoiseConfig};
    use rand::Rng;

    fn ad(p: f64) -> KrausChannel {
        KrausChannel::amplitude_damping(p).unwrap()
    }

    #[test]
    fn contractivity_examples() {
        let c = Circuit::new(
            1,
            vec![
                vec![GateKind::Rotation {
                    generator: "Y".parse().unwrap()
                }];
                4
            ],
        )
        .unwrap();
        let rho0 = DensityMatrix::zero_state(1).unwrap();
        let theta = [0.3, 1.2, 2.0, 0.1];
        let ident = NoiseSpec::uniform(LayerChannel::PerQubit(KrausChannel::identity(1).unwrap()));
        let prof = contractivity_profile(&c, &ident, &theta, &rho0).unwrap();
        assert!(prof.q.iter().all(|q| (q - 1.0).abs() < 1e-12) && (prof.r - 1.0).abs() < 1e-12);

        let p = 0.3;
        let dep = NoiseSpec::uniform(LayerChannel::PerQubit(
            KrausChannel::depolarizing(p).unwrap(),
        ));
        let prof = contractivity_profile(&c, &dep, &theta, &rho0).unwrap();
        assert!(prof
            .q
            .iter()
            .all(|q| (q - (1.0 - 4.0 * p / 3.0)).abs() < 1e-12));

        let damp = NoiseSpec::uniform(LayerChannel::PerQubit(ad(p)));
        let prof = contractivity_profile(&c, &damp, &theta, &rho0).unwrap();
        for (q, o) in prof.q.iter().zip(&prof.opnorm) {
            assert!(*q >= 1.0 - p - 1e-12 && *q <= (1.0 - p).sqrt() + 1e-12);
            assert!(q <= o);
        }
    }

    #[test]
    fn power_iteration_matches_explicit_norm() {
        for ch in [
            ad(0.3),
            KrausChannel::depolarizing(0.2).unwrap(),
            KrausChannel::flip_then_damp(0.4).unwrap(),
        ] {
            let explicit = product_opnorm(&ch, 3).unwrap();
            let est = power_opnorm(&LayerChannel::PerQubit(ch.clone()), 3);
            assert!((est - explicit).abs() < 1e-6, "{est} vs {explicit}");
        }
        let four = product_opnorm(&KrausChannel::depolarizing(0.3).unwrap(), 4).unwrap();
        assert!((four - 0.6).abs() < 1e-9);
    }

    #[test]
    fn nibp_bound_examples() {
        assert!((nibp_bound(1.0, 0.6, 20).unwrap() - 3.656158440062976e-5).abs() < 1e-12);
        assert_eq!(nibp_bound(0.7, 0.6, 0).unwrap(), 0.7);
        assert!(nibp_bound(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn l0_examples() {
        let e = std::f64::consts::E;
        assert!(
            matches!(l0_threshold(1.0, 2.0, 2.0, 1.0 / e).unwrap(), L0Threshold::Depth(x) if (x - 1.0).abs() < 1e-12)
        );
        assert!(
            matches!(l0_threshold(1.0, 2.0, 4.0, 1.0 / e).unwrap(), L0Threshold::Depth(x) if (x - 4.0).abs() < 1e-12)
        );
        assert_eq!(
            l0_threshold(1.0, 1.0, 2.0, 0.5).unwrap(),
            L0Threshold::Condition(false)
        );
        assert!(l0_threshold(1.0, 0.5, 2.0, 0.5).is_err());
    }

    #[test]
    fn shift_examples() {
        let h = hamiltonian::random_two_local(2, 3).unwrap();
        let circ = build_two_local(2, 4).unwrap();
        let theta = vec![0.4; 8];
        let unital = CostModel::new(
            circ.clone(),
            NoiseSpec::uniform(LayerChannel::PerQubit(
                KrausChannel::depolarizing(0.2).unwrap(),
            )),
            h.clone(),
        )
        .unwrap();
        let s = shift_accumulator(&unital, &theta, 4).unwrap();
        assert!(s.d.iter().all(|x| x.abs() < 1e-12));

        let mut layers = vec![LayerChannel::Identity; 4];
        layers[3] = LayerChannel::PerQubit(ad(0.3));
        let last = CostModel::new(circ.clone(), NoiseSpec::per_layer(layers), h.clone()).unwrap();
        let s = shift_accumulator(&last, &theta, 4).unwrap();
        let basis = pauli::build_nice_basis(2).unwrap();
        let c_ad = channel::affine_rep(
            &LayerChannel::PerQubit(ad(0.3)).to_kraus(2).unwrap(),
            &basis,
        )
        .unwrap()
        .c;
        for (a, b) in s.d.iter().zip(c_ad.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_equals_evolved_maximally_mixed_state() {
        let h = hamiltonian::random_two_local(3, 1).unwrap();
        let cfg = CircuitConfig {
            n: 3,
            layers: 6,
            ansatz: "two_local".into(),
            noise: NoiseConfig::new("amplitude_damping", 0.25),
        };
        let (circ, noise) = cfg.build().unwrap();
        let model = CostModel::new(circ, noise, h)
            .unwrap()
            .with_initial_state(DensityMatrix::maximally_mixed(3).unwrap())
            .unwrap();
        let mut rng = seeding::rng_for(5, &[]);
        let theta = gradient::random_angles(18, &mut rng);
        let s = shift_accumulator(&model, &theta, 6).unwrap();
        let out = model
            .final_state(&theta, &EvolveOptions::default())
            .unwrap();
        let v = pauli::coordinates(&out, &pauli::build_nice_basis(3).unwrap());
        for (a, b) in s.d.iter().zip(&v) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(s.d_dot_h.abs() <= s.lambda);
    }

    #[test]
    fn nils_examples() {
        let h = hamiltonian::random_two_local(3, 2).unwrap();
        let unital = NoiseProfile {
            factors: vec![0.6; 5],
            unital: true,
        };
        let n = nils_interval(&h, &unital, 5).unwrap();
        assert_eq!((n.lambda_l, n.lambda_inf), (0.0, 0.0));
        assert!((n.center - h.h0() / 8f64.sqrt()).abs() < 1e-15);

        let h1 = Hamiltonian::new(1, [("Z".parse().unwrap(), 0.5)]).unwrap();
        assert!((h1.h_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        let prof = NoiseProfile {
            factors: vec![0.5; 3],
            unital: false,
        };
        let n = nils_interval(&h1, &prof, 3).unwrap();
        assert!((n.lambda_inf - 2.0).abs() < 1e-12);
        assert!(n.lambda_l <= n.lambda_inf);
        assert!(nils_interval(
            &h1,
            &NoiseProfile {
                factors: vec![1.0],
                unital: false
            },
            1
        )
        .is_err());
    }

    #[test]
    fn lambda_monotone_and_convergent() {
        let mut prev = 0.0;
        for l in 0..200 {
            let v = lambda_l(0.8, 0.7, l, 8);
            assert!(v >= prev);
            prev = v;
        }
        let inf = 0.8 / (0.3 * (1.0 - 1.0 / 8.0f64).sqrt());
        assert!((prev - inf).abs() < 1e-12);
    }

    #[test]
    fn theorem3_examples() {
        let basis = pauli::build_nice_basis(1).unwrap();
        let rep = |ch: &KrausChannel| channel::affine_rep(ch, &basis).unwrap();
        let cfg = Theorem3Config::default();

        let reps = vec![rep(&ad(0.8)); 20];
        let r = theorem3_report(&reps, 18, &cfg).unwrap();
        assert!(r.applicable && r.escapes_nibp && r.lower_bound > 0.0);
        assert!((r.sigma_max_prefix - 0.2f64.sqrt()).abs() < 1e-12);
        assert!(r.sigma_min_suffix.iter().all(|s| (s - 0.2).abs() < 1e-12));
        assert_eq!(r.suffix_length, 2);

        let mut mixed = vec![rep(&ad(0.8)); 20];
        mixed[19] = rep(&KrausChannel::flip_then_damp(0.8).unwrap());
        let r = theorem3_report(&mixed, 18, &cfg).unwrap();
        assert!(!r.escapes_nibp && r.lower_bound <= 0.0);

        let unital = vec![rep(&KrausChannel::depolarizing(0.3).unwrap()); 10];
        let r = theorem3_report(&unital, 5, &cfg).unwrap();
        assert!(!r.applicable && !r.escapes_nibp);

        assert!(theorem3_report(&reps, 2, &cfg).is_err());
    }

    #[test]
    fn mu_solves_transcendental_equation() {
        for (target, l) in [(0.3, 5), (0.7, 10), (0.05, 3)] {
            let mu = solve_mu(target, l);
            assert!(mu <= 0.5);
            if mu < 0.5 {
                assert!((r_l(mu, l) - target).abs() < 1e-8);
            }
        }
        assert_eq!(solve_mu(1.0, 6), 0.5);
    }

    #[test]
    fn shift_bound_holds_on_random_draws() {
        let mut rng = seeding::rng_for(77, &[]);
        for trial in 0..30 {
            let n = 2 + trial % 2;
            let layers = 1 + rng.random_range(0..8);
            let channels: Vec<LayerChannel> = (0..layers)
                .map(|_| match rng.random_range(0..3) {
                    0 => LayerChannel::PerQubit(
                        KrausChannel::depolarizing(rng.random_range(0.0..0.7)).unwrap(),
                    ),
                    1 => LayerChannel::PerQubit(ad(rng.random_range(0.0..1.0))),
                    _ => LayerChannel::Identity,
                })
                .collect();
            let circ = build_two_local(n, layers).unwrap();
            let h = hamiltonian::random_two_local(n, trial as u64).unwrap();
            let model = CostModel::new(circ, NoiseSpec::per_layer(channels), h).unwrap();
            let theta = gradient::random_angles(n * layers, &mut rng);
            let s = shift_accumulator(&model, &theta, layers).unwrap();
            assert!(s.d_dot_h.abs() <= s.lambda + 1e-12);
        }
    }

    #[test]
    fn bound_report_runs() {
        let cfg: BoundReportConfig = serde_json::from_str(
            r#"{"circuit": {"n": 2, "L": 8, "noise": {"type": "amplitude_damping", "p": 0.8}}}"#,
        )
        .unwrap();
        let rep = bound_report(&cfg, 3).unwrap();
        assert_eq!(rep.per_layer_q.len(), 8);
        assert_eq!(rep.nibp_bound_curve.len(), 25);
        assert!(rep.theorem3.is_some());
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("lambda_L") && text.contains("L0"));
    }
}
