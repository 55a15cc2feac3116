//! Cost derivatives: parameter shift, finite differences, coherence-vector
//! overlaps, and the gate-noise gradient bounds.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{self, Circuit, CircuitConfig, EvolveOptions, Insertion, Location, NoiseSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{self, Hamiltonian};
use crate::linalg::{self, CMat};
use crate::pauli::{self, DensityMatrix, PauliString};
use crate::seeding;

pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Explicit coherence vectors are only formed up to this size.
pub const MAX_COHERENCE_QUBITS: usize = 3;

/// Circuit, noise, observable and input state.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub circ: Circuit,
    pub noise: NoiseSpec,
    pub h: Hamiltonian,
    pub rho0: DensityMatrix,
}

impl CostModel {
    /// Starts from `|0…0⟩`.
    pub fn new(circ: Circuit, noise: NoiseSpec, h: Hamiltonian) -> Result<Self> {
        if h.n() != circ.n() {
            return Err(Error::DimensionMismatch {
                expected: circ.n(),
                got: h.n(),
            });
        }
        noise.validate(&circ)?;
        let rho0 = DensityMatrix::zero_state(circ.n())?;
        Ok(Self {
            circ,
            noise,
            h,
            rho0,
        })
    }

    pub fn with_initial_state(mut self, rho0: DensityMatrix) -> Result<Self> {
        if rho0.n() != self.circ.n() {
            return Err(Error::DimensionMismatch {
                expected: self.circ.n(),
                got: rho0.n(),
            });
        }
        self.rho0 = rho0;
        Ok(self)
    }

    pub fn final_state(&self, theta: &[f64], opts: &EvolveOptions) -> Result<CMat> {
        circuit::evolve_unchecked(&self.circ, theta, &self.noise, &self.rho0, opts)
    }

    pub fn cost(&self, theta: &[f64]) -> Result<f64> {
        self.cost_with(theta, &EvolveOptions::default())
    }

    pub fn cost_with(&self, theta: &[f64], opts: &EvolveOptions) -> Result<f64> {
        Ok(self.h.expectation(&self.final_state(theta, opts)?))
    }

    fn check_location(&self, loc: Location) -> Result<usize> {
        self.circ.parameter_index(loc)
    }

    fn generator(&self, loc: Location) -> Result<&PauliString> {
        self.circ
            .gate(loc)
            .and_then(|g| g.generator())
            .ok_or(Error::NotParameterized {
                layer: loc.layer,
                slot: loc.slot,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    Psr,
    FiniteDifference,
    CoherenceOverlap,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientSample {
    pub location: Location,
    pub theta: Vec<f64>,
    pub value: f64,
    pub method: GradientMethod,
}

fn shifted(theta: &[f64], i: usize, delta: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    t[i] += delta;
    t
}

/// `½[C(θ + π/2 e_μ) − C(θ − π/2 e_μ)]`, or the exact inserted-rotation
/// expansion when the gate carries control noise.
pub fn psr_gradient(model: &CostModel, theta: &[f64], loc: Location) -> Result<f64> {
    let i = model.check_location(loc)?;
    if model.noise.control.contains_key(&loc) {
        return Ok(control_noise_gradient(model, theta, loc)?.value);
    }
    psr_plain(model, theta, i, &EvolveOptions::default())
}

fn psr_plain(model: &CostModel, theta: &[f64], i: usize, opts: &EvolveOptions) -> Result<f64> {
    let plus = model.cost_with(&shifted(theta, i, FRAC_PI_2), opts)?;
    let minus = model.cost_with(&shifted(theta, i, -FRAC_PI_2), opts)?;
    Ok(0.5 * (plus - minus))
}

/// Central difference with `step ∈ [1e−7, 1e−3]`.
pub fn fd_gradient(model: &CostModel, theta: &[f64], loc: Location, step: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::Precondition(format!(
            "finite-difference step {step:e} outside [1e-7, 1e-3]"
        )));
    }
    let i = model.check_location(loc)?;
    let plus = model.cost(&shifted(theta, i, step))?;
    let minus = model.cost(&shifted(theta, i, -step))?;
    Ok((plus - minus) / (2.0 * step))
}

/// `½|(v⁺ − v⁻)·h|` from explicit coherence vectors.
pub fn coherence_gradient(model: &CostModel, theta: &[f64], loc: Location) -> Result<f64> {
    let n = model.circ.n();
    if n > MAX_COHERENCE_QUBITS {
        return Err(Error::SizeGuard {
            n,
            max: MAX_COHERENCE_QUBITS,
        });
    }
    let i = model.check_location(loc)?;
    let basis = pauli::build_nice_basis(n)?;
    let opts = EvolveOptions::default();
    let vp = pauli::coordinates(
        &model.final_state(&shifted(theta, i, FRAC_PI_2), &opts)?,
        &basis,
    );
    let vm = pauli::coordinates(
        &model.final_state(&shifted(theta, i, -FRAC_PI_2), &opts)?,
        &basis,
    );
    let (_, h) = hamiltonian::h_vector(&model.h, &basis)?;
    let dot = linalg::compensated_sum(vp.iter().zip(&vm).zip(&h).map(|((a, b), c)| (a - b) * c));
    Ok(0.5 * dot.abs())
}

/// Difference of the final states with `exp(∓i(π/2)P/2)` inserted before the gate.
#[derive(Debug, Clone)]
pub struct BranchDifference {
    /// `ξ = ρ⁺ − ρ⁻`, traceless.
    pub xi: CMat,
}

impl BranchDifference {
    /// `‖w̃‖`, equal to the Frobenius norm of `ξ` in an orthonormal basis.
    pub fn w_norm(&self) -> f64 {
        self.xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `w̃·h = Tr(H ξ)`.
    pub fn dot_h(&self, h: &Hamiltonian) -> f64 {
        h.expectation(&self.xi)
    }
}

fn branch_difference(
    model: &CostModel,
    theta: &[f64],
    loc: Location,
    generator: &PauliString,
    base: &EvolveOptions,
) -> Result<BranchDifference> {
    let run = |angle: f64| {
        let mut opts = base.clone();
        opts.insertion = Some(Insertion {
            location: loc,
            generator: generator.clone(),
            angle,
        });
        model.final_state(theta, &opts)
    };
    Ok(BranchDifference {
        xi: run(FRAC_PI_2)? - run(-FRAC_PI_2)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundedGradient {
    pub value: f64,
    pub bound: f64,
}

/// Exact derivative of a control-noise gate and its bound
/// `½‖w̃_j‖‖h‖ + ½Σ|a_k|‖w̃_k‖‖h‖`.
pub fn control_noise_gradient(
    model: &CostModel,
    theta: &[f64],
    loc: Location,
) -> Result<BoundedGradient> {
    model.check_location(loc)?;
    let generator = model.generator(loc)?.clone();
    let base = EvolveOptions::default();
    let h_norm = model.h.h_norm();
    let ideal = branch_difference(model, theta, loc, &generator, &base)?;
    let mut value = 0.5 * ideal.dot_h(&model.h);
    let mut bound = 0.5 * ideal.w_norm() * h_norm;
    if let Some(a) = model.noise.control.get(&loc) {
        for (p, coeff) in &a.terms {
            if *coeff == 0.0 || p.is_identity() {
                continue;
            }
            let diff = branch_difference(model, theta, loc, p, &base)?;
            value += 0.5 * coeff * diff.dot_h(&model.h);
            bound += 0.5 * coeff.abs() * diff.w_norm() * h_norm;
        }
    }
    Ok(BoundedGradient { value, bound })
}

/// Exact derivative through a unitary-mixture gate and the bound
/// `p_j|∂C_ideal| + ½Σ_{k≠j} p_k‖w̃_k‖‖h‖`.
pub fn random_noise_gradient(
    model: &CostModel,
    theta: &[f64],
    loc: Location,
) -> Result<BoundedGradient> {
    let i = model.check_location(loc)?;
    let intended = model.generator(loc)?.clone();
    let Some(mix) = model.noise.mixture.get(&loc) else {
        let d = psr_plain(model, theta, i, &EvolveOptions::default())?;
        return Ok(BoundedGradient {
            value: d,
            bound: d.abs(),
        });
    };
    let h_norm = model.h.h_norm();
    let mut value = 0.0;
    let mut bound = 0.0;
    for (k, (p, s)) in mix.branches(&intended).into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let opts = EvolveOptions {
            branch: Some((loc, k)),
            ..EvolveOptions::default()
        };
        if k == 0 {
            let ideal = psr_plain(model, theta, i, &opts)?;
            value += p * ideal;
            bound += p * ideal.abs();
        } else {
            let diff = branch_difference(model, theta, loc, s, &opts)?;
            value += 0.5 * p * diff.dot_h(&model.h);
            bound += 0.5 * p * diff.w_norm() * h_norm;
        }
    }
    Ok(BoundedGradient { value, bound })
}

/// Summary of `|∂C|` over samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientStats {
    pub location: Location,
    pub mean_abs: f64,
    /// Variance of `|∂C|`.
    pub var_abs: f64,
    /// Mean of `(∂C)²`.
    pub mean_sq: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl GradientStats {
    pub fn from_values(location: Location, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("no gradient samples".into()));
        }
        let k = values.len() as f64;
        let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        let mean_abs = linalg::compensated_sum(abs.iter().copied()) / k;
        let var_abs = linalg::compensated_sum(abs.iter().map(|a| (a - mean_abs).powi(2))) / k;
        let mean_sq = linalg::compensated_sum(values.iter().map(|v| v * v)) / k;
        let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = abs.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            location,
            mean_abs,
            var_abs,
            mean_sq,
            min,
            max,
            samples: values.len(),
        })
    }
}

/// Locations of the first, middle and last layer for a given slot.
pub fn standard_locations(layers: usize, slot: usize) -> Vec<Location> {
    vec![
        Location::new(0, slot),
        Location::new(layers / 2, slot),
        Location::new(layers - 1, slot),
    ]
}

/// Uniform `[0, 2π)` angles.
pub fn random_angles<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(0.0..TAU)).collect()
}

#[derive(Debug, Clone)]
pub struct StatsResult {
    pub stats: Vec<GradientStats>,
    /// Largest `‖h‖` among the instances.
    pub h_norm_max: f64,
    /// Mean `‖h‖` over the instances.
    pub h_norm_mean: f64,
    /// Every sampled `|∂C|`, indexed `[location][sample]`.
    pub raw: Vec<Vec<f64>>,
}

/// Statistics of PSR gradients over uniform angles and the given
/// Hamiltonians; sample `(i, t)` draws its angles from its own stream.
pub fn gradient_stats_with(
    circ: &Circuit,
    noise: &NoiseSpec,
    hamiltonians: &[Hamiltonian],
    locations: &[Location],
    thetas_per_instance: usize,
    seed: u64,
) -> Result<StatsResult> {
    if hamiltonians.is_empty() || locations.is_empty() || thetas_per_instance == 0 {
        return Err(Error::Config("empty gradient sweep".into()));
    }
    for &loc in locations {
        circ.parameter_index(loc)?;
    }
    let models: Vec<CostModel> = hamiltonians
        .iter()
        .map(|h| CostModel::new(circ.clone(), noise.clone(), h.clone()))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..hamiltonians.len())
        .flat_map(|i| (0..thetas_per_instance).map(move |t| (i, t)))
        .collect();
    let per_sample: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let mut rng = seeding::rng_for(seed, &[2, i as u64, t as u64]);
            let theta = random_angles(circ.num_parameters(), &mut rng);
            locations
                .iter()
                .map(|&loc| psr_gradient(&models[i], &theta, loc))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut raw = vec![Vec::with_capacity(jobs.len()); locations.len()];
    for sample in &per_sample {
        for (j, g) in sample.iter().enumerate() {
            raw[j].push(*g);
        }
    }
    let stats = locations
        .iter()
        .zip(&raw)
        .map(|(&loc, vals)| GradientStats::from_values(loc, vals))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = hamiltonians.iter().map(|h| h.h_norm()).collect();
    Ok(StatsResult {
        stats,
        h_norm_max: norms.iter().copied().fold(0.0, f64::max),
        h_norm_mean: linalg::compensated_sum(norms.iter().copied()) / norms.len() as f64,
        raw,
    })
}

/// A gradient sweep over random two-local Hamiltonians.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub circuit: CircuitConfig,
    pub locations: Vec<Location>,
    pub hamiltonians: usize,
    pub thetas: usize,
    pub seed: u64,
}

/// Seed of Hamiltonian instance `i` under a root seed.
pub fn instance_seed(root: u64, i: usize) -> u64 {
    seeding::derive(root, &[1, i as u64])
}

pub fn instances(n: usize, count: usize, root: u64) -> Result<Vec<Hamiltonian>> {
    (0..count)
        .into_par_iter()
        .map(|i| hamiltonian::random_two_local(n, instance_seed(root, i)))
        .collect()
}

pub fn gradient_stats(spec: &SweepSpec) -> Result<StatsResult> {
    let (circ, noise) = spec.circuit.build()?;
    let hs = instances(spec.circuit.n, spec.hamiltonians, spec.seed)?;
    gradient_stats_with(&circ, &noise, &hs, &spec.locations, spec.thetas, spec.seed)
}
