//! SPSA minimization of noisy VQA costs.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitConfig;
use crate::error::{Error, Result};
use crate::gradient::{self, CostModel};
use crate::hamiltonian::{Hamiltonian, HamiltonianJson};
use crate::seeding;

/// Magnitude targeted for the first update when `a` is calibrated.
pub const FIRST_STEP: f64 = 0.1;

/// Gain-sequence constants. `a` and `big_a` fall back to calibrated
/// values when absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaConfig {
    pub maxiter: usize,
    pub a: Option<f64>,
    pub c: f64,
    #[serde(rename = "A")]
    pub big_a: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            maxiter: 200,
            a: None,
            c: 0.1,
            big_a: None,
            alpha: 0.602,
            gamma: 0.101,
            seed: 0,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.maxiter == 0 {
            return Err(Error::Config("maxiter must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("c must be positive, got {}", self.c)));
        }
        for (name, v) in [("alpha", self.alpha), ("gamma", self.gamma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if let Some(a) = self.a {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("a must be positive, got {a}")));
            }
        }
        if let Some(big) = self.big_a {
            if !(big >= 0.0 && big.is_finite()) {
                return Err(Error::Config(format!("A must be non-negative, got {big}")));
            }
        }
        Ok(())
    }

    pub fn stability(&self) -> f64 {
        self.big_a.unwrap_or(0.1 * self.maxiter as f64)
    }

    pub fn c_k(&self, k: usize) -> f64 {
        self.c / ((k + 1) as f64).powf(self.gamma)
    }

    fn a_k(&self, a: f64, k: usize) -> f64 {
        a / ((k + 1) as f64 + self.stability()).powf(self.alpha)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    /// `½[f(θ + c_kΔ) + f(θ − c_kΔ)]`.
    pub cost: f64,
    /// `‖θ_{k+1} − θ_k‖`.
    pub step_size: f64,
    pub best: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainTrace {
    pub records: Vec<IterRecord>,
    pub theta: Vec<f64>,
    pub final_cost: f64,
    pub evaluations: usize,
    /// Value of `a` actually used.
    pub a: f64,
}

impl TrainTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,cost,step_size\n");
        for r in &self.records {
            s.push_str(&format!("{},{:e},{:e}\n", r.iter, r.cost, r.step_size));
        }
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpsaError {
    #[error(transparent)]
    Objective(#[from] Error),
    #[error("non-finite objective value at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        trace: Box<TrainTrace>,
    },
}

impl From<SpsaError> for Error {
    fn from(e: SpsaError) -> Self {
        match e {
            SpsaError::Objective(e) => e,
            SpsaError::NonFinite { iteration, .. } => Error::NonFinite { iteration },
        }
    }
}

struct Best {
    cost: f64,
    theta: Vec<f64>,
}

impl Best {
    fn offer(&mut self, cost: f64, theta: &[f64]) {
        if cost < self.cost {
            self.cost = cost;
            self.theta = theta.to_vec();
        }
    }
}

/// Two-sided SPSA with Rademacher perturbations. The returned `theta` is
/// the best point evaluated, including the final iterate.
pub fn spsa_minimize<F>(
    mut objective: F,
    theta0: &[f64],
    cfg: &SpsaConfig,
) -> std::result::Result<TrainTrace, SpsaError>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    if theta0.is_empty() {
        return Err(Error::Config("empty parameter vector".into()).into());
    }
    let mut rng = seeding::rng_for(cfg.seed, &[4]);
    let mut theta = theta0.to_vec();
    let mut best = Best {
        cost: f64::INFINITY,
        theta: theta.clone(),
    };
    let mut trace = TrainTrace {
        records: Vec::with_capacity(cfg.maxiter),
        theta: theta.clone(),
        final_cost: f64::NAN,
        evaluations: 0,
        a: cfg.a.unwrap_or(f64::NAN),
    };
    let mut a = cfg.a;

    let abort = |iteration: usize, mut trace: TrainTrace, best: &Best| {
        trace.theta = best.theta.clone();
        trace.final_cost = best.cost;
        SpsaError::NonFinite {
            iteration,
            trace: Box::new(trace),
        }
    };

    for k in 0..cfg.maxiter {
        let ck = cfg.c_k(k);
        let delta: Vec<f64> = (0..theta.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
        let fp = objective(&plus)?;
        let fm = objective(&minus)?;
        trace.evaluations += 2;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(abort(k, trace, &best));
        }
        best.offer(fp, &plus);
        best.offer(fm, &minus);

        let scale = (fp - fm) / (2.0 * ck);
        let g: Vec<f64> = delta.iter().map(|d| scale / d).collect();
        let gain = match a {
            Some(a) => a,
            None => {
                let mean_abs = g.iter().map(|x| x.abs()).sum::<f64>() / g.len() as f64;
                let cal = if mean_abs > 0.0 {
                    FIRST_STEP * (1.0 + cfg.stability()).powf(cfg.alpha) / mean_abs
                } else {
                    FIRST_STEP * (1.0 + cfg.stability()).powf(cfg.alpha)
                };
                a = Some(cal);
                cal
            }
        };
        let ak = cfg.a_k(gain, k);
        let mut step_sq = 0.0;
        for (t, gi) in theta.iter_mut().zip(&g) {
            let s = ak * gi;
            *t -= s;
            step_sq += s * s;
        }
        trace.records.push(IterRecord {
            iter: k,
            cost: 0.5 * (fp + fm),
            step_size: step_sq.sqrt(),
            best: best.cost,
        });
    }
    trace.a = a.unwrap_or(f64::NAN);

    let f_final = objective(&theta)?;
    trace.evaluations += 1;
    if !f_final.is_finite() {
        return Err(abort(cfg.maxiter, trace, &best));
    }
    best.offer(f_final, &theta);
    trace.theta = best.theta;
    trace.final_cost = best.cost;
    Ok(trace)
}

/// Uniform `[0, 2π)` starting point drawn from the configuration seed.
pub fn initial_theta(k: usize, seed: u64) -> Vec<f64> {
    gradient::random_angles(k, &mut seeding::rng_for(seed, &[3]))
}

pub fn train_model(
    model: &CostModel,
    cfg: &SpsaConfig,
) -> std::result::Result<TrainTrace, SpsaError> {
    let theta0 = initial_theta(model.circ.num_parameters(), cfg.seed);
    spsa_minimize(|t| model.cost(t), &theta0, cfg)
}

/// Either an explicit Hamiltonian or a random two-local instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSource {
    Explicit(HamiltonianJson),
    Random { instance: usize },
}

impl Default for HamiltonianSource {
    fn default() -> Self {
        Self::Random { instance: 0 }
    }
}

impl HamiltonianSource {
    pub fn resolve(&self, n: usize, root: u64) -> Result<Hamiltonian> {
        match self {
            Self::Explicit(j) => {
                let h = Hamiltonian::try_from(j.clone())?;
                if h.n() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: h.n(),
                    });
                }
                Ok(h)
            }
            Self::Random { instance } => {
                crate::hamiltonian::random_two_local(n, gradient::instance_seed(root, *instance))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub circuit: CircuitConfig,
    #[serde(default)]
    pub hamiltonian: HamiltonianSource,
    #[serde(default)]
    pub spsa: SpsaConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainOutcome {
    pub trace: TrainTrace,
    pub trace_over_dim: f64,
    pub ground_energy: f64,
}

/// Trains one instance; `seed` overrides `spsa.seed` and picks random Hamiltonians.
pub fn run_train(cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    let (circ, noise) = cfg.circuit.build()?;
    let h = cfg.hamiltonian.resolve(cfg.circuit.n, seed)?;
    let (trace_over_dim, ground_energy) = (h.trace_over_dim(), h.ground_energy());
    let model = CostModel::new(circ, noise, h)?;
    let spsa = SpsaConfig {
        seed,
        ..cfg.spsa.clone()
    };
    let trace = train_model(&model, &spsa)?;
    Ok(TrainOutcome {
        trace,
        trace_over_dim,
        ground_energy,
    })
}

/// SPSA seed for instance `i`.
pub fn instance_spsa_seed(root: u64, i: usize) -> u64 {
    seeding::derive(root, &[3, i as u64])
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceResult {
    pub instance: usize,
    pub final_cost: f64,
    pub trace_over_dim: f64,
    pub ground_energy: f64,
}

/// Trains each random instance independently in parallel.
pub fn train_instances(
    circuit: &CircuitConfig,
    instances: usize,
    spsa: &SpsaConfig,
    root: u64,
) -> Result<Vec<InstanceResult>> {
    let (circ, noise) = circuit.build()?;
    let hs = gradient::instances(circuit.n, instances, root)?;
    hs.into_par_iter()
        .enumerate()
        .map(|(i, h)| {
            let (trace_over_dim, ground_energy) = (h.trace_over_dim(), h.ground_energy());
            let model = CostModel::new(circ.clone(), noise.clone(), h)?;
            let cfg = SpsaConfig {
                seed: instance_spsa_seed(root, i),
                ..spsa.clone()
            };
            let trace = train_model(&model, &cfg)?;
            Ok(InstanceResult {
                instance: i,
                final_cost: trace.final_cost,
                trace_over_dim,
                ground_energy,
            })
        })
        .collect()
}
