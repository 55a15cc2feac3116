//! Configuration-driven sweeps: gradient statistics over depth, noise
//! strength and width, trained final costs, and CSV/plot/metadata output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds;
use crate::circuit::{CircuitConfig, Location, NoiseConfig, Placement};
use crate::error::{Error, Result};
use crate::gradient::{self, GradientStats, StatsResult, SweepSpec};
use crate::pauli::MAX_QUBITS;
use crate::trainer::{self, SpsaConfig};

pub const DEFAULT_THETAS: usize = 20;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    LayersSweep,
    NoiseSweep,
    FinalCost,
    WidthScaling,
    Trainability,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::LayersSweep => "layers_sweep",
            Preset::NoiseSweep => "noise_sweep",
            Preset::FinalCost => "final_cost",
            Preset::WidthScaling => "width_scaling",
            Preset::Trainability => "trainability",
        }
    }
}

/// A scalar or a list in JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Experiment description as read from JSON. Absent fields take the
/// preset defaults listed in `docs/config.md`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    #[serde(default)]
    pub n: Option<OneOrMany<usize>>,
    #[serde(default, rename = "L")]
    pub layers: Option<OneOrMany<usize>>,
    #[serde(default)]
    pub p: Option<OneOrMany<f64>>,
    #[serde(default)]
    pub noise_type: Option<OneOrMany<String>>,
    /// Single-qubit Kraus matrices used when `noise_type` is `custom`.
    #[serde(default)]
    pub kraus: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub instances: Option<usize>,
    #[serde(default)]
    pub thetas: Option<usize>,
    #[serde(default)]
    pub slot: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub spsa: SpsaConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            preset,
            n: None,
            layers: None,
            p: None,
            noise_type: None,
            kraus: None,
            placement: Placement::EveryLayer,
            instances: None,
            thetas: None,
            slot: 0,
            seed: None,
            spsa: SpsaConfig::default(),
            output: None,
        }
    }
}

/// Fully specified grid after applying preset defaults.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub preset: Preset,
    pub n: Vec<usize>,
    #[serde(rename = "L")]
    pub layers: Vec<usize>,
    pub p: Vec<f64>,
    pub noise_type: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<[f64; 2]>>>,
    pub placement: Placement,
    pub instances: usize,
    pub thetas: usize,
    pub slot: usize,
    pub seed: u64,
    pub spsa: SpsaConfig,
}

fn p_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 * 0.05).collect()
}

fn both_noises() -> Vec<String> {
    vec!["depolarizing".into(), "amplitude_damping".into()]
}

pub fn resolve(cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<Resolved> {
    use Preset::*;
    let (n, layers, p): (Vec<usize>, Vec<usize>, Vec<f64>) = match cfg.preset {
        LayersSweep => (vec![3], (2..=24).collect(), vec![0.3]),
        NoiseSweep => (vec![3], vec![20], p_grid()),
        FinalCost => (vec![3], vec![5], p_grid()),
        WidthScaling => ((2..=6).collect(), vec![2], vec![0.1, 0.2, 0.3]),
        Trainability => (vec![2, 3, 4], vec![20], vec![0.3]),
    };
    let n = cfg.n.as_ref().map(|x| x.to_vec()).unwrap_or(n);
    let layers = cfg.layers.as_ref().map(|x| x.to_vec()).unwrap_or(layers);
    let p = cfg.p.as_ref().map(|x| x.to_vec()).unwrap_or(p);
    let noise_type = cfg
        .noise_type
        .as_ref()
        .map(|x| x.to_vec())
        .unwrap_or_else(both_noises);
    let largest = n.iter().copied().max().unwrap_or(0);
    let instances = cfg.instances.unwrap_or(if largest >= 5 { 10 } else { 50 });
    let r = Resolved {
        preset: cfg.preset,
        n,
        layers,
        p,
        noise_type,
        kraus: cfg.kraus.clone(),
        placement: cfg.placement,
        instances,
        thetas: cfg.thetas.unwrap_or(DEFAULT_THETAS),
        slot: cfg.slot,
        seed: seed_override.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        spsa: cfg.spsa.clone(),
    };
    r.validate()?;
    Ok(r)
}

impl Resolved {
    fn validate(&self) -> Result<()> {
        if self.n.is_empty()
            || self.layers.is_empty()
            || self.p.is_empty()
            || self.noise_type.is_empty()
        {
            return Err(Error::Config("sweep lists must be nonempty".into()));
        }
        if self.instances == 0 || self.thetas == 0 {
            return Err(Error::Config(
                "instances and thetas must be at least 1".into(),
            ));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0 || n > MAX_QUBITS) {
            return Err(Error::Size {
                n,
                min: 1,
                max: MAX_QUBITS,
            });
        }
        if self.layers.contains(&0) {
            return Err(Error::Config("L must be at least 1".into()));
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!(
                "noise probability {p} outside [0, 1]"
            )));
        }
        if let Some(&n) = self.n.iter().find(|&&n| self.slot >= n) {
            return Err(Error::Config(format!(
                "slot {} is not a rotation for n = {n}",
                self.slot
            )));
        }
        for kind in &self.noise_type {
            if kind == "custom" && self.kraus.is_none() {
                return Err(Error::Config("custom noise needs 'kraus'".into()));
            }
            self.noise(kind, 0.1)?.channel()?;
        }
        if self.preset == Preset::FinalCost {
            self.spsa.validate()?;
        }
        Ok(())
    }

    fn noise(&self, kind: &str, p: f64) -> Result<NoiseConfig> {
        let mut cfg = NoiseConfig::new(kind, p);
        cfg.placement = self.placement;
        if kind == "custom" {
            cfg.kraus = self.kraus.clone();
        }
        Ok(cfg)
    }

    fn circuit(&self, n: usize, layers: usize, kind: &str, p: f64) -> Result<CircuitConfig> {
        Ok(CircuitConfig {
            n,
            layers,
            ansatz: "two_local".into(),
            noise: self.noise(kind, p)?,
        })
    }
}

/// One tracked gradient location at one grid point.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GradientRow {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub p: f64,
    pub noise_type: String,
    pub track: String,
    pub layer: usize,
    pub slot: usize,
    pub mean_abs_grad: f64,
    pub var_grad: f64,
    pub mean_sq_grad: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub h_norm_max: f64,
    pub h_norm_mean: f64,
    /// Single-qubit `‖M‖` of the noise channel.
    pub r: f64,
    /// `‖h‖_max r^L`, empty when `r ≥ 1`.
    pub bound: Option<f64>,
    /// `‖M‖` of the channel applied to all `n` qubits.
    pub r_product: f64,
    pub bound_product: Option<f64>,
    #[serde(rename = "D")]
    pub dim_h: usize,
    /// `‖h‖_mean/√D`.
    pub reference: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CostRow {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub p: f64,
    pub noise_type: String,
    pub instances: usize,
    pub mean_final_cost: f64,
    pub std_final_cost: f64,
    pub mean_trace_over_dim: f64,
    pub mean_ground_energy: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub enum Rows {
    Gradient(Vec<GradientRow>),
    Cost(Vec<CostRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Gradient(r) => r.len(),
            Rows::Cost(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_csv(&self) -> Result<String> {
        match self {
            Rows::Gradient(r) => to_csv(r),
            Rows::Cost(r) => to_csv(r),
        }
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: Resolved,
    pub rows: Rows,
    pub summary: serde_json::Value,
}

/// `D = Σ_{k≤2} C(n, k)`.
pub fn effective_dimension(n: usize) -> usize {
    (n * n + n) / 2
}

/// Least-squares slope and intercept.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

struct Rates {
    r: f64,
    r_product: f64,
}

fn rates(circuit: &CircuitConfig) -> Result<Rates> {
    match circuit.noise.channel()? {
        None => Ok(Rates {
            r: 1.0,
            r_product: 1.0,
        }),
        Some(ch) => Ok(Rates {
            r: bounds::product_opnorm(&ch, 1)?,
            r_product: bounds::product_opnorm(&ch, circuit.n)?,
        }),
    }
}

fn bound_or_none(h_norm: f64, r: f64, layers: usize) -> Option<f64> {
    // An SVD of the identity map can land a few ulps under 1.
    if r > 1.0 - 1e-12 {
        return None;
    }
    bounds::nibp_bound(h_norm, r, layers).ok()
}

fn gradient_rows(
    cfg: &Resolved,
    circuit: &CircuitConfig,
    p: f64,
    kind: &str,
    tracks: &[(String, Location)],
) -> Result<Vec<GradientRow>> {
    let spec = SweepSpec {
        circuit: circuit.clone(),
        locations: tracks.iter().map(|(_, l)| *l).collect(),
        hamiltonians: cfg.instances,
        thetas: cfg.thetas,
        seed: cfg.seed,
    };
    let StatsResult {
        stats,
        h_norm_max,
        h_norm_mean,
        ..
    } = gradient::gradient_stats(&spec)?;
    let rates = rates(circuit)?;
    let (n, layers) = (circuit.n, circuit.layers);
    let d = effective_dimension(n);
    Ok(tracks
        .iter()
        .zip(stats)
        .map(
            |((track, loc), s): (&(String, Location), GradientStats)| GradientRow {
                n,
                layers,
                p,
                noise_type: kind.to_string(),
                track: track.clone(),
                layer: loc.layer,
                slot: loc.slot,
                mean_abs_grad: s.mean_abs,
                var_grad: s.var_abs,
                mean_sq_grad: s.mean_sq,
                min: s.min,
                max: s.max,
                samples: s.samples,
                h_norm_max,
                h_norm_mean,
                r: rates.r,
                bound: bound_or_none(h_norm_max, rates.r, layers),
                r_product: rates.r_product,
                bound_product: bound_or_none(h_norm_max, rates.r_product, layers),
                dim_h: d,
                reference: h_norm_mean / (d as f64).sqrt(),
                seed: cfg.seed,
            },
        )
        .collect())
}

fn standard_tracks(layers: usize, slot: usize) -> Vec<(String, Location)> {
    ["first", "middle", "last"]
        .iter()
        .map(|s| s.to_string())
        .zip(gradient::standard_locations(layers, slot))
        .collect()
}

/// Locations at suffix distances `0`, `⌈log₂ n⌉` and `L/2` from the end.
pub fn trainability_tracks(n: usize, layers: usize, slot: usize) -> Vec<(String, Location)> {
    let log = (n as f64).log2().ceil() as usize;
    [
        ("suffix_0", 0),
        ("suffix_log", log),
        ("suffix_half", layers / 2),
    ]
    .into_iter()
    .filter(|(_, s)| *s < layers)
    .map(|(name, s)| (name.to_string(), Location::new(layers - 1 - s, slot)))
    .collect()
}

pub fn run(cfg: &Resolved) -> Result<ExperimentResult> {
    let rows = match cfg.preset {
        Preset::FinalCost => Rows::Cost(final_cost_rows(cfg)?),
        _ => Rows::Gradient(gradient_preset_rows(cfg)?),
    };
    let summary = summarize(cfg, &rows);
    Ok(ExperimentResult {
        config: cfg.clone(),
        rows,
        summary,
    })
}

fn gradient_preset_rows(cfg: &Resolved) -> Result<Vec<GradientRow>> {
    let mut rows = Vec::new();
    for kind in &cfg.noise_type {
        for &n in &cfg.n {
            for &p in &cfg.p {
                for &layers in &cfg.layers {
                    let circuit = cfg.circuit(n, layers, kind, p)?;
                    let tracks = match cfg.preset {
                        Preset::Trainability => trainability_tracks(n, layers, cfg.slot),
                        _ => standard_tracks(layers, cfg.slot),
                    };
                    rows.extend(gradient_rows(cfg, &circuit, p, kind, &tracks)?);
                }
            }
        }
    }
    Ok(rows)
}

fn final_cost_rows(cfg: &Resolved) -> Result<Vec<CostRow>> {
    let mut rows = Vec::new();
    for kind in &cfg.noise_type {
        for &n in &cfg.n {
            for &p in &cfg.p {
                for &layers in &cfg.layers {
                    let circuit = cfg.circuit(n, layers, kind, p)?;
                    let res =
                        trainer::train_instances(&circuit, cfg.instances, &cfg.spsa, cfg.seed)?;
                    let k = res.len() as f64;
                    let mean = res.iter().map(|r| r.final_cost).sum::<f64>() / k;
                    let var = res
                        .iter()
                        .map(|r| (r.final_cost - mean).powi(2))
                        .sum::<f64>()
                        / k;
                    rows.push(CostRow {
                        n,
                        layers,
                        p,
                        noise_type: kind.clone(),
                        instances: res.len(),
                        mean_final_cost: mean,
                        std_final_cost: var.sqrt(),
                        mean_trace_over_dim: res.iter().map(|r| r.trace_over_dim).sum::<f64>() / k,
                        mean_ground_energy: res.iter().map(|r| r.ground_energy).sum::<f64>() / k,
                        seed: cfg.seed,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn summarize(cfg: &Resolved, rows: &Rows) -> serde_json::Value {
    match rows {
        Rows::Cost(rows) => json!({
            "points": rows.iter().map(|r| json!({
                "noise_type": r.noise_type, "n": r.n, "p": r.p,
                "gap_to_trace_over_dim": r.mean_final_cost - r.mean_trace_over_dim,
            })).collect::<Vec<_>>(),
        }),
        Rows::Gradient(rows) => match cfg.preset {
            Preset::LayersSweep => json!({ "slopes_log10_mean_vs_L": depth_slopes(rows) }),
            Preset::NoiseSweep => json!({ "points_above_bound": above_bound(rows) }),
            Preset::WidthScaling => json!({ "ratio_to_reference": width_ratios(rows) }),
            Preset::Trainability => trainability_summary(rows),
            Preset::FinalCost => serde_json::Value::Null,
        },
    }
}

fn depth_slopes(rows: &[GradientRow]) -> Vec<serde_json::Value> {
    let mut keys: Vec<(String, usize, u64, String)> = Vec::new();
    for r in rows {
        let key = (r.noise_type.clone(), r.n, r.p.to_bits(), r.track.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(kind, n, pb, track)| {
            let sel: Vec<&GradientRow> = rows
                .iter()
                .filter(|r| {
                    r.noise_type == kind && r.n == n && r.p.to_bits() == pb && r.track == track
                })
                .collect();
            let x: Vec<f64> = sel.iter().map(|r| r.layers as f64).collect();
            let y: Vec<f64> = sel
                .iter()
                .map(|r| r.mean_abs_grad.max(f64::MIN_POSITIVE).log10())
                .collect();
            let within = sel
                .iter()
                .all(|r| r.bound.is_none_or(|b| r.mean_abs_grad <= b));
            json!({
                "noise_type": kind, "n": n, "p": f64::from_bits(pb), "track": track,
                "slope": linear_fit(&x, &y).map(|f| f.0),
                "means_within_bound": within,
            })
        })
        .collect()
}

fn above_bound(rows: &[GradientRow]) -> Vec<serde_json::Value> {
    rows.iter()
        .filter(|r| r.bound.is_some_and(|b| r.mean_abs_grad > b))
        .map(|r| json!({ "noise_type": r.noise_type, "p": r.p, "L": r.layers, "track": r.track }))
        .collect()
}

fn width_ratios(rows: &[GradientRow]) -> Vec<serde_json::Value> {
    rows.iter()
        .map(|r| {
            json!({
                "noise_type": r.noise_type, "p": r.p, "n": r.n, "track": r.track,
                "ratio": r.mean_abs_grad / r.reference,
            })
        })
        .collect()
}

fn trainability_summary(rows: &[GradientRow]) -> serde_json::Value {
    let var_of = |kind: &str, n: usize, layers: usize, track: &str| {
        rows.iter()
            .find(|r| r.noise_type == kind && r.n == n && r.layers == layers && r.track == track)
            .map(|r| r.mean_sq_grad)
    };
    let mut flags = Vec::new();
    let mut points: Vec<(usize, usize, u64)> = Vec::new();
    for r in rows {
        let key = (r.n, r.layers, r.p.to_bits());
        if !points.contains(&key) {
            points.push(key);
        }
    }
    for (n, layers, pb) in &points {
        let ad = var_of("amplitude_damping", *n, *layers, "suffix_log");
        let dep = var_of("depolarizing", *n, *layers, "suffix_log");
        flags.push(json!({
            "n": n, "L": layers, "p": f64::from_bits(*pb),
            "ad_variance": ad, "unital_variance": dep,
            "ad_exceeds_unital": match (ad, dep) { (Some(a), Some(d)) => Some(a > d), _ => None },
        }));
    }
    let mut slopes = Vec::new();
    let mut tracks: Vec<(String, String, usize)> = Vec::new();
    for r in rows {
        let key = (r.noise_type.clone(), r.track.clone(), r.layers);
        if !tracks.contains(&key) {
            tracks.push(key);
        }
    }
    for (kind, track, layers) in tracks {
        let sel: Vec<&GradientRow> = rows
            .iter()
            .filter(|r| r.noise_type == kind && r.track == track && r.layers == layers)
            .collect();
        let x: Vec<f64> = sel.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = sel
            .iter()
            .map(|r| r.mean_sq_grad.max(f64::MIN_POSITIVE).ln())
            .collect();
        slopes.push(json!({
            "noise_type": kind, "track": track, "L": layers,
            "loglog_slope_variance_vs_n": linear_fit(&x, &y).map(|f| f.0),
        }));
    }
    json!({ "suffix_log_comparison": flags, "variance_scaling": slopes })
}

/// Rejects a non-empty directory unless `force`; creates it otherwise.
pub fn prepare_output(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "{} exists and is not a directory",
                dir.display()
            )));
        }
        let occupied = fs::read_dir(dir)?.next().is_some();
        if occupied && !force {
            return Err(Error::Config(format!(
                "output directory {} is not empty; pass --force to overwrite",
                dir.display()
            )));
        }
    } else {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// `git describe` when available, else the crate version.
pub fn version_string() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| format!("{}-{}", env!("CARGO_PKG_VERSION"), s.trim()))
        .unwrap_or_else(|| env!("CARGO_PKG_VERSION").to_string())
}

/// Paths written by [`write_result`].
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub plot: PathBuf,
    pub metadata: PathBuf,
    pub summary: PathBuf,
}

pub fn write_result(dir: &Path, result: &ExperimentResult, wall_time_s: f64) -> Result<Written> {
    let name = result.config.preset.name();
    let csv = dir.join(format!("{name}.csv"));
    fs::write(&csv, result.rows.to_csv()?)?;
    let plot = dir.join(format!("plot_{name}.py"));
    fs::write(
        &plot,
        plot_script(result.config.preset, &format!("{name}.csv")),
    )?;
    let summary = dir.join("summary.json");
    fs::write(
        &summary,
        serde_json::to_string_pretty(&result.summary)? + "\n",
    )?;
    let metadata = dir.join("metadata.json");
    let meta = json!({
        "version": version_string(),
        "preset": name,
        "seed": result.config.seed,
        "config": result.config,
        "rows": result.rows.len(),
        "csv": format!("{name}.csv"),
        "wall_time_s": wall_time_s,
    });
    fs::write(&metadata, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(Written {
        csv,
        plot,
        metadata,
        summary,
    })
}

/// Resolves, runs and writes an experiment into `dir`.
pub fn run_to_dir(
    cfg: &ExperimentConfig,
    dir: &Path,
    seed: Option<u64>,
    force: bool,
) -> Result<Written> {
    let resolved = resolve(cfg, seed)?;
    prepare_output(dir, force)?;
    let start = Instant::now();
    let result = run(&resolved)?;
    write_result(dir, &result, start.elapsed().as_secs_f64())
}

pub fn plot_script(preset: Preset, csv_name: &str) -> String {
    let body = match preset {
        Preset::LayersSweep => GRAD_PLOT.replace("{X}", "L").replace("{BOUND}", "True"),
        Preset::NoiseSweep => GRAD_PLOT.replace("{X}", "p").replace("{BOUND}", "True"),
        Preset::WidthScaling => GRAD_PLOT.replace("{X}", "n").replace("{BOUND}", "False"),
        Preset::Trainability => GRAD_PLOT.replace("{X}", "n").replace("{BOUND}", "False"),
        Preset::FinalCost => COST_PLOT.to_string(),
    };
    body.replace("{CSV}", csv_name)
}

const GRAD_PLOT: &str = r#"import os
import pandas as pd
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
df = pd.read_csv(os.path.join(here, "{CSV}"))
x = "{X}"
fig, axes = plt.subplots(2, df.noise_type.nunique(), figsize=(5 * df.noise_type.nunique(), 7), squeeze=False)
for j, (kind, sub) in enumerate(df.groupby("noise_type", sort=False)):
    for track, g in sub.groupby("track", sort=False):
        g = g.groupby(x, as_index=False).agg({"mean_abs_grad": "mean", "min": "min", "max": "max", "var_grad": "mean"})
        lo = np.log10(g.mean_abs_grad) - np.log10(g["min"].clip(lower=1e-300))
        hi = np.log10(g["max"]) - np.log10(g.mean_abs_grad)
        axes[0][j].errorbar(g[x], np.log10(g.mean_abs_grad), yerr=[lo, hi], marker="o", capsize=2, label=track)
        axes[1][j].plot(g[x], np.log10(g.var_grad), marker="o", label=track)
    if {BOUND}:
        b = sub.dropna(subset=["bound"]).groupby(x, as_index=False)["bound"].first()
        axes[0][j].plot(b[x], np.log10(b["bound"]), "k-.", label="bound")
    if x == "n":
        ref = sub.groupby(x, as_index=False)["reference"].first()
        axes[0][j].plot(ref[x], np.log10(ref["reference"]), color="gray", ls="-.", label="|h|/sqrt(D)")
    axes[0][j].set_title(kind)
    axes[0][j].set_ylabel("log10 mean |dC|")
    axes[1][j].set_ylabel("log10 var |dC|")
    axes[1][j].set_xlabel(x)
    axes[0][j].legend()
fig.tight_layout()
fig.savefig(os.path.join(here, os.path.splitext("{CSV}")[0] + ".png"), dpi=150)
"#;

const COST_PLOT: &str = r#"import os
import pandas as pd
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
df = pd.read_csv(os.path.join(here, "{CSV}"))
fig, ax = plt.subplots(figsize=(6, 4))
for (kind, n), g in df.groupby(["noise_type", "n"], sort=False):
    ax.errorbar(g.p, g.mean_final_cost, yerr=g.std_final_cost, marker="o", capsize=2, label=f"{kind} n={n}")
ref = df.groupby("p", as_index=False)["mean_trace_over_dim"].mean()
ax.plot(ref.p, ref.mean_trace_over_dim, "k--", label="Tr(H)/d")
ax.axhline(0.0, color="k")
ax.set_xlabel("p")
ax.set_ylabel("final cost")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, os.path.splitext("{CSV}")[0] + ".png"), dpi=150)
"#;

/// Input of the `grad-scan` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradScanConfig {
    pub circuit: CircuitConfig,
    /// Defaults to the first, middle and last layer at `slot`.
    #[serde(default)]
    pub locations: Option<Vec<Location>>,
    #[serde(default)]
    pub slot: usize,
    #[serde(default = "default_instances")]
    pub hamiltonians: usize,
    #[serde(default = "default_thetas")]
    pub thetas: usize,
}

fn default_instances() -> usize {
    10
}

fn default_thetas() -> usize {
    DEFAULT_THETAS
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GradScanRow {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub p: f64,
    pub noise_type: String,
    pub layer: usize,
    pub slot: usize,
    pub mean_abs_grad: f64,
    pub var_grad: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn grad_scan(cfg: &GradScanConfig, seed: u64) -> Result<Vec<GradScanRow>> {
    let locations = match &cfg.locations {
        Some(l) if !l.is_empty() => l.clone(),
        Some(_) => return Err(Error::Config("empty location list".into())),
        None => {
            let mut l = gradient::standard_locations(cfg.circuit.layers, cfg.slot);
            l.dedup();
            l
        }
    };
    let spec = SweepSpec {
        circuit: cfg.circuit.clone(),
        locations,
        hamiltonians: cfg.hamiltonians,
        thetas: cfg.thetas,
        seed,
    };
    let res = gradient::gradient_stats(&spec)?;
    Ok(res
        .stats
        .iter()
        .map(|s| GradScanRow {
            n: cfg.circuit.n,
            layers: cfg.circuit.layers,
            p: cfg.circuit.noise.p,
            noise_type: cfg.circuit.noise.kind.clone(),
            layer: s.location.layer,
            slot: s.location.slot,
            mean_abs_grad: s.mean_abs,
            var_grad: s.var_abs,
            min: s.min,
            max: s.max,
            samples: s.samples,
            seed,
        })
        .collect())
}
