//! Problem Hamiltonians as real combinations of Pauli strings.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pauli::{self, DensityMatrix, NiceBasis, Pauli, PauliString};

/// Imaginary part allowed in `Tr(Hρ)`.
pub const COST_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    /// Coefficient of the identity in the Pauli basis.
    identity: f64,
    /// Non-identity Pauli coefficients.
    terms: BTreeMap<PauliString, f64>,
}

impl Hamiltonian {
    /// Identity strings are folded into the identity coefficient.
    pub fn new(n: usize, terms: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        pauli::check_qubits(n)?;
        let mut h = Self {
            n,
            identity: 0.0,
            terms: BTreeMap::new(),
        };
        for (p, c) in terms {
            if p.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.n(),
                });
            }
            if !c.is_finite() {
                return Err(Error::Config(format!("coefficient of {p} is not finite")));
            }
            if p.is_identity() {
                h.identity += c;
            } else {
                *h.terms.entry(p).or_insert(0.0) += c;
            }
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn identity_coeff(&self) -> f64 {
        self.identity
    }

    pub fn terms(&self) -> &BTreeMap<PauliString, f64> {
        &self.terms
    }

    /// Coordinate along `F_0 = I/√d`.
    pub fn h0(&self) -> f64 {
        self.identity * (self.dim() as f64).sqrt()
    }

    /// `Tr(H)/d`.
    pub fn trace_over_dim(&self) -> f64 {
        self.identity
    }

    /// Largest Hamming weight with a nonzero coefficient.
    pub fn locality(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| **c != 0.0)
            .map(|(p, _)| p.hamming_weight())
            .max()
            .unwrap_or(0)
    }

    /// `‖h‖` of the traceless part, computed from the Pauli coefficients.
    pub fn h_norm(&self) -> f64 {
        let s: f64 = linalg::compensated_sum(self.terms.values().map(|c| c * c));
        (self.dim() as f64 * s).sqrt()
    }

    /// Schatten-2 norm `√Tr(H²)`.
    pub fn schatten2(&self) -> f64 {
        (self.h_norm().powi(2) + self.h0().powi(2)).sqrt()
    }

    pub fn matrix(&self) -> CMat {
        let d = self.dim();
        let mut m = linalg::identity(d).scale(self.identity);
        for (p, c) in &self.terms {
            p.add_scaled_to(&mut m, Complex64::new(*c, 0.0));
        }
        m
    }

    pub fn ground_energy(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix())
    }

    fn scale(&mut self, s: f64) {
        self.identity *= s;
        for c in self.terms.values_mut() {
            *c *= s;
        }
    }

    /// `Tr(Hρ)` for an operator of matching size, with its imaginary part.
    pub fn expectation_parts(&self, rho: &CMat) -> (f64, f64) {
        let mut re = vec![self.identity * linalg::trace(rho).re];
        let mut im = vec![self.identity * linalg::trace(rho).im];
        for (p, c) in &self.terms {
            let z = p.trace_product(rho) * *c;
            re.push(z.re);
            im.push(z.im);
        }
        (linalg::compensated_sum(re), linalg::compensated_sum(im))
    }

    pub fn expectation(&self, rho: &CMat) -> f64 {
        self.expectation_parts(rho).0
    }
}

/// Every weight-1 and weight-2 string over {X, Z} with uniform `[0, 1)`
/// magnitudes, shifted to ground energy zero and scaled to `‖H‖₂ = 1`.
pub fn random_two_local(n: usize, seed: u64) -> Result<Hamiltonian> {
    random_two_local_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_two_local_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Hamiltonian> {
    if !(2..=pauli::MAX_QUBITS).contains(&n) {
        return Err(Error::Size {
            n,
            min: 2,
            max: pauli::MAX_QUBITS,
        });
    }
    let letters = [Pauli::X, Pauli::Z];
    let mut terms = Vec::new();
    for q in 0..n {
        for &a in &letters {
            terms.push(PauliString::single(n, q, a));
        }
    }
    for q in 0..n {
        for r in q + 1..n {
            for &a in &letters {
                for &b in &letters {
                    terms.push(PauliString::from_sites(n, &[(q, a), (r, b)]));
                }
            }
        }
    }
    let mut h = Hamiltonian::new(n, terms.into_iter().map(|p| (p, rng.random::<f64>())))?;
    h.scale(1.0 / h.schatten2());
    h.identity -= h.ground_energy();
    h.scale(1.0 / h.schatten2());
    Ok(h)
}

/// `(h0, h)` with `h_j = Tr(F_j H)`.
pub fn h_vector(h: &Hamiltonian, basis: &NiceBasis) -> Result<(f64, Vec<f64>)> {
    if basis.n() != h.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: h.n(),
        });
    }
    let sqrt_d = (h.dim() as f64).sqrt();
    let mut v = vec![0.0; basis.len() - 1];
    for (p, c) in h.terms() {
        let j = basis.index_of(p).expect("basis holds every string");
        v[j - 1] = c * sqrt_d;
    }
    Ok((h.h0(), v))
}

/// `h_max · n^{K/2} / √((K−1)!)`.
pub fn h_norm_bound(n: usize, k: usize, h_max: f64) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::Precondition(format!(
            "locality K = {k} must lie in 1..={n}"
        )));
    }
    let fact: f64 = (1..k).map(|i| i as f64).product();
    Ok(h_max * (n as f64).powf(k as f64 / 2.0) / fact.sqrt())
}

/// `Tr(Hρ)`.
pub fn cost(h: &Hamiltonian, rho: &DensityMatrix) -> Result<f64> {
    if h.n() != rho.n() {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            got: rho.n(),
        });
    }
    let (re, im) = h.expectation_parts(rho.data());
    if im.abs() > COST_IMAG_TOL {
        return Err(Error::Numerical(format!(
            "Tr(Hρ) has imaginary part {im:.3e}"
        )));
    }
    Ok(re)
}

/// `Tr(H)/d + v·h`.
pub fn cost_via_coherence(h: &Hamiltonian, rho: &DensityMatrix, basis: &NiceBasis) -> Result<f64> {
    let v = pauli::to_coherence(rho, basis)?;
    let (_, hv) = h_vector(h, basis)?;
    Ok(h.trace_over_dim() + v.dot(&hv))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub pauli: PauliString,
    pub coeff: f64,
}

/// `{n, terms, h0}`; `h0` is the `F_0` coordinate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
    #[serde(default)]
    pub h0: f64,
}

impl From<&Hamiltonian> for HamiltonianJson {
    fn from(h: &Hamiltonian) -> Self {
        Self {
            n: h.n(),
            terms: h
                .terms()
                .iter()
                .map(|(p, c)| TermJson {
                    pauli: p.clone(),
                    coeff: *c,
                })
                .collect(),
            h0: h.h0(),
        }
    }
}

impl TryFrom<HamiltonianJson> for Hamiltonian {
    type Error = Error;

    fn try_from(j: HamiltonianJson) -> Result<Self> {
        pauli::check_qubits(j.n)?;
        let identity = PauliString::identity(j.n);
        let sqrt_d = ((1usize << j.n) as f64).sqrt();
        Hamiltonian::new(
            j.n,
            j.terms
                .into_iter()
                .map(|t| (t.pauli, t.coeff))
                .chain(std::iter::once((identity, j.h0 / sqrt_d))),
        )
    }
}
