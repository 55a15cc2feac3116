//! Dense complex matrix helpers shared by the simulator.
//!
//! Qubit `q` of an `n`-qubit register maps to bit `n - 1 - q` of a basis
//! index, so qubit 0 is the leftmost tensor factor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0[0]
}

/// `exp(-i * angle * G / 2)` for Hermitian `G`.
pub fn expm_rotation(generator: &CMat, angle: f64) -> CMat {
    let (values, vectors) = hermitian_eigen(generator);
    let phases = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values
            .iter()
            .map(|&lam| Complex64::from_polar(1.0, -0.5 * angle * lam)),
    ));
    &vectors * phases * vectors.adjoint()
}

/// Haar-random `d x d` unitary (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        let mut col = u.column_mut(j);
        col *= phase;
    }
    u
}

/// Haar-random isometry from dimension `d` into `d * k`, returned as `k`
/// stacked `d x d` blocks.
pub fn random_isometry_blocks<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Vec<CMat> {
    let u = haar_unitary(d * k, rng);
    (0..k)
        .map(|a| u.view((a * d, 0), (d, d)).into_owned())
        .collect()
}

/// Basis-index offsets of the `2^k` local states on `qubits`.
fn local_offsets(qubits: &[usize], n: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|a| {
            qubits.iter().enumerate().fold(0usize, |acc, (i, &q)| {
                if (a >> (k - 1 - i)) & 1 == 1 {
                    acc | (1 << (n - 1 - q))
                } else {
                    acc
                }
            })
        })
        .collect()
}

/// Indices whose bits on `qubits` are all zero.
fn base_indices(qubits: &[usize], n: usize) -> Vec<usize> {
    let mask = qubits
        .iter()
        .fold(0usize, |acc, &q| acc | (1 << (n - 1 - q)));
    (0..1usize << n).filter(|i| i & mask == 0).collect()
}

/// `(op ⊗ 1) · x · (op ⊗ 1)†` with `op` acting on `qubits`.
pub fn conjugate_local(x: &CMat, op: &CMat, qubits: &[usize], n: usize) -> CMat {
    let dim = 1usize << n;
    let k = 1usize << qubits.len();
    debug_assert_eq!(op.nrows(), k);
    debug_assert_eq!(x.nrows(), dim);
    let offsets = local_offsets(qubits, n);
    let bases = base_indices(qubits, n);
    let mut left = CMat::zeros(dim, dim);
    let mut buf = vec![ZERO; k];
    for col in 0..dim {
        for &b in &bases {
            for a in 0..k {
                buf[a] = x[(b + offsets[a], col)];
            }
            for r in 0..k {
                let mut acc = ZERO;
                for a in 0..k {
                    acc += op[(r, a)] * buf[a];
                }
                left[(b + offsets[r], col)] = acc;
            }
        }
    }
    let mut out = CMat::zeros(dim, dim);
    for row in 0..dim {
        for &b in &bases {
            for a in 0..k {
                buf[a] = left[(row, b + offsets[a])];
            }
            for r in 0..k {
                let mut acc = ZERO;
                for a in 0..k {
                    acc += buf[a] * op[(r, a)].conj();
                }
                out[(row, b + offsets[r])] = acc;
            }
        }
    }
    out
}

/// `Σ_α K_α x K_α†` with every `K_α` acting on `qubits`.
pub fn kraus_local(x: &CMat, ops: &[CMat], qubits: &[usize], n: usize) -> CMat {
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for k in ops {
        out += conjugate_local(x, k, qubits, n);
    }
    out
}

/// Embed a local operator on `qubits` into the full `2^n` space.
pub fn embed(op: &CMat, qubits: &[usize], n: usize) -> CMat {
    let dim = 1usize << n;
    let k = 1usize << qubits.len();
    let offsets = local_offsets(qubits, n);
    let bases = base_indices(qubits, n);
    let mut out = CMat::zeros(dim, dim);
    for &b in &bases {
        for r in 0..k {
            for a in 0..k {
                out[(b + offsets[r], b + offsets[a])] = op[(r, a)];
            }
        }
    }
    out
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
