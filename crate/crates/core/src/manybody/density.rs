use nalgebra::DMatrix;
use num_complex::Complex64;

use super::check_budget;
use super::state::ManyBodyState;
use crate::error::{Error, Result};
use crate::gp::{check_same_grid, WaveFunction};
use crate::grid::{for_each_index, GridSpec};

/// A `k`-particle operator kernel in the orthonormal cell basis.
///
/// Entry `(X, X')` sits at `X * dim + X'`, where `X` is the flat index of a
/// `k`-particle configuration. Viewed as a tensor this is rank `2 k d`:
/// the `k d` left axes followed by the `k d` right axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    k: usize,
    grid: GridSpec,
    dim: usize,
    matrix: Vec<Complex64>,
}

/// A trace-one, Hermitian, positive kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Kernel);

impl std::ops::Deref for DensityMatrix {
    type Target = Kernel;
    fn deref(&self) -> &Kernel {
        &self.0
    }
}

/// Eigenpairs in descending order of eigenvalue. Each eigenvector is
/// rotated so that its first component above 1e-12 in modulus is real and
/// positive.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

pub(crate) fn kernel_dim(k: usize, grid: &GridSpec) -> Result<usize> {
    let d = (grid.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    check_budget(&format!("{k}-particle kernel"), d.saturating_mul(d))?;
    Ok(d as usize)
}

impl Kernel {
    pub fn zeros(k: usize, grid: GridSpec) -> Result<Self> {
        let dim = kernel_dim(k, &grid)?;
        Ok(Self { k, grid, dim, matrix: vec![Complex64::new(0.0, 0.0); dim * dim] })
    }

    pub fn from_matrix(k: usize, grid: GridSpec, matrix: Vec<Complex64>) -> Result<Self> {
        let dim = kernel_dim(k, &grid)?;
        if matrix.len() != dim * dim {
            return Err(Error::GridMismatch(format!("kernel has {} entries, expected {}", matrix.len(), dim * dim)));
        }
        Ok(Self { k, grid, dim, matrix })
    }

    /// `|φ⟩⟨φ|^{⊗k}` for a normalized `φ`.
    pub fn projector(phi: &WaveFunction, k: usize) -> Result<Self> {
        let grid = *phi.grid();
        let dim = kernel_dim(k, &grid)?;
        let s = grid.cell_volume().sqrt();
        let amp: Vec<Complex64> = phi.values().iter().map(|z| z * s).collect();
        let mut vec = Vec::with_capacity(dim);
        for_each_index(k, grid.len(), |_, parts| vec.push(parts.iter().map(|&p| amp[p]).product()));
        Ok(Self::outer(k, grid, &vec, &vec))
    }

    /// `|a⟩⟨b|` for cell-basis vectors.
    pub(crate) fn outer(k: usize, grid: GridSpec, a: &[Complex64], b: &[Complex64]) -> Self {
        let dim = a.len();
        let mut matrix = Vec::with_capacity(dim * dim);
        for x in a {
            for y in b {
                matrix.push(x * y.conj());
            }
        }
        Self { k, grid, dim, matrix }
    }

    pub fn particles(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut [Complex64] {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> Vec<Complex64> {
        self.matrix
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.matrix[x * self.dim + y]
    }

    /// Kernel value `γ(X, X')`, i.e. the matrix entry over `Δx^{k d}`.
    pub fn kernel_value(&self, x: usize, y: usize) -> Complex64 {
        self.get(x, y) / self.grid.cell_volume().powi(self.k as i32)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_compatible(&self, other: &Kernel) -> Result<()> {
        check_same_grid(&self.grid, &other.grid)?;
        if self.k != other.k {
            return Err(Error::GridMismatch(format!("{}- vs {}-particle kernels", self.k, other.k)));
        }
        Ok(())
    }

    pub fn distance(&self, other: &Kernel) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.matrix.iter().zip(&other.matrix).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    pub fn add_scaled(&mut self, other: &Kernel, c: Complex64) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.matrix.iter_mut().zip(&other.matrix) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.matrix {
            *a *= c;
        }
    }

    /// Largest `|G(X, X') - conj G(X', X)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.dim {
            for y in x..self.dim {
                worst = worst.max((self.get(x, y) - self.get(y, x).conj()).norm());
            }
        }
        worst
    }

    /// Largest `|G(X, X') + conj G(X', X)|`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.dim {
            for y in x..self.dim {
                worst = worst.max((self.get(x, y) + self.get(y, x).conj()).norm());
            }
        }
        worst
    }

    /// Trace over the last particle.
    pub fn partial_trace(&self) -> Result<Kernel> {
        if self.k < 2 {
            return Err(Error::domain("partial trace needs a kernel with k >= 2"));
        }
        let one = self.grid.len();
        let dim = self.dim / one;
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for x in 0..dim {
            for y in 0..dim {
                let mut s = Complex64::new(0.0, 0.0);
                for z in 0..one {
                    s += self.get(x * one + z, y * one + z);
                }
                out[x * dim + y] = s;
            }
        }
        Kernel::from_matrix(self.k - 1, self.grid, out)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.matrix)
    }

    /// Hermitian eigen-decomposition of the Hermitian part.
    pub fn eigen(&self) -> Eigen {
        let m = self.to_nalgebra();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let mut values = Vec::with_capacity(self.dim);
        let mut vectors = Vec::with_capacity(self.dim);
        for i in order {
            values.push(eig.eigenvalues[i]);
            let mut v: Vec<Complex64> = eig.eigenvectors.column(i).iter().copied().collect();
            if let Some(first) = v.iter().find(|z| z.norm() > 1e-12).copied() {
                let rot = first.conj() / first.norm();
                v.iter_mut().for_each(|z| *z *= rot);
            }
            vectors.push(v);
        }
        Eigen { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace and positivity at 1e-10.
    pub fn new(kernel: Kernel) -> Result<Self> {
        let tr = kernel.trace();
        if (tr - 1.0).norm() > 1e-10 {
            return Err(Error::domain(format!("density matrix trace {tr} is not 1")));
        }
        if kernel.hermiticity_defect() > 1e-10 {
            return Err(Error::domain("density matrix is not Hermitian"));
        }
        if kernel.dim <= 4096 {
            let min = kernel.eigenvalues().last().copied().unwrap_or(0.0);
            if min < -1e-10 {
                return Err(Error::domain(format!("density matrix has eigenvalue {min}")));
            }
        }
        Ok(Self(kernel))
    }

    /// `|φ⟩⟨φ|^{⊗k}`.
    pub fn projector(phi: &WaveFunction, k: usize) -> Result<Self> {
        Ok(Self(Kernel::projector(phi, k)?))
    }

    /// `Σ w_i |φ_i⟩⟨φ_i|` for one particle; weights must sum to 1.
    pub fn mixture(parts: &[(f64, &WaveFunction)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::domain("empty mixture"))?;
        let mut acc = Kernel::zeros(1, *first.grid())?;
        for (w, phi) in parts {
            acc.add_scaled(&Kernel::projector(phi, 1)?, Complex64::new(*w, 0.0))?;
        }
        Self::new(acc)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.0
    }

    pub fn into_kernel(self) -> Kernel {
        self.0
    }

    /// `Tr_{k} γ^{(k)}`, again a density matrix.
    pub fn partial_trace(&self) -> Result<DensityMatrix> {
        Ok(Self(self.0.partial_trace()?))
    }
}

/// The `k`-particle marginal `Tr_{k+1..N} |ψ⟩⟨ψ|`, trace-normalized.
pub fn marginal(psi: &ManyBodyState, k: usize) -> Result<DensityMatrix> {
    let n = psi.particles();
    if k == 0 || k > n {
        return Err(Error::domain(format!("marginal order k = {k} outside 1..={n}")));
    }
    let grid = *psi.grid();
    let dim = kernel_dim(k, &grid)?;
    let rest = psi.values().len() / dim;
    let s = psi.cell_volume().sqrt();
    let a = DMatrix::from_row_slice(dim, rest, psi.values()) * Complex64::new(s, 0.0);
    let g = &a * a.adjoint();
    let tr: Complex64 = g.diagonal().iter().sum();
    let inv = 1.0 / tr.re;
    let mut matrix = Vec::with_capacity(dim * dim);
    for x in 0..dim {
        for y in 0..dim {
            matrix.push(g[(x, y)] * inv);
        }
    }
    Ok(DensityMatrix(Kernel { k, grid, dim, matrix }))
}
