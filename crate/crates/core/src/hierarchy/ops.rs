use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{for_each_index, GridSpec, TensorFft};
use crate::manybody::Kernel;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sum of `|k_j|²` over the `k` particles of every configuration index.
pub(crate) fn k2_sums(k: usize, grid: &GridSpec) -> Vec<f64> {
    let single = single_k2(grid);
    let mut out = Vec::with_capacity(single.len().pow(k as u32));
    for_each_index(k, grid.len(), |_, parts| out.push(parts.iter().map(|&p| single[p]).sum()));
    out
}

pub(crate) fn single_k2(grid: &GridSpec) -> Vec<f64> {
    let kv = grid.wavenumbers();
    let mut out = Vec::with_capacity(grid.len());
    for_each_index(grid.dim, grid.points_per_axis, |_, idx| out.push(idx.iter().map(|&i| kv[i] * kv[i]).sum()));
    out
}

/// Multiply the doubly transformed kernel by `symbol(s, s')`, where `s` and
/// `s'` are the summed `|k|²` of the left and right configurations.
pub(crate) fn apply_two_sided_symbol(kernel: &mut Kernel, symbol: impl Fn(f64, f64) -> Complex64) {
    let sums = k2_sums(kernel.particles(), kernel.grid());
    let fft = TensorFft::new(kernel.grid().points_per_axis);
    let dim = kernel.dim();
    let m = kernel.matrix_mut();
    fft.forward(m);
    for (x, row) in m.chunks_exact_mut(dim).enumerate() {
        for (y, z) in row.iter_mut().enumerate() {
            *z *= symbol(sums[x], sums[y]);
        }
    }
    fft.inverse(m);
}

/// `e^{itΔ} γ e^{-itΔ}` on every particle slot.
pub fn free_propagate(gamma: &Kernel, t: f64) -> Kernel {
    let mut out = gamma.clone();
    if t != 0.0 {
        apply_two_sided_symbol(&mut out, |s, sp| (-I * (t * (s - sp))).exp());
    }
    out
}

/// `-i Σ_j [-Δ_j, γ]`.
pub fn kinetic_commutator(gamma: &Kernel) -> Kernel {
    let mut out = gamma.clone();
    apply_two_sided_symbol(&mut out, |s, sp| -I * (s - sp));
    out
}

/// `Tr (1 - Δ_1) ⋯ (1 - Δ_k) γ`, computed spectrally.
pub fn sobolev_trace_norm(gamma: &Kernel) -> f64 {
    let grid = *gamma.grid();
    let k = gamma.particles();
    let single = single_k2(&grid);
    let mut weight = Vec::with_capacity(gamma.dim());
    for_each_index(k, grid.len(), |_, parts| weight.push(parts.iter().map(|&p| 1.0 + single[p]).product::<f64>()));
    let rank = k * grid.dim;
    let fft = TensorFft::new(grid.points_per_axis);
    let mut m = gamma.matrix().to_vec();
    fft.forward_axes(&mut m, 0..rank);
    let dim = gamma.dim();
    for (row, w) in m.chunks_exact_mut(dim).zip(&weight) {
        row.iter_mut().for_each(|z| *z *= w);
    }
    fft.inverse_axes(&mut m, 0..rank);
    (0..dim).map(|i| m[i * dim + i].re).sum()
}

/// The `j`-th summand of the collision operator applied to a
/// `(k+1)`-particle kernel:
/// `-iσ Tr_{k+1} [δ(r_j - r_{k+1}), γ^{(k+1)}]`, with `j` counted from 0.
///
/// The discrete δ is `Δx^{-d}` times the Kronecker symbol. This dense path
/// is restricted to one-dimensional grids; factorized inputs in any
/// dimension go through [`KronSum::collision`](super::KronSum::collision).
pub fn collision_apply(gamma_next: &Kernel, sigma: f64, j: usize) -> Result<Kernel> {
    let grid = *gamma_next.grid();
    if grid.dim != 1 {
        return Err(Error::Unsupported(format!(
            "dense collision operator needs d = 1 (got d = {}); use the factorized path",
            grid.dim
        )));
    }
    let k1 = gamma_next.particles();
    if k1 < 2 {
        return Err(Error::domain("collision operator needs a kernel with at least two particles"));
    }
    let k = k1 - 1;
    if j >= k {
        return Err(Error::domain(format!("collision slot {j} outside 0..{k}")));
    }
    let p = grid.len();
    let mut out = Kernel::zeros(k, grid)?;
    let dim = out.dim();
    let stride = p.pow((k - 1 - j) as u32);
    let c = -I * sigma / grid.cell_volume();
    let src = gamma_next.dim();
    let m = out.matrix_mut();
    for x in 0..dim {
        let xj = (x / stride) % p;
        for y in 0..dim {
            let yj = (y / stride) % p;
            let a = gamma_next.matrix()[(x * p + xj) * src + y * p + xj];
            let b = gamma_next.matrix()[(x * p + yj) * src + y * p + yj];
            m[x * dim + y] = c * (a - b);
        }
    }
    Ok(out)
}

/// `Σ_j` of [`collision_apply`].
pub fn collision_sum(gamma_next: &Kernel, sigma: f64) -> Result<Kernel> {
    let k = gamma_next.particles().saturating_sub(1);
    let mut acc = Kernel::zeros(k.max(1), *gamma_next.grid())?;
    for j in 0..k {
        acc.add_scaled(&collision_apply(gamma_next, sigma, j)?, Complex64::new(1.0, 0.0))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{evolve_gp, WaveFunction};
    use crate::manybody::{marginal, DensityMatrix, ManyBodyState};
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(1, 16, 2.0 * PI).unwrap()
    }

    #[test]
    fn free_propagation_of_a_projector() {
        let g = grid();
        let phi = WaveFunction::gaussian(g, 0.8, &[0.3], &[1.0]).unwrap();
        let p = Kernel::projector(&phi, 1).unwrap();
        assert_eq!(free_propagate(&p, 0.0), p);
        let t = 0.37;
        let out = free_propagate(&p, t);
        let phit = evolve_gp(&phi, 0.0, t, t).unwrap();
        assert!(out.distance(&Kernel::projector(&phit, 1).unwrap()).unwrap() < 1e-13);
        assert!((out.trace() - 1.0).norm() < 1e-13);
        let ev = out.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12 && ev[1].abs() < 1e-12);
    }

    #[test]
    fn free_propagation_preserves_invariants() {
        let g = GridSpec::new(1, 8, 3.0).unwrap();
        let psi = ManyBodyState::random_symmetric(3, g, 5).unwrap();
        let gamma = marginal(&psi, 2).unwrap();
        let out = free_propagate(&gamma, 0.8);
        assert!((out.trace() - gamma.trace()).norm() < 1e-10);
        assert!(out.hermiticity_defect() < 1e-10);
        let (a, b) = (gamma.eigenvalues(), out.eigenvalues());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
        assert!((sobolev_trace_norm(&out) - sobolev_trace_norm(&gamma)).abs() < 1e-10 * sobolev_trace_norm(&gamma));
        // Composition.
        let twice = free_propagate(&free_propagate(&gamma, 0.3), 0.5);
        assert!(twice.distance(&out).unwrap() < 1e-12);
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = grid();
        let c = DensityMatrix::projector(&WaveFunction::constant(g).unwrap(), 1).unwrap();
        assert!((sobolev_trace_norm(&c) - 1.0).abs() < 1e-12);
        let pw = DensityMatrix::projector(&WaveFunction::plane_wave(g, &[3]).unwrap(), 1).unwrap();
        assert!((sobolev_trace_norm(&pw) - 10.0).abs() < 1e-10);
        let phi = WaveFunction::gaussian(g, 0.9, &[], &[2.0]).unwrap();
        let p2 = Kernel::projector(&phi, 2).unwrap();
        let expect = (1.0 + phi.kinetic_energy()).powi(2);
        assert!((sobolev_trace_norm(&p2) - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn factorized_collision_closed_form() {
        let g = grid();
        let phi = WaveFunction::gaussian(g, 0.8, &[0.2], &[1.0]).unwrap();
        let sigma = 0.7;
        let out = collision_apply(&Kernel::projector(&phi, 2).unwrap(), sigma, 0).unwrap();
        let v = phi.values();
        let dv = g.cell_volume();
        for x in 0..16 {
            for y in 0..16 {
                // Kernel −iσ(|φ(r)|² − |φ(r')|²) φ(r) φ̄(r'), times Δx for the matrix entry.
                let expect = -I * sigma * (v[x].norm_sqr() - v[y].norm_sqr()) * v[x] * v[y].conj() * dv;
                assert!((out.get(x, y) - expect).norm() < 1e-14);
            }
        }
        // [δ, γ] is anti-Hermitian, so -iσ[δ, γ] is Hermitian and traceless.
        assert!(out.trace().norm() < 1e-14);
        assert!(out.hermiticity_defect() < 1e-14);
        let flat = collision_apply(&Kernel::projector(&WaveFunction::constant(g).unwrap(), 2).unwrap(), sigma, 0).unwrap();
        assert!(flat.frobenius_norm() < 1e-15);
        let off = collision_apply(&Kernel::projector(&phi, 2).unwrap(), 0.0, 0).unwrap();
        assert_eq!(off.frobenius_norm(), 0.0);
    }

    #[test]
    fn collision_is_traceless_on_general_input() {
        let g = GridSpec::new(1, 8, 3.0).unwrap();
        let psi = ManyBodyState::random_symmetric(3, g, 9).unwrap();
        let gamma = marginal(&psi, 3).unwrap();
        for j in 0..2 {
            let out = collision_apply(&gamma, 1.3, j).unwrap();
            assert!(out.trace().norm() < 1e-10);
            assert!(out.hermiticity_defect() < 1e-12);
            let mut commutator = out.clone();
            commutator.scale(Complex64::new(0.0, 1.0 / 1.3));
            assert!(commutator.anti_hermiticity_defect() < 1e-12);
        }
        assert!(collision_apply(&gamma, 1.0, 2).is_err());
        let g3 = GridSpec::new(3, 8, 3.0).unwrap();
        let p = Kernel::projector(&WaveFunction::constant(g3).unwrap(), 1).unwrap();
        assert!(matches!(collision_apply(&p, 1.0, 0), Err(Error::Unsupported(_))));
    }
}
