use num_complex::Complex64;

use super::density::{kernel_dim, DensityMatrix};
use super::hamiltonian::ManyBodyHamiltonian;
use super::state::{pair_table, ManyBodyState, SeparationIndex};
use crate::error::{Error, Result};
use crate::gp::{check_same_grid, Spectral, WaveFunction};
use crate::grid::{for_each_index, TensorFft};

/// `⟨φ, γ φ⟩` for a one-particle density matrix.
pub fn condensate_overlap(gamma: &DensityMatrix, phi: &WaveFunction) -> Result<f64> {
    check_same_grid(gamma.grid(), phi.grid())?;
    if gamma.particles() != 1 {
        return Err(Error::domain("condensate overlap needs a one-particle density matrix"));
    }
    let s = phi.grid().cell_volume().sqrt();
    let a: Vec<Complex64> = phi.values().iter().map(|z| z * s).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, ax) in a.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (y, ay) in a.iter().enumerate() {
            row += gamma.get(x, y) * ay;
        }
        acc += ax.conj() * row;
    }
    Ok(acc.re)
}

/// `⟨ψ, H^m ψ⟩` for `m` in `{1, 2}`.
pub fn energy_moment(psi: &ManyBodyState, ham: &ManyBodyHamiltonian, m: u32) -> Result<f64> {
    let dv = psi.cell_volume();
    let h = ham.apply(psi)?;
    match m {
        1 => Ok(psi.values().iter().zip(&h).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * dv),
        2 => Ok(h.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv),
        _ => Err(Error::domain(format!("energy moment order {m} not in {{1, 2}}"))),
    }
}

/// `⟨ψ, c Σ_{i<j} V_N(r_i - r_j) ψ⟩ / N`.
pub fn pair_interaction_per_particle(psi: &ManyBodyState, ham: &ManyBodyHamiltonian) -> Result<f64> {
    let n = psi.particles();
    let grid = psi.grid();
    let pair = pair_table(grid, |r| ham.pair.value(r));
    let sep = SeparationIndex::new(grid);
    let vals = psi.values();
    let mut acc = 0.0;
    for_each_index(n, grid.len(), |flat, parts| {
        let mut v = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                v += pair[sep.of(parts[i], parts[j])];
            }
        }
        acc += v * vals[flat].norm_sqr();
    });
    Ok(acc * ham.pair_coupling * psi.cell_volume() / n as f64)
}

/// `∫ |∇_{r_i} ∇_{r_j} (ψ / f(r_i - r_j))|²`, with the mixed gradient taken
/// spectrally after pointwise division.
pub fn correlation_quotient(psi: &ManyBodyState, f: impl Fn(f64) -> f64, i: usize, j: usize) -> Result<f64> {
    let n = psi.particles();
    if n < 2 || i == j || i >= n || j >= n {
        return Err(Error::domain(format!("need two distinct particles below {n}, got ({i}, {j})")));
    }
    let grid = *psi.grid();
    let table = pair_table(&grid, &f);
    if let Some(bad) = table.iter().find(|v| !(v.abs() > 0.0 && v.is_finite())) {
        return Err(Error::domain(format!("correlation factor {bad} vanishes on the grid")));
    }
    let sep = SeparationIndex::new(&grid);
    let vals = psi.values();
    let mut buf = Vec::with_capacity(vals.len());
    for_each_index(n, grid.len(), |flat, parts| buf.push(vals[flat] / table[sep.of(parts[i], parts[j])]));
    TensorFft::new(grid.points_per_axis).forward(&mut buf);
    let single = Spectral::new(grid).k2;
    let mut acc = 0.0;
    for_each_index(n, grid.len(), |flat, parts| {
        acc += single[parts[i]] * single[parts[j]] * buf[flat].norm_sqr();
    });
    Ok(acc * psi.cell_volume() / buf.len() as f64)
}

/// `√(1 - ‖⟨φ^{⊗k}, ψ⟩_{1..k}‖²)`, where the partial inner product contracts
/// the first `k` particle slots.
pub fn factorization_distance(psi: &ManyBodyState, phi: &WaveFunction, k: usize) -> Result<f64> {
    check_same_grid(psi.grid(), phi.grid())?;
    let n = psi.particles();
    if k == 0 || k >= n {
        return Err(Error::domain(format!("factorization order k = {k} outside 1..{n}")));
    }
    let grid = *psi.grid();
    let dim = kernel_dim(k, &grid)?;
    let rest = psi.values().len() / dim;
    let pv = phi.values();
    let mut left = Vec::with_capacity(dim);
    for_each_index(k, grid.len(), |_, parts| {
        left.push(parts.iter().map(|&p| pv[p].conj()).product::<Complex64>());
    });
    let mut xi = vec![Complex64::new(0.0, 0.0); rest];
    for (x, row) in psi.values().chunks_exact(rest).enumerate() {
        let c = left[x];
        for (acc, v) in xi.iter_mut().zip(row) {
            *acc += c * v;
        }
    }
    let dv = grid.cell_volume();
    let norm2 = xi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv.powi(2 * k as i32) * dv.powi((n - k) as i32);
    Ok((1.0 - norm2).max(0.0).sqrt())
}

/// `(⟨ψ, |r|⁻² ψ⟩, 4 ⟨∇ψ, ∇ψ⟩)` for a function of the relative coordinate.
///
/// The origin cell gets the average of `|r|⁻²` over its six face
/// neighbours, which is `1/Δx²`.
pub fn hardy_check(psi_rel: &WaveFunction) -> Result<(f64, f64)> {
    let grid = *psi_rel.grid();
    if grid.dim != 3 {
        return Err(Error::domain(format!("Hardy check needs d = 3, got d = {}", grid.dim)));
    }
    let coords = grid.coords();
    let dx2 = grid.dx() * grid.dx();
    let vals = psi_rel.values();
    let mut lhs = 0.0;
    for_each_index(3, grid.points_per_axis, |flat, idx| {
        let r2: f64 = idx.iter().map(|&i| coords[i] * coords[i]).sum();
        let w = if r2 < 0.25 * dx2 { 1.0 / dx2 } else { 1.0 / r2 };
        lhs += w * vals[flat].norm_sqr();
    });
    lhs *= grid.cell_volume();
    Ok((lhs, 4.0 * psi_rel.kinetic_energy()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::manybody::{build_initial, ground_state_dense, marginal, InitialKind};
    use crate::potential::{PotentialModel, TrapModel};
    use std::f64::consts::PI;

    #[test]
    fn overlap_examples() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let phi = WaveFunction::plane_wave(g, &[1]).unwrap();
        let chi = WaveFunction::plane_wave(g, &[3]).unwrap();
        let pp = DensityMatrix::projector(&phi, 1).unwrap();
        let cc = DensityMatrix::projector(&chi, 1).unwrap();
        assert!((condensate_overlap(&pp, &phi).unwrap() - 1.0).abs() < 1e-12);
        assert!(condensate_overlap(&cc, &phi).unwrap().abs() < 1e-12);
        let mix = DensityMatrix::mixture(&[(0.5, &phi), (0.5, &chi)]).unwrap();
        assert!((condensate_overlap(&mix, &phi).unwrap() - 0.5).abs() < 1e-12);
        let other = WaveFunction::constant(GridSpec::new(1, 32, 2.0 * PI).unwrap()).unwrap();
        assert!(condensate_overlap(&pp, &other).is_err());
    }

    #[test]
    fn product_overlap_is_one() {
        let g = GridSpec::new(1, 16, 8.0).unwrap();
        let phi = WaveFunction::gaussian(g, 1.0, &[0.3], &[0.5]).unwrap();
        let psi = build_initial(&InitialKind::Product(phi.clone()), 3, g).unwrap();
        let gamma = marginal(&psi, 1).unwrap();
        assert!((condensate_overlap(&gamma, &phi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_energy_and_quotient() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let a = WaveFunction::plane_wave(g, &[2]).unwrap();
        let b = WaveFunction::plane_wave(g, &[-3]).unwrap();
        let psi = ManyBodyState::symmetrized_product(&[a.clone(), a.clone()]).unwrap();
        let e = energy_moment(&psi, &ManyBodyHamiltonian::free(), 1).unwrap();
        assert!((e - 8.0).abs() < 1e-10);
        let e2 = energy_moment(&psi, &ManyBodyHamiltonian::free(), 2).unwrap();
        assert!((e2 - 64.0).abs() < 1e-9);
        let q = correlation_quotient(&psi, |_| 1.0, 0, 1).unwrap();
        assert!((q - 16.0).abs() < 1e-9);
        // Unsymmetrized product of distinct modes: k_i² k_j² = 4 · 9.
        let mut values = Vec::new();
        for x in a.values() {
            for y in b.values() {
                values.push(x * y);
            }
        }
        let prod = ManyBodyState::from_values(2, g, values).unwrap();
        assert!((correlation_quotient(&prod, |_| 1.0, 0, 1).unwrap() - 36.0).abs() < 1e-9);
        assert!(correlation_quotient(&prod, |_| 1.0, 0, 0).is_err());
        assert!(correlation_quotient(&prod, |r| r, 0, 1).is_err());
    }

    #[test]
    fn eigenstate_has_no_energy_variance() {
        let g = GridSpec::new(1, 16, 8.0).unwrap();
        let ham = ManyBodyHamiltonian::new(
            PotentialModel::gaussian(2.0, 0.5, None).unwrap(),
            TrapModel::Harmonic { omega: 1.0 },
        );
        let (psi, e0) = ground_state_dense(&ham, 2, g).unwrap();
        let e1 = energy_moment(&psi, &ham, 1).unwrap();
        let e2 = energy_moment(&psi, &ham, 2).unwrap();
        assert!((e1 - e0).abs() < 1e-9 * e0.abs());
        assert!((e2 - e1 * e1).abs() < 1e-9 * e1 * e1);
        assert!(energy_moment(&psi, &ham, 3).is_err());
    }

    #[test]
    fn factorization_distance_examples() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let phi = WaveFunction::plane_wave(g, &[1]).unwrap();
        let chi = WaveFunction::plane_wave(g, &[2]).unwrap();
        let pp = build_initial(&InitialKind::Product(phi.clone()), 3, g).unwrap();
        let cc = build_initial(&InitialKind::Product(chi), 3, g).unwrap();
        // The square root turns 1e-15 roundoff in 1 - ‖ξ‖² into ~3e-8.
        assert!(factorization_distance(&pp, &phi, 1).unwrap() < 1e-6);
        assert!(factorization_distance(&pp, &phi, 2).unwrap() < 1e-6);
        assert!((factorization_distance(&cc, &phi, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(factorization_distance(&pp, &phi, 3).is_err());
    }

    #[test]
    fn hardy_holds_for_gaussians() {
        let g = GridSpec::new(3, 32, 12.0).unwrap();
        for (w, p) in [(1.0, 0.0), (1.0, 2.0), (0.7, 1.0)] {
            let psi = WaveFunction::gaussian(g, w, &[], &[p, 0.0, 0.0]).unwrap();
            let (lhs, rhs) = hardy_check(&psi).unwrap();
            assert!(lhs <= rhs, "{lhs} > {rhs}");
        }
        // Continuum Gaussian e^{-r²/(2s²)}: ⟨r⁻²⟩ = 2/s², ⟨-Δ⟩ = 3/(2s²). The
        // cell sum of r⁻² converges only at first order in Δx.
        let psi = WaveFunction::gaussian(g, 1.5, &[], &[]).unwrap();
        let (lhs, rhs) = hardy_check(&psi).unwrap();
        assert!((lhs - 2.0 / 2.25).abs() < 0.2 * 2.0 / 2.25, "{lhs}");
        assert!((rhs - 6.0 / 2.25).abs() < 1e-6, "{rhs}");
    }
}
