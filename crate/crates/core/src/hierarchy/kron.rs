use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gp::{check_same_grid, WaveFunction};
use crate::grid::{GridSpec, TensorFft};
use crate::manybody::{kernel_dim, Kernel};

use super::ops::single_k2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One term `c · ⊗_s |a_s⟩⟨b_s|` of a [`KronSum`].
#[derive(Debug, Clone, PartialEq)]
pub struct KronTerm {
    pub coef: Complex64,
    /// `(a_s, b_s)` per particle slot, in the orthonormal cell basis.
    pub slots: Vec<(Vec<Complex64>, Vec<Complex64>)>,
}

/// A `k`-particle kernel held as a sum of tensor products of rank-one slot
/// operators.
///
/// Factorized density matrices `|φ⟩⟨φ|^{⊗k}` are a single term, and the
/// free group and the collision operator map such sums to sums, so Dyson
/// terms never need the dense `M^{2kd}` kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KronSum {
    k: usize,
    grid: GridSpec,
    terms: Vec<KronTerm>,
}

struct SlotSpectral {
    fft: TensorFft,
    k2: Vec<f64>,
}

impl SlotSpectral {
    fn new(grid: &GridSpec) -> Self {
        Self { fft: TensorFft::new(grid.points_per_axis), k2: single_k2(grid) }
    }

    fn propagate(&self, v: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out = v.to_vec();
        self.fft.forward(&mut out);
        for (z, k2) in out.iter_mut().zip(&self.k2) {
            *z *= (-I * (t * k2)).exp();
        }
        self.fft.inverse(&mut out);
        out
    }
}

impl KronSum {
    pub fn zero(k: usize, grid: GridSpec) -> Self {
        Self { k, grid, terms: Vec::new() }
    }

    /// `|φ⟩⟨φ|^{⊗k}`.
    pub fn projector(phi: &WaveFunction, k: usize) -> Self {
        let s = phi.grid().cell_volume().sqrt();
        let a: Vec<Complex64> = phi.values().iter().map(|z| z * s).collect();
        let slots = vec![(a.clone(), a); k];
        Self { k, grid: *phi.grid(), terms: vec![KronTerm { coef: Complex64::new(1.0, 0.0), slots }] }
    }

    pub fn particles(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn terms(&self) -> &[KronTerm] {
        &self.terms
    }

    pub fn push(&mut self, term: KronTerm) -> Result<()> {
        if term.slots.len() != self.k || term.slots.iter().any(|(a, b)| a.len() != self.grid.len() || b.len() != self.grid.len()) {
            return Err(Error::GridMismatch("Kronecker term does not match the sum's shape".into()));
        }
        self.terms.push(term);
        Ok(())
    }

    fn check_compatible(&self, other: &KronSum) -> Result<()> {
        check_same_grid(&self.grid, &other.grid)?;
        if self.k != other.k {
            return Err(Error::GridMismatch(format!("{}- vs {}-particle sums", self.k, other.k)));
        }
        Ok(())
    }

    /// Append `c · other`.
    pub fn add_scaled(&mut self, other: &KronSum, c: Complex64) -> Result<()> {
        self.check_compatible(other)?;
        for t in &other.terms {
            self.terms.push(KronTerm { coef: t.coef * c, slots: t.slots.clone() });
        }
        Ok(())
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        for t in &mut self.terms {
            t.coef *= c;
        }
        self
    }

    /// `e^{itΔ} γ e^{-itΔ}`, applied slot by slot.
    pub fn free_propagate(&self, t: f64) -> KronSum {
        if t == 0.0 {
            return self.clone();
        }
        let sp = SlotSpectral::new(&self.grid);
        let terms = self
            .terms
            .iter()
            .map(|term| KronTerm {
                coef: term.coef,
                slots: term.slots.iter().map(|(a, b)| (sp.propagate(a, t), sp.propagate(b, t))).collect(),
            })
            .collect();
        KronSum { k: self.k, grid: self.grid, terms }
    }

    /// The `j`-th collision summand, mapping this `(k+1)`-particle sum to a
    /// `k`-particle one. Slot `j` becomes `-iσ [diag ρ, A_j]`, where `ρ` is
    /// the density of the traced-out slot.
    pub fn collision(&self, sigma: f64, j: usize) -> Result<KronSum> {
        if self.k < 2 {
            return Err(Error::domain("collision operator needs at least two particles"));
        }
        let k = self.k - 1;
        if j >= k {
            return Err(Error::domain(format!("collision slot {j} outside 0..{k}")));
        }
        let inv_dv = 1.0 / self.grid.cell_volume();
        let mut out = KronSum::zero(k, self.grid);
        if sigma == 0.0 {
            return Ok(out);
        }
        for term in &self.terms {
            let (a_last, b_last) = &term.slots[k];
            let rho: Vec<Complex64> = a_last.iter().zip(b_last).map(|(a, b)| a * b.conj() * inv_dv).collect();
            let (aj, bj) = &term.slots[j];
            let mut left = term.slots[..k].to_vec();
            left[j] = (aj.iter().zip(&rho).map(|(a, r)| a * r).collect(), bj.clone());
            let mut right = term.slots[..k].to_vec();
            right[j] = (aj.clone(), bj.iter().zip(&rho).map(|(b, r)| b * r.conj()).collect());
            out.terms.push(KronTerm { coef: -I * sigma * term.coef, slots: left });
            out.terms.push(KronTerm { coef: I * sigma * term.coef, slots: right });
        }
        Ok(out)
    }

    /// `B^{(k)} = Σ_j` of [`collision`](Self::collision).
    pub fn collision_sum(&self, sigma: f64) -> Result<KronSum> {
        let k = self.k.saturating_sub(1);
        let mut out = KronSum::zero(k, self.grid);
        for j in 0..k {
            out.terms.extend(self.collision(sigma, j)?.terms);
        }
        if k == 0 {
            return Err(Error::domain("collision operator needs at least two particles"));
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.slots.iter().map(|(a, b)| dot(b, a)).product::<Complex64>())
            .sum()
    }

    /// Frobenius norm from the Gram matrix of the terms.
    ///
    /// Cancellation between terms limits the absolute accuracy to about
    /// `1e-8` times the largest term; use [`to_dense`](Self::to_dense) when
    /// small differences matter and the kernel fits.
    pub fn norm(&self) -> f64 {
        let mut acc = 0.0;
        for (i, t) in self.terms.iter().enumerate() {
            for u in &self.terms[..=i] {
                let mut g = t.coef * u.coef.conj();
                for ((at, bt), (au, bu)) in t.slots.iter().zip(&u.slots) {
                    g *= dot(au, at) * dot(bt, bu);
                }
                acc += if std::ptr::eq(t, u) { g.re } else { 2.0 * g.re };
            }
        }
        acc.max(0.0).sqrt()
    }

    /// `Tr (1 - Δ_1) ⋯ (1 - Δ_k) γ`.
    pub fn sobolev_trace_norm(&self) -> f64 {
        let sp = SlotSpectral::new(&self.grid);
        let m = self.grid.len() as f64;
        let weighted = |a: &[Complex64], b: &[Complex64]| {
            let (mut ah, mut bh) = (a.to_vec(), b.to_vec());
            sp.fft.forward(&mut ah);
            sp.fft.forward(&mut bh);
            ah.iter().zip(&bh).zip(&sp.k2).map(|((x, y), k2)| x * y.conj() * (1.0 + k2)).sum::<Complex64>() / m
        };
        self.terms
            .iter()
            .map(|t| t.coef * t.slots.iter().map(|(a, b)| weighted(a, b)).product::<Complex64>())
            .sum::<Complex64>()
            .re
    }

    /// Dense kernel; subject to the amplitude budget.
    pub fn to_dense(&self) -> Result<Kernel> {
        let dim = kernel_dim(self.k, &self.grid)?;
        let mut out = Kernel::zeros(self.k, self.grid)?;
        let m = out.matrix_mut();
        for t in &self.terms {
            let a = kron(t.slots.iter().map(|(a, _)| a.as_slice()), dim);
            let b = kron(t.slots.iter().map(|(_, b)| b.as_slice()), dim);
            for (row, x) in m.chunks_exact_mut(dim).zip(&a) {
                let cx = t.coef * x;
                for (z, y) in row.iter_mut().zip(&b) {
                    *z += cx * y.conj();
                }
            }
        }
        Ok(out)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn kron<'a>(vs: impl Iterator<Item = &'a [Complex64]>, dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for v in vs {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for x in &out {
            next.extend(v.iter().map(|y| x * y));
        }
        out = next;
    }
    debug_assert_eq!(out.len(), dim);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{collision_apply, free_propagate, sobolev_trace_norm};
    use std::f64::consts::PI;

    fn phi() -> WaveFunction {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        WaveFunction::gaussian(g, 0.8, &[0.4], &[1.0]).unwrap()
    }

    #[test]
    fn dense_form_matches_projector() {
        let p = phi();
        let ks = KronSum::projector(&p, 2);
        let dense = ks.to_dense().unwrap();
        assert!(dense.distance(&Kernel::projector(&p, 2).unwrap()).unwrap() < 1e-15);
        assert!((ks.trace() - 1.0).norm() < 1e-13);
        assert!((ks.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn operations_agree_with_dense_paths() {
        let p = phi();
        let ks = KronSum::projector(&p, 3);
        let dense = ks.to_dense().unwrap();
        let t = 0.21;
        let prop = ks.free_propagate(t).to_dense().unwrap();
        assert!(prop.distance(&free_propagate(&dense, t)).unwrap() < 1e-13);
        for j in 0..2 {
            let fast = ks.collision(0.9, j).unwrap();
            let slow = collision_apply(&dense, 0.9, j).unwrap();
            assert!(fast.to_dense().unwrap().distance(&slow).unwrap() < 1e-14);
            assert!((fast.norm() - slow.frobenius_norm()).abs() < 1e-8);
            assert!(fast.trace().norm() < 1e-14);
        }
        // Collision applied twice: B^{(1)} B^{(2)} on the three-particle sum.
        let two = ks.collision_sum(0.9).unwrap().collision_sum(0.9).unwrap();
        let mut dense_two = crate::hierarchy::collision_sum(&dense, 0.9).unwrap();
        dense_two = crate::hierarchy::collision_sum(&dense_two, 0.9).unwrap();
        assert!(two.to_dense().unwrap().distance(&dense_two).unwrap() < 1e-14);
        let s = ks.free_propagate(t);
        assert!((s.sobolev_trace_norm() - sobolev_trace_norm(&prop)).abs() < 1e-10);
    }

    #[test]
    fn collision_needs_a_partner_slot() {
        let ks = KronSum::projector(&phi(), 1);
        assert!(ks.collision(1.0, 0).is_err());
        assert!(ks.collision_sum(1.0).is_err());
        assert_eq!(KronSum::projector(&phi(), 2).collision(0.0, 0).unwrap().terms().len(), 0);
    }
}
