use num_complex::Complex64;

use super::kron::KronSum;
use crate::error::{Error, Result};
use crate::gp::WaveFunction;

/// Below this many midpoint nodes per simplex axis a warning is logged.
pub const MIN_QUAD_POINTS: usize = 8;

/// A family `k ↦ γ^{(k)}`, `k = 1..=k_max`, with its coupling `σ`.
#[derive(Debug, Clone)]
pub struct HierarchyFamily {
    entries: Vec<KronSum>,
    sigma: f64,
}

impl HierarchyFamily {
    /// `γ^{(k)} = |φ⟩⟨φ|^{⊗k}`.
    pub fn factorized(phi: &WaveFunction, k_max: usize, sigma: f64) -> Self {
        Self { entries: (1..=k_max).map(|k| KronSum::projector(phi, k)).collect(), sigma }
    }

    /// Entries must be ordered `k = 1, 2, …` on one grid.
    pub fn from_entries(entries: Vec<KronSum>, sigma: f64) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.particles() != i + 1 || e.grid() != entries[0].grid() {
                return Err(Error::domain(format!("family entry {i} is not a {}-particle kernel on the common grid", i + 1)));
            }
        }
        Ok(Self { entries, sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn k_max(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, k: usize) -> Result<&KronSum> {
        k.checked_sub(1)
            .and_then(|i| self.entries.get(i))
            .ok_or_else(|| Error::domain(format!("family has no entry k = {k} (k_max = {})", self.entries.len())))
    }
}

/// Midpoint product rule on the time simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub points_per_axis: usize,
    pub nodes: usize,
}

/// `ω^{(k)}_{m,t}`: the `m`-th Dyson term.
#[derive(Debug, Clone)]
pub struct DysonTerm {
    pub k: usize,
    pub m: usize,
    pub t: f64,
    pub value: KronSum,
    pub quadrature: QuadratureSpec,
}

/// `ω^{(k)}_{m,t} = ∫_{t > s_1 > … > s_m > 0} U_{t-s_1} B U_{s_1-s_2} B ⋯ B U_{s_m} γ^{(k+m)}`
/// for `m ≤ 2`.
///
/// The simplex is mapped to the unit cube by `s_1 = t u_1`,
/// `s_i = s_{i-1} u_i`, with Jacobian `t^m u_1^{m-1} u_2^{m-2} ⋯`, and the
/// cube is integrated with the midpoint rule.
pub fn dyson_term(family: &HierarchyFamily, k: usize, m: usize, t: f64, quad_points: usize) -> Result<DysonTerm> {
    if m > 2 {
        return Err(Error::Unsupported(format!("Dyson terms beyond m = 2 are not supported (m = {m})")));
    }
    if k == 0 {
        return Err(Error::domain("hierarchy level must be >= 1"));
    }
    if quad_points == 0 {
        return Err(Error::domain("quad_points must be >= 1"));
    }
    if m > 0 && quad_points < MIN_QUAD_POINTS {
        log::warn!("dyson_term: {quad_points} midpoint nodes per axis may be inaccurate (suggest >= {MIN_QUAD_POINTS})");
    }
    let source = family.entry(k + m)?;
    let sigma = family.sigma();
    let nodes = if m == 0 { 1 } else { quad_points.pow(m as u32) };
    let quadrature = QuadratureSpec { points_per_axis: quad_points, nodes };
    let value = match m {
        0 => source.free_propagate(t),
        _ if sigma == 0.0 => KronSum::zero(k, *source.grid()),
        _ => {
            let q = quad_points;
            let h = 1.0 / q as f64;
            let mid = |i: usize| (i as f64 + 0.5) * h;
            let mut acc = KronSum::zero(k, *source.grid());
            for i1 in 0..q {
                let s1 = t * mid(i1);
                if m == 1 {
                    let w = t * h;
                    let term = source.free_propagate(s1).collision_sum(sigma)?.free_propagate(t - s1);
                    acc.add_scaled(&term, Complex64::new(w, 0.0))?;
                    continue;
                }
                for i2 in 0..q {
                    let s2 = s1 * mid(i2);
                    let w = t * t * mid(i1) * h * h;
                    let inner = source.free_propagate(s2).collision_sum(sigma)?.free_propagate(s1 - s2);
                    let term = inner.collision_sum(sigma)?.free_propagate(t - s1);
                    acc.add_scaled(&term, Complex64::new(w, 0.0))?;
                }
            }
            acc
        }
    };
    Ok(DysonTerm { k, m, t, value, quadrature })
}

/// `Σ_{m<n} ω^{(k)}_{m,t}` for `1 ≤ n ≤ 3`.
pub fn dyson_partial_sum(family: &HierarchyFamily, k: usize, n: usize, t: f64, quad_points: usize) -> Result<KronSum> {
    if !(1..=3).contains(&n) {
        return Err(Error::Unsupported(format!("partial sums need 1 <= n <= 3, got {n}")));
    }
    let mut acc = dyson_term(family, k, 0, t, quad_points)?.value;
    for m in 1..n {
        acc.add_scaled(&dyson_term(family, k, m, t, quad_points)?.value, Complex64::new(1.0, 0.0))?;
    }
    Ok(acc)
}
