use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gp::{check_same_grid, GpPropagator, WaveFunction};
use crate::grid::for_each_index;
use crate::manybody::{
    kernel_dim, marginal, pair_table, KineticTable, Kernel, ManyBodyHamiltonian, ManyBodyPropagator, ManyBodyState,
    SeparationIndex,
};

use super::ops::kinetic_commutator;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Normalized residual of the BBGKY equation for `γ^{(k)}`:
///
/// `∂_t γ^{(k)} = -i Σ_j [-Δ_j + V_ext(r_j), γ^{(k)}] - i c Σ_{i<j≤k} [V_N(r_i - r_j), γ^{(k)}]
///   - i (N - k) c Σ_j Tr_{k+1} [V_N(r_j - r_{k+1}), γ^{(k+1)}]`
///
/// with the time derivative replaced by the central difference of
/// `frames = [γ(t - dt), γ(t), γ(t + dt)]`; `gamma_next` is `γ^{(k+1)}(t)`.
/// The Frobenius norm of the mismatch is divided by the sum of the norms of
/// the four right-hand-side pieces, which stays meaningful for stationary
/// states where the pieces cancel.
pub fn bbgky_residual(
    frames: [&Kernel; 3],
    gamma_next: &Kernel,
    ham: &ManyBodyHamiltonian,
    n: usize,
    dt: f64,
) -> Result<f64> {
    let [before, now, after] = frames;
    let k = now.particles();
    for f in [before, after, gamma_next] {
        check_same_grid(f.grid(), now.grid())?;
    }
    if before.particles() != k || after.particles() != k {
        return Err(Error::domain("trajectory frames have different particle numbers"));
    }
    if gamma_next.particles() != k + 1 || k + 1 > n {
        return Err(Error::domain(format!("need γ^({}) with k + 1 <= N = {n}", k + 1)));
    }
    if !(dt > 0.0) {
        return Err(Error::domain("dt must be positive"));
    }
    let grid = *now.grid();
    let p = grid.len();
    let dim = now.dim();
    let c = ham.pair_coupling;

    let kinetic = kinetic_commutator(now);

    let coords = grid.coords();
    let mut trap_single = Vec::with_capacity(p);
    for_each_index(grid.dim, grid.points_per_axis, |_, idx| {
        trap_single.push(ham.trap.value(idx.iter().map(|&i| coords[i] * coords[i]).sum()));
    });
    let pair = pair_table(&grid, |r| ham.pair.value(r));
    let sep = SeparationIndex::new(&grid);
    let mut trap = Vec::with_capacity(dim);
    let mut intra = Vec::with_capacity(dim);
    for_each_index(k, p, |_, parts| {
        trap.push(parts.iter().map(|&q| trap_single[q]).sum::<f64>());
        let mut v = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                v += c * pair[sep.of(parts[i], parts[j])];
            }
        }
        intra.push(v);
    });

    // Collision term with the finite-range pair potential.
    let mut coll = vec![Complex64::new(0.0, 0.0); dim * dim];
    if k < n && !ham.pair.is_zero() {
        let pref = -I * ((n - k) as f64 * c);
        let src = gamma_next.dim();
        let gm = gamma_next.matrix();
        let strides: Vec<usize> = (0..k).map(|j| p.pow((k - 1 - j) as u32)).collect();
        for x in 0..dim {
            for xp in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in &strides {
                    let (xj, xpj) = ((x / s) % p, (xp / s) % p);
                    for y in 0..p {
                        let w = pair[sep.of(xj, y)] - pair[sep.of(xpj, y)];
                        if w != 0.0 {
                            acc += w * gm[(x * p + y) * src + xp * p + y];
                        }
                    }
                }
                coll[x * dim + xp] = pref * acc;
            }
        }
    }

    let inv = 0.5 / dt;
    let (mut num, mut n_kin, mut n_trap, mut n_intra, mut n_coll) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for x in 0..dim {
        for xp in 0..dim {
            let i = x * dim + xp;
            let g = now.matrix()[i];
            let lhs = (after.matrix()[i] - before.matrix()[i]) * inv;
            let kin = kinetic.matrix()[i];
            let tr = -I * (trap[x] - trap[xp]) * g;
            let it = -I * (intra[x] - intra[xp]) * g;
            let co = coll[i];
            num += (lhs - kin - tr - it - co).norm_sqr();
            n_kin += kin.norm_sqr();
            n_trap += tr.norm_sqr();
            n_intra += it.norm_sqr();
            n_coll += co.norm_sqr();
        }
    }
    let denom = n_kin.sqrt() + n_trap.sqrt() + n_intra.sqrt() + n_coll.sqrt();
    if denom == 0.0 {
        return Ok(num.sqrt());
    }
    Ok(num.sqrt() / denom)
}

/// [`bbgky_residual`] from three many-body frames.
pub fn bbgky_residual_from_states(
    states: [&ManyBodyState; 3],
    ham: &ManyBodyHamiltonian,
    k: usize,
    dt: f64,
) -> Result<f64> {
    let n = states[1].particles();
    if k == 0 || k >= n {
        return Err(Error::domain(format!("BBGKY level k = {k} needs 1 <= k < N = {n}")));
    }
    let g0 = marginal(states[0], k)?;
    let g1 = marginal(states[1], k)?;
    let g2 = marginal(states[2], k)?;
    let next = marginal(states[1], k + 1)?;
    bbgky_residual([&g0, &g1, &g2], &next, ham, n, dt)
}

/// Many-body states at `t - dt`, `t`, `t + dt` along one split-step
/// trajectory with step `dt`; `t` must be a positive multiple of `dt`.
pub fn manybody_frames(
    psi0: &ManyBodyState,
    ham: &ManyBodyHamiltonian,
    t: f64,
    dt: f64,
) -> Result<[ManyBodyState; 3]> {
    let steps = frame_steps(t, dt)?;
    let prop = ManyBodyPropagator::new(ham, psi0.particles(), *psi0.grid(), dt)?;
    let mut a = psi0.clone();
    prop.advance(&mut a, steps - 1)?;
    let mut b = a.clone();
    prop.advance(&mut b, 1)?;
    let mut c = b.clone();
    prop.advance(&mut c, 1)?;
    Ok([a, b, c])
}

/// GP states at `t - dt`, `t`, `t + dt` with split-step size `dt`.
pub fn gp_frames(phi0: &WaveFunction, sigma: f64, t: f64, dt: f64) -> Result<[WaveFunction; 3]> {
    let steps = frame_steps(t, dt)?;
    let prop = GpPropagator::new(*phi0.grid(), sigma, dt)?;
    let mut a = phi0.clone();
    prop.advance(&mut a, steps - 1)?;
    let mut b = a.clone();
    prop.advance(&mut b, 1)?;
    let mut c = b.clone();
    prop.advance(&mut c, 1)?;
    Ok([a, b, c])
}

fn frame_steps(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && t >= dt) {
        return Err(Error::domain(format!("frames need 0 < dt <= t, got t = {t}, dt = {dt}")));
    }
    let steps = (t / dt).round();
    if (steps * dt - t).abs() > 1e-9 * t {
        return Err(Error::domain(format!("t = {t} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

/// Normalized residual of the infinite hierarchy
/// `∂_t γ^{(k)} = -i Σ_j [-Δ_j, γ^{(k)}] + B^{(k)} γ^{(k+1)}` for the
/// factorized family `γ^{(k)} = |φ_t⟩⟨φ_t|^{⊗k}` built from
/// `traj = [φ(t - dt), φ(t), φ(t + dt)]`.
///
/// Normalized like [`bbgky_residual`], by the sum of the kinetic and
/// collision norms. Works in any dimension as long as the dense `k`-particle
/// kernel fits the amplitude budget; it is never stored.
pub fn infinite_hierarchy_residual(traj: [&WaveFunction; 3], k: usize, sigma: f64, dt: f64) -> Result<f64> {
    let grid = *traj[1].grid();
    check_same_grid(traj[0].grid(), &grid)?;
    check_same_grid(traj[2].grid(), &grid)?;
    if k == 0 {
        return Err(Error::domain("hierarchy level must be >= 1"));
    }
    if !(dt > 0.0) {
        return Err(Error::domain("dt must be positive"));
    }
    let dim = kernel_dim(k, &grid)?;
    let s = grid.cell_volume().sqrt();
    let tensor = |phi: &WaveFunction| {
        let a: Vec<Complex64> = phi.values().iter().map(|z| z * s).collect();
        let mut out = Vec::with_capacity(dim);
        for_each_index(k, grid.len(), |_, parts| out.push(parts.iter().map(|&q| a[q]).product::<Complex64>()));
        out
    };
    let before = tensor(traj[0]);
    let now = tensor(traj[1]);
    let after = tensor(traj[2]);
    let table = KineticTable::new(k, &grid)?;
    let mut lap = now.clone();
    table.fft.forward(&mut lap);
    for (z, k2) in lap.iter_mut().zip(&table.k2) {
        *z *= k2;
    }
    table.fft.inverse(&mut lap);
    let density: Vec<f64> = traj[1].values().iter().map(|z| z.norm_sqr()).collect();
    let mut rho = Vec::with_capacity(dim);
    for_each_index(k, grid.len(), |_, parts| rho.push(parts.iter().map(|&q| density[q]).sum::<f64>()));

    let inv = 0.5 / dt;
    let (mut num, mut n_kin, mut n_coll) = (0.0, 0.0, 0.0);
    for x in 0..dim {
        for y in 0..dim {
            let lhs = (after[x] * after[y].conj() - before[x] * before[y].conj()) * inv;
            let kin = -I * (lap[x] * now[y].conj() - now[x] * lap[y].conj());
            let coll = -I * sigma * (rho[x] - rho[y]) * now[x] * now[y].conj();
            num += (lhs - kin - coll).norm_sqr();
            n_kin += kin.norm_sqr();
            n_coll += coll.norm_sqr();
        }
    }
    let denom = n_kin.sqrt() + n_coll.sqrt();
    if denom == 0.0 {
        return Ok(num.sqrt());
    }
    Ok(num.sqrt() / denom)
}
