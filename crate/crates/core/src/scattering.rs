//! Zero-energy s-wave scattering: `(-Δ + ½V) f = 0` with `f(∞) = 1`.
//!
//! With `u(r) = r f(r)` the equation reduces to `u'' = ½ V(r) u`, `u(0) = 0`.
//! The solver integrates from the origin with `u'(0) = 1` and rescales
//! afterwards. Beyond the support `u` is exactly linear, `u ∝ r - a0`, which
//! is where the scattering length is read off.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::{alpha_strength, PotentialModel};
use crate::quad;

pub const DEFAULT_MESH_POINTS: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_MESH_POINTS: usize = 1 << 20;
const MIN_SUPPORT_POINTS: usize = 100;

/// Converged zero-energy solution for one potential.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    potential: PotentialModel,
    radii: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    f_values: Vec<f64>,
    // u'(r) beyond the support; dividing by it makes f → 1.
    slope: f64,
    a0: f64,
    support_points: usize,
    /// Change in `a0` when the mesh was doubled.
    pub a0_mesh_change: f64,
}

/// Options for [`solve_zero_energy_with`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub mesh_points: usize,
    /// Ratio of the last to the first step inside the support.
    pub grading: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { mesh_points: DEFAULT_MESH_POINTS, grading: 10.0 }
    }
}

/// Solve with the default mesh of 4096 points.
pub fn solve_zero_energy(v: &PotentialModel, r_max: f64, tol: f64) -> Result<ScatteringSolution> {
    solve_zero_energy_with(v, r_max, tol, SolveOptions::default())
}

/// Default outer radius: four times the support.
pub fn default_r_max(v: &PotentialModel) -> f64 {
    4.0 * v.cutoff_radius()
}

pub fn solve_zero_energy_with(
    v: &PotentialModel,
    r_max: f64,
    tol: f64,
    opts: SolveOptions,
) -> Result<ScatteringSolution> {
    let rc = v.cutoff_radius();
    if !(r_max > rc) {
        return Err(Error::config(format!(
            "r_max = {r_max} must exceed the potential cutoff {rc}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::config(format!("tolerance must be positive, got {tol}")));
    }
    if opts.mesh_points < 8 {
        return Err(Error::config("scattering mesh needs at least 8 points"));
    }
    let mut n = opts.mesh_points;
    let mut coarse = integrate_on_mesh(v, r_max, n, opts.grading)?;
    loop {
        let fine = integrate_on_mesh(v, r_max, 2 * n, opts.grading)?;
        let change = (fine.a0 - coarse.a0).abs();
        if change <= tol * rc.max(fine.a0.abs()) {
            // Keep the requested mesh; report the refinement change.
            let mut sol = coarse;
            sol.a0_mesh_change = change;
            return Ok(sol);
        }
        n *= 2;
        if 2 * n > MAX_MESH_POINTS {
            return Err(Error::Solver {
                message: format!("scattering length not mesh-stable at {} points", 2 * n),
                residual: change,
            });
        }
        coarse = fine;
    }
}

fn build_mesh(rc: f64, r_max: f64, n: usize, grading: f64) -> (Vec<f64>, usize) {
    let n_in = (3 * n / 4).max(2);
    let n_out = (n - n_in).max(1);
    let q = grading.powf(1.0 / (n_in as f64 - 1.0));
    let h0 = rc * (q - 1.0) / (q.powi(n_in as i32) - 1.0);
    let mut radii = Vec::with_capacity(n + 1);
    radii.push(0.0);
    let mut h = h0;
    for _ in 0..n_in - 1 {
        let r = radii.last().unwrap() + h;
        radii.push(r);
        h *= q;
    }
    radii.push(rc);
    let ho = (r_max - rc) / n_out as f64;
    for i in 1..=n_out {
        radii.push(if i == n_out { r_max } else { rc + i as f64 * ho });
    }
    (radii, n_in)
}

fn integrate_on_mesh(v: &PotentialModel, r_max: f64, n: usize, grading: f64) -> Result<ScatteringSolution> {
    let rc = v.cutoff_radius();
    let (radii, support_points) = build_mesh(rc, r_max, n, grading);
    let mut u = Vec::with_capacity(radii.len());
    let mut du = Vec::with_capacity(radii.len());
    let (mut y0, mut y1) = (0.0f64, 1.0f64);
    u.push(y0);
    du.push(y1);
    // Stage evaluations stay on the closed side of each step; the barrier
    // jump sits on the mesh point r = rc.
    let acc = |r: f64, y: f64| 0.5 * v.value(r) * y;
    for w in radii.windows(2) {
        let (r, h) = (w[0], w[1] - w[0]);
        let interior = w[1] <= rc;
        let pot = |x: f64, y: f64| if interior || x < rc { acc(x, y) } else { 0.0 };
        let k1 = (y1, pot(r, y0));
        let k2 = (y1 + 0.5 * h * k1.1, pot(r + 0.5 * h, y0 + 0.5 * h * k1.0));
        let k3 = (y1 + 0.5 * h * k2.1, pot(r + 0.5 * h, y0 + 0.5 * h * k2.0));
        let k4 = (y1 + h * k3.1, pot(r + h, y0 + h * k3.0));
        y0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !y0.is_finite() || !y1.is_finite() {
            return Err(Error::Solver {
                message: format!("non-finite radial solution at r = {}", w[1]),
                residual: f64::INFINITY,
            });
        }
        u.push(y0);
        du.push(y1);
    }
    let ic = support_points;
    let slope = du[ic];
    let a0 = rc - u[ic] / slope;
    let f_values = radii
        .iter()
        .zip(&u)
        .enumerate()
        .map(|(i, (&r, &ui))| if i == 0 { du[0] / slope } else { ui / (slope * r) })
        .collect();
    Ok(ScatteringSolution {
        potential: v.clone(),
        radii,
        u,
        du,
        f_values,
        slope,
        a0,
        support_points,
        a0_mesh_change: 0.0,
    })
}

impl ScatteringSolution {
    pub fn potential(&self) -> &PotentialModel {
        &self.potential
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    /// `f(r)`; exact exterior form `1 - a0/r` beyond the support.
    pub fn f(&self, r: f64) -> f64 {
        if self.potential.is_zero() {
            return 1.0;
        }
        let r = r.abs();
        let rc = self.potential.cutoff_radius();
        if r >= rc {
            return 1.0 - self.a0 / r;
        }
        if r == 0.0 {
            return self.f_values[0];
        }
        let (u, _) = self.hermite(r);
        u / (self.slope * r)
    }

    // Cubic Hermite interpolation of (u, u') inside the support.
    fn hermite(&self, r: f64) -> (f64, f64) {
        let i = match self.radii[..=self.support_points]
            .binary_search_by(|x| x.partial_cmp(&r).unwrap())
        {
            Ok(i) => return (self.u[i], self.du[i]),
            Err(i) => i - 1,
        };
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        let (u0, u1, d0, d1) = (self.u[i], self.u[i + 1], self.du[i] * h, self.du[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let u = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * d1;
        let du = ((6.0 * t2 - 6.0 * t) * u0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * u1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (u, du)
    }

    /// Largest `|u'' - ½Vu|` at interior support points, relative to
    /// `max |½Vu|`, with `u''` from three-point differences of `u'`.
    ///
    /// Stencils touching the support edge are skipped since profiles may
    /// jump there.
    pub fn residual(&self) -> f64 {
        let scale = (0..=self.support_points)
            .map(|i| (0.5 * self.potential.value(self.radii[i]) * self.u[i]).abs())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 1..self.support_points - 1 {
            let (rl, r, rr) = (self.radii[i - 1], self.radii[i], self.radii[i + 1]);
            let d2 = nonuniform_first_derivative(rl, r, rr, self.du[i - 1], self.du[i], self.du[i + 1]);
            let res = (d2 - 0.5 * self.potential.value(r) * self.u[i]).abs();
            worst = worst.max(res);
        }
        worst / scale
    }

    /// Minimum and maximum of `f` on the mesh, and whether it is
    /// nondecreasing.
    pub fn monotone(&self) -> bool {
        self.f_values.windows(2).all(|w| w[1] >= w[0] - 1e-15)
    }
}

fn nonuniform_first_derivative(xl: f64, x: f64, xr: f64, yl: f64, y: f64, yr: f64) -> f64 {
    let hl = x - xl;
    let hr = xr - x;
    (-hr / (hl * (hl + hr))) * yl + ((hr - hl) / (hl * hr)) * y + (hl / (hr * (hl + hr))) * yr
}

fn nonuniform_second_derivative(xl: f64, x: f64, xr: f64, yl: f64, y: f64, yr: f64) -> f64 {
    let hl = x - xl;
    let hr = xr - x;
    2.0 * (yl / (hl * (hl + hr)) - y / (hl * hr) + yr / (hr * (hl + hr)))
}

/// The Jastrow factor `f_N(r) = f(N r)`.
#[derive(Debug, Clone)]
pub struct Jastrow {
    solution: Arc<ScatteringSolution>,
    n: u64,
}

impl Jastrow {
    /// Constant factor `f ≡ 1` (zero interaction).
    pub fn unity() -> Self {
        let sol = solve_zero_energy(&PotentialModel::zero(), 4.0, DEFAULT_TOL)
            .expect("zero potential always solves");
        Self { solution: Arc::new(sol), n: 1 }
    }

    pub fn scale(&self) -> u64 {
        self.n
    }

    pub fn solution(&self) -> &ScatteringSolution {
        &self.solution
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        self.solution.f(self.n as f64 * r)
    }
}

/// Build `f_N` from a solution.
pub fn jastrow(sol: &ScatteringSolution, n: u64) -> Result<Jastrow> {
    if n == 0 {
        return Err(Error::domain("Jastrow scaling N must be >= 1"));
    }
    Ok(Jastrow { solution: Arc::new(sol.clone()), n })
}

/// Both sides of the coupling identity.
#[derive(Debug, Clone, Copy)]
pub struct CouplingReport {
    /// `∫ V f d³r`.
    pub sigma: f64,
    /// `∫ N V_N f_N d³r` at the configured `n`.
    pub sigma_scaled: f64,
    pub n: u64,
    pub a0: f64,
}

impl CouplingReport {
    pub fn ratio_to_8pi_a0(&self) -> f64 {
        if self.a0 == 0.0 {
            if self.sigma == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.sigma / (8.0 * PI * self.a0)
        }
    }
}

/// `σ = ∫ V f d³r`.
pub fn coupling_sigma(sol: &ScatteringSolution) -> f64 {
    coupling_sigma_at(sol, 1).sigma
}

/// `∫ V f d³r` together with `∫ N V_N f_N d³r` for the given `n`.
///
/// Both are Gauss-Legendre panel sums over the solver mesh, the second one
/// on the mesh shrunk by `n` and evaluating the scaled potential.
pub fn coupling_sigma_at(sol: &ScatteringSolution, n: u64) -> CouplingReport {
    let v = &sol.potential;
    let support = &sol.radii[..=sol.support_points];
    let mut sigma = 0.0;
    for w in support.windows(2) {
        sigma += quad::gauss_legendre5(|r| v.value(r) * sol.f(r) * r * r, w[0], w[1]);
    }
    sigma *= 4.0 * PI;

    let vn = crate::potential::scale_potential(v, n).expect("n >= 1");
    let f_n = Jastrow { solution: Arc::new(sol.clone()), n };
    let nf = n as f64;
    let mut scaled = 0.0;
    for w in support.windows(2) {
        scaled += quad::gauss_legendre5(
            |r| nf * vn.value(r) * f_n.eval(r) * r * r,
            w[0] / nf,
            w[1] / nf,
        );
    }
    scaled *= 4.0 * PI;
    CouplingReport { sigma, sigma_scaled: scaled, n, a0: sol.a0 }
}

/// Empirical constant in `|∇² log f(r)| <= C α r⁻²`: the mesh supremum of
/// `|r² ∇² log f| / α`, with the radial Laplacian from finite differences.
pub fn nabla2_log_f_bound(sol: &ScatteringSolution) -> Result<f64> {
    if sol.support_points < MIN_SUPPORT_POINTS {
        return Err(Error::config(format!(
            "mesh has {} points inside the support, need at least {MIN_SUPPORT_POINTS}",
            sol.support_points
        )));
    }
    let alpha = alpha_strength(&sol.potential);
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let logf: Vec<f64> = sol.f_values.iter().map(|f| f.ln()).collect();
    let r = &sol.radii;
    let mut sup = 0.0f64;
    for i in 1..r.len() - 1 {
        let d1 = nonuniform_first_derivative(r[i - 1], r[i], r[i + 1], logf[i - 1], logf[i], logf[i + 1]);
        let d2 = nonuniform_second_derivative(r[i - 1], r[i], r[i + 1], logf[i - 1], logf[i], logf[i + 1]);
        let lap = d2 + 2.0 * d1 / r[i];
        sup = sup.max((r[i] * r[i] * lap).abs());
    }
    Ok(sup / alpha)
}

/// Closed-form barrier scattering length `R - tanh(κR)/κ`, `κ = √(V0/2)`.
pub fn barrier_scattering_length(height: f64, radius: f64) -> f64 {
    if height == 0.0 {
        return 0.0;
    }
    let kappa = (0.5 * height).sqrt();
    radius - (kappa * radius).tanh() / kappa
}
