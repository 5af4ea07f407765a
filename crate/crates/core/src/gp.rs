//! Gross-Pitaevskii dynamics and ground states on periodic grids.
//!
//! Dynamics: `i ∂t φ = -Δφ + σ|φ|²φ`, integrated with Strang splitting
//! (half kinetic step, full nonlinear step, half kinetic step). The kinetic
//! step is exact in Fourier space and the nonlinear step is an exact
//! pointwise phase, so every step is unitary.
//!
//! Ground states minimize `E(φ) = ∫ |∇φ|² + V_ext|φ|² + 4πa0|φ|⁴` over unit
//! vectors by normalized imaginary-time flow.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{for_each_index, GridSpec, TensorFft};
use crate::potential::TrapModel;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A single-particle field with `Σ |φ|² Δx^d = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl WaveFunction {
    /// Wrap raw values without normalizing.
    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` at the grid points and normalize.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        grid.validate()?;
        let coords = grid.coords();
        let mut x = vec![0.0; grid.dim];
        let mut values = Vec::with_capacity(grid.len());
        for_each_index(grid.dim, grid.points_per_axis, |_, idx| {
            for (a, &i) in idx.iter().enumerate() {
                x[a] = coords[i];
            }
            values.push(f(&x));
        });
        let mut wf = Self { grid, values };
        wf.normalize()?;
        Ok(wf)
    }

    /// Normalized `Π exp(-(x-c)²/(2w²) + i p·x)`.
    pub fn gaussian(grid: GridSpec, width: f64, center: &[f64], momentum: &[f64]) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::domain("gaussian width must be positive"));
        }
        Self::from_fn(grid, |x| {
            let mut e = Complex64::new(0.0, 0.0);
            for a in 0..x.len() {
                let c = center.get(a).copied().unwrap_or(0.0);
                let p = momentum.get(a).copied().unwrap_or(0.0);
                e += Complex64::new(-(x[a] - c).powi(2) / (2.0 * width * width), p * x[a]);
            }
            e.exp()
        })
    }

    /// `L^{-d/2} exp(i k·x)` with `k = 2π n / L` for integer modes `n`.
    pub fn plane_wave(grid: GridSpec, modes: &[i64]) -> Result<Self> {
        let dk = 2.0 * PI / grid.box_length;
        Self::from_fn(grid, |x| {
            let phase: f64 = (0..x.len()).map(|a| modes.get(a).copied().unwrap_or(0) as f64 * dk * x[a]).sum();
            Complex64::from_polar(1.0, phase)
        })
    }

    /// Constant `L^{-d/2}`.
    pub fn constant(grid: GridSpec) -> Result<Self> {
        Self::from_fn(grid, |_| Complex64::new(1.0, 0.0))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(format!("cannot normalize a field of norm {n}")));
        }
        let s = 1.0 / n;
        for z in &mut self.values {
            *z *= s;
        }
        Ok(())
    }

    /// `⟨self, other⟩ = Σ conj(self) other Δx^d`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        check_same_grid(&self.grid, &other.grid)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// `‖self - other‖`.
    pub fn distance(&self, other: &WaveFunction) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// `∫ |φ|⁴`.
    pub fn quartic_integral(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * self.grid.cell_volume()
    }

    /// `∫ |∇φ|²` computed spectrally.
    pub fn kinetic_energy(&self) -> f64 {
        let spec = Spectral::new(self.grid);
        spec.kinetic_energy(&self.values)
    }

    pub(crate) fn has_non_finite(&self) -> bool {
        self.values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    }
}

pub(crate) fn check_same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// FFT plan plus the flat `|k|²` table for one grid.
#[derive(Debug, Clone)]
pub(crate) struct Spectral {
    pub grid: GridSpec,
    pub fft: TensorFft,
    pub k2: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let k = grid.wavenumbers();
        let mut k2 = Vec::with_capacity(grid.len());
        for_each_index(grid.dim, grid.points_per_axis, |_, idx| {
            k2.push(idx.iter().map(|&i| k[i] * k[i]).sum());
        });
        Self { grid, fft: TensorFft::new(grid.points_per_axis), k2 }
    }

    /// `Σ |k|² |φ̂|² Δx^d / M^d`, equal to `⟨φ, -Δφ⟩`.
    pub fn kinetic_energy(&self, values: &[Complex64]) -> f64 {
        let mut buf = values.to_vec();
        self.fft.forward(&mut buf);
        let s: f64 = buf.iter().zip(&self.k2).map(|(z, k2)| z.norm_sqr() * k2).sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }

    pub fn phases(&self, factor: Complex64) -> Vec<Complex64> {
        self.k2.iter().map(|&k2| (factor * k2).exp()).collect()
    }

    pub fn apply_multiplier(&self, values: &mut [Complex64], mult: &[Complex64]) {
        self.fft.forward(values);
        for (z, m) in values.iter_mut().zip(mult) {
            *z *= m;
        }
        self.fft.inverse(values);
    }
}

/// Energy contributions of a single-particle state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpEnergy {
    pub kinetic: f64,
    pub trap: f64,
    pub interaction: f64,
}

impl GpEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.trap + self.interaction
    }
}

fn trap_values(grid: &GridSpec, trap: &TrapModel) -> Vec<f64> {
    let coords = grid.coords();
    let mut out = Vec::with_capacity(grid.len());
    for_each_index(grid.dim, grid.points_per_axis, |_, idx| {
        out.push(trap.value(idx.iter().map(|&i| coords[i] * coords[i]).sum()));
    });
    out
}

/// The GP energy functional with coupling `4π a0`.
pub fn gp_energy(phi: &WaveFunction, a0: f64, trap: &TrapModel) -> f64 {
    gp_energy_parts(phi, a0, trap).total()
}

pub fn gp_energy_parts(phi: &WaveFunction, a0: f64, trap: &TrapModel) -> GpEnergy {
    let spec = Spectral::new(phi.grid);
    energy_with(&spec, &trap_values(&phi.grid, trap), phi, 4.0 * PI * a0)
}

/// Conserved energy of the dynamics `∫ |∇φ|² + (σ/2)|φ|⁴`.
pub fn gp_dynamic_energy(phi: &WaveFunction, sigma: f64) -> f64 {
    gp_energy(phi, sigma / (8.0 * PI), &TrapModel::None)
}

fn energy_with(spec: &Spectral, trap: &[f64], phi: &WaveFunction, quartic: f64) -> GpEnergy {
    let dv = phi.grid.cell_volume();
    let kinetic = spec.kinetic_energy(&phi.values);
    let trap_e = phi.values.iter().zip(trap).map(|(z, v)| z.norm_sqr() * v).sum::<f64>() * dv;
    let interaction = quartic * phi.quartic_integral();
    GpEnergy { kinetic, trap: trap_e, interaction }
}

/// Reusable Strang-splitting propagator for a fixed coupling and step.
#[derive(Debug, Clone)]
pub struct GpPropagator {
    spec: Spectral,
    sigma: f64,
    step: f64,
    half_kinetic: Vec<Complex64>,
    full_kinetic: Vec<Complex64>,
}

impl GpPropagator {
    /// `step` may be negative (backward evolution).
    pub fn new(grid: GridSpec, sigma: f64, step: f64) -> Result<Self> {
        grid.validate()?;
        if !(step != 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("time step must be nonzero and finite, got {step}")));
        }
        let spec = Spectral::new(grid);
        let half_kinetic = spec.phases(-I * (0.5 * step));
        let full_kinetic = spec.phases(-I * step);
        Ok(Self { spec, sigma, step, half_kinetic, full_kinetic })
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    fn nonlinear(&self, values: &mut [Complex64]) {
        if self.sigma == 0.0 {
            return;
        }
        let c = -self.sigma * self.step;
        for z in values.iter_mut() {
            *z *= Complex64::from_polar(1.0, c * z.norm_sqr());
        }
    }

    /// Advance by `n` Strang steps.
    pub fn advance(&self, phi: &mut WaveFunction, n: usize) -> Result<()> {
        check_same_grid(&self.spec.grid, &phi.grid)?;
        if n == 0 {
            return Ok(());
        }
        let max_density = phi.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        if (self.sigma * max_density * self.step).abs() > 0.5 * PI {
            log::warn!(
                "nonlinear phase per step {:.3} exceeds π/2; reduce dt",
                (self.sigma * max_density * self.step).abs()
            );
        }
        let v = &mut phi.values;
        self.spec.apply_multiplier(v, &self.half_kinetic);
        for s in 0..n {
            self.nonlinear(v);
            let last = s + 1 == n;
            self.spec.apply_multiplier(v, if last { &self.half_kinetic } else { &self.full_kinetic });
            if (s % 256 == 255 || last) && phi_non_finite(v) {
                return Err(Error::Solver {
                    message: format!("non-finite GP state after {} steps", s + 1),
                    residual: f64::NAN,
                });
            }
        }
        Ok(())
    }
}

fn phi_non_finite(v: &[Complex64]) -> bool {
    v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
}

/// Number of steps and signed step size covering `t` with steps no longer
/// than `dt`.
pub fn step_plan(t: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    if !t.is_finite() {
        return Err(Error::domain("final time must be finite"));
    }
    if t == 0.0 {
        return Ok((0, dt));
    }
    let n = ((t.abs() / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((n, t / n as f64))
}

/// Evolve `φ0` for time `t` (either sign) under `i∂tφ = -Δφ + σ|φ|²φ`.
pub fn evolve_gp(phi0: &WaveFunction, sigma: f64, t: f64, dt: f64) -> Result<WaveFunction> {
    let (n, h) = step_plan(t, dt)?;
    let mut phi = phi0.clone();
    if n == 0 {
        return Ok(phi);
    }
    GpPropagator::new(phi0.grid, sigma, h)?.advance(&mut phi, n)?;
    Ok(phi)
}

/// Options for [`minimize_gp_with`].
#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    /// Initial imaginary-time step.
    pub flow_step: f64,
    pub max_iterations: usize,
    /// Width of the initial Gaussian guess; defaults to 1.5 oscillator lengths.
    pub initial_width: Option<f64>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { flow_step: 0.01, max_iterations: 200_000, initial_width: None }
    }
}

/// Result of the ground-state flow.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub phi: WaveFunction,
    pub energy: f64,
    /// Energy after every accepted iteration, starting with the guess.
    pub history: Vec<f64>,
    pub final_step: f64,
}

/// Minimize the GP functional; returns `(φ_GP, E_GP)`.
pub fn minimize_gp(trap: &TrapModel, a0: f64, grid: GridSpec, tol: f64) -> Result<(WaveFunction, f64)> {
    let gs = minimize_gp_with(trap, a0, grid, tol, MinimizeOptions::default())?;
    Ok((gs.phi, gs.energy))
}

/// One normalized imaginary-time step of length `tau` for the GP functional.
pub struct GradientFlow {
    spec: Spectral,
    trap: Vec<f64>,
    coupling: f64,
}

impl GradientFlow {
    pub fn new(grid: GridSpec, trap: &TrapModel, a0: f64) -> Result<Self> {
        grid.validate()?;
        Ok(Self { spec: Spectral::new(grid), trap: trap_values(&grid, trap), coupling: 4.0 * PI * a0 })
    }

    pub fn energy(&self, phi: &WaveFunction) -> f64 {
        energy_with(&self.spec, &self.trap, phi, self.coupling).total()
    }

    pub fn step(&self, phi: &WaveFunction, tau: f64) -> Result<WaveFunction> {
        let half: Vec<Complex64> = self.spec.k2.iter().map(|&k2| Complex64::new((-0.5 * tau * k2).exp(), 0.0)).collect();
        let mut v = phi.values.clone();
        self.spec.apply_multiplier(&mut v, &half);
        // the variational derivative of 4πa0|φ|⁴ gives 8πa0|φ|²
        for (z, &vt) in v.iter_mut().zip(&self.trap) {
            *z *= (-tau * (vt + 2.0 * self.coupling * z.norm_sqr())).exp();
        }
        self.spec.apply_multiplier(&mut v, &half);
        let mut out = WaveFunction { grid: phi.grid, values: v };
        out.normalize()?;
        Ok(out)
    }
}

pub fn minimize_gp_with(
    trap: &TrapModel,
    a0: f64,
    grid: GridSpec,
    tol: f64,
    opts: MinimizeOptions,
) -> Result<GroundState> {
    if !trap.is_confining() {
        return Err(Error::config("ground-state search needs a confining trap"));
    }
    if !(a0 >= 0.0) {
        return Err(Error::domain(format!("a0 must be >= 0, got {a0}")));
    }
    if !(tol > 0.0) {
        return Err(Error::config("tolerance must be positive"));
    }
    let omega = match trap {
        TrapModel::Harmonic { omega } => *omega,
        TrapModel::None => unreachable!(),
    };
    let width = opts.initial_width.unwrap_or(1.5 / omega.sqrt());
    let flow = GradientFlow::new(grid, trap, a0)?;
    let mut phi = WaveFunction::gaussian(grid, width, &[], &[])?;
    let mut energy = flow.energy(&phi);
    let mut history = vec![energy];
    let mut tau = opts.flow_step;
    let mut last_rate = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let next = flow.step(&phi, tau)?;
        if next.has_non_finite() {
            return Err(Error::Solver { message: "non-finite state in gradient flow".into(), residual: f64::NAN });
        }
        let e = flow.energy(&next);
        let roundoff = 1e-14 * energy.abs().max(1.0);
        if e > energy {
            if e - energy <= roundoff {
                // Stalled at the fixed point of the discrete flow.
                return Ok(GroundState { phi, energy, history, final_step: tau });
            }
            tau *= 0.5;
            if tau < 1e-12 {
                return Err(Error::Convergence { iterations: history.len(), residual: last_rate });
            }
            continue;
        }
        let rate = (energy - e) / tau;
        phi = next;
        energy = e;
        history.push(e);
        last_rate = rate;
        if rate < tol {
            return Ok(GroundState { phi, energy, history, final_step: tau });
        }
    }
    Err(Error::Convergence { iterations: opts.max_iterations, residual: last_rate })
}
