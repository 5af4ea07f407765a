use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use super::config::{HierarchySpec, PowerCountingSpec, ScenarioConfig};
use super::output::{fmt_f64, Artifact, Outcome};
use crate::error::{Error, Result};
use crate::gp::{gp_dynamic_energy, minimize_gp_with, GpPropagator, MinimizeOptions, WaveFunction};
use crate::grid::GridSpec;
use crate::hierarchy::{dyson_partial_sum, gp_frames, infinite_hierarchy_residual, power_counting_margin, HierarchyFamily};
use crate::manybody::{
    build_initial, condensate_overlap, energy_moment, marginal, InitialKind, Kernel, ManyBodyHamiltonian,
    ManyBodyPropagator, ManyBodyState,
};
use crate::potential::{alpha_strength, born_coupling, scale_potential, scale_potential_1d, PotentialModel, TrapModel};
use crate::scattering::{coupling_sigma_at, default_r_max, jastrow, solve_zero_energy, DEFAULT_TOL};
use crate::snapshot::Snapshot;

pub fn scatter(cfg: &ScenarioConfig, base: &Path) -> Result<Outcome> {
    let spec = cfg.potential.as_ref().ok_or_else(|| Error::config("scatter needs a `potential`"))?;
    let v = spec.build(base)?;
    let sol = solve_zero_energy(&v, default_r_max(&v), cfg.tolerance.unwrap_or(DEFAULT_TOL))?;
    let b0 = born_coupling(&v);
    let alpha = alpha_strength(&v);
    let id = spec.id();
    let ns = cfg.scaling_n.clone().unwrap_or_else(|| vec![1]);
    let mut out = Outcome::new(&["potential_id", "N", "a0", "b0", "alpha", "sigma", "sigma_over_8pi_a0"]);
    for n in ns {
        if n == 0 {
            return Err(Error::config("scaling_N entries must be >= 1"));
        }
        let rep = coupling_sigma_at(&sol, n);
        let ratio = if sol.a0() == 0.0 { rep.ratio_to_8pi_a0() } else { rep.sigma_scaled / (8.0 * PI * sol.a0()) };
        out.row(vec![
            id.clone(),
            n.to_string(),
            fmt_f64(sol.a0()),
            fmt_f64(b0),
            fmt_f64(alpha),
            fmt_f64(rep.sigma_scaled),
            fmt_f64(ratio),
        ]);
    }
    Ok(out)
}

fn require_no_trap(cfg: &ScenarioConfig, what: &str) -> Result<()> {
    if cfg.trap != TrapModel::None {
        return Err(Error::Unsupported(format!("{what} evolves without an external trap; remove `trap`")));
    }
    Ok(())
}

fn snapshot_artifacts(out: &mut Outcome, cfg: &ScenarioConfig, name: &str, phi: &WaveFunction) {
    out.artifact(format!("{name}.csv"), Artifact::WaveCsv(phi.clone()));
    if cfg.output.binary_snapshots {
        out.artifact(format!("{name}.bin"), Artifact::Binary(Snapshot::from_wave_function(phi)));
    }
}

pub fn gp_evolve(cfg: &ScenarioConfig, base: &Path) -> Result<Outcome> {
    require_no_trap(cfg, "gp_evolve")?;
    let grid = cfg.require_grid()?;
    let time = cfg.require_time()?;
    let (steps, stride) = (time.steps()?, time.stride()?);
    let sigma = cfg.sigma(base, grid.dim)?;
    let mut phi = cfg.orbital()?.build(grid, cfg.seed, &cfg.trap, sigma / (8.0 * PI))?;
    let prop = GpPropagator::new(grid, sigma, time.dt)?;
    let mut out = Outcome::new(&["t", "norm", "energy"]);
    let mut done = 0;
    loop {
        out.row(vec![fmt_f64(done as f64 * time.dt), fmt_f64(phi.norm()), fmt_f64(gp_dynamic_energy(&phi, sigma))]);
        if done == steps {
            break;
        }
        let n = stride.min(steps - done);
        prop.advance(&mut phi, n)?;
        done += n;
    }
    snapshot_artifacts(&mut out, cfg, "final", &phi);
    Ok(out)
}

pub fn gp_groundstate(cfg: &ScenarioConfig, base: &Path) -> Result<Outcome> {
    let grid = cfg.require_grid()?;
    let a0 = cfg.sigma(base, grid.dim)? / (8.0 * PI);
    let gs = minimize_gp_with(&cfg.trap, a0, grid, cfg.tolerance.unwrap_or(1e-10), MinimizeOptions::default())?;
    let mut out = Outcome::new(&["iteration", "energy"]);
    for (i, e) in gs.history.iter().enumerate() {
        out.row(vec![i.to_string(), fmt_f64(*e)]);
    }
    snapshot_artifacts(&mut out, cfg, "ground_state", &gs.phi);
    Ok(out)
}

/// Largest eigenvalue of a PSD kernel; dense below 1024 rows, power
/// iteration from `start` above.
fn top_eigenvalue(gamma: &Kernel, start: &WaveFunction) -> f64 {
    let dim = gamma.dim();
    if dim <= 1024 {
        return gamma.eigenvalues()[0];
    }
    let m = gamma.matrix();
    let mut v: Vec<Complex64> = start.values().to_vec();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        let w: Vec<Complex64> = m.chunks_exact(dim).map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let next: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        v = w;
        if (next - lambda).abs() <= 1e-14 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Hamiltonian and mean-field coupling for `n` particles on `grid`.
fn manybody_setup(cfg: &ScenarioConfig, base: &Path, n: usize, grid: &GridSpec) -> Result<(ManyBodyHamiltonian, f64)> {
    let v = cfg.potential_model(base)?.unwrap_or_else(PotentialModel::zero);
    let ham = match grid.dim {
        1 => ManyBodyHamiltonian::analog_1d(scale_potential_1d(&v, n as u64)?, n, cfg.trap.clone())?,
        3 => ManyBodyHamiltonian::new(scale_potential(&v, n as u64)?, cfg.trap.clone()),
        d => return Err(Error::Unsupported(format!("many-body runs need d = 1 or d = 3, got d = {d}"))),
    };
    let sigma = if cfg.coupling.is_some() {
        cfg.sigma(base, grid.dim)?
    } else if v.is_zero() {
        0.0
    } else if grid.dim == 1 {
        crate::potential::born_coupling_1d(&v)
    } else {
        8.0 * PI * solve_zero_energy(&v, default_r_max(&v), DEFAULT_TOL)?.a0()
    };
    Ok((ham, sigma))
}

pub fn manybody(cfg: &ScenarioConfig, base: &Path) -> Result<Outcome> {
    require_no_trap(cfg, "manybody")?;
    let grid = cfg.require_grid()?;
    let time = cfg.require_time()?;
    let (steps, stride) = (time.steps()?, time.stride()?);
    let n = cfg.particles.ok_or_else(|| Error::config("manybody needs `particles`"))?;
    if n == 0 {
        return Err(Error::config("particles must be >= 1"));
    }
    let (ham, sigma) = manybody_setup(cfg, base, n, &grid)?;
    let init = cfg.initial_state.as_ref().ok_or_else(|| Error::config("manybody needs an `initial_state`"))?;
    let phi0 = init.orbital.build(grid, cfg.seed, &cfg.trap, sigma / (8.0 * PI))?;
    let kind = if init.jastrow {
        let v = cfg.require_potential(base)?;
        let sol = solve_zero_energy(&v, default_r_max(&v), DEFAULT_TOL)?;
        InitialKind::JastrowProduct(phi0.clone(), jastrow(&sol, n as u64)?)
    } else {
        InitialKind::Product(phi0.clone())
    };
    let mut psi: ManyBodyState = build_initial(&kind, n, grid)?;
    let mut phi = phi0;
    let mb = ManyBodyPropagator::new(&ham, n, grid, time.dt)?;
    let gp = GpPropagator::new(grid, sigma, time.dt)?;

    let mut out = Outcome::new(&["t", "norm", "energy", "overlap", "depletion"]);
    out.mode = Some(if grid.dim == 1 { "analog1d" } else { "3d" });
    let mut done = 0;
    let gamma = loop {
        let gamma = marginal(&psi, 1)?;
        let overlap = condensate_overlap(&gamma, &phi)?;
        let depletion = 1.0 - top_eigenvalue(&gamma, &phi);
        out.row(vec![
            fmt_f64(done as f64 * time.dt),
            fmt_f64(psi.norm()),
            fmt_f64(energy_moment(&psi, &ham, 1)? / n as f64),
            fmt_f64(overlap),
            fmt_f64(depletion),
        ]);
        if done == steps {
            break gamma;
        }
        let k = stride.min(steps - done);
        mb.advance(&mut psi, k)?;
        gp.advance(&mut phi, k)?;
        done += k;
    };
    if cfg.output.binary_snapshots {
        out.artifact("gamma1.bin".into(), Artifact::Binary(Snapshot::from_kernel(&gamma)));
    }
    Ok(out)
}

pub fn hierarchy(cfg: &ScenarioConfig, base: &Path) -> Result<Outcome> {
    require_no_trap(cfg, "hierarchy")?;
    let grid = cfg.require_grid()?;
    let time = cfg.require_time()?;
    time.steps()?;
    let spec: HierarchySpec = cfg.hierarchy.unwrap_or_default();
    if spec.k_max == 0 {
        return Err(Error::config("hierarchy.k_max must be >= 1"));
    }
    let sigma = cfg.sigma(base, grid.dim)?;
    let phi = cfg.orbital()?.build(grid, cfg.seed, &cfg.trap, sigma / (8.0 * PI))?;
    let t = time.t_final;
    let mut out = Outcome::new(&["k", "m", "t", "residual"]);
    if t > 0.0 {
        let frames = gp_frames(&phi, sigma, t, time.dt)?;
        let refs = [&frames[0], &frames[1], &frames[2]];
        for k in 1..=spec.k_max {
            let r = infinite_hierarchy_residual(refs, k, sigma, time.dt)?;
            out.row(vec![k.to_string(), "0".into(), fmt_f64(t), fmt_f64(r)]);
        }
    }
    if spec.dyson_terms > 0 {
        // m = n marks the distance of the n-term partial sum to the GP oracle.
        let family = HierarchyFamily::factorized(&phi, spec.dyson_terms, sigma);
        let oracle = crate::gp::evolve_gp(&phi, sigma, t, spec.oracle_dt)?;
        let exact = Kernel::projector(&oracle, 1)?;
        for n in 1..=spec.dyson_terms {
            let partial = dyson_partial_sum(&family, 1, n, t, spec.quad_points)?.to_dense()?;
            out.row(vec!["1".into(), n.to_string(), fmt_f64(t), fmt_f64(partial.distance(&exact)?)]);
        }
    }
    Ok(out)
}

pub fn power_counting(cfg: &ScenarioConfig) -> Result<Outcome> {
    let spec: PowerCountingSpec = cfg.power_counting.unwrap_or_default();
    let mut out = Outcome::new(&["k", "m", "volume_exp", "decay_exp", "margin"]);
    for k in 1..=spec.k_max {
        for m in 0..=spec.m_max {
            let p = power_counting_margin(k, m)?;
            out.row(vec![
                k.to_string(),
                m.to_string(),
                p.volume_exp.to_string(),
                p.decay_exp.to_string(),
                p.margin.to_string(),
            ]);
        }
    }
    Ok(out)
}
