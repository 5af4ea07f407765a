//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use gplab::gp::{gp_dynamic_energy, minimize_gp_with, GpPropagator, MinimizeOptions};
use gplab::hierarchy::{
    bbgky_residual_from_states, dyson_partial_sum, gp_frames, infinite_hierarchy_residual, manybody_frames,
    power_counting_margin, HierarchyFamily,
};
use gplab::manybody::{
    build_initial, condensate_overlap, correlation_quotient, hardy_check, marginal, InitialKind, Kernel,
    ManyBodyHamiltonian,
};
use gplab::potential::{born_coupling, scale_potential};
use gplab::scattering::{barrier_scattering_length, coupling_sigma, default_r_max};
use gplab::{evolve_gp, jastrow, solve_zero_energy, GridSpec, ManyBodyState, PotentialModel, TrapModel, WaveFunction};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn test_potentials() -> Vec<(&'static str, PotentialModel)> {
    vec![
        ("barrier(1,1)", PotentialModel::barrier(1.0, 1.0).unwrap()),
        ("barrier(5,0.5)", PotentialModel::barrier(5.0, 0.5).unwrap()),
        ("gaussian(1,1)", PotentialModel::gaussian(1.0, 1.0, None).unwrap()),
        ("gaussian(5,0.7,cut 4)", PotentialModel::gaussian(5.0, 0.7, Some(4.0)).unwrap()),
        (
            "table",
            PotentialModel::table(&[0.0, 0.5, 1.0, 1.5, 2.0], &[3.0, 2.5, 1.2, 0.3, 0.0]).unwrap(),
        ),
    ]
}

fn scattering_identity() -> Outcome {
    let mut worst = 0.0f64;
    for v in [PotentialModel::barrier(1.0, 1.0).unwrap(), PotentialModel::gaussian(1.0, 1.0, None).unwrap()] {
        let sol = solve_zero_energy(&v, default_r_max(&v), 1e-10).map_err(|e| e.to_string())?;
        worst = worst.max(rel(coupling_sigma(&sol), 8.0 * PI * sol.a0()));
    }
    let v = PotentialModel::barrier(1.0, 1.0).unwrap();
    let a0 = solve_zero_energy(&v, default_r_max(&v), 1e-10).map_err(|e| e.to_string())?.a0();
    let kappa = (0.5f64).sqrt();
    let closed = 1.0 - (kappa * 1.0).tanh() / kappa;
    // the helper and the inline closed form must agree with each other too
    let err = (a0 - closed).abs().max((barrier_scattering_length(1.0, 1.0) - closed).abs());
    ensure(worst < 1e-6 && err < 1e-8, format!("identity rel err {worst:.2e}, barrier a0 err {err:.2e}"))
}

fn scaling_law() -> Outcome {
    let mut worst_a = 0.0f64;
    let mut worst_alpha = 0.0f64;
    for (_, v) in test_potentials() {
        let a = solve_zero_energy(&v, default_r_max(&v), 1e-10).map_err(|e| e.to_string())?.a0();
        let alpha = gplab::alpha_strength(&v);
        for n in [1u64, 10, 100] {
            let vn = scale_potential(&v, n).map_err(|e| e.to_string())?;
            let an = solve_zero_energy(&vn, default_r_max(&vn), 1e-10).map_err(|e| e.to_string())?.a0();
            worst_a = worst_a.max(rel(an * n as f64, a));
            worst_alpha = worst_alpha.max(rel(gplab::alpha_strength(&vn), alpha));
        }
    }
    ensure(worst_a < 1e-8 && worst_alpha < 1e-8, format!("a0 rel err {worst_a:.2e}, alpha rel err {worst_alpha:.2e}"))
}

fn born_dominance() -> Outcome {
    let mut tightest = f64::INFINITY;
    for (name, v) in test_potentials() {
        let a0 = solve_zero_energy(&v, default_r_max(&v), 1e-10).map_err(|e| e.to_string())?.a0();
        let ratio = born_coupling(&v) / (8.0 * PI * a0);
        if !(ratio > 1.0) {
            return Err(format!("{name}: b0 / 8πa0 = {ratio}"));
        }
        tightest = tightest.min(ratio);
    }
    Ok(format!("min b0 / 8πa0 = {tightest:.4}"))
}

fn gp_conservation() -> Outcome {
    let g = GridSpec::new(1, 1024, 20.0).unwrap();
    let phi0 = WaveFunction::gaussian(g, 1.0, &[], &[1.0]).unwrap();
    let sigma = 1.0;
    let e0 = gp_dynamic_energy(&phi0, sigma);
    let prop = GpPropagator::new(g, sigma, 1e-3).unwrap();
    let mut phi = phi0.clone();
    let (mut norm_drift, mut energy_drift) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        prop.advance(&mut phi, 10).unwrap();
        norm_drift = norm_drift.max((phi.norm() - 1.0).abs());
        energy_drift = energy_drift.max(rel(gp_dynamic_energy(&phi, sigma), e0));
    }
    let back = evolve_gp(&phi, sigma, -1.0, 1e-3).unwrap();
    let reversal = back.distance(&phi0).unwrap();
    let at = |dt: f64| evolve_gp(&phi0, sigma, 1.0, dt).unwrap();
    let (a, b, c) = (at(1e-2), at(5e-3), at(2.5e-3));
    let ratio = a.distance(&b).unwrap() / b.distance(&c).unwrap();
    ensure(
        norm_drift < 1e-10 && energy_drift < 1e-6 && reversal < 1e-8 && (3.2..=4.8).contains(&ratio),
        format!("norm drift {norm_drift:.2e}, energy drift {energy_drift:.2e}, reversal {reversal:.2e}, halving ratio {ratio:.3}"),
    )
}

fn gp_ground_state() -> Outcome {
    let omega = 1.0;
    let g = GridSpec::new(3, 64, 12.0).unwrap();
    let gs = minimize_gp_with(&TrapModel::Harmonic { omega }, 0.0, g, 1e-10, MinimizeOptions::default())
        .map_err(|e| e.to_string())?;
    // -Δ + ω²r² separates into three oscillators of energy ω each.
    let exact = 3.0 * omega;
    let err = (gs.energy - exact).abs();
    let monotone = gs.history.windows(2).all(|w| w[1] <= w[0]);
    ensure(
        err < 1e-6 && monotone,
        format!("E = {:.10} vs {exact}, err {err:.2e}, {} iterations, monotone {monotone}", gs.energy, gs.history.len()),
    )
}

fn hierarchy_factorized() -> Outcome {
    let g = GridSpec::new(1, 64, 10.0).unwrap();
    let phi0 = WaveFunction::gaussian(g, 1.0, &[0.3], &[1.0]).unwrap();
    let (sigma, t) = (1.0, 0.1);
    let dts = [1e-2, 5e-3, 2.5e-3];
    let mut lines = Vec::new();
    let mut ok = true;
    for k in [1usize, 2] {
        let mut res = Vec::new();
        let mut off = 0.0;
        for &dt in &dts {
            let f = gp_frames(&phi0, sigma, t, dt).unwrap();
            res.push(infinite_hierarchy_residual([&f[0], &f[1], &f[2]], k, sigma, dt).unwrap());
            off = infinite_hierarchy_residual([&f[0], &f[1], &f[2]], k, 0.5 * sigma, dt).unwrap();
        }
        let r1 = res[0] / res[1];
        let r2 = res[1] / res[2];
        let sep = off / res[2];
        ok &= (3.2..=4.8).contains(&r1) && (3.2..=4.8).contains(&r2) && sep > 10.0;
        lines.push(format!("k={k}: ratios {r1:.3}, {r2:.3}; σ/2 over matched {sep:.1e}"));
    }
    ensure(ok, lines.join("; "))
}

fn bbgky_consistency() -> Outcome {
    let g = GridSpec::new(1, 64, 10.0).unwrap();
    let phi = WaveFunction::gaussian(g, 1.0, &[], &[0.5]).unwrap();
    let v = PotentialModel::gaussian(2.0, 1.0, None).unwrap();
    let n = 2;
    let ham = ManyBodyHamiltonian::analog_1d(gplab::potential::scale_potential_1d(&v, n as u64).unwrap(), n, TrapModel::None)
        .unwrap();
    let psi0 = build_initial(&InitialKind::Product(phi), n, g).unwrap();
    let t = 0.1;
    let mut res = Vec::new();
    let mut marginal_err = 0.0f64;
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let frames = manybody_frames(&psi0, &ham, t, dt).unwrap();
        res.push(bbgky_residual_from_states([&frames[0], &frames[1], &frames[2]], &ham, 1, dt).unwrap());
        for s in &frames {
            let g2 = marginal(s, 2).unwrap();
            let g1 = marginal(s, 1).unwrap();
            marginal_err = marginal_err.max(g2.partial_trace().unwrap().distance(&g1).unwrap());
        }
    }
    let (r1, r2) = (res[0] / res[1], res[1] / res[2]);
    ensure(
        (3.2..=4.8).contains(&r1) && (3.2..=4.8).contains(&r2) && marginal_err < 1e-10,
        format!("residuals {:.2e} {:.2e} {:.2e}, ratios {r1:.3} {r2:.3}, Tr₂γ² − γ¹ {marginal_err:.1e}", res[0], res[1], res[2]),
    )
}

fn dyson_truncation() -> Outcome {
    let g = GridSpec::new(1, 32, 8.0).unwrap();
    let phi = WaveFunction::gaussian(g, 1.0, &[0.2], &[0.5]).unwrap();
    let (sigma, t) = (0.2, 0.05);
    let oracle = Kernel::projector(&evolve_gp(&phi, sigma, t, 1e-5).unwrap(), 1).unwrap();
    let family = HierarchyFamily::factorized(&phi, 3, sigma);
    let mut d = Vec::new();
    for n in 1..=3 {
        let s = dyson_partial_sum(&family, 1, n, t, 16).unwrap().to_dense().unwrap();
        d.push(s.distance(&oracle).unwrap());
    }
    let free = HierarchyFamily::factorized(&phi, 3, 0.0);
    let exact = Kernel::projector(&evolve_gp(&phi, 0.0, t, t).unwrap(), 1).unwrap();
    let mut zero_err = 0.0f64;
    for n in 1..=3 {
        let s = dyson_partial_sum(&free, 1, n, t, 16).unwrap().to_dense().unwrap();
        zero_err = zero_err.max(s.distance(&exact).unwrap());
    }
    ensure(
        d[0] > d[1] && d[1] > d[2] && zero_err < 1e-12,
        format!("distances {:.2e} {:.2e} {:.2e}; σ = 0 error {zero_err:.1e}", d[0], d[1], d[2]),
    )
}

fn correlation_structure() -> Outcome {
    let g = GridSpec::new(3, 16, 8.0).unwrap();
    let phi = WaveFunction::gaussian(g, 1.2, &[], &[]).unwrap();
    let v = PotentialModel::gaussian(5.0, 1.0, None).unwrap();
    let sol = solve_zero_energy(&v, default_r_max(&v), 1e-10).unwrap();
    let (mut q, mut raw) = (Vec::new(), Vec::new());
    for n in [4u64, 8, 16] {
        let f = jastrow(&sol, n).unwrap();
        let psi = build_initial(&InitialKind::JastrowProduct(phi.clone(), f.clone()), 2, g).unwrap();
        q.push(correlation_quotient(&psi, |r| f.eval(r), 0, 1).unwrap());
        raw.push(correlation_quotient(&psi, |_| 1.0, 0, 1).unwrap());
    }
    let spread = q.iter().cloned().fold(0.0, f64::max) / q.iter().cloned().fold(f64::INFINITY, f64::min);
    let grows = raw.windows(2).all(|w| w[1] > w[0]);
    ensure(
        spread <= 2.0 && grows,
        format!("quotient {:.3} {:.3} {:.3} (spread {spread:.3}); raw {:.3} {:.3} {:.3}", q[0], q[1], q[2], raw[0], raw[1], raw[2]),
    )
}

fn power_counting() -> Outcome {
    for k in 1..=100u64 {
        for m in 0..=100u64 {
            let p = power_counting_margin(k, m).map_err(|e| e.to_string())?;
            if p.margin != 5 * k + m || p.decay_exp - p.volume_exp != p.margin {
                return Err(format!("k={k} m={m}: {p:?}"));
            }
        }
    }
    let p = power_counting_margin(1, 1).unwrap();
    // 4k + 15m < 5m + 2(2k + 3m) + 5(k + m) at k = m = 1: 19 < 25.
    ensure((p.volume_exp, p.decay_exp, p.margin) == (19, 25, 6), format!("(1,1) → {p:?}"))
}

fn marginal_suite() -> Outcome {
    let g1 = GridSpec::new(1, 16, 2.0 * PI).unwrap();
    let phi = WaveFunction::gaussian(g1, 0.8, &[0.1], &[1.0]).unwrap();
    let prod = build_initial(&InitialKind::Product(phi.clone()), 3, g1).unwrap();
    let gamma = marginal(&prod, 1).unwrap();
    let ev = gamma.eigenvalues();
    let overlap_err = (condensate_overlap(&gamma, &phi).unwrap() - 1.0).abs();
    let rank_err = (ev[0] - 1.0).abs().max(ev[1..].iter().map(|e| e.abs()).fold(0.0, f64::max));

    let a = WaveFunction::plane_wave(g1, &[1]).unwrap();
    let b = WaveFunction::plane_wave(g1, &[-2]).unwrap();
    let two_mode = ManyBodyState::symmetrized_product(&[a, b]).unwrap();
    let ev2 = marginal(&two_mode, 1).unwrap().eigenvalues();
    let half_err = (ev2[0] - 0.5).abs().max((ev2[1] - 0.5).abs()).max(ev2[2].abs());

    let g3 = GridSpec::new(3, 32, 12.0).unwrap();
    let mut hardy = Vec::new();
    for (w, p) in [(1.0, 0.0), (1.5, 0.0), (0.75, 0.0), (1.0, 2.0), (1.5, 1.0)] {
        let psi = WaveFunction::gaussian(g3, w, &[], &[p, 0.0, 0.0]).unwrap();
        let (lhs, rhs) = hardy_check(&psi).unwrap();
        hardy.push((lhs, rhs));
    }
    let hardy_ok = hardy.iter().all(|(l, r)| l <= r);
    let worst = hardy.iter().map(|(l, r)| l / r).fold(0.0, f64::max);
    ensure(
        overlap_err < 1e-12 && rank_err < 1e-12 && half_err < 1e-10 && hardy_ok,
        format!(
            "overlap err {overlap_err:.1e}, rank err {rank_err:.1e}, two-mode err {half_err:.1e}, max Hardy lhs/rhs {worst:.3}"
        ),
    )
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let out = dir.join("out").join(name);
    let text = format!(
        r#"{{"schema_version": "1", {body}, "seed": 7, "output": {{"dir": {:?}, "prefix": "{name}", "binary_snapshots": true}}}}"#,
        out.display().to_string()
    );
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, text).unwrap();
    path
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("scatter", r#""experiment": "scatter", "potential": {"kind": "gaussian", "height": 2.0, "width": 0.8}, "scaling_N": [1, 10, 100]"#),
        ("gp_evolve", r#""experiment": "gp_evolve", "grid": {"dim": 1, "points_per_axis": 64, "box_length": 10.0}, "time": {"t_final": 0.2, "dt": 0.001}, "coupling": {"mode": "explicit", "value": 1.5}, "initial_state": {"orbital": {"kind": "random"}}"#),
        ("gp_groundstate", r#""experiment": "gp_groundstate", "trap": {"kind": "harmonic", "omega": 1.0}, "grid": {"dim": 1, "points_per_axis": 64, "box_length": 12.0}, "coupling": {"mode": "explicit", "value": 2.0}, "tolerance": 1e-9"#),
        ("manybody", r#""experiment": "manybody", "potential": {"kind": "gaussian", "height": 2.0, "width": 1.0}, "grid": {"dim": 1, "points_per_axis": 16, "box_length": 8.0}, "particles": 3, "time": {"t_final": 0.05, "dt": 0.001, "record_every": 10}, "initial_state": {"orbital": {"kind": "random"}}"#),
        ("hierarchy", r#""experiment": "hierarchy", "grid": {"dim": 1, "points_per_axis": 16, "box_length": 8.0}, "time": {"t_final": 0.02, "dt": 0.002}, "coupling": {"mode": "explicit", "value": 0.2}, "initial_state": {"orbital": {"kind": "gaussian", "width": 1.0}}, "hierarchy": {"k_max": 2, "dyson_terms": 2, "quad_points": 8, "oracle_dt": 0.001}"#),
        ("power_counting", r#""experiment": "power_counting", "power_counting": {"k_max": 10, "m_max": 10}"#),
    ];
    let mut checked = 0;
    for (name, body) in configs {
        let path = write_config(dir.path(), name, body);
        let mut runs = Vec::new();
        for _ in 0..2 {
            let csv = gplab::cli::run_config(&path, None, 1).map_err(|e| format!("{name}: {e}"))?;
            let mut files = vec![std::fs::read(&csv).unwrap()];
            let manifest: gplab::cli::Manifest =
                serde_json::from_str(&std::fs::read_to_string(csv.with_file_name(format!("{name}_manifest.json"))).unwrap())
                    .unwrap();
            for f in &manifest.files {
                files.push(std::fs::read(csv.with_file_name(f)).unwrap());
            }
            runs.push(files);
        }
        if runs[0] != runs[1] {
            return Err(format!("{name}: outputs differ between runs"));
        }
        checked += runs[0].len();
    }
    Ok(format!("{checked} output files byte-identical across two runs"))
}

fn main() {
    let criteria: Vec<(&str, f64, fn() -> Outcome)> = vec![
        ("scattering identity", 1.0, scattering_identity),
        ("scaling law", 1.0, scaling_law),
        ("Born dominance", 1.0, born_dominance),
        ("GP solver conservation", 30.0, gp_conservation),
        ("GP ground state", 60.0, gp_ground_state),
        ("factorized infinite hierarchy", 120.0, hierarchy_factorized),
        ("BBGKY consistency", 120.0, bbgky_consistency),
        ("Dyson truncation", 300.0, dyson_truncation),
        ("correlation structure", 300.0, correlation_structure),
        ("power counting", 1.0, power_counting),
        ("marginal and overlap suite", 60.0, marginal_suite),
        ("determinism", f64::INFINITY, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let clock = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = clock.elapsed().as_secs_f64();
        let (ok, detail) = match result {
            Ok(d) if secs < limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit} s budget")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {detail} [{secs:.2} s]", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
