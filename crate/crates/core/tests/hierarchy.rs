use gplab::gp::gp_dynamic_energy;
use gplab::hierarchy::{
    bbgky_residual_from_states, collision_sum, dyson_partial_sum, dyson_term, free_propagate, gp_frames,
    infinite_hierarchy_residual, manybody_frames, power_counting_margin, sobolev_trace_norm, HierarchyFamily, KronSum,
};
use gplab::manybody::{build_initial, marginal, InitialKind, ManyBodyHamiltonian};
use gplab::potential::scale_potential_1d;
use gplab::{evolve_gp, GridSpec, ManyBodyState, PotentialModel, TrapModel, WaveFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(1, 32, 8.0).unwrap()
}

fn orbital(g: GridSpec) -> WaveFunction {
    WaveFunction::gaussian(g, 1.0, &[0.3], &[1.0]).unwrap()
}

#[test]
fn sobolev_norm_is_invariant_along_free_and_stationary_trajectories() {
    let g = GridSpec::new(1, 64, 10.0).unwrap();
    let cases = [(orbital(g), 0.0), (WaveFunction::plane_wave(g, &[2]).unwrap(), 3.0)];
    for (phi, sigma) in cases {
        for k in 1..=3 {
            let s0 = KronSum::projector(&phi, k).sobolev_trace_norm();
            for t in [0.1, 0.4, 1.0] {
                let st = KronSum::projector(&evolve_gp(&phi, sigma, t, 1e-3).unwrap(), k).sobolev_trace_norm();
                assert!((st - s0).abs() < 1e-8 * s0, "σ={sigma} k={k} t={t}: {st} vs {s0}");
            }
        }
    }
}

#[test]
fn sobolev_norm_stays_below_the_energy_bound_with_interaction() {
    // ∫|∇φ|² ≤ E for σ ≥ 0, so |||γ_t|||_k ≤ (1 + E)^k uniformly in t.
    let g = GridSpec::new(1, 64, 10.0).unwrap();
    let phi = orbital(g);
    let sigma = 1.0;
    let e = gp_dynamic_energy(&phi, sigma);
    for k in 1..=2 {
        let bound = (1.0 + e).powi(k as i32);
        for t in [0.0, 0.25, 0.5, 1.0] {
            let s = KronSum::projector(&evolve_gp(&phi, sigma, t, 1e-3).unwrap(), k).sobolev_trace_norm();
            assert!(s <= bound * (1.0 + 1e-10), "k={k} t={t}: {s} > {bound}");
        }
    }
}

#[test]
fn dyson_terms_scale_as_powers_of_the_coupling() {
    let phi = orbital(grid());
    let t = 0.1;
    let term = |sigma: f64, m: usize| {
        let f = HierarchyFamily::factorized(&phi, 3, sigma);
        dyson_term(&f, 1, m, t, 8).unwrap().value.to_dense().unwrap()
    };
    for m in 1..=2 {
        let base = term(0.1, m);
        for sigma in [0.2, 0.7, 1.5] {
            let mut scaled = base.clone();
            scaled.scale(Complex64::new((sigma / 0.1f64).powi(m as i32), 0.0));
            let other = term(sigma, m);
            assert!(other.distance(&scaled).unwrap() < 1e-12 * other.frobenius_norm(), "m={m} σ={sigma}");
        }
    }
}

#[test]
fn zero_coupling_partial_sums_are_exact_at_every_level() {
    let g = GridSpec::new(1, 16, 6.0).unwrap();
    let phi = orbital(g);
    let t = 0.2;
    let f = HierarchyFamily::factorized(&phi, 4, 0.0);
    let exact_phi = evolve_gp(&phi, 0.0, t, t).unwrap();
    for k in 1..=2 {
        let exact = KronSum::projector(&exact_phi, k).to_dense().unwrap();
        for n in 1..=3 {
            let s = dyson_partial_sum(&f, k, n, t, 8).unwrap().to_dense().unwrap();
            assert!(s.distance(&exact).unwrap() < 1e-12);
        }
    }
}

#[test]
fn two_particle_residual_tracks_the_one_particle_residual() {
    let g = GridSpec::new(1, 64, 10.0).unwrap();
    let phi = orbital(g);
    let (sigma, t) = (1.0, 0.1);
    for dt in [1e-2, 5e-3] {
        let f = gp_frames(&phi, sigma, t, dt).unwrap();
        let r1 = infinite_hierarchy_residual([&f[0], &f[1], &f[2]], 1, sigma, dt).unwrap();
        let r2 = infinite_hierarchy_residual([&f[0], &f[1], &f[2]], 2, sigma, dt).unwrap();
        assert!(r2 / r1 < 2.0 && r1 / r2 < 2.0, "dt={dt}: {r1} {r2}");
    }
}

#[test]
fn three_body_bbgky_second_level_converges() {
    let g = GridSpec::new(1, 16, 8.0).unwrap();
    let v = PotentialModel::gaussian(2.0, 1.0, None).unwrap();
    let n = 3;
    let ham = ManyBodyHamiltonian::analog_1d(scale_potential_1d(&v, n as u64).unwrap(), n, TrapModel::None).unwrap();
    let psi0 = build_initial(&InitialKind::Product(orbital(g)), n, g).unwrap();
    let res: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            let fr = manybody_frames(&psi0, &ham, 0.1, dt).unwrap();
            bbgky_residual_from_states([&fr[0], &fr[1], &fr[2]], &ham, 2, dt).unwrap()
        })
        .collect();
    let ratio = res[1] / res[2];
    assert!((3.2..=4.8).contains(&ratio), "{res:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn free_propagation_is_a_unitary_group(seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let g = GridSpec::new(1, 8, 3.0).unwrap();
        let gamma = marginal(&ManyBodyState::random_symmetric(3, g, seed).unwrap(), 2).unwrap();
        let a = free_propagate(&free_propagate(&gamma, s), t);
        let b = free_propagate(&gamma, s + t);
        prop_assert!(a.distance(&b).unwrap() < 1e-10);
        prop_assert!((b.trace() - gamma.trace()).norm() < 1e-10);
        prop_assert!(b.hermiticity_defect() < 1e-10);
        let n0 = sobolev_trace_norm(&gamma);
        prop_assert!((sobolev_trace_norm(&b) - n0).abs() < 1e-10 * n0);
    }

    #[test]
    fn collision_output_is_hermitian_and_traceless(seed in any::<u64>(), sigma in -3.0f64..3.0) {
        let g = GridSpec::new(1, 8, 3.0).unwrap();
        let gamma = marginal(&ManyBodyState::random_symmetric(3, g, seed).unwrap(), 3).unwrap();
        let out = collision_sum(&gamma, sigma).unwrap();
        prop_assert!(out.trace().norm() < 1e-10);
        prop_assert!(out.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn power_counting_margin_is_positive(k in 1u64..10_000, m in 0u64..10_000) {
        let p = power_counting_margin(k, m).unwrap();
        prop_assert_eq!(p.volume_exp, 4 * k + 15 * m);
        prop_assert_eq!(p.decay_exp, 5 * m + 2 * (2 * k + 3 * m) + 5 * (k + m));
        prop_assert_eq!(p.margin, 5 * k + m);
        prop_assert!(p.margin > 0);
    }
}
