use std::f64::consts::PI;

use gplab::gp::{gp_dynamic_energy, GpPropagator};
use gplab::potential::{born_coupling, scale_potential};
use gplab::scattering::{coupling_sigma, default_r_max};
use gplab::{alpha_strength, evolve_gp, solve_zero_energy, GridSpec, PotentialModel, WaveFunction};
use proptest::prelude::*;

/// Closed form for the barrier at zero energy with `-u'' + (V/2) u = 0`
/// inside: `a0 = R - tanh(κR)/κ`, `κ = √(V0/2)`.
fn barrier_oracle(height: f64, radius: f64) -> f64 {
    let kappa = (0.5 * height).sqrt();
    radius - (kappa * radius).tanh() / kappa
}

/// `b0 / 8π`, an upper bound for `a0`.
fn first_born(v: &PotentialModel) -> f64 {
    born_coupling(v) / (8.0 * PI)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn barrier_matches_closed_form(height in 0.01f64..20.0, radius in 0.2f64..3.0) {
        let v = PotentialModel::barrier(height, radius).unwrap();
        let sol = solve_zero_energy(&v, default_r_max(&v), 1e-10).unwrap();
        let exact = barrier_oracle(height, radius);
        prop_assert!((sol.a0() - exact).abs() < 1e-8 * exact.max(1e-3));
        prop_assert!((coupling_sigma(&sol) / (8.0 * PI * sol.a0()) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn scaling_and_born_bound(height in 0.1f64..10.0, width in 0.3f64..2.0, n in 1u64..200) {
        let v = PotentialModel::gaussian(height, width, None).unwrap();
        let a0 = solve_zero_energy(&v, default_r_max(&v), 1e-10).unwrap().a0();
        prop_assert!(a0 > 0.0 && a0 < first_born(&v));
        let vn = scale_potential(&v, n).unwrap();
        let an = solve_zero_energy(&vn, default_r_max(&vn), 1e-10).unwrap().a0();
        prop_assert!((an * n as f64 - a0).abs() < 1e-8 * a0);
        prop_assert!((alpha_strength(&vn) - alpha_strength(&v)).abs() < 1e-8 * alpha_strength(&v));
    }

    #[test]
    fn gp_flow_conserves_norm_and_reverses(
        sigma in 0.0f64..5.0,
        width in 0.5f64..1.5,
        k in -2.0f64..2.0,
        t in 0.05f64..0.5,
    ) {
        let g = GridSpec::new(1, 128, 16.0).unwrap();
        let phi0 = WaveFunction::gaussian(g, width, &[0.5], &[k]).unwrap();
        let phi = evolve_gp(&phi0, sigma, t, 1e-3).unwrap();
        prop_assert!((phi.norm() - 1.0).abs() < 1e-12);
        let back = evolve_gp(&phi, sigma, -t, 1e-3).unwrap();
        prop_assert!(back.distance(&phi0).unwrap() < 1e-10);
    }
}

#[test]
fn gp_energy_drift_is_second_order() {
    let g = GridSpec::new(1, 256, 20.0).unwrap();
    let phi0 = WaveFunction::gaussian(g, 1.0, &[], &[1.0]).unwrap();
    let sigma = 2.0;
    let e0 = gp_dynamic_energy(&phi0, sigma);
    let drift = |dt: f64| {
        let prop = GpPropagator::new(g, sigma, dt).unwrap();
        let mut phi = phi0.clone();
        let steps = (0.5 / dt).round() as usize;
        prop.advance(&mut phi, steps).unwrap();
        (gp_dynamic_energy(&phi, sigma) - e0).abs()
    };
    let ratio = drift(4e-3) / drift(2e-3);
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
}
