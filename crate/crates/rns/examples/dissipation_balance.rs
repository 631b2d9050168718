//! The exact energy balance: compare the numerically differentiated energy
//! against the dissipation term, for both controls and the conservative
//! limit.
//!
//! Run with: `cargo run --release --example dissipation_balance`

use rns::functionals::{dissipation_residual, energy};
use rns::model::{assemble_symbol, Control, InitialProfile, KernelParams, ModelParams};
use rns::ode::{evolve_mode, IntegratorConfig};

fn main() {
    let damping = ModelParams {
        rho1: 1.0,
        rho2: 4.0,
        rho3: 5.0,
        k0: 1.0,
        k1: 1.0,
        k2: 1.0,
        k3: 0.25,
        gamma: 4.0,
        l: 1.0,
        control: Control::Damping,
    };
    let memory = ModelParams {
        gamma: 0.0,
        control: Control::Memory,
        ..damping
    };
    let kernel = KernelParams::new(0.075, 1.0);
    let profile = InitialProfile::constrained_gaussian(1.0, 1.0);
    let cfg = IntegratorConfig::default();
    let dt = 1e-3;
    let grid: Vec<f64> = (0..=20_000).map(|k| k as f64 * dt).collect();

    for (params, kernel) in [(damping, None), (memory, Some(kernel))] {
        for xi in [0.1, 1.0, 10.0] {
            let symbol = assemble_symbol(&params, kernel.as_ref(), xi).unwrap();
            let state0 = profile.spectrum(xi, params.control);
            let traj = evolve_mode(&symbol, kernel.as_ref(), &state0, &grid, &cfg).unwrap();
            let res = dissipation_residual(&traj, &params, kernel.as_ref()).unwrap();
            println!(
                "{:?} xi = {xi}: max |dE/dt - dissipation| / E(0) = {:.3e} over t in [0, 20]",
                params.control, res.max_normalized
            );
        }
    }

    // conservative limit: gamma = 0, no memory -> E(t) = E(0)
    let conservative = ModelParams {
        gamma: 0.0,
        ..damping
    };
    let xi = 1.0;
    let symbol = assemble_symbol(&conservative, None, xi).unwrap();
    let state0 = profile.spectrum(xi, Control::Damping);
    let coarse: Vec<f64> = (0..=100).map(|k| k as f64).collect();
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let traj = evolve_mode(&symbol, None, &state0, &coarse, &cfg).unwrap();
    let e0 = energy(&conservative, None, xi, &traj.states[0]).total;
    let drift = traj
        .states
        .iter()
        .map(|s| ((energy(&conservative, None, xi, s).total - e0) / e0).abs())
        .fold(0.0f64, f64::max);
    println!("conservative limit: max |E(t) - E(0)| / E(0) = {drift:.3e} over t in [0, 100]");
}
