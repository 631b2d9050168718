//! The Lyapunov coefficient ledger: the thirteen selected multipliers, the
//! derived A/B families with their identities and positivity, and the decay
//! of the composite functional F along a trajectory.
//!
//! Run with: `cargo run --release --example lyapunov_ledger`

use rns::functionals::{build_lyapunov, check_f_decay, select_lambdas};
use rns::model::{assemble_symbol, Control, InitialProfile, KernelParams, ModelParams};
use rns::ode::{evolve_mode, IntegratorConfig};

fn main() {
    let params = ModelParams {
        rho1: 1.0,
        rho2: 4.0,
        rho3: 5.0,
        k0: 1.0,
        k1: 1.0,
        k2: 1.0,
        k3: 0.25,
        gamma: 0.0,
        l: 1.0,
        control: Control::Memory,
    };
    let kernel = KernelParams::new(0.075, 1.0);
    let xi = 1.0;

    let coeffs = select_lambdas(&params, Some(&kernel), xi).unwrap();
    println!("lambda ledger at xi = {xi}:");
    for (idx, lam) in coeffs.lambda.iter().enumerate() {
        println!("  lambda_{:<2} = {lam:+.6e}", idx + 1);
    }
    println!("identity residuals (relative):");
    for (idx, r) in coeffs.identity_residuals(params.l).iter().enumerate() {
        println!("  identity {idx}: {r:.2e}");
    }
    println!(
        "positivity violations: {:?}, B0 = {:.6}",
        coeffs.positivity_violations(),
        coeffs.b0
    );

    // composite functional along a trajectory
    let functional = build_lyapunov(&params, Some(&kernel), xi).unwrap();
    let symbol = assemble_symbol(&params, Some(&kernel), xi).unwrap();
    let profile = InitialProfile::constrained_gaussian(1.0, params.l);
    let state0 = profile.spectrum(xi, params.control);
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.4).collect();
    let traj = evolve_mode(
        &symbol,
        Some(&kernel),
        &state0,
        &grid,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let decay = check_f_decay(&params, Some(&kernel), &traj, &functional).unwrap();
    let (lo, hi) = functional.equivalence_band();
    println!("\nF = lambda E + w(xi) F0 with lambda = {:.4}", functional.lambda);
    println!("equivalence band for F/E: [{lo:.4}, {hi:.4}]");
    println!(
        "certified decay constant c = {:.4e} (F(t) <= F(0) exp(-2 c f(xi) t))",
        decay.c
    );
    println!("non-increasing from t = {}", decay.monotone_from);
}
