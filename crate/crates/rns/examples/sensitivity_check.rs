//! The frequency-sensitivity (variational) state against central finite
//! differences, and the two independent evolution paths against each other.
//!
//! Run with: `cargo run --release --example sensitivity_check`

use rns::expm::matrix_exponential_oracle;
use rns::model::{assemble_symbol, Control, InitialProfile, KernelParams, ModelParams};
use rns::ode::{evolve_mode, evolve_with_sensitivity, IntegratorConfig};

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
    let profile = InitialProfile::constrained_gaussian(1.0, params.l);
    let cfg = IntegratorConfig::default();
    let t_end = 10.0;

    for xi in [0.5, 2.0] {
        let symbol = assemble_symbol(&params, Some(&kernel), xi).unwrap();
        let state0 = profile.spectrum(xi, params.control);
        let sens0 = profile.spectrum_derivative(xi, params.control);
        let traj = evolve_with_sensitivity(
            &params,
            Some(&kernel),
            &symbol,
            &state0,
            &sens0,
            &[0.0, t_end],
            &cfg,
        )
        .unwrap();
        let sens = &traj.sensitivity.as_ref().unwrap()[1];

        // central differences across xi
        let h = 1e-4;
        let evolve_at = |x: f64| {
            let sym = assemble_symbol(&params, Some(&kernel), x).unwrap();
            let s0 = profile.spectrum(x, params.control);
            evolve_mode(&sym, Some(&kernel), &s0, &[0.0, t_end], &cfg)
                .unwrap()
                .states[1]
                .complex_block()
        };
        let plus = evolve_at(xi + h);
        let minus = evolve_at(xi - h);
        let mut num = 0.0;
        let mut den = 0.0;
        for idx in 0..sens.len() {
            let fd = (plus[idx] - minus[idx]) / (2.0 * h);
            num += (fd - sens[idx]).norm_sqr();
            den += sens[idx].norm_sqr();
        }
        println!(
            "xi = {xi}: variational vs finite differences, relative gap {:.3e}",
            (num / den).sqrt()
        );

        // integrator vs matrix exponential on the base state
        let rk = traj.states[1].complex_block();
        let oracle = matrix_exponential_oracle(&symbol, &state0, t_end).unwrap();
        let gap: f64 = rk
            .iter()
            .zip(&oracle.state)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = oracle.state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        println!("        integrator vs matrix exponential: {:.3e}", gap / scale);
    }
}
