//! Non-decay certificate for equal wave speeds: a purely imaginary
//! eigenvalue at the predicted frequency whose eigenvector keeps its
//! modulus for ten thousand time units.
//!
//! Run with: `cargo run --release --example instability_witness`

use rns::model::{Control, KernelParams, ModelParams};
use rns::spectral::instability_certificate;

fn main() {
    for control in [Control::Damping, Control::Memory] {
        let params = ModelParams {
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            k0: 1.0,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            gamma: 1.0,
            l: 1.0,
            control,
        };
        let kernel = (control == Control::Memory).then(|| KernelParams::new(0.25, 0.5));
        println!("{control:?} system, equal speeds:");
        for xi in [0.0, 1.0, 5.0] {
            let cert = instability_certificate(&params, kernel.as_ref(), xi).unwrap();
            println!(
                "  xi = {xi}: lambda = {:.6}, |Re(eig)| = {:.2e}, modulus drift over [0, 1e4] = {:.2e}",
                cert.lambda,
                cert.eigenvalue.re.abs(),
                cert.witness_drift
            );
        }
    }

    // distinct speeds are refused
    let distinct = ModelParams {
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
    match instability_certificate(&distinct, None, 1.0) {
        Err(e) => println!("distinct speeds: refused ({e})"),
        Ok(_) => unreachable!(),
    }
}
