//! Eigenvalue scan of the mode generator: the structural zero mode, the
//! physical spectral abscissa, and how decay rates vary with frequency.
//!
//! Run with: `cargo run --release --example spectrum_scan`

use rns::model::{assemble_symbol, Control, KernelParams, ModelParams};
use rns::spectral::mode_spectrum;

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

    println!("{:>8} {:>14} {:>14}", "xi", "abscissa", "max residual");
    for xi in [0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let symbol = assemble_symbol(&params, Some(&kernel), xi).unwrap();
        let report = mode_spectrum(&symbol).unwrap();
        println!(
            "{xi:>8.3} {:>14.4e} {:>14.2e}",
            report.spectral_abscissa, report.max_residual
        );
    }

    // full spectrum at one frequency
    let symbol = assemble_symbol(&params, Some(&kernel), 1.0).unwrap();
    let report = mode_spectrum(&symbol).unwrap();
    println!("\neigenvalues of -A(1):");
    for (idx, pair) in report.pairs.iter().enumerate() {
        let tag = if idx == report.structural_zero {
            "  <- structural zero (conserved q = i xi p - v - z - l phi)"
        } else {
            ""
        };
        println!("  {:+.6e} {:+.6e}i{tag}", pair.value.re, pair.value.im);
    }
}
