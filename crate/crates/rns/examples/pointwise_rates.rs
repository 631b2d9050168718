//! Pointwise decay-rate curve: fitted per-mode rates against the profile
//! f(xi) = xi^{4+2 tau0} / (xi^10 + 1), with the low/high branch slopes.
//!
//! Run with: `cargo run --release --example pointwise_rates`

use rns::model::{Control, KernelParams, ModelParams};
use rns::spectral::{branch_slopes, log_spaced, rate_curve};

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

    let grid = log_spaced(1e-2, 1e2, 41);
    for (params, kernel) in [(damping, None), (memory, Some(kernel))] {
        let points = rate_curve(&params, kernel.as_ref(), &grid).unwrap();
        println!("{:?} system:", params.control);
        println!("{:>10} {:>13} {:>13} {:>9}", "xi", "rate", "f(xi)", "ratio");
        for p in points.iter().step_by(5) {
            println!(
                "{:>10.4} {:>13.4e} {:>13.4e} {:>9.4}",
                p.xi, p.rate, p.f_xi, p.ratio
            );
        }
        let (low, high) = branch_slopes(&points).unwrap();
        let expect = match params.control {
            Control::Damping => (4.0, -6.0),
            Control::Memory => (6.0, -4.0),
        };
        println!(
            "low branch slope {low:.3} (expect {}), high branch slope {high:.3} (expect {})\n",
            expect.0, expect.1
        );
    }
}
