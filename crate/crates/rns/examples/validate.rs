//! Validate model parameters and classify the wave speeds.
//!
//! Run with: `cargo run --release --example validate`

use rns::model::{validate_params, Control, KernelParams, ModelParams};

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
    let report = validate_params(&damping, None);
    println!("damping system: valid = {}, speeds = {:?}", report.is_valid(), report.speeds);

    // an inadmissible kernel: g0 = d1/d2 = 2 >= k3
    let memory = ModelParams {
        k3: 1.0,
        control: Control::Memory,
        ..damping
    };
    let heavy = KernelParams::new(1.0, 0.5);
    let report = validate_params(&memory, Some(&heavy));
    println!(
        "memory system with g0 = {}: valid = {}",
        heavy.g0(),
        report.is_valid()
    );
    for v in &report.violations {
        println!("  violation: {v}");
    }

    // equal speeds: k1/rho1 = k2/rho2
    let equal = ModelParams {
        rho2: 1.0,
        ..damping
    };
    let report = validate_params(&equal, None);
    println!("equal-speed variant: speeds = {:?}", report.speeds);
}
