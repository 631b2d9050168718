//! L2 norm decay over a dyadic time ladder: slopes of log ||d^j U/dx^j||_2
//! against log(1 + t) for j = 0, 1, 2.
//!
//! Run with: `cargo run --release --example l2_decay`

use rns::model::{Control, InitialProfile, KernelParams, ModelParams};
use rns::norms::{
    fit_time_slope, l2_norm, theoretical_exponents, NormOrder, NormSeries, SpectralField, XiGrid,
};

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

    for (params, kernel) in [(damping, None), (memory, Some(kernel))] {
        let grid = XiGrid::standard(2048, 1e3, 0.1).unwrap();
        let field =
            SpectralField::evolve_dyadic(&params, kernel.as_ref(), &profile, grid, 20, false)
                .unwrap();
        println!("{:?} system:", params.control);
        for j in 0..=2u32 {
            let values: Vec<f64> = field
                .times
                .iter()
                .map(|&t| l2_norm(&field, j, t).unwrap().value)
                .collect();
            let series = NormSeries {
                j,
                order: NormOrder::Two,
                times: field.times.clone(),
                values,
            };
            let fit = fit_time_slope(&series, (1e3, 1e6)).unwrap();
            let target = theoretical_exponents(j, 1, params.control).l2_data_term;
            println!(
                "  j = {j}: fitted slope {:+.4} (theory {:+.4}), r^2 = {:.6}",
                fit.rate, target, fit.r_squared
            );
        }
    }
}
