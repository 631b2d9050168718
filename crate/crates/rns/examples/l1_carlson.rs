//! L1 norms through the Carlson bound and the inverse-transform oracle,
//! plus the three interpolation inequalities at a sampled time.
//!
//! Run with: `cargo run --release --example l1_carlson`

use rns::model::{Control, InitialProfile, ModelParams};
use rns::norms::{
    l1_bound, reconstruct_norms, NormOrder, ReconstructionSpec, SpectralField, XiGrid,
};

fn main() {
    let params = ModelParams {
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
    let profile = InitialProfile::constrained_gaussian(1.0, params.l);
    let j = 4;

    let grid = XiGrid::standard(2048, 1e3, 0.1).unwrap();
    let field = SpectralField::evolve_dyadic(&params, None, &profile, grid, 8, true).unwrap();
    let orders = [
        NormOrder::One,
        NormOrder::Q(1.5),
        NormOrder::Two,
        NormOrder::Q(4.0),
        NormOrder::Inf,
    ];
    let spec = ReconstructionSpec::default();

    println!("{:>8} {:>13} {:>13} {:>8}", "t", "direct L1", "Carlson", "ratio");
    for &t in &field.times {
        let bound = l1_bound(&field, j, t).unwrap();
        let phys = reconstruct_norms(&params, None, &profile, j, t, &orders, &spec).unwrap();
        let l1 = phys.get(NormOrder::One).unwrap();
        println!("{t:>8.0} {l1:>13.5e} {bound:>13.5e} {:>8.4}", bound / l1);
    }

    // interpolation inequalities at t = 16
    let t = 16.0;
    let phys = reconstruct_norms(&params, None, &profile, j, t, &orders, &spec).unwrap();
    let phys_next = reconstruct_norms(&params, None, &profile, j + 1, t, &orders, &spec).unwrap();
    let (l1, l15, l2, l4, linf) = (
        phys.get(NormOrder::One).unwrap(),
        phys.get(NormOrder::Q(1.5)).unwrap(),
        phys.get(NormOrder::Two).unwrap(),
        phys.get(NormOrder::Q(4.0)).unwrap(),
        phys.get(NormOrder::Inf).unwrap(),
    );
    let l2_next = phys_next.get(NormOrder::Two).unwrap();
    println!("\ninterpolation at t = {t} (j = {j}):");
    println!(
        "  sup-norm:  {linf:.5e} <= sqrt(2) * {:.5e}  (constant {:.4})",
        (l2 * l2_next).sqrt(),
        linf / (l2 * l2_next).sqrt()
    );
    println!(
        "  q = 4:     {l4:.5e} <= {:.5e}",
        linf.powf(0.5) * l2.powf(0.5)
    );
    println!(
        "  q = 1.5:   {l15:.5e} <= {:.5e}",
        l2.powf(2.0 / 3.0) * l1.powf(1.0 / 3.0)
    );
}
