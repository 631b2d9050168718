//! Per-mode energy, the exact dissipation identity, the Lyapunov coefficient
//! ledger (lambda_1..lambda_13 and the derived A / B / B-tilde families), and
//! the composite functional `F = lambda E + w(xi) F0` together with its decay
//! check.
//!
//! The coefficient selection follows a fixed seven-step ordering with the
//! free inequality choices pinned to deterministic rules (midpoints, doubled
//! bounds), so identical inputs always produce identical ledgers.

use crate::error::Error;
use crate::fit::{linear_fit, DecayFit, DecayKind};
use crate::model::{
    constraint_moment, f_rate, Control, KernelParams, MemoryMoments, ModelParams, SpectralState,
    SpeedClass, NCOMP, P, PHI, THETA, U, V, Y, Z,
};
use crate::ode::ModeTrajectory;
use crate::{Result, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-mode energy split into its quadratic parts.
#[derive(Debug, Clone, Copy)]
pub struct EnergyValue {
    pub total: f64,
    /// Seven quadratic terms in state order, then the memory term
    /// `(tau0/2) xi^4 J`.
    pub parts: [f64; 8],
}

/// `E(xi, t)` with the memory integral replaced by the moment `J`.
pub fn energy(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    xi: f64,
    state: &SpectralState,
) -> EnergyValue {
    let k3_eff = params.k3_eff(kernel);
    let w = [
        params.k1,
        params.rho1,
        params.k2,
        params.rho2,
        k3_eff,
        params.rho3,
        params.k0,
    ];
    let mut parts = [0.0; 8];
    for idx in 0..NCOMP {
        parts[idx] = 0.5 * w[idx] * state.hat[idx].norm_sqr();
    }
    if let Some(mm) = state.mem {
        parts[7] = 0.5 * xi.powi(4) * mm.j;
    }
    EnergyValue {
        total: parts.iter().sum(),
        parts,
    }
}

/// Constants `(c1, c2)` with `c1 |U|^2 <= E <= c2 |U|^2`, taken from the
/// min/max of the energy weights (the trailing `1` accounts for the memory
/// term, whose weight ratio is exactly one half).
pub fn energy_equivalence_bounds(params: &ModelParams, kernel: Option<&KernelParams>) -> (f64, f64) {
    let k3_eff = params.k3_eff(kernel);
    let weights = [
        params.k1,
        params.rho1,
        params.k2,
        params.rho2,
        k3_eff,
        params.rho3,
        params.k0,
        1.0,
    ];
    let lo = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().cloned().fold(0.0f64, f64::max);
    (0.5 * lo, 0.5 * hi)
}

/// Right-hand side of the dissipation identity:
/// `-(1 - tau0) gamma |theta|^2 + (tau0/2) xi^4 ∫ g' |eta|^2`, where the
/// kernel integral equals `-d2 J` exactly for the exponential kernel.
pub fn dissipation_rhs(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    xi: f64,
    state: &SpectralState,
) -> f64 {
    match params.control {
        Control::Damping => -params.gamma * state.hat[THETA].norm_sqr(),
        Control::Memory => {
            let d2 = kernel.map(|k| k.d2).unwrap_or(0.0);
            let j = state.mem.map(|mm| mm.j).unwrap_or(0.0);
            -0.5 * xi.powi(4) * d2 * j
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    /// `dE/dt - rhs` per interior sample.
    pub residual: Vec<f64>,
    /// `max |residual| / E(0)`.
    pub max_normalized: f64,
}

/// Compare the numerically differentiated energy against the dissipation
/// identity along a trajectory on a uniform time grid. The derivative uses
/// fourth-order central stencils, with one-sided fourth-order closures at
/// the boundary.
pub fn dissipation_residual(
    trajectory: &ModeTrajectory,
    params: &ModelParams,
    kernel: Option<&KernelParams>,
) -> Result<ResidualSeries> {
    let n = trajectory.times.len();
    if n < 5 {
        return Err(Error::TooFewSamples { need: 5, got: n });
    }
    let h = trajectory.times[1] - trajectory.times[0];
    for w in trajectory.times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::BadTimeGrid(
                "dissipation residual needs a uniform time grid".into(),
            ));
        }
    }
    let xi = trajectory.xi;
    let e: Vec<f64> = trajectory
        .states
        .iter()
        .map(|s| energy(params, kernel, xi, s).total)
        .collect();
    let e0 = e[0].max(1e-300);

    let deriv = |idx: usize| -> f64 {
        if idx >= 2 && idx + 2 < n {
            (e[idx - 2] - 8.0 * e[idx - 1] + 8.0 * e[idx + 1] - e[idx + 2]) / (12.0 * h)
        } else if idx == 0 {
            (-25.0 * e[0] + 48.0 * e[1] - 36.0 * e[2] + 16.0 * e[3] - 3.0 * e[4]) / (12.0 * h)
        } else if idx == 1 {
            (-3.0 * e[0] - 10.0 * e[1] + 18.0 * e[2] - 6.0 * e[3] + e[4]) / (12.0 * h)
        } else if idx == n - 2 {
            (3.0 * e[n - 1] + 10.0 * e[n - 2] - 18.0 * e[n - 3] + 6.0 * e[n - 4] - e[n - 5])
                / (12.0 * h)
        } else {
            (25.0 * e[n - 1] - 48.0 * e[n - 2] + 36.0 * e[n - 3] - 16.0 * e[n - 4]
                + 3.0 * e[n - 5])
                / (12.0 * h)
        }
    };

    let mut residual = Vec::with_capacity(n);
    let mut max_normalized = 0.0f64;
    for idx in 0..n {
        let rhs = dissipation_rhs(params, kernel, xi, &trajectory.states[idx]);
        let r = deriv(idx) - rhs;
        max_normalized = max_normalized.max(r.abs() / e0);
        residual.push(r);
    }
    Ok(ResidualSeries {
        times: trajectory.times.clone(),
        residual,
        max_normalized,
    })
}

/// The full coefficient ledger at one frequency.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovCoefficients {
    pub xi: f64,
    pub control: Control,
    /// `lambda[i]` holds `lambda_{i+1}`.
    pub lambda: [f64; 13],
    /// `a[i]` holds `A_{i+1}`.
    pub a: [f64; 9],
    /// `b[i]` holds `B_{i+1}`.
    pub b: [f64; 7],
    pub b_tilde: [f64; 3],
    pub b0: f64,
}

impl LyapunovCoefficients {
    fn lam(&self, i: usize) -> f64 {
        self.lambda[i - 1]
    }

    /// Relative residuals of the four equality identities
    /// `A4 - A3 - l A1`, `A5 - A1 - A2`, `A6 - l A2 - A3`, `A7`, followed by
    /// the three tilde identities `B_i xi^2 + A_i - Btilde_i xi^2` and, for
    /// the memory system, `A8` and `A9`.
    pub fn identity_residuals(&self, l: f64) -> Vec<f64> {
        let a = &self.a;
        let rel = |expr: f64, scale: f64| expr.abs() / scale.max(1.0);
        let xi2 = self.xi * self.xi;
        let mut out = vec![
            rel(a[3] - a[2] - l * a[0], a[3].abs().max(a[2].abs()).max((l * a[0]).abs())),
            rel(a[4] - a[0] - a[1], a[4].abs().max(a[0].abs()).max(a[1].abs())),
            rel(a[5] - l * a[1] - a[2], a[5].abs().max((l * a[1]).abs()).max(a[2].abs())),
            rel(a[6], self.lam(7).abs().max(self.lam(9).abs()).max(self.lam(4).abs())),
            rel(
                self.b[0] * xi2 + a[0] - self.b_tilde[0] * xi2,
                (self.b[0] * xi2).abs().max(a[0].abs()),
            ),
            rel(
                self.b[1] * xi2 + a[1] - self.b_tilde[1] * xi2,
                (self.b[1] * xi2).abs().max(a[1].abs()),
            ),
            rel(
                self.b[2] * xi2 + l * a[2] - self.b_tilde[2] * xi2,
                (self.b[2] * xi2).abs().max((l * a[2]).abs()),
            ),
        ];
        if self.control == Control::Memory {
            out.push(rel(a[7], self.lam(8).abs().max(self.lam(10).abs()).max(1.0)));
            out.push(rel(a[8], self.lam(5).abs().max(self.lam(6).abs()).max(1.0)));
        }
        out
    }

    /// The strict positivity requirements: `Btilde_1..3, B4, B5, B6` always,
    /// plus `B7` for the memory system. Returns the offending names.
    pub fn positivity_violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        let checks: [(&str, f64); 6] = [
            ("Btilde1", self.b_tilde[0]),
            ("Btilde2", self.b_tilde[1]),
            ("Btilde3", self.b_tilde[2]),
            ("B4", self.b[3]),
            ("B5", self.b[4]),
            ("B6", self.b[5]),
        ];
        for (name, value) in checks {
            if !(value > 0.0) {
                bad.push(name);
            }
        }
        if self.control == Control::Memory && !(self.b[6] > 0.0) {
            bad.push("B7");
        }
        bad
    }
}

/// Deterministic seven-step coefficient selection; refuses equal speeds
/// (`lambda_5` divides by `k1 rho2 - k2 rho1`).
pub fn select_lambdas(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    xi: f64,
) -> Result<LyapunovCoefficients> {
    if params.speed_class() == SpeedClass::Equal {
        return Err(Error::EqualSpeeds(
            "coefficient selection needs distinct speeds".into(),
        ));
    }
    let (rho1, rho2, rho3) = (params.rho1, params.rho2, params.rho3);
    let (k0, k1, k2) = (params.k0, params.k1, params.k2);
    let l = params.l;
    let tau0 = params.tau0();
    let g0 = kernel.map(|k| k.g0()).unwrap_or(0.0);
    let k3 = params.k3_eff(kernel);
    let xi2 = xi * xi;

    let mut lam = [0.0f64; 13];
    // step 1: lambda2 strictly inside (-k0, 0), midpoint
    lam[1] = -0.5 * k0;
    // step 2: lambda3 above its lower bound, doubled
    let bound3 = (2.0 * k0)
        .max((-k2 * k3 * lam[1] + k0 * (2.0 * l * l * k1 * k2 - k1 * k3 - k2 * k3)) / (l * l * k1 * k2));
    lam[2] = 1.0 + 2.0 * bound3;
    // step 3: lambda4 at the midpoint of its admissible interval
    let denom = k1 * k3 + k2 * (l * l * k1 + k3);
    let ub = (l * k2 / denom)
        * ((k3 / l) * lam[1] + l * k1 * lam[2] + k0 * (k1 * k3 / (l * k2) + k3 / l - 2.0 * l * k1));
    let lb = (k1 * k3 / denom)
        * ((k2 / k1) * lam[1] + (l * l * k2 / k3) * lam[2] + k0 * (k2 / k1 - 2.0 * l * l * k2 / k3));
    let lo = lb.max(0.0);
    if !(ub > lo) {
        return Err(Error::EmptyLambdaInterval { lo, hi: ub });
    }
    lam[3] = 0.5 * (lo + ub);
    // step 4
    lam[0] = -(k2 / k1) * lam[1] - (l * l * k2 / k3) * lam[2]
        + (l * l * k2 / k3 + k2 / k1) * lam[3]
        + k0 * (2.0 * l * l * k2 / k3 - 1.0 - k2 / k1);
    // step 5
    lam[4] = -(k2 / l) * xi2 + lam[0] / l - k0 * rho2 * (k1 + k2) / (l * (k1 * rho2 - k2 * rho1));
    // step 6
    lam[5] = (l * k2 * lam[3] - k3 * lam[4] + k0 * (l * k2 - 2.0 * k3 / l)) / k2;
    lam[9] = (-2.0 * k1 * k2 * xi2 + k1 * lam[0] + k2 * lam[1] - k2 * lam[3] - l * k1 * lam[4]
        - k0 * (k1 + k2))
        / (l * k2);
    // step 7
    lam[6] = k2 * xi2 + l * lam[4] - lam[0];
    lam[7] = -2.0 * k3 * xi2 / l + lam[5] - l * lam[2];
    lam[8] = -k1 * xi2 + lam[1] - l * lam[9];
    if params.control == Control::Memory {
        lam[12] = (lam[7] * xi2 - (rho3 / rho1) * lam[9]) / g0;
        lam[11] = ((l * lam[3] - lam[5]) * xi2 - (rho3 / rho2) * lam[4]) / g0;
        lam[10] = 2.0 * lam[2] / g0;
    }

    let tg0 = tau0 * g0;
    let a = [
        k0 * lam[0] + k2 * lam[3] * xi2 - l * k0 * lam[4] + k0 * lam[6],
        k0 * (lam[1] - lam[8] - l * lam[9]),
        k0 * (l * lam[2] - lam[5] + lam[7]),
        (k3 * lam[4] + k2 * lam[5]) * xi2,
        (-k1 * lam[6] + k2 * lam[8]) * xi2,
        (-k1 * lam[7] + k3 * lam[9]) * xi2,
        rho1 * lam[6] + rho2 * (lam[3] - lam[8]),
        rho1 * (lam[7] * xi2 - tg0 * lam[12]) - rho3 * lam[9],
        rho2 * (l * lam[3] - lam[5]) * xi2 - rho3 * lam[4] - tau0 * rho2 * g0 * lam[11],
    ];
    let b = [
        k2 * lam[0],
        k1 * lam[1],
        k3 * lam[2],
        -rho1 * lam[1],
        k0 * lam[3],
        -rho2 * (lam[0] + lam[3]),
        rho3 * (tg0 * lam[10] - lam[2]),
    ];
    let b_tilde = [
        b[0] + k2 * lam[3] + k0 * k2,
        b[1] + k0 * k1,
        b[2] - 2.0 * k0 * k3,
    ];
    let b0 = b_tilde
        .iter()
        .chain(&b[3..6])
        .cloned()
        .fold(f64::INFINITY, f64::min);

    Ok(LyapunovCoefficients {
        xi,
        control: params.control,
        lambda: lam,
        a,
        b,
        b_tilde,
        b0,
    })
}

/// Weight `xi^{2+2 tau0} / (xi^{10} + 1)` in front of the cross-term block.
pub fn lyapunov_weight(xi: f64, control: Control) -> f64 {
    let p = match control {
        Control::Damping => 2,
        Control::Memory => 4,
    };
    xi.powi(p) / (xi.powi(10) + 1.0)
}

/// The cross-term functional `F0`: ten quadratic couplings plus, for the
/// memory system, three couplings against the force moment `m`.
pub fn cross_term(coeffs: &LyapunovCoefficients, params: &ModelParams, state: &SpectralState) -> f64 {
    let xi = coeffs.xi;
    let i = C64::new(0.0, 1.0);
    let h = &state.hat;
    let (rho1, rho2, rho3) = (params.rho1, params.rho2, params.rho3);
    let lam = |k: usize| coeffs.lam(k);

    let mut f0 = (i * rho2 * lam(1) * xi * h[Y] * h[Z].conj()).re
        + (i * rho1 * lam(2) * xi * h[U] * h[V].conj()).re
        - rho3 * lam(3) * (h[THETA] * h[PHI].conj()).re
        + rho2 * lam(4) * xi * xi * (h[P] * h[Y].conj()).re
        + rho3 * lam(5) * (h[Z] * h[THETA].conj()).re
        + (i * rho2 * lam(6) * xi * h[PHI] * h[Y].conj()).re
        + (i * rho1 * lam(7) * xi * h[U] * h[Z].conj()).re
        + (i * rho1 * lam(8) * xi * h[U] * h[PHI].conj()).re
        + (i * rho2 * lam(9) * xi * h[V] * h[Y].conj()).re
        + rho3 * lam(10) * (h[V] * h[THETA].conj()).re;
    if let Some(MemoryMoments { m, .. }) = state.mem {
        let probe = -rho3 * lam(11) * xi * xi * h[THETA]
            + i * rho2 * lam(12) * xi * h[Y]
            + i * rho1 * lam(13) * xi * h[U];
        f0 += (probe * m.conj()).re;
    }
    f0
}

/// `d F0 / dt` evaluated from the mode equations (valid for any state):
/// `F1 + F2 + F3` with the `p`-coupling kept explicit.
pub fn cross_term_derivative(
    coeffs: &LyapunovCoefficients,
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    state: &SpectralState,
) -> f64 {
    let xi = coeffs.xi;
    let xi2 = xi * xi;
    let i = C64::new(0.0, 1.0);
    let h = &state.hat;
    let a = &coeffs.a;
    let b = &coeffs.b;
    let l = params.l;
    let k3 = params.k3_eff(kernel);
    let (k0, k1, k2) = (params.k0, params.k1, params.k2);

    let f1 = -xi2
        * (b[0] * h[Z].norm_sqr()
            + b[1] * h[V].norm_sqr()
            + b[2] * h[PHI].norm_sqr()
            + b[3] * h[U].norm_sqr()
            + b[4] * h[P].norm_sqr()
            + b[5] * h[Y].norm_sqr()
            + b[6] * h[THETA].norm_sqr());

    let combo = a[0] * h[Z] + a[1] * h[V] + a[2] * h[PHI];
    let f2 = (i * xi * combo * h[P].conj()).re
        + a[3] * (h[PHI] * h[Z].conj()).re
        + a[4] * (h[V] * h[Z].conj()).re
        + a[5] * (h[PHI] * h[V].conj()).re
        + a[6] * xi2 * (h[Y] * h[U].conj()).re
        + (i * a[7] * xi * h[THETA] * h[U].conj()).re
        + (i * a[8] * xi * h[THETA] * h[Y].conj()).re;

    let lam = |k: usize| coeffs.lam(k);
    let probe = lam(3) * h[PHI].conj() - lam(5) * h[Z].conj() - lam(10) * h[V].conj();
    let f3 = match params.control {
        Control::Damping => {
            let g = params.gamma * h[THETA];
            (probe * g).re
        }
        Control::Memory => {
            let d2 = kernel.map(|k| k.d2).unwrap_or(0.0);
            let m = state.mem.map(|mm| mm.m).unwrap_or_else(|| C64::new(0.0, 0.0));
            let g = xi2 * xi2 * m;
            let gprime_int = -d2 * m; // ∫ g'(s) eta ds for the exponential kernel
            let term1 = (probe * g).re;
            let probe2 = params.rho3 * lam(11) * xi2 * h[THETA].conj()
                + i * params.rho2 * lam(12) * xi * h[Y].conj()
                + i * params.rho1 * lam(13) * xi * h[U].conj();
            let term2 = -(probe2 * gprime_int).re;
            let force = -k3 * xi2 * xi2 * h[PHI] - i * l * k0 * xi2 * xi * h[P] + xi2 * g;
            let term3 = lam(11) * (force * m.conj()).re;
            let drag = lam(12) * (k2 * xi2 * h[Z] + i * k0 * xi * h[P])
                + lam(13) * (k1 * xi2 * h[V] + i * k0 * xi * h[P]);
            let term4 = -(drag * m.conj()).re;
            term1 + term2 + term3 + term4
        }
    };
    f1 + f2 + f3
}

/// The composite functional with its fitted constants.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovFunctional {
    pub coeffs: LyapunovCoefficients,
    /// Multiplier of the energy inside `F`.
    pub lambda: f64,
    /// Fitted equivalence constant: `|F - lambda E| <= 2 c3 E`.
    pub c3: f64,
}

fn sample_state<R: Rng>(
    rng: &mut R,
    control: Control,
    constrain: Option<(f64, f64)>,
    g0: f64,
) -> SpectralState {
    let mut state = SpectralState::zero(control);
    for slot in state.hat.iter_mut() {
        *slot = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    if let Some((xi, l)) = constrain {
        // place p on the invariant subspace q = 0 (needs xi != 0)
        let num = state.hat[V] + state.hat[Z] + l * state.hat[PHI];
        state.hat[P] = num / C64::new(0.0, xi);
        debug_assert!(constraint_moment(&state, xi, l).norm() < 1e-10);
    }
    if control == Control::Memory {
        let m = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // minimal admissible energy moment; the worst case for the fits
        state.mem = Some(MemoryMoments {
            m,
            j: m.norm_sqr() / g0,
        });
    }
    state
}

/// Number of random states used by the constant fits.
const FIT_SAMPLES: usize = 4096;
/// Safety margin applied to sampled maxima.
const FIT_MARGIN: f64 = 1.25;

/// Build `F = lambda E + w(xi) F0` with deterministic fitted constants.
///
/// `c3` bounds `|w F0| / E` over random states; the `c2/gamma` analogue
/// bounds the positive part of `w dF0/dt` against the dissipation sink on
/// the invariant subspace. `lambda = 1 + 2 max(c2_analog, 2 c3)`.
pub fn build_lyapunov(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    xi: f64,
) -> Result<LyapunovFunctional> {
    let coeffs = select_lambdas(params, kernel, xi)?;
    let w = lyapunov_weight(xi, params.control);
    let g0 = kernel.map(|k| k.g0()).unwrap_or(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f0f0);

    let mut c3_max: f64 = 0.0;
    let mut c2_max: f64 = 0.0;
    for _ in 0..FIT_SAMPLES {
        let free = sample_state(&mut rng, params.control, None, g0);
        let e = energy(params, kernel, xi, &free).total;
        if e > 1e-12 {
            c3_max = c3_max.max((w * cross_term(&coeffs, params, &free)).abs() / e);
        }

        let constrained = sample_state(&mut rng, params.control, Some((xi, params.l)), g0);
        let numer = w * cross_term_derivative(&coeffs, params, kernel, &constrained);
        let sink = -dissipation_rhs(params, kernel, xi, &constrained);
        if sink > 1e-12 {
            c2_max = c2_max.max(numer / sink);
        }
    }
    let c3 = 0.5 * FIT_MARGIN * c3_max;
    let c2_analog = (FIT_MARGIN * c2_max).max(0.0);
    let lambda = 1.0 + 2.0 * c2_analog.max(2.0 * c3);
    Ok(LyapunovFunctional { coeffs, lambda, c3 })
}

impl LyapunovFunctional {
    /// Evaluate `F(xi, state)`; the frequency must be the one the ledger was
    /// selected at.
    pub fn evaluate(
        &self,
        params: &ModelParams,
        kernel: Option<&KernelParams>,
        xi: f64,
        state: &SpectralState,
    ) -> Result<f64> {
        if xi != self.coeffs.xi {
            return Err(Error::MismatchedXi {
                expected: self.coeffs.xi,
                got: xi,
            });
        }
        let e = energy(params, kernel, xi, state).total;
        let w = lyapunov_weight(xi, params.control);
        Ok(self.lambda * e + w * cross_term(&self.coeffs, params, state))
    }

    /// Equivalence band `(lambda - 2 c3, lambda + 2 c3)` for `F / E`.
    pub fn equivalence_band(&self) -> (f64, f64) {
        (self.lambda - 2.0 * self.c3, self.lambda + 2.0 * self.c3)
    }
}

/// Decay report for `F` along one trajectory.
#[derive(Debug, Clone)]
pub struct FDecayReport {
    /// Largest `c` with `F(t) <= F(0) exp(-2 c f(xi) t)` on the grid.
    pub c: f64,
    pub fit: DecayFit,
    /// `F` is non-increasing (up to 1e-10 relative slack) from this time on.
    pub monotone_from: f64,
    pub values: Vec<f64>,
}

/// Evaluate `F` along the trajectory and extract the certified decay
/// constant.
pub fn check_f_decay(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    trajectory: &ModeTrajectory,
    functional: &LyapunovFunctional,
) -> Result<FDecayReport> {
    if params.speed_class() == SpeedClass::Equal {
        return Err(Error::EqualSpeeds("F decay needs distinct speeds".into()));
    }
    let xi = trajectory.xi;
    let values: Vec<f64> = trajectory
        .states
        .iter()
        .map(|s| functional.evaluate(params, kernel, xi, s))
        .collect::<Result<_>>()?;
    let f0 = values[0];
    if !(f0 > 0.0) {
        return Err(Error::NonPositive(format!(
            "F(0) = {f0} must be positive for a decay fit"
        )));
    }
    let f_xi = f_rate(xi, params.control);
    let mut c = f64::INFINITY;
    for (idx, &t) in trajectory.times.iter().enumerate().skip(1) {
        let ratio = values[idx] / f0;
        let bound = if ratio > 0.0 {
            -ratio.ln() / (2.0 * f_xi * t)
        } else {
            f64::INFINITY
        };
        c = c.min(bound);
    }

    let mut monotone_from = trajectory.times[trajectory.times.len() - 1];
    for idx in (1..values.len()).rev() {
        if values[idx] <= values[idx - 1] * (1.0 + 1e-10) {
            monotone_from = trajectory.times[idx - 1];
        } else {
            break;
        }
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = trajectory
        .times
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v > 1e-280)
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    let line = linear_fit(&xs, &ys)?;
    let fit = DecayFit {
        rate: -line.slope,
        window: (xs[0], xs[xs.len() - 1]),
        r_squared: line.r_squared,
        kind: DecayKind::ExponentialInT,
    };

    Ok(FDecayReport {
        c,
        fit,
        monotone_from,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_symbol, InitialProfile};
    use crate::ode::{evolve_mode, IntegratorConfig};

    fn spec_example_params() -> ModelParams {
        ModelParams {
            rho1: 1.0,
            rho2: 2.0,
            rho3: 1.0,
            k0: 1.0,
            k1: 1.0,
            k2: 3.0,
            k3: 2.0,
            gamma: 1.0,
            l: 1.0,
            control: Control::Damping,
        }
    }

    fn reference_damping() -> ModelParams {
        ModelParams {
            rho1: 1.0,
            rho2: 2.0,
            rho3: 5.0,
            k0: 1.0,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            gamma: 0.5,
            l: 1.0,
            control: Control::Damping,
        }
    }

    #[test]
    fn energy_examples() {
        let p = ModelParams {
            rho2: 1.0,
            rho3: 1.0,
            k2: 1.0,
            k3: 1.0,
            gamma: 1.0,
            ..reference_damping()
        };
        let zero = SpectralState::zero(Control::Damping);
        assert_eq!(energy(&p, None, 1.0, &zero).total, 0.0);

        let mut unit = SpectralState::zero(Control::Damping);
        for slot in unit.hat.iter_mut() {
            *slot = C64::new(1.0, 0.0);
        }
        assert!((energy(&p, None, 0.3, &unit).total - 3.5).abs() < 1e-15);

        let pm = ModelParams {
            control: Control::Memory,
            ..p
        };
        let kernel = KernelParams::new(0.25, 0.5);
        let mut jonly = SpectralState::zero(Control::Memory);
        jonly.mem = Some(MemoryMoments {
            m: C64::new(0.0, 0.0),
            j: 1.0,
        });
        let e = energy(&pm, Some(&kernel), 2.0, &jonly);
        assert!((e.total - 8.0).abs() < 1e-15);
        assert_eq!(e.parts[7], e.total);
    }

    #[test]
    fn energy_equivalence_on_random_states() {
        let p = reference_damping();
        let (c1, c2) = energy_equivalence_bounds(&p, None);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s = sample_state(&mut rng, Control::Damping, None, 1.0);
            let e = energy(&p, None, 1.3, &s).total;
            let u2 = s.modulus_sq(1.3);
            assert!(c1 * u2 <= e * (1.0 + 1e-12));
            assert!(e <= c2 * u2 * (1.0 + 1e-12));
        }
        // memory variant, including the J term with its 1/2 weight ratio
        let pm = ModelParams {
            control: Control::Memory,
            ..p
        };
        let kernel = KernelParams::new(0.25, 0.5);
        let (c1m, c2m) = energy_equivalence_bounds(&pm, Some(&kernel));
        for _ in 0..1000 {
            let s = sample_state(&mut rng, Control::Memory, None, kernel.g0());
            let e = energy(&pm, Some(&kernel), 0.8, &s).total;
            let u2 = s.modulus_sq(0.8);
            assert!(c1m * u2 <= e * (1.0 + 1e-12));
            assert!(e <= c2m * u2 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn selection_refuses_equal_speeds() {
        let p = ModelParams {
            rho2: 1.0,
            k2: 1.0,
            ..reference_damping()
        };
        assert!(matches!(
            select_lambdas(&p, None, 1.0),
            Err(Error::EqualSpeeds(_))
        ));
    }

    #[test]
    fn selection_matches_independent_evaluation() {
        // frozen from a scripted evaluation of the selection formulas
        let c = select_lambdas(&spec_example_params(), None, 1.0).unwrap();
        let expect = [
            -1.6818181818181825,
            -0.5,
            5.0,
            1.1818181818181817,
            3.3181818181818175,
            -1.3636363636363633,
            8.0,
            -10.363636363636363,
            5.1818181818181825,
            -6.6818181818181825,
        ];
        for (idx, want) in expect.iter().enumerate() {
            assert!(
                (c.lambda[idx] - want).abs() <= 1e-12 * want.abs().max(1.0),
                "lambda_{}: got {}, want {}",
                idx + 1,
                c.lambda[idx],
                want
            );
        }
        assert!((c.b0 - 0.5).abs() < 1e-12);
        assert!((c.b_tilde[0] - 1.5).abs() < 1e-12);
        assert!((c.b_tilde[2] - 6.0).abs() < 1e-12);
        assert!(c.positivity_violations().is_empty());
        for r in c.identity_residuals(1.0) {
            assert!(r <= 1e-10, "identity residual {r:.3e}");
        }
        // A7 vanishes by construction
        assert!(c.a[6].abs() < 1e-12);
    }

    #[test]
    fn memory_selection_b7_equals_rho3_lambda3_at_half_mass() {
        let p = ModelParams {
            control: Control::Memory,
            ..spec_example_params()
        };
        // g0 = k3/2 = 1
        let kernel = KernelParams::new(0.5, 0.5);
        let c = select_lambdas(&p, Some(&kernel), 1.0).unwrap();
        assert!((c.lambda[10] - 2.0 * c.lambda[2] / 1.0).abs() < 1e-12);
        assert!((c.b[6] - p.rho3 * c.lambda[2]).abs() < 1e-12);
        assert!(c.b[6] > 0.0);
        assert!(c.positivity_violations().is_empty());
        for r in c.identity_residuals(p.l) {
            assert!(r <= 1e-10, "identity residual {r:.3e}");
        }
    }

    #[test]
    fn identity_suite_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..25 {
            let mut draw = || 0.2 * (5.0f64 / 0.2).powf(rng.gen::<f64>());
            let mut p = ModelParams {
                rho1: draw(),
                rho2: draw(),
                rho3: draw(),
                k0: draw(),
                k1: draw(),
                k2: draw(),
                k3: draw(),
                gamma: draw(),
                l: draw(),
                control: Control::Damping,
            };
            let s1 = p.k1 / p.rho1;
            let s2 = p.k2 / p.rho2;
            if (s1 - s2).abs() < 0.01 * s1.max(s2) {
                p.k2 *= 1.7;
            }
            for xi in [0.1, 1.0, 10.0] {
                let c = select_lambdas(&p, None, xi).unwrap();
                for r in c.identity_residuals(p.l) {
                    assert!(r <= 1e-10, "residual {r:.3e} at xi={xi}");
                }
                assert!(c.positivity_violations().is_empty());
                assert!(c.b0 > 0.0);
            }
        }
    }

    #[test]
    fn cross_term_derivative_matches_finite_difference() {
        // evolve a tiny horizon and difference F0 numerically
        for (params, kernel) in [
            (reference_damping(), None),
            (
                ModelParams {
                    control: Control::Memory,
                    ..reference_damping()
                },
                Some(KernelParams::new(0.25, 0.5)),
            ),
        ] {
            let xi = 1.1;
            let coeffs = select_lambdas(&params, kernel.as_ref(), xi).unwrap();
            let sym = assemble_symbol(&params, kernel.as_ref(), xi).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let g0 = kernel.map(|k| k.g0()).unwrap_or(1.0);
            let state0 = sample_state(&mut rng, params.control, Some((xi, params.l)), g0);
            let cfg = IntegratorConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                ..Default::default()
            };
            let h = 1e-4;
            let grid = [0.0, h, 2.0 * h, 3.0 * h, 4.0 * h];
            let traj = evolve_mode(&sym, kernel.as_ref(), &state0, &grid, &cfg).unwrap();
            let f0s: Vec<f64> = traj
                .states
                .iter()
                .map(|s| cross_term(&coeffs, &params, s))
                .collect();
            // fourth-order central difference at the middle node
            let fd = (f0s[0] - 8.0 * f0s[1] + 8.0 * f0s[3] - f0s[4]) / (12.0 * h);
            let formula = cross_term_derivative(&coeffs, &params, kernel.as_ref(), &traj.states[2]);
            let scale = fd.abs().max(formula.abs()).max(1e-6);
            assert!(
                (fd - formula).abs() <= 1e-5 * scale,
                "{:?}: fd {fd} vs formula {formula}",
                params.control
            );
        }
    }

    #[test]
    fn dissipation_residual_conservative_and_damped() {
        let p = reference_damping();
        let sym = assemble_symbol(&p, None, 1.0).unwrap();
        let profile = InitialProfile::PointMode { component: THETA };
        let state0 = profile.spectrum(1.0, Control::Damping);
        let dt = 1e-3;
        let grid: Vec<f64> = (0..=2000).map(|k| k as f64 * dt).collect();
        let cfg = IntegratorConfig::default();
        let traj = evolve_mode(&sym, None, &state0, &grid, &cfg).unwrap();
        let res = dissipation_residual(&traj, &p, None).unwrap();
        assert!(res.max_normalized <= 1e-6, "residual {}", res.max_normalized);
    }

    #[test]
    fn dissipation_residual_needs_enough_points() {
        let p = reference_damping();
        let sym = assemble_symbol(&p, None, 1.0).unwrap();
        let state0 = InitialProfile::constrained_gaussian(1.0, p.l).spectrum(1.0, p.control);
        let traj = evolve_mode(
            &sym,
            None,
            &state0,
            &[0.0, 0.1, 0.2, 0.3],
            &Default::default(),
        )
        .unwrap();
        assert!(matches!(
            dissipation_residual(&traj, &p, None),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn lyapunov_f_basics() {
        let p = reference_damping();
        let xi = 1.0;
        let func = build_lyapunov(&p, None, xi).unwrap();
        assert!(func.lambda > 0.0);

        let zero = SpectralState::zero(Control::Damping);
        assert_eq!(func.evaluate(&p, None, xi, &zero).unwrap(), 0.0);
        assert!(matches!(
            func.evaluate(&p, None, 2.0, &zero),
            Err(Error::MismatchedXi { .. })
        ));

        // equivalence band on fresh random states
        let (lo, hi) = func.equivalence_band();
        assert!(lo > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let s = sample_state(&mut rng, Control::Damping, None, 1.0);
            let e = energy(&p, None, xi, &s).total;
            if e < 1e-12 {
                continue;
            }
            let f = func.evaluate(&p, None, xi, &s).unwrap();
            assert!(f >= lo * e - 1e-12 && f <= hi * e + 1e-12);
        }
    }

    #[test]
    fn f_decays_along_damped_trajectory() {
        let p = reference_damping();
        let xi = 1.0;
        let func = build_lyapunov(&p, None, xi).unwrap();
        let sym = assemble_symbol(&p, None, xi).unwrap();
        let profile = InitialProfile::constrained_gaussian(1.0, p.l);
        let state0 = profile.spectrum(xi, Control::Damping);
        let grid: Vec<f64> = (0..=60).map(|k| k as f64 * 0.5).collect();
        let traj = evolve_mode(&sym, None, &state0, &grid, &Default::default()).unwrap();
        let report = check_f_decay(&p, None, &traj, &func).unwrap();
        assert!(report.c > 0.0, "c = {}", report.c);
        assert!(report.monotone_from <= 1.0, "monotone from {}", report.monotone_from);
    }
}
