//! Eigenvalue-based stability classification, the equal-speed instability
//! certificate, and pointwise decay-rate fitting against the envelope
//! `exp(-c f(xi) t)`.
//!
//! Every symbol `A(xi)` is singular: the combination
//! `q = i xi p - v - z - l phi` is conserved, so `-A` always carries one
//! structural zero eigenvalue whose eigenvector lies off the physical
//! subspace `q = 0`. The reported spectral abscissa excludes that mode;
//! decay statements concern the invariant physical subspace.

use crate::error::Error;
use crate::expm::{propagator, EigBasis};
use crate::fit::{linear_fit, DecayFit, DecayKind};
use crate::model::{
    assemble_symbol, f_rate, FourierSymbol, InitialProfile, KernelParams, ModelParams,
    SpeedClass, THETA,
};
use crate::ode::ModeTrajectory;
use crate::{Result, C64};
use ndarray::Array1;
use rayon::prelude::*;

/// Eigenvalues with `|Re|` below this are classified as neutral.
pub const NEUTRAL_TOL: f64 = 1e-10;
/// Eigenpair residual bound delivered by dense double-precision solvers on
/// these matrix sizes (for symbols of moderate norm).
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Eigenvalue of `-A(xi)`.
    pub value: C64,
    /// Unit-norm eigenvector.
    pub vector: Vec<C64>,
    /// `|| (-A - value I) vector || / || vector ||`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub xi: f64,
    pub pairs: Vec<EigenPair>,
    /// Max real part excluding the structural zero mode.
    pub spectral_abscissa: f64,
    /// Index of the structural kernel mode (smallest `|value|`).
    pub structural_zero: usize,
    /// Indices with `|Re value| < NEUTRAL_TOL`.
    pub neutral_modes: Vec<usize>,
    /// Largest eigenpair residual.
    pub max_residual: f64,
}

impl SpectrumReport {
    /// Residual tolerance achievable in f64: `1e-8` or the rounding floor of
    /// the symbol norm, whichever is larger.
    pub fn residual_tol(&self, symbol_norm: f64) -> f64 {
        EIG_RESIDUAL_TOL.max(100.0 * f64::EPSILON * symbol_norm)
    }
}

/// Frobenius norm of a symbol, used to scale residual tolerances.
pub fn symbol_norm(symbol: &FourierSymbol) -> f64 {
    symbol
        .matrix
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Dense eigendecomposition of `-A(xi)` with residual verification.
pub fn mode_spectrum(symbol: &FourierSymbol) -> Result<SpectrumReport> {
    let basis = EigBasis::new(symbol)?;
    let n = symbol.dim();
    let neg = symbol.matrix.mapv(|x| -x);
    let mut pairs = Vec::with_capacity(n);
    let mut max_residual = 0.0f64;
    for idx in 0..n {
        let value = basis.mu[idx];
        let vector: Vec<C64> = basis.vectors.column(idx).to_vec();
        let vec_arr = Array1::from_vec(vector.clone());
        let resid_vec = neg.dot(&vec_arr) - vec_arr.mapv(|x| x * value);
        let vnorm: f64 = vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let residual =
            resid_vec.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / vnorm.max(1e-300);
        max_residual = max_residual.max(residual);
        pairs.push(EigenPair {
            value,
            vector,
            residual,
        });
    }

    let structural_zero = pairs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.value.norm().total_cmp(&b.value.norm()))
        .map(|(idx, _)| idx)
        .expect("symbol has at least one eigenvalue");
    let spectral_abscissa = pairs
        .iter()
        .enumerate()
        .filter(|(idx, _)| *idx != structural_zero)
        .map(|(_, p)| p.value.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let neutral_modes = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.value.re.abs() < NEUTRAL_TOL)
        .map(|(idx, _)| idx)
        .collect();

    Ok(SpectrumReport {
        xi: symbol.xi,
        pairs,
        spectral_abscissa,
        structural_zero,
        neutral_modes,
        max_residual,
    })
}

/// The frequency at which the equal-speed systems keep a purely imaginary
/// eigenvalue: `sqrt(k1/rho1) xi` away from the origin, and
/// `sqrt(k0 (1/rho1 + 1/rho2))` at `xi = 0`.
pub fn neutral_frequency(params: &ModelParams, xi: f64) -> f64 {
    if xi != 0.0 {
        (params.k1 / params.rho1).sqrt() * xi
    } else {
        (params.k0 * (1.0 / params.rho1 + 1.0 / params.rho2)).sqrt()
    }
}

/// Closed-form history moments of the stationary profile
/// `eta(s) = (1 - exp(-i lambda s)) theta / (i lambda)`:
/// returns `(m, J)` integrated against the exponential kernel.
pub fn history_moments(theta: C64, lambda: f64, kernel: &KernelParams) -> (C64, f64) {
    let g0 = kernel.g0();
    let gtilde = C64::new(g0, 0.0) - kernel.laplace_at(lambda);
    let m = theta * gtilde / C64::new(0.0, lambda);
    let j = theta.norm_sqr() / (lambda * lambda)
        * (2.0 * g0 - 2.0 * kernel.d1 * kernel.d2 / (kernel.d2 * kernel.d2 + lambda * lambda));
    (m, j)
}

/// A verified non-decay witness for the equal-speed case.
#[derive(Debug, Clone)]
pub struct InstabilityCertificate {
    pub xi: f64,
    /// The neutral temporal frequency `lambda`.
    pub lambda: f64,
    /// The matched eigenvalue of `-A(xi)` (close to `i lambda`).
    pub eigenvalue: C64,
    pub eigenvector: Vec<C64>,
    pub eig_residual: f64,
    /// Initial memory energy moment attached to the eigenvector.
    pub j_moment: f64,
    /// Sampled witness times.
    pub witness_times: Vec<f64>,
    /// `max | |U(t)| / |U(0)| - 1 |` over the witness times.
    pub witness_drift: f64,
}

/// Produce the neutral eigenpair at the frequency predicted for equal wave
/// speeds and verify by simulation that its modulus stays within 1% over
/// `t <= 1e4`. Refuses distinct-speed parameters.
pub fn instability_certificate(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    xi: f64,
) -> Result<InstabilityCertificate> {
    if params.speed_class() == SpeedClass::Distinct {
        return Err(Error::DistinctSpeeds(
            "instability certificate applies to equal wave speeds only".into(),
        ));
    }
    let symbol = assemble_symbol(params, kernel, xi)?;
    let report = mode_spectrum(&symbol)?;
    let lambda = neutral_frequency(params, xi);
    let target = C64::new(0.0, lambda);
    let pair = report
        .pairs
        .iter()
        .min_by(|a, b| {
            (a.value - target)
                .norm()
                .total_cmp(&(b.value - target).norm())
        })
        .expect("spectrum is nonempty")
        .clone();
    if pair.value.re.abs() > NEUTRAL_TOL {
        return Err(Error::Eig(format!(
            "matched eigenvalue {} is not neutral",
            pair.value
        )));
    }

    // Memory energy attached to the eigenvector through the stationary
    // history profile (zero whenever the theta component vanishes).
    let j_moment = match (params.control, kernel) {
        (crate::model::Control::Memory, Some(k)) => {
            history_moments(pair.vector[THETA], lambda, k).1
        }
        _ => 0.0,
    };

    // Simulation witness over a dyadic ladder up to 1e4.
    let mut witness_times = Vec::new();
    let mut t = 1.0;
    while t < 1e4 {
        witness_times.push(t);
        t *= 2.0;
    }
    witness_times.push(1e4);

    let u0 = Array1::from_vec(pair.vector.clone());
    let base_mod = {
        let block: f64 = u0.iter().map(|c| c.norm_sqr()).sum();
        (block + xi.powi(4) * j_moment).sqrt()
    };
    let mut witness_drift = 0.0f64;
    for &tw in &witness_times {
        let m = propagator(&symbol, tw)?;
        let ut = m.dot(&u0);
        let block: f64 = ut.iter().map(|c| c.norm_sqr()).sum();
        let modulus = (block + xi.powi(4) * j_moment).sqrt();
        witness_drift = witness_drift.max((modulus / base_mod - 1.0).abs());
    }

    Ok(InstabilityCertificate {
        xi,
        lambda,
        eigenvalue: pair.value,
        eigenvector: pair.vector,
        eig_residual: pair.residual,
        j_moment,
        witness_times,
        witness_drift,
    })
}

/// Least-squares fit of `log |U(t)|` on the tail of a trajectory; the tail
/// starts after the slowest linearized oscillation period (estimated from
/// the imaginary parts of the spectrum) to skip the transient.
pub fn fit_pointwise_decay(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    trajectory: &ModeTrajectory,
) -> Result<DecayFit> {
    if params.speed_class() == SpeedClass::Equal {
        return Err(Error::EqualSpeeds(
            "pointwise decay fit needs distinct speeds".into(),
        ));
    }
    let xi = trajectory.xi;
    let symbol = assemble_symbol(params, kernel, xi)?;
    let spectrum = mode_spectrum(&symbol)?;
    let min_im = spectrum
        .pairs
        .iter()
        .map(|p| p.value.im.abs())
        .filter(|im| *im > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let period = if min_im.is_finite() {
        2.0 * std::f64::consts::PI / min_im
    } else {
        0.0
    };
    let t_end = *trajectory.times.last().unwrap();
    let window_start = (4.0 * period).min(t_end / 2.0).max(t_end / 16.0);

    let (xs, ys): (Vec<f64>, Vec<f64>) = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .filter(|(&t, s)| t >= window_start && s.modulus_sq(xi) > 1e-280)
        .map(|(&t, s)| (t, 0.5 * s.modulus_sq(xi).ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: xs.len(),
        });
    }
    let line = linear_fit(&xs, &ys)?;
    let rate = -line.slope;
    if !(rate > 0.0) {
        return Err(Error::DecayAnomaly(format!(
            "fitted rate {rate} at xi={xi} is not positive"
        )));
    }
    Ok(DecayFit {
        rate,
        window: (xs[0], *xs.last().unwrap()),
        r_squared: line.r_squared,
        kind: DecayKind::ExponentialInT,
    })
}

/// One row of the rate curve.
#[derive(Debug, Clone, Copy)]
pub struct RatePoint {
    pub xi: f64,
    pub rate: f64,
    pub f_xi: f64,
    /// `rate / f(xi)`.
    pub ratio: f64,
    pub r_squared: f64,
    /// Physical spectral abscissa (structural mode excluded).
    pub abscissa: f64,
}

/// Measure the pointwise decay rate across a frequency grid by evolving
/// constrained flat-spectrum data with the matrix-exponential path over a
/// horizon of roughly fourteen e-folds per mode.
pub fn rate_curve(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    xi_grid: &[f64],
) -> Result<Vec<RatePoint>> {
    if params.speed_class() == SpeedClass::Equal {
        return Err(Error::EqualSpeeds(
            "rate curve needs distinct speeds".into(),
        ));
    }
    let profile = InitialProfile::constrained_flat(params.l);
    let results: Vec<Result<RatePoint>> = xi_grid
        .par_iter()
        .map(|&xi| rate_point(params, kernel, &profile, xi))
        .collect();
    results.into_iter().collect()
}

fn rate_point(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    profile: &InitialProfile,
    xi: f64,
) -> Result<RatePoint> {
    let symbol = assemble_symbol(params, kernel, xi)?;
    let spectrum = mode_spectrum(&symbol)?;
    let abscissa = spectrum.spectral_abscissa;

    // The eigenvalue real parts carry absolute error ~eps ||A||, which can
    // exceed the true rate at large xi; the abscissa is only a first guess
    // and the horizon is adapted until the modulus drops by ~14 e-folds.
    let mut rate_est = (-abscissa).max(1e-3 * f_rate(xi, params.control)).max(1e-300);
    let state0 = profile.spectrum(xi, params.control);
    let base_sq = state0.modulus_sq(xi).max(1e-300);
    let steps = 16usize;
    let basis = EigBasis::new(&symbol)?;
    let coeffs = basis.coefficients(&state0.complex_block()).ok();
    let d2 = kernel.map(|k| k.d2);

    let mut samples: Option<(Vec<f64>, Vec<f64>)> = None;
    for _attempt in 0..64 {
        let horizon = 14.0 / rate_est;
        let dt = horizon / steps as f64;
        let m = propagator(&symbol, dt)?;
        let mut u = Array1::from_vec(state0.complex_block());
        let mut ts = Vec::with_capacity(steps);
        let mut logs = Vec::with_capacity(steps);
        let mut end_sq = 0.0;
        for step in 1..=steps {
            let t = step as f64 * dt;
            u = m.dot(&u);
            let mut mod_sq: f64 = u.iter().map(|c| c.norm_sqr()).sum();
            if let (Some(c), Some(d2)) = (&coeffs, d2) {
                if !basis.cond_warning() {
                    mod_sq += xi.powi(4) * basis.j_moment_at(c, t, 0.0, d2);
                }
            }
            end_sq = mod_sq;
            if step > steps / 2 && mod_sq > 1e-280 {
                ts.push(t);
                logs.push(0.5 * mod_sq.ln());
            }
        }
        let drop = -0.5 * (end_sq / base_sq).max(1e-300).ln(); // e-folds seen
        if (8.0..28.0).contains(&drop) && ts.len() >= 3 {
            samples = Some((ts, logs));
            break;
        }
        // rescale the horizon from the measured drop
        rate_est = if drop > 1e-6 {
            rate_est * drop / 14.0
        } else {
            rate_est / 32.0
        };
    }
    let (ts, logs) = samples.ok_or_else(|| {
        Error::DecayAnomaly(format!("no usable decay window found at xi={xi}"))
    })?;
    let line = linear_fit(&ts, &logs)?;
    let rate = -line.slope;
    if !(rate > 0.0) {
        return Err(Error::DecayAnomaly(format!(
            "fitted rate {rate} at xi={xi} is not positive"
        )));
    }
    let f_xi = f_rate(xi, params.control);
    Ok(RatePoint {
        xi,
        rate,
        f_xi,
        ratio: rate / f_xi,
        r_squared: line.r_squared,
        abscissa,
    })
}

/// Log-log slopes of the rate curve on the low branch (`xi in [0.03, 0.3]`)
/// and the high branch (`xi in [3, 30]`).
pub fn branch_slopes(points: &[RatePoint]) -> Result<(f64, f64)> {
    let fit_branch = |lo: f64, hi: f64| -> Result<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|p| p.xi >= lo && p.xi <= hi)
            .map(|p| (p.xi.ln(), p.rate.ln()))
            .unzip();
        Ok(linear_fit(&xs, &ys)?.slope)
    };
    Ok((fit_branch(0.03, 0.3)?, fit_branch(3.0, 30.0)?))
}

/// Log-spaced grid used by the rate curve.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let llo = lo.ln();
    let lhi = hi.ln();
    (0..n)
        .map(|k| (llo + (lhi - llo) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
