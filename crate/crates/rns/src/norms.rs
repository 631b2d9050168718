//! Plancherel-based norm pipeline: `||d^j U/dx^j||_2`, the weighted norm
//! `||x d^j U/dx^j||_2`, the Carlson L^1 bound, direct L^q norms through an
//! inverse discrete transform, and power-law slope fitting.
//!
//! The quadrature grid is a smooth sinh-graded map: nodes `xi = a sinh(u)`
//! with `u` uniform, which is log-spaced for `|xi| >> a` and linear inside
//! `|xi| <~ a`. Midpoint weights in the mapped coordinate make the rule
//! spectrally accurate for smooth decaying integrands, which is what the
//! planted-Gaussian recovery bound (1e-8) requires; node zero is excluded.
//!
//! Norms always carry the transform convention `||h||_2^2 =
//! (1/2pi) ∫ |h_hat|^2`. The modulus entering `l2_norm` includes the memory
//! energy `xi^4 J`; the reconstructable component set used for L^q replaces
//! it with the moment field `xi^2 m`, which is the part of the memory the
//! closed system tracks with a phase.

use crate::error::Error;
use crate::expm::dyadic_mode_ladder;
use crate::fit::{linear_fit, DecayFit, DecayKind};
use crate::model::{
    assemble_symbol, Control, InitialProfile, KernelParams, MemoryMoments, ModelParams,
    SpectralState, M, NCOMP,
};
use crate::ode::sensitivity_forcing;
use crate::{Result, C64};
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Symmetric sinh-graded quadrature grid, zero excluded.
#[derive(Debug, Clone)]
pub struct XiGrid {
    /// Ascending nodes, negative then positive, symmetric about zero.
    pub nodes: Vec<f64>,
    /// Positive quadrature weights (midpoint rule in the graded coordinate).
    pub weights: Vec<f64>,
    /// Linear-refinement scale: spacing is ~`a du` inside `|xi| < a`.
    pub linear_scale: f64,
    pub xi_max: f64,
}

impl XiGrid {
    /// Standard grid: `n` nodes total covering `|xi|` up to `xi_max`, with
    /// linear refinement on the scale `linear_scale` around zero.
    pub fn standard(n: usize, xi_max: f64, linear_scale: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParams(vec![format!(
                "grid size must be even and >= 8, got {n}"
            )]));
        }
        let half = n / 2;
        let a = linear_scale;
        let u_max = (xi_max / a).asinh();
        let du = u_max / half as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for idx in (0..half).rev() {
            let u = (idx as f64 + 0.5) * du;
            nodes.push(-a * u.sinh());
            weights.push(du * (a * a + (a * u.sinh()).powi(2)).sqrt());
        }
        for idx in 0..half {
            let u = (idx as f64 + 0.5) * du;
            nodes.push(a * u.sinh());
            weights.push(du * (a * a + (a * u.sinh()).powi(2)).sqrt());
        }
        Ok(Self {
            nodes,
            weights,
            linear_scale: a,
            xi_max,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f(xi) dxi` over the covered band.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Quadrature of tabulated values, with the mass carried by the
    /// outermost 5% of nodes per side reported separately.
    fn integrate_with_tail(&self, values: &[f64]) -> (f64, f64) {
        let n = self.len();
        let edge = (n / 20).max(1);
        let mut total = 0.0;
        let mut tail = 0.0;
        for (idx, (&w, &v)) in self.weights.iter().zip(values).enumerate() {
            let term = w * v;
            total += term;
            if idx < edge || idx >= n - edge {
                tail += term;
            }
        }
        (total, tail)
    }
}

/// Evolved states (and optionally sensitivities) for every grid node at a
/// shared set of output times.
pub struct SpectralField {
    pub control: Control,
    pub grid: XiGrid,
    pub times: Vec<f64>,
    /// `states[time_idx][node_idx]`.
    pub states: Vec<Vec<SpectralState>>,
    /// `sens[time_idx][node_idx]` complex blocks, when requested.
    pub sens: Option<Vec<Vec<Vec<C64>>>>,
}

impl SpectralField {
    /// Evolve a profile over the dyadic times `{0, 1, 2, 4, ..., 2^k_max}`
    /// with the matrix-exponential ladder.
    pub fn evolve_dyadic(
        params: &ModelParams,
        kernel: Option<&KernelParams>,
        profile: &InitialProfile,
        grid: XiGrid,
        k_max: u32,
        with_sensitivity: bool,
    ) -> Result<Self> {
        let control = params.control;
        let d2 = kernel.map(|k| k.d2);
        let per_node: Vec<Result<Vec<(SpectralState, Option<Vec<C64>>)>>> = grid
            .nodes
            .par_iter()
            .map(|&xi| {
                let symbol = assemble_symbol(params, kernel, xi)?;
                let state0 = profile.spectrum(xi, control);
                let sens0 = profile.spectrum_derivative(xi, control);
                let forcing = with_sensitivity.then(|| sensitivity_forcing(params, kernel, xi));
                let ladder = dyadic_mode_ladder(
                    &symbol,
                    forcing.as_ref(),
                    &state0.complex_block(),
                    with_sensitivity.then_some(&sens0[..]),
                    d2,
                    k_max,
                )?;
                let mut column = Vec::with_capacity(ladder.len() + 1);
                column.push((state0, with_sensitivity.then_some(sens0)));
                for point in ladder {
                    let mut state = SpectralState {
                        hat: [C64::new(0.0, 0.0); NCOMP],
                        mem: None,
                    };
                    state.hat.copy_from_slice(&point.block[..NCOMP]);
                    if control == Control::Memory {
                        state.mem = Some(MemoryMoments {
                            m: point.block[M],
                            j: point.j.unwrap_or(0.0),
                        });
                    }
                    column.push((state, point.sens));
                }
                Ok(column)
            })
            .collect();

        let mut columns = Vec::with_capacity(per_node.len());
        for col in per_node {
            columns.push(col?);
        }
        let mut times = vec![0.0];
        let mut t = 1.0;
        for _ in 0..=k_max {
            times.push(t);
            t *= 2.0;
        }
        let n_times = times.len();
        let n_nodes = grid.len();
        let mut states = vec![Vec::with_capacity(n_nodes); n_times];
        let mut sens = with_sensitivity.then(|| vec![Vec::with_capacity(n_nodes); n_times]);
        for column in columns {
            for (t_idx, (state, s)) in column.into_iter().enumerate() {
                states[t_idx].push(state);
                if let Some(sens) = sens.as_mut() {
                    sens[t_idx].push(s.expect("sensitivity requested"));
                }
            }
        }
        Ok(Self {
            control,
            grid,
            times,
            states,
            sens,
        })
    }

    /// Build a field from closures (planted data for oracle tests).
    pub fn from_samples<F, G>(
        control: Control,
        grid: XiGrid,
        times: Vec<f64>,
        state_fn: F,
        sens_fn: Option<G>,
    ) -> Self
    where
        F: Fn(f64, f64) -> SpectralState,
        G: Fn(f64, f64) -> Vec<C64>,
    {
        let states = times
            .iter()
            .map(|&t| grid.nodes.iter().map(|&xi| state_fn(xi, t)).collect())
            .collect();
        let sens = sens_fn.map(|g| {
            times
                .iter()
                .map(|&t| grid.nodes.iter().map(|&xi| g(xi, t)).collect())
                .collect()
        });
        Self {
            control,
            grid,
            times,
            states,
            sens,
        }
    }

    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&x| x == t)
            .ok_or_else(|| Error::BadTimeGrid(format!("time {t} is not an output time")))
    }

    /// Reconstructable component count: 7 hat fields plus, for the memory
    /// system, the moment field `xi^2 m`.
    pub fn component_count(&self) -> usize {
        match self.control {
            Control::Damping => NCOMP,
            Control::Memory => NCOMP + 1,
        }
    }

    /// Value of reconstructable component `c` at `(node, time)`.
    fn component(&self, t_idx: usize, node_idx: usize, c: usize) -> C64 {
        let state = &self.states[t_idx][node_idx];
        if c < NCOMP {
            state.hat[c]
        } else {
            let xi = self.grid.nodes[node_idx];
            state.mem.map(|mm| mm.m).unwrap_or_default() * (xi * xi)
        }
    }

    /// `d/dxi` of reconstructable component `c` at `(node, time)`.
    fn component_derivative(&self, t_idx: usize, node_idx: usize, c: usize) -> Result<C64> {
        let sens = self
            .sens
            .as_ref()
            .ok_or_else(|| Error::InvalidParams(vec!["field has no sensitivities".into()]))?;
        let s = &sens[t_idx][node_idx];
        if c < NCOMP {
            Ok(s[c])
        } else {
            let xi = self.grid.nodes[node_idx];
            let state = &self.states[t_idx][node_idx];
            let m = state.mem.map(|mm| mm.m).unwrap_or_default();
            Ok(m * (2.0 * xi) + s[M] * (xi * xi))
        }
    }
}

/// Tail-truncation threshold: the outermost node band may carry at most
/// this fraction of the integral.
pub const TAIL_RATIO_MAX: f64 = 1e-6;

/// A norm value together with its quadrature tail diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct NormValue {
    pub value: f64,
    pub tail_ratio: f64,
    pub tail_warning: bool,
}

/// `||d^j U/dx^j||_2` by spectral quadrature; the integrand includes the
/// memory energy `xi^4 J`.
pub fn l2_norm(field: &SpectralField, j: u32, t: f64) -> Result<NormValue> {
    let t_idx = field.time_index(t)?;
    let vals: Vec<f64> = field
        .grid
        .nodes
        .iter()
        .enumerate()
        .map(|(idx, &xi)| xi.powi(2 * j as i32) * field.states[t_idx][idx].modulus_sq(xi))
        .collect();
    let (total, tail) = field.grid.integrate_with_tail(&vals);
    let tail_ratio = if total > 0.0 { tail / total } else { 0.0 };
    Ok(NormValue {
        value: (total / (2.0 * std::f64::consts::PI)).max(0.0).sqrt(),
        tail_ratio,
        tail_warning: tail_ratio > TAIL_RATIO_MAX,
    })
}

/// Same quadrature restricted to the reconstructable components (the set the
/// inverse transform can see); used for Plancherel consistency with the
/// physical-grid norms.
pub fn l2_norm_components(field: &SpectralField, j: u32, t: f64) -> Result<NormValue> {
    let t_idx = field.time_index(t)?;
    let ncomp = field.component_count();
    let vals: Vec<f64> = field
        .grid
        .nodes
        .iter()
        .enumerate()
        .map(|(idx, &xi)| {
            let sum: f64 = (0..ncomp)
                .map(|c| field.component(t_idx, idx, c).norm_sqr())
                .sum();
            xi.powi(2 * j as i32) * sum
        })
        .collect();
    let (total, tail) = field.grid.integrate_with_tail(&vals);
    let tail_ratio = if total > 0.0 { tail / total } else { 0.0 };
    Ok(NormValue {
        value: (total / (2.0 * std::f64::consts::PI)).max(0.0).sqrt(),
        tail_ratio,
        tail_warning: tail_ratio > TAIL_RATIO_MAX,
    })
}

/// `||x d^j U/dx^j||_2` through the Plancherel identity for the
/// xi-derivative: direct quadrature of `|d/dxi (xi^j U_hat)|^2`, expanded as
/// `j xi^{j-1} U_hat + xi^j dU_hat/dxi` per component (no triangle
/// inequality).
pub fn weighted_norm(field: &SpectralField, j: u32, t: f64) -> Result<NormValue> {
    let t_idx = field.time_index(t)?;
    let ncomp = field.component_count();
    let mut vals = Vec::with_capacity(field.grid.len());
    for (idx, &xi) in field.grid.nodes.iter().enumerate() {
        let mut sum = 0.0;
        for c in 0..ncomp {
            let value = field.component(t_idx, idx, c);
            let deriv = field.component_derivative(t_idx, idx, c)?;
            let lead = if j == 0 {
                C64::new(0.0, 0.0)
            } else {
                value * (j as f64) * xi.powi(j as i32 - 1)
            };
            sum += (lead + deriv * xi.powi(j as i32)).norm_sqr();
        }
        vals.push(sum);
    }
    let (total, tail) = field.grid.integrate_with_tail(&vals);
    let tail_ratio = if total > 0.0 { tail / total } else { 0.0 };
    Ok(NormValue {
        value: (total / (2.0 * std::f64::consts::PI)).max(0.0).sqrt(),
        tail_ratio,
        tail_warning: tail_ratio > TAIL_RATIO_MAX,
    })
}

/// Constant in the Carlson inequality
/// `||h||_1 <= sqrt(2 pi) ||h||_2^{1/2} ||x h||_2^{1/2}` (valid for any
/// `h` on the line; the constant-free form fails already for a Gaussian).
pub const CARLSON_CONST: f64 = 2.5066282746310002; // sqrt(2 pi)

/// Carlson product bound for `||d^j U/dx^j||_1`.
pub fn l1_bound(field: &SpectralField, j: u32, t: f64) -> Result<f64> {
    let a = l2_norm(field, j, t)?;
    let b = weighted_norm(field, j, t)?;
    Ok(CARLSON_CONST * (a.value * b.value).sqrt())
}

/// Norm index for the direct physical-space norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormOrder {
    One,
    Two,
    Q(f64),
    Inf,
}

impl NormOrder {
    pub fn label(&self) -> String {
        match self {
            NormOrder::One => "1".into(),
            NormOrder::Two => "2".into(),
            NormOrder::Q(q) => format!("{q}"),
            NormOrder::Inf => "inf".into(),
        }
    }
}

/// Physical-space norms of `d^j U/dx^j` computed by an inverse discrete
/// transform on a uniform frequency grid.
#[derive(Debug, Clone)]
pub struct PhysicalNorms {
    pub j: u32,
    pub t: f64,
    pub values: Vec<(NormOrder, f64)>,
    /// Fraction of the L1 mass in the outer 10% of the periodic window.
    pub boundary_ratio: f64,
    /// Spectral quadrature of the same uniform-grid samples; by the discrete
    /// Parseval identity this equals the physical L2 up to roundoff.
    pub spectral_l2: f64,
    pub grid_len: usize,
    pub xi_cut: f64,
}

impl PhysicalNorms {
    pub fn get(&self, order: NormOrder) -> Option<f64> {
        self.values
            .iter()
            .find(|(o, _)| match (o, &order) {
                (NormOrder::One, NormOrder::One) => true,
                (NormOrder::Two, NormOrder::Two) => true,
                (NormOrder::Inf, NormOrder::Inf) => true,
                (NormOrder::Q(a), NormOrder::Q(b)) => (a - b).abs() < 1e-12,
                _ => false,
            })
            .map(|(_, v)| *v)
    }
}

/// Settings for the inverse-transform evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ReconstructionSpec {
    /// Hard cap on the uniform grid size.
    pub max_nodes: usize,
    /// Spectral cutoff threshold relative to the peak integrand.
    pub spectrum_floor: f64,
    /// Padding (in units of sigma) added to the ballistic support estimate.
    pub support_pad: f64,
}

impl Default for ReconstructionSpec {
    fn default() -> Self {
        Self {
            max_nodes: 1 << 22,
            spectrum_floor: 1e-28,
            support_pad: 40.0,
        }
    }
}

/// Largest group speed over the covered band: the wave branches travel at
/// `sqrt(k1/rho1)`, `sqrt(k2/rho2)`; the beam branch at `2 sqrt(k3/rho3) xi`.
fn max_group_speed(params: &ModelParams, kernel: Option<&KernelParams>, xi_cut: f64) -> f64 {
    let s1 = (params.k1 / params.rho1).sqrt();
    let s2 = (params.k2 / params.rho2).sqrt();
    let s3 = 2.0 * (params.k3_eff(kernel).max(0.0) / params.rho3).sqrt() * xi_cut;
    let s0 = (params.k0 * (1.0 / params.rho1 + 1.0 / params.rho2)).sqrt();
    s1.max(s2).max(s3).max(s0)
}

fn spectral_cutoff(profile: &InitialProfile, j: u32, floor: f64) -> Result<f64> {
    match profile {
        InitialProfile::Gaussian { sigma, .. } => {
            // solve xi^{2(j+3)} exp(-sigma^2 xi^2) < floor * peak by scanning
            let p = 2.0 * (j as f64 + 3.0);
            let peak_xi = (p / 2.0).sqrt() / sigma;
            let log_peak = p * peak_xi.ln() - (sigma * peak_xi).powi(2);
            let mut xi = (2.0 * peak_xi).max(4.0 / sigma);
            for _ in 0..64 {
                let val = p * xi.ln() - (sigma * xi).powi(2);
                if val < log_peak + floor.ln() {
                    return Ok(xi);
                }
                xi *= 1.25;
            }
            Ok(xi)
        }
        _ => Err(Error::Resolution(
            "physical reconstruction needs a decaying spectrum (Gaussian profile)".into(),
        )),
    }
}

/// Reconstruct `d^j U/dx^j` on a uniform physical grid at one time and
/// compute its direct L^q norms. The uniform frequency spacing is chosen
/// from the ballistic support (`Delta xi <= pi / x_max`), and the fraction
/// of mass reaching the periodic boundary is checked against 1e-6.
pub fn reconstruct_norms(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    profile: &InitialProfile,
    j: u32,
    t: f64,
    orders: &[NormOrder],
    spec: &ReconstructionSpec,
) -> Result<PhysicalNorms> {
    let sigma = match profile {
        InitialProfile::Gaussian { sigma, .. } => *sigma,
        _ => 1.0,
    };
    let xi_cut = spectral_cutoff(profile, j, spec.spectrum_floor)?;
    let v_max = max_group_speed(params, kernel, xi_cut);
    let x_half = v_max * t + spec.support_pad * sigma;
    let d_xi_target = (std::f64::consts::PI / x_half).min(xi_cut / 512.0);
    let mut m_nodes = (2.0 * xi_cut / d_xi_target).ceil() as usize;
    m_nodes = m_nodes.next_power_of_two();
    if m_nodes > spec.max_nodes {
        return Err(Error::Resolution(format!(
            "reconstruction at t={t} needs {m_nodes} nodes (cap {})",
            spec.max_nodes
        )));
    }
    let d_xi = 2.0 * xi_cut / m_nodes as f64;
    let d_x = 2.0 * std::f64::consts::PI / (m_nodes as f64 * d_xi);

    let control = params.control;
    let ncomp = match control {
        Control::Damping => NCOMP,
        Control::Memory => NCOMP + 1,
    };

    // spectra on the uniform grid, evolved per node
    let spectra: Vec<Result<Vec<C64>>> = (0..m_nodes)
        .into_par_iter()
        .map(|k| {
            let xi = -xi_cut + (k as f64 + 0.5) * d_xi;
            let symbol = assemble_symbol(params, kernel, xi)?;
            let state0 = profile.spectrum(xi, control);
            let block = if t == 0.0 {
                state0.complex_block()
            } else {
                let m = crate::expm::propagator(&symbol, t)?;
                let u0 = ndarray::Array1::from_vec(state0.complex_block());
                m.dot(&u0).to_vec()
            };
            let mut comps = Vec::with_capacity(ncomp);
            let scale = C64::new(0.0, xi).powu(j);
            for c in 0..NCOMP {
                comps.push(block[c] * scale);
            }
            if control == Control::Memory {
                comps.push(block[M] * (xi * xi) * scale);
            }
            Ok(comps)
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(m_nodes);
    let mut modulus_sq = vec![0.0f64; m_nodes];
    let mut buffer = vec![C64::new(0.0, 0.0); m_nodes];
    let norm_factor = d_xi / (2.0 * std::f64::consts::PI);
    let mut spectral_mass = 0.0f64;
    for c in 0..ncomp {
        for (k, row) in spectra.iter().enumerate() {
            match row {
                Ok(vals) => buffer[k] = vals[c],
                Err(e) => return Err(Error::Eig(e.to_string())),
            }
        }
        spectral_mass += buffer.iter().map(|c| c.norm_sqr()).sum::<f64>();
        fft.process(&mut buffer);
        for (out, acc) in buffer.iter().zip(modulus_sq.iter_mut()) {
            // the half-offset grid start only shifts phases, not moduli
            *acc += (out * norm_factor).norm_sqr();
        }
    }
    let spectral_l2 = (spectral_mass * d_xi / (2.0 * std::f64::consts::PI)).sqrt();

    let total_l1: f64 = modulus_sq.iter().map(|&m| m.sqrt()).sum::<f64>() * d_x;
    let edge = m_nodes / 20;
    let boundary_l1: f64 = modulus_sq[m_nodes / 2 - edge..m_nodes / 2 + edge]
        .iter()
        .map(|&m| m.sqrt())
        .sum::<f64>()
        * d_x;
    let boundary_ratio = if total_l1 > 0.0 {
        boundary_l1 / total_l1
    } else {
        0.0
    };
    if boundary_ratio > TAIL_RATIO_MAX {
        return Err(Error::Resolution(format!(
            "aliasing detected at t={t}: boundary mass ratio {boundary_ratio:.3e}"
        )));
    }

    let mut values = Vec::with_capacity(orders.len());
    for &order in orders {
        let v = match order {
            NormOrder::One => total_l1,
            NormOrder::Two => (modulus_sq.iter().sum::<f64>() * d_x).sqrt(),
            NormOrder::Inf => modulus_sq.iter().cloned().fold(0.0f64, f64::max).sqrt(),
            NormOrder::Q(q) => (modulus_sq
                .iter()
                .map(|&m| m.sqrt().powf(q))
                .sum::<f64>()
                * d_x)
                .powf(1.0 / q),
        };
        values.push((order, v));
    }
    Ok(PhysicalNorms {
        j,
        t,
        values,
        boundary_ratio,
        spectral_l2,
        grid_len: m_nodes,
        xi_cut,
    })
}

/// A time series of one norm.
#[derive(Debug, Clone)]
pub struct NormSeries {
    pub j: u32,
    pub order: NormOrder,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Least-squares slope of `log(value)` against `log(1 + t)` over a window.
pub fn fit_time_slope(series: &NormSeries, window: (f64, f64)) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in series.times.iter().zip(&series.values) {
        if t >= window.0 && t <= window.1 {
            if !(v > 0.0) {
                return Err(Error::NonPositive(format!(
                    "norm value {v} at t={t} inside the fit window"
                )));
            }
            xs.push((1.0 + t).ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: xs.len(),
        });
    }
    let line = linear_fit(&xs, &ys)?;
    Ok(DecayFit {
        rate: line.slope,
        window,
        r_squared: line.r_squared,
        kind: DecayKind::PowerLawInT,
    })
}

/// L^1 decay exponents (only defined for `j >= 4 + 2 tau0`).
#[derive(Debug, Clone, Copy)]
pub struct L1Exponents {
    /// Coefficient of `||x U0||_1`.
    pub tilde_term: f64,
    /// Coefficient of `||U0||_1` (may be positive: a growing bound).
    pub growing_term: f64,
    /// Coefficient of the Sobolev block.
    pub reg_term: f64,
    /// Least negative of the three.
    pub dominant: f64,
}

/// L^1 exponent triple for derivative order `j` and regularity offset `ell`.
pub fn l1_exponents(j: u32, ell: u32, control: Control) -> Result<L1Exponents> {
    let j_min = match control {
        Control::Damping => 4,
        Control::Memory => 6,
    };
    if j < j_min {
        return Err(Error::OrderOutOfRange(format!(
            "the L1 estimate needs j >= {j_min}, got {j}"
        )));
    }
    if ell < 1 {
        return Err(Error::OrderOutOfRange("ell must be >= 1".into()));
    }
    let (tilde, growing, reg) = match control {
        Control::Damping => (
            -0.125 - j as f64 / 4.0,
            0.875 - j as f64 / 4.0,
            -(ell as f64) / 6.0,
        ),
        Control::Memory => (
            -1.0 / 12.0 - j as f64 / 6.0,
            11.0 / 12.0 - j as f64 / 6.0,
            -(ell as f64) / 4.0,
        ),
    };
    Ok(L1Exponents {
        tilde_term: tilde,
        growing_term: growing,
        reg_term: reg,
        dominant: tilde.max(growing).max(reg),
    })
}

/// Exponent table: the L^2 pair always, the L^1 triple when `j` is in range.
#[derive(Debug, Clone, Copy)]
pub struct ExponentTable {
    /// Coefficient of `||U0||_1` in the L^2 estimate.
    pub l2_data_term: f64,
    /// Coefficient of the Sobolev block in the L^2 estimate.
    pub l2_reg_term: f64,
    pub l2_dominant: f64,
    pub l1: Option<L1Exponents>,
}

pub fn theoretical_exponents(j: u32, ell: u32, control: Control) -> ExponentTable {
    let (data, reg) = match control {
        Control::Damping => (-0.125 - j as f64 / 4.0, -(ell as f64) / 6.0),
        Control::Memory => (-1.0 / 12.0 - j as f64 / 6.0, -(ell as f64) / 4.0),
    };
    ExponentTable {
        l2_data_term: data,
        l2_reg_term: reg,
        l2_dominant: data.max(reg),
        l1: l1_exponents(j, ell, control).ok(),
    }
}
