//! Physical parameters, kernel model, per-mode state, Fourier symbol
//! assembly and initial-data spectra for both beam systems.
//!
//! The state of one frequency `xi` is the vector of hat variables
//! `(v, u, z, y, phi, theta, p)` plus, for the memory system, the kernel
//! moments `m = ∫ g(s) eta(s) ds` and `J = ∫ g(s) |eta(s)|^2 ds`. For the
//! exponential kernel `g(s) = d1 exp(-d2 s)` those moments close exactly:
//! `dm/dt = g0 theta - d2 m` and `dJ/dt = 2 Re(theta conj(m)) - d2 J`,
//! so the memory system becomes a finite 8x8 complex block plus one real
//! scalar, with no discretisation of the history variable.

use crate::error::Error;
use crate::{Result, C64};
use ndarray::Array2;

/// Indices of the complex hat components.
pub const V: usize = 0;
pub const U: usize = 1;
pub const Z: usize = 2;
pub const Y: usize = 3;
pub const PHI: usize = 4;
pub const THETA: usize = 5;
pub const P: usize = 6;
/// Memory-moment slot in the reduced 8x8 system.
pub const M: usize = 7;

/// Number of hat components common to both systems.
pub const NCOMP: usize = 7;

/// Which control acts on the Euler-Bernoulli equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    /// Frictional damping `gamma * w_t` (tau0 = 0).
    Damping,
    /// Infinite exponential memory on `w_xxxx` (tau0 = 1).
    Memory,
}

impl Control {
    pub fn tau0(self) -> f64 {
        match self {
            Control::Damping => 0.0,
            Control::Memory => 1.0,
        }
    }

    /// Dimension of the complex block: 7 for damping, 8 for reduced memory.
    pub fn dim(self) -> usize {
        match self {
            Control::Damping => 7,
            Control::Memory => 8,
        }
    }
}

/// Exponential kernel `g(s) = d1 exp(-d2 s)`.
///
/// This is the one kernel family the moment closure is exact for; the
/// admissibility bounds `-beta2 g <= g' <= -beta1 g` hold with
/// `beta1 = beta2 = d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub d1: f64,
    pub d2: f64,
}

impl KernelParams {
    pub fn new(d1: f64, d2: f64) -> Self {
        Self { d1, d2 }
    }

    /// Total kernel mass `g0 = ∫ g = d1/d2`.
    pub fn g0(&self) -> f64 {
        self.d1 / self.d2
    }

    pub fn beta1(&self) -> f64 {
        self.d2
    }

    pub fn beta2(&self) -> f64 {
        self.d2
    }

    /// `∫ g(s) e^{-i lambda s} ds = d1 / (d2 + i lambda)`.
    pub fn laplace_at(&self, lambda: f64) -> C64 {
        C64::new(self.d1, 0.0) / C64::new(self.d2, lambda)
    }
}

/// Physical constants of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Frictional damping coefficient; only acts for `Control::Damping`.
    pub gamma: f64,
    /// Coupling length constant.
    pub l: f64,
    pub control: Control,
}

/// Relative tolerance for the equal-speed classification; the condition
/// `k1/rho1 = k2/rho2` is an exact algebraic identity.
pub const SPEED_CLASS_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedClass {
    Equal,
    Distinct,
}

impl ModelParams {
    pub fn tau0(&self) -> f64 {
        self.control.tau0()
    }

    pub fn dim(&self) -> usize {
        self.control.dim()
    }

    /// Effective stiffness of the Euler-Bernoulli term: `k3 - tau0 * g0`.
    pub fn k3_eff(&self, kernel: Option<&KernelParams>) -> f64 {
        match self.control {
            Control::Damping => self.k3,
            Control::Memory => self.k3 - kernel.map(|k| k.g0()).unwrap_or(0.0),
        }
    }

    pub fn speed_class(&self) -> SpeedClass {
        let s1 = self.k1 / self.rho1;
        let s2 = self.k2 / self.rho2;
        if (s1 - s2).abs() <= SPEED_CLASS_REL_TOL * s1.abs().max(s2.abs()) {
            SpeedClass::Equal
        } else {
            SpeedClass::Distinct
        }
    }
}

/// Outcome of parameter validation; collects every violation instead of
/// stopping at the first one.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub speeds: SpeedClass,
    /// `Some(g0)` when a kernel was supplied.
    pub kernel_mass: Option<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check positivity of all constants, kernel admissibility `g0 < k3`, and
/// classify the wave speeds. Never aborts; all findings are reported.
pub fn validate_params(params: &ModelParams, kernel: Option<&KernelParams>) -> ValidationReport {
    let mut violations = Vec::new();
    let mut check = |name: &str, value: f64| {
        if !(value > 0.0) || !value.is_finite() {
            violations.push(format!("{name} must be strictly positive, got {value}"));
        }
    };
    check("rho1", params.rho1);
    check("rho2", params.rho2);
    check("rho3", params.rho3);
    check("k0", params.k0);
    check("k1", params.k1);
    check("k2", params.k2);
    check("k3", params.k3);
    check("l", params.l);
    if params.control == Control::Damping {
        check("gamma", params.gamma);
    }

    let mut kernel_mass = None;
    match (params.control, kernel) {
        (Control::Memory, Some(k)) => {
            if !(k.d1 > 0.0) {
                violations.push(format!("d1 must be strictly positive, got {}", k.d1));
            }
            if !(k.d2 > 0.0) {
                violations.push(format!("d2 must be strictly positive, got {}", k.d2));
            }
            let g0 = k.g0();
            kernel_mass = Some(g0);
            if g0.is_finite() && !(g0 < params.k3) {
                violations.push(format!(
                    "kernel mass g0 = d1/d2 = {g0} must satisfy g0 < k3 = {}",
                    params.k3
                ));
            }
        }
        (Control::Memory, None) => {
            violations.push("memory system requires kernel parameters".into());
        }
        (Control::Damping, _) => {}
    }

    ValidationReport {
        violations,
        speeds: params.speed_class(),
        kernel_mass,
    }
}

/// Memory moments carried alongside the hat components for the memory system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryMoments {
    /// Force moment `∫ g(s) eta(s) ds`.
    pub m: C64,
    /// Energy moment `∫ g(s) |eta(s)|^2 ds`; nonnegative.
    pub j: f64,
}

/// Complex state of one frequency mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralState {
    /// `(v, u, z, y, phi, theta, p)` hat values.
    pub hat: [C64; NCOMP],
    /// Present iff the memory control is active.
    pub mem: Option<MemoryMoments>,
}

impl SpectralState {
    pub fn zero(control: Control) -> Self {
        Self {
            hat: [C64::new(0.0, 0.0); NCOMP],
            mem: match control {
                Control::Damping => None,
                Control::Memory => Some(MemoryMoments {
                    m: C64::new(0.0, 0.0),
                    j: 0.0,
                }),
            },
        }
    }

    /// Modulus used by the decay estimates: the plain component sum plus the
    /// memory energy `tau0 * xi^4 * J`.
    pub fn modulus_sq(&self, xi: f64) -> f64 {
        let base: f64 = self.hat.iter().map(|c| c.norm_sqr()).sum();
        match self.mem {
            Some(mm) => base + xi.powi(4) * mm.j,
            None => base,
        }
    }

    /// Cauchy-Schwarz in the kernel measure: `|m|^2 <= g0 J`.
    pub fn moments_admissible(&self, g0: f64) -> bool {
        match self.mem {
            Some(mm) => mm.m.norm_sqr() <= g0 * mm.j * (1.0 + 1e-12) + 1e-300,
            None => true,
        }
    }

    /// Flatten to the ODE layout: 7 or 8 complex slots, then J stored in the
    /// real part of one extra slot for the memory system.
    pub fn to_flat(&self) -> Vec<C64> {
        let mut out = self.hat.to_vec();
        if let Some(mm) = self.mem {
            out.push(mm.m);
            out.push(C64::new(mm.j, 0.0));
        }
        out
    }

    pub fn from_flat(flat: &[C64], control: Control) -> Self {
        let mut hat = [C64::new(0.0, 0.0); NCOMP];
        hat.copy_from_slice(&flat[..NCOMP]);
        let mem = match control {
            Control::Damping => None,
            Control::Memory => Some(MemoryMoments {
                m: flat[M],
                j: flat[M + 1].re,
            }),
        };
        Self { hat, mem }
    }

    /// Complex block only (without J): what the linear generator acts on.
    pub fn complex_block(&self) -> Vec<C64> {
        let mut out = self.hat.to_vec();
        if let Some(mm) = self.mem {
            out.push(mm.m);
        }
        out
    }
}

/// The frequency-dependent generator: the mode obeys `dU/dt = -A(xi) U`.
#[derive(Debug, Clone)]
pub struct FourierSymbol {
    pub xi: f64,
    pub control: Control,
    /// Dense `N x N` complex matrix, `N = 7` (damping) or `N = 8` (memory).
    pub matrix: Array2<C64>,
}

impl FourierSymbol {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Assemble `A(xi)` row by row from the mode equations.
///
/// For the memory system the infinite-dimensional history row is replaced by
/// the exact moment row `dm/dt = g0 theta - d2 m`, and the theta row carries
/// the memory force `+xi^4 m`.
pub fn assemble_symbol(
    params: &ModelParams,
    kernel: Option<&KernelParams>,
    xi: f64,
) -> Result<FourierSymbol> {
    if !xi.is_finite() {
        return Err(Error::NonFiniteFrequency(xi));
    }
    let n = params.dim();
    let mut a = Array2::from_elem((n, n), C64::new(0.0, 0.0));
    let i = C64::new(0.0, 1.0);
    let xi2 = xi * xi;

    a[[V, U]] = -i * xi;
    a[[U, V]] = -i * params.k1 * xi / params.rho1;
    a[[U, P]] = C64::new(params.k0 / params.rho1, 0.0);
    a[[Z, Y]] = -i * xi;
    a[[Y, Z]] = -i * params.k2 * xi / params.rho2;
    a[[Y, P]] = C64::new(params.k0 / params.rho2, 0.0);
    a[[PHI, THETA]] = C64::new(xi2, 0.0);
    a[[THETA, P]] = -i * params.l * params.k0 * xi / params.rho3;
    a[[P, U]] = C64::new(-1.0, 0.0);
    a[[P, Y]] = C64::new(-1.0, 0.0);
    a[[P, THETA]] = -i * params.l * xi;

    match params.control {
        Control::Damping => {
            a[[THETA, PHI]] = C64::new(-params.k3 * xi2 / params.rho3, 0.0);
            a[[THETA, THETA]] = C64::new(params.gamma / params.rho3, 0.0);
        }
        Control::Memory => {
            let kernel = kernel.ok_or_else(|| {
                Error::InvalidParams(vec!["memory system requires kernel parameters".into()])
            })?;
            let g0 = kernel.g0();
            a[[THETA, PHI]] = C64::new(-(params.k3 - g0) * xi2 / params.rho3, 0.0);
            a[[THETA, M]] = C64::new(xi2 * xi2 / params.rho3, 0.0);
            a[[M, THETA]] = C64::new(-g0, 0.0);
            a[[M, M]] = C64::new(kernel.d2, 0.0);
        }
    }

    Ok(FourierSymbol {
        xi,
        control: params.control,
        matrix: a,
    })
}

/// Decay-rate profile `f(xi) = xi^{4+2 tau0} / (xi^{10} + 1)` that shapes the
/// pointwise envelope `exp(-c f(xi) t)`.
pub fn f_rate(xi: f64, control: Control) -> f64 {
    let p = match control {
        Control::Damping => 4,
        Control::Memory => 6,
    };
    xi.powi(p) / (xi.powi(10) + 1.0)
}

/// The combination `q = i xi p_hat - v_hat - z_hat - l phi_hat` vanishes for
/// data coming from the physical second-order system (where
/// `p = phi + psi + l w_x` by definition) and is conserved exactly by the
/// mode flow. Its conservation makes `A(xi)` singular for every `xi`; decay
/// statements apply on the invariant subspace `q = 0`.
pub fn constraint_moment(state: &SpectralState, xi: f64, l: f64) -> C64 {
    C64::new(0.0, xi) * state.hat[P] - state.hat[V] - state.hat[Z] - l * state.hat[PHI]
}

/// Initial spectra with closed-form transforms and closed-form
/// xi-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// Physical bumps `w_c * exp(-x^2 / (2 sigma^2))` per component; the
    /// transform is `w_c * sigma * sqrt(2 pi) * exp(-sigma^2 xi^2 / 2)`.
    Gaussian { sigma: f64, weights: [f64; NCOMP] },
    /// `U0_hat` identically equal to a constant vector.
    FlatSpectrum { weights: [f64; NCOMP] },
    /// A single component set to one.
    PointMode { component: usize },
}

impl InitialProfile {
    /// Gaussian data lying on the invariant subspace `q = 0` for every xi:
    /// the p weight is zero and the v, z, phi weights cancel against l.
    pub fn constrained_gaussian(sigma: f64, l: f64) -> Self {
        let mut weights = [1.0; NCOMP];
        weights[Z] = -(1.0 + l);
        weights[P] = 0.0;
        InitialProfile::Gaussian { sigma, weights }
    }

    /// Flat-spectrum analogue of [`InitialProfile::constrained_gaussian`].
    pub fn constrained_flat(l: f64) -> Self {
        let mut weights = [1.0; NCOMP];
        weights[Z] = -(1.0 + l);
        weights[P] = 0.0;
        InitialProfile::FlatSpectrum { weights }
    }

    /// Whether `q(U0_hat(xi)) = 0` holds for every xi.
    pub fn satisfies_constraint(&self, l: f64) -> bool {
        match self {
            InitialProfile::Gaussian { weights, .. }
            | InitialProfile::FlatSpectrum { weights } => {
                weights[P].abs() <= 1e-14
                    && (weights[V] + weights[Z] + l * weights[PHI]).abs() <= 1e-12
            }
            InitialProfile::PointMode { component } => {
                matches!(*component, U | Y | THETA)
            }
        }
    }

    fn component_values(&self, xi: f64) -> [f64; NCOMP] {
        match self {
            InitialProfile::Gaussian { sigma, weights } => {
                let amp = sigma
                    * (2.0 * std::f64::consts::PI).sqrt()
                    * (-0.5 * sigma * sigma * xi * xi).exp();
                let mut out = [0.0; NCOMP];
                for (o, w) in out.iter_mut().zip(weights) {
                    *o = w * amp;
                }
                out
            }
            InitialProfile::FlatSpectrum { weights } => *weights,
            InitialProfile::PointMode { component } => {
                let mut out = [0.0; NCOMP];
                out[*component] = 1.0;
                out
            }
        }
    }

    /// Exact transform of the chosen profile at frequency `xi`; the memory
    /// history is constant-in-past, so `m(0) = J(0) = 0`.
    pub fn spectrum(&self, xi: f64, control: Control) -> SpectralState {
        let vals = self.component_values(xi);
        let mut state = SpectralState::zero(control);
        for (h, v) in state.hat.iter_mut().zip(vals) {
            *h = C64::new(v, 0.0);
        }
        state
    }

    /// Analytic `d/dxi` of the initial spectrum (zero in the moment slot).
    pub fn spectrum_derivative(&self, xi: f64, control: Control) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); control.dim()];
        if let InitialProfile::Gaussian { sigma, weights } = self {
            let amp = sigma
                * (2.0 * std::f64::consts::PI).sqrt()
                * (-0.5 * sigma * sigma * xi * xi).exp();
            let factor = -sigma * sigma * xi;
            for (o, w) in out.iter_mut().zip(weights) {
                *o = C64::new(w * amp * factor, 0.0);
            }
        }
        out
    }
}
