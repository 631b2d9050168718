//! Matrix-exponential evolution path, independent of the Runge-Kutta one.
//!
//! Two engines live here: a Pade scaling-and-squaring `expm` for dense
//! complex matrices, and an eigenbasis propagator used for long dyadic time
//! ladders where it also yields the memory energy moment `J` in closed form
//! (the source `2 Re(theta conj m)` is a finite sum of exponentials, so its
//! convolution against `exp(-d2 t)` integrates exactly).

use crate::error::Error;
use crate::model::{FourierSymbol, SpectralState, M, THETA};
use crate::{Result, C64};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Solve, SVD};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|c| c.norm()).sum();
        best = best.max(s);
    }
    best
}

fn solve_columns(den: &Array2<C64>, num: &Array2<C64>) -> Result<Array2<C64>> {
    let n = num.nrows();
    let mut out = Array2::from_elem((n, n), C64::new(0.0, 0.0));
    for j in 0..n {
        let col = num.column(j).to_owned();
        let x = den
            .solve(&col)
            .map_err(|e| Error::Eig(format!("pade solve failed: {e}")))?;
        out.column_mut(j).assign(&x);
    }
    Ok(out)
}

/// `exp(A)` by the order-13 Pade approximant with scaling and squaring.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expm needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Eig("expm input has non-finite entries".into()));
    }
    let s = if norm > THETA13 {
        ((norm / THETA13).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let scale = 2f64.powi(-s);
    let a = a.mapv(|x| x * scale);

    let eye = Array2::<C64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b = PADE13;

    let u_inner = a6.mapv(|x| x * b[13]) + a4.mapv(|x| x * b[11]) + a2.mapv(|x| x * b[9]);
    let u_poly = a6.dot(&u_inner)
        + a6.mapv(|x| x * b[7])
        + a4.mapv(|x| x * b[5])
        + a2.mapv(|x| x * b[3])
        + eye.mapv(|x| x * b[1]);
    let u = a.dot(&u_poly);
    let v_inner = a6.mapv(|x| x * b[12]) + a4.mapv(|x| x * b[10]) + a2.mapv(|x| x * b[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|x| x * b[6])
        + a4.mapv(|x| x * b[4])
        + a2.mapv(|x| x * b[2])
        + eye.mapv(|x| x * b[0]);

    let num = &v + &u;
    let den = &v - &u;
    let mut f = solve_columns(&den, &num)?;
    for _ in 0..s {
        f = f.dot(&f);
    }
    Ok(f)
}

/// `exp(-A(xi) t)`, the mode propagator.
pub fn propagator(symbol: &FourierSymbol, t: f64) -> Result<Array2<C64>> {
    expm(&symbol.matrix.mapv(|x| x * (-t)))
}

/// Condition threshold above which eigenvector bases are flagged.
pub const EIGBASIS_COND_WARN: f64 = 1e12;

/// Output of the matrix-exponential oracle.
#[derive(Debug, Clone)]
pub struct OracleOutput {
    /// `exp(-A t) U0` on the complex block.
    pub state: Vec<C64>,
    /// Condition estimate of the eigenvector matrix of `A`.
    pub eig_cond: f64,
    pub cond_warning: bool,
}

/// Evaluate `exp(-A(xi) t) U0` through the Pade path; reports a warning when
/// the eigenvector matrix of `A` is ill conditioned (> 1e12).
pub fn matrix_exponential_oracle(
    symbol: &FourierSymbol,
    state0: &SpectralState,
    t: f64,
) -> Result<OracleOutput> {
    if !(t >= 0.0) {
        return Err(Error::BadTimeGrid(format!("oracle needs t >= 0, got {t}")));
    }
    let u0 = state0.complex_block();
    if u0.len() != symbol.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} does not match symbol dimension {}",
            u0.len(),
            symbol.dim()
        )));
    }
    let m = propagator(symbol, t)?;
    let u0 = Array1::from_vec(u0);
    let state = m.dot(&u0).to_vec();
    let eig_cond = eigenvector_condition(&symbol.matrix).unwrap_or(f64::INFINITY);
    Ok(OracleOutput {
        state,
        eig_cond,
        cond_warning: eig_cond > EIGBASIS_COND_WARN,
    })
}

fn eigenvector_condition(a: &Array2<C64>) -> Result<f64> {
    let (_, vecs) = a
        .eig()
        .map_err(|e| Error::Eig(format!("eigendecomposition failed: {e}")))?;
    condition_from_svd(&vecs)
}

fn condition_from_svd(v: &Array2<C64>) -> Result<f64> {
    let (_, sv, _) = v
        .svd(false, false)
        .map_err(|e| Error::Eig(format!("svd failed: {e}")))?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}

/// Eigenbasis of `-A(xi)` with a fixed expansion of one initial state:
/// `U(t) = sum_i c_i exp(mu_i t) v_i`.
pub struct EigBasis {
    /// Eigenvalues of `-A`.
    pub mu: Array1<C64>,
    /// Eigenvectors, one per column.
    pub vectors: Array2<C64>,
    /// Condition estimate of the eigenvector matrix.
    pub cond: f64,
}

impl EigBasis {
    pub fn new(symbol: &FourierSymbol) -> Result<Self> {
        let neg = symbol.matrix.mapv(|x| -x);
        let (mu, vectors) = neg
            .eig()
            .map_err(|e| Error::Eig(format!("eigendecomposition failed: {e}")))?;
        let cond = condition_from_svd(&vectors)?;
        Ok(Self { mu, vectors, cond })
    }

    pub fn cond_warning(&self) -> bool {
        self.cond > EIGBASIS_COND_WARN
    }

    /// Expansion coefficients of `u0` in the eigenbasis.
    pub fn coefficients(&self, u0: &[C64]) -> Result<Array1<C64>> {
        let rhs = Array1::from_vec(u0.to_vec());
        self.vectors
            .solve(&rhs)
            .map_err(|e| Error::Eig(format!("eigenbasis solve failed: {e}")))
    }

    /// `sum_i c_i exp(mu_i t) v_i`. Decaying exponents are flushed to zero
    /// once they underflow.
    pub fn state_at(&self, coeffs: &Array1<C64>, t: f64) -> Vec<C64> {
        let n = self.mu.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let w = (self.mu[i] * t).exp() * coeffs[i];
            if !w.is_finite() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.vectors.column(i)) {
                *o += w * v;
            }
        }
        out
    }

    /// Closed-form memory energy moment at time `t` for the exponential
    /// kernel: `J' = 2 Re(theta conj m) - d2 J` integrates exactly against
    /// the eigen expansion.
    pub fn j_moment_at(&self, coeffs: &Array1<C64>, t: f64, j0: f64, d2: f64) -> f64 {
        let n = self.mu.len();
        debug_assert!(n > M);
        let decay = (-d2 * t).exp();
        let mut j = decay * j0;
        for a in 0..n {
            let wa = coeffs[a] * self.vectors[[THETA, a]];
            if wa.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..n {
                let wb = (coeffs[b] * self.vectors[[M, b]]).conj();
                if wb.norm_sqr() == 0.0 {
                    continue;
                }
                let nu = self.mu[a] + self.mu[b].conj();
                let denom = nu + d2;
                let integral = if denom.norm() < 1e-10 {
                    // series limit of (e^{nu t} - e^{-d2 t}) / (nu + d2)
                    C64::new(t * decay, 0.0) * (C64::new(1.0, 0.0) + denom * (0.5 * t))
                } else {
                    ((nu * t).exp() - decay) / denom
                };
                if integral.is_finite() {
                    j += 2.0 * (wa * wb * integral).re;
                }
            }
        }
        j.max(0.0)
    }
}

// 16-point Gauss-Legendre rule on [0, 1].
const GL16: [(f64, f64); 16] = [
    (0.0052995325041750307, 0.013576229705877019),
    (0.0277124884633837, 0.031126761969323853),
    (0.067184398806084122, 0.047579255841246296),
    (0.1222977958224985, 0.062314485627767015),
    (0.19106187779867811, 0.074797994408288382),
    (0.27099161117138632, 0.08457825969750131),
    (0.35919822461037054, 0.091301707522461806),
    (0.45249374508118129, 0.094725305227534293),
    (0.54750625491881877, 0.094725305227534293),
    (0.64080177538962946, 0.091301707522461806),
    (0.72900838882861363, 0.08457825969750131),
    (0.80893812220132189, 0.074797994408288382),
    (0.87770220417750155, 0.062314485627767015),
    (0.93281560119391593, 0.047579255841246296),
    (0.9722875115366163, 0.031126761969323853),
    (0.99470046749582497, 0.013576229705877019),
];

/// One output point of the dyadic ladder.
#[derive(Debug, Clone)]
pub struct LadderPoint {
    pub t: f64,
    /// Complex block `exp(-A t) U0`.
    pub block: Vec<C64>,
    /// Joint sensitivity block when a forcing matrix was supplied.
    pub sens: Option<Vec<C64>>,
    /// Memory energy moment when `d2` was supplied.
    pub j: Option<f64>,
}

/// Evolve one mode over the dyadic times `t = 2^k`, `k = 0..=k_max`, by
/// repeated squaring, carrying the optional sensitivity block (same
/// generator, forcing `B U`) and the memory moment `J`.
///
/// `J(t) = exp(-d2 t) J0 + U0^H Q(t) U0`, where the Hermitian form
/// `Q(T) = ∫_0^T exp(-d2 (T-s)) M(s)^H S M(s) ds` obeys the exact doubling
/// `Q(2T) = exp(-d2 T) Q(T) + M(T)^H Q(T) M(T)`; the seed `Q(t0)` is a
/// Gauss-Legendre quadrature over one short step with `||A|| t0 <= 1/2`.
/// This path needs no diagonalisation, so it works uniformly across the
/// frequency grid.
pub fn dyadic_mode_ladder(
    symbol: &FourierSymbol,
    forcing: Option<&Array2<C64>>,
    u0: &[C64],
    sens0: Option<&[C64]>,
    kernel_decay: Option<f64>,
    k_max: u32,
) -> Result<Vec<LadderPoint>> {
    let n = symbol.dim();
    let with_sens = forcing.is_some();
    let dim = if with_sens { 2 * n } else { n };
    let mut gen = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
    for r in 0..n {
        for c in 0..n {
            gen[[r, c]] = -symbol.matrix[[r, c]];
            if with_sens {
                gen[[n + r, n + c]] = -symbol.matrix[[r, c]];
            }
        }
    }
    if let Some(b) = forcing {
        for r in 0..n {
            for c in 0..n {
                gen[[n + r, c]] = b[[r, c]];
            }
        }
    }

    // start the ladder at t0 = 2^-pre with ||G|| t0 <= 1/2
    let norm = one_norm(&gen).max(1.0);
    let pre = (2.0 * norm).log2().ceil().max(0.0) as u32;
    let t0 = 2f64.powi(-(pre as i32));
    let mut m = expm(&gen.mapv(|x| x * t0))?;

    // seed Q(t0) for the memory moment
    let mut q = kernel_decay.map(|d2| {
        let mut src = Array2::from_elem((n, n), C64::new(0.0, 0.0));
        src[[THETA, M]] = C64::new(1.0, 0.0);
        src[[M, THETA]] = C64::new(1.0, 0.0);
        let mut acc = Array2::from_elem((n, n), C64::new(0.0, 0.0));
        for (node, weight) in GL16 {
            let s = node * t0;
            let mb = expm(&symbol.matrix.mapv(|x| x * (-s))).expect("seed expm");
            let term = mb.t().mapv(|x| x.conj()).dot(&src).dot(&mb);
            let scale = weight * t0 * (-d2 * (t0 - s)).exp();
            acc = acc + term.mapv(|x| x * scale);
        }
        acc
    });

    let base_of = |m: &Array2<C64>| -> Array2<C64> {
        if with_sens {
            m.slice(ndarray::s![..n, ..n]).to_owned()
        } else {
            m.clone()
        }
    };

    // climb from t0 to 1
    let mut t = t0;
    for _ in 0..pre {
        if let (Some(qm), Some(d2)) = (&mut q, kernel_decay) {
            let mb = base_of(&m);
            let propagated = mb.t().mapv(|x| x.conj()).dot(qm as &Array2<C64>).dot(&mb);
            *qm = qm.mapv(|x| x * (-d2 * t).exp()) + propagated;
        }
        m = m.dot(&m);
        t *= 2.0;
    }
    debug_assert!((t - 1.0).abs() < 1e-12);

    let mut w0 = u0.to_vec();
    if let Some(s0) = sens0 {
        w0.extend_from_slice(s0);
    }
    let w0 = Array1::from_vec(w0);
    let u0_arr = Array1::from_vec(u0.to_vec());
    let j0 = 0.0;

    let mut out = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let w = m.dot(&w0);
        let block = w.iter().take(n).cloned().collect::<Vec<_>>();
        let sens = with_sens.then(|| w.iter().skip(n).cloned().collect::<Vec<_>>());
        let j = q.as_ref().zip(kernel_decay).map(|(qm, d2)| {
            let qu = qm.dot(&u0_arr);
            let quad: C64 = u0_arr.iter().zip(qu.iter()).map(|(a, b)| a.conj() * b).sum();
            ((-d2 * t).exp() * j0 + quad.re).max(0.0)
        });
        out.push(LadderPoint { t, block, sens, j });
        if k < k_max {
            if let (Some(qm), Some(d2)) = (&mut q, kernel_decay) {
                let mb = base_of(&m);
                let propagated = mb.t().mapv(|x| x.conj()).dot(qm as &Array2<C64>).dot(&mb);
                *qm = qm.mapv(|x| x * (-d2 * t).exp()) + propagated;
            }
            m = m.dot(&m);
            t *= 2.0;
        }
    }
    Ok(out)
}

/// States over the dyadic ladder `t = t0 * 2^k`, `k = 0..=k_max`, computed by
/// repeated squaring of the base propagator.
pub fn dyadic_states(
    symbol: &FourierSymbol,
    u0: &[C64],
    t0: f64,
    k_max: u32,
) -> Result<Vec<(f64, Vec<C64>)>> {
    let mut m = propagator(symbol, t0)?;
    let u0 = Array1::from_vec(u0.to_vec());
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let mut t = t0;
    for k in 0..=k_max {
        out.push((t, m.dot(&u0).to_vec()));
        if k < k_max {
            m = m.dot(&m);
            t *= 2.0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_symbol, Control, KernelParams, ModelParams};
    use ndarray::array;

    fn params_memory() -> (ModelParams, KernelParams) {
        (
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
                control: Control::Memory,
            },
            KernelParams::new(0.25, 0.5),
        )
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let a = Array2::<C64>::zeros((5, 5));
        let e = expm(&a).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[[i, j]] - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn expm_diagonal() {
        let mut a = Array2::<C64>::zeros((3, 3));
        for (k, val) in [-1.0, -2.0, -3.0].iter().enumerate() {
            a[[k, k]] = C64::new(*val, 0.0);
        }
        let e = expm(&a).unwrap();
        for (k, val) in [-1.0f64, -2.0, -3.0].iter().enumerate() {
            assert!((e[[k, k]].re - val.exp()).abs() < 1e-14);
            assert!(e[[k, k]].im.abs() < 1e-15);
        }
    }

    #[test]
    fn expm_nilpotent() {
        let a = array![
            [C64::new(0.0, 0.0), C64::new(2.0, 1.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert!((e[[0, 1]] - C64::new(2.0, 1.0)).norm() < 1e-14);
        assert!((e[[0, 0]] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_matches_taylor_series() {
        // pseudo-random small-norm complex matrix, series summed to machine precision
        let n = 6;
        let mut a = Array2::<C64>::zeros((n, n));
        let mut s = 0.37f64;
        for i in 0..n {
            for j in 0..n {
                s = (s * 997.0 + 0.123).fract();
                let re = s - 0.5;
                s = (s * 997.0 + 0.123).fract();
                let im = s - 0.5;
                a[[i, j]] = C64::new(re, im) * 0.2;
            }
        }
        let mut series = Array2::<C64>::eye(n);
        let mut term = Array2::<C64>::eye(n);
        for k in 1..30 {
            term = term.dot(&a).mapv(|x| x / k as f64);
            series = series + &term;
        }
        let e = expm(&a).unwrap();
        let diff = &e - &series;
        assert!(one_norm(&diff) < 1e-14);
    }

    #[test]
    fn expm_large_time_via_scaling() {
        // exp(-a t) for diagonal with oscillation, large t: needs many squarings
        let mut a = Array2::<C64>::zeros((2, 2));
        a[[0, 0]] = C64::new(0.001, 2.0);
        a[[1, 1]] = C64::new(0.5, -1.0);
        let t = 500.0;
        let e = expm(&a.mapv(|x| x * (-t))).unwrap();
        let want00 = (C64::new(0.001, 2.0) * (-t)).exp();
        assert!((e[[0, 0]] - want00).norm() < 1e-10 * want00.norm());
    }

    #[test]
    fn oracle_at_zero_time_is_identity_action() {
        let (p, k) = params_memory();
        let sym = assemble_symbol(&p, Some(&k), 1.3).unwrap();
        let mut state = SpectralState::zero(Control::Memory);
        state.hat[0] = C64::new(0.4, -0.2);
        state.hat[5] = C64::new(-1.0, 0.7);
        let out = matrix_exponential_oracle(&sym, &state, 0.0).unwrap();
        for (got, want) in out.state.iter().zip(state.complex_block()) {
            assert!((got - want).norm() < 1e-14);
        }
        assert!(!out.cond_warning, "cond = {}", out.eig_cond);
    }

    #[test]
    fn oracle_rejects_negative_time() {
        let (p, k) = params_memory();
        let sym = assemble_symbol(&p, Some(&k), 1.0).unwrap();
        let state = SpectralState::zero(Control::Memory);
        assert!(matrix_exponential_oracle(&sym, &state, -1.0).is_err());
    }

    #[test]
    fn eigenbasis_reproduces_propagator() {
        let (p, k) = params_memory();
        let sym = assemble_symbol(&p, Some(&k), 0.8).unwrap();
        let basis = EigBasis::new(&sym).unwrap();
        assert!(basis.cond < 1e8, "cond = {}", basis.cond);
        let mut u0 = vec![C64::new(0.0, 0.0); 8];
        u0[0] = C64::new(1.0, 0.0);
        u0[3] = C64::new(0.0, -0.5);
        u0[5] = C64::new(0.3, 0.3);
        let coeffs = basis.coefficients(&u0).unwrap();
        for &t in &[0.0, 1.0, 7.5] {
            let via_eig = basis.state_at(&coeffs, t);
            let via_pade = propagator(&sym, t)
                .unwrap()
                .dot(&Array1::from_vec(u0.clone()));
            for (a, b) in via_eig.iter().zip(via_pade.iter()) {
                assert!((a - b).norm() < 1e-10, "t={t}");
            }
        }
    }

    #[test]
    fn mode_ladder_matches_eigen_closed_form() {
        // two fully independent J paths: Q-form doubling vs eigen expansion
        let (p, k) = params_memory();
        for xi in [0.4, 1.7, 24.0] {
            let sym = assemble_symbol(&p, Some(&k), xi).unwrap();
            let profile = crate::model::InitialProfile::constrained_gaussian(1.0, p.l);
            let state0 = profile.spectrum(xi, Control::Memory);
            let u0 = state0.complex_block();
            let ladder = dyadic_mode_ladder(&sym, None, &u0, None, Some(k.d2), 6).unwrap();
            let basis = EigBasis::new(&sym).unwrap();
            let coeffs = basis.coefficients(&u0).unwrap();
            for point in &ladder {
                let state_eig = basis.state_at(&coeffs, point.t);
                for (a, b) in point.block.iter().zip(&state_eig) {
                    assert!((a - b).norm() < 1e-8, "xi={xi} t={}", point.t);
                }
                let j_eig = basis.j_moment_at(&coeffs, point.t, 0.0, k.d2);
                let j_ladder = point.j.unwrap();
                let scale = j_eig.abs().max(1e-14);
                assert!(
                    (j_eig - j_ladder).abs() <= 1e-6 * scale,
                    "xi={xi} t={}: eigen {j_eig:.6e} vs ladder {j_ladder:.6e}",
                    point.t
                );
            }
        }
    }

    #[test]
    fn mode_ladder_carries_sensitivity() {
        use crate::ode::{evolve_with_sensitivity, sensitivity_forcing, IntegratorConfig};
        let (p, k) = params_memory();
        let xi = 0.9;
        let sym = assemble_symbol(&p, Some(&k), xi).unwrap();
        let profile = crate::model::InitialProfile::constrained_gaussian(1.0, p.l);
        let state0 = profile.spectrum(xi, Control::Memory);
        let sens0 = profile.spectrum_derivative(xi, Control::Memory);
        let forcing = sensitivity_forcing(&p, Some(&k), xi);
        let ladder = dyadic_mode_ladder(
            &sym,
            Some(&forcing),
            &state0.complex_block(),
            Some(&sens0),
            Some(k.d2),
            2,
        )
        .unwrap();
        let cfg = IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let traj = evolve_with_sensitivity(
            &p,
            Some(&k),
            &sym,
            &state0,
            &sens0,
            &[0.0, 1.0, 2.0, 4.0],
            &cfg,
        )
        .unwrap();
        for (idx, point) in ladder.iter().enumerate() {
            let rk_state = &traj.states[idx + 1];
            let rk_sens = &traj.sensitivity.as_ref().unwrap()[idx + 1];
            for (a, b) in point.block.iter().zip(rk_state.complex_block()) {
                assert!((a - b).norm() < 1e-8);
            }
            for (a, b) in point.sens.as_ref().unwrap().iter().zip(rk_sens) {
                assert!((a - b).norm() < 1e-7);
            }
            let j_rk = rk_state.mem.unwrap().j;
            assert!((point.j.unwrap() - j_rk).abs() <= 1e-8 * j_rk.max(1e-12));
        }
    }

    #[test]
    fn dyadic_ladder_matches_direct_exponential() {
        let (p, k) = params_memory();
        let sym = assemble_symbol(&p, Some(&k), 2.0).unwrap();
        let mut u0 = vec![C64::new(0.0, 0.0); 8];
        u0[1] = C64::new(1.0, 0.0);
        let ladder = dyadic_states(&sym, &u0, 0.5, 6).unwrap();
        assert_eq!(ladder.len(), 7);
        let (t_last, ref s_last) = ladder[6];
        assert_eq!(t_last, 32.0);
        let direct = propagator(&sym, 32.0)
            .unwrap()
            .dot(&Array1::from_vec(u0.clone()));
        for (a, b) in s_last.iter().zip(direct.iter()) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
