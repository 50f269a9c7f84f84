//! Integral-inequality machinery bounding `V1` while the `[0, Y]`
//! measurements are unavailable.
//!
//! During an `I2` window the `w`-side energy obeys the scalar differential
//! inequality
//!
//! ```text
//! V1' <= 2 delta1 V1 + u2(t) gamma'(t) + C u2(t)^2,
//! ```
//!
//! where `gamma = int_0^Y w` satisfies `gamma^2 <= 2 V1`. Solving and
//! integrating the cross term by parts yields a Gronwall-Bellman bound with
//! explicitly computable `alpha` and `beta`; specializing `u2` to the
//! latched interface law collapses it to the closed envelope
//!
//! ```text
//! V1(t) <= calV1(T, V1(t0), a),   a = alpha2^(1/3) V2(t0),
//! calV1 = abar (1 + T beta1 e^(beta1 T)),
//! abar  = (2+P) e^(2 delta1 T) V1(t0) + M1(T) [a^2 + a],
//! beta1 = M2(T) a.
//! ```

use serde::{Deserialize, Serialize};

/// Uniformly sampled signal with linear interpolation (absolutely continuous
/// by construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        assert!(dt > 0.0 && values.len() >= 2);
        PiecewiseLinear { t0, dt, values }
    }

    pub fn constant(t0: f64, horizon: f64, value: f64) -> Self {
        PiecewiseLinear { t0, dt: horizon.max(1e-12), values: vec![value, value] }
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.values.len() - 1) as f64
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let s = ((t - self.t0) / self.dt).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.values.len() - 2);
        (i, s - i as f64)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, frac) = self.locate(t);
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// One-sided slope of the segment containing `t`.
    pub fn slope(&self, t: f64) -> f64 {
        let (i, _) = self.locate(t);
        (self.values[i + 1] - self.values[i]) / self.dt
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Generic Gronwall-Bellman right side
///
/// ```text
/// bound(t) = alpha(t) + int_t0^t alpha(s) beta(s) exp(int_s^t beta) ds
/// ```
///
/// for bounded nonnegative `alpha` and nonnegative integrable `beta`,
/// evaluated by nested quadrature on `n` panels.
pub fn gronwall_bound<A, B>(alpha: A, beta: B, t0: f64, t: f64, n: usize) -> f64
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    assert!(t >= t0 && n >= 2);
    if t == t0 {
        return alpha(t0);
    }
    let h = (t - t0) / n as f64;
    // cumulative integral of beta from the right: bint[j] = int_{s_j}^{t} beta
    let mut bvals = vec![0.0; n + 1];
    for (j, b) in bvals.iter_mut().enumerate() {
        *b = beta(t0 + j as f64 * h);
    }
    let mut bint = vec![0.0; n + 1];
    for j in (0..n).rev() {
        bint[j] = bint[j + 1] + 0.5 * h * (bvals[j] + bvals[j + 1]);
    }
    let mut acc = 0.0;
    for j in 0..=n {
        let s = t0 + j as f64 * h;
        let f = alpha(s) * bvals[j] * bint[j].exp();
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        acc += w * f;
    }
    alpha(t) + acc * h
}

/// Inputs to the windowed `V1` bound.
#[derive(Debug, Clone)]
pub struct GronwallData {
    pub t0: f64,
    pub horizon: f64,
    pub u2: PiecewiseLinear,
    pub delta1: f64,
    pub delta2: f64,
    pub c_coef: f64,
    pub p_bound: f64,
}

/// The windowed bound, sampled on a uniform grid over `[t0, t0 + horizon]`.
#[derive(Debug, Clone)]
pub struct WindowedV1Bound {
    pub ts: Vec<f64>,
    pub bounds: Vec<f64>,
}

impl WindowedV1Bound {
    /// Bound at `t` by linear interpolation of the sample grid.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return self.bounds[0];
        }
        if t >= self.ts[n - 1] {
            return self.bounds[n - 1];
        }
        let dt = self.ts[1] - self.ts[0];
        let s = (t - self.ts[0]) / dt;
        let i = (s.floor() as usize).min(n - 2);
        let frac = s - i as f64;
        self.bounds[i] * (1.0 - frac) + self.bounds[i + 1] * frac
    }

    pub fn sup(&self) -> f64 {
        self.bounds.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }
}

/// Assemble the windowed bound from the raw signal:
///
/// ```text
/// g(t,tau)    = e^(2 delta1 (t - tau)) u2(tau)
/// beta(t,tau) = 2 |dg/dtau|
/// alpha(t)    = 2 e^(2 delta1 (t-t0)) V1(t0)
///               + 2C int u2 g + 2 u2(t)^2
///               + 2 |g(t,t0)| sqrt(V1(t0)) + 1/2 int beta
/// V1(t) <= alpha(t) + int alpha(tau) beta(t,tau) e^(int_tau^t beta) dtau
/// ```
///
/// evaluated with prefix integrals on `n_panels` uniform panels.
pub fn windowed_v1_bound(data: &GronwallData, v1_0: f64, n_panels: usize) -> WindowedV1Bound {
    let n = n_panels.max(64);
    let t0 = data.t0;
    let h = data.horizon / n as f64;
    let d1 = data.delta1;

    // fine-grid samples of u2, |u2' - 2 delta1 u2|, and the shifted
    // exponential E(tau) = e^(-2 delta1 (tau - t0))
    let mut u2 = vec![0.0; n + 1];
    let mut m = vec![0.0; n + 1];
    let mut e_shift = vec![0.0; n + 1];
    for j in 0..=n {
        let tau = t0 + j as f64 * h;
        u2[j] = data.u2.eval(tau);
        m[j] = (data.u2.slope(tau) - 2.0 * d1 * u2[j]).abs();
        e_shift[j] = (-2.0 * d1 * (tau - t0)).exp();
    }
    // prefix trapezoid integrals of u2^2 E and m E
    let mut p_ug = vec![0.0; n + 1];
    let mut p_m = vec![0.0; n + 1];
    for j in 0..n {
        let f0 = u2[j] * u2[j] * e_shift[j];
        let f1 = u2[j + 1] * u2[j + 1] * e_shift[j + 1];
        p_ug[j + 1] = p_ug[j] + 0.5 * h * (f0 + f1);
        p_m[j + 1] = p_m[j] + 0.5 * h * (m[j] * e_shift[j] + m[j + 1] * e_shift[j + 1]);
    }
    let sqrt_v10 = v1_0.max(0.0).sqrt();
    let u2_at_t0 = u2[0].abs();
    // alpha on the grid
    let alpha_at = |j: usize| -> f64 {
        let tau = j as f64 * h;
        let grow = (2.0 * d1 * tau).exp();
        grow * (2.0 * v1_0 + 2.0 * data.c_coef * p_ug[j] + p_m[j] + 2.0 * u2_at_t0 * sqrt_v10) + 2.0 * u2[j] * u2[j]
    };
    let alphas: Vec<f64> = (0..=n).map(alpha_at).collect();

    let mut ts = Vec::with_capacity(n + 1);
    let mut bounds = Vec::with_capacity(n + 1);
    for jt in 0..=n {
        let t_rel = jt as f64 * h;
        ts.push(t0 + t_rel);
        let grow_t = (2.0 * d1 * t_rel).exp();
        // outer trapezoid over tau in [t0, t]
        let mut acc = 0.0;
        for j in 0..=jt {
            let beta = 2.0 * grow_t * e_shift[j] * m[j];
            let bint = 2.0 * grow_t * (p_m[jt] - p_m[j]);
            let f = alphas[j] * beta * bint.exp();
            let w = if j == 0 || j == jt { 0.5 } else { 1.0 };
            acc += w * f;
        }
        let b = alphas[jt] + acc * h;
        // inf * 0 products in the quadrature mean "beyond representable":
        // keep that as +inf rather than NaN
        bounds.push(if b.is_nan() { f64::INFINITY } else { b });
    }
    WindowedV1Bound { ts, bounds }
}

/// Constants of the closed envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub delta1: f64,
    pub delta2: f64,
    pub c_coef: f64,
    pub p_bound: f64,
}

impl From<&crate::control::ControllerParams> for EnvelopeParams {
    fn from(p: &crate::control::ControllerParams) -> Self {
        EnvelopeParams { delta1: p.delta1, delta2: p.delta2, c_coef: p.c_coef, p_bound: p.p_bound }
    }
}

/// Envelope evaluation with its intermediate constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub v1_envelope: f64,
    pub m1: f64,
    pub m2: f64,
    pub abar: f64,
    pub beta1: f64,
    /// `lim_{T->0} M1` read off `g2(0)`
    pub m1_limit_from_g2: f64,
    /// alternative stated value for the same limit, `4 P^2 + P`; both are
    /// reported, neither is preferred
    pub m1_limit_quoted: f64,
}

/// The closed `V1` envelope over a window of length `horizon`, with
/// `latched = alpha2^(1/3) V2(t0)`:
///
/// ```text
/// g1 = (2+P) e^(2 delta1 T)
/// g2(tau) = 2 C e^(2 delta1 tau) P^2 tau + 2 P^2 + e^(2 delta1 tau) P
/// g3(tau) = P delta2 e^(2 delta1 tau) tau
/// h1(tau) = 4 delta2 P e^(2 delta1 tau)
/// M1 = max(sup g2, sup g3),  M2 = sup h1   over [0, T]
/// ```
pub fn v1_envelope_bound(horizon: f64, v1_0: f64, latched: f64, params: &EnvelopeParams) -> EnvelopeReport {
    assert!(horizon >= 0.0 && latched >= 0.0);
    let (d1, d2, c, p) = (params.delta1, params.delta2, params.c_coef, params.p_bound);
    let g2 = |tau: f64| 2.0 * c * (2.0 * d1 * tau).exp() * p * p * tau + 2.0 * p * p + (2.0 * d1 * tau).exp() * p;
    let g3 = |tau: f64| p * d2 * (2.0 * d1 * tau).exp() * tau;
    let h1 = |tau: f64| 4.0 * d2 * p * (2.0 * d1 * tau).exp();
    let sup = |f: &dyn Fn(f64) -> f64| -> f64 {
        if d1 >= 0.0 || horizon == 0.0 {
            // every factor is nondecreasing for nonnegative delta1
            f(horizon).max(f(0.0))
        } else {
            let n = 10_000;
            (0..=n).map(|i| f(horizon * i as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max)
        }
    };
    let m1 = sup(&g2).max(sup(&g3));
    let m2 = sup(&h1);
    let abar = (2.0 + p) * (2.0 * d1 * horizon).exp() * v1_0 + m1 * (latched * latched + latched);
    let beta1 = m2 * latched;
    let v1_envelope = abar * (1.0 + horizon * beta1 * (beta1 * horizon).exp());
    EnvelopeReport {
        v1_envelope,
        m1,
        m2,
        abar,
        beta1,
        m1_limit_from_g2: 2.0 * p * p + p,
        m1_limit_quoted: 4.0 * p * p + p,
    }
}

/// Construct a trajectory that provably satisfies the windowed differential
/// inequality, for domination checks:
///
/// ```text
/// gamma' = kappa(t) u2(t),  kappa in [0, 1],   gamma(t0) = 0,
/// V1 = gamma^2/2 + v1_0.
/// ```
///
/// Then `gamma^2 <= 2 V1` holds by construction, and from
/// `gamma kappa u2 <= gamma^2/2 + u2^2/2 <= V1 + u2^2/2` the inequality
/// `V1' <= 2 delta1 V1 + u2 gamma' + C u2^2` holds for every
/// `delta1 >= 1/2` and `C >= 1/2`. Returns `V1` sampled on the `u2` grid.
pub fn synthesize_sigma5_trajectory(
    u2: &PiecewiseLinear,
    kappa: &PiecewiseLinear,
    v1_0: f64,
    delta1: f64,
    c_coef: f64,
) -> Vec<f64> {
    assert!(delta1 >= 0.5, "the synthetic construction needs delta1 >= 1/2");
    assert!(c_coef >= 0.5, "the synthetic construction needs C >= 1/2");
    assert!(v1_0 >= 0.0);
    assert!(kappa.values.iter().all(|&k| (0.0..=1.0).contains(&k)));
    let n = u2.values.len();
    let h = u2.dt;
    let mut gamma = 0.0;
    let mut out = Vec::with_capacity(n);
    out.push(v1_0);
    for j in 0..n - 1 {
        // Simpson per panel (exact for the quadratic integrands of PL data)
        let t_a = u2.t0 + j as f64 * h;
        let t_m = t_a + 0.5 * h;
        let t_b = t_a + h;
        let f_gamma = |t: f64| kappa.eval(t) * u2.eval(t);
        gamma += h / 6.0 * (f_gamma(t_a) + 4.0 * f_gamma(t_m) + f_gamma(t_b));
        out.push(gamma * gamma / 2.0 + v1_0);
    }
    out
}
