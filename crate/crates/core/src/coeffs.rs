//! Bridge polynomial and boundary coefficient integrals.
//!
//! A function `z` on `[a, b]` with zero end slopes but nonzero end values is
//! reduced to the clamped class by subtracting the cubic bridge `kappa` that
//! matches the end values with zero slopes. The integrals of `kappa^2`,
//! `kappa_x^2`, `kappa_xx^2` are quadratic forms in `(z(a), z(b))` whose
//! coefficients depend only on the interval; they are computed here in closed
//! form, together with the `(delta1, delta2)` split
//!
//! ```text
//! delta1 = (|delta| - 2 delta)/3,   delta2 = (4 |delta| - 2 delta)/3,
//! ```
//!
//! and the resulting one-sided energy bound
//!
//! ```text
//! -int z_xx^2 + lambda1 int z_x^2
//!     <= delta1 int z^2 + C_z1 + delta2 C_z2 + lambda1 C_z3,
//! ```
//!
//! valid whenever `delta <= delta_o(3 lambda1)` on the interval.

use crate::quad::simpson_samples;
#[cfg(test)]
use crate::quad::gauss64_composite;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoeffsError {
    #[error("invalid sampled input: {0}")]
    InvalidInput(String),
    #[error("derivative estimates failed the grid-refinement consistency check (coarse {coarse}, fine {fine})")]
    ResolutionError { coarse: f64, fine: f64 },
}

/// Cubic interpolant with `kappa(a) = za`, `kappa(b) = zb`,
/// `kappa_x(a) = kappa_x(b) = 0`, in the normalized coordinate
/// `t = (x - a)/(b - a)`:
///
/// ```text
/// kappa(x) = za + (zb - za) (3 t^2 - 2 t^3).
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgePoly {
    pub za: f64,
    pub zb: f64,
    pub a: f64,
    pub b: f64,
}

impl BridgePoly {
    #[inline]
    fn t(&self, x: f64) -> f64 {
        (x - self.a) / (self.b - self.a)
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = self.t(x);
        self.za + (self.zb - self.za) * (3.0 * t * t - 2.0 * t * t * t)
    }

    pub fn dx(&self, x: f64) -> f64 {
        let t = self.t(x);
        let h = self.b - self.a;
        (self.zb - self.za) * (6.0 * t - 6.0 * t * t) / h
    }

    pub fn dxx(&self, x: f64) -> f64 {
        let t = self.t(x);
        let h = self.b - self.a;
        (self.zb - self.za) * (6.0 - 12.0 * t) / (h * h)
    }
}

/// Build the bridge cubic for end values `(za, zb)` on `[a, b]`.
pub fn bridge_poly(za: f64, zb: f64, a: f64, b: f64) -> BridgePoly {
    assert!(b > a, "bridge_poly requires b > a");
    BridgePoly { za, zb, a, b }
}

/// Quadratic form `q(p, q) = a p^2 + b q^2 + c p q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadForm {
    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.a * p * p + self.b * q * q + self.c * p * q
    }

    /// Eigenvalues of the symmetric Gram matrix `[[a, c/2], [c/2, b]]`.
    pub fn gram_eigenvalues(&self) -> (f64, f64) {
        let tr = self.a + self.b;
        let det = self.a * self.b - 0.25 * self.c * self.c;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }
}

/// Closed-form coefficient tables for the three boundary integrals on
/// `[a, b]`:
///
/// ```text
/// C_z1 = 2 int kappa_xx^2 = 24 (q - p)^2 / h^3
/// C_z2 =   int kappa^2    = h [ 13/35 p^2 + 13/35 q^2 + 9/35 p q ]
/// C_z3 = 2 int kappa_x^2  = 12 (q - p)^2 / (5 h)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoeffTable {
    pub domain: (f64, f64),
    pub c1: QuadForm,
    pub c2: QuadForm,
    pub c3: QuadForm,
}

impl BoundaryCoeffTable {
    // C_z1 and C_z3 are rank-1 forms (a = b = -c/2), so they are evaluated
    // through the factored a (p - q)^2, which does not cancel for p near q.
    pub fn c1_eval(&self, p: f64, q: f64) -> f64 {
        self.c1.a * (p - q) * (p - q)
    }
    pub fn c2_eval(&self, p: f64, q: f64) -> f64 {
        self.c2.eval(p, q)
    }
    pub fn c3_eval(&self, p: f64, q: f64) -> f64 {
        self.c3.a * (p - q) * (p - q)
    }
}

/// Analytic integration of the squared bridge and its derivatives over
/// `[a, b]`; the coefficients depend only on the interval.
pub fn czi_table(a: f64, b: f64) -> BoundaryCoeffTable {
    assert!(b > a, "czi_table requires b > a");
    let h = b - a;
    let c1 = 24.0 / (h * h * h);
    let c3 = 12.0 / (5.0 * h);
    BoundaryCoeffTable {
        domain: (a, b),
        c1: QuadForm { a: c1, b: c1, c: -2.0 * c1 },
        c2: QuadForm { a: 13.0 * h / 35.0, b: 13.0 * h / 35.0, c: 9.0 * h / 35.0 },
        c3: QuadForm { a: c3, b: c3, c: -2.0 * c3 },
    }
}

/// The split constants of the energy bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSplit {
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
}

pub fn delta_split(delta: f64) -> DeltaSplit {
    DeltaSplit {
        delta,
        delta1: (delta.abs() - 2.0 * delta) / 3.0,
        delta2: (4.0 * delta.abs() - 2.0 * delta) / 3.0,
    }
}

/// A function sampled uniformly on `[a, b]`, endpoints included.
#[derive(Debug, Clone)]
pub struct SampledFn {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

impl SampledFn {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self, CoeffsError> {
        if !(b > a) {
            return Err(CoeffsError::InvalidInput(format!("need b > a, got [{a}, {b}]")));
        }
        if values.len() < 16 {
            return Err(CoeffsError::InvalidInput(format!("need at least 16 samples, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoeffsError::InvalidInput("non-finite sample".into()));
        }
        Ok(SampledFn { a, b, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / (n - 1) as f64;
        SampledFn { a, b, values: (0..n).map(|i| f(a + i as f64 * h)).collect() }
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }
}

/// Fourth-order first derivative of uniform samples (one-sided at the ends).
pub(crate) fn deriv1(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    // 5-point one-sided, order 4
    let c = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
    for k in 0..2 {
        let mut acc_l = 0.0;
        let mut acc_r = 0.0;
        for (j, cj) in c.iter().enumerate() {
            acc_l += cj * values[k + j];
            acc_r += cj * values[n - 1 - k - j];
        }
        d[k] = acc_l / h;
        d[n - 1 - k] = -acc_r / h;
    }
    for i in 2..n - 2 {
        d[i] = (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2]) / (12.0 * h);
    }
    d
}

/// Fourth-order second derivative of uniform samples (one-sided at the ends).
pub(crate) fn deriv2(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    let h2 = h * h;
    // 6-point one-sided, order 4
    let c = [15.0 / 4.0, -77.0 / 6.0, 107.0 / 6.0, -13.0, 61.0 / 12.0, -5.0 / 6.0];
    for k in 0..2 {
        let mut acc_l = 0.0;
        let mut acc_r = 0.0;
        for (j, cj) in c.iter().enumerate() {
            acc_l += cj * values[k + j];
            acc_r += cj * values[n - 1 - k - j];
        }
        d[k] = acc_l / h2;
        d[n - 1 - k] = acc_r / h2;
    }
    for i in 2..n - 2 {
        d[i] = (-values[i + 2] + 16.0 * values[i + 1] - 30.0 * values[i] + 16.0 * values[i - 1] - values[i - 2])
            / (12.0 * h2);
    }
    d
}

/// Right side minus left side of the one-sided energy bound for a sampled
/// function with zero end slopes:
///
/// ```text
/// margin = delta1 int z^2 + C_z1 + delta2 C_z2 + lambda1 C_z3
///          + int z_xx^2 - lambda1 int z_x^2   >= 0
/// ```
///
/// whenever `delta <= delta_o` of the clamped problem with `lambda = 3
/// lambda1` on the same interval. Derivatives are fourth-order finite
/// differences; a half-resolution recomputation of the stiffest integral
/// guards against undersampling.
pub fn energy_bound_margin(z: &SampledFn, lambda1: f64, delta: f64) -> Result<f64, CoeffsError> {
    let h = z.step();
    let n = z.values.len();

    let dz = deriv1(&z.values, h);
    let dzz = deriv2(&z.values, h);

    // admissibility: the sampled function must have (numerically) zero end slopes
    let scale = z.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (z.b - z.a);
    if dz[0].abs() > 1e-4 * scale.max(1.0) || dz[n - 1].abs() > 1e-4 * scale.max(1.0) {
        return Err(CoeffsError::InvalidInput(format!(
            "end slopes must vanish, got z_x(a) = {}, z_x(b) = {}",
            dz[0],
            dz[n - 1]
        )));
    }

    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<f64>>();
    let int_z2 = simpson_samples(&sq(&z.values), h);
    let int_zx2 = simpson_samples(&sq(&dz), h);
    let int_zxx2 = simpson_samples(&sq(&dzz), h);

    // grid-refinement consistency on the stiffest integral
    if n >= 33 {
        let coarse_vals: Vec<f64> = z.values.iter().step_by(2).copied().collect();
        let dzz_c = deriv2(&coarse_vals, 2.0 * h);
        let int_zxx2_c = simpson_samples(&sq(&dzz_c), 2.0 * h);
        let denom = int_zxx2.abs().max(1e-12);
        if (int_zxx2 - int_zxx2_c).abs() / denom > 0.05 {
            return Err(CoeffsError::ResolutionError { coarse: int_zxx2_c, fine: int_zxx2 });
        }
    }

    let split = delta_split(delta);
    let table = czi_table(z.a, z.b);
    let (p, q) = (z.values[0], z.values[n - 1]);
    let rhs = split.delta1 * int_z2
        + table.c1_eval(p, q)
        + split.delta2 * table.c2_eval(p, q)
        + lambda1 * table.c3_eval(p, q);
    let lhs = -int_zxx2 + lambda1 * int_zx2;
    Ok(rhs - lhs)
}
